//! Bounded maps with bounded inverse, the biorthogonal families they induce,
//! and the metric operator relating the two families.
//!
//! For a map `S` the families are `phi_n = S e_n` and `psi_n = (S^-1)† e_n`,
//! and the metric is `theta = (S S†)^-1`, the unique positive operator with
//! `theta phi_n = psi_n`. Both `theta` and its inverse are finite sums of
//! rank-one operators built from the families.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::hash::{DefaultHasher, Hash, Hasher};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{inner, spectral_norm, FockSpace, Matrix, Operator, StateVector, ONE, ZERO};

/// Smallest admissible `sigma_min / sigma_max`.
pub const SINGULARITY_FLOOR: f64 = 1e-13;

/// Relative tolerance on `|S S^-1 - I|`, scaled by the condition number.
const INVERSE_CHECK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RieszMap {
    s: Operator,
    s_inv: Operator,
    s_inv_adj: Operator,
    sigma_min: f64,
    sigma_max: f64,
    fingerprint: u64,
}

impl RieszMap {
    /// Builds the map with an inverse taken from the singular value
    /// decomposition of `s`.
    pub fn new(s: Operator, max_cond: f64) -> Result<Self> {
        let d = s.dim();
        let svd = s.matrix().clone().svd(true, true);
        let (sigma_max, sigma_min) = extreme_singular_values(&svd.singular_values);
        check_bounds(sigma_min, sigma_max, max_cond)?;
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let inv_sigma = DVector::from_iterator(d, svd.singular_values.iter().map(|s| Complex64::new(1.0 / s, 0.0)));
        let s_inv = v_t.adjoint() * Matrix::from_diagonal(&inv_sigma) * u.adjoint();
        let s_inv = Operator::from_matrix(s.space(), s_inv)?;
        Self::assemble(s, s_inv, sigma_min, sigma_max)
    }

    /// Builds the map from a known inverse, which is verified rather than
    /// recomputed.
    pub fn with_inverse(s: Operator, s_inv: Operator, max_cond: f64) -> Result<Self> {
        s.same_space(&s_inv)?;
        let sv = s.matrix().singular_values();
        let (sigma_max, sigma_min) = extreme_singular_values(&sv);
        check_bounds(sigma_min, sigma_max, max_cond)?;
        Self::assemble(s, s_inv, sigma_min, sigma_max)
    }

    fn assemble(s: Operator, s_inv: Operator, sigma_min: f64, sigma_max: f64) -> Result<Self> {
        let d = s.dim();
        let cond = sigma_max / sigma_min;
        let residual = spectral_norm(&(s.matrix() * s_inv.matrix() - Matrix::identity(d, d)));
        if !(residual <= INVERSE_CHECK * cond) {
            return Err(Error::InverseCheckFailed { residual });
        }
        let s_inv_adj = s_inv.adjoint();
        let fingerprint = fingerprint(s.matrix());
        Ok(Self {
            s,
            s_inv,
            s_inv_adj,
            sigma_min,
            sigma_max,
            fingerprint,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.s.space()
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn s(&self) -> &Operator {
        &self.s
    }

    pub fn s_inv(&self) -> &Operator {
        &self.s_inv
    }

    pub fn s_adj(&self) -> Operator {
        self.s.adjoint()
    }

    /// `(S^-1)†`
    pub fn s_inv_adj(&self) -> &Operator {
        &self.s_inv_adj
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn cond(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }

    /// `(sigma_min^2, sigma_max^2)`.
    pub fn frame_bounds(&self) -> (f64, f64) {
        (self.sigma_min * self.sigma_min, self.sigma_max * self.sigma_max)
    }

    /// Hash of the bit patterns of `S`; identifies the map an object came from.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn to_record(&self) -> MapRecord {
        MapRecord {
            dim: self.dim(),
            entries: row_major(self.s.matrix()),
        }
    }

    pub fn from_record(record: &MapRecord, max_cond: f64) -> Result<Self> {
        let space = FockSpace::new(record.dim)?;
        let d = record.dim;
        if record.entries.len() != d * d {
            return Err(Error::Format(format!(
                "expected {} entries for dim {d}, found {}",
                d * d,
                record.entries.len()
            )));
        }
        let m = Matrix::from_row_iterator(d, d, record.entries.iter().map(|[re, im]| Complex64::new(*re, *im)));
        Self::new(Operator::from_matrix(space, m)?, max_cond)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("map record serializes")
    }

    pub fn from_json(text: &str, max_cond: f64) -> Result<Self> {
        let record: MapRecord = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_record(&record, max_cond)
    }
}

fn extreme_singular_values(sv: &DVector<f64>) -> (f64, f64) {
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (max, min)
}

fn check_bounds(sigma_min: f64, sigma_max: f64, max_cond: f64) -> Result<()> {
    if !(sigma_max > 0.0) || !(sigma_min > SINGULARITY_FLOOR * sigma_max) {
        let ratio = if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 };
        return Err(Error::NotInvertible { ratio });
    }
    let cond = sigma_max / sigma_min;
    if cond > max_cond {
        return Err(Error::IllConditioned { cond, max_cond });
    }
    Ok(())
}

fn fingerprint(m: &Matrix) -> u64 {
    let mut h = DefaultHasher::new();
    m.nrows().hash(&mut h);
    for z in m.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

fn row_major(m: &Matrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

/// On-disk form of a map: dimension plus row-major `(re, im)` pairs of `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapRecord {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

pub fn make_riesz_map(s: Operator, max_cond: f64) -> Result<RieszMap> {
    RieszMap::new(s, max_cond)
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal folded back into `Q`.
fn haar_unitary(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = Matrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { ONE };
        for row in 0..d {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Deterministic pseudo-random map `U diag(sigma) V†` with Haar unitaries
/// and singular values log-spaced over `[target_cond^-1/2, target_cond^1/2]`,
/// so that `cond == target_cond` up to roundoff.
pub fn random_riesz_map(space: FockSpace, target_cond: f64, seed: u64) -> Result<RieszMap> {
    if !(target_cond >= 1.0) || !target_cond.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target condition number must be >= 1, got {target_cond}"
        )));
    }
    let d = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary(d, &mut rng);
    let v = haar_unitary(d, &mut rng);
    let half_log = 0.5 * target_cond.ln();
    let sigma: Vec<f64> = (0..d)
        .map(|k| (half_log * (1.0 - 2.0 * k as f64 / (d - 1) as f64)).exp())
        .collect();
    let diag = DVector::from_iterator(d, sigma.iter().map(|s| Complex64::new(*s, 0.0)));
    let inv_diag = DVector::from_iterator(d, sigma.iter().map(|s| Complex64::new(1.0 / s, 0.0)));
    let s = &u * Matrix::from_diagonal(&diag) * v.adjoint();
    let s_inv = &v * Matrix::from_diagonal(&inv_diag) * u.adjoint();
    RieszMap::with_inverse(
        Operator::from_matrix(space, s)?,
        Operator::from_matrix(space, s_inv)?,
        target_cond * (1.0 + 1e-6),
    )
}

/// The pair `phi_n = S e_n`, `psi_n = (S^-1)† e_n` (or any biorthogonal pair
/// of the same length).
#[derive(Clone, Debug, PartialEq)]
pub struct BiorthogonalFamily {
    pub phi: Vec<StateVector>,
    pub psi: Vec<StateVector>,
}

impl BiorthogonalFamily {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// `G[n][m] = <phi_n, psi_m>`.
    pub fn gram(&self) -> Matrix {
        let n = self.phi.len();
        let m = self.psi.len();
        Matrix::from_fn(n, m, |r, c| inner(&self.phi[r], &self.psi[c]))
    }

    /// `max_{n,m} |<phi_n, psi_m> - delta_nm|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((g[(r, c)] - target).norm());
            }
        }
        worst
    }
}

pub fn biorthogonal_family(map: &RieszMap) -> BiorthogonalFamily {
    let phi = map.s().matrix().column_iter().map(|c| c.into_owned()).collect();
    let psi = map.s_inv_adj().matrix().column_iter().map(|c| c.into_owned()).collect();
    BiorthogonalFamily { phi, psi }
}

/// `theta = (S S†)^-1` and `theta^-1 = S S†`, both Hermitian positive.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricOperator {
    pub theta: Operator,
    pub theta_inv: Operator,
    source: u64,
}

impl MetricOperator {
    pub fn source_fingerprint(&self) -> u64 {
        self.source
    }

    /// Smallest and largest eigenvalue of `theta`.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        let ev = self.theta.matrix().clone().symmetric_eigenvalues();
        (ev.min(), ev.max())
    }

    /// `|theta - theta†|`
    pub fn hermiticity_defect(&self) -> f64 {
        spectral_norm(&(self.theta.matrix() - self.theta.matrix().adjoint()))
    }

    /// `<f, theta f>`; real up to roundoff for Hermitian `theta`.
    pub fn quadratic_form(&self, f: &StateVector) -> Complex64 {
        inner(f, &self.theta.apply(f))
    }
}

fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn metric_operator(map: &RieszMap) -> MetricOperator {
    let space = map.space();
    let theta = hermitian_part(&(map.s_inv_adj().matrix() * map.s_inv().matrix()));
    let theta_inv = hermitian_part(&(map.s().matrix() * map.s().matrix().adjoint()));
    MetricOperator {
        theta: Operator::from_matrix_unchecked(space, theta),
        theta_inv: Operator::from_matrix_unchecked(space, theta_inv),
        source: map.fingerprint(),
    }
}

/// `(sum_n |psi_n><psi_n|, sum_n |phi_n><phi_n|)`, which reproduce
/// `(theta, theta^-1)` for a complete family.
pub fn theta_rank_one_sums(fam: &BiorthogonalFamily) -> Result<(Operator, Operator)> {
    let d = fam
        .phi
        .first()
        .map(|v| v.len())
        .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    let space = FockSpace::new(d)?;
    let mut psi_sum = Matrix::zeros(d, d);
    let mut phi_sum = Matrix::zeros(d, d);
    for (phi, psi) in fam.phi.iter().zip(&fam.psi) {
        space.check_vector(phi)?;
        space.check_vector(psi)?;
        psi_sum += psi * psi.adjoint();
        phi_sum += phi * phi.adjoint();
    }
    Ok((
        Operator::from_matrix_unchecked(space, psi_sum),
        Operator::from_matrix_unchecked(space, phi_sum),
    ))
}

/// `(<f,g>, sum_n <f,phi_n><psi_n,g>, sum_n <f,psi_n><phi_n,g>)`.
pub fn quasi_basis_check(
    fam: &BiorthogonalFamily,
    f: &StateVector,
    g: &StateVector,
) -> Result<(Complex64, Complex64, Complex64)> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: g.len(),
        });
    }
    let mut via_phi = ZERO;
    let mut via_psi = ZERO;
    for (phi, psi) in fam.phi.iter().zip(&fam.psi) {
        if phi.len() != f.len() {
            return Err(Error::DimensionMismatch {
                expected: phi.len(),
                found: f.len(),
            });
        }
        via_phi += inner(f, phi) * inner(psi, g);
        via_psi += inner(f, psi) * inner(phi, g);
    }
    Ok((inner(f, g), via_phi, via_psi))
}

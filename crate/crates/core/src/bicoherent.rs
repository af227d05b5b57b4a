//! Standard coherent states on the truncated space, the bicoherent pair
//! `eta(z) = S Phi(z)`, `xi(z) = (S^-1)† Phi(z)`, and the resolution of the
//! identity by polar Gauss quadrature.
//!
//! The Gaussian factor `e^{-|z|^2/2}` lives inside every state vector. The
//! quadrature weights carry only the Jacobian and `1/M`; see
//! [`QuadratureScheme`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{inner, spectral_norm, FockSpace, Matrix, Operator, StateVector, ONE, ZERO};
use crate::pseudo_boson::PseudoBosonPair;
use crate::quadrature::QuadratureScheme;
use crate::riesz::{BiorthogonalFamily, RieszMap};

fn ln_factorials(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..=count {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `e^{-|z|^2/2} z^k / sqrt(k!)` for `k < dim`, evaluated in log space so
/// large `|z|` neither overflows nor underflows prematurely.
pub fn coherent_coefficients(dim: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = vec![ZERO; dim];
    let t = z.norm_sqr();
    if t == 0.0 {
        if dim > 0 {
            out[0] = Complex64::new(1.0, 0.0);
        }
        return out;
    }
    let ln_r = z.norm().ln();
    let theta = z.arg();
    let lf = ln_factorials(dim);
    for (k, c) in out.iter_mut().enumerate() {
        let ln_mag = -0.5 * t + k as f64 * ln_r - 0.5 * lf[k];
        *c = Complex64::from_polar(ln_mag.exp(), k as f64 * theta);
    }
    out
}

/// Upper bound on the norm of the omitted tail
/// `e^{-|z|^2/2} (sum_{k>=dim} |z|^{2k}/k!)^{1/2}`, from the geometric
/// majorant with ratio `|z|^2/(dim+1)`. Returns 1 when the ratio is not
/// below one.
pub fn tail_bound(dim: usize, z: Complex64) -> f64 {
    let t = z.norm_sqr();
    if t == 0.0 {
        return 0.0;
    }
    let q = t / (dim as f64 + 1.0);
    if q >= 1.0 {
        return 1.0;
    }
    let lf = ln_factorials(dim);
    let ln_lead = dim as f64 * t.ln() - lf[dim];
    let ln_bound = -0.5 * t + 0.5 * (ln_lead - (1.0 - q).ln());
    ln_bound.exp().min(1.0)
}

/// Tail bound above which truncated coherent states are out of regime.
pub const TAIL_LIMIT: f64 = 1e-12;

/// `|z|^2 <= dim/4` and a tail bound at most [`TAIL_LIMIT`]. The first
/// condition alone admits `|z| = 2` at `dim = 16`, where the tail is about 2e-3.
pub fn coherent_in_regime(dim: usize, z: Complex64) -> bool {
    z.norm_sqr() <= dim as f64 / 4.0 && tail_bound(dim, z) <= TAIL_LIMIT
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    pub z: Complex64,
    pub vec: StateVector,
    pub tail_bound: f64,
}

pub fn coherent(space: FockSpace, z: Complex64) -> CoherentState {
    let d = space.dim();
    CoherentState {
        z,
        vec: StateVector::from_vec(coherent_coefficients(d, z)),
        tail_bound: tail_bound(d, z),
    }
}

/// `<Phi(z), Phi(w)>` of the untruncated states.
pub fn coherent_overlap_kernel(z: Complex64, w: Complex64) -> Complex64 {
    (-(z.norm_sqr() + w.norm_sqr()) / 2.0 + z.conj() * w).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BicoherentPair {
    pub z: Complex64,
    pub eta: StateVector,
    pub xi: StateVector,
    pub tail_bound: f64,
    source: u64,
    cond: f64,
}

impl BicoherentPair {
    pub fn source_fingerprint(&self) -> u64 {
        self.source
    }

    /// `|<eta, xi> - 1|`.
    pub fn normalization_defect(&self) -> f64 {
        (inner(&self.eta, &self.xi) - 1.0).norm()
    }

    /// Tolerance `2 tail cond` for the normalization, floored at roundoff.
    pub fn normalization_tolerance(&self) -> f64 {
        (2.0 * self.tail_bound * self.cond).max(1e-12)
    }
}

pub fn rbcs(map: &RieszMap, z: Complex64) -> BicoherentPair {
    let cs = coherent(map.space(), z);
    BicoherentPair {
        z,
        eta: map.s().apply(&cs.vec),
        xi: map.s_inv_adj().apply(&cs.vec),
        tail_bound: cs.tail_bound,
        source: map.fingerprint(),
        cond: map.cond(),
    }
}

/// `(sum_n c_n phi_n, sum_n c_n psi_n)` with the coherent coefficients
/// `c_n`, over however many levels the family holds.
pub fn series_route(fam: &BiorthogonalFamily, z: Complex64) -> Result<(StateVector, StateVector)> {
    let d = fam
        .phi
        .first()
        .map(|v| v.len())
        .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    let coeffs = coherent_coefficients(fam.len(), z);
    let mut phi = StateVector::zeros(d);
    let mut psi = StateVector::zeros(d);
    for ((c, p), q) in coeffs.iter().zip(&fam.phi).zip(&fam.psi) {
        if p.len() != d || q.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len().max(q.len()),
            });
        }
        phi.axpy(*c, p, ONE);
        psi.axpy(*c, q, ONE);
    }
    Ok((phi, psi))
}

/// Relative residuals `|a eta - z eta| / |eta|` and `|b† xi - z xi| / |xi|`.
pub fn eigen_check(pair: &PseudoBosonPair, bc: &BicoherentPair) -> Result<(f64, f64)> {
    if pair.source().fingerprint() != bc.source {
        return Err(Error::ProvenanceMismatch);
    }
    let z = bc.z;
    let a_eta = pair.a.apply(&bc.eta);
    let bdag_xi = pair.b.matrix().ad_mul(&bc.xi);
    let r_eta = (a_eta - &bc.eta * z).norm() / bc.eta.norm();
    let r_xi = (bdag_xi - &bc.xi * z).norm() / bc.xi.norm();
    Ok((r_eta, r_xi))
}

fn check_scheme(map: &RieszMap, quad: &QuadratureScheme) -> Result<()> {
    if quad.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: quad.dim(),
        });
    }
    Ok(())
}

fn ring_partial(map: &RieszMap, quad: &QuadratureScheme, i: usize) -> Matrix {
    let d = map.dim();
    let m = quad.angular_count;
    let mut etas = Matrix::zeros(d, m);
    let mut xis = Matrix::zeros(d, m);
    for (j, (z, w)) in quad.ring(i).enumerate() {
        let bc = rbcs(map, z);
        etas.set_column(j, &(bc.eta * Complex64::new(w, 0.0)));
        xis.set_column(j, &bc.xi);
    }
    etas * xis.adjoint()
}

/// `R = sum w |eta(z)><xi(z)|` over all nodes, without the resolution
/// preconditions. Rings are assembled in parallel and summed in ring order,
/// so the result does not depend on the thread count.
pub fn resolution_operator(map: &RieszMap, quad: &QuadratureScheme) -> Result<Operator> {
    check_scheme(map, quad)?;
    let partials: Vec<Matrix> = (0..quad.radial_count())
        .into_par_iter()
        .map(|i| ring_partial(map, quad, i))
        .collect();
    let d = map.dim();
    let total = partials.into_iter().fold(Matrix::zeros(d, d), |acc, p| acc + p);
    Operator::from_matrix(map.space(), total)
}

/// `|R - I|` in the spectral norm.
pub fn resolution_of_identity(map: &RieszMap, quad: &QuadratureScheme) -> Result<f64> {
    check_scheme(map, quad)?;
    let d = map.dim();
    if quad.radial_count() < d {
        return Err(Error::UnderResolved {
            what: "radial_count",
            got: quad.radial_count(),
            need: d,
        });
    }
    if quad.angular_count < 2 * d {
        return Err(Error::UnderResolved {
            what: "angular_count",
            got: quad.angular_count,
            need: 2 * d,
        });
    }
    resolution_deviation(map, quad)
}

/// `|R - I|` for any scheme, resolved or not.
pub fn resolution_deviation(map: &RieszMap, quad: &QuadratureScheme) -> Result<f64> {
    let r = resolution_operator(map, quad)?;
    let d = map.dim();
    Ok(spectral_norm(&(r.into_matrix() - Matrix::identity(d, d))))
}

/// `(<f,g>, sum w <f,eta(z)><xi(z),g>)`.
pub fn weak_pairing_check(
    map: &RieszMap,
    quad: &QuadratureScheme,
    f: &StateVector,
    g: &StateVector,
) -> Result<(Complex64, Complex64)> {
    check_scheme(map, quad)?;
    let space = map.space();
    space.check_vector(f)?;
    space.check_vector(g)?;
    // pull f and g through S once instead of transporting every node
    let sf = map.s().matrix().ad_mul(f);
    let sg = map.s_inv().matrix() * g;
    let mut total = ZERO;
    for (z, w) in quad.nodes() {
        let phi = coherent(space, z).vec;
        total += inner(&sf, &phi) * inner(&phi, &sg) * w;
    }
    Ok((inner(f, g), total))
}

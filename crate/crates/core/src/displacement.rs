//! Displacement operators: the unitary `W(z) = exp(z c† - conj(z) c)` and its
//! two similarity transforms `U(z) = S W(z) S^-1`, `V(z) = (S^-1)† W(z) S†`.
//!
//! `U` and `V` are built through the similarity, which is exact for the
//! truncated matrices. Exponentiating `z b - conj(z) a` directly is the
//! ill-conditioned route; it only appears inside the checks that compare the
//! two.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::fock::{ladder_c, ladder_c_dag, restrict, spectral_norm, FockSpace, Matrix, Operator, SafeSubspace};
use crate::pseudo_boson::make_pair;
use crate::report::{ResidualRecord, ResidualReport};
use crate::riesz::RieszMap;

/// Largest power accepted by [`power_similarity_check`].
pub const MAX_POWER: usize = 12;

/// Relative tolerance for the power-similarity residuals.
pub const POWER_SIMILARITY_TOL: f64 = 1e-7;

/// `|z|^2 <= dim / 4`: the coherent-series tail beyond the truncation is
/// negligible there.
pub fn in_regime(space: FockSpace, z: Complex64) -> bool {
    z.norm_sqr() <= space.dim() as f64 / 4.0
}

/// `z c† - conj(z) c`, anti-Hermitian.
pub fn generator(space: FockSpace, z: Complex64) -> Operator {
    let up = ladder_c_dag(space).scale(z);
    let down = ladder_c(space).scale(z.conj());
    &up - &down
}

#[derive(Clone, Debug, PartialEq)]
pub struct Weyl {
    pub op: Operator,
    pub out_of_regime: bool,
}

impl Weyl {
    /// `|W† W - I|`
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.op.dim();
        spectral_norm(&(self.op.matrix().adjoint() * self.op.matrix() - Matrix::identity(d, d)))
    }
}

pub fn weyl(space: FockSpace, z: Complex64) -> Weyl {
    let w = expm(generator(space, z).matrix());
    Weyl {
        op: Operator::from_matrix_unchecked(space, w),
        out_of_regime: !in_regime(space, z),
    }
}

#[derive(Clone, Debug)]
pub struct DisplacementSet {
    pub z: Complex64,
    pub w: Operator,
    pub u: Operator,
    pub v: Operator,
    pub out_of_regime: bool,
    source: u64,
}

impl DisplacementSet {
    pub fn source_fingerprint(&self) -> u64 {
        self.source
    }
}

pub fn displaced_pair(map: &RieszMap, z: Complex64) -> DisplacementSet {
    let space = map.space();
    let w = weyl(space, z);
    let u = &(map.s() * &w.op) * map.s_inv();
    let v = &(map.s_inv_adj() * &w.op) * &map.s_adj();
    DisplacementSet {
        z,
        w: w.op,
        u,
        v,
        out_of_regime: w.out_of_regime,
        source: map.fingerprint(),
    }
}

/// For `k = 0..=k_max`, the relative residual of
/// `S (z c† - conj(z) c)^k S^-1 = (z b - conj(z) a)^k` on the first
/// `dim - k_max` levels.
pub fn power_similarity_check(map: &RieszMap, z: Complex64, k_max: usize) -> Result<ResidualReport> {
    if k_max > MAX_POWER {
        return Err(Error::PowerOutOfRange {
            requested: k_max,
            max: MAX_POWER,
        });
    }
    let space = map.space();
    if k_max >= space.dim() {
        return Err(Error::CutoffOutOfRange {
            cutoff: 0,
            dim: space.dim(),
        });
    }
    let sub = SafeSubspace::new(space, space.dim() - k_max)?;
    let pair = make_pair(map);
    let g = generator(space, z);
    let pb = &pair.b.scale(z) - &pair.a.scale(z.conj());

    let mut report = ResidualReport::default();
    let mut g_pow = Operator::identity(space);
    let mut pb_pow = Operator::identity(space);
    for k in 0..=k_max {
        if k > 0 {
            g_pow = &g_pow * &g;
            pb_pow = &pb_pow * &pb;
        }
        let similar = &(map.s() * &g_pow) * map.s_inv();
        let diff = spectral_norm(&restrict(&(&similar - &pb_pow), &sub)?);
        let scale = spectral_norm(&restrict(&pb_pow, &sub)?).max(f64::MIN_POSITIVE);
        report.push(ResidualRecord::new(
            "power_similarity",
            Some(k),
            diff / scale,
            POWER_SIMILARITY_TOL,
        ));
    }
    Ok(report)
}

/// Leakage above which [`bch_factorization_check`] is flagged out of regime.
pub const BCH_LEAKAGE_LIMIT: f64 = 1e-6;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Amplitude that `e^{z c†}` carries from level `cutoff - 1` onto the top
/// level: `|z|^m sqrt(C(dim-1, cutoff-1)) / sqrt(m!)` with
/// `m = dim - cutoff`. The truncated exponentials disagree beyond that level.
pub fn bch_leakage(space: FockSpace, z: Complex64, cutoff: usize) -> f64 {
    let d = space.dim();
    if cutoff == 0 || cutoff > d || z.norm() == 0.0 {
        return 0.0;
    }
    let k = cutoff - 1;
    let m = d - 1 - k;
    let ln_binom = ln_factorial(d - 1) - ln_factorial(k) - ln_factorial(m);
    (m as f64 * z.norm().ln() + 0.5 * ln_binom - 0.5 * ln_factorial(m)).exp()
}

pub fn bch_in_regime(space: FockSpace, z: Complex64, cutoff: usize) -> bool {
    bch_leakage(space, z, cutoff) <= BCH_LEAKAGE_LIMIT
}

/// Residuals of the factorized forms
/// `U(z) = e^{-|z|^2/2} e^{z b} e^{-conj(z) a}` and
/// `V(z) = e^{-|z|^2/2} e^{z a†} e^{-conj(z) b†}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BchResidual {
    pub u: f64,
    pub v: f64,
    pub out_of_regime: bool,
}

impl BchResidual {
    pub fn max(&self) -> f64 {
        self.u.max(self.v)
    }
}

/// Compares each factorized form with its similarity definition on the
/// image of the safe subspace under the map that carries the canonical
/// basis to the corresponding family: `S` for `U`, `(S^-1)†` for `V`.
/// Each residual is `|(X - X_bch) F P| / |X F P|`, with `F` that map and `P`
/// the inclusion of the first `cutoff` levels.
pub fn bch_factorization_check(map: &RieszMap, z: Complex64, sub: &SafeSubspace) -> Result<BchResidual> {
    let space = map.space();
    if sub.space() != space {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: sub.space().dim(),
        });
    }
    let out_of_regime = !bch_in_regime(space, z, sub.cutoff());

    let set = displaced_pair(map, z);
    let pair = make_pair(map);
    let gauss = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);

    let u_bch = expm(&(pair.b.matrix() * z)) * expm(&(pair.a.matrix() * -z.conj())) * gauss;
    let a_dag = pair.a.matrix().adjoint();
    let b_dag = pair.b.matrix().adjoint();
    let v_bch = expm(&(a_dag * z)) * expm(&(b_dag * -z.conj())) * gauss;

    let k = sub.cutoff();
    let residual = |exact: &Matrix, factored: &Matrix, frame: &Matrix| {
        let cols = frame.columns(0, k);
        let diff = (exact - factored) * cols;
        let reference = exact * cols;
        spectral_norm(&diff) / spectral_norm(&reference)
    };
    Ok(BchResidual {
        u: residual(set.u.matrix(), &u_bch, map.s().matrix()),
        v: residual(set.v.matrix(), &v_bch, map.s_inv_adj().matrix()),
        out_of_regime,
    })
}

/// `|(S S† V(z) - U(z) S S†)|_sub| / |S S†|`.
pub fn intertwining_check(map: &RieszMap, z: Complex64, sub: &SafeSubspace) -> Result<f64> {
    let set = displaced_pair(map, z);
    let ssd = map.s() * &map.s_adj();
    let lhs = &ssd * &set.v;
    let rhs = &set.u * &ssd;
    Ok(spectral_norm(&restrict(&(&lhs - &rhs), sub)?) / ssd.norm())
}

/// `|(W(z) W(w) - e^{i Im(z conj(w))} W(z + w))|_sub|`.
pub fn group_law_defect(space: FockSpace, z: Complex64, w: Complex64, sub: &SafeSubspace) -> Result<f64> {
    let lhs = &weyl(space, z).op * &weyl(space, w).op;
    let phase = Complex64::from_polar(1.0, (z * w.conj()).im);
    let rhs = weyl(space, z + w).op.scale(phase);
    Ok(spectral_norm(&restrict(&(&lhs - &rhs), sub)?))
}

//! The pseudo-bosonic pair `a = S c S^-1`, `b = S c† S^-1`, its vacua, the
//! ladders they generate and the relations those ladders must satisfy.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    commutator, inner, ladder_c, ladder_c_dag, restrict, spectral_norm, FockSpace, Matrix, Operator, SafeSubspace,
    StateVector, ONE,
};
use crate::report::{ResidualRecord, ResidualReport};
use crate::riesz::{BiorthogonalFamily, MetricOperator, RieszMap};

/// Two smallest singular values closer than this make the vacuum ambiguous.
pub const KERNEL_GAP: f64 = 1e-8;
/// Vacua with a smaller raw overlap cannot be normalized against each other.
pub const VACUUM_OVERLAP_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct PseudoBosonPair {
    pub a: Operator,
    pub b: Operator,
    source: RieszMap,
}

impl PseudoBosonPair {
    pub fn space(&self) -> FockSpace {
        self.a.space()
    }

    pub fn source(&self) -> &RieszMap {
        &self.source
    }

    /// `N = b a`.
    pub fn number_operator(&self) -> Operator {
        &self.b * &self.a
    }

    /// `|([a, b] - I) S P| / |S P|` with `P` the inclusion of the first
    /// `cutoff` levels, i.e. the defect on `span(phi_0, ..., phi_{cutoff-1})`.
    pub fn ccr_defect(&self, sub: &SafeSubspace) -> Result<f64> {
        let comm = commutator(&self.a, &self.b)?;
        if sub.space() != self.space() {
            return Err(Error::DimensionMismatch {
                expected: self.space().dim(),
                found: sub.space().dim(),
            });
        }
        let d = self.space().dim();
        let cols = self.source.s().matrix().columns(0, sub.cutoff());
        let diff = (comm.matrix() - Matrix::identity(d, d)) * cols;
        Ok(spectral_norm(&diff) / spectral_norm(&cols.into_owned()))
    }

    /// `|([a, b] - I)|` on the top-left block of the canonical basis. Small
    /// only when `S` leaves the top level invariant.
    pub fn ccr_block_defect(&self, sub: &SafeSubspace) -> Result<f64> {
        let comm = commutator(&self.a, &self.b)?;
        let block = restrict(&comm, sub)?;
        let k = sub.cutoff();
        Ok(spectral_norm(&(block - Matrix::identity(k, k))))
    }

    /// Eigenvalues of `N = b a`, sorted by real part.
    pub fn number_spectrum(&self) -> Result<Vec<Complex64>> {
        let n = self.number_operator().into_matrix();
        let schur = n.try_schur(f64::EPSILON, 100_000).ok_or(Error::NoConvergence)?;
        let ev = schur.eigenvalues().ok_or(Error::NoConvergence)?;
        let mut ev: Vec<Complex64> = ev.iter().cloned().collect();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        Ok(ev)
    }
}

pub fn make_pair(map: &RieszMap) -> PseudoBosonPair {
    let space = map.space();
    let a = &(map.s() * &ladder_c(space)) * map.s_inv();
    let b = &(map.s() * &ladder_c_dag(space)) * map.s_inv();
    PseudoBosonPair {
        a,
        b,
        source: map.clone(),
    }
}

/// Kernel vectors `a phi_0 = 0`, `b† psi_0 = 0` with `<phi_0, psi_0> = 1`.
///
/// The joint gauge `phi_0 -> l phi_0`, `psi_0 -> psi_0 / conj(l)` is fixed by
/// taking `phi_0` of unit norm with its largest-magnitude component real and
/// positive.
#[derive(Clone, Debug, PartialEq)]
pub struct VacuumPair {
    pub phi0: StateVector,
    pub psi0: StateVector,
    /// Factor applied to the unit kernel vector of `b†` to reach `<phi_0, psi_0> = 1`.
    pub normalization: Complex64,
}

impl VacuumPair {
    /// `l` such that `phi_0 = l S e_0` (least squares).
    pub fn gauge(&self, map: &RieszMap) -> Complex64 {
        let s_e0 = map.s().matrix().column(0).into_owned();
        inner(&s_e0, &self.phi0) / s_e0.norm_squared()
    }

    /// Distances of the normalized vacua from the rays of `S e_0` and
    /// `(S^-1)† e_0`, minimized over a phase.
    pub fn ray_distances(&self, map: &RieszMap) -> (f64, f64) {
        let s_e0 = map.s().matrix().column(0).into_owned();
        let dual_e0 = map.s_inv_adj().matrix().column(0).into_owned();
        (ray_distance(&self.phi0, &s_e0), ray_distance(&self.psi0, &dual_e0))
    }
}

/// `min_theta |u/|u| - e^{i theta} v/|v||`.
pub fn ray_distance(u: &StateVector, v: &StateVector) -> f64 {
    let u = u.normalize();
    let v = v.normalize();
    let ov = inner(&v, &u);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    (u - v * phase).norm()
}

fn kernel_vector(m: &Matrix) -> Result<StateVector> {
    let d = m.nrows();
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let (smallest, second) = (sv[d - 1], sv[d - 2]);
    if second - smallest < KERNEL_GAP {
        return Err(Error::DegenerateKernel {
            first: smallest,
            second,
        });
    }
    let v_t = svd.v_t.expect("requested V^T");
    Ok(v_t.row(d - 1).adjoint())
}

pub fn vacua(pair: &PseudoBosonPair) -> Result<VacuumPair> {
    let mut phi0 = kernel_vector(pair.a.matrix())?;
    let psi_unit = kernel_vector(&pair.b.matrix().adjoint())?;

    let lead = (0..phi0.len())
        .max_by(|&i, &j| phi0[i].norm().total_cmp(&phi0[j].norm()))
        .expect("non-empty vector");
    let phase = phi0[lead].conj() / phi0[lead].norm();
    phi0 *= phase;
    phi0[lead] = Complex64::new(phi0[lead].norm(), 0.0);

    let overlap = inner(&phi0, &psi_unit);
    if overlap.norm() < VACUUM_OVERLAP_FLOOR {
        return Err(Error::OrthogonalVacua {
            overlap: overlap.norm(),
        });
    }
    let normalization = overlap.inv();
    Ok(VacuumPair {
        phi0,
        psi0: psi_unit * normalization,
        normalization,
    })
}

/// Ladders `phi_n = b^n phi_0 / sqrt(n!)`, `psi_n = (a†)^n psi_0 / sqrt(n!)`
/// for `n = 0..=n_max`, each step divided by `sqrt(n+1)` so no factorial is
/// ever formed.
pub fn excited_states(pair: &PseudoBosonPair, vac: &VacuumPair, n_max: usize) -> Result<BiorthogonalFamily> {
    let d = pair.space().dim();
    if n_max > d - 1 {
        return Err(Error::LevelOutOfRange {
            requested: n_max,
            max: d - 1,
        });
    }
    let a_dag = pair.a.adjoint();
    let mut phi = Vec::with_capacity(n_max + 1);
    let mut psi = Vec::with_capacity(n_max + 1);
    phi.push(vac.phi0.clone());
    psi.push(vac.psi0.clone());
    for n in 0..n_max {
        let step = 1.0 / ((n + 1) as f64).sqrt();
        phi.push(pair.b.apply(&phi[n]) * Complex64::new(step, 0.0));
        psi.push(a_dag.apply(&psi[n]) * Complex64::new(step, 0.0));
    }
    Ok(BiorthogonalFamily { phi, psi })
}

/// Largest relative deviation of a ladder family from the columns of `l S`
/// and `(S^-1)† / conj(l)`, where `l` is the gauge of the vacuum.
pub fn family_deviation(fam: &BiorthogonalFamily, map: &RieszMap, gauge: Complex64) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 0..fam.len() {
        let phi_ref = map.s().matrix().column(n) * gauge;
        let psi_ref = map.s_inv_adj().matrix().column(n) / gauge.conj();
        worst = worst.max((&fam.phi[n] - &phi_ref).norm() / phi_ref.norm());
        worst = worst.max((&fam.psi[n] - &psi_ref).norm() / psi_ref.norm());
    }
    worst
}

/// Absolute tolerance for the first-order ladder and number relations.
pub fn ladder_tolerance(map: &RieszMap) -> f64 {
    1e-10 * map.cond().max(1.0)
}

/// Residuals of the four lowering/raising relations, for every `n` below
/// the top level of the family.
pub fn ladder_check(pair: &PseudoBosonPair, fam: &BiorthogonalFamily) -> ResidualReport {
    let tol = ladder_tolerance(pair.source());
    let a_dag = pair.a.adjoint();
    let b_dag = pair.b.adjoint();
    let len = fam.len();
    let mut report = ResidualReport::default();
    let real = |x: f64| Complex64::new(x, 0.0);
    for n in 0..len.saturating_sub(1) {
        let up = real(((n + 1) as f64).sqrt());
        let down = real((n as f64).sqrt());

        let r = (pair.b.apply(&fam.phi[n]) - &fam.phi[n + 1] * up).norm();
        report.push(ResidualRecord::new("ladder.b_raises_phi", Some(n), r, tol));

        let lowered = pair.a.apply(&fam.phi[n]);
        let r = if n == 0 {
            lowered.norm()
        } else {
            (lowered - &fam.phi[n - 1] * down).norm()
        };
        report.push(ResidualRecord::new("ladder.a_lowers_phi", Some(n), r, tol));

        let r = (a_dag.apply(&fam.psi[n]) - &fam.psi[n + 1] * up).norm();
        report.push(ResidualRecord::new("ladder.adag_raises_psi", Some(n), r, tol));

        let lowered = b_dag.apply(&fam.psi[n]);
        let r = if n == 0 {
            lowered.norm()
        } else {
            (lowered - &fam.psi[n - 1] * down).norm()
        };
        report.push(ResidualRecord::new("ladder.bdag_lowers_psi", Some(n), r, tol));
    }
    report
}

/// Residuals of `N phi_n = n phi_n` and `N† psi_n = n psi_n` for `n <= len - 2`.
pub fn number_operator_check(pair: &PseudoBosonPair, fam: &BiorthogonalFamily) -> ResidualReport {
    let tol = ladder_tolerance(pair.source());
    let n_op = pair.number_operator();
    let n_dag = n_op.adjoint();
    let mut report = ResidualReport::default();
    for n in 0..fam.len().saturating_sub(1) {
        let level = Complex64::new(n as f64, 0.0);
        let r = (n_op.apply(&fam.phi[n]) - &fam.phi[n] * level).norm();
        report.push(ResidualRecord::new("number.n_phi", Some(n), r, tol));
        let r = (n_dag.apply(&fam.psi[n]) - &fam.psi[n] * level).norm();
        report.push(ResidualRecord::new("number.ndag_psi", Some(n), r, tol));
    }
    report
}

/// `max_{k < count} |lambda_k - k|` over the eigenvalues of `N` sorted by
/// real part.
pub fn spectral_reality_defect(pair: &PseudoBosonPair, count: usize) -> Result<f64> {
    let ev = pair.number_spectrum()?;
    Ok(ev
        .iter()
        .take(count)
        .enumerate()
        .map(|(k, l)| (l - Complex64::new(k as f64, 0.0)).norm())
        .fold(0.0, f64::max))
}

/// `|(a - theta^-1 b† theta)|` on `sub`.
pub fn theta_conjugacy_check(pair: &PseudoBosonPair, metric: &MetricOperator, sub: &SafeSubspace) -> Result<f64> {
    if metric.source_fingerprint() != pair.source().fingerprint() {
        return Err(Error::ProvenanceMismatch);
    }
    let conj = &(&metric.theta_inv * &pair.b.adjoint()) * &metric.theta;
    let diff = &pair.a - &conj;
    Ok(spectral_norm(&restrict(&diff, sub)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_space, I};
    use crate::riesz::{biorthogonal_family, make_riesz_map, metric_operator, random_riesz_map};
    use approx::assert_abs_diff_eq;

    fn projector_map(space: FockSpace) -> RieszMap {
        let mut m = Matrix::identity(space.dim(), space.dim());
        m[(0, 0)] += I;
        make_riesz_map(Operator::from_matrix(space, m).unwrap(), 10.0).unwrap()
    }

    #[test]
    fn bosonic_limit() {
        let s = make_space(10).unwrap();
        let map = make_riesz_map(Operator::identity(s), 2.0).unwrap();
        let pair = make_pair(&map);
        assert_eq!(pair.a, ladder_c(s));
        assert_eq!(pair.b, ladder_c_dag(s));
        let vac = vacua(&pair).unwrap();
        assert_abs_diff_eq!((&vac.phi0 - s.basis_vector(0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((&vac.psi0 - s.basis_vector(0)).norm(), 0.0, epsilon = 1e-14);
        let fam = excited_states(&pair, &vac, 9).unwrap();
        for n in 0..10 {
            assert_abs_diff_eq!((&fam.phi[n] - s.basis_vector(n)).norm(), 0.0, epsilon = 1e-13);
        }
        let rep = ladder_check(&pair, &fam);
        assert!(rep.max_residual() <= 1e-12, "{}", rep.max_residual());
        let n = pair.number_operator();
        for k in 0..10 {
            assert_abs_diff_eq!(n.entry(k, k).re, k as f64, epsilon = 1e-13);
        }
    }

    #[test]
    fn projector_pair_by_hand() {
        // T = 1 + iP, T^-1 = 1 - (1+i)/2 P. Since c P = 0 and P c = |e0><e1|:
        // a = T c T^-1 = c + iPc, i.e. entry (0,1) becomes 1 + i.
        let s = make_space(4).unwrap();
        let map = projector_map(s);
        let pair = make_pair(&map);
        let c = ladder_c(s);
        let mut expect = c.matrix().clone();
        expect[(0, 1)] = Complex64::new(1.0, 1.0);
        assert_abs_diff_eq!((pair.a.matrix() - &expect).norm(), 0.0, epsilon = 1e-14);
        let defect = pair.ccr_defect(&SafeSubspace::below_top(s)).unwrap();
        assert!(defect <= 1e-13);

        let vac = vacua(&pair).unwrap();
        let e0 = s.basis_vector(0);
        // phi_0 ∝ (1+i) e0 and psi_0 ∝ ((1+i)/2) e0, i.e. both along e0
        assert!(ray_distance(&vac.phi0, &(&e0 * Complex64::new(1.0, 1.0))) < 1e-12);
        assert!(ray_distance(&vac.psi0, &(&e0 * Complex64::new(0.5, 0.5))) < 1e-12);
        assert_abs_diff_eq!((inner(&vac.phi0, &vac.psi0) - ONE).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn ccr_on_pseudo_bosonic_levels() {
        let s = make_space(24).unwrap();
        let map = random_riesz_map(s, 8.0, 21).unwrap();
        let pair = make_pair(&map);
        let sub = SafeSubspace::below_top(s);
        assert!(pair.ccr_defect(&sub).unwrap() <= 1e-12);
        // the top-level defect leaks into the canonical block of a dense map
        assert!(pair.ccr_block_defect(&sub).unwrap() > 1e-3);
    }

    #[test]
    fn random_vacua_match_columns() {
        let s = make_space(32).unwrap();
        for seed in 0..4 {
            let map = random_riesz_map(s, 10.0, seed).unwrap();
            let pair = make_pair(&map);
            let vac = vacua(&pair).unwrap();
            let (dphi, dpsi) = vac.ray_distances(&map);
            assert!(dphi < 1e-10 && dpsi < 1e-10, "{dphi} {dpsi}");
            assert!(pair.a.apply(&vac.phi0).norm() <= 1e-10 * pair.a.norm());
            assert!(pair.b.adjoint().apply(&vac.psi0).norm() <= 1e-10 * pair.b.norm());
            assert_abs_diff_eq!((inner(&vac.phi0, &vac.psi0) - ONE).norm(), 0.0, epsilon = 1e-12);
            let lead = vac.phi0.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
            assert_eq!(lead.im, 0.0);
            assert!(lead.re > 0.0);
        }
    }

    #[test]
    fn excited_states_reproduce_columns() {
        let s = make_space(32).unwrap();
        let map = random_riesz_map(s, 10.0, 11).unwrap();
        let pair = make_pair(&map);
        let vac = vacua(&pair).unwrap();
        let fam = excited_states(&pair, &vac, 16).unwrap();
        assert_eq!(fam.len(), 17);
        assert_eq!(fam.phi[0], vac.phi0);
        let dev = family_deviation(&fam, &map, vac.gauge(&map));
        assert!(dev <= 1e-8 * map.cond(), "{dev}");
        assert!(matches!(
            excited_states(&pair, &vac, 32),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn ladder_and_number_relations_random() {
        let s = make_space(64).unwrap();
        let map = random_riesz_map(s, 10.0, 5).unwrap();
        let pair = make_pair(&map);
        let fam = biorthogonal_family(&map);
        let rep = ladder_check(&pair, &fam);
        assert_eq!(rep.records.len(), 4 * 63);
        assert!(rep.passed() && rep.max_residual() <= 1e-9, "{}", rep.max_residual());
        assert!(rep.max_for("ladder.a_lowers_phi") >= 0.0);
        let num = number_operator_check(&pair, &fam);
        assert!(num.passed() && num.max_residual() <= 1e-9, "{}", num.max_residual());
    }

    #[test]
    fn number_spectrum_is_integer() {
        let s = make_space(32).unwrap();
        let map = random_riesz_map(s, 10.0, 2).unwrap();
        let pair = make_pair(&map);
        let defect = spectral_reality_defect(&pair, 31).unwrap();
        assert!(defect <= 1e-8, "{defect}");
    }

    #[test]
    fn theta_conjugacy() {
        let s = make_space(16).unwrap();
        let proj = projector_map(s);
        let pair = make_pair(&proj);
        let sub = SafeSubspace::new(s, 15).unwrap();
        let r = theta_conjugacy_check(&pair, &metric_operator(&proj), &sub).unwrap();
        assert!(r <= 1e-12, "{r}");

        let id = make_riesz_map(Operator::identity(s), 2.0).unwrap();
        let r = theta_conjugacy_check(&make_pair(&id), &metric_operator(&id), &sub).unwrap();
        assert_eq!(r, 0.0);

        let rand_map = random_riesz_map(s, 10.0, 8).unwrap();
        let metric = metric_operator(&rand_map);
        let r = theta_conjugacy_check(&make_pair(&rand_map), &metric, &sub).unwrap();
        assert!(r <= 1e-10 * 1e3, "{r}");
        assert_eq!(
            theta_conjugacy_check(&pair, &metric, &sub).unwrap_err(),
            Error::ProvenanceMismatch
        );
    }

    #[test]
    fn ray_distance_ignores_phase_and_scale() {
        let s = make_space(3).unwrap();
        let v = s.basis_vector(1) + s.basis_vector(2) * I;
        assert!(ray_distance(&v, &(&v * Complex64::new(-3.0, 2.0))) < 1e-15);
        assert!(ray_distance(&v, &s.basis_vector(0)) > 1.0);
    }
}

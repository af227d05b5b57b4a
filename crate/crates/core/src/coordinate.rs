//! The oscillator example in the position representation: Hermite
//! functions, the coherent wavefunction, and the map `T = I + i P_u`.
//!
//! Phase convention: `Phi_z(x) = pi^{-1/4} exp(-x^2/2 + sqrt(2) z x - Re(z)^2)`.
//! This differs from the textbook normalization
//! `exp(-(|z|^2 + z^2)/2 + ...)` by the global phase `e^{i Re(z) Im(z)}`, so
//! `<e_0, Phi_z> = e^{-|z|^2/2 + i Re(z) Im(z)}`. The Fock route multiplies
//! its coefficients by that same phase before comparing.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::bicoherent::coherent_coefficients;
use crate::error::{Error, Result};
use crate::fock::{inner, FockSpace, Matrix, Operator, StateVector, ZERO};
use crate::quadrature::{gauss_hermite, hermite_functions};
use crate::riesz::RieszMap;

/// Largest `|x|` accepted by the Hermite evaluators.
pub const X_LIMIT: f64 = 40.0;

/// Extra Gauss–Hermite nodes beyond the dimension in [`cross_validate`].
pub const EXTRA_NODES: usize = 10;

const UNIT_TOL: f64 = 1e-12;

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > X_LIMIT {
        return Err(Error::CoordinateOutOfRange { x, limit: X_LIMIT });
    }
    Ok(())
}

/// Orthonormal Hermite function `e_n(x)`.
pub fn hermite_basis(n: usize, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(hermite_functions(n + 1, x)[n])
}

/// `e_0(x), ..., e_{count-1}(x)`.
pub fn hermite_values(count: usize, x: f64) -> Result<Vec<f64>> {
    check_x(x)?;
    Ok(hermite_functions(count, x))
}

/// `e^{i Re(z) Im(z)}`: the coordinate formula relative to the Fock series.
pub fn convention_phase(z: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, z.re * z.im)
}

pub fn coherent_wavefunction(z: Complex64, x: f64) -> Complex64 {
    let e = Complex64::new(-0.5 * x * x - z.re * z.re, 0.0) + z * (SQRT_2 * x);
    e.exp() * PI.powf(-0.25)
}

/// `<e_0, Phi_z>` in the coordinate convention.
pub fn ground_overlap(z: Complex64) -> Complex64 {
    Complex64::new(-0.5 * z.norm_sqr(), z.re * z.im).exp()
}

/// Closed forms of `T Phi_z` and `(T^-1)† Phi_z` for `T = I + i|e_0><e_0|`.
pub fn example_wavefunctions(z: Complex64, x: f64) -> (Complex64, Complex64) {
    let e0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    let big = (z * (SQRT_2 * x) - z.re * z.re).exp();
    let g = ground_overlap(z);
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, -0.5);
    (big * e0 + i * g * e0, big * e0 - half * g * e0)
}

/// `T = I + i P_u` with `T^-1 = I - ((1+i)/2) P_u`, for a unit vector `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorMap {
    pub u: StateVector,
    pub t: Operator,
    pub t_inv: Operator,
    pub map: RieszMap,
}

pub fn projector_map(space: FockSpace, u: &StateVector) -> Result<ProjectorMap> {
    space.check_vector(u)?;
    let norm = u.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let d = space.dim();
    let p = u * u.adjoint();
    let id = Matrix::identity(d, d);
    let t = Operator::from_matrix(space, &id + &p * Complex64::new(0.0, 1.0))?;
    let t_inv = Operator::from_matrix(space, &id - &p * Complex64::new(0.5, 0.5))?;
    let map = RieszMap::with_inverse(t.clone(), t_inv.clone(), 2.0)?;
    Ok(ProjectorMap {
        u: u.clone(),
        t,
        t_inv,
        map,
    })
}

impl ProjectorMap {
    pub fn space(&self) -> FockSpace {
        self.map.space()
    }

    /// `u(x) = sum_k u_k e_k(x)`.
    pub fn u_wavefunction(&self, x: f64) -> Result<Complex64> {
        let h = hermite_values(self.u.len(), x)?;
        Ok(self.u.iter().zip(&h).map(|(c, e)| c * *e).sum())
    }

    /// `<u, Phi_z>` in the coordinate convention, summed over the support of
    /// `u`.
    pub fn u_overlap(&self, z: Complex64) -> Complex64 {
        let coeffs = StateVector::from_vec(coherent_coefficients(self.u.len(), z));
        inner(&self.u, &coeffs) * convention_phase(z)
    }

    /// `(Phi_z(x) + i <u,Phi_z> u(x), Phi_z(x) - ((1-i)/2) <u,Phi_z> u(x))`.
    pub fn wavefunctions(&self, z: Complex64, x: f64) -> Result<(Complex64, Complex64)> {
        let big = coherent_wavefunction(z, x);
        let g = self.u_overlap(z) * self.u_wavefunction(x)?;
        Ok((big + Complex64::new(0.0, 1.0) * g, big - Complex64::new(0.5, -0.5) * g))
    }

    /// Fock coefficients of `eta(z)` and `xi(z)`, in the coordinate phase
    /// convention.
    pub fn fock_states(&self, z: Complex64) -> (StateVector, StateVector) {
        let phase = convention_phase(z);
        let coeffs = StateVector::from_vec(coherent_coefficients(self.u.len(), z)) * phase;
        (self.t.apply(&coeffs), self.t_inv.matrix().ad_mul(&coeffs))
    }
}

fn expand(coeffs: &StateVector, h: &[f64]) -> Complex64 {
    coeffs.iter().zip(h).map(|(c, e)| c * *e).sum()
}

/// Closed form against Fock route on a Gauss–Hermite grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossValidation {
    pub z: Complex64,
    pub max_pointwise: f64,
    pub l2_phi: f64,
    pub l2_psi: f64,
    /// `integral conj(phi_z) Psi_z dx` from the closed forms.
    pub pairing: Complex64,
}

impl CrossValidation {
    pub fn l2(&self) -> f64 {
        self.l2_phi.max(self.l2_psi)
    }
}

/// Compares the closed forms with the Hermite expansion of the Fock states,
/// using the `order`-point Gauss–Hermite grid. Requires `|z|^2 <= dim/4` and
/// `order >= dim + 10`.
pub fn cross_validate(proj: &ProjectorMap, z: Complex64, order: usize) -> Result<CrossValidation> {
    let d = proj.space().dim();
    let limit = d as f64 / 4.0;
    if z.norm_sqr() > limit {
        return Err(Error::OutOfRegime {
            norm_sqr: z.norm_sqr(),
            limit,
        });
    }
    if order < d + EXTRA_NODES {
        return Err(Error::UnderResolved {
            what: "hermite_order",
            got: order,
            need: d + EXTRA_NODES,
        });
    }
    let rule = gauss_hermite(order)?;
    let (eta, xi) = proj.fock_states(z);
    let mut max_pointwise: f64 = 0.0;
    let mut sq_phi = 0.0;
    let mut sq_psi = 0.0;
    let mut pairing = ZERO;
    for (&x, &w) in rule.nodes.iter().zip(&rule.measure_weights) {
        let h = hermite_values(d, x)?;
        let (phi, psi) = proj.wavefunctions(z, x)?;
        let dphi = (phi - expand(&eta, &h)).norm();
        let dpsi = (psi - expand(&xi, &h)).norm();
        max_pointwise = max_pointwise.max(dphi).max(dpsi);
        sq_phi += w * dphi * dphi;
        sq_psi += w * dpsi * dpsi;
        pairing += phi.conj() * psi * w;
    }
    Ok(CrossValidation {
        z,
        max_pointwise,
        l2_phi: sq_phi.sqrt(),
        l2_psi: sq_psi.sqrt(),
        pairing,
    })
}

/// `integral e_0(x) Phi_z(x) dx` on an `order`-point Gauss–Hermite grid.
pub fn ground_overlap_quadrature(z: Complex64, order: usize) -> Result<Complex64> {
    let rule = gauss_hermite(order)?;
    let mut total = ZERO;
    for (&x, &w) in rule.nodes.iter().zip(&rule.measure_weights) {
        total += coherent_wavefunction(z, x) * (hermite_basis(0, x)? * w);
    }
    Ok(total)
}

/// Step of the central differences in [`eigen_relation_residual`].
pub const FD_STEP: f64 = 1e-5;

/// `max_x |(x Phi_z + Phi_z') / sqrt(2) - z Phi_z|` over `points` uniform
/// samples of `[-half_width, half_width]`, derivative by central differences.
pub fn eigen_relation_residual(z: Complex64, half_width: f64, points: usize) -> f64 {
    let h = FD_STEP;
    let mut worst: f64 = 0.0;
    for k in 0..points {
        let x = if points == 1 {
            0.0
        } else {
            -half_width + 2.0 * half_width * k as f64 / (points - 1) as f64
        };
        let f = coherent_wavefunction(z, x);
        let df = (coherent_wavefunction(z, x + h) - coherent_wavefunction(z, x - h)) / (2.0 * h);
        let lowered = (f * x + df) / SQRT_2;
        worst = worst.max((lowered - z * f).norm());
    }
    worst
}

/// One line of a wavefunction table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavefunctionRow {
    pub x: f64,
    pub big_phi: Complex64,
    pub phi: Complex64,
    pub psi: Complex64,
}

pub fn wavefunction_rows(proj: &ProjectorMap, z: Complex64, xs: &[f64]) -> Result<Vec<WavefunctionRow>> {
    xs.iter()
        .map(|&x| {
            let (phi, psi) = proj.wavefunctions(z, x)?;
            Ok(WavefunctionRow {
                x,
                big_phi: coherent_wavefunction(z, x),
                phi,
                psi,
            })
        })
        .collect()
}

/// `points` uniform samples of `[-half_width, half_width]`.
pub fn uniform_grid(half_width: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| -half_width + 2.0 * half_width * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::make_space;
    use crate::riesz::metric_operator;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ground_map(d: usize) -> ProjectorMap {
        let space = make_space(d).unwrap();
        projector_map(space, &space.basis_vector(0)).unwrap()
    }

    #[test]
    fn hermite_values_at_origin() {
        assert_abs_diff_eq!(hermite_basis(0, 0.0).unwrap(), 0.7511255444649425, epsilon = 1e-15);
        assert_eq!(hermite_basis(1, 0.0).unwrap(), 0.0);
        assert!(matches!(
            hermite_basis(0, 41.0),
            Err(Error::CoordinateOutOfRange { .. })
        ));
    }

    #[test]
    fn hermite_orthonormal() {
        let rule = gauss_hermite(48).unwrap();
        let n = 33;
        let mut gram = vec![vec![0.0; n]; n];
        for (&x, &w) in rule.nodes.iter().zip(&rule.measure_weights) {
            let h = hermite_values(n, x).unwrap();
            for (row, ha) in gram.iter_mut().zip(&h) {
                for (g, hb) in row.iter_mut().zip(&h) {
                    *g += w * ha * hb;
                }
            }
        }
        for (a, row) in gram.iter().enumerate() {
            for (b, g) in row.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((g - target).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn coherent_wavefunction_values() {
        for x in [-1.0, 0.0, 0.3, 2.0] {
            let v = coherent_wavefunction(ZERO, x);
            assert_abs_diff_eq!(v.re, hermite_basis(0, x).unwrap(), epsilon = 1e-15);
            assert_eq!(v.im, 0.0);
        }
        let v = coherent_wavefunction(c(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(v.re, PI.powf(-0.25) * (-1f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn finite_difference_eigen_relation() {
        for z in [ZERO, c(1.0, 0.0), c(1.0, 1.0), c(0.0, 2.0), c(-1.3, 0.7)] {
            assert!(eigen_relation_residual(z, 6.0, 601) <= 1e-6, "z={z}");
        }
    }

    #[test]
    fn projector_algebra() {
        let pm = ground_map(16);
        let prod = pm.t.matrix() * pm.t_inv.matrix();
        assert!((prod - Matrix::identity(16, 16)).camax() <= 1e-14);
        let (lo, hi) = pm.map.frame_bounds();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-12);
        let theta = metric_operator(&pm.map).theta;
        let mut expected = Matrix::identity(16, 16);
        expected[(0, 0)] = c(0.5, 0.0);
        assert!((theta.matrix() - expected).camax() <= 1e-13);
    }

    #[test]
    fn projector_rejects_non_unit() {
        let space = make_space(8).unwrap();
        let u = space.basis_vector(0) * c(1.1, 0.0);
        assert!(matches!(projector_map(space, &u), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn spot_values() {
        let e0 = PI.powf(-0.25);
        let (a, b) = ((-1f64).exp(), (-0.5f64).exp());
        let (phi, psi) = example_wavefunctions(c(1.0, 0.0), 0.0);
        assert!((phi - c(a, b) * e0).norm() <= 1e-15);
        assert!((psi - c(a - 0.5 * b, 0.5 * b) * e0).norm() <= 1e-15);
        assert_abs_diff_eq!(phi.re, 0.2763236, epsilon = 1e-7);
        assert_abs_diff_eq!(phi.im, 0.4555807, epsilon = 1e-7);
        assert_abs_diff_eq!(psi.re, 0.0485333, epsilon = 1e-7);
        assert_abs_diff_eq!(psi.im, 0.2277904, epsilon = 1e-7);

        let (phi, psi) = example_wavefunctions(ZERO, 0.0);
        assert!((phi - c(1.0, 1.0) * e0).norm() <= 1e-15);
        assert!((psi - c(0.5, 0.5) * e0).norm() <= 1e-15);
    }

    #[test]
    fn general_form_reduces_to_closed_form() {
        let pm = ground_map(8);
        for z in [c(1.0, 0.0), c(1.0, 1.0), c(0.0, 2.0), c(-0.4, 0.9)] {
            for x in [-2.0, 0.0, 0.7, 3.1] {
                let (a, b) = example_wavefunctions(z, x);
                let (p, q) = pm.wavefunctions(z, x).unwrap();
                assert!((a - p).norm() <= 1e-14 && (b - q).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn ground_overlap_by_quadrature() {
        for z in [ZERO, c(1.0, 0.0), c(1.0, 1.0), c(0.0, 2.0), c(-1.2, 0.8)] {
            let q = ground_overlap_quadrature(z, 74).unwrap();
            assert!((q - ground_overlap(z)).norm() <= 1e-9, "z={z}");
        }
    }

    #[test]
    fn cross_validation_routes() {
        let pm = ground_map(64);
        for z in [ZERO, c(1.0, 0.0), c(1.0, 1.0), c(0.0, 2.0)] {
            let cv = cross_validate(&pm, z, 74).unwrap();
            assert!(cv.l2() <= 1e-8, "z={z}: {}", cv.l2());
            assert!((cv.pairing - 1.0).norm() <= 1e-9);
        }
        let cv = cross_validate(&pm, ZERO, 74).unwrap();
        assert!(cv.max_pointwise <= 1e-12);
        assert!(matches!(
            cross_validate(&pm, c(5.0, 0.0), 74),
            Err(Error::OutOfRegime { .. })
        ));
        assert!(matches!(
            cross_validate(&pm, ZERO, 64),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn shifted_projector() {
        let space = make_space(64).unwrap();
        let pm = projector_map(space, &space.basis_vector(3)).unwrap();
        let (lo, hi) = pm.map.frame_bounds();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-12);
        for z in [c(0.5, 0.5), c(1.5, -1.0), c(0.0, 2.0)] {
            let cv = cross_validate(&pm, z, 74).unwrap();
            assert!((cv.pairing - 1.0).norm() <= 1e-9);
            assert!(cv.l2() <= 1e-8);
        }
    }

    #[test]
    fn rows_and_grid() {
        let grid = uniform_grid(6.0, 601);
        assert_eq!(grid.len(), 601);
        assert_eq!(grid[0], -6.0);
        assert_eq!(grid[600], 6.0);
        let pm = ground_map(8);
        let rows = wavefunction_rows(&pm, c(1.0, 0.0), &[0.0]).unwrap();
        assert_abs_diff_eq!(rows[0].phi.im, PI.powf(-0.25) * (-0.5f64).exp(), epsilon = 1e-15);
    }
}

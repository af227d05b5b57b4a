//! Gauss rules for the half line (Laguerre weight `e^{-t}`) and the real line
//! (Hermite weight `e^{-x^2}`), plus the polar product rule used to
//! integrate over the complex plane.
//!
//! Nodes come from the Golub–Welsch eigenvalue problem and are polished by
//! Newton steps on the three-term recurrence. Weights use the Christoffel
//! sum `1 / sum_k p_k(x)^2` over orthonormal polynomials, evaluated through
//! the exponentially scaled functions so that nothing overflows for large
//! nodes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const NEWTON_STEPS: usize = 3;

/// Nodes and weights of an `n`-point Gauss rule.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    /// Weights for `integral f(x) w(x) dx`.
    pub weights: Vec<f64>,
    /// Weights for `integral g(x) dx` with `g = f w`, i.e. `weights / w(node)`,
    /// computed without forming `1 / w(node)`.
    pub measure_weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn jacobi_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = diag[k];
    }
    for (k, b) in off.iter().enumerate() {
        j[(k, k + 1)] = *b;
        j[(k + 1, k)] = *b;
    }
    let eig = j
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or(Error::NoConvergence)?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Orthonormal Hermite functions `psi_0(x), ..., psi_{count-1}(x)`:
/// `psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}`,
/// `psi_0 = pi^{-1/4} e^{-x^2/2}`.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if count == 1 {
        return out;
    }
    out.push(2f64.sqrt() * x * out[0]);
    for k in 1..count - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Laguerre functions `l_k(t) = L_k(t) e^{-t/2}`, `k < count`, with `L_k` the
/// Laguerre polynomials (orthonormal for the weight `e^{-t}`).
pub fn laguerre_functions(count: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let scale = (-0.5 * t).exp();
    out.push(scale);
    if count == 1 {
        return out;
    }
    out.push((1.0 - t) * scale);
    for k in 1..count - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `n`-point Gauss–Laguerre rule for `integral_0^inf f(t) e^{-t} dt`.
pub fn gauss_laguerre(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("rule needs at least one node".into()));
    }
    let diag: Vec<f64> = (0..n).map(|k| (2 * k + 1) as f64).collect();
    let off: Vec<f64> = (1..n).map(|k| k as f64).collect();
    let mut nodes = jacobi_eigenvalues(&diag, &off)?;
    let nf = n as f64;
    for t in nodes.iter_mut() {
        for _ in 0..NEWTON_STEPS {
            let l = laguerre_functions(n + 1, *t);
            // t L_n' = n (L_n - L_{n-1}); the e^{-t/2} scale cancels in the ratio
            let deriv = nf * (l[n] - l[n - 1]);
            if deriv == 0.0 {
                break;
            }
            let step = *t * l[n] / deriv;
            if step.is_finite() {
                *t -= step;
            }
        }
    }
    let mut weights = Vec::with_capacity(n);
    let mut measure_weights = Vec::with_capacity(n);
    for &t in &nodes {
        let l = laguerre_functions(n, t);
        let christoffel: f64 = l.iter().map(|v| v * v).sum();
        weights.push((-t).exp() / christoffel);
        measure_weights.push(1.0 / christoffel);
    }
    Ok(GaussRule {
        nodes,
        weights,
        measure_weights,
    })
}

/// `n`-point Gauss–Hermite rule for `integral f(x) e^{-x^2} dx`.
pub fn gauss_hermite(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("rule needs at least one node".into()));
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut nodes = jacobi_eigenvalues(&diag, &off)?;
    let two_n = (2 * n) as f64;
    for x in nodes.iter_mut() {
        for _ in 0..NEWTON_STEPS {
            let h = hermite_functions(n + 1, *x);
            let deriv = two_n.sqrt() * h[n - 1] - *x * h[n];
            if deriv == 0.0 {
                break;
            }
            let step = h[n] / deriv;
            if step.is_finite() {
                *x -= step;
            }
        }
    }
    let mut weights = Vec::with_capacity(n);
    let mut measure_weights = Vec::with_capacity(n);
    for &x in &nodes {
        let h = hermite_functions(n, x);
        let christoffel: f64 = h.iter().map(|v| v * v).sum();
        weights.push((-x * x).exp() / christoffel);
        measure_weights.push(1.0 / christoffel);
    }
    Ok(GaussRule {
        nodes,
        weights,
        measure_weights,
    })
}

/// Product rule for `(1/pi) integral_C d^2z F(z)` in polar form
/// `z = sqrt(t) e^{i theta}`: Gauss–Laguerre in `t = |z|^2` and a uniform
/// grid of `angular_count` angles.
///
/// The integrands of interest carry their own `e^{-|z|^2}` (the coherent
/// state normalization), so each node weight is the Laguerre weight divided
/// by `e^{-t}`, times `1/angular_count`. The Gaussian is never counted twice.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    dim: usize,
    pub radial: GaussRule,
    pub angular_count: usize,
}

impl QuadratureScheme {
    /// Rule for states on a `dim`-level space, rejecting node counts too
    /// small to integrate every matrix element exactly.
    pub fn new(dim: usize, radial_count: usize, angular_count: usize) -> Result<Self> {
        if radial_count < dim {
            return Err(Error::UnderResolved {
                what: "radial_count",
                got: radial_count,
                need: dim,
            });
        }
        if angular_count < 2 * dim {
            return Err(Error::UnderResolved {
                what: "angular_count",
                got: angular_count,
                need: 2 * dim,
            });
        }
        Self::unchecked(dim, radial_count, angular_count)
    }

    /// Same rule without the resolution preconditions; for convergence
    /// studies and negative controls.
    pub fn unchecked(dim: usize, radial_count: usize, angular_count: usize) -> Result<Self> {
        if angular_count == 0 {
            return Err(Error::InvalidArgument("angular_count must be positive".into()));
        }
        Ok(Self {
            dim,
            radial: gauss_laguerre(radial_count)?,
            angular_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radial_count(&self) -> usize {
        self.radial.len()
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.angular_count as f64
    }

    /// Complex nodes and their weights, radial index outermost.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let m = self.angular_count;
        (0..self.radial.len()).flat_map(move |i| {
            let r = self.radial.nodes[i].sqrt();
            let w = self.radial.measure_weights[i] / m as f64;
            (0..m).map(move |j| (Complex64::from_polar(r, self.angle(j)), w))
        })
    }

    /// Nodes on the ring of radial index `i`.
    pub fn ring(&self, i: usize) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let m = self.angular_count;
        let r = self.radial.nodes[i].sqrt();
        let w = self.radial.measure_weights[i] / m as f64;
        (0..m).map(move |j| (Complex64::from_polar(r, self.angle(j)), w))
    }

    /// `max_{k <= k_max} |sum_i w_i t_i^k - k!| / k!`.
    pub fn moment_defect(&self, k_max: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let mut factorial = 1.0;
        for k in 0..=k_max {
            if k > 0 {
                factorial *= k as f64;
            }
            let sum: f64 = self
                .radial
                .nodes
                .iter()
                .zip(&self.radial.weights)
                .map(|(t, w)| w * t.powi(k as i32))
                .sum();
            worst = worst.max((sum - factorial).abs() / factorial);
        }
        worst
    }

    /// `(1/M) sum_j e^{i n theta_j}`.
    pub fn angular_sum(&self, n: i64) -> Complex64 {
        let m = self.angular_count;
        let total: Complex64 = (0..m)
            .map(|j| Complex64::from_polar(1.0, n as f64 * self.angle(j)))
            .sum();
        total / m as f64
    }
}

pub fn make_quadrature(dim: usize, radial_count: usize, angular_count: usize) -> Result<QuadratureScheme> {
    QuadratureScheme::new(dim, radial_count, angular_count)
}

//! The ordered check suite and the per-dimension convergence study.

use std::time::Instant;

use bicoherent::bicoherent::resolution_deviation;
use bicoherent::coordinate::{cross_validate, eigen_relation_residual, EXTRA_NODES};
use bicoherent::displacement::{in_regime, power_similarity_check};
use bicoherent::fock::spectral_norm;
use bicoherent::pseudo_boson::{family_deviation, ray_distance, spectral_reality_defect};
use bicoherent::{
    bch_factorization_check, bch_in_regime, biorthogonal_family, coherent_in_regime, eigen_check, excited_states,
    intertwining_check, ladder_check, make_pair, metric_operator, number_operator_check, rbcs, series_route,
    theta_conjugacy_check, theta_rank_one_sums, vacua, BiorthogonalFamily, Complex64, Error, Matrix, PseudoBosonPair,
    QuadratureScheme, RieszMap, SafeSubspace, VacuumPair,
};
use serde::{Deserialize, Serialize};

use crate::config::{build_map, RunConfig};
use crate::CliError;

/// Half-width and sample count of the finite-difference grid.
pub const FD_HALF_WIDTH: f64 = 6.0;
pub const FD_POINTS: usize = 601;

/// Highest power in the power-similarity check.
pub const POWER_K_MAX: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    OutOfRegime,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::OutOfRegime => "out-of-regime",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub params: Params,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub wall_time_ms: f64,
}

impl CheckReport {
    /// Pass iff the residual is within tolerance; otherwise out-of-regime
    /// when the inputs are outside the accuracy regime, else fail.
    fn evaluate(
        check_id: &str,
        params: Params,
        outcome: Result<f64, Error>,
        tolerance: f64,
        out_of_regime: bool,
        started: Instant,
    ) -> Self {
        let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
        let (residual, status, message) = match outcome {
            Ok(r) if r <= tolerance => (Some(r), Status::Pass, None),
            Ok(r) if out_of_regime => (Some(r), Status::OutOfRegime, None),
            Ok(r) => (Some(r), Status::Fail, None),
            Err(e @ Error::OutOfRegime { .. }) => (None, Status::OutOfRegime, Some(e.to_string())),
            Err(e) => (None, Status::Fail, Some(e.to_string())),
        };
        Self {
            check_id: check_id.to_string(),
            params,
            residual,
            tolerance,
            status,
            message,
            wall_time_ms,
        }
    }

    /// The report with its timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRow {
    pub dim: usize,
    pub radial_count: usize,
    pub angular_count: usize,
    pub deviation: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<CheckReport>,
    pub quadrature: Vec<QuadratureRow>,
}

impl SuiteOutcome {
    /// True when some check failed; with `strict`, out-of-regime counts too.
    pub fn failed(&self, strict: bool) -> bool {
        self.reports.iter().any(|r| match r.status {
            Status::Pass => false,
            Status::Fail => true,
            Status::OutOfRegime => strict,
        })
    }

    pub fn count(&self, status: Status) -> usize {
        self.reports.iter().filter(|r| r.status == status).count()
    }
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    reports: Vec<CheckReport>,
}

impl Runner<'_> {
    fn params(&self) -> Params {
        Params {
            dim: self.cfg.dim,
            ..Params::default()
        }
    }

    fn z_params(&self, z: Complex64) -> Params {
        Params {
            z: Some([z.re, z.im]),
            ..self.params()
        }
    }

    fn run(
        &mut self,
        id: &str,
        params: Params,
        tolerance: f64,
        out_of_regime: bool,
        f: impl FnOnce() -> Result<f64, Error>,
    ) {
        let started = Instant::now();
        let outcome = f();
        self.reports.push(CheckReport::evaluate(
            id,
            params,
            outcome,
            tolerance,
            out_of_regime,
            started,
        ));
    }

    fn fail(&mut self, id: &str, params: Params, tolerance: f64, err: &Error) {
        let started = Instant::now();
        self.reports.push(CheckReport::evaluate(
            id,
            params,
            Err(err.clone()),
            tolerance,
            false,
            started,
        ));
    }
}

fn relative(diff: &Matrix, reference: &Matrix) -> f64 {
    spectral_norm(diff) / spectral_norm(reference).max(1.0)
}

/// Runs every check in order. Construction errors become failed reports;
/// only an unreadable map file is an `Err`.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteOutcome, CliError> {
    cfg.validate()?;
    let mut run = Runner {
        cfg,
        reports: Vec::new(),
    };
    let tol = &cfg.tolerances;
    let d = cfg.dim;

    let started = Instant::now();
    let built = match build_map(cfg)? {
        Ok(b) => b,
        Err(e) => {
            run.reports.push(CheckReport::evaluate(
                "riesz.construction",
                run.params(),
                Err(e),
                tol.riesz_inverse,
                false,
                started,
            ));
            return Ok(SuiteOutcome {
                reports: run.reports,
                quadrature: Vec::new(),
            });
        }
    };
    let map = built.map();
    let cond = map.cond().max(1.0);
    run.reports.push(CheckReport::evaluate(
        "riesz.construction",
        run.params(),
        Ok(spectral_norm(
            &(map.s().matrix() * map.s_inv().matrix() - Matrix::identity(d, d)),
        )),
        tol.riesz_inverse * cond,
        false,
        started,
    ));

    let fam = biorthogonal_family(map);
    run.run("biorthogonality", run.params(), tol.biorthogonality, false, || {
        Ok(fam.biorthogonality_defect())
    });

    let metric = metric_operator(map);
    let sums = theta_rank_one_sums(&fam);
    run.run("theta.rank_one_psi", run.params(), tol.theta_sums, false, || {
        let (psi_sum, _) = sums.clone()?;
        Ok(relative(
            &(psi_sum.matrix() - metric.theta.matrix()),
            metric.theta.matrix(),
        ))
    });
    run.run("theta.rank_one_phi", run.params(), tol.theta_sums, false, || {
        let (_, phi_sum) = sums.clone()?;
        Ok(relative(
            &(phi_sum.matrix() - metric.theta_inv.matrix()),
            metric.theta_inv.matrix(),
        ))
    });

    let pair = make_pair(map);
    let below_top = SafeSubspace::below_top(map.space());
    run.run("pair.ccr", run.params(), tol.ccr * cond * cond, false, || {
        pair.ccr_defect(&below_top)
    });

    let vac = vacua(&pair);
    check_vacua(&mut run, map, &vac);

    let gauged_family = vac.as_ref().map_err(Clone::clone).and_then(|v| {
        let f = excited_states(&pair, v, d - 1)?;
        Ok((f, v.gauge(map)))
    });
    let ladder = ladder_check(&pair, &fam);
    run.run("ladder", run.params(), tol.ladder * cond, false, || {
        Ok(ladder.max_residual())
    });
    let number = number_operator_check(&pair, &fam);
    run.run("number", run.params(), tol.number * cond, false, || {
        Ok(number.max_residual())
    });
    run.run(
        "ladder.constructive",
        run.params(),
        tol.constructive * cond,
        false,
        || {
            let (lf, gauge) = gauged_family.clone()?;
            let low = BiorthogonalFamily {
                phi: lf.phi[..=d / 2].to_vec(),
                psi: lf.psi[..=d / 2].to_vec(),
            };
            Ok(family_deviation(&low, map, gauge))
        },
    );
    run.run("number.spectrum", run.params(), tol.spectrum, false, || {
        spectral_reality_defect(&pair, d - 1)
    });
    run.run("theta.conjugacy", run.params(), tol.theta_conjugacy, false, || {
        Ok(theta_conjugacy_check(&pair, &metric, &below_top)? / pair.a.norm())
    });

    let zs = cfg.z_values();
    let half = SafeSubspace::new(map.space(), d / 2)?;
    for &z in &zs {
        let oor = !in_regime(map.space(), z);
        run.run(
            "displacement.power_similarity",
            run.z_params(z),
            tol.power_similarity,
            oor,
            || Ok(power_similarity_check(map, z, POWER_K_MAX.min(d - 1))?.max_residual()),
        );
    }
    for &z in &zs {
        let oor = !bch_in_regime(map.space(), z, half.cutoff());
        run.run("displacement.bch", run.z_params(z), tol.bch, oor, || {
            Ok(bch_factorization_check(map, z, &half)?.max())
        });
    }
    for &z in &zs {
        let oor = !in_regime(map.space(), z);
        run.run(
            "displacement.intertwining",
            run.z_params(z),
            tol.intertwining,
            oor,
            || intertwining_check(map, z, &below_top),
        );
    }
    for &z in &zs {
        let oor = !coherent_in_regime(d, z);
        run.run(
            "rbcs.normalization",
            run.z_params(z),
            tol.rbcs_normalization,
            oor,
            || Ok(rbcs(map, z).normalization_defect()),
        );
        run.run("rbcs.two_route", run.z_params(z), tol.two_route * cond, oor, || {
            let (lf, gauge) = gauged_family.clone()?;
            two_route_residual(map, &lf, gauge, z)
        });
    }
    for &z in &zs {
        let oor = !coherent_in_regime(d, z);
        run.run("rbcs.eigen", run.z_params(z), tol.eigen, oor, || {
            let (r1, r2) = eigen_check(&pair, &rbcs(map, z))?;
            Ok(r1.max(r2))
        });
    }

    let (radial, angular) = (cfg.radial_count(), cfg.angular_count());
    let quad_params = Params {
        radial_count: Some(radial),
        angular_count: Some(angular),
        ..run.params()
    };
    run.run("resolution.identity", quad_params, tol.resolution, false, || {
        let quad = QuadratureScheme::new(d, radial, angular)?;
        bicoherent::resolution_of_identity(map, &quad)
    });
    let quadrature = quadrature_table(map, angular);

    if let Some(proj) = built.projector() {
        let order = d + EXTRA_NODES;
        for &z in &zs {
            let oor = !coherent_in_regime(d, z);
            let mut cv = None;
            run.run("coordinate.l2", run.z_params(z), tol.coordinate_l2, oor, || {
                let c = cv.insert(cross_validate(proj, z, order));
                c.clone().map(|c| c.l2())
            });
            run.run(
                "coordinate.pairing",
                run.z_params(z),
                tol.coordinate_pairing,
                oor,
                || cv.expect("cross-validation ran").map(|c| (c.pairing - 1.0).norm()),
            );
            run.run("coordinate.eigen_fd", run.z_params(z), tol.coordinate_fd, oor, || {
                Ok(eigen_relation_residual(z, FD_HALF_WIDTH, FD_POINTS))
            });
        }
    }

    Ok(SuiteOutcome {
        reports: run.reports,
        quadrature,
    })
}

fn check_vacua(run: &mut Runner, map: &RieszMap, vac: &Result<VacuumPair, Error>) {
    let tol = &run.cfg.tolerances;
    let (t_ray, t_pair) = (tol.vacuum_ray, tol.vacuum_pairing);
    match vac {
        Ok(v) => {
            let s_e0 = map.s().matrix().column(0).into_owned();
            let dual_e0 = map.s_inv_adj().matrix().column(0).into_owned();
            run.run("vacua.ray_phi", run.params(), t_ray, false, || {
                Ok(ray_distance(&v.phi0, &s_e0))
            });
            run.run("vacua.ray_psi", run.params(), t_ray, false, || {
                Ok(ray_distance(&v.psi0, &dual_e0))
            });
            run.run("vacua.pairing", run.params(), t_pair, false, || {
                Ok((bicoherent::inner(&v.phi0, &v.psi0) - 1.0).norm())
            });
        }
        Err(e) => {
            run.fail("vacua.ray_phi", run.params(), t_ray, e);
            run.fail("vacua.ray_psi", run.params(), t_ray, e);
            run.fail("vacua.pairing", run.params(), t_pair, e);
        }
    }
}

/// Series over the ladder family against `S Phi(z)`, `(S^-1)† Phi(z)`,
/// undoing the vacuum gauge `l`: the series gives `l eta` and `xi / conj(l)`.
fn two_route_residual(
    map: &RieszMap,
    fam: &bicoherent::BiorthogonalFamily,
    gauge: Complex64,
    z: Complex64,
) -> Result<f64, Error> {
    let bc = rbcs(map, z);
    let (phi, psi) = series_route(fam, z)?;
    let r_phi = (phi / gauge - &bc.eta).norm();
    let r_psi = (psi * gauge.conj() - &bc.xi).norm();
    Ok(r_phi.max(r_psi))
}

/// Resolution deviation for radial counts `dim/4`, `dim/2 - 1`, `dim/2`
/// (the exactness threshold) and `dim`.
fn quadrature_table(map: &RieszMap, angular: usize) -> Vec<QuadratureRow> {
    let d = map.dim();
    let mut counts = vec![d / 4, d / 2 - 1, d / 2, d];
    counts.retain(|&n| n >= 1);
    counts.dedup();
    counts
        .into_iter()
        .filter_map(|n| {
            let quad = QuadratureScheme::unchecked(d, n, angular).ok()?;
            let deviation = resolution_deviation(map, &quad).ok()?;
            Some(QuadratureRow {
                dim: d,
                radial_count: n,
                angular_count: angular,
                deviation,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dim: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub bch_residual: f64,
    pub eigen_residual: f64,
    pub resolution_deviation: f64,
    pub out_of_regime: bool,
}

/// Per-dimension residuals of the BCH factorization (first half of the
/// levels), the bicoherent eigen-relations, and the resolution of the
/// identity with `radial = dim`, `angular = 2 dim + 1`. Uses `z = 1` when
/// the config has no samples.
pub fn convergence_study(cfg: &RunConfig, dims: &[usize]) -> Result<Vec<ConvergenceRow>, CliError> {
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("dims must be strictly ascending".into()));
    }
    let mut zs = cfg.z_values();
    if zs.is_empty() {
        zs.push(Complex64::new(1.0, 0.0));
    }
    let mut rows = Vec::new();
    for &d in dims {
        let at = cfg.at_dim(d);
        at.validate()?;
        let built = build_map(&at)??;
        let map = built.map();
        let pair: PseudoBosonPair = make_pair(map);
        let quad = QuadratureScheme::new(d, d, 2 * d + 1)?;
        let resolution = bicoherent::resolution_of_identity(map, &quad)?;
        let half = SafeSubspace::new(map.space(), d / 2)?;
        for &z in &zs {
            let bch = bch_factorization_check(map, z, &half)?;
            let (e1, e2) = eigen_check(&pair, &rbcs(map, z))?;
            rows.push(ConvergenceRow {
                dim: d,
                z_re: z.re,
                z_im: z.im,
                bch_residual: bch.max(),
                eigen_residual: e1.max(e2),
                resolution_deviation: resolution,
                out_of_regime: bch.out_of_regime || !coherent_in_regime(d, z),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MapSpec;

    fn c(re: f64, im: f64) -> [f64; 2] {
        [re, im]
    }

    #[test]
    fn identity_suite_passes() {
        let mut cfg = RunConfig::new(16, MapSpec::Identity {});
        cfg.z_samples = vec![c(0.0, 0.0), c(0.05, -0.05), c(0.0, 0.08)];
        let out = run_suite(&cfg).unwrap();
        assert!(
            !out.failed(true),
            "{:#?}",
            out.reports
                .iter()
                .filter(|r| r.status != Status::Pass)
                .collect::<Vec<_>>()
        );
        for r in &out.reports {
            assert!(r.residual.unwrap() <= 1e-10, "{}: {:?}", r.check_id, r.residual);
        }
    }

    #[test]
    fn ill_conditioned_map_is_a_failed_report() {
        let cfg = RunConfig::new(8, MapSpec::Random { cond: 1e6, seed: 1 });
        let out = run_suite(&cfg).unwrap();
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.reports[0].check_id, "riesz.construction");
        assert_eq!(out.reports[0].status, Status::Fail);
        assert!(out.reports[0].message.as_ref().unwrap().contains("condition"));
        assert!(out.failed(false));
    }

    #[test]
    fn far_z_is_flagged_not_failed() {
        let mut cfg = RunConfig::new(16, MapSpec::Identity {});
        cfg.z_samples = vec![c(3.0, 0.0)];
        let out = run_suite(&cfg).unwrap();
        assert!(out.count(Status::OutOfRegime) > 0);
        assert!(!out.failed(false));
        assert!(out.failed(true));
    }

    #[test]
    fn status_follows_residual() {
        let t = Instant::now();
        let p = Params::default();
        assert_eq!(
            CheckReport::evaluate("x", p.clone(), Ok(1e-3), 1e-2, true, t).status,
            Status::Pass
        );
        assert_eq!(
            CheckReport::evaluate("x", p.clone(), Ok(1.0), 1e-2, true, t).status,
            Status::OutOfRegime
        );
        assert_eq!(
            CheckReport::evaluate("x", p.clone(), Ok(1.0), 1e-2, false, t).status,
            Status::Fail
        );
        assert_eq!(
            CheckReport::evaluate("x", p, Ok(f64::NAN), 1e-2, false, t).status,
            Status::Fail
        );
    }

    #[test]
    fn convergence_rejects_unsorted_dims() {
        let cfg = RunConfig::new(16, MapSpec::Identity {});
        assert!(convergence_study(&cfg, &[32, 16]).is_err());
    }
}

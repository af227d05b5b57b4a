//! Run configuration, read from TOML.
//!
//! ```toml
//! schema = 1
//! dim = 64
//! z_samples = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 2.0]]
//! outputs = "out"
//!
//! [map]
//! kind = "projector"
//! u_index = 0
//! ```

use std::path::{Path, PathBuf};

use bicoherent::coordinate::{projector_map, ProjectorMap};
use bicoherent::{make_space, Complex64, Operator, RieszMap};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_DIM: usize = 4;
pub const DEFAULT_MAX_COND: f64 = 1e4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    Identity {},
    Projector { u_index: usize },
    Random { cond: f64, seed: u64 },
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Defaults to `dim`.
    pub radial_count: Option<usize>,
    /// Defaults to `2 dim + 1`.
    pub angular_count: Option<usize>,
}

/// Tolerances per check. Those marked "scaled" are multiplied by the
/// condition number (or its square) of the map at run time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub riesz_inverse: f64,
    pub biorthogonality: f64,
    pub theta_sums: f64,
    /// scaled by `cond^2`
    pub ccr: f64,
    pub vacuum_ray: f64,
    pub vacuum_pairing: f64,
    /// scaled by `cond`
    pub ladder: f64,
    /// scaled by `cond`
    pub number: f64,
    /// scaled by `cond`; recursive family against `S e_n` for `n <= dim/2`
    pub constructive: f64,
    pub spectrum: f64,
    pub theta_conjugacy: f64,
    pub power_similarity: f64,
    pub bch: f64,
    pub intertwining: f64,
    pub rbcs_normalization: f64,
    /// scaled by `cond`
    pub two_route: f64,
    pub eigen: f64,
    pub resolution: f64,
    pub coordinate_l2: f64,
    pub coordinate_pairing: f64,
    pub coordinate_fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            riesz_inverse: 1e-10,
            biorthogonality: 1e-10,
            theta_sums: 1e-11,
            ccr: 1e-10,
            vacuum_ray: 1e-10,
            vacuum_pairing: 1e-12,
            ladder: 1e-9,
            number: 1e-9,
            constructive: 1e-8,
            spectrum: 1e-6,
            theta_conjugacy: 1e-10,
            power_similarity: 1e-7,
            bch: 1e-8,
            intertwining: 1e-9,
            rbcs_normalization: 1e-11,
            two_route: 1e-10,
            eigen: 1e-10,
            resolution: 1e-10,
            coordinate_l2: 1e-8,
            coordinate_pairing: 1e-9,
            coordinate_fd: 1e-6,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 21] {
        [
            ("riesz_inverse", self.riesz_inverse),
            ("biorthogonality", self.biorthogonality),
            ("theta_sums", self.theta_sums),
            ("ccr", self.ccr),
            ("vacuum_ray", self.vacuum_ray),
            ("vacuum_pairing", self.vacuum_pairing),
            ("ladder", self.ladder),
            ("number", self.number),
            ("constructive", self.constructive),
            ("spectrum", self.spectrum),
            ("theta_conjugacy", self.theta_conjugacy),
            ("power_similarity", self.power_similarity),
            ("bch", self.bch),
            ("intertwining", self.intertwining),
            ("rbcs_normalization", self.rbcs_normalization),
            ("two_route", self.two_route),
            ("eigen", self.eigen),
            ("resolution", self.resolution),
            ("coordinate_l2", self.coordinate_l2),
            ("coordinate_pairing", self.coordinate_pairing),
            ("coordinate_fd", self.coordinate_fd),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub dim: usize,
    pub map: MapSpec,
    #[serde(default)]
    pub z_samples: Vec<[f64; 2]>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default = "default_max_cond")]
    pub max_cond: f64,
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

fn default_max_cond() -> f64 {
    DEFAULT_MAX_COND
}

impl RunConfig {
    pub fn new(dim: usize, map: MapSpec) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            dim,
            map,
            z_samples: Vec::new(),
            quadrature: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
            outputs: default_outputs(),
            max_cond: DEFAULT_MAX_COND,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. A relative `file` map path is resolved against
    /// the config's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let MapSpec::File { path: p } = &mut cfg.map {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        if self.dim < MIN_DIM {
            return Err(CliError::Config(format!(
                "dim must be at least {MIN_DIM}, got {}",
                self.dim
            )));
        }
        for (name, v) in self.tolerances.entries() {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        for z in &self.z_samples {
            if !(z[0].is_finite() && z[1].is_finite()) {
                return Err(CliError::Config(format!("non-finite z sample {z:?}")));
            }
        }
        if !(self.max_cond.is_finite() && self.max_cond >= 1.0) {
            return Err(CliError::Config(format!(
                "max_cond must be >= 1, got {}",
                self.max_cond
            )));
        }
        match &self.map {
            MapSpec::Projector { u_index } if *u_index >= self.dim => Err(CliError::Config(format!(
                "projector u_index {u_index} out of range for dim {}",
                self.dim
            ))),
            MapSpec::Random { cond, .. } if !(cond.is_finite() && *cond >= 1.0) => {
                Err(CliError::Config(format!("random map cond must be >= 1, got {cond}")))
            }
            _ => Ok(()),
        }
    }

    pub fn z_values(&self) -> Vec<Complex64> {
        self.z_samples.iter().map(|z| Complex64::new(z[0], z[1])).collect()
    }

    pub fn radial_count(&self) -> usize {
        self.quadrature.radial_count.unwrap_or(self.dim)
    }

    pub fn angular_count(&self) -> usize {
        self.quadrature.angular_count.unwrap_or(2 * self.dim + 1)
    }

    /// Applies `--dim` and `--seed`; the seed only affects random maps.
    pub fn apply_overrides(&mut self, dim: Option<usize>, seed: Option<u64>) -> Result<(), CliError> {
        if let Some(d) = dim {
            self.dim = d;
        }
        if let (Some(s), MapSpec::Random { seed, .. }) = (seed, &mut self.map) {
            *seed = s;
        }
        self.validate()
    }

    /// The same config at another dimension.
    pub fn at_dim(&self, dim: usize) -> Self {
        let mut cfg = self.clone();
        cfg.dim = dim;
        cfg.quadrature = QuadratureConfig::default();
        cfg
    }
}

/// A constructed map, keeping the projector data when there is one.
#[derive(Clone, Debug)]
pub enum BuiltMap {
    Plain(RieszMap),
    Projector(Box<ProjectorMap>),
}

impl BuiltMap {
    pub fn map(&self) -> &RieszMap {
        match self {
            Self::Plain(m) => m,
            Self::Projector(p) => &p.map,
        }
    }

    pub fn projector(&self) -> Option<&ProjectorMap> {
        match self {
            Self::Plain(_) => None,
            Self::Projector(p) => Some(p),
        }
    }
}

/// Builds the map of a config. A failed file read is a configuration error;
/// a map that fails validation is a construction error.
pub fn build_map(cfg: &RunConfig) -> Result<Result<BuiltMap, bicoherent::Error>, CliError> {
    let space = match make_space(cfg.dim) {
        Ok(s) => s,
        Err(e) => return Ok(Err(e)),
    };
    Ok(match &cfg.map {
        MapSpec::Identity {} => RieszMap::new(Operator::identity(space), cfg.max_cond).map(BuiltMap::Plain),
        MapSpec::Projector { u_index } => {
            projector_map(space, &space.basis_vector(*u_index)).map(|p| BuiltMap::Projector(Box::new(p)))
        }
        MapSpec::Random { cond, seed } => bicoherent::random_riesz_map(space, *cond, *seed).and_then(|m| {
            if m.cond() > cfg.max_cond {
                Err(bicoherent::Error::IllConditioned {
                    cond: m.cond(),
                    max_cond: cfg.max_cond,
                })
            } else {
                Ok(BuiltMap::Plain(m))
            }
        }),
        MapSpec::File { path } => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RieszMap::from_json(&text, cfg.max_cond).and_then(|m| {
                if m.dim() != cfg.dim {
                    Err(bicoherent::Error::DimensionMismatch {
                        expected: cfg.dim,
                        found: m.dim(),
                    })
                } else {
                    Ok(BuiltMap::Plain(m))
                }
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = 1
dim = 16
[map]
kind = "identity"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.dim, 16);
        assert_eq!(cfg.map, MapSpec::Identity {});
        assert_eq!(cfg.radial_count(), 16);
        assert_eq!(cfg.angular_count(), 33);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.max_cond, DEFAULT_MAX_COND);
    }

    #[test]
    fn map_variants_parse() {
        let text = "schema = 1\ndim = 8\n[map]\nkind = \"random\"\ncond = 5.0\nseed = 3\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.map, MapSpec::Random { cond: 5.0, seed: 3 });
        let text = "schema = 1\ndim = 8\nmap = { kind = \"projector\", u_index = 2 }\n";
        assert_eq!(
            RunConfig::from_toml(text).unwrap().map,
            MapSpec::Projector { u_index: 2 }
        );
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = format!("{MINIMAL}[tolerances]\nladdr = 1e-3\n");
        assert!(RunConfig::from_toml(&text).is_err());
        let text = format!("bogus = 1\n{MINIMAL}");
        assert!(RunConfig::from_toml(&text).is_err());
        let text = "schema = 1\ndim = 8\n[map]\nkind = \"identity\"\ncond = 2.0\n";
        assert!(RunConfig::from_toml(text).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml(&MINIMAL.replace("dim = 16", "dim = 3")).is_err());
        assert!(RunConfig::from_toml(&MINIMAL.replace("schema = 1", "schema = 2")).is_err());
        let text = format!("{MINIMAL}[tolerances]\nladder = -1.0\n");
        assert!(RunConfig::from_toml(&text).is_err());
        let text = "schema = 1\ndim = 8\nmap = { kind = \"projector\", u_index = 8 }\n";
        assert!(RunConfig::from_toml(text).is_err());
    }

    #[test]
    fn overrides() {
        let text = "schema = 1\ndim = 8\nmap = { kind = \"random\", cond = 2.0, seed = 1 }\n";
        let mut cfg = RunConfig::from_toml(text).unwrap();
        cfg.apply_overrides(Some(12), Some(99)).unwrap();
        assert_eq!(cfg.dim, 12);
        assert_eq!(cfg.map, MapSpec::Random { cond: 2.0, seed: 99 });
        assert!(cfg.apply_overrides(Some(2), None).is_err());
    }

    #[test]
    fn construction_errors_are_not_config_errors() {
        let cfg = RunConfig::new(8, MapSpec::Random { cond: 1e6, seed: 0 });
        let built = build_map(&cfg).unwrap();
        assert!(matches!(built, Err(bicoherent::Error::IllConditioned { .. })));
        let cfg = RunConfig::new(
            8,
            MapSpec::File {
                path: "/nonexistent/map.json".into(),
            },
        );
        assert!(build_map(&cfg).is_err());
    }
}

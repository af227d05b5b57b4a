//! Residual records shared by every verification routine.

use serde::{Deserialize, Serialize};

/// One residual compared against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub check: String,
    /// Level index for per-level relations, absent for whole-operator checks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualRecord {
    pub fn new(check: impl Into<String>, n: Option<usize>, residual: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            n,
            residual,
            tolerance,
            // NaN never passes
            pass: residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub records: Vec<ResidualRecord>,
}

impl ResidualReport {
    pub fn push(&mut self, record: ResidualRecord) {
        self.records.push(record);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.records.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Largest residual among records whose check name is `check`.
    pub fn max_for(&self, check: &str) -> f64 {
        self.records
            .iter()
            .filter(|r| r.check == check)
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    /// Re-evaluates every record against a new tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        for r in &mut self.records {
            r.tolerance = tolerance;
            r.pass = r.residual <= tolerance;
        }
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        assert!(ResidualRecord::new("x", None, 1e-12, 1e-12).pass);
        assert!(!ResidualRecord::new("x", None, 2e-12, 1e-12).pass);
        assert!(!ResidualRecord::new("x", Some(3), f64::NAN, 1.0).pass);
    }

    #[test]
    fn retolerance() {
        let mut rep = ResidualReport::default();
        rep.push(ResidualRecord::new("a", Some(0), 1e-9, 1e-10));
        rep.push(ResidualRecord::new("b", Some(1), 1e-11, 1e-10));
        assert!(!rep.passed());
        assert_eq!(rep.failures().count(), 1);
        assert_eq!(rep.max_for("b"), 1e-11);
        assert!(rep.with_tolerance(1e-8).passed());
    }
}

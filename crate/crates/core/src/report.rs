//! Structured experiment output: one report per verification experiment,
//! serialized as JSON. Timestamps and host data live only in [`RunManifest`]
//! so the statistics section can be compared bytewise across runs.

use serde::{Deserialize, Serialize};

/// One asserted quantity inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    /// The measured value (mean, residual, count, ...).
    pub value: f64,
    /// A reference value the measurement is compared against, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    /// An upper bound `value` must respect, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub passed: bool,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, value: f64, passed: bool) -> Self {
        CheckLine {
            name: name.into(),
            value,
            reference: None,
            stderr: None,
            z: None,
            bound: None,
            passed,
        }
    }

    pub fn with_reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn with_stderr(mut self, s: f64) -> Self {
        self.stderr = Some(s);
        self
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = Some(z);
        self
    }

    pub fn with_bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }
}

/// Statistics and pass/fail outcome of a verification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    /// Echo of the configuration the experiment actually ran with.
    pub config: serde_json::Value,
    /// Realization-dependent choices (cutoff profiles etc.) recorded verbatim.
    pub profiles: Vec<String>,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, config: serde_json::Value) -> Self {
        ExperimentReport {
            schema_version: 1,
            experiment: experiment.into(),
            config,
            profiles: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn record_profile(&mut self, profile: impl Into<String>) {
        self.profiles.push(profile.into());
    }

    pub fn push(&mut self, line: CheckLine) {
        self.passed &= line.passed;
        self.checks.push(line);
    }

    /// One pass/fail line per check, suitable for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let state = if c.passed { "PASS" } else { "FAIL" };
                let mut extra = format!("value={:.6e}", c.value);
                if let Some(r) = c.reference {
                    extra += &format!(" ref={r:.6e}");
                }
                if let Some(z) = c.z {
                    extra += &format!(" z={z:.3}");
                }
                if let Some(b) = c.bound {
                    extra += &format!(" bound={b:.6e}");
                }
                format!("[{state}] {}: {extra}", c.name)
            })
            .collect()
    }
}

/// Provenance wrapper around a report: run-varying metadata is quarantined
/// here so golden-file comparisons can target `report` alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub wall_clock_ms: u128,
    pub timestamp_unix_ms: u128,
    pub passed: bool,
    /// Every file the run emitted.
    pub artifacts: Vec<String>,
}

//! Report types written as `report.json`, and CSV helpers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::ErrorSample;
use crate::finalstate::{TheoremParameters, WeightedNorm};
use crate::grid::Grid;
use crate::nonlinearity::{ClassificationReport, RangeType};

/// Classification outcome plus the sampled Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub range_type: RangeType,
    pub g1: Complex64,
    pub g3: Complex64,
    pub modes: usize,
    pub lipschitz_sup: f64,
    pub lipschitz_samples: usize,
    pub details: ClassificationReport,
}

/// One `ε` of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub eps: f64,
    pub fitted_exponent: Option<f64>,
    pub fit_r_squared: Option<f64>,
    pub unmodified_exponent: Option<f64>,
    pub weighted_norm: WeightedNorm,
    pub error_at_start: f64,
    pub tail_proxy: f64,
}

/// Everything an experiment reports. Fields an experiment does not produce
/// stay empty or `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub experiment: String,
    pub preset: String,
    pub config_hash: String,
    /// Seconds since the Unix epoch; the only field that differs between
    /// identical runs.
    pub timestamp: u64,
    /// Canonical `key = value` echo of the effective configuration.
    pub config: String,
    pub parameters: TheoremParameters,
    pub grid: Grid,
    pub classification: Option<ClassificationSummary>,
    pub time_series: Vec<ErrorSample>,
    pub fitted_exponent: Option<f64>,
    pub fit_r_squared: Option<f64>,
    /// Exponent of the error against the profile without the log phase.
    pub unmodified_exponent: Option<f64>,
    pub weighted_norm: Option<WeightedNorm>,
    pub tail_proxy: Option<f64>,
    pub picard_distances: Vec<f64>,
    pub picard_ratios: Vec<f64>,
    /// Relative `L²` gap at `T` between the Picard limit and backward integration.
    pub picard_agreement: Option<f64>,
    pub duhamel_series: Vec<(f64, f64)>,
    pub sweep: Vec<SweepEntry>,
}

impl ScatteringReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Renders rows of numbers with a header line, full precision.
pub(crate) fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

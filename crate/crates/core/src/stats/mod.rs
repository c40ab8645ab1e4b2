//! Statistical tests and descriptive summaries used by the report.

mod density;
mod describe;
mod ks;
mod logistic;
mod wilcoxon;

pub use density::{histogram, kde, silverman_bandwidth, skewness, HistogramBin, Kde, KDE_GRID_POINTS};
pub use describe::{boxplot, quantile, BoxplotSummary};
pub use ks::{kolmogorov_survival, ks_two_sample};
pub use logistic::{logistic_fit, predicted_probability, LogisticFit};
pub use wilcoxon::{wilcoxon_signed_rank, EXACT_MAX_N};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    WilcoxonSignedRank,
    KsTwoSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMode {
    Exact,
    Asymptotic,
}

/// Outcome of a two-sided hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub mode: PValueMode,
    /// No information in the data (e.g. every paired difference is zero);
    /// `p_value` is then 1.
    pub degenerate: bool,
}

/// Two-sided normal tail `P(|Z| >= |z|)`.
pub(crate) fn normal_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

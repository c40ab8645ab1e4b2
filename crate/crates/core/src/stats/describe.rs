use serde::{Deserialize, Serialize};

/// Linear-interpolation quantile (R type 7) of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey boxplot: whiskers reach the most extreme points within 1.5 IQR of
/// the quartiles; anything beyond is an outlier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub whisker_low: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
    pub n: usize,
}

pub fn boxplot(values: &[f64]) -> Option<BoxplotSummary> {
    if values.is_empty() {
        return None;
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let q1 = quantile(&s, 0.25);
    let q3 = quantile(&s, 0.75);
    let fence = 1.5 * (q3 - q1);
    let (lo, hi) = (q1 - fence, q3 + fence);
    let inside: Vec<f64> = s.iter().copied().filter(|v| *v >= lo && *v <= hi).collect();
    Some(BoxplotSummary {
        whisker_low: inside.first().copied().unwrap_or(q1),
        q1,
        median: quantile(&s, 0.5),
        q3,
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: s.iter().copied().filter(|v| *v < lo || *v > hi).collect(),
        n: s.len(),
    })
}

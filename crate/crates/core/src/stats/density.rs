use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::quantile;

pub const KDE_GRID_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

/// Equal-width bins over the fixed domain `[0, 1]`. Every bin is right-open
/// except the last, which also takes 1.0.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::invalid("histogram of an empty sample"));
    }
    if bin_count == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let mut counts = vec![0usize; bin_count];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("histogram value {v} outside [0, 1]")));
        }
        let i = ((v * bin_count as f64).floor() as usize).min(bin_count - 1);
        counts[i] += 1;
    }
    let width = 1.0 / bin_count as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            bin_low: i as f64 * width,
            bin_high: if i + 1 == bin_count { 1.0 } else { (i + 1) as f64 * width },
            count,
        })
        .collect())
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Silverman's rule `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`. When the IQR
/// collapses to zero (heavy ties) the standard deviation is used alone.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::invalid("bandwidth needs at least two values"));
    }
    let (_, sd) = mean_and_sd(values);
    if !(sd > 0.0) {
        return Err(Error::invalid("bandwidth is zero: all values identical"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kde {
    pub bandwidth: f64,
    /// `(x, density)` on an evenly spaced grid over `[0, 1]`.
    pub points: Vec<(f64, f64)>,
}

/// Gaussian kernel density estimate on [`KDE_GRID_POINTS`] points over
/// `[0, 1]`.
pub fn kde(values: &[f64], bandwidth: Option<f64>) -> Result<Kde> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("kde: non-finite value"));
    }
    let first = *values.first().ok_or_else(|| Error::invalid("kde of an empty sample"))?;
    if values.iter().all(|&v| v == first) {
        return Err(Error::invalid("kde needs at least two distinct values"));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::invalid(format!("kde bandwidth must be > 0, got {h}"))),
        None => silverman_bandwidth(values)?,
    };
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * PI).sqrt());
    let last = (KDE_GRID_POINTS - 1) as f64;
    let points = (0..KDE_GRID_POINTS)
        .map(|k| {
            let x = k as f64 / last;
            let s: f64 = values
                .iter()
                .map(|v| {
                    let u = (x - v) / h;
                    (-0.5 * u * u).exp()
                })
                .sum();
            (x, s * norm)
        })
        .collect();
    Ok(Kde { bandwidth: h, points })
}

/// Standardized third central moment `m3 / m2^(3/2)` (population moments).
pub fn skewness(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::invalid("skewness needs at least three values"));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::invalid("skewness of a zero-variance sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if !(m2 > 0.0) {
        return Err(Error::invalid("skewness of a zero-variance sample"));
    }
    Ok(m3 / m2.powf(1.5))
}

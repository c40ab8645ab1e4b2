use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::normal_two_sided;

const MAX_ITER: usize = 100;
const COEF_TOL: f64 = 1e-10;
const SEPARATION_SLOPE: f64 = 30.0;

/// Maximum-likelihood fit of `P(y = 1 | x) = 1 / (1 + exp(-(beta0 + beta1 x)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub beta0: f64,
    pub beta1: f64,
    /// Standard error of `beta1` from the inverse observed information;
    /// infinite (JSON `null`) when the information matrix is singular.
    #[serde(with = "infinite_as_null")]
    pub se1: f64,
    /// Wald statistic `beta1 / se1`.
    pub z: f64,
    /// Two-sided Wald p-value.
    pub p_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub separation_detected: bool,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

pub fn predicted_probability(fit: &LogisticFit, x: f64) -> f64 {
    sigmoid(fit.beta0 + fit.beta1 * x)
}

/// Score vector and information matrix `[h00, h01, h11]` at `(b0, b1)`.
fn score_and_information(x: &[f64], y: &[bool], b0: f64, b1: f64) -> ([f64; 2], [f64; 3]) {
    let mut g = [0.0; 2];
    let mut h = [0.0; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let p = sigmoid(b0 + b1 * xi);
        let r = f64::from(u8::from(yi)) - p;
        let w = p * (1.0 - p);
        g[0] += r;
        g[1] += r * xi;
        h[0] += w;
        h[1] += w * xi;
        h[2] += w * xi * xi;
    }
    (g, h)
}

/// Inverse of the symmetric 2x2 information matrix, or `None` when it is
/// numerically singular.
fn invert(h: [f64; 3]) -> Option<[f64; 3]> {
    let det = h[0] * h[2] - h[1] * h[1];
    let scale = h[0] * h[2];
    if !(det > 1e-12 * scale) || !det.is_finite() || scale <= 0.0 {
        return None;
    }
    Some([h[2] / det, -h[1] / det, h[0] / det])
}

/// Bivariate logistic regression by iteratively reweighted least squares
/// (Newton-Raphson) from `(0, 0)`.
///
/// Stops when no coefficient moves by more than 1e-10 or after 100 steps.
/// If a step would push `|beta1|` past 30, or the information matrix turns
/// singular, the fit is marked `separation_detected` and the last stable
/// iterate is returned.
pub fn logistic_fit(x: &[f64], y: &[bool]) -> Result<LogisticFit> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "logistic_fit: {} predictors vs {} outcomes",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("logistic_fit needs at least two observations"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("logistic_fit: non-finite predictor"));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::invalid("logistic_fit needs both outcome classes"));
    }

    let (mut b0, mut b1) = (0.0, 0.0);
    let mut iterations = 0;
    let mut converged = false;
    let mut separation = false;
    while iterations < MAX_ITER {
        let (g, h) = score_and_information(x, y, b0, b1);
        let Some(inv) = invert(h) else {
            separation = true;
            break;
        };
        iterations += 1;
        let d0 = inv[0] * g[0] + inv[1] * g[1];
        let d1 = inv[1] * g[0] + inv[2] * g[1];
        let (n0, n1) = (b0 + d0, b1 + d1);
        if !n0.is_finite() || !n1.is_finite() || n1.abs() > SEPARATION_SLOPE {
            separation = true;
            break;
        }
        b0 = n0;
        b1 = n1;
        if d0.abs().max(d1.abs()) < COEF_TOL {
            converged = true;
            break;
        }
    }

    let (_, h) = score_and_information(x, y, b0, b1);
    let se1 = invert(h).map_or(f64::INFINITY, |inv| inv[2].sqrt());
    let z = if se1.is_finite() && se1 > 0.0 { b1 / se1 } else { 0.0 };
    let p_value = if se1.is_finite() { normal_two_sided(z) } else { 1.0 };
    Ok(LogisticFit {
        beta0: b0,
        beta1: b1,
        se1,
        z,
        p_value,
        iterations,
        converged: converged && !separation,
        separation_detected: separation,
    })
}

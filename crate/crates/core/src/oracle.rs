//! Slow, independent reference computations.
//!
//! Nothing here shares code with the production paths it checks. The
//! `selftest` subcommand and the test suites compare the two.

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, a: vec![0.0; n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `M = W^T / max(W) + eps * J` for the edge list `(from, to, weight)`.
pub fn regularized_matrix(n: usize, edges: &[(usize, usize, f64)], eps: f64) -> Dense {
    let mut w = Dense::zeros(n);
    for &(i, j, v) in edges {
        w.set(i, j, w.get(i, j) + v);
    }
    let max = w.max_abs();
    let scale = if max > 0.0 { max } else { 1.0 };
    let mut m = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(j, i, w.get(i, j) / scale + eps);
        }
    }
    m
}

/// Dominant eigenvector of a positive matrix by repeated squaring, scaled so
/// its largest entry is 1, together with the Rayleigh-style eigenvalue
/// estimate `sum(Mx) / sum(x)`.
pub fn dominant_eigenvector(m: &Dense) -> (Vec<f64>, f64) {
    let n = m.n;
    let mut p = m.clone();
    let mut prev: Option<Vec<f64>> = None;
    for _ in 0..80 {
        p = p.mul(&p);
        let s = p.max_abs();
        for v in &mut p.a {
            *v /= s;
        }
        let x = max_normalize(&p.apply(&vec![1.0; n]));
        if let Some(px) = &prev {
            let d = px.iter().zip(&x).fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
            if d == 0.0 {
                break;
            }
        }
        prev = Some(x);
    }
    let x = prev.unwrap_or_else(|| vec![1.0; n]);
    let mx = m.apply(&x);
    let lambda = mx.iter().sum::<f64>() / x.iter().sum::<f64>();
    (x, lambda)
}

pub fn max_normalize(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(0.0f64, f64::max);
    if m > 0.0 {
        x.iter().map(|v| v / m).collect()
    } else {
        x.to_vec()
    }
}

/// Katz scores by explicit accumulation of dense powers `alpha^k (W^T)^k 1`
/// until the terms vanish below `1e-18` or `max_terms` is reached.
pub fn katz_series(n: usize, edges: &[(usize, usize, f64)], alpha: f64, max_terms: usize) -> Vec<f64> {
    let mut wt = Dense::zeros(n);
    let max = edges.iter().fold(0.0f64, |m, e| m.max(e.2));
    for &(i, j, v) in edges {
        wt.set(j, i, wt.get(j, i) + v / max.max(f64::MIN_POSITIVE));
    }
    let mut power = Dense::zeros(n);
    for i in 0..n {
        power.set(i, i, 1.0);
    }
    let mut x = vec![0.0; n];
    let mut coef = 1.0;
    for _ in 0..max_terms {
        power = power.mul(&wt);
        coef *= alpha;
        let term: Vec<f64> = power.apply(&vec![1.0; n]).into_iter().map(|v| v * coef).collect();
        let size = term.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (xi, ti) in x.iter_mut().zip(&term) {
            *xi += ti;
        }
        if size < 1e-18 {
            break;
        }
    }
    max_normalize(&x)
}

/// Two-sided Wilcoxon signed-rank p-value by listing all `2^n` sign vectors
/// over the integer ranks `1..=n` (tie-free case).
pub fn wilcoxon_enumerated(n: usize, w_plus: f64) -> f64 {
    assert!(n <= 24, "enumeration limited to n <= 24");
    let total = 1u64 << n;
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0..total {
        let mut s = 0u64;
        for r in 0..n {
            if mask >> r & 1 == 1 {
                s += r as u64 + 1;
            }
        }
        let s = s as f64;
        if s <= w_plus + 1e-9 {
            le += 1;
        }
        if s >= w_plus - 1e-9 {
            ge += 1;
        }
    }
    let p = 2.0 * le.min(ge) as f64 / total as f64;
    p.min(1.0)
}

/// KS statistic by evaluating both empirical CDFs at every pooled value.
pub fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&t| (ecdf(a, t) - ecdf(b, t)).abs())
        .fold(0.0, f64::max)
}

/// Log-likelihood gradient of the logistic model at `(b0, b1)`.
pub fn logistic_gradient(x: &[f64], y: &[bool], b0: f64, b1: f64) -> (f64, f64) {
    x.iter().zip(y).fold((0.0, 0.0), |(g0, g1), (&xi, &yi)| {
        let p = 1.0 / (1.0 + (-(b0 + b1 * xi)).exp());
        let r = f64::from(u8::from(yi)) - p;
        (g0 + r, g1 + r * xi)
    })
}

/// Standardized third moment by direct summation.
pub fn skewness_direct(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilcoxon_enumeration_all_positive() {
        assert!((wilcoxon_enumerated(6, 21.0) - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn ks_disjoint() {
        assert_eq!(ks_brute(&[1., 2., 3., 4.], &[5., 6., 7., 8.]), 1.0);
        assert_eq!(ks_brute(&[1., 2., 3., 4.], &[2.5, 3.5, 4.5, 5.5]), 0.5);
    }

    #[test]
    fn eigen_oracle_cycle() {
        let m = regularized_matrix(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], 1e-6);
        let (x, l) = dominant_eigenvector(&m);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!((l - (1.0 + 3e-6)).abs() < 1e-12);
    }
}

use crate::error::{Error, Result};

use super::{normal_two_sided, PValueMode, TestMethod, TestResult};

/// Largest number of nonzero differences for which the exact null
/// distribution is used.
pub const EXACT_MAX_N: usize = 25;

/// Midranks (1-based) of `v`, plus the tie-group sizes.
fn midranks(v: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Counts of sign assignments by doubled positive-rank sum. Doubling turns
/// midranks into integers so ties stay exact.
fn signed_rank_counts(doubled: &[usize]) -> Vec<f64> {
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Wilcoxon signed-rank test on `first - last`.
///
/// Zero differences are dropped. With at most [`EXACT_MAX_N`] nonzero
/// differences the two-sided p-value comes from the exact permutation
/// distribution of `W+` (midranks under ties); above that, from the normal
/// approximation with tie-corrected variance and continuity correction.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<TestResult> {
    if pairs.is_empty() {
        return Err(Error::invalid("wilcoxon_signed_rank needs at least one pair"));
    }
    if pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::invalid("wilcoxon_signed_rank: non-finite value"));
    }
    let d: Vec<f64> = pairs.iter().map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(TestResult {
            method: TestMethod::WilcoxonSignedRank,
            statistic: 0.0,
            p_value: 1.0,
            n_effective: 0,
            mode: PValueMode::Exact,
            degenerate: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let (ranks, ties) = midranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&d).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();

    let (p, mode) = if n <= EXACT_MAX_N {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let counts = signed_rank_counts(&doubled);
        let w2 = (2.0 * w_plus).round() as usize;
        let total = (n as f64).exp2();
        let le: f64 = counts[..=w2].iter().sum();
        let ge: f64 = counts[w2..].iter().sum();
        ((2.0 * le.min(ge) / total).min(1.0), PValueMode::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_adj: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adj;
        let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (normal_two_sided(z), PValueMode::Asymptotic)
    };

    Ok(TestResult {
        method: TestMethod::WilcoxonSignedRank,
        statistic: w_plus,
        p_value: p,
        n_effective: n,
        mode,
        degenerate: false,
    })
}

/// Normal-approximation p-value for a tie-free sample, exposed for the
/// exact-vs-asymptotic agreement checks.
#[cfg(test)]
pub(crate) fn asymptotic_p(n: usize, w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
    normal_two_sided(((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt())
}

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{PValueMode, TestMethod, TestResult};

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form; the alternating series converges poorly here.
        let t = -PI * PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (m * m * t).exp()
            })
            .sum();
        (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// `D` is the largest gap between the two empirical CDFs over the pooled
/// sample. The p-value is always the asymptotic Kolmogorov tail at
/// `sqrt(m n / (m + n)) * D`; no small-sample correction is applied.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("ks_two_sample needs two nonempty samples"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("ks_two_sample: non-finite value"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (m, n) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < m && j < n {
        let t = xs[i].min(ys[j]);
        while i < m && xs[i] <= t {
            i += 1;
        }
        while j < n && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    // Once one sample is exhausted the gap only shrinks toward zero, except
    // for the jump at the exhaustion point already recorded above.
    let ne = (m * n) as f64 / (m + n) as f64;
    let p = if d == 0.0 { 1.0 } else { kolmogorov_survival(ne.sqrt() * d) };
    Ok(TestResult {
        method: TestMethod::KsTwoSample,
        statistic: d,
        p_value: p,
        n_effective: (ne.round() as usize).max(1),
        mode: PValueMode::Asymptotic,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    #[test]
    fn identical_samples() {
        let r = ks_two_sample(&[0.3, 0.1, 0.7], &[0.7, 0.3, 0.1]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn disjoint_supports() {
        let r = ks_two_sample(&[1., 2., 3., 4.], &[5., 6., 7., 8.]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.mode, PValueMode::Asymptotic);
    }

    #[test]
    fn overlapping_supports() {
        let r = ks_two_sample(&[1., 2., 3., 4.], &[2.5, 3.5, 4.5, 5.5]).unwrap();
        assert_eq!(r.statistic, 0.5);
    }

    #[test]
    fn empty_is_error() {
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ks_two_sample(&[1.0], &[]).is_err());
    }

    #[test]
    fn survival_reference_values() {
        // Q(1.36) ~ 0.0495 and Q(1.0) ~ 0.2700 (standard table values).
        assert!((kolmogorov_survival(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_survival(1.0) - 0.2700).abs() < 5e-4);
        // Both branches agree at the switch point.
        let lo = 1.0 - (2.0 * PI).sqrt() / 1.18 * (1..=20).map(|k| {
            let m = (2 * k - 1) as f64;
            (-(m * m) * PI * PI / (8.0 * 1.18 * 1.18)).exp()
        }).sum::<f64>();
        assert!((lo - kolmogorov_survival(1.18)).abs() < 1e-12);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((0i32..40).prop_map(|v| v as f64 / 8.0), 1..25)
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in sample(), b in sample()) {
            let r = ks_two_sample(&a, &b).unwrap();
            prop_assert!((r.statistic - oracle::ks_brute(&a, &b)).abs() < 1e-15);
        }

        #[test]
        fn symmetric_bounded_monotone_invariant(a in sample(), b in sample()) {
            let ab = ks_two_sample(&a, &b).unwrap();
            let ba = ks_two_sample(&b, &a).unwrap();
            prop_assert_eq!(ab.statistic, ba.statistic);
            prop_assert!((0.0..=1.0).contains(&ab.statistic));
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
            let f = |v: &Vec<f64>| v.iter().map(|x| x.exp() * 3.0 - 1.0).collect::<Vec<_>>();
            prop_assert_eq!(ks_two_sample(&f(&a), &f(&b)).unwrap().statistic, ab.statistic);
        }
    }
}

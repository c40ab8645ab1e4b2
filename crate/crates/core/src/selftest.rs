//! Oracle-equivalence suites: production code against the independent
//! reference implementations in [`crate::oracle`].
//!
//! Every case draws from its own `ChaCha8Rng` seeded with `seed + case`, so
//! results do not depend on the execution strategy.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::centrality::{katz_centrality, power_iteration, CentralityOptions};
use crate::graph::WeeklyNetwork;
use crate::oracle;
use crate::par::{self, Execution};
use crate::stats::{ks_two_sample, logistic_fit, wilcoxon_signed_rank};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    /// Cases that could not be judged (e.g. a fit that separated).
    pub skipped: usize,
    pub failures: usize,
    /// Largest observed error over judged cases.
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > self.skipped
    }
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} cases={} skipped={} failures={} worst={:.3e} tol={:.0e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.skipped,
            self.failures,
            self.worst,
            self.tolerance
        )
    }
}

/// Per-case error; `None` marks a skipped case.
fn collect(name: &'static str, tolerance: f64, errors: Vec<Option<f64>>) -> SuiteOutcome {
    let judged: Vec<f64> = errors.iter().flatten().copied().collect();
    SuiteOutcome {
        name,
        cases: errors.len(),
        skipped: errors.len() - judged.len(),
        failures: judged.iter().filter(|e| !(**e <= tolerance)).count(),
        worst: judged.iter().copied().fold(0.0, f64::max),
        tolerance,
    }
}

fn rng(seed: u64, case: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(case as u64))
}

pub const CENTRALITY_TOL: f64 = 1e-8;

fn centrality_error(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let opts = CentralityOptions::default();
    let it = power_iteration(n, edges, opts.epsilon, opts.tol, opts.max_iter);
    if !it.converged {
        return f64::INFINITY;
    }
    let got = oracle::max_normalize(&it.vector);
    let (want, _) = oracle::dominant_eigenvector(&oracle::regularized_matrix(n, edges, opts.epsilon));
    got.iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

fn strongly_connected(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b, _) in edges {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if from == u && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Every strongly connected unweighted digraph on 1 to 4 labelled nodes.
pub fn strongly_connected_digraphs() -> Vec<(usize, Vec<(usize, usize, f64)>)> {
    let mut out = Vec::new();
    for n in 1..=4usize {
        let slots: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        for mask in 0u32..(1 << slots.len()) {
            let edges: Vec<(usize, usize, f64)> = slots
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &(i, j))| (i, j, 1.0))
                .collect();
            if strongly_connected(n, &edges) {
                out.push((n, edges));
            }
        }
    }
    out
}

pub fn centrality_exhaustive(exec: Execution) -> SuiteOutcome {
    let graphs = strongly_connected_digraphs();
    let errors = par::map(&graphs, exec, |(n, e)| Some(centrality_error(*n, e)));
    collect("centrality_exhaustive", CENTRALITY_TOL, errors)
}

fn random_digraph(r: &mut ChaCha8Rng, max_n: usize) -> (usize, Vec<(usize, usize, f64)>) {
    let n = r.random_range(1..=max_n);
    let density: f64 = r.random();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && r.random::<f64>() < density {
                edges.push((i, j, f64::from(r.random_range(1u32..=9))));
            }
        }
    }
    (n, edges)
}

pub fn centrality_random(cases: usize, seed: u64, exec: Execution) -> SuiteOutcome {
    let errors = par::map_range(cases, exec, |c| {
        let (n, edges) = random_digraph(&mut rng(seed, c), 6);
        Some(centrality_error(n, &edges))
    });
    collect("centrality_random", CENTRALITY_TOL, errors)
}

/// B corrects A, C and D correct B: expect A > B > C = D, with C and D
/// bit-identical.
pub fn peck_order() -> SuiteOutcome {
    let mut net = WeeklyNetwork::new(0, ["A", "B", "C", "D"].map(String::from).to_vec());
    net.add("B", "A", 1);
    net.add("C", "B", 1);
    net.add("D", "B", 1);
    let r = crate::centrality::eigenvector_centrality(&net, &CentralityOptions::default());
    let ok = r.is_ok_and(|r| {
        let s = |k: &str| r.scores[k];
        s("A") > s("B") && s("B") > s("C") && s("C") == s("D") && r.converged
    });
    collect("peck_order", 0.0, vec![Some(if ok { 0.0 } else { 1.0 })])
}

pub fn katz_series(cases: usize, seed: u64, exec: Execution) -> SuiteOutcome {
    let errors = par::map_range(cases, exec, |c| {
        let (n, edges) = random_digraph(&mut rng(seed, c), 6);
        let mut net = WeeklyNetwork::new(0, (0..n).map(|i| format!("n{i}")).collect());
        for &(i, j, w) in &edges {
            net.add(&format!("n{i}"), &format!("n{j}"), w as u64);
        }
        // Rescaled weights are at most 1, so the spectral radius is below 6.
        let alpha = 0.1;
        let got = katz_centrality(&net, alpha, &CentralityOptions::default()).ok()?;
        let want = oracle::katz_series(n, &net.edge_list(), alpha, 5000);
        Some(got.values().iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    });
    collect("katz_series", CENTRALITY_TOL, errors)
}

fn tie_free_pairs(r: &mut ChaCha8Rng, max_n: usize) -> Vec<(f64, f64)> {
    let n = r.random_range(1..=max_n);
    let mut mags: Vec<u32> = (1..=400).collect();
    for i in 0..n {
        let k = r.random_range(i..mags.len());
        mags.swap(i, k);
    }
    mags[..n]
        .iter()
        .map(|&m| {
            let d = f64::from(m) / 64.0;
            let base = r.random::<f64>();
            if r.random::<bool>() {
                (base + d, base)
            } else {
                (base, base + d)
            }
        })
        .collect()
}

pub fn wilcoxon_enumeration(cases: usize, seed: u64, exec: Execution) -> SuiteOutcome {
    let errors = par::map_range(cases, exec, |c| {
        let pairs = tie_free_pairs(&mut rng(seed, c), 12);
        let r = wilcoxon_signed_rank(&pairs).ok()?;
        // The random base can make two |d| collide after rounding; those are
        // not tie-free any more.
        if r.n_effective != pairs.len() || r.statistic.fract() != 0.0 {
            return None;
        }
        Some((r.p_value - oracle::wilcoxon_enumerated(pairs.len(), r.statistic)).abs())
    });
    collect("wilcoxon_enumeration", 1e-12, errors)
}

pub fn wilcoxon_antisymmetry(cases: usize, seed: u64, exec: Execution) -> SuiteOutcome {
    let errors = par::map_range(cases, exec, |c| {
        let pairs = tie_free_pairs(&mut rng(seed, c), 40);
        let a = wilcoxon_signed_rank(&pairs).ok()?;
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (y, x)).collect();
        let b = wilcoxon_signed_rank(&swapped).ok()?;
        let n = a.n_effective as f64;
        let w_err = (a.statistic + b.statistic - n * (n + 1.0) / 2.0).abs();
        Some(w_err.max((a.p_value - b.p_value).abs()))
    });
    collect("wilcoxon_antisymmetry", 1e-12, errors)
}

pub fn ks_breakpoints(cases: usize, seed: u64, exec: Execution) -> SuiteOutcome {
    let errors = par::map_range(cases, exec, |c| {
        let mut r = rng(seed, c);
        // Coarse grid so ties across and within samples are common.
        let sample = |r: &mut ChaCha8Rng| -> Vec<f64> {
            let m = r.random_range(1..=30);
            (0..m).map(|_| f64::from(r.random_range(0u32..20)) / 4.0).collect()
        };
        let a = sample(&mut r);
        let b = sample(&mut r);
        let got = ks_two_sample(&a, &b).ok()?;
        Some((got.statistic - oracle::ks_brute(&a, &b)).abs())
    });
    collect("ks_breakpoints", 1e-15, errors)
}

fn logistic_data(r: &mut ChaCha8Rng) -> Option<(Vec<f64>, Vec<bool>)> {
    let n = r.random_range(10..150);
    let b0 = r.random_range(-2.0..2.0);
    let b1 = r.random_range(-6.0..6.0);
    let x: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    let y: Vec<bool> = x
        .iter()
        .map(|&xi| r.random::<f64>() < 1.0 / (1.0 + (-(b0 + b1 * xi)).exp()))
        .collect();
    let pos = y.iter().filter(|&&v| v).count();
    (pos > 0 && pos < n).then_some((x, y))
}

pub fn logistic_score(cases: usize, seed: u64, exec: Execution) -> SuiteOutcome {
    let errors = par::map_range(cases, exec, |c| {
        let (x, y) = logistic_data(&mut rng(seed, c))?;
        let f = logistic_fit(&x, &y).ok()?;
        if !f.converged {
            return None;
        }
        let (g0, g1) = oracle::logistic_gradient(&x, &y, f.beta0, f.beta1);
        Some(g0.abs().max(g1.abs()))
    });
    collect("logistic_score", 1e-6, errors)
}

pub fn logistic_affine(cases: usize, seed: u64, exec: Execution) -> SuiteOutcome {
    let errors = par::map_range(cases, exec, |c| {
        let mut r = rng(seed, c);
        let (x, y) = logistic_data(&mut r)?;
        let (a, b) = (r.random_range(0.5..3.0), r.random_range(-2.0..2.0));
        let f = logistic_fit(&x, &y).ok()?;
        let moved: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let g = logistic_fit(&moved, &y).ok()?;
        if !f.converged || !g.converged {
            return None;
        }
        // beta1 scales by 1/a; the intercept absorbs the shift.
        let e1 = (g.beta1 - f.beta1 / a).abs();
        let e0 = (g.beta0 - (f.beta0 - f.beta1 * b / a)).abs();
        Some(e0.max(e1))
    });
    collect("logistic_affine", 1e-8, errors)
}

/// All suites with `cases` random cases each.
pub fn run_all(cases: usize, seed: u64, exec: Execution) -> Vec<SuiteOutcome> {
    vec![
        centrality_exhaustive(exec),
        centrality_random(cases, seed, exec),
        peck_order(),
        katz_series(cases, seed, exec),
        wilcoxon_enumeration(cases, seed, exec),
        wilcoxon_antisymmetry(cases, seed, exec),
        ks_breakpoints(cases, seed, exec),
        logistic_score(cases, seed, exec),
        logistic_affine(cases, seed, exec),
    ]
}

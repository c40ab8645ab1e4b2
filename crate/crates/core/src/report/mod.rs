//! End-to-end analysis: events and roster in, one [`AnalysisReport`] out.

mod figures;
pub mod json;
mod svg;

pub use figures::emit_figures;
pub use json::{real, to_json};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centrality::{centrality_series, CentralityOptions};
use crate::error::{Error, Result};
use crate::graph::{build_weekly_networks, most_active_week};
use crate::ingestion::{serialize_events, serialize_roster, validate, CorrectionEvent, ResidentRecord};
use crate::longitudinal::{
    align_trajectories, endpoint_pairs, global_average_curve, CurvePoint, EndpointPair,
    MIN_ENDPOINT_TENURE,
};
use crate::par::Execution;
use crate::stats::{
    boxplot, histogram, kde, ks_two_sample, logistic_fit, predicted_probability, quantile, skewness,
    wilcoxon_signed_rank, BoxplotSummary, HistogramBin, Kde, LogisticFit, TestResult,
};

pub const HISTOGRAM_BINS: usize = 20;
pub const PROB_CURVE_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub window: usize,
    pub horizon: usize,
    pub binarize: bool,
    pub histogram_bins: usize,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        let c = CentralityOptions::default();
        AnalysisParams {
            epsilon: c.epsilon,
            tol: c.tol,
            max_iter: c.max_iter,
            window: 4,
            horizon: 24,
            binarize: false,
            histogram_bins: HISTOGRAM_BINS,
        }
    }
}

impl AnalysisParams {
    fn centrality(&self) -> CentralityOptions {
        CentralityOptions {
            epsilon: self.epsilon,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    fn check(&self) -> Result<()> {
        if self.window == 0 || self.horizon == 0 || self.histogram_bins == 0 {
            return Err(Error::invalid("window, horizon and histogram_bins must be >= 1"));
        }
        Ok(())
    }
}

/// Modelling choices baked into the numbers, spelled out so a reader of the
/// report does not have to know the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumptions {
    pub epsilon_regularized: bool,
    pub edges_weighted: bool,
    pub isolates_kept: bool,
    pub off_tenure_events_dropped: bool,
    pub trailing_rolling_window: bool,
    pub curve_over_present_residents: bool,
    pub min_endpoint_tenure: usize,
    pub ks_asymptotic_only: bool,
    pub predictor_is_last4: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    /// SHA-256 of the canonical CSV serialization of each input.
    pub events_sha256: String,
    pub roster_sha256: String,
    pub params: AnalysisParams,
    pub n_events: usize,
    pub n_residents: usize,
    pub first_week: i64,
    pub last_week: i64,
    pub nonconverged_weeks: Vec<i64>,
    pub warnings: Vec<String>,
    pub assumptions: Assumptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScore {
    pub resident_id: String,
    pub ec: f64,
    pub position_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeight {
    pub corrector_id: String,
    pub corrected_id: String,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub peak_week: i64,
    pub n_nodes: usize,
    pub total_corrections: u64,
    pub all_networks_empty: bool,
    pub lambda: f64,
    pub converged: bool,
    pub histogram: Vec<HistogramBin>,
    pub kde: Option<Kde>,
    pub skewness: Option<f64>,
    pub nodes: Vec<NodeScore>,
    pub edges: Vec<EdgeWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seniority {
    pub curve: Vec<CurvePoint>,
    pub endpoints: Vec<EndpointPair>,
    pub excluded_short_tenure: usize,
    pub median_first4: Option<f64>,
    pub median_last4: Option<f64>,
    pub boxplot_first4: Option<BoxplotSummary>,
    pub boxplot_last4: Option<BoxplotSummary>,
    pub wilcoxon: Option<TestResult>,
    pub ks: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbPoint {
    pub x: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graduation {
    /// Residents entering the fit (those with endpoint pairs).
    pub n: usize,
    pub fit: Option<LogisticFit>,
    pub prob_curve: Vec<ProbPoint>,
    /// Share of the whole roster that did not graduate.
    pub dropout_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: Metadata,
    pub shape: Shape,
    pub seniority: Seniority,
    pub graduation: Graduation,
}

impl AnalysisReport {
    /// False when any weekly power iteration or the logistic fit stopped
    /// without meeting its tolerance.
    pub fn converged(&self) -> bool {
        self.metadata.nonconverged_weeks.is_empty()
            && self.graduation.fit.is_none_or(|f| f.converged)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Some(quantile(&s, 0.5))
}

pub fn run_pipeline(
    events: &[CorrectionEvent],
    roster: &[ResidentRecord],
    params: &AnalysisParams,
) -> Result<AnalysisReport> {
    run_pipeline_with(events, roster, params, Execution::default())
}

/// [`run_pipeline`] with an explicit execution strategy. The report does not
/// depend on the strategy.
pub fn run_pipeline_with(
    events: &[CorrectionEvent],
    roster: &[ResidentRecord],
    params: &AnalysisParams,
    exec: Execution,
) -> Result<AnalysisReport> {
    params.check()?;
    let mut warnings = Vec::new();

    // ingestion
    let issues = validate(events, roster);
    let errors: Vec<String> = issues.iter().filter(|i| i.is_error()).map(|i| i.to_string()).collect();
    if !errors.is_empty() {
        return Err(Error::invalid(errors.join("; ")).at_stage("ingestion"));
    }
    warnings.extend(issues.iter().map(|i| i.to_string()));

    // graph
    let mut networks = build_weekly_networks(events, roster).map_err(|e| e.at_stage("graph"))?;
    if params.binarize {
        networks = networks.iter().map(|n| n.binarized()).collect();
    }
    let peak = most_active_week(&networks).map_err(|e| e.at_stage("graph"))?;
    if peak.all_empty {
        warnings.push(format!("every weekly network is empty; week {} reported as peak", peak.week));
    }

    // centrality
    let series = centrality_series(&networks, &params.centrality(), exec)
        .map_err(|e| e.at_stage("centrality"))?;
    let nonconverged_weeks: Vec<i64> = series.iter().filter(|r| !r.converged).map(|r| r.week).collect();
    if !nonconverged_weeks.is_empty() {
        warnings.push(format!(
            "power iteration hit max_iter in {} week(s)",
            nonconverged_weeks.len()
        ));
    }
    let first_week = networks.first().map_or(0, |n| n.week);
    let peak_result = &series[(peak.week - first_week) as usize];
    let peak_net = &networks[(peak.week - first_week) as usize];
    let values = peak_result.values();

    let histogram = histogram(&values, params.histogram_bins).map_err(|e| e.at_stage("stats"))?;
    let kde = kde(&values, None)
        .map_err(|e| warnings.push(format!("peak-week density skipped: {e}")))
        .ok();
    let skewness = skewness(&values)
        .map_err(|e| warnings.push(format!("peak-week skewness skipped: {e}")))
        .ok();
    let shape = Shape {
        peak_week: peak.week,
        n_nodes: peak_net.len(),
        total_corrections: peak.total_weight,
        all_networks_empty: peak.all_empty,
        lambda: peak_result.lambda,
        converged: peak_result.converged,
        histogram,
        kde,
        skewness,
        nodes: peak_result
            .scores
            .iter()
            .map(|(id, &ec)| NodeScore {
                resident_id: id.clone(),
                ec,
                position_score: peak_result.position_score[id],
            })
            .collect(),
        edges: peak_net
            .weights
            .iter()
            .map(|((a, b), &w)| EdgeWeight {
                corrector_id: a.clone(),
                corrected_id: b.clone(),
                weight: w,
            })
            .collect(),
    };

    // longitudinal
    let trajectories = align_trajectories(&series, roster).map_err(|e| e.at_stage("longitudinal"))?;
    let curve = global_average_curve(&trajectories, params.horizon, params.window);
    let (endpoints, excluded) = endpoint_pairs(&trajectories);
    let first4: Vec<f64> = endpoints.iter().map(|p| p.first4).collect();
    let last4: Vec<f64> = endpoints.iter().map(|p| p.last4).collect();

    // stats
    let (wilcoxon, ks) = if endpoints.is_empty() {
        warnings.push(format!(
            "no resident has the {MIN_ENDPOINT_TENURE} weeks needed for endpoint tests"
        ));
        (None, None)
    } else {
        let pairs: Vec<(f64, f64)> = endpoints.iter().map(|p| (p.first4, p.last4)).collect();
        let w = wilcoxon_signed_rank(&pairs).map_err(|e| e.at_stage("stats"))?;
        let k = ks_two_sample(&first4, &last4).map_err(|e| e.at_stage("stats"))?;
        if w.degenerate {
            warnings.push("wilcoxon: every first4/last4 difference is zero".into());
        }
        (Some(w), Some(k))
    };
    let seniority = Seniority {
        curve,
        excluded_short_tenure: excluded,
        median_first4: median(&first4),
        median_last4: median(&last4),
        boxplot_first4: boxplot(&first4),
        boxplot_last4: boxplot(&last4),
        wilcoxon,
        ks,
        endpoints,
    };

    let graduated: Vec<bool> = seniority
        .endpoints
        .iter()
        .map(|p| roster.iter().find(|r| r.resident_id == p.resident_id).is_some_and(|r| r.graduated))
        .collect();
    let fit = if last4.iter().all(|&v| Some(v) == last4.first().copied()) {
        warnings.push("logistic fit skipped: terminal position does not vary".into());
        None
    } else {
        match logistic_fit(&last4, &graduated) {
            Ok(f) => {
                if f.separation_detected {
                    warnings.push("logistic fit: separation detected".into());
                } else if !f.converged {
                    warnings.push("logistic fit: iteration limit reached".into());
                }
                Some(f)
            }
            Err(e) => {
                warnings.push(format!("logistic fit skipped: {e}"));
                None
            }
        }
    };
    let prob_curve = fit.map_or_else(Vec::new, |f| {
        (0..PROB_CURVE_POINTS)
            .map(|i| {
                let x = i as f64 / (PROB_CURVE_POINTS - 1) as f64;
                ProbPoint {
                    x,
                    probability: predicted_probability(&f, x),
                }
            })
            .collect()
    });
    let dropouts = roster.iter().filter(|r| !r.graduated).count();
    let graduation = Graduation {
        n: last4.len(),
        fit,
        prob_curve,
        dropout_rate: dropouts as f64 / roster.len() as f64,
    };

    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        events_sha256: sha256_hex(&serialize_events(events)),
        roster_sha256: sha256_hex(&serialize_roster(roster)),
        params: *params,
        n_events: events.len(),
        n_residents: roster.len(),
        first_week,
        last_week: networks.last().map_or(first_week, |n| n.week),
        nonconverged_weeks,
        warnings,
        assumptions: Assumptions {
            epsilon_regularized: true,
            edges_weighted: !params.binarize,
            isolates_kept: true,
            off_tenure_events_dropped: true,
            trailing_rolling_window: true,
            curve_over_present_residents: true,
            min_endpoint_tenure: MIN_ENDPOINT_TENURE,
            ks_asymptotic_only: true,
            predictor_is_last4: true,
        },
    };

    Ok(AnalysisReport {
        metadata,
        shape,
        seniority,
        graduation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{simulate, SimulationConfig};

    fn sim() -> (Vec<CorrectionEvent>, Vec<ResidentRecord>) {
        let s = simulate(&SimulationConfig {
            n_residents: 16,
            weeks: 60,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        (s.events, s.roster)
    }

    #[test]
    fn small_simulation_end_to_end() {
        let (ev, ro) = sim();
        let r = run_pipeline(&ev, &ro, &AnalysisParams::default()).unwrap();
        assert_eq!(r.shape.n_nodes, 16);
        assert_eq!(r.shape.histogram.iter().map(|b| b.count).sum::<usize>(), r.shape.n_nodes);
        assert_eq!(r.shape.nodes.len(), r.shape.n_nodes);
        for n in &r.shape.nodes {
            assert_eq!(n.position_score, 1.0 - n.ec);
        }
        assert_eq!(
            r.shape.edges.iter().map(|e| e.weight).sum::<u64>(),
            r.shape.total_corrections
        );
        assert_eq!(r.graduation.prob_curve.len(), PROB_CURVE_POINTS);
        assert_eq!(
            r.seniority.endpoints.len() + r.seniority.excluded_short_tenure,
            ro.len()
        );
        assert!(r.converged());
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let (ev, ro) = sim();
        let r = run_pipeline(&ev, &ro, &AnalysisParams::default()).unwrap();
        let text = r.to_json().unwrap();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let again = run_pipeline_with(&ev, &ro, &AnalysisParams::default(), Execution::Sequential).unwrap();
        assert_eq!(again.to_json().unwrap(), text);
    }

    #[test]
    fn top_level_keys() {
        let (ev, ro) = sim();
        let r = run_pipeline(&ev, &ro, &AnalysisParams::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["graduation", "metadata", "seniority", "shape"]);
        for k in ["peak_week", "n_nodes", "total_corrections", "histogram", "kde", "skewness"] {
            assert!(v["shape"].get(k).is_some(), "{k}");
        }
        for k in ["curve", "wilcoxon", "ks"] {
            assert!(v["seniority"].get(k).is_some(), "{k}");
        }
        for k in ["fit", "prob_curve", "dropout_rate"] {
            assert!(v["graduation"].get(k).is_some(), "{k}");
        }
    }

    #[test]
    fn empty_events_do_not_crash() {
        let (_, ro) = sim();
        let r = run_pipeline(&[], &ro, &AnalysisParams::default()).unwrap();
        assert!(r.shape.all_networks_empty);
        assert_eq!(r.shape.total_corrections, 0);
        assert!(r.seniority.wilcoxon.unwrap().degenerate);
        assert_eq!(r.seniority.ks.unwrap().p_value, 1.0);
        assert!(r.shape.kde.is_none() && r.shape.skewness.is_none());
        assert!(r.graduation.fit.is_none());
        assert!(r.metadata.warnings.iter().any(|w| w.contains("empty")));
        serde_json::from_str::<AnalysisReport>(&r.to_json().unwrap()).unwrap();
    }

    #[test]
    fn validation_errors_stop_the_pipeline() {
        let ro = vec![ResidentRecord::new("a", 0, 3, true), ResidentRecord::new("b", 0, 3, false)];
        let ev = vec![CorrectionEvent::new(1, "a", "zz", 1)];
        let err = run_pipeline(&ev, &ro, &AnalysisParams::default()).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "ingestion", .. }), "{err}");
        assert!(run_pipeline(&[], &[], &AnalysisParams::default()).is_err());
    }

    #[test]
    fn binarize_flag_recorded() {
        let (ev, ro) = sim();
        let p = AnalysisParams {
            binarize: true,
            ..Default::default()
        };
        let r = run_pipeline(&ev, &ro, &p).unwrap();
        assert!(!r.metadata.assumptions.edges_weighted);
        assert!(r.shape.edges.iter().all(|e| e.weight == 1));
    }

    #[test]
    fn digests_track_inputs() {
        let (ev, ro) = sim();
        let a = run_pipeline(&ev, &ro, &AnalysisParams::default()).unwrap();
        let b = run_pipeline(&ev[1..], &ro, &AnalysisParams::default()).unwrap();
        assert_eq!(a.metadata.roster_sha256, b.metadata.roster_sha256);
        assert_ne!(a.metadata.events_sha256, b.metadata.events_sha256);
        assert_eq!(a.metadata.events_sha256.len(), 64);
    }
}

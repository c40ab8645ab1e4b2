//! Program-week trajectories and their summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::centrality::CentralityResult;
use crate::error::{Error, Result};
use crate::ingestion::ResidentRecord;

/// Weeks needed before the first-month and last-month windows stop overlapping.
pub const MIN_ENDPOINT_TENURE: usize = 8;
const ENDPOINT_WINDOW: usize = 4;

/// One resident's centrality by week in program. `scores[0]` is program week 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub resident_id: String,
    pub scores: Vec<f64>,
}

impl Trajectory {
    pub fn tenure(&self) -> usize {
        self.scores.len()
    }

    /// Score at 1-based program week `w`.
    pub fn at(&self, w: usize) -> Option<f64> {
        w.checked_sub(1).and_then(|i| self.scores.get(i)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointPair {
    pub resident_id: String,
    pub first4: f64,
    pub last4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub program_week: usize,
    pub mean: f64,
    pub n: usize,
}

/// Re-indexes calendar-week scores by week in program, one trajectory per
/// roster entry in roster order.
pub fn align_trajectories(
    series: &[CentralityResult],
    roster: &[ResidentRecord],
) -> Result<Vec<Trajectory>> {
    let by_week: BTreeMap<i64, &CentralityResult> = series.iter().map(|r| (r.week, r)).collect();
    roster
        .iter()
        .map(|r| {
            let scores = (r.entry_week..=r.exit_week)
                .map(|week| {
                    by_week
                        .get(&week)
                        .and_then(|res| res.scores.get(&r.resident_id))
                        .copied()
                        .ok_or_else(|| Error::MissingScore {
                            resident: r.resident_id.clone(),
                            week,
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Trajectory {
                resident_id: r.resident_id.clone(),
                scores,
            })
        })
        .collect()
}

/// Trailing mean over `window` weeks; the first `window - 1` weeks average
/// whatever prefix exists.
pub fn rolling_average(scores: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..scores.len())
        .map(|i| {
            let win = &scores[(i + 1).saturating_sub(window)..=i];
            win.iter().sum::<f64>() / win.len() as f64
        })
        .collect()
}

/// Mean of individual rolling averages at each program week `1..=horizon`,
/// over every resident still present at that week.
pub fn global_average_curve(
    trajectories: &[Trajectory],
    horizon: usize,
    window: usize,
) -> Vec<CurvePoint> {
    let rolled: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|t| rolling_average(&t.scores[..t.tenure().min(horizon)], window))
        .collect();
    (1..=horizon)
        .filter_map(|w| {
            let mut vals: Vec<f64> = rolled.iter().filter_map(|r| r.get(w - 1).copied()).collect();
            if vals.is_empty() {
                return None;
            }
            // Fixed summation order makes the curve independent of input order.
            vals.sort_by(f64::total_cmp);
            Some(CurvePoint {
                program_week: w,
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                n: vals.len(),
            })
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// First-month and last-month means for residents with at least
/// [`MIN_ENDPOINT_TENURE`] weeks. Also returns how many were excluded.
pub fn endpoint_pairs(trajectories: &[Trajectory]) -> (Vec<EndpointPair>, usize) {
    let mut excluded = 0;
    let pairs = trajectories
        .iter()
        .filter_map(|t| {
            if t.tenure() < MIN_ENDPOINT_TENURE {
                excluded += 1;
                return None;
            }
            let n = t.tenure();
            Some(EndpointPair {
                resident_id: t.resident_id.clone(),
                first4: mean(&t.scores[..ENDPOINT_WINDOW]),
                last4: mean(&t.scores[n - ENDPOINT_WINDOW..]),
            })
        })
        .collect();
    (pairs, excluded)
}

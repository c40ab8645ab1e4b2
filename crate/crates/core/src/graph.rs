//! Weekly correction networks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::{CorrectionEvent, ResidentRecord};

/// Weighted digraph of one calendar week's corrections.
///
/// `nodes` holds every resident on the roster that week (isolates included),
/// sorted lexicographically. Edge keys run corrector -> corrected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeeklyNetwork {
    pub week: i64,
    pub nodes: Vec<String>,
    pub weights: BTreeMap<(String, String), u64>,
}

impl WeeklyNetwork {
    pub fn new(week: i64, mut nodes: Vec<String>) -> Self {
        nodes.sort();
        nodes.dedup();
        WeeklyNetwork {
            week,
            nodes,
            weights: BTreeMap::new(),
        }
    }

    /// Adds `count` corrections. Panics on a self-loop or an endpoint outside
    /// `nodes`; construction code filters those first.
    pub fn add(&mut self, corrector: &str, corrected: &str, count: u64) {
        assert_ne!(corrector, corrected, "self-loop");
        assert!(self.index_of(corrector).is_some() && self.index_of(corrected).is_some());
        *self
            .weights
            .entry((corrector.to_string(), corrected.to_string()))
            .or_insert(0) += count;
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.values().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    /// Edges as `(corrector_index, corrected_index, weight)` in key order.
    pub fn edge_list(&self) -> Vec<(usize, usize, f64)> {
        self.weights
            .iter()
            .map(|((a, b), &w)| {
                let i = self.index_of(a).expect("edge endpoint in nodes");
                let j = self.index_of(b).expect("edge endpoint in nodes");
                (i, j, w as f64)
            })
            .collect()
    }

    /// Same network with every positive weight replaced by 1.
    pub fn binarized(&self) -> WeeklyNetwork {
        WeeklyNetwork {
            week: self.week,
            nodes: self.nodes.clone(),
            weights: self.weights.keys().map(|k| (k.clone(), 1)).collect(),
        }
    }
}

/// Builds one snapshot per calendar week from the earliest entry to the latest
/// exit. Events whose endpoints are not both on the roster that week, and
/// self-corrections, are dropped.
pub fn build_weekly_networks(
    events: &[CorrectionEvent],
    roster: &[ResidentRecord],
) -> Result<Vec<WeeklyNetwork>> {
    let first = roster.iter().map(|r| r.entry_week).min().ok_or(Error::EmptyRoster)?;
    let last = roster.iter().map(|r| r.exit_week).max().ok_or(Error::EmptyRoster)?;

    let mut sorted: Vec<&ResidentRecord> = roster.iter().collect();
    sorted.sort_by(|a, b| a.resident_id.cmp(&b.resident_id));

    let mut networks: Vec<WeeklyNetwork> = (first..=last)
        .map(|week| {
            let nodes = sorted
                .iter()
                .filter(|r| r.present_in(week))
                .map(|r| r.resident_id.clone())
                .collect();
            WeeklyNetwork {
                week,
                nodes,
                weights: BTreeMap::new(),
            }
        })
        .collect();

    for e in events {
        if e.week < first || e.week > last {
            continue;
        }
        let net = &mut networks[(e.week - first) as usize];
        if e.corrector_id != e.corrected_id
            && net.index_of(&e.corrector_id).is_some()
            && net.index_of(&e.corrected_id).is_some()
        {
            net.add(&e.corrector_id, &e.corrected_id, u64::from(e.count));
        }
    }
    Ok(networks)
}

/// The most active week, ties going to the earliest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakWeek {
    pub week: i64,
    pub total_weight: u64,
    /// Set when every network is empty; `week` is then the first week.
    pub all_empty: bool,
}

pub fn most_active_week(networks: &[WeeklyNetwork]) -> Result<PeakWeek> {
    let mut best: Option<(i64, u64)> = None;
    for n in networks {
        let t = n.total_weight();
        match best {
            Some((w, bt)) if bt > t || (bt == t && w <= n.week) => {}
            _ => best = Some((n.week, t)),
        }
    }
    let (week, total_weight) =
        best.ok_or_else(|| Error::invalid("most_active_week needs at least one network"))?;
    Ok(PeakWeek {
        week,
        total_weight,
        all_empty: total_weight == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(w: i64, a: &str, b: &str, c: u32) -> CorrectionEvent {
        CorrectionEvent::new(w, a, b, c)
    }

    #[test]
    fn empty_events_give_isolate_networks() {
        let nets = build_weekly_networks(&[], &[ResidentRecord::new("r1", 0, 1, true)]).unwrap();
        assert_eq!(nets.len(), 2);
        for n in &nets {
            assert_eq!(n.nodes, vec!["r1".to_string()]);
            assert!(n.weights.is_empty());
        }
    }

    #[test]
    fn weights_add_up() {
        let roster = [ResidentRecord::new("r1", 0, 0, true), ResidentRecord::new("r2", 0, 0, true)];
        let nets = build_weekly_networks(&[ev(0, "r1", "r2", 2), ev(0, "r1", "r2", 3)], &roster).unwrap();
        assert_eq!(nets[0].weights[&("r1".into(), "r2".into())], 5);
    }

    #[test]
    fn out_of_tenure_and_unknown_dropped() {
        let roster = [ResidentRecord::new("b", 0, 5, true), ResidentRecord::new("a", 3, 5, true)];
        let events = [ev(1, "a", "b", 1), ev(4, "a", "b", 1), ev(4, "a", "zz", 7)];
        let nets = build_weekly_networks(&events, &roster).unwrap();
        assert_eq!(nets.iter().map(WeeklyNetwork::total_weight).sum::<u64>(), 1);
        assert_eq!(nets[1].nodes, vec!["b".to_string()]);
        assert_eq!(nets[4].nodes, vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn empty_roster_is_error() {
        assert!(matches!(build_weekly_networks(&[], &[]), Err(Error::EmptyRoster)));
    }

    fn with_totals(totals: &[u64]) -> Vec<WeeklyNetwork> {
        totals
            .iter()
            .enumerate()
            .map(|(w, &t)| {
                let mut n = WeeklyNetwork::new(w as i64, vec!["a".into(), "b".into()]);
                if t > 0 {
                    n.add("a", "b", t);
                }
                n
            })
            .collect()
    }

    #[test]
    fn peak_tie_break() {
        let p = most_active_week(&with_totals(&[5, 9, 9])).unwrap();
        assert_eq!((p.week, p.total_weight, p.all_empty), (1, 9, false));
    }

    #[test]
    fn peak_all_empty() {
        let p = most_active_week(&with_totals(&[0, 0])).unwrap();
        assert_eq!((p.week, p.all_empty), (0, true));
        assert!(most_active_week(&[]).is_err());
    }

    fn small_world() -> impl Strategy<Value = (Vec<ResidentRecord>, Vec<CorrectionEvent>)> {
        let roster = prop::collection::vec((0i64..6, 0i64..6, any::<bool>()), 2..6).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (a, b, g))| ResidentRecord::new(format!("r{i}"), a.min(b), a.max(b), g))
                .collect::<Vec<_>>()
        });
        roster.prop_flat_map(|roster| {
            let n = roster.len();
            let events = prop::collection::vec((0i64..7, 0..n, 0..n, 1u32..4), 0..30).prop_map(|v| {
                v.into_iter()
                    .filter(|(_, a, b, _)| a != b)
                    .map(|(w, a, b, c)| CorrectionEvent::new(w, format!("r{a}"), format!("r{b}"), c))
                    .collect::<Vec<_>>()
            });
            (Just(roster), events)
        })
    }

    proptest! {
        #[test]
        fn weight_conservation_and_presence((roster, events) in small_world()) {
            let nets = build_weekly_networks(&events, &roster).unwrap();
            let in_tenure: u64 = events
                .iter()
                .filter(|e| {
                    let find = |id: &str| roster.iter().find(|r| r.resident_id == id).unwrap();
                    find(&e.corrector_id).present_in(e.week) && find(&e.corrected_id).present_in(e.week)
                })
                .map(|e| u64::from(e.count))
                .sum();
            prop_assert_eq!(nets.iter().map(WeeklyNetwork::total_weight).sum::<u64>(), in_tenure);
            for r in &roster {
                let appearances = nets.iter().filter(|n| n.index_of(&r.resident_id).is_some()).count();
                prop_assert_eq!(appearances, r.tenure());
            }
            for n in &nets {
                for (a, b) in n.weights.keys() {
                    prop_assert!(a != b);
                    prop_assert!(n.index_of(a).is_some() && n.index_of(b).is_some());
                }
            }
        }

        #[test]
        fn event_order_irrelevant((roster, events) in small_world(), seed in any::<u64>()) {
            let mut shuffled = events.clone();
            // Fisher-Yates driven by a tiny LCG so the shrinker stays deterministic.
            let mut s = seed | 1;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(
                build_weekly_networks(&events, &roster).unwrap(),
                build_weekly_networks(&shuffled, &roster).unwrap()
            );
        }
    }
}

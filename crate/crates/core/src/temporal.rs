//! Life cycles, five-phase time windows, and per-phase transaction features.
//!
//! Each account's life cycle is split into five equal spans. The sliding
//! scheme yields five disjoint windows covering the life cycle; the
//! incremental scheme yields five nested prefixes growing by one span each
//! phase. Every boundary is an integer second, rounded half up.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::egonet::{Direction, EgoNetwork};
use crate::tx::{AccountLabel, TransactionSet};

/// Number of phases in either windowing scheme.
pub const PHASES: usize = 5;

const SECONDS_PER_DAY: f64 = 86_400.0;

/// First and last activity of one account.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifeCycle {
    first: u64,
    last: u64,
}

impl LifeCycle {
    pub fn new(first: u64, last: u64) -> LifeCycle {
        assert!(first <= last, "life cycle ends before it starts");
        LifeCycle { first, last }
    }

    pub fn first(&self) -> u64 {
        self.first
    }

    pub fn last(&self) -> u64 {
        self.last
    }

    pub fn span(&self) -> u64 {
        self.last - self.first
    }

    pub fn span_days(&self) -> f64 {
        self.span() as f64 / SECONDS_PER_DAY
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no activity for account `{0}`")]
pub struct NoActivity(pub String);

/// First/last transaction times of an account, self-transfers included.
pub fn life_cycle(account: &str, txs: &TransactionSet) -> Result<LifeCycle, NoActivity> {
    let id = txs
        .account_id(account)
        .ok_or_else(|| NoActivity(account.to_owned()))?;
    let positions = txs.positions(id);
    let (first, last) = match (positions.first(), positions.last()) {
        (Some(&a), Some(&b)) => (
            txs.records()[a as usize].timestamp,
            txs.records()[b as usize].timestamp,
        ),
        _ => return Err(NoActivity(account.to_owned())),
    };
    Ok(LifeCycle::new(first, last))
}

/// Windowing scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    Sliding,
    Incremental,
}

impl WindowMode {
    pub const ALL: [WindowMode; 2] = [WindowMode::Sliding, WindowMode::Incremental];

    pub fn as_str(self) -> &'static str {
        match self {
            WindowMode::Sliding => "sliding",
            WindowMode::Incremental => "incremental",
        }
    }
}

impl fmt::Display for WindowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One time interval of a windowing scheme. The interval is half-open except
/// in the final phase, which closes on the life cycle's last instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseWindow {
    index: u8,
    start: u64,
    end: u64,
    end_inclusive: bool,
    mode: WindowMode,
}

impl PhaseWindow {
    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn end(&self) -> u64 {
        self.end
    }

    pub fn is_end_inclusive(&self) -> bool {
        self.end_inclusive
    }

    pub fn mode(&self) -> WindowMode {
        self.mode
    }

    pub fn contains(&self, t: u64) -> bool {
        t >= self.start && (t < self.end || (self.end_inclusive && t == self.end))
    }
}

/// Offset of boundary `i` from the life cycle start: round-half-up(i·span/5).
fn boundary(span: u64, i: u32) -> u64 {
    ((2 * u128::from(i) * u128::from(span) + 5) / 10) as u64
}

/// The five windows of a scheme over one life cycle.
pub fn phase_windows(life: &LifeCycle, mode: WindowMode) -> [PhaseWindow; PHASES] {
    std::array::from_fn(|i| {
        let end = life.first() + boundary(life.span(), i as u32 + 1);
        let start = match mode {
            WindowMode::Sliding => life.first() + boundary(life.span(), i as u32),
            WindowMode::Incremental => life.first(),
        };
        PhaseWindow {
            index: i as u8,
            start,
            end,
            end_inclusive: i == PHASES - 1,
            mode,
        }
    })
}

/// In/out transaction counts and summed amounts of one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseFeatures {
    pub index: u8,
    pub in_count: u64,
    pub out_count: u64,
    pub in_amount: Amount,
    pub out_amount: Amount,
}

impl PhaseFeatures {
    pub fn total_count(&self) -> u64 {
        self.in_count + self.out_count
    }

    /// Share of in-transactions; 0 for an empty window.
    pub fn in_ratio(&self) -> f64 {
        let total = self.total_count();
        if total == 0 {
            0.0
        } else {
            self.in_count as f64 / total as f64
        }
    }

    /// Complement of [`Self::in_ratio`]; 0 for an empty window.
    pub fn out_ratio(&self) -> f64 {
        if self.total_count() == 0 {
            0.0
        } else {
            1.0 - self.in_ratio()
        }
    }
}

/// Per-window features over the network's ego-adjacent transfers.
///
/// Alter-alter transfers never contribute. Windows are resolved with binary
/// search over the time-sorted edge list plus prefix sums, so the cost is
/// O(edges + windows·log(edges)) regardless of scheme.
pub fn phase_features(net: &EgoNetwork, windows: &[PhaseWindow; PHASES]) -> [PhaseFeatures; PHASES] {
    let edges = net.ego_edges();
    debug_assert!(edges.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));

    let mut in_count = vec![0u64; edges.len() + 1];
    let mut out_count = vec![0u64; edges.len() + 1];
    let mut in_wei = vec![0u128; edges.len() + 1];
    let mut out_wei = vec![0u128; edges.len() + 1];
    for (i, edge) in edges.iter().enumerate() {
        in_count[i + 1] = in_count[i];
        out_count[i + 1] = out_count[i];
        in_wei[i + 1] = in_wei[i];
        out_wei[i + 1] = out_wei[i];
        match edge.direction {
            Direction::In => {
                in_count[i + 1] += 1;
                in_wei[i + 1] += edge.amount.wei();
            }
            Direction::Out => {
                out_count[i + 1] += 1;
                out_wei[i + 1] += edge.amount.wei();
            }
        }
    }

    std::array::from_fn(|w| {
        let win = &windows[w];
        let lo = edges.partition_point(|e| e.timestamp < win.start());
        let hi = if win.is_end_inclusive() {
            edges.partition_point(|e| e.timestamp <= win.end())
        } else {
            edges.partition_point(|e| e.timestamp < win.end())
        };
        let hi = hi.max(lo);
        PhaseFeatures {
            index: win.index(),
            in_count: in_count[hi] - in_count[lo],
            out_count: out_count[hi] - out_count[lo],
            in_amount: Amount::from_wei(in_wei[hi] - in_wei[lo]),
            out_amount: Amount::from_wei(out_wei[hi] - out_wei[lo]),
        }
    })
}

/// Per-label life cycle statistics, in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifecycleStats {
    pub median_days: f64,
    pub mean_days: f64,
    pub max_days: f64,
}

/// Median, mean, and maximum life cycle per label.
///
/// The median of an even group is the average of the two middle values.
pub fn label_lifecycle_stats<I>(lifecycles: I) -> BTreeMap<AccountLabel, LifecycleStats>
where
    I: IntoIterator<Item = (AccountLabel, LifeCycle)>,
{
    let mut groups: BTreeMap<AccountLabel, Vec<f64>> = BTreeMap::new();
    for (label, life) in lifecycles {
        groups.entry(label).or_default().push(life.span_days());
    }
    groups
        .into_iter()
        .map(|(label, mut days)| {
            days.sort_by(|a, b| a.partial_cmp(b).expect("spans are finite"));
            let n = days.len();
            let median = if n % 2 == 1 {
                days[n / 2]
            } else {
                (days[n / 2 - 1] + days[n / 2]) / 2.0
            };
            let mean = days.iter().sum::<f64>() / n as f64;
            let max = *days.last().expect("group is non-empty");
            (
                label,
                LifecycleStats {
                    median_days: median,
                    mean_days: mean,
                    max_days: max,
                },
            )
        })
        .collect()
}

/// One phase of a label's averaged feature table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAggregate {
    pub phase: u8,
    /// Arithmetic mean of per-ego in/out counts.
    pub mean_in_count: f64,
    pub mean_out_count: f64,
    /// Pooled share: summed in-counts over summed totals. `None` when the
    /// phase holds no transactions across the whole group.
    pub pooled_in_ratio: Option<f64>,
    pub pooled_out_ratio: Option<f64>,
    /// Mean of per-ego in-ratios over egos active in the phase.
    pub mean_in_ratio: Option<f64>,
    /// Per-ego mean amounts, rounded to the nearest Wei.
    pub mean_in_amount: Amount,
    pub mean_out_amount: Amount,
}

/// Pool and average per-ego phase features within each label.
///
/// Ratios are pooled (summed counts, then divided); the mean of per-ego
/// ratios is carried alongside as an auxiliary statistic.
pub fn label_phase_table<I>(features: I) -> BTreeMap<AccountLabel, [PhaseAggregate; PHASES]>
where
    I: IntoIterator<Item = (AccountLabel, [PhaseFeatures; PHASES])>,
{
    let mut groups: BTreeMap<AccountLabel, Vec<[PhaseFeatures; PHASES]>> = BTreeMap::new();
    for (label, phases) in features {
        groups.entry(label).or_default().push(phases);
    }
    groups
        .into_iter()
        .map(|(label, egos)| {
            let n = egos.len() as u64;
            let table = std::array::from_fn(|phase| {
                let mut in_sum = 0u64;
                let mut out_sum = 0u64;
                let mut in_wei = 0u128;
                let mut out_wei = 0u128;
                let mut ratio_sum = 0.0;
                let mut active = 0u64;
                for ego in &egos {
                    let f = &ego[phase];
                    in_sum += f.in_count;
                    out_sum += f.out_count;
                    in_wei += f.in_amount.wei();
                    out_wei += f.out_amount.wei();
                    if f.total_count() > 0 {
                        ratio_sum += f.in_ratio();
                        active += 1;
                    }
                }
                let pooled = (in_sum + out_sum > 0)
                    .then(|| in_sum as f64 / (in_sum + out_sum) as f64);
                PhaseAggregate {
                    phase: phase as u8,
                    mean_in_count: in_sum as f64 / n as f64,
                    mean_out_count: out_sum as f64 / n as f64,
                    pooled_in_ratio: pooled,
                    pooled_out_ratio: pooled.map(|r| 1.0 - r),
                    mean_in_ratio: (active > 0).then(|| ratio_sum / active as f64),
                    mean_in_amount: Amount::from_wei(in_wei).div_round(u128::from(n)),
                    mean_out_amount: Amount::from_wei(out_wei).div_round(u128::from(n)),
                }
            });
            (label, table)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egonet::build_ego_network;
    use crate::reference;
    use crate::tx::{TransactionRecord, TransactionSet};

    fn window_bounds(windows: &[PhaseWindow; PHASES]) -> Vec<(u64, u64)> {
        windows.iter().map(|w| (w.start(), w.end())).collect()
    }

    #[test]
    fn sliding_windows_partition_span_100() {
        let life = LifeCycle::new(0, 100);
        let windows = phase_windows(&life, WindowMode::Sliding);
        assert_eq!(
            window_bounds(&windows),
            vec![(0, 20), (20, 40), (40, 60), (60, 80), (80, 100)]
        );
        assert!(windows[4].is_end_inclusive());
        assert!(!windows[0].is_end_inclusive());
    }

    #[test]
    fn incremental_windows_nest_span_100() {
        let life = LifeCycle::new(0, 100);
        let windows = phase_windows(&life, WindowMode::Incremental);
        assert_eq!(
            window_bounds(&windows),
            vec![(0, 20), (0, 40), (0, 60), (0, 80), (0, 100)]
        );
    }

    #[test]
    fn boundaries_round_half_up() {
        let life = LifeCycle::new(0, 7);
        let windows = phase_windows(&life, WindowMode::Sliding);
        // spans of 1.4s round to [1, 3, 4, 6, 7]
        assert_eq!(
            window_bounds(&windows),
            vec![(0, 1), (1, 3), (3, 4), (4, 6), (6, 7)]
        );
    }

    #[test]
    fn zero_span_collapses_to_final_phase() {
        let life = LifeCycle::new(50, 50);
        for mode in WindowMode::ALL {
            let windows = phase_windows(&life, mode);
            for w in &windows[..4] {
                assert_eq!((w.start(), w.end()), (50, 50));
                assert!(!w.contains(50));
            }
            assert!(windows[4].contains(50));
        }
    }

    #[test]
    fn life_cycle_from_records() {
        let txs = TransactionSet::from_records(vec![
            rec("a", "b", 400),
            rec("b", "a", 100),
            rec("a", "c", 900),
        ]);
        let life = life_cycle("a", &txs).unwrap();
        assert_eq!(life.first(), 100);
        assert_eq!(life.last(), 900);
        assert_eq!(life.span(), 800);
    }

    #[test]
    fn single_transaction_has_zero_span() {
        let txs = TransactionSet::from_records(vec![rec("a", "b", 100)]);
        assert_eq!(life_cycle("a", &txs).unwrap().span(), 0);
    }

    #[test]
    fn self_transfers_count_toward_life_cycle() {
        let txs = TransactionSet::from_records(vec![rec("a", "b", 500), rec("a", "a", 100)]);
        let life = life_cycle("a", &txs).unwrap();
        assert_eq!(life.first(), 100);
    }

    #[test]
    fn missing_account_is_no_activity() {
        let txs = TransactionSet::from_records(vec![rec("a", "b", 100)]);
        assert_eq!(
            life_cycle("x", &txs),
            Err(NoActivity("x".to_owned()))
        );
    }

    fn rec(from: &str, to: &str, t: u64) -> TransactionRecord {
        TransactionRecord {
            sender: from.to_owned(),
            receiver: to.to_owned(),
            amount: Amount::from_ether(1).unwrap(),
            timestamp: t,
        }
    }

    fn rec_amt(from: &str, to: &str, amount: &str, t: u64) -> TransactionRecord {
        TransactionRecord {
            sender: from.to_owned(),
            receiver: to.to_owned(),
            amount: amount.parse().unwrap(),
            timestamp: t,
        }
    }

    #[test]
    fn features_unrolled_single_window() {
        // all at one instant: span 0, so everything lands in P4
        let txs = TransactionSet::from_records(vec![
            rec_amt("x", "ego", "2.0", 100),
            rec_amt("x", "ego", "3.0", 100),
            rec_amt("ego", "y", "1.0", 100),
        ]);
        let net = build_ego_network("ego", &txs);
        let life = life_cycle("ego", &txs).unwrap();
        let features = phase_features(&net, &phase_windows(&life, WindowMode::Sliding));
        for f in &features[..4] {
            assert_eq!(f.total_count(), 0);
            assert_eq!(f.in_ratio(), 0.0);
            assert_eq!(f.out_ratio(), 0.0);
        }
        let last = &features[4];
        assert_eq!(last.in_count, 2);
        assert_eq!(last.out_count, 1);
        assert_eq!(last.in_amount, "5".parse().unwrap());
        assert_eq!(last.out_amount, "1".parse().unwrap());
        assert!((last.in_ratio() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn incremental_final_phase_equals_totals() {
        let txs = TransactionSet::from_records(vec![
            rec("x", "ego", 0),
            rec("ego", "y", 250),
            rec("x", "ego", 500),
            rec("ego", "y", 999),
            rec("z", "ego", 1000),
        ]);
        let net = build_ego_network("ego", &txs);
        let life = life_cycle("ego", &txs).unwrap();
        let features = phase_features(&net, &phase_windows(&life, WindowMode::Incremental));
        assert_eq!(features[4].in_count, 3);
        assert_eq!(features[4].out_count, 2);
        for pair in features.windows(2) {
            assert!(pair[1].in_count >= pair[0].in_count);
            assert!(pair[1].out_count >= pair[0].out_count);
            assert!(pair[1].in_amount >= pair[0].in_amount);
            assert!(pair[1].out_amount >= pair[0].out_amount);
        }
    }

    #[test]
    fn matches_scan_baseline_on_random_traces() {
        let mut rng = reference::SplitMix64::new(11);
        for round in 0..100 {
            let records = reference::random_phase_trace(&mut rng, 200);
            let txs = TransactionSet::from_records(records.clone());
            let net = build_ego_network("ego", &txs);
            let life = life_cycle("ego", &txs).unwrap();
            for mode in WindowMode::ALL {
                let windows = phase_windows(&life, mode);
                let features = phase_features(&net, &windows);
                let scanned = reference::phase_counts_by_scan("ego", &records, &windows);
                for (f, s) in features.iter().zip(&scanned) {
                    assert_eq!(f.in_count, s.in_count, "round {round} {mode}");
                    assert_eq!(f.out_count, s.out_count, "round {round} {mode}");
                    assert_eq!(f.in_amount, s.in_amount, "round {round} {mode}");
                    assert_eq!(f.out_amount, s.out_amount, "round {round} {mode}");
                }
            }
        }
    }

    #[test]
    fn sliding_partition_covers_every_record() {
        let mut rng = reference::SplitMix64::new(23);
        for _ in 0..50 {
            let records = reference::random_phase_trace(&mut rng, 137);
            let txs = TransactionSet::from_records(records);
            let net = build_ego_network("ego", &txs);
            let life = life_cycle("ego", &txs).unwrap();
            let features = phase_features(&net, &phase_windows(&life, WindowMode::Sliding));
            let total: u64 = features.iter().map(PhaseFeatures::total_count).sum();
            assert_eq!(total, net.ego_edges().len() as u64);
        }
    }

    #[test]
    fn time_shift_leaves_features_unchanged() {
        let mut rng = reference::SplitMix64::new(31);
        let records = reference::random_phase_trace(&mut rng, 80);
        let shifted: Vec<TransactionRecord> = records
            .iter()
            .map(|r| TransactionRecord {
                timestamp: r.timestamp + 123_456_789,
                ..r.clone()
            })
            .collect();
        for (set, set_shifted) in [(
            TransactionSet::from_records(records),
            TransactionSet::from_records(shifted),
        )] {
            for mode in WindowMode::ALL {
                let a = phase_features(
                    &build_ego_network("ego", &set),
                    &phase_windows(&life_cycle("ego", &set).unwrap(), mode),
                );
                let b = phase_features(
                    &build_ego_network("ego", &set_shifted),
                    &phase_windows(&life_cycle("ego", &set_shifted).unwrap(), mode),
                );
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn lifecycle_stats_examples() {
        let day = 86_400u64;
        let stats = label_lifecycle_stats(vec![
            (AccountLabel::Mining, LifeCycle::new(0, 10 * day)),
            (AccountLabel::Mining, LifeCycle::new(0, 20 * day)),
            (AccountLabel::Mining, LifeCycle::new(0, 30 * day)),
            (AccountLabel::Phish, LifeCycle::new(5, 5)),
        ]);
        let mining = &stats[&AccountLabel::Mining];
        assert_eq!(mining.median_days, 20.0);
        assert_eq!(mining.mean_days, 20.0);
        assert_eq!(mining.max_days, 30.0);
        let phish = &stats[&AccountLabel::Phish];
        assert_eq!(phish.median_days, 0.0);
        assert_eq!(phish.max_days, 0.0);
    }

    #[test]
    fn even_group_median_averages_middle_values() {
        let day = 86_400u64;
        let stats = label_lifecycle_stats(vec![
            (AccountLabel::Ico, LifeCycle::new(0, 10 * day)),
            (AccountLabel::Ico, LifeCycle::new(0, 20 * day)),
            (AccountLabel::Ico, LifeCycle::new(0, 40 * day)),
            (AccountLabel::Ico, LifeCycle::new(0, 80 * day)),
        ]);
        assert_eq!(stats[&AccountLabel::Ico].median_days, 30.0);
    }

    fn phases_with(counts: [(u64, u64); PHASES]) -> [PhaseFeatures; PHASES] {
        std::array::from_fn(|i| PhaseFeatures {
            index: i as u8,
            in_count: counts[i].0,
            out_count: counts[i].1,
            in_amount: Amount::from_wei(counts[i].0 as u128 * 10),
            out_amount: Amount::from_wei(counts[i].1 as u128 * 10),
        })
    }

    #[test]
    fn pooled_ratio_sums_counts_before_dividing() {
        let zero = [(0, 0); PHASES];
        let mut a = zero;
        a[0] = (1, 1);
        let mut b = zero;
        b[0] = (3, 1);
        let table = label_phase_table(vec![
            (AccountLabel::Ponzi, phases_with(a)),
            (AccountLabel::Ponzi, phases_with(b)),
        ]);
        let phase0 = &table[&AccountLabel::Ponzi][0];
        assert!((phase0.pooled_in_ratio.unwrap() - 4.0 / 6.0).abs() < 1e-12);
        assert!((phase0.pooled_out_ratio.unwrap() - 2.0 / 6.0).abs() < 1e-12);
        // mean of per-ego ratios differs: (1/2 + 3/4) / 2
        assert!((phase0.mean_in_ratio.unwrap() - 0.625).abs() < 1e-12);
        assert_eq!(phase0.mean_in_count, 2.0);
        // empty pooled phase reports no ratio
        let phase1 = &table[&AccountLabel::Ponzi][1];
        assert_eq!(phase1.pooled_in_ratio, None);
        assert_eq!(phase1.mean_in_ratio, None);
        assert_eq!(phase1.mean_in_count, 0.0);
    }

    #[test]
    fn single_ego_pooled_ratio_is_its_own() {
        let mut counts = [(0, 0); PHASES];
        counts[2] = (2, 6);
        let table = label_phase_table(vec![(AccountLabel::Exchange, phases_with(counts))]);
        let phase2 = &table[&AccountLabel::Exchange][2];
        assert_eq!(phase2.pooled_in_ratio, Some(0.25));
        assert_eq!(phase2.mean_in_ratio, Some(0.25));
    }

    #[test]
    fn mean_amounts_round_to_nearest_wei() {
        let zero = [(0, 0); PHASES];
        let mut a = zero;
        a[0] = (1, 0);
        let table = label_phase_table(vec![
            (AccountLabel::Ico, phases_with(a)),
            (AccountLabel::Ico, phases_with(zero)),
            (AccountLabel::Ico, phases_with(zero)),
        ]);
        // 10 wei over 3 egos rounds to 3 wei
        assert_eq!(table[&AccountLabel::Ico][0].mean_in_amount.wei(), 3);
    }
}

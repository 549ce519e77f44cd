//! Naive baseline implementations and a small deterministic generator.
//!
//! Everything here trades speed for obviousness: the clustering baseline
//! enumerates all ordered alter pairs, the phase baseline rescans the full
//! record list per window. Tests and benches compare the optimized paths
//! in [`crate::egonet`] and [`crate::temporal`] against these.

use std::collections::HashSet;

use crate::amount::Amount;
use crate::temporal::{PhaseWindow, PHASES};
use crate::tx::TransactionRecord;

/// SplitMix64 generator (Steele, Lea & Flood 2014). Small, fast, and easy
/// to reproduce in any language, which keeps fixtures portable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform float in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in [0, bound).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        self.next_u64() % bound
    }
}

fn random_amount(rng: &mut SplitMix64) -> Amount {
    Amount::from_wei(u128::from(rng.next_below(1_000_000_000_000)) + 1)
}

/// Random ego trace: the account `ego` touches `alter_count` distinct
/// alters once each (random direction), and every ordered alter pair is
/// linked with probability `edge_prob`. A tenth of the pair edges are
/// duplicated and a few ego self-transfers are mixed in, so collapsing
/// and exclusion rules get exercised too.
pub fn random_ego_trace(
    rng: &mut SplitMix64,
    alter_count: usize,
    edge_prob: f64,
) -> Vec<TransactionRecord> {
    let alters: Vec<String> = (0..alter_count).map(|i| format!("a{i}")).collect();
    let mut records = Vec::new();
    let mut push = |from: &str, to: &str, rng: &mut SplitMix64| {
        records.push(TransactionRecord {
            sender: from.to_owned(),
            receiver: to.to_owned(),
            amount: random_amount(rng),
            timestamp: rng.next_below(100_000),
        });
    };
    for alter in &alters {
        if rng.next_u64() & 1 == 0 {
            push("ego", alter, rng);
        } else {
            push(alter, "ego", rng);
        }
    }
    for from in &alters {
        for to in &alters {
            if from == to {
                continue;
            }
            if rng.next_f64() < edge_prob {
                push(from, to, rng);
                if rng.next_f64() < 0.1 {
                    push(from, to, rng);
                }
            }
        }
    }
    if rng.next_f64() < 0.05 {
        push("ego", "ego", rng);
    }
    records
}

/// Random mixed trace for window tests: mostly ego-adjacent transfers with
/// peer-to-peer noise and the odd self-transfer, timestamps drawn from a
/// narrow range so window boundaries collide with record times.
pub fn random_phase_trace(rng: &mut SplitMix64, len: usize) -> Vec<TransactionRecord> {
    let mut records = Vec::with_capacity(len.max(1));
    for i in 0..len.max(1) {
        let roll = if i == 0 { 0 } else { rng.next_below(100) };
        let peer = format!("p{}", rng.next_below(12));
        let (sender, receiver) = if roll < 40 {
            (peer, "ego".to_owned())
        } else if roll < 80 {
            ("ego".to_owned(), peer)
        } else if roll < 95 {
            (peer, format!("p{}", rng.next_below(12)))
        } else {
            ("ego".to_owned(), "ego".to_owned())
        };
        records.push(TransactionRecord {
            sender,
            receiver,
            amount: random_amount(rng),
            timestamp: rng.next_below(10_000),
        });
    }
    records
}

/// Brute-force local clustering coefficient, straight from the definition:
/// collect the ego's neighbors, then test every ordered pair of distinct
/// alters for at least one connecting record.
pub fn clustering_by_pair_enumeration(ego: &str, records: &[TransactionRecord]) -> f64 {
    let mut alters: Vec<&str> = Vec::new();
    for rec in records {
        let from_ego = rec.sender == ego;
        let to_ego = rec.receiver == ego;
        if from_ego != to_ego {
            let peer = if from_ego { &rec.receiver } else { &rec.sender };
            if !alters.contains(&peer.as_str()) {
                alters.push(peer);
            }
        }
    }
    let k = alters.len();
    if k <= 1 {
        return 0.0;
    }
    let alter_set: HashSet<&str> = alters.iter().copied().collect();
    let edges: HashSet<(&str, &str)> = records
        .iter()
        .filter(|r| {
            r.sender != r.receiver
                && alter_set.contains(r.sender.as_str())
                && alter_set.contains(r.receiver.as_str())
        })
        .map(|r| (r.sender.as_str(), r.receiver.as_str()))
        .collect();
    let mut linked = 0u64;
    for from in &alters {
        for to in &alters {
            if from != to && edges.contains(&(*from, *to)) {
                linked += 1;
            }
        }
    }
    linked as f64 / (k * (k - 1)) as f64
}

/// Per-window tallies from a full rescan of the raw records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanTally {
    pub in_count: u64,
    pub out_count: u64,
    pub in_amount: Amount,
    pub out_amount: Amount,
}

/// Phase features by rescanning every record once per window, with the
/// window containment test written out inline.
pub fn phase_counts_by_scan(
    ego: &str,
    records: &[TransactionRecord],
    windows: &[PhaseWindow; PHASES],
) -> [ScanTally; PHASES] {
    std::array::from_fn(|i| {
        let w = &windows[i];
        let mut tally = ScanTally::default();
        for rec in records {
            let from_ego = rec.sender == ego;
            let to_ego = rec.receiver == ego;
            if from_ego == to_ego {
                continue;
            }
            let t = rec.timestamp;
            let inside = t >= w.start() && (t < w.end() || (w.is_end_inclusive() && t == w.end()));
            if !inside {
                continue;
            }
            if to_ego {
                tally.in_count += 1;
                tally.in_amount = tally.in_amount.checked_add(rec.amount).expect("tally overflow");
            } else {
                tally.out_count += 1;
                tally.out_amount = tally.out_amount.checked_add(rec.amount).expect("tally overflow");
            }
        }
        tally
    })
}

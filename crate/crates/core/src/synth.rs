//! Seeded synthetic transaction traces with known ground truth.
//!
//! A trace is drawn in two phases. Ego-adjacent transfers come first; the
//! set of alters they realize is then wired up with independent Bernoulli
//! draws per ordered pair. Because the pair draws run over realized alters
//! only, the tally's clustering and per-phase numbers are exact ground
//! truth for the emitted records, not approximations of the parameters.
//!
//! All randomness is counter-based: each value is a hash of (seed, stream,
//! counters), so generation order never matters and any record can be
//! reproduced in isolation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::temporal::{phase_windows, LifeCycle, WindowMode, PHASES};
use crate::tx::{AccountLabel, TransactionRecord, TransactionSet};

const SECONDS_PER_DAY: f64 = 86_400.0;

mod stream {
    pub const DIRECTION: u64 = 1;
    pub const PEER: u64 = 2;
    pub const TIME: u64 = 3;
    pub const AMOUNT: u64 = 4;
    pub const PAIR: u64 = 5;
    pub const PAIR_TIME: u64 = 6;
    pub const PAIR_AMOUNT: u64 = 7;
    pub const EGO_SEED: u64 = 8;
}

fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Keyed hash over (seed, stream, a, b), splitmix64 finalizer per word.
fn keyed(seed: u64, stream: u64, a: u64, b: u64) -> u64 {
    let mut h = seed;
    for word in [stream, a, b] {
        h = mix(h.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(word));
    }
    h
}

fn keyed_f64(seed: u64, stream: u64, a: u64, b: u64) -> f64 {
    (keyed(seed, stream, a, b) >> 11) as f64 / (1u64 << 53) as f64
}

/// How transfer times are spread over the life span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemporalProfile {
    /// Both directions uniform over the span.
    Uniform,
    /// In-transfers skew early, out-transfers skew late.
    FrontLoadedIn,
    /// Out-transfers on an even grid over the span, in-transfers uniform.
    SteadyOut,
}

impl TemporalProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            TemporalProfile::Uniform => "uniform",
            TemporalProfile::FrontLoadedIn => "front-loaded-in",
            TemporalProfile::SteadyOut => "steady-out",
        }
    }
}

impl fmt::Display for TemporalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemporalProfile {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, SynthError> {
        match s {
            "uniform" => Ok(TemporalProfile::Uniform),
            "front-loaded-in" => Ok(TemporalProfile::FrontLoadedIn),
            "steady-out" => Ok(TemporalProfile::SteadyOut),
            other => Err(SynthError::InvalidParam {
                name: "temporal_profile".to_owned(),
                reason: format!(
                    "unknown profile `{other}` (expected uniform, front-loaded-in, or steady-out)"
                ),
            }),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("no generator preset for label `{0}`")]
    NoPreset(AccountLabel),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
}

/// Parameters of one synthetic ego.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchetypeParams {
    pub label: AccountLabel,
    pub n_alters: u32,
    pub n_transactions: u32,
    /// Probability that a given ego transfer is incoming.
    pub in_fraction: f64,
    /// Probability that an ordered alter pair is linked.
    pub alter_link_prob: f64,
    pub lifespan_days: f64,
    /// Typical transfer size; realized amounts spread over [0.001, 2]× this.
    pub amount_scale: Amount,
    pub temporal_profile: TemporalProfile,
    /// Timestamp of the life cycle start.
    pub start_time: u64,
    pub seed: u64,
}

impl ArchetypeParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |name: &str, reason: String| SynthError::InvalidParam {
            name: name.to_owned(),
            reason,
        };
        if self.n_alters == 0 {
            return Err(invalid("n_alters", "must be at least 1".to_owned()));
        }
        if self.n_transactions == 0 {
            return Err(invalid("n_transactions", "must be at least 1".to_owned()));
        }
        for (name, value) in [
            ("in_fraction", self.in_fraction),
            ("alter_link_prob", self.alter_link_prob),
        ] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(invalid(name, format!("{value} is not in [0, 1]")));
            }
        }
        if !self.lifespan_days.is_finite() || self.lifespan_days < 0.0 {
            return Err(invalid(
                "lifespan_days",
                format!("{} is not a non-negative day count", self.lifespan_days),
            ));
        }
        if self.amount_scale.is_zero() {
            return Err(invalid("amount_scale", "must be positive".to_owned()));
        }
        let span = (self.lifespan_days * SECONDS_PER_DAY).round();
        if span > u64::MAX as f64 || self.start_time.checked_add(span as u64).is_none() {
            return Err(invalid(
                "lifespan_days",
                "life span overflows the timestamp range".to_owned(),
            ));
        }
        Ok(())
    }

    fn span_seconds(&self) -> u64 {
        (self.lifespan_days * SECONDS_PER_DAY).round() as u64
    }
}

/// Built-in per-label parameter sets. Seeds start at 0; callers set their own.
pub fn preset(label: AccountLabel) -> Result<ArchetypeParams, SynthError> {
    let (n_alters, n_transactions, in_fraction, alter_link_prob, lifespan_days, scale, profile) =
        match label {
            AccountLabel::Ico => (30, 400, 0.6124, 0.180, 420.0, "50", TemporalProfile::FrontLoadedIn),
            AccountLabel::Mining => (20, 800, 0.0016, 0.135, 646.0, "1.5", TemporalProfile::SteadyOut),
            AccountLabel::Gambling => (25, 600, 0.6127, 0.024, 293.0, "0.4", TemporalProfile::Uniform),
            AccountLabel::Exchange => (30, 800, 0.2667, 0.132, 603.0, "12", TemporalProfile::Uniform),
            AccountLabel::Ponzi => (20, 300, 0.3058, 0.038, 20.0, "2", TemporalProfile::Uniform),
            AccountLabel::Phish => (18, 150, 0.6115, 0.123, 16.0, "25", TemporalProfile::FrontLoadedIn),
            AccountLabel::Unknown => return Err(SynthError::NoPreset(label)),
        };
    Ok(ArchetypeParams {
        label,
        n_alters,
        n_transactions,
        in_fraction,
        alter_link_prob,
        lifespan_days,
        amount_scale: scale.parse().expect("preset amounts parse"),
        temporal_profile: profile,
        start_time: 1_500_000_000,
        seed: 0,
    })
}

/// Realized ground truth of one generated trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraceTally {
    pub in_count: u64,
    pub out_count: u64,
    /// Alters actually touched (may fall short of `n_alters` for tiny traces).
    pub alter_count: u64,
    /// Linked ordered alter pairs; over `k(k-1)` this is the exact τ.
    pub alter_edge_count: u64,
    pub sliding_in: [u64; PHASES],
    pub sliding_out: [u64; PHASES],
    pub incremental_in: [u64; PHASES],
    pub incremental_out: [u64; PHASES],
}

impl TraceTally {
    /// Exact clustering coefficient of the generated network.
    pub fn clustering(&self) -> f64 {
        if self.alter_count <= 1 {
            0.0
        } else {
            self.alter_edge_count as f64 / (self.alter_count * (self.alter_count - 1)) as f64
        }
    }

    /// Accumulate another tally, for pooling over a cohort.
    pub fn merge(&mut self, other: &TraceTally) {
        self.in_count += other.in_count;
        self.out_count += other.out_count;
        self.alter_count += other.alter_count;
        self.alter_edge_count += other.alter_edge_count;
        for i in 0..PHASES {
            self.sliding_in[i] += other.sliding_in[i];
            self.sliding_out[i] += other.sliding_out[i];
            self.incremental_in[i] += other.incremental_in[i];
            self.incremental_out[i] += other.incremental_out[i];
        }
    }
}

/// One generated ego: its records plus the realized ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedTrace {
    pub ego: String,
    pub label: AccountLabel,
    pub records: Vec<TransactionRecord>,
    pub tally: TraceTally,
}

impl GeneratedTrace {
    pub fn to_set(&self) -> TransactionSet {
        TransactionSet::from_records(self.records.clone())
    }
}

fn profile_offset(profile: TemporalProfile, incoming: bool, span: u64, index: u64, total: u64, raw: u64) -> u64 {
    if span == 0 {
        return 0;
    }
    let x = raw % (span + 1);
    match profile {
        TemporalProfile::Uniform => x,
        TemporalProfile::FrontLoadedIn => {
            let early = ((u128::from(x) * u128::from(x)) / u128::from(span)) as u64;
            if incoming {
                early
            } else {
                span - early
            }
        }
        TemporalProfile::SteadyOut => {
            if incoming {
                x
            } else if total <= 1 {
                0
            } else {
                ((u128::from(span) * u128::from(index)) / u128::from(total - 1)) as u64
            }
        }
    }
}

fn amount_from(scale: Amount, raw: u64) -> Amount {
    let step = u128::from(raw % 2000) + 1;
    let wei = (scale.wei() * step) / 1000;
    Amount::from_wei(wei.max(1))
}

/// Generate one ego trace. Same parameters, same records, always.
pub fn generate_trace(params: &ArchetypeParams) -> Result<GeneratedTrace, SynthError> {
    params.validate()?;
    let seed = params.seed;
    let span = params.span_seconds();
    let n = u64::from(params.n_transactions);
    let ego = format!("{}-{seed:016x}", params.label.as_str().to_lowercase());
    let alter_name = |idx: u64| format!("{ego}-a{idx:03}");

    let mut records = Vec::with_capacity(params.n_transactions as usize);
    let mut tally = TraceTally::default();
    let mut realized: Vec<u64> = Vec::new();
    let mut seen = vec![false; params.n_alters as usize];
    for i in 0..n {
        let incoming = keyed_f64(seed, stream::DIRECTION, i, 0) < params.in_fraction;
        let alter_idx = keyed(seed, stream::PEER, i, 0) % u64::from(params.n_alters);
        if !seen[alter_idx as usize] {
            seen[alter_idx as usize] = true;
            realized.push(alter_idx);
        }
        let raw_time = keyed(seed, stream::TIME, i, 0);
        let offset = profile_offset(params.temporal_profile, incoming, span, i, n, raw_time);
        let amount = amount_from(params.amount_scale, keyed(seed, stream::AMOUNT, i, 0));
        let peer = alter_name(alter_idx);
        let (sender, receiver) = if incoming {
            tally.in_count += 1;
            (peer, ego.clone())
        } else {
            tally.out_count += 1;
            (ego.clone(), peer)
        };
        records.push(TransactionRecord {
            sender,
            receiver,
            amount,
            timestamp: params.start_time + offset,
        });
    }

    realized.sort_unstable();
    tally.alter_count = realized.len() as u64;
    for &from in &realized {
        for &to in &realized {
            if from == to {
                continue;
            }
            if keyed_f64(seed, stream::PAIR, from, to) < params.alter_link_prob {
                tally.alter_edge_count += 1;
                let raw_time = keyed(seed, stream::PAIR_TIME, from, to);
                let offset = if span == 0 { 0 } else { raw_time % (span + 1) };
                records.push(TransactionRecord {
                    sender: alter_name(from),
                    receiver: alter_name(to),
                    amount: amount_from(params.amount_scale, keyed(seed, stream::PAIR_AMOUNT, from, to)),
                    timestamp: params.start_time + offset,
                });
            }
        }
    }

    let first = records[..params.n_transactions as usize]
        .iter()
        .map(|r| r.timestamp)
        .min()
        .expect("at least one ego transfer");
    let last = records[..params.n_transactions as usize]
        .iter()
        .map(|r| r.timestamp)
        .max()
        .expect("at least one ego transfer");
    let life = LifeCycle::new(first, last);
    for (mode, in_slot, out_slot) in [
        (WindowMode::Sliding, &mut tally.sliding_in, &mut tally.sliding_out),
        (WindowMode::Incremental, &mut tally.incremental_in, &mut tally.incremental_out),
    ] {
        let windows = phase_windows(&life, mode);
        for rec in &records[..params.n_transactions as usize] {
            for (w, window) in windows.iter().enumerate() {
                if window.contains(rec.timestamp) {
                    if rec.receiver == ego {
                        in_slot[w] += 1;
                    } else {
                        out_slot[w] += 1;
                    }
                }
            }
        }
    }

    Ok(GeneratedTrace {
        ego,
        label: params.label,
        records,
        tally,
    })
}

/// Ground-truth file contents for one generated cohort.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortTally {
    pub label: AccountLabel,
    pub seed: u64,
    pub egos: Vec<EgoTally>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EgoTally {
    pub ego: String,
    pub tally: TraceTally,
}

impl CohortTally {
    pub fn from_traces(label: AccountLabel, seed: u64, traces: &[GeneratedTrace]) -> CohortTally {
        CohortTally {
            label,
            seed,
            egos: traces
                .iter()
                .map(|t| EgoTally {
                    ego: t.ego.clone(),
                    tally: t.tally,
                })
                .collect(),
        }
    }

    /// Sum of all per-ego tallies.
    pub fn pooled(&self) -> TraceTally {
        let mut pooled = TraceTally::default();
        for ego in &self.egos {
            pooled.merge(&ego.tally);
        }
        pooled
    }
}

/// Parameters for the `index`-th ego of a cohort: a derived seed and a
/// start time staggered by one day per ego.
pub fn cohort_params(base: &ArchetypeParams, index: u32) -> ArchetypeParams {
    ArchetypeParams {
        seed: keyed(base.seed, stream::EGO_SEED, u64::from(index), 0),
        start_time: base.start_time + u64::from(index) * 86_400,
        ..base.clone()
    }
}

/// Generate `n_egos` independent traces from one base parameter set.
pub fn generate_cohort(base: &ArchetypeParams, n_egos: u32) -> Result<Vec<GeneratedTrace>, SynthError> {
    base.validate()?;
    (0..n_egos)
        .map(|i| generate_trace(&cohort_params(base, i)))
        .collect()
}

//! Shared fixtures for the pipeline benchmarks.

use txego::reference::SplitMix64;
use txego::synth::{self, GeneratedTrace};
use txego::tx::{AccountLabel, TransactionRecord};

/// A mixed 6-label cohort, `egos_per_label` egos each.
pub fn mixed_cohort(egos_per_label: u32) -> Vec<GeneratedTrace> {
    let mut traces = Vec::new();
    for label in AccountLabel::KNOWN {
        let mut params = synth::preset(label).expect("known label has a preset");
        params.seed = 0xBE7C;
        traces.extend(synth::generate_cohort(&params, egos_per_label).expect("presets are valid"));
    }
    traces
}

/// All records of a mixed cohort, flattened.
pub fn mixed_records(egos_per_label: u32) -> Vec<TransactionRecord> {
    mixed_cohort(egos_per_label)
        .into_iter()
        .flat_map(|t| t.records)
        .collect()
}

/// One dense ego trace for the single-network benchmarks.
pub fn dense_ego_trace(alters: usize) -> Vec<TransactionRecord> {
    txego::reference::random_ego_trace(&mut SplitMix64::new(0xE90), alters, 0.3)
}

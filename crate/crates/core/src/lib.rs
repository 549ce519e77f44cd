//! Transaction ego network analytics.
//!
//! The library reconstructs per-account ego networks from a timestamped
//! transfer log and derives the temporal features used to characterize
//! account behavior: the local clustering coefficient among an account's
//! neighbors, its life cycle, and in/out activity split over five sliding
//! or incremental time windows. Results aggregate per account label, and a
//! seeded generator produces synthetic cohorts with exact ground truth.
//!
//! Start with [`tx::ingest_transactions`] to load records, then
//! [`egonet::build_ego_network`] and the [`temporal`] functions for one
//! account, or [`aggregate::analyze_cohort`] for a whole labeled set.

pub mod aggregate;
pub mod amount;
pub mod egonet;
pub mod reference;
pub mod synth;
pub mod temporal;
pub mod tx;

pub use aggregate::{analyze_cohort, emit_reports, CohortError, LabelSummary, ReportError};
pub use amount::{Amount, AmountError};
pub use egonet::{build_ego_network, local_clustering_coefficient, EgoNetwork};
pub use synth::{generate_cohort, generate_trace, preset, ArchetypeParams, GeneratedTrace};
pub use temporal::{
    life_cycle, phase_features, phase_windows, LifeCycle, PhaseFeatures, PhaseWindow, WindowMode,
    PHASES,
};
pub use tx::{
    ingest_labels, ingest_transactions, AccountId, AccountLabel, IngestError, TransactionRecord,
    TransactionSet,
};

//! Cohort analysis over a labeled account set, and report files.
//!
//! Per-ego work (network construction, clustering, windowed features) fans
//! out across a rayon pool; grouping and emission run single-threaded in a
//! fixed order, so reports are byte-identical regardless of worker count.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::egonet::{build_ego_network, label_clustering_table, local_clustering_coefficient};
use crate::temporal::{
    label_lifecycle_stats, label_phase_table, life_cycle, phase_features, phase_windows,
    LifecycleStats, PhaseAggregate, PhaseFeatures, WindowMode, PHASES,
};
use crate::tx::{AccountLabel, TransactionSet};

/// Aggregated results for one label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelSummary {
    pub label: AccountLabel,
    pub n_egos: u64,
    pub avg_tau: f64,
    pub lifecycle: LifecycleStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sliding: Option<[PhaseAggregate; PHASES]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incremental: Option<[PhaseAggregate; PHASES]>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CohortError {
    #[error("no labeled account appears in the transaction set")]
    EmptyCohort,
}

/// Analyze every labeled account that has activity; labels without any
/// transactions are skipped with a warning.
pub fn analyze_cohort(
    txs: &TransactionSet,
    labels: &BTreeMap<String, AccountLabel>,
    modes: &[WindowMode],
) -> Result<Vec<LabelSummary>, CohortError> {
    let mut active: Vec<(&str, AccountLabel)> = Vec::new();
    for (address, &label) in labels {
        if txs.account_id(address).is_some() {
            active.push((address, label));
        } else {
            log::warn!("skipping {label} account `{address}`: no transactions");
        }
    }
    if active.is_empty() {
        return Err(CohortError::EmptyCohort);
    }

    struct EgoStats {
        label: AccountLabel,
        tau: f64,
        life: crate::temporal::LifeCycle,
        features: Vec<[PhaseFeatures; PHASES]>,
    }

    let per_ego: Vec<EgoStats> = active
        .par_iter()
        .map(|&(address, label)| {
            let net = build_ego_network(address, txs);
            let life = life_cycle(address, txs).expect("active account has records");
            let features = modes
                .iter()
                .map(|&mode| phase_features(&net, &phase_windows(&life, mode)))
                .collect();
            EgoStats {
                label,
                tau: local_clustering_coefficient(&net),
                life,
                features,
            }
        })
        .collect();

    let tau_table = label_clustering_table(per_ego.iter().map(|e| (e.label, e.tau)));
    let life_table = label_lifecycle_stats(per_ego.iter().map(|e| (e.label, e.life)));
    let mode_tables: Vec<BTreeMap<AccountLabel, [PhaseAggregate; PHASES]>> = (0..modes.len())
        .map(|m| label_phase_table(per_ego.iter().map(|e| (e.label, e.features[m]))))
        .collect();
    let mut egos_per_label: BTreeMap<AccountLabel, u64> = BTreeMap::new();
    for ego in &per_ego {
        *egos_per_label.entry(ego.label).or_default() += 1;
    }

    let table_for = |mode: WindowMode, label: AccountLabel| {
        modes
            .iter()
            .position(|&m| m == mode)
            .map(|m| mode_tables[m][&label])
    };
    Ok(tau_table
        .iter()
        .map(|(&label, &avg_tau)| LabelSummary {
            label,
            n_egos: egos_per_label[&label],
            avg_tau,
            lifecycle: life_table[&label],
            sliding: table_for(WindowMode::Sliding, label),
            incremental: table_for(WindowMode::Incremental, label),
        })
        .collect())
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("nothing to write")]
    NothingToWrite,
    #[error("cannot write `{path}`")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot encode summary")]
    Json(#[from] serde_json::Error),
}

fn ratio_cell(value: Option<f64>) -> String {
    match value {
        Some(r) => format!("{r:.6}"),
        None => "n/a".to_owned(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|source| ReportError::Io {
            path: path.to_owned(),
            source,
        })
}

/// Write the per-label report files into `out_dir` and return their paths:
/// clustering and lifecycle tables, a counts and an amounts table per
/// windowing mode present, and a JSON mirror of everything.
pub fn emit_reports(summaries: &[LabelSummary], out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if summaries.is_empty() {
        return Err(ReportError::NothingToWrite);
    }
    fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: String| -> Result<(), ReportError> {
        let path = out_dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };

    let mut clustering = String::from("label,avg_tau\n");
    for s in summaries {
        clustering.push_str(&format!("{},{:.6}\n", s.label, s.avg_tau));
    }
    emit("clustering.csv", clustering)?;

    let mut lifecycle = String::from("label,median_days,mean_days,max_days\n");
    for s in summaries {
        lifecycle.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            s.label, s.lifecycle.median_days, s.lifecycle.mean_days, s.lifecycle.max_days
        ));
    }
    emit("lifecycle.csv", lifecycle)?;

    for mode in WindowMode::ALL {
        let tables: Vec<(AccountLabel, &[PhaseAggregate; PHASES])> = summaries
            .iter()
            .filter_map(|s| {
                let table = match mode {
                    WindowMode::Sliding => s.sliding.as_ref(),
                    WindowMode::Incremental => s.incremental.as_ref(),
                };
                table.map(|t| (s.label, t))
            })
            .collect();
        if tables.is_empty() {
            continue;
        }
        let mut counts = String::from(
            "label,phase,in_count,out_count,in_ratio,out_ratio,in_ratio_mean_of_ratios\n",
        );
        let mut amounts = String::from("label,phase,in_amount,out_amount\n");
        for (label, table) in &tables {
            for agg in table.iter() {
                counts.push_str(&format!(
                    "{},{},{:.6},{:.6},{},{},{}\n",
                    label,
                    agg.phase,
                    agg.mean_in_count,
                    agg.mean_out_count,
                    ratio_cell(agg.pooled_in_ratio),
                    ratio_cell(agg.pooled_out_ratio),
                    ratio_cell(agg.mean_in_ratio),
                ));
                amounts.push_str(&format!(
                    "{},{},{},{}\n",
                    label, agg.phase, agg.mean_in_amount, agg.mean_out_amount
                ));
            }
        }
        emit(&format!("phase_counts_{mode}.csv"), counts)?;
        emit(&format!("phase_amounts_{mode}.csv"), amounts)?;
    }

    #[derive(Serialize)]
    struct SummaryFile<'a> {
        labels: &'a [LabelSummary],
    }
    let mut json = serde_json::to_string_pretty(&SummaryFile { labels: summaries })?;
    json.push('\n');
    emit("summary.json", json)?;

    Ok(written)
}

//! Ego-network construction and the local clustering coefficient.
//!
//! The network of an account holds the account itself, every first-order
//! counterparty, and all transfers among that node set. Self-transfers are
//! excluded from the network everywhere.

use std::collections::{BTreeMap, BTreeSet};

use crate::amount::Amount;
use crate::tx::{AccountId, AccountLabel, TransactionSet};

/// Direction of an ego-adjacent transfer, seen from the central account.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The ego receives: peer → ego.
    In,
    /// The ego sends: ego → peer.
    Out,
}

/// A transfer between the ego and one of its alters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EgoEdge {
    pub peer: AccountId,
    pub direction: Direction,
    pub amount: Amount,
    pub timestamp: u64,
}

/// A transfer between two distinct alters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlterEdge {
    pub from: AccountId,
    pub to: AccountId,
    pub amount: Amount,
    pub timestamp: u64,
}

/// The first-order transaction neighborhood of one account.
#[derive(Debug, Clone)]
pub struct EgoNetwork {
    ego_address: Box<str>,
    ego: Option<AccountId>,
    alters: Vec<AccountId>,
    ego_edges: Vec<EgoEdge>,
    alter_edges: Vec<AlterEdge>,
    distinct_alter_pairs: Vec<(AccountId, AccountId)>,
}

impl EgoNetwork {
    pub fn ego_address(&self) -> &str {
        &self.ego_address
    }

    /// Interned id of the ego; `None` when the address never appears.
    pub fn ego_id(&self) -> Option<AccountId> {
        self.ego
    }

    /// Alters in ascending id order.
    pub fn alters(&self) -> &[AccountId] {
        &self.alters
    }

    pub fn alter_count(&self) -> usize {
        self.alters.len()
    }

    pub fn is_alter(&self, id: AccountId) -> bool {
        self.alters.binary_search(&id).is_ok()
    }

    /// Ego-adjacent transfers in timestamp order.
    pub fn ego_edges(&self) -> &[EgoEdge] {
        &self.ego_edges
    }

    /// Alter-alter transfers in timestamp order.
    pub fn alter_edges(&self) -> &[AlterEdge] {
        &self.alter_edges
    }

    /// Ordered alter pairs connected by at least one transfer, ascending.
    pub fn distinct_alter_pairs(&self) -> &[(AccountId, AccountId)] {
        &self.distinct_alter_pairs
    }

    /// Size of the full edge multiset.
    pub fn edge_count(&self) -> usize {
        self.ego_edges.len() + self.alter_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alters.is_empty()
    }
}

/// Build the ego network of `ego` over a transaction set.
///
/// Alters are every address appearing opposite the ego in at least one
/// record. Edges are every record with the ego on one side and an alter on
/// the other, plus every record between two distinct alters. An unknown or
/// inactive address yields an empty network.
pub fn build_ego_network(ego: &str, txs: &TransactionSet) -> EgoNetwork {
    let ego_id = match txs.account_id(ego) {
        Some(id) => id,
        None => {
            return EgoNetwork {
                ego_address: ego.into(),
                ego: None,
                alters: Vec::new(),
                ego_edges: Vec::new(),
                alter_edges: Vec::new(),
                distinct_alter_pairs: Vec::new(),
            }
        }
    };

    let records = txs.records();
    let mut alter_set = BTreeSet::new();
    let mut ego_edges = Vec::new();
    for &pos in txs.positions(ego_id) {
        let rec = &records[pos as usize];
        if rec.from == rec.to {
            continue; // self-transfer
        }
        let (peer, direction) = if rec.to == ego_id {
            (rec.from, Direction::In)
        } else {
            (rec.to, Direction::Out)
        };
        alter_set.insert(peer);
        ego_edges.push(EgoEdge {
            peer,
            direction,
            amount: rec.amount,
            timestamp: rec.timestamp,
        });
    }

    let alters: Vec<AccountId> = alter_set.iter().copied().collect();
    let mut alter_edges = Vec::new();
    let mut pairs = BTreeSet::new();
    for &alter in &alters {
        for &pos in txs.positions(alter) {
            let rec = &records[pos as usize];
            // visit each alter-alter record from its sender only
            if rec.from != alter || rec.to == rec.from {
                continue;
            }
            if rec.to == ego_id || !alter_set.contains(&rec.to) {
                continue;
            }
            alter_edges.push(AlterEdge {
                from: rec.from,
                to: rec.to,
                amount: rec.amount,
                timestamp: rec.timestamp,
            });
            pairs.insert((rec.from, rec.to));
        }
    }
    alter_edges.sort_by_key(|e| e.timestamp);

    EgoNetwork {
        ego_address: ego.into(),
        ego: Some(ego_id),
        alters,
        ego_edges,
        alter_edges,
        distinct_alter_pairs: pairs.into_iter().collect(),
    }
}

/// Fraction of ordered alter pairs connected by at least one transfer.
///
/// Multi-edges collapse to one per ordered pair, so the value stays within
/// [0, 1]. Networks with fewer than two alters score 0.
pub fn local_clustering_coefficient(net: &EgoNetwork) -> f64 {
    let k = net.alter_count();
    if k <= 1 {
        return 0.0;
    }
    net.distinct_alter_pairs().len() as f64 / (k as f64 * (k as f64 - 1.0))
}

/// Unweighted per-label mean of per-ego clustering coefficients.
///
/// Labels without a contributing ego are absent from the output.
pub fn label_clustering_table<I>(taus: I) -> BTreeMap<AccountLabel, f64>
where
    I: IntoIterator<Item = (AccountLabel, f64)>,
{
    let mut sums: BTreeMap<AccountLabel, (f64, usize)> = BTreeMap::new();
    for (label, tau) in taus {
        let entry = sums.entry(label).or_insert((0.0, 0));
        entry.0 += tau;
        entry.1 += 1;
    }
    sums.into_iter()
        .map(|(label, (sum, n))| (label, sum / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::tx::{ingest_transactions, TransactionRecord, TransactionSet};

    fn set_from(rows: &[(&str, &str, u64)]) -> TransactionSet {
        let records = rows
            .iter()
            .map(|&(from, to, t)| TransactionRecord {
                sender: from.to_owned(),
                receiver: to.to_owned(),
                amount: Amount::from_ether(1).unwrap(),
                timestamp: t,
            })
            .collect();
        TransactionSet::from_records(records)
    }

    fn names(net: &EgoNetwork, txs: &TransactionSet) -> Vec<String> {
        net.alters()
            .iter()
            .map(|&id| txs.address(id).to_owned())
            .collect()
    }

    #[test]
    fn single_outgoing_edge() {
        let txs = set_from(&[("a", "b", 100)]);
        let net = build_ego_network("a", &txs);
        assert_eq!(names(&net, &txs), vec!["b"]);
        assert_eq!(net.ego_edges().len(), 1);
        assert_eq!(net.ego_edges()[0].direction, Direction::Out);
        assert!(net.alter_edges().is_empty());
    }

    #[test]
    fn alter_alter_edge_collected() {
        let txs = set_from(&[("a", "b", 1), ("a", "c", 2), ("b", "c", 3)]);
        let net = build_ego_network("a", &txs);
        assert_eq!(names(&net, &txs), vec!["b", "c"]);
        assert_eq!(net.alter_edges().len(), 1);
        assert_eq!(net.distinct_alter_pairs().len(), 1);
        let (u, v) = net.distinct_alter_pairs()[0];
        assert_eq!(txs.address(u), "b");
        assert_eq!(txs.address(v), "c");
    }

    #[test]
    fn outside_edges_excluded() {
        let txs = set_from(&[("a", "b", 1), ("c", "d", 2)]);
        let net = build_ego_network("a", &txs);
        assert_eq!(names(&net, &txs), vec!["b"]);
        assert_eq!(net.edge_count(), 1);
    }

    #[test]
    fn self_transfers_excluded_everywhere() {
        let txs = set_from(&[("a", "a", 1), ("a", "b", 2), ("b", "b", 3)]);
        let net = build_ego_network("a", &txs);
        assert_eq!(names(&net, &txs), vec!["b"]);
        assert_eq!(net.ego_edges().len(), 1);
        assert!(net.alter_edges().is_empty());
    }

    #[test]
    fn unknown_address_yields_empty_network() {
        let txs = set_from(&[("a", "b", 1)]);
        let net = build_ego_network("zzz", &txs);
        assert!(net.is_empty());
        assert_eq!(net.ego_id(), None);
        assert_eq!(local_clustering_coefficient(&net), 0.0);
    }

    #[test]
    fn star_has_zero_clustering() {
        let txs = set_from(&[("a", "b", 1), ("a", "c", 2), ("d", "a", 3)]);
        let net = build_ego_network("a", &txs);
        assert_eq!(net.alter_count(), 3);
        assert_eq!(local_clustering_coefficient(&net), 0.0);
    }

    #[test]
    fn mutual_pair_is_fully_clustered() {
        let txs = set_from(&[("a", "b", 1), ("a", "c", 2), ("b", "c", 3), ("c", "b", 4)]);
        let net = build_ego_network("a", &txs);
        assert_eq!(local_clustering_coefficient(&net), 1.0);
    }

    #[test]
    fn single_alter_scores_zero() {
        let txs = set_from(&[("a", "b", 1), ("b", "a", 2)]);
        let net = build_ego_network("a", &txs);
        assert_eq!(net.alter_count(), 1);
        assert_eq!(local_clustering_coefficient(&net), 0.0);
    }

    #[test]
    fn multi_edges_do_not_change_tau() {
        let base = set_from(&[("a", "b", 1), ("a", "c", 2), ("b", "c", 3)]);
        let doubled = set_from(&[
            ("a", "b", 1),
            ("a", "c", 2),
            ("b", "c", 3),
            ("b", "c", 30),
            ("a", "b", 10),
        ]);
        let tau_base = local_clustering_coefficient(&build_ego_network("a", &base));
        let tau_doubled = local_clustering_coefficient(&build_ego_network("a", &doubled));
        assert_eq!(tau_base, tau_doubled);
    }

    #[test]
    fn new_alter_pair_strictly_increases_tau() {
        let before = set_from(&[("a", "b", 1), ("a", "c", 2), ("a", "d", 3), ("b", "c", 4)]);
        let after = set_from(&[
            ("a", "b", 1),
            ("a", "c", 2),
            ("a", "d", 3),
            ("b", "c", 4),
            ("c", "d", 5),
        ]);
        let tau_before = local_clustering_coefficient(&build_ego_network("a", &before));
        let tau_after = local_clustering_coefficient(&build_ego_network("a", &after));
        assert!(tau_after > tau_before);
    }

    #[test]
    fn tau_invariant_under_scaling_and_shifting() {
        let records = vec![
            TransactionRecord {
                sender: "a".into(),
                receiver: "b".into(),
                amount: "1.25".parse().unwrap(),
                timestamp: 10,
            },
            TransactionRecord {
                sender: "c".into(),
                receiver: "a".into(),
                amount: "0.5".parse().unwrap(),
                timestamp: 20,
            },
            TransactionRecord {
                sender: "b".into(),
                receiver: "c".into(),
                amount: "3".parse().unwrap(),
                timestamp: 30,
            },
        ];
        let transformed: Vec<TransactionRecord> = records
            .iter()
            .map(|r| TransactionRecord {
                sender: r.sender.clone(),
                receiver: r.receiver.clone(),
                amount: r.amount.checked_mul(7).unwrap(),
                timestamp: r.timestamp + 1_000_000,
            })
            .collect();
        let tau_a = local_clustering_coefficient(&build_ego_network(
            "a",
            &TransactionSet::from_records(records),
        ));
        let tau_b = local_clustering_coefficient(&build_ego_network(
            "a",
            &TransactionSet::from_records(transformed),
        ));
        assert_eq!(tau_a, tau_b);
    }

    // Random directed graph on 10 nodes with the ego at node 0; expected
    // value frozen from the pair-enumeration baseline.
    #[test]
    fn random_graph_matches_frozen_value() {
        let records = reference::random_ego_trace(&mut reference::SplitMix64::new(42), 9, 0.3);
        let expected = reference::clustering_by_pair_enumeration("ego", &records);
        let txs = TransactionSet::from_records(records);
        let tau = local_clustering_coefficient(&build_ego_network("ego", &txs));
        assert!((tau - expected).abs() <= 1e-12);
        assert!((tau - 0.2777777777777778).abs() <= 1e-12, "tau = {tau}");
    }

    #[test]
    fn matches_pair_enumeration_baseline_on_random_graphs() {
        let mut rng = reference::SplitMix64::new(7);
        for _ in 0..300 {
            let k = 1 + (rng.next_u64() % 20) as usize;
            let records = reference::random_ego_trace(&mut rng, k, 0.3);
            let expected = reference::clustering_by_pair_enumeration("ego", &records);
            let txs = TransactionSet::from_records(records);
            let tau = local_clustering_coefficient(&build_ego_network("ego", &txs));
            assert!(
                (tau - expected).abs() <= 1e-12,
                "tau {tau} != baseline {expected} (k = {k})"
            );
            assert!((0.0..=1.0).contains(&tau));
        }
    }

    #[test]
    fn label_table_averages_per_label() {
        let table = label_clustering_table(vec![
            (AccountLabel::Ico, 0.0),
            (AccountLabel::Ico, 1.0),
            (AccountLabel::Phish, 0.25),
        ]);
        assert_eq!(table[&AccountLabel::Ico], 0.5);
        assert_eq!(table[&AccountLabel::Phish], 0.25);
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn ego_edges_are_time_sorted() {
        let txs = ingest_transactions(
            "from,to,value,timestamp\na,b,1,300\nc,a,1,100\na,d,1,200\n".as_bytes(),
        )
        .unwrap();
        let net = build_ego_network("a", &txs);
        let times: Vec<u64> = net.ego_edges().iter().map(|e| e.timestamp).collect();
        assert_eq!(times, vec![100, 200, 300]);
    }
}

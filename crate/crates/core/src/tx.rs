//! Transaction and label ingestion.
//!
//! Input formats are plain CSV: `from,to,value,timestamp` for transfers and
//! `address,label` for account labels. Records are kept sorted by timestamp
//! with input order preserved among ties, and every account is indexed by the
//! positions of the records it appears in.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;

/// One directed value transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionRecord {
    pub sender: String,
    pub receiver: String,
    pub amount: Amount,
    pub timestamp: u64,
}

/// Role category an account is known under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AccountLabel {
    #[serde(rename = "ICO")]
    Ico,
    Mining,
    Gambling,
    Exchange,
    Ponzi,
    Phish,
    Unknown,
}

impl AccountLabel {
    /// The six labels that may appear in a labels file.
    pub const KNOWN: [AccountLabel; 6] = [
        AccountLabel::Ico,
        AccountLabel::Mining,
        AccountLabel::Gambling,
        AccountLabel::Exchange,
        AccountLabel::Ponzi,
        AccountLabel::Phish,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AccountLabel::Ico => "ICO",
            AccountLabel::Mining => "Mining",
            AccountLabel::Gambling => "Gambling",
            AccountLabel::Exchange => "Exchange",
            AccountLabel::Ponzi => "Ponzi",
            AccountLabel::Phish => "Phish",
            AccountLabel::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for AccountLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case-sensitive; accepts only the six known labels.
impl FromStr for AccountLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AccountLabel::KNOWN
            .iter()
            .copied()
            .find(|label| label.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_owned()))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown label `{0}`")]
pub struct UnknownLabel(pub String);

/// Interned account address, valid within one [`TransactionSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId(u32);

impl AccountId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A record with interned endpoints, as stored inside a [`TransactionSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxEdge {
    pub from: AccountId,
    pub to: AccountId,
    pub amount: Amount,
    pub timestamp: u64,
}

/// An immutable, timestamp-sorted transaction log with a per-account index.
#[derive(Debug, Clone, Default)]
pub struct TransactionSet {
    addresses: IndexSet<Box<str>>,
    records: Vec<TxEdge>,
    by_account: HashMap<AccountId, Vec<u32>>,
}

impl TransactionSet {
    /// Build a set from owned records. Sorting is stable, so records with
    /// equal timestamps keep their input order.
    pub fn from_records(input: Vec<TransactionRecord>) -> Self {
        let mut addresses: IndexSet<Box<str>> = IndexSet::new();
        let mut records: Vec<TxEdge> = Vec::with_capacity(input.len());
        for rec in input {
            let from = AccountId(addresses.insert_full(rec.sender.into_boxed_str()).0 as u32);
            let to = AccountId(addresses.insert_full(rec.receiver.into_boxed_str()).0 as u32);
            records.push(TxEdge {
                from,
                to,
                amount: rec.amount,
                timestamp: rec.timestamp,
            });
        }
        records.sort_by_key(|r| r.timestamp);
        let mut by_account: HashMap<AccountId, Vec<u32>> = HashMap::new();
        for (pos, rec) in records.iter().enumerate() {
            by_account.entry(rec.from).or_default().push(pos as u32);
            if rec.to != rec.from {
                by_account.entry(rec.to).or_default().push(pos as u32);
            }
        }
        TransactionSet {
            addresses,
            records,
            by_account,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[TxEdge] {
        &self.records
    }

    pub fn address(&self, id: AccountId) -> &str {
        self.addresses
            .get_index(id.index())
            .expect("account id out of range")
    }

    pub fn account_id(&self, address: &str) -> Option<AccountId> {
        self.addresses
            .get_index_of(address)
            .map(|i| AccountId(i as u32))
    }

    /// Positions (ascending) of records where the account is an endpoint.
    pub fn positions(&self, id: AccountId) -> &[u32] {
        self.by_account.get(&id).map_or(&[], Vec::as_slice)
    }

    pub fn accounts(&self) -> impl Iterator<Item = (AccountId, &str)> {
        self.addresses
            .iter()
            .enumerate()
            .map(|(i, s)| (AccountId(i as u32), s.as_ref()))
    }

    /// Materialize one stored record with owned address strings.
    pub fn to_record(&self, edge: &TxEdge) -> TransactionRecord {
        TransactionRecord {
            sender: self.address(edge.from).to_owned(),
            receiver: self.address(edge.to).to_owned(),
            amount: edge.amount,
            timestamp: edge.timestamp,
        }
    }

    /// Copy of this set with zero-value records removed.
    pub fn without_zero_value(&self) -> TransactionSet {
        let kept = self
            .records
            .iter()
            .filter(|r| !r.amount.is_zero())
            .map(|r| self.to_record(r))
            .collect();
        TransactionSet::from_records(kept)
    }

    /// Serialize back to the transactions CSV format, in stored order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TX_HEADER}")?;
        for rec in &self.records {
            writeln!(
                out,
                "{},{},{},{}",
                self.address(rec.from),
                self.address(rec.to),
                rec.amount,
                rec.timestamp
            )?;
        }
        Ok(())
    }
}

pub const TX_HEADER: &str = "from,to,value,timestamp";
pub const LABELS_HEADER: &str = "address,label";

/// Ingestion failure, with the 1-based input line where applicable.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to read input: {0}")]
    Csv(#[from] csv::Error),
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("line {line}: address `{address}` already labeled `{existing}`, conflicting `{new}`")]
    ConflictingLabel {
        line: u64,
        address: String,
        existing: AccountLabel,
        new: AccountLabel,
    },
}

fn check_header(record: &csv::StringRecord, expected: &'static str) -> Result<(), IngestError> {
    let found = record.iter().collect::<Vec<_>>().join(",");
    if found == expected {
        Ok(())
    } else {
        Err(IngestError::Header { expected, found })
    }
}

fn row_error(line: u64, reason: impl fmt::Display) -> IngestError {
    IngestError::Row {
        line,
        reason: reason.to_string(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, csv::Position::line)
}

/// Parse a transactions CSV stream into a [`TransactionSet`].
pub fn ingest_transactions<R: Read>(source: R) -> Result<TransactionSet, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    check_header(reader.headers()?, TX_HEADER)?;

    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result?;
        let line = record_line(&record);
        if record.len() != 4 {
            return Err(row_error(
                line,
                format!("expected 4 columns, found {}", record.len()),
            ));
        }
        let sender = record[0].to_owned();
        let receiver = record[1].to_owned();
        if sender.is_empty() || receiver.is_empty() {
            return Err(row_error(line, "empty address"));
        }
        let amount: Amount = record[2].parse().map_err(|e| row_error(line, e))?;
        let timestamp: u64 = record[3]
            .parse()
            .map_err(|_| row_error(line, format!("invalid timestamp `{}`", &record[3])))?;
        rows.push(TransactionRecord {
            sender,
            receiver,
            amount,
            timestamp,
        });
    }
    Ok(TransactionSet::from_records(rows))
}

/// Parse a labels CSV stream into an address → label map.
///
/// A duplicate address is accepted only when it repeats the same label.
pub fn ingest_labels<R: Read>(source: R) -> Result<BTreeMap<String, AccountLabel>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    check_header(reader.headers()?, LABELS_HEADER)?;

    let mut labels = BTreeMap::new();
    for result in reader.records() {
        let record = result?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(row_error(
                line,
                format!("expected 2 columns, found {}", record.len()),
            ));
        }
        let address = record[0].to_owned();
        if address.is_empty() {
            return Err(row_error(line, "empty address"));
        }
        let label: AccountLabel = record[1].parse().map_err(|e| row_error(line, e))?;
        if let Some(&existing) = labels.get(&address) {
            if existing != label {
                return Err(IngestError::ConflictingLabel {
                    line,
                    address,
                    existing,
                    new: label,
                });
            }
        } else {
            labels.insert(address, label);
        }
    }
    Ok(labels)
}

/// Serialize a label map back to the labels CSV format.
pub fn write_labels_csv<W: Write>(
    labels: &BTreeMap<String, AccountLabel>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{LABELS_HEADER}")?;
    for (address, label) in labels {
        writeln!(out, "{address},{label}")?;
    }
    Ok(())
}

//! Frequency tables of combined bilateral and unilateral counts.
//!
//! Each group records how many bilateral subjects had 0, 1 or 2 responding
//! organs (`m0`, `m1`, `m2`) and how many unilateral subjects had 0 or 1
//! (`n0`, `n1`). Tables are immutable once validated.
//!
//! Two text formats are accepted:
//!
//! ```text
//! JSON: {"groups":[{"label":"A","bilateral":[m0,m1,m2],"unilateral":[n0,n1]}, ...]}
//! CSV:  label,m0,m1,m2,n0,n1      (one row per group, optional header row)
//! ```
//!
//! A missing `"unilateral"` entry means `[0, 0]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts for one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GroupCounts {
    pub m0: u32,
    pub m1: u32,
    pub m2: u32,
    pub n0: u32,
    pub n1: u32,
}

impl GroupCounts {
    pub const fn new(m0: u32, m1: u32, m2: u32, n0: u32, n1: u32) -> Self {
        Self { m0, m1, m2, n0, n1 }
    }

    /// Builds counts from signed integers, rejecting negatives.
    pub fn from_signed(values: [i64; 5], group: usize) -> Result<Self> {
        let mut out = [0u32; 5];
        for (slot, &v) in out.iter_mut().zip(values.iter()) {
            if v < 0 {
                return Err(Error::NegativeCount { group });
            }
            *slot = u32::try_from(v).map_err(|_| Error::Malformed(format!("count {v} too large in group {group}")))?;
        }
        Ok(Self::new(out[0], out[1], out[2], out[3], out[4]))
    }

    pub fn bilateral(&self) -> [u32; 3] {
        [self.m0, self.m1, self.m2]
    }

    pub fn unilateral(&self) -> [u32; 2] {
        [self.n0, self.n1]
    }

    /// `m0, m1, m2, n0, n1` in cell order.
    pub fn cells(&self) -> [u32; 5] {
        [self.m0, self.m1, self.m2, self.n0, self.n1]
    }

    pub fn m_plus(&self) -> u32 {
        self.m0 + self.m1 + self.m2
    }

    pub fn n_plus(&self) -> u32 {
        self.n0 + self.n1
    }

    pub fn is_degenerate(&self) -> bool {
        self.m_plus() == 0 && self.n_plus() == 0
    }
}

/// Input encodings understood by [`parse_frequency_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Json,
    Csv,
}

impl TableFormat {
    /// Picks a format from a file extension, defaulting to JSON.
    pub fn from_path(path: &str) -> Self {
        if path.to_ascii_lowercase().ends_with(".csv") {
            TableFormat::Csv
        } else {
            TableFormat::Json
        }
    }
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(TableFormat::Json),
            "csv" => Ok(TableFormat::Csv),
            other => Err(Error::Malformed(format!("unknown table format `{other}`"))),
        }
    }
}

/// A validated g-group frequency table.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    labels: Arc<[String]>,
    groups: Vec<GroupCounts>,
}

impl FrequencyTable {
    /// Builds a table with 1-based index labels.
    pub fn new(groups: Vec<GroupCounts>) -> Result<Self> {
        let labels: Vec<String> = (1..=groups.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, groups)
    }

    pub fn with_labels(labels: Vec<String>, groups: Vec<GroupCounts>) -> Result<Self> {
        if labels.len() != groups.len() {
            return Err(Error::GroupMismatch {
                expected: groups.len(),
                got: labels.len(),
            });
        }
        let table = Self {
            labels: labels.into(),
            groups,
        };
        validate(&table)?;
        Ok(table)
    }

    /// Replaces the counts while keeping labels; used for resampled tables.
    pub(crate) fn with_counts(&self, groups: Vec<GroupCounts>) -> Self {
        debug_assert_eq!(groups.len(), self.groups.len());
        Self {
            labels: Arc::clone(&self.labels),
            groups,
        }
    }

    pub fn g(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[GroupCounts] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &GroupCounts {
        &self.groups[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Bilateral margins `(m0+, m1+, m2+)`.
    pub fn bilateral_margins(&self) -> [u64; 3] {
        self.groups.iter().fold([0; 3], |mut acc, gc| {
            acc[0] += u64::from(gc.m0);
            acc[1] += u64::from(gc.m1);
            acc[2] += u64::from(gc.m2);
            acc
        })
    }

    /// Unilateral margins `(n0+, n1+)`.
    pub fn unilateral_margins(&self) -> [u64; 2] {
        self.groups.iter().fold([0; 2], |mut acc, gc| {
            acc[0] += u64::from(gc.n0);
            acc[1] += u64::from(gc.n1);
            acc
        })
    }

    pub fn m_total(&self) -> u64 {
        self.bilateral_margins().iter().sum()
    }

    pub fn n_total(&self) -> u64 {
        self.unilateral_margins().iter().sum()
    }

    /// The combined sample vector `(m01, m11, m21, ..., n01, n11, ...)`.
    pub fn sample_vector(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.groups.iter().flat_map(|gc| gc.bilateral()).collect();
        v.extend(self.groups.iter().flat_map(|gc| gc.unilateral()));
        v
    }

    /// True when no group has unilateral subjects.
    pub fn is_purely_bilateral(&self) -> bool {
        self.groups.iter().all(|gc| gc.n_plus() == 0)
    }

    pub fn to_json(&self) -> String {
        let raw = RawTable {
            groups: self
                .labels
                .iter()
                .zip(&self.groups)
                .map(|(label, gc)| RawGroup {
                    label: Some(label.clone()),
                    bilateral: Some(gc.bilateral().map(i64::from).to_vec()),
                    unilateral: Some(gc.unilateral().map(i64::from).to_vec()),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("table serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,m0,m1,m2,n0,n1\n");
        for (label, gc) in self.labels.iter().zip(&self.groups) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                label, gc.m0, gc.m1, gc.m2, gc.n0, gc.n1
            ));
        }
        out
    }
}

impl fmt::Display for FrequencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>6} {:>6} {:>6} {:>6} {:>6}",
            "group", "m0", "m1", "m2", "n0", "n1"
        )?;
        for (label, gc) in self.labels.iter().zip(&self.groups) {
            writeln!(
                f,
                "{:>10} {:>6} {:>6} {:>6} {:>6} {:>6}",
                label, gc.m0, gc.m1, gc.m2, gc.n0, gc.n1
            )?;
        }
        Ok(())
    }
}

/// Checks the table invariants, reporting the first violation.
///
/// Negative counts cannot be represented in [`GroupCounts`]; they are caught
/// while parsing.
pub fn validate(table: &FrequencyTable) -> Result<()> {
    if table.groups.is_empty() {
        return Err(Error::ZeroGroups);
    }
    if let Some(i) = table.groups.iter().position(GroupCounts::is_degenerate) {
        return Err(Error::DegenerateGroup { group: i + 1 });
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct RawTable {
    groups: Vec<RawGroup>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawGroup {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default)]
    bilateral: Option<Vec<i64>>,
    #[serde(default)]
    unilateral: Option<Vec<i64>>,
}

pub fn parse_frequency_table(text: &str, format: TableFormat) -> Result<FrequencyTable> {
    match format {
        TableFormat::Json => parse_json(text),
        TableFormat::Csv => parse_csv(text),
    }
}

fn parse_json(text: &str) -> Result<FrequencyTable> {
    let raw: RawTable = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let mut labels = Vec::with_capacity(raw.groups.len());
    let mut groups = Vec::with_capacity(raw.groups.len());
    for (idx, rg) in raw.groups.into_iter().enumerate() {
        let group = idx + 1;
        let bilateral = rg.bilateral.ok_or(Error::MissingField {
            group,
            field: "bilateral",
        })?;
        if bilateral.len() != 3 {
            return Err(Error::Malformed(format!(
                "group {group}: `bilateral` needs 3 counts, got {}",
                bilateral.len()
            )));
        }
        let unilateral = rg.unilateral.unwrap_or_else(|| vec![0, 0]);
        if unilateral.len() != 2 {
            return Err(Error::Malformed(format!(
                "group {group}: `unilateral` needs 2 counts, got {}",
                unilateral.len()
            )));
        }
        let counts = GroupCounts::from_signed(
            [bilateral[0], bilateral[1], bilateral[2], unilateral[0], unilateral[1]],
            group,
        )?;
        labels.push(rg.label.unwrap_or_else(|| group.to_string()));
        groups.push(counts);
    }
    FrequencyTable::with_labels(labels, groups)
}

const CSV_FIELDS: [&str; 5] = ["m0", "m1", "m2", "n0", "n1"];

fn parse_csv(text: &str) -> Result<FrequencyTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Malformed(e.to_string()))?;
        if row == 0 && record.get(1).is_some_and(|f| f.eq_ignore_ascii_case("m0")) {
            continue;
        }
        let group = groups.len() + 1;
        if record.len() < 6 {
            let field = CSV_FIELDS
                .get(record.len().saturating_sub(1))
                .copied()
                .unwrap_or("label");
            return Err(Error::MissingField { group, field });
        }
        if record.len() > 6 {
            return Err(Error::Malformed(format!(
                "group {group}: expected 6 fields, got {}",
                record.len()
            )));
        }
        let mut values = [0i64; 5];
        for (k, slot) in values.iter_mut().enumerate() {
            let field = &record[k + 1];
            *slot = field.parse().map_err(|_| {
                Error::Malformed(format!(
                    "group {group}: `{}` is not an integer ({field})",
                    CSV_FIELDS[k]
                ))
            })?;
        }
        let label = &record[0];
        labels.push(if label.is_empty() {
            group.to_string()
        } else {
            label.to_string()
        });
        groups.push(GroupCounts::from_signed(values, group)?);
    }
    FrequencyTable::with_labels(labels, groups)
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../../../../data/mcs_table_38214_t2.csv");

/// One modulation and coding scheme; code rate is `rate_x1024 / 1024`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: usize,
    pub q_m: usize,
    pub rate_x1024: f64,
}

impl McsEntry {
    pub fn rate(&self) -> f64 {
        self.rate_x1024 / 1024.0
    }

    /// Bits per symbol `Q_m · R`.
    pub fn spectral_efficiency(&self) -> f64 {
        self.q_m as f64 * self.rate()
    }

    /// Information bits for `n` symbols, `round(Q_m · N · R)`.
    pub fn info_bits(&self, n: usize) -> usize {
        (self.spectral_efficiency() * n as f64).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(2..=8).contains(&self.q_m) || !self.q_m.is_multiple_of(2) {
            return invalid(format!("MCS {}: modulation order {} not in {{2,4,6,8}}", self.index, self.q_m));
        }
        if !(self.rate_x1024 > 0.0 && self.rate_x1024 < 1024.0) {
            return invalid(format!("MCS {}: rate {}/1024 outside (0, 1)", self.index, self.rate_x1024));
        }
        Ok(())
    }
}

/// Ordered MCS table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    /// The shipped 64QAM/256QAM table (28 entries).
    pub fn standard() -> Self {
        Self::parse(DEFAULT_TABLE).expect("shipped MCS table is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let entries = reader
            .deserialize()
            .collect::<std::result::Result<Vec<McsEntry>, _>>()
            .map_err(|e| Error::Data(format!("MCS table: {e}")))?;
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("empty MCS table");
        }
        for e in &entries {
            e.validate()?;
        }
        if entries.windows(2).any(|w| w[1].index <= w[0].index) {
            return invalid("MCS indices must be strictly increasing");
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&McsEntry> {
        self.entries.iter().find(|e| e.index == index)
    }

    /// Table restricted to `indices`, in table order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        for i in indices {
            if self.get(*i).is_none() {
                return invalid(format!("unknown MCS index {i}"));
            }
        }
        Self::new(self.entries.iter().filter(|e| indices.contains(&e.index)).copied().collect())
    }
}

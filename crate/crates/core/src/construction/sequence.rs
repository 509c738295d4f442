//! Channel-independent reliability orderings of polar sub-channel indices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const FIVE_G_TABLE: &str = include_str!("../../../../data/polar_sequence_5g.txt");

/// Length of the TS 38.212 polar sequence.
pub const FIVE_G_MAX_LEN: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    /// TS 38.212 Table 5.3.1.2-1.
    FiveGPolar,
    /// Polarization weight with `beta = 2^(1/4)`.
    PolarizationWeight,
}

/// Sub-channel indices in ascending reliability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankSequence {
    kind: SequenceKind,
    order: Vec<usize>,
}

impl RankSequence {
    /// The 1024-entry 5G sequence shipped with the crate.
    pub fn five_g() -> Self {
        Self::parse(FIVE_G_TABLE, SequenceKind::FiveGPolar).expect("embedded 5G sequence is valid")
    }

    /// Polarization-weight sequence for blocklength `n`.
    pub fn polarization_weight(n: usize) -> Result<Self> {
        check_power_of_two(n)?;
        let beta = 2f64.powf(0.25);
        let weight = |i: usize| -> f64 {
            (0..usize::BITS as usize)
                .filter(|j| (i >> j) & 1 == 1)
                .map(|j| beta.powi(j as i32))
                .sum()
        };
        let weights: Vec<f64> = (0..n).map(weight).collect();
        let mut order: Vec<usize> = (0..n).collect();
        // stable: equal weights keep the smaller index first
        order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]));
        Ok(Self {
            kind: SequenceKind::PolarizationWeight,
            order,
        })
    }

    /// 5G sequence when it covers `n`, polarization weight otherwise.
    pub fn default_for(n: usize) -> Result<Self> {
        if n <= FIVE_G_MAX_LEN {
            check_power_of_two(n)?;
            Ok(Self::five_g())
        } else {
            Self::polarization_weight(n)
        }
    }

    /// Parses whitespace-separated indices; `#` starts a comment line.
    pub fn parse(text: &str, kind: SequenceKind) -> Result<Self> {
        let mut order = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            for token in line.split_whitespace() {
                let value = token
                    .parse::<usize>()
                    .map_err(|e| Error::Data(format!("bad sequence entry {token:?}: {e}")))?;
                order.push(value);
            }
        }
        if order.is_empty() || !order.len().is_power_of_two() {
            return Err(Error::Data(format!(
                "sequence length {} is not a power of two",
                order.len()
            )));
        }
        let mut seen = vec![false; order.len()];
        for &v in &order {
            if v >= order.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Data(format!("sequence is not a permutation (entry {v})")));
            }
        }
        Ok(Self { kind, order })
    }

    /// Reads a sequence file and restricts it to blocklength `n`.
    pub fn load(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let full = Self::parse(&text, SequenceKind::FiveGPolar)?;
        Ok(Self {
            kind: full.kind,
            order: full.restrict(n)?,
        })
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn max_len(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Entries below `n`, in their original relative order.
    pub fn restrict(&self, n: usize) -> Result<Vec<usize>> {
        check_power_of_two(n)?;
        if n > self.order.len() {
            return invalid(format!(
                "blocklength {n} exceeds sequence length {}",
                self.order.len()
            ));
        }
        Ok(self.order.iter().copied().filter(|&i| i < n).collect())
    }

    /// The `k` most reliable indices of a length-`n` code, ascending by index.
    ///
    /// Selection marks a mask and reads it back in index order, so no sort
    /// is involved.
    pub fn most_reliable(&self, n: usize, k: usize) -> Result<Vec<usize>> {
        if k > n {
            return invalid(format!("cannot select {k} of {n} indices"));
        }
        let restricted = self.restrict(n)?;
        let mut mask = vec![false; n];
        for &i in &restricted[n - k..] {
            mask[i] = true;
        }
        Ok((0..n).filter(|&i| mask[i]).collect())
    }
}

pub(crate) fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return invalid(format!("blocklength {n} is not a power of two"));
    }
    Ok(())
}

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::construction::{
    construct_ga, construct_rf1, construct_rf2, CodeConstruction, CrcPolicy, RankSequence, DEFAULT_EPS,
};
use crate::error::invalid;
use crate::Result;

use super::mcs::McsEntry;

/// Construction method named in a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Rf1,
    Rf2,
    Ga,
}

impl MethodKind {
    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Rf1 => "rf1",
            MethodKind::Rf2 => "rf2",
            MethodKind::Ga => "ga",
        }
    }
}

/// Reliability sequence used by the rate-filling constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceChoice {
    /// 5G sequence up to 1024, polarization weight beyond.
    #[default]
    Auto,
    #[serde(rename = "5g")]
    FiveG,
    Pw,
}

impl SequenceChoice {
    pub fn build(&self, n: usize) -> Result<RankSequence> {
        match self {
            SequenceChoice::Auto => RankSequence::default_for(n),
            SequenceChoice::FiveG => Ok(RankSequence::five_g()),
            SequenceChoice::Pw => RankSequence::polarization_weight(n),
        }
    }
}

/// Link simulation parameters; the TOML config file mirrors this struct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub method: MethodKind,
    /// Bits per symbol (1 is BPSK).
    pub m: usize,
    /// Symbols per frame, a power of two.
    pub n: usize,
    /// Information bits per frame, CRC included.
    pub k: usize,
    #[serde(default = "defaults::list_size")]
    pub list_size: usize,
    /// SNR points in dB, strictly increasing.
    pub snr_db: Vec<f64>,
    #[serde(default = "defaults::max_blocks")]
    pub max_blocks: u64,
    #[serde(default = "defaults::max_errors")]
    pub max_errors: u64,
    #[serde(default)]
    pub seed: u64,
    /// System BLER target of the finite-blocklength construction.
    #[serde(default = "defaults::eps")]
    pub eps: f64,
    /// Design SNR of the GA construction; each SNR point designs for itself when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga_design_snr_db: Option<f64>,
    #[serde(default)]
    pub crc: CrcPolicy,
    #[serde(default)]
    pub sequence: SequenceChoice,
    /// Frames per scheduling batch. Results do not depend on it.
    #[serde(default = "defaults::batch")]
    pub batch: usize,
    /// Worker threads; all available cores when absent. Results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// MCS indices for throughput runs; the whole table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcs: Option<Vec<usize>>,
    /// SNR grid of the per-MCS BLER lookup table for throughput runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lut_snr_db: Option<Vec<f64>>,
    /// Largest predicted BLER an MCS may have to be selected.
    #[serde(default = "defaults::bler_constraint")]
    pub bler_constraint: f64,
}

mod defaults {
    pub fn list_size() -> usize {
        8
    }
    pub fn max_blocks() -> u64 {
        100_000
    }
    pub fn max_errors() -> u64 {
        100
    }
    pub fn eps() -> f64 {
        super::DEFAULT_EPS
    }
    pub fn batch() -> usize {
        64
    }
    pub fn bler_constraint() -> f64 {
        0.1
    }
}

impl SimConfig {
    /// Config with default budgets for `method` at `(m, n, k)`.
    pub fn new(method: MethodKind, m: usize, n: usize, k: usize, snr_db: Vec<f64>) -> Self {
        Self {
            method,
            m,
            n,
            k,
            list_size: defaults::list_size(),
            snr_db,
            max_blocks: defaults::max_blocks(),
            max_errors: defaults::max_errors(),
            seed: 0,
            eps: defaults::eps(),
            ga_design_snr_db: None,
            crc: CrcPolicy::Standard,
            sequence: SequenceChoice::Auto,
            batch: defaults::batch(),
            workers: None,
            mcs: None,
            lut_snr_db: None,
            bler_constraint: defaults::bler_constraint(),
        }
    }

    /// This config with modulation and size taken from `mcs` at blocklength `n`.
    pub fn with_mcs(&self, mcs: &McsEntry) -> Self {
        Self {
            m: mcs.q_m,
            k: mcs.info_bits(self.n),
            ..self.clone()
        }
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.m, 1 | 2 | 4 | 6 | 8) {
            return invalid(format!("m = {} not in {{1,2,4,6,8}}", self.m));
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return invalid(format!("n = {} is not a power of two", self.n));
        }
        if self.k > self.m * self.n {
            return invalid(format!("k = {} exceeds m·n = {}", self.k, self.m * self.n));
        }
        if self.list_size == 0 || !self.list_size.is_power_of_two() {
            return invalid(format!("list_size = {} is not a power of two", self.list_size));
        }
        check_grid("snr_db", &self.snr_db)?;
        if let Some(grid) = &self.lut_snr_db {
            check_grid("lut_snr_db", grid)?;
        }
        if self.max_blocks == 0 {
            return invalid("max_blocks must be at least 1");
        }
        if self.max_errors == 0 {
            return invalid("max_errors must be at least 1");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return invalid(format!("eps = {} outside (0, 1)", self.eps));
        }
        if !(self.bler_constraint > 0.0 && self.bler_constraint <= 1.0) {
            return invalid(format!("bler_constraint = {} outside (0, 1]", self.bler_constraint));
        }
        if self.batch == 0 {
            return invalid("batch must be at least 1");
        }
        if self.workers == Some(0) {
            return invalid("workers must be at least 1");
        }
        if self.ga_design_snr_db.is_some_and(|s| !s.is_finite()) {
            return invalid("ga_design_snr_db must be finite");
        }
        Ok(())
    }

    /// Construction used at channel SNR `snr_db`.
    ///
    /// Only GA without a fixed design SNR depends on `snr_db`.
    pub fn construct(&self, snr_db: f64) -> Result<CodeConstruction> {
        let cons = match self.method {
            MethodKind::Rf1 => construct_rf1(self.m, self.k, self.n, &self.sequence.build(self.n)?)?,
            MethodKind::Rf2 => construct_rf2(self.m, self.k, self.n, self.eps, &self.sequence.build(self.n)?)?,
            MethodKind::Ga => {
                let design = self.ga_design_snr_db.unwrap_or(snr_db);
                construct_ga(&Constellation::with_order(self.m)?, self.k, self.n, design)?
            }
        };
        Ok(cons.with_crc_policy(self.crc))
    }

    /// Whether [`construct`](Self::construct) ignores its argument.
    pub fn construction_is_fixed(&self) -> bool {
        self.method != MethodKind::Ga || self.ga_design_snr_db.is_some()
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid(format!("{name} is empty"));
    }
    if grid.iter().any(|s| !s.is_finite()) {
        return invalid(format!("{name} has non-finite entries"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid(format!("{name} must be strictly increasing"));
    }
    Ok(())
}

/// One simulated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub snr_db: f64,
    /// BLER, or throughput in bits per symbol.
    pub metric: f64,
    pub blocks: u64,
    /// Frames with at least one wrong payload bit.
    pub errors: u64,
    /// Frames in error per level.
    pub level_errors: Vec<u64>,
}

/// Result of a BLER or throughput run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimCurve {
    /// `"bler"` or `"throughput"`.
    pub metric: String,
    pub points: Vec<SimPoint>,
    pub config: SimConfig,
    pub wall_time_s: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl SimCurve {
    /// CSV with header `snr_db,metric,blocks,errors`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["snr_db", "metric", "blocks", "errors"]).expect("in-memory write");
        for p in &self.points {
            w.write_record([
                p.snr_db.to_string(),
                p.metric.to_string(),
                p.blocks.to_string(),
                p.errors.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

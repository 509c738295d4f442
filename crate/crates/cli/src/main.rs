use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mlcpcm::analysis::{finite_bl_rate, per_level_error_prob, Analyzer};
use mlcpcm::constellation::Constellation;
use mlcpcm::construction::{construct_ga, construct_rf1, construct_rf2, CodeConstruction, DEFAULT_EPS};
use mlcpcm::sim::{
    min_required_snr, run_bler, run_throughput, BlerLut, McsTable, MethodKind, SequenceChoice, SimConfig,
};

#[derive(Parser)]
#[command(name = "mlcpcm", version, about = "Multilevel polar-coded modulation toolkit")]
struct Cli {
    /// TOML file with simulation parameters; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    out: OutFormat,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Per-level capacities, dispersions and finite-length rates.
    Analyze {
        #[arg(long)]
        m: usize,
        /// Comma-separated SNR values in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        snr_db: Vec<f64>,
        /// Blocklength for the finite-length rates.
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = mlcpcm::quadrature::DEFAULT_NODES)]
        nodes: usize,
    },
    /// Information sets of all component codes.
    Construct {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Information bits per frame.
        #[arg(long, conflicts_with = "rate")]
        k: Option<usize>,
        /// Code rate; K = round(m · N · rate).
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Rf2)]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// Channel SNR for the GA construction.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
    },
    /// Monte Carlo BLER curve, or the SNR reaching a BLER target.
    Bler {
        #[command(flatten)]
        sim: SimArgs,
        /// Search the smallest SNR with BLER at most this value instead of sweeping.
        #[arg(long)]
        target_bler: Option<f64>,
    },
    /// Adaptive-MCS throughput over Rayleigh block fading.
    Throughput {
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated MCS indices to offer.
        #[arg(long, value_delimiter = ',')]
        mcs: Option<Vec<usize>>,
        /// Comma-separated SNR grid for the BLER lookup table.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lut_snr_db: Option<Vec<f64>>,
        /// Read a previously measured lookup table (JSON) instead of measuring.
        #[arg(long)]
        lut: Option<PathBuf>,
        /// Write the lookup table (JSON) used by the run.
        #[arg(long)]
        save_lut: Option<PathBuf>,
        /// MCS table CSV; the shipped table when absent.
        #[arg(long)]
        mcs_table: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rf1,
    Rf2,
    Ga,
}

impl From<MethodArg> for MethodKind {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rf1 => MethodKind::Rf1,
            MethodArg::Rf2 => MethodKind::Rf2,
            MethodArg::Ga => MethodKind::Ga,
        }
    }
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    list_size: Option<usize>,
    /// Comma-separated SNR values in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    max_blocks: Option<u64>,
    #[arg(long)]
    max_errors: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ga_design_snr_db: Option<f64>,
}

impl SimArgs {
    /// Config file values overridden by flags.
    fn resolve(&self, cli: &Cli, need_mk: bool, need_grid: bool) -> Result<SimConfig> {
        let mut cfg = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                SimConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => {
                let method = self.method.context("--method is required without --config")?;
                let n = self.n.context("--n is required without --config")?;
                let snr = match (&self.snr_db, need_grid) {
                    (Some(grid), _) => grid.clone(),
                    (None, true) => bail!("--snr-db is required without --config"),
                    // the required-SNR search walks its own grid
                    (None, false) => vec![0.0],
                };
                let (m, k) = if need_mk {
                    (
                        self.m.context("--m is required without --config")?,
                        self.k.context("--k is required without --config")?,
                    )
                } else {
                    (self.m.unwrap_or(2), self.k.unwrap_or(n))
                };
                SimConfig::new(method.into(), m, n, k, snr)
            }
        };
        if let Some(v) = self.method {
            cfg.method = v.into();
        }
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = self.$field.clone() { cfg.$field = v; })*};
        }
        set!(m, n, k, list_size, snr_db, max_blocks, max_errors, eps);
        if self.ga_design_snr_db.is_some() {
            cfg.ga_design_snr_db = self.ga_design_snr_db;
        }
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        if cli.workers.is_some() {
            cfg.workers = cli.workers;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeRow {
    m: usize,
    snr_db: f64,
    /// Level index, 1-based.
    k: usize,
    capacity: f64,
    dispersion: f64,
    fbl_rate: f64,
}

fn analyze(cli: &Cli, m: usize, snr_db: &[f64], n: usize, eps: f64, nodes: usize) -> Result<()> {
    let c = Constellation::with_order(m)?;
    let analyzer = Analyzer::new(nodes);
    let eps_k = per_level_error_prob(eps, m);
    let mut rows = Vec::new();
    for &snr in snr_db {
        for s in analyzer.level_stats(&c, snr) {
            rows.push(AnalyzeRow {
                m,
                snr_db: snr,
                k: s.level,
                capacity: s.capacity,
                dispersion: s.dispersion,
                fbl_rate: finite_bl_rate(s.capacity, s.dispersion, n, eps_k)?,
            });
        }
    }
    match cli.out {
        OutFormat::Json => emit_json(&serde_json::json!({
            "m": m, "n": n, "eps": eps, "nodes": nodes,
            "channel_capacity": snr_db.iter().map(|&s| analyzer.channel_capacity(&c, s)).collect::<Vec<_>>(),
            "levels": rows,
        })),
        OutFormat::Csv => {
            println!("m,snr_db,k,capacity,dispersion,fbl_rate");
            for r in rows {
                println!("{},{},{},{},{},{}", r.m, r.snr_db, r.k, r.capacity, r.dispersion, r.fbl_rate);
            }
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn construct(
    cli: &Cli,
    m: usize,
    n: usize,
    k: Option<usize>,
    rate: Option<f64>,
    method: MethodArg,
    eps: f64,
    snr_db: Option<f64>,
) -> Result<()> {
    let k = match (k, rate) {
        (Some(k), _) => k,
        (None, Some(r)) => (m as f64 * n as f64 * r).round() as usize,
        (None, None) => bail!("one of --k or --rate is required"),
    };
    let seq = SequenceChoice::Auto.build(n)?;
    let cons: CodeConstruction = match method {
        MethodArg::Rf1 => construct_rf1(m, k, n, &seq)?,
        MethodArg::Rf2 => construct_rf2(m, k, n, eps, &seq)?,
        MethodArg::Ga => {
            let snr = snr_db.context("--snr-db is required for the GA construction")?;
            construct_ga(&Constellation::with_order(m)?, k, n, snr)?
        }
    };
    match cli.out {
        OutFormat::Json => emit_json(&cons),
        OutFormat::Csv => {
            println!("level,k,crc_len,value,info_set");
            for (i, (level, value)) in cons.levels.iter().zip(&cons.level_values).enumerate() {
                let set: Vec<String> = level.info_set.iter().map(usize::to_string).collect();
                println!("{},{},{},{},{}", i + 1, level.info_set.len(), level.crc_len, value, set.join(" "));
            }
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Analyze { m, snr_db, n, eps, nodes } => analyze(&cli, *m, snr_db, *n, *eps, *nodes),
        Command::Construct { m, n, k, rate, method, eps, snr_db } => {
            construct(&cli, *m, *n, *k, *rate, *method, *eps, *snr_db)
        }
        Command::Bler { sim, target_bler } => {
            let cfg = sim.resolve(&cli, true, target_bler.is_none())?;
            match target_bler {
                Some(t) => {
                    let result = min_required_snr(&cfg, *t)?;
                    if result.warning {
                        eprintln!("warning: BLER estimates are not monotone in SNR");
                    }
                    match cli.out {
                        OutFormat::Json => emit_json(&serde_json::json!({ "config": cfg, "result": result })),
                        OutFormat::Csv => {
                            println!("target_bler,snr_db,retried,warning");
                            println!("{},{},{},{}", t, result.snr_db, result.retried, result.warning);
                            Ok(())
                        }
                    }
                }
                None => {
                    let curve = run_bler(&cfg)?;
                    match cli.out {
                        OutFormat::Json => emit_json(&curve),
                        OutFormat::Csv => {
                            print!("{}", curve.to_csv());
                            Ok(())
                        }
                    }
                }
            }
        }
        Command::Throughput { sim, mcs, lut_snr_db, lut, save_lut, mcs_table } => {
            let mut cfg = sim.resolve(&cli, false, true)?;
            if mcs.is_some() {
                cfg.mcs = mcs.clone();
            }
            if lut_snr_db.is_some() {
                cfg.lut_snr_db = lut_snr_db.clone();
            }
            cfg.validate()?;
            let lut = match lut {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    BlerLut::new(serde_json::from_str::<BlerLut>(&text)?.curves)?
                }
                None => {
                    let table = match mcs_table {
                        Some(path) => McsTable::load(path)?,
                        None => McsTable::standard(),
                    };
                    let table = match &cfg.mcs {
                        Some(indices) => table.subset(indices)?,
                        None => table,
                    };
                    eprintln!("measuring BLER lookup table for {} MCS entries", table.entries().len());
                    BlerLut::measure(&cfg, &table)?
                }
            };
            if let Some(path) = save_lut {
                std::fs::write(path, serde_json::to_string_pretty(&lut)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let curve = run_throughput(&cfg, &lut)?;
            match cli.out {
                OutFormat::Json => emit_json(&curve),
                OutFormat::Csv => {
                    print!("{}", curve.to_csv());
                    Ok(())
                }
            }
        }
    }
}

//! Command-line harness: UMi input-vs-output evaluation, maximum-AS sweep,
//! ACF diagnostics and single-link path generation.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corr_field::{self, AcfSpec, FieldSet};
use crate::error::{Error, Result};
use crate::geom::{LinkGeometry, Position};
use crate::lsf::{self, Condition, ScenarioConfig};
use crate::metrics::{self, EmpiricalCdf, SpreadReport, SweepOptions, SweepPoint};
use crate::seed;
use crate::ssf::{self, AngleDim, Generation, InitialPaths, LsfSample, PathTable};

#[derive(Debug, Parser)]
#[command(name = "ssfgen", version, about = "Spatially consistent multi-frequency small-scale fading generator")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario config (TOML). Defaults to the built-in UMi config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 500)]
    pub mts: usize,
    #[arg(long = "radius-m", global = true, allow_negative_numbers = true, default_value_t = 200.0)]
    pub radius_m: f64,
    #[arg(long = "bs-height-m", global = true, allow_negative_numbers = true, default_value_t = 10.0)]
    pub bs_height_m: f64,
    #[arg(long = "mt-height-m", global = true, allow_negative_numbers = true, default_value_t = 1.5)]
    pub mt_height_m: f64,
    /// Output directory (`gen` prints to stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Input-vs-output spread distributions for MTs dropped around one BS.
    Eval,
    /// Achieved angular spread vs K-factor for a very large requested spread.
    MaxAs(MaxAsArgs),
    /// Empirical vs target field autocorrelation.
    AcfCheck(AcfArgs),
    /// Paths of a single link as JSON.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MaxAsArgs {
    #[arg(long = "kf-min-db", default_value_t = -30.0, allow_negative_numbers = true)]
    pub kf_min_db: f64,
    #[arg(long = "kf-max-db", default_value_t = 30.0, allow_negative_numbers = true)]
    pub kf_max_db: f64,
    #[arg(long = "kf-step-db", default_value_t = 2.0)]
    pub kf_step_db: f64,
    #[arg(long = "target-as-deg", default_value_t = 100.0)]
    pub target_as_deg: f64,
    /// Monte-Carlo seeds per grid point.
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    /// Restrict the sweep to one dimension.
    #[arg(long, value_enum)]
    pub dimension: Option<DimensionArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DimensionArg {
    Azimuth,
    Elevation,
}

impl From<DimensionArg> for AngleDim {
    fn from(d: DimensionArg) -> Self {
        match d {
            DimensionArg::Azimuth => AngleDim::Azimuth,
            DimensionArg::Elevation => AngleDim::Elevation,
        }
    }
}

impl Default for MaxAsArgs {
    fn default() -> Self {
        Self {
            kf_min_db: -30.0,
            kf_max_db: 30.0,
            kf_step_db: 2.0,
            target_as_deg: 100.0,
            seeds: 100,
            dimension: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AcfArgs {
    /// Independent field realizations.
    #[arg(long, default_value_t = 200)]
    pub fields: usize,
    /// Random position pairs per realization and distance.
    #[arg(long, default_value_t = 50)]
    pub pairs: usize,
}

impl Default for AcfArgs {
    fn default() -> Self {
        Self { fields: 200, pairs: 50 }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// TX position `x,y,z` in meters.
    #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
    pub tx: Position,
    /// RX position `x,y,z` in meters.
    #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
    pub rx: Position,
    #[arg(long, value_enum, default_value_t = ConditionArg::Los)]
    pub condition: ConditionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ConditionArg {
    Los,
    Nlos,
}

impl From<ConditionArg> for Condition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::Los => Condition::Los,
            ConditionArg::Nlos => Condition::Nlos,
        }
    }
}

fn parse_position(s: &str) -> std::result::Result<Position, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z but got '{s}'"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse::<f64>().map_err(|e| format!("'{p}': {e}"))?;
    }
    let pos = Position::from(v);
    if pos.is_finite() {
        Ok(pos)
    } else {
        Err(format!("non-finite position '{s}'"))
    }
}

/// Validated run parameters shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub mts: usize,
    pub radius_m: f64,
    pub bs_height_m: f64,
    pub mt_height_m: f64,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let config = match &args.config {
            Some(p) => lsf::load_config(p)?,
            None => lsf::umi_config(),
        };
        Self::new(config, args)
    }

    pub fn new(config: ScenarioConfig, args: &RunArgs) -> Result<Self> {
        if args.mts == 0 {
            return Err(Error::InvalidArgument("--mts must be at least 1".into()));
        }
        if !(args.radius_m.is_finite() && args.radius_m > 0.0) {
            return Err(Error::InvalidArgument("--radius-m must be positive".into()));
        }
        for (flag, h) in [("--bs-height-m", args.bs_height_m), ("--mt-height-m", args.mt_height_m)] {
            if !(h.is_finite() && h >= 0.0) {
                return Err(Error::InvalidArgument(format!("{flag} must be non-negative")));
            }
        }
        config.validate()?;
        Ok(Self {
            config,
            seed: args.seed,
            mts: args.mts,
            radius_m: args.radius_m,
            bs_height_m: args.bs_height_m,
            mt_height_m: args.mt_height_m,
            out: args.out.clone(),
        })
    }

    /// UMi defaults: 500 MTs in a 200 m disk, BS at 10 m, MTs at 1.5 m.
    pub fn umi_default(config: ScenarioConfig, seed: u64) -> Result<Self> {
        let args = RunArgs {
            config: None,
            seed,
            mts: 500,
            radius_m: 200.0,
            bs_height_m: 10.0,
            mt_height_m: 1.5,
            out: None,
        };
        Self::new(config, &args)
    }

    pub fn bs_position(&self) -> Position {
        Position::new(0.0, 0.0, self.bs_height_m)
    }

    /// MT positions uniform over the disk area.
    pub fn mt_positions(&self) -> Vec<Position> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(self.seed, &[STREAM_DROP]));
        (0..self.mts)
            .map(|_| {
                let r = self.radius_m * rng.random::<f64>().sqrt();
                let a = TAU * rng.random::<f64>();
                Position::new(r * a.cos(), r * a.sin(), self.mt_height_m)
            })
            .collect()
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

const STREAM_DROP: u64 = 0;
const STREAM_LSF: u64 = 1;
const STREAM_FIELDS: u64 = 2;
const STREAM_GEN: u64 = 3;
const STREAM_ACF: u64 = 4;
const STREAM_SWEEP: u64 = 5;

fn condition_counter(c: Condition) -> u64 {
    match c {
        Condition::Los => 0,
        Condition::Nlos => 1,
    }
}

/// One MT under one condition.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub mt: usize,
    pub condition: Condition,
    pub position: Position,
    pub lsf: LsfSample,
    pub initial: InitialPaths,
    pub generation: Generation,
    pub report: SpreadReport,
}

/// All records of an evaluation run, LOS first, MT order within a condition.
#[derive(Debug, Clone)]
pub struct EvalRun {
    pub frequencies_ghz: Vec<f64>,
    pub records: Vec<EvalRecord>,
}

/// The five spread parameters in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Ds,
    Asd,
    Asa,
    Esd,
    Esa,
}

impl Param {
    pub const ALL: [Param; 5] = [Param::Ds, Param::Asd, Param::Asa, Param::Esd, Param::Esa];

    pub fn name(self) -> &'static str {
        match self {
            Param::Ds => "ds",
            Param::Asd => "asd",
            Param::Asa => "asa",
            Param::Esd => "esd",
            Param::Esa => "esa",
        }
    }

    /// Input and output value in reporting units (ns or degrees).
    pub fn values(self, rec: &EvalRecord, f: usize) -> (f64, f64) {
        let i = &rec.lsf.values()[f];
        let o = &rec.report.per_frequency[f];
        match self {
            Param::Ds => (i.ds * 1e9, o.ds * 1e9),
            Param::Asd => (i.asd.to_degrees(), o.asd.to_degrees()),
            Param::Asa => (i.asa.to_degrees(), o.asa.to_degrees()),
            Param::Esd => (i.esd.to_degrees(), o.esd.to_degrees()),
            Param::Esa => (i.esa.to_degrees(), o.esa.to_degrees()),
        }
    }
}

impl EvalRun {
    pub fn records(&self, c: Condition) -> impl Iterator<Item = &EvalRecord> {
        self.records.iter().filter(move |r| r.condition == c)
    }

    /// Input and output samples (reporting units) of one parameter.
    pub fn samples(&self, param: Param, c: Condition, f: usize) -> (Vec<f64>, Vec<f64>) {
        self.records(c).map(|r| param.values(r, f)).unzip()
    }

    pub fn summary(&self) -> Result<Vec<SummaryRow>> {
        let conditions: Vec<Condition> = Condition::BOTH
            .into_iter()
            .filter(|c| self.records(*c).next().is_some())
            .collect();
        let mut rows = Vec::new();
        for param in Param::ALL {
            for &c in &conditions {
                for (f, &freq) in self.frequencies_ghz.iter().enumerate() {
                    let (input, output) = self.samples(param, c, f);
                    let input_median = EmpiricalCdf::new(&input)?.median();
                    let output_median = EmpiricalCdf::new(&output)?.median();
                    rows.push(SummaryRow {
                        parameter: param.name(),
                        condition: c,
                        frequency_ghz: freq,
                        input_median,
                        output_median,
                        output_input_ratio: output_median / input_median,
                    });
                }
            }
        }
        Ok(rows)
    }
}

/// Median input and output of one parameter / condition / frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRow {
    pub parameter: &'static str,
    pub condition: Condition,
    pub frequency_ghz: f64,
    pub input_median: f64,
    pub output_median: f64,
    pub output_input_ratio: f64,
}

fn eval_one(spec: &RunSpec, mt: usize, position: Position, condition: Condition) -> Result<EvalRecord> {
    let cc = spec.config.condition(condition)?;
    let geom = LinkGeometry::new(spec.bs_position(), position)?;
    let key = [mt as u64, condition_counter(condition)];
    let lsf = lsf::sample_lsf(
        &spec.config,
        condition,
        &geom,
        seed::derive(spec.seed, &[STREAM_LSF, key[0], key[1]]),
    )?;
    let fields = FieldSet::new(
        seed::derive(spec.seed, &[STREAM_FIELDS, key[0], key[1]]),
        cc.path_count,
        cc.delay_acf()?,
        cc.angle_acf()?,
        spec.config.n_sinusoids,
    )?;
    let initial = ssf::initial_paths(&fields, &geom)?;
    let generation = ssf::finish_paths(&initial, &geom, &lsf)?;
    let report = SpreadReport::from_table(&generation.table)?;
    Ok(EvalRecord {
        mt,
        condition,
        position,
        lsf,
        initial,
        generation,
        report,
    })
}

/// Drop the MTs, run every configured condition for each of them.
pub fn run_eval(spec: &RunSpec) -> Result<EvalRun> {
    let positions = spec.mt_positions();
    let jobs: Vec<(usize, Position, Condition)> = spec
        .config
        .conditions()
        .into_iter()
        .flat_map(|c| positions.iter().enumerate().map(move |(i, p)| (i, *p, c)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(i, p, c)| eval_one(spec, i, p, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalRun {
        frequencies_ghz: spec.config.frequencies_ghz.clone(),
        records,
    })
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let to_io = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write `<param>.csv` for the five parameters plus `summary.csv`.
pub fn write_eval(run: &EvalRun, dir: &Path) -> Result<Vec<PathBuf>> {
    create_out_dir(dir)?;
    let mut written = Vec::new();
    for param in Param::ALL {
        let path = dir.join(format!("{}.csv", param.name()));
        let mut rows = Vec::new();
        for c in Condition::BOTH {
            for (f, freq) in run.frequencies_ghz.iter().enumerate() {
                for rec in run.records(c) {
                    let (i, o) = param.values(rec, f);
                    rows.push(vec![freq.to_string(), c.to_string(), i.to_string(), o.to_string()]);
                }
            }
        }
        write_csv(
            &path,
            &["frequency_ghz", "condition", "input_value", "output_value"],
            rows,
        )?;
        written.push(path);
    }

    let path = dir.join("summary.csv");
    let rows = run.summary()?.into_iter().map(|row| {
        vec![
            row.parameter.to_string(),
            row.condition.to_string(),
            row.frequency_ghz.to_string(),
            row.input_median.to_string(),
            row.output_median.to_string(),
            row.output_input_ratio.to_string(),
        ]
    });
    write_csv(
        &path,
        &[
            "parameter",
            "condition",
            "frequency_ghz",
            "input_median",
            "output_median",
            "output_input_ratio",
        ],
        rows,
    )?;
    written.push(path);
    Ok(written)
}

pub fn cmd_eval(spec: &RunSpec) -> Result<Vec<PathBuf>> {
    let run = run_eval(spec)?;
    write_eval(&run, &spec.out_dir())
}

/// K-factor grid `min, min+step, …, ≤ max`.
pub fn kf_grid(min_db: f64, max_db: f64, step_db: f64) -> Result<Vec<f64>> {
    if !(step_db > 0.0) || !(max_db >= min_db) || !min_db.is_finite() || !max_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bad K-factor grid {min_db}..{max_db} step {step_db}"
        )));
    }
    let n = ((max_db - min_db) / step_db + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min_db + i as f64 * step_db).collect())
}

/// Sweep curves for azimuth and elevation, using the NLOS parameter set when
/// present.
pub fn run_max_as(spec: &RunSpec, args: &MaxAsArgs) -> Result<Vec<(AngleDim, SweepPoint)>> {
    let grid = kf_grid(args.kf_min_db, args.kf_max_db, args.kf_step_db)?;
    let cc = spec
        .config
        .condition(Condition::Nlos)
        .or_else(|_| spec.config.condition(Condition::Los))?;
    let opts = SweepOptions {
        seeds: args.seeds,
        master_seed: seed::derive(spec.seed, &[STREAM_SWEEP]),
        n_sinusoids: spec.config.n_sinusoids,
        ..SweepOptions::default()
    };
    let target = args.target_as_deg.to_radians();
    let mut rows = Vec::new();
    let dims = match args.dimension {
        Some(d) => vec![d.into()],
        None => vec![AngleDim::Azimuth, AngleDim::Elevation],
    };
    for dim in dims {
        for p in metrics::max_as_sweep(&grid, target, dim, cc, &opts)? {
            rows.push((dim, p));
        }
    }
    Ok(rows)
}

pub fn cmd_max_as(spec: &RunSpec, args: &MaxAsArgs) -> Result<PathBuf> {
    let rows = run_max_as(spec, args)?;
    let dir = spec.out_dir();
    create_out_dir(&dir)?;
    let path = dir.join("max_as.csv");
    let rows = rows.into_iter().map(|(dim, p)| {
        vec![
            p.kf_db.to_string(),
            dim.name().to_string(),
            p.achieved_as.to_degrees().to_string(),
        ]
    });
    write_csv(&path, &["kf_db", "dimension", "achieved_as_deg"], rows)?;
    Ok(path)
}

/// One row of an ACF check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfRow {
    pub distance_m: f64,
    pub empirical_rho: f64,
    pub target_rho: f64,
}

/// Distinct decorrelation distances used by the config, ascending.
pub fn configured_decorrelation(cfg: &ScenarioConfig) -> Vec<f64> {
    let mut d: Vec<f64> = cfg
        .conditions()
        .into_iter()
        .filter_map(|c| cfg.condition(c).ok())
        .flat_map(|cc| [cc.decorrelation_m.delay, cc.decorrelation_m.angle])
        .collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

/// Empirical vs target correlation at `0, d_λ/4, …, 4·d_λ`.
pub fn run_acf_check(spec: &RunSpec, d_lambda: f64, args: &AcfArgs) -> Result<Vec<AcfRow>> {
    let acf = AcfSpec::new(d_lambda)?;
    let distances: Vec<f64> = (0..=16).map(|i| i as f64 * d_lambda / 4.0).collect();
    let rho = corr_field::empirical_acf(
        acf,
        &distances,
        args.fields,
        args.pairs,
        spec.config.n_sinusoids,
        seed::derive(spec.seed, &[STREAM_ACF, d_lambda.to_bits()]),
    )?;
    distances
        .iter()
        .zip(rho)
        .map(|(&d, r)| {
            Ok(AcfRow {
                distance_m: d,
                empirical_rho: r,
                target_rho: corr_field::acf_target(d, &acf)?,
            })
        })
        .collect()
}

fn acf_file_name(d_lambda: f64) -> String {
    format!("acf_{d_lambda}m.csv")
}

pub fn cmd_acf_check(spec: &RunSpec, args: &AcfArgs) -> Result<Vec<PathBuf>> {
    let dir = spec.out_dir();
    create_out_dir(&dir)?;
    let mut written = Vec::new();
    for d in configured_decorrelation(&spec.config) {
        let rows = run_acf_check(spec, d, args)?;
        let path = dir.join(acf_file_name(d));
        let rows = rows.into_iter().map(|r| {
            vec![
                r.distance_m.to_string(),
                format!("{:.6}", r.empirical_rho),
                format!("{:.6}", r.target_rho),
            ]
        });
        write_csv(&path, &["distance_m", "empirical_rho", "target_rho"], rows)?;
        written.push(path);
    }
    Ok(written)
}

/// JSON document written by `gen`.
#[derive(Debug, Clone, Serialize)]
pub struct GenOutput {
    pub condition: Condition,
    pub frequencies_ghz: Vec<f64>,
    pub tx: Position,
    pub rx: Position,
    pub lsf: LsfSample,
    pub paths: PathTable,
}

// The endpoint acting as BS when sampling large-scale parameters: the higher
// one, ties broken by x then y. Independent of which end is called TX.
fn tx_is_bs(geom: &LinkGeometry) -> bool {
    let key = |p: &Position| (p.z, p.x, p.y);
    let (a, b) = (key(&geom.tx), key(&geom.rx));
    a.0 > b.0 || (a.0 == b.0 && (a.1 > b.1 || (a.1 == b.1 && a.2 >= b.2)))
}

/// Paths of one link. The field bank depends only on the seed and the
/// condition, so calling with TX and RX exchanged yields the reciprocal link.
pub fn run_gen(spec: &RunSpec, args: &GenArgs) -> Result<GenOutput> {
    let condition: Condition = args.condition.into();
    let cc = spec.config.condition(condition)?;
    let geom = LinkGeometry::new(args.tx, args.rx)?;
    let lsf_seed = seed::derive(spec.seed, &[STREAM_GEN, condition_counter(condition), 0]);
    let lsf = if tx_is_bs(&geom) {
        lsf::sample_lsf(&spec.config, condition, &geom, lsf_seed)?
    } else {
        lsf::sample_lsf(&spec.config, condition, &geom.swapped(), lsf_seed)?.swapped()
    };
    let fields = FieldSet::new(
        seed::derive(spec.seed, &[STREAM_GEN, condition_counter(condition), 1]),
        cc.path_count,
        cc.delay_acf()?,
        cc.angle_acf()?,
        spec.config.n_sinusoids,
    )?;
    let paths = ssf::generate_paths(&fields, &geom, &lsf)?;
    Ok(GenOutput {
        condition,
        frequencies_ghz: spec.config.frequencies_ghz.clone(),
        tx: args.tx,
        rx: args.rx,
        lsf,
        paths,
    })
}

pub fn cmd_gen(spec: &RunSpec, args: &GenArgs) -> Result<Option<PathBuf>> {
    let out = run_gen(spec, args)?;
    let json = serde_json::to_string_pretty(&out)
        .map_err(|e| Error::InvalidArgument(format!("serializing path table: {e}")))?;
    match &spec.out {
        Some(dir) => {
            create_out_dir(dir)?;
            let path = dir.join("paths.json");
            fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
            Ok(Some(path))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{json}").map_err(|e| Error::io("<stdout>", e))?;
            Ok(None)
        }
    }
}

/// Parse-free entry point used by `main`.
pub fn run(cli: &Cli) -> Result<()> {
    let spec = RunSpec::from_args(&cli.run)?;
    let written = match &cli.command {
        Command::Eval => cmd_eval(&spec)?,
        Command::MaxAs(a) => vec![cmd_max_as(&spec, a)?],
        Command::AcfCheck(a) => cmd_acf_check(&spec, a)?,
        Command::Gen(a) => cmd_gen(&spec, a)?.into_iter().collect(),
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

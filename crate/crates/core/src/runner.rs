//! Command-line runner: configuration, parameter sweeps and output files.
//!
//! Configuration is resolved in three layers, later ones winning:
//! built-in defaults, then the JSON document given by `--config`, then
//! individual command-line flags.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::limit::{critical_beta, limit_free_energy};
use crate::models::{ModelKind, ModelParams};
use crate::thermo::{cutoff_ladder, free_energy_per_atom, thermo_point, ThermoPoint, DEFAULT_CUTOFF_CAP};

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "DICKE_THERMO_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_UNKNOWN_COMMAND: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure at {point}: {source}")]
    Numeric { point: String, source: Error },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numeric { .. } => EXIT_NUMERIC,
            RunError::Io { .. } => EXIT_IO,
        }
    }
}

fn config_err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BetaScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    List(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        steps: usize,
        #[serde(default)]
        scale: BetaScale,
    },
}

impl BetaSpec {
    pub fn expand(&self) -> Result<Vec<f64>, RunError> {
        match *self {
            BetaSpec::List(ref v) => Ok(v.clone()),
            BetaSpec::Range { min, max, steps, scale } => {
                if steps == 0 {
                    return Ok(Vec::new());
                }
                if steps == 1 {
                    return Ok(vec![min]);
                }
                if scale == BetaScale::Log && !(min > 0.0 && max > 0.0) {
                    return Err(config_err("log beta scale needs beta-min and beta-max > 0"));
                }
                let t = |i: usize| i as f64 / (steps - 1) as f64;
                Ok((0..steps)
                    .map(|i| match scale {
                        BetaScale::Linear => min + (max - min) * t(i),
                        BetaScale::Log => (min.ln() + (max.ln() - min.ln()) * t(i)).exp(),
                    })
                    .collect())
            }
        }
    }
}

/// Run configuration as read from a JSON document; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kinds: Option<Vec<ModelKind>>,
    pub epsilon: Option<OneOrMany<f64>>,
    pub lambda: Option<OneOrMany<f64>>,
    pub omega: Option<f64>,
    pub atoms: Option<OneOrMany<usize>>,
    pub beta: Option<BetaSpec>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model kinds, comma separated (Dicke, ExactEffective, ReslenEffective, LibertiZaffino)
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub atoms: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub beta_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub beta_scale: Option<BetaScale>,
    /// Boson-cutoff convergence tolerance on f
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Tc,
    Compare,
    Converge,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kinds: Vec<ModelKind>,
    pub epsilon: Vec<f64>,
    pub lambda: Vec<f64>,
    pub omega: f64,
    pub atoms: Vec<usize>,
    pub betas: Vec<f64>,
    pub tol: f64,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    pub const DEFAULT_TOL: f64 = 1e-8;
    pub const MAX_ATOMS: usize = 20;

    /// Merges defaults, the config file and the overrides, then validates.
    pub fn resolve(command: Command, file: ConfigFile, ov: &Overrides) -> Result<Self, RunError> {
        let default_kinds: Vec<ModelKind> = match command {
            Command::Tc => ModelKind::EFFECTIVE.to_vec(),
            _ => ModelKind::ALL.to_vec(),
        };
        let kinds = match &ov.kinds {
            Some(names) => names
                .iter()
                .map(|n| n.trim().parse::<ModelKind>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| config_err(e.to_string()))?,
            None => file.kinds.unwrap_or(default_kinds),
        };

        let range_flags = [ov.beta_min.is_some(), ov.beta_max.is_some(), ov.beta_steps.is_some()];
        let beta = if range_flags.iter().any(|b| *b) {
            if !range_flags.iter().all(|b| *b) {
                return Err(config_err("--beta-min, --beta-max and --beta-steps must be given together"));
            }
            Some(BetaSpec::Range {
                min: ov.beta_min.unwrap(),
                max: ov.beta_max.unwrap(),
                steps: ov.beta_steps.unwrap(),
                scale: ov.beta_scale.unwrap_or_default(),
            })
        } else {
            match (file.beta, ov.beta_scale) {
                (Some(BetaSpec::Range { min, max, steps, .. }), Some(scale)) => {
                    Some(BetaSpec::Range { min, max, steps, scale })
                }
                (b, _) => b,
            }
        };
        let betas = match beta {
            Some(spec) => spec.expand()?,
            None => Vec::new(),
        };

        let cfg = RunConfig {
            kinds,
            epsilon: ov.epsilon.clone().unwrap_or_else(|| file.epsilon.map_or(vec![1.0], OneOrMany::into_vec)),
            lambda: ov.lambda.clone().unwrap_or_else(|| file.lambda.map_or(vec![1.0], OneOrMany::into_vec)),
            omega: ov.omega.or(file.omega).unwrap_or(1.0),
            atoms: ov.atoms.clone().unwrap_or_else(|| file.atoms.map_or(vec![4], OneOrMany::into_vec)),
            betas,
            tol: ov.tol.or(file.tol).unwrap_or(Self::DEFAULT_TOL),
            out: ov.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            format: ov.format.or(file.format).unwrap_or_default(),
        };
        cfg.validate(command)?;
        Ok(cfg)
    }

    pub fn validate(&self, command: Command) -> Result<(), RunError> {
        if self.kinds.is_empty() {
            return Err(config_err("no model kinds given"));
        }
        if self.epsilon.is_empty() || self.epsilon.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(config_err("epsilon values must be finite and > 0"));
        }
        if self.lambda.is_empty() || self.lambda.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(config_err("lambda values must be finite and >= 0"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(config_err("omega must be finite and > 0"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(config_err("tol must be finite and > 0"));
        }
        if self.atoms.is_empty() {
            return Err(config_err("atom count list is empty"));
        }
        if let Some(n) = self.atoms.iter().find(|n| **n == 0 || **n > Self::MAX_ATOMS) {
            return Err(config_err(format!("atom count {n} outside 1..={}", Self::MAX_ATOMS)));
        }

        if command == Command::Tc {
            if self.kinds.contains(&ModelKind::Dicke) {
                return Err(config_err("tc applies to effective models only; remove Dicke from kinds"));
            }
            return Ok(());
        }

        if self.betas.is_empty() {
            return Err(config_err("beta grid is empty"));
        }
        if self.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(config_err("beta grid must be strictly positive and finite"));
        }
        if self.betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err("beta grid must be strictly increasing"));
        }
        if self.epsilon.len() != 1 || self.lambda.len() != 1 {
            return Err(config_err("sweep, compare and converge take a single epsilon and lambda"));
        }
        if matches!(command, Command::Compare | Command::Converge) && !self.kinds.contains(&ModelKind::Dicke) {
            return Err(config_err("compare and converge need Dicke among the kinds"));
        }
        Ok(())
    }

    fn params(&self, n_atoms: usize) -> Result<ModelParams, RunError> {
        ModelParams::with_omega(self.epsilon[0], self.lambda[0], self.omega, n_atoms)
            .map_err(|e| config_err(e.to_string()))
    }

    fn sorted_kinds(&self) -> Vec<ModelKind> {
        let mut k = self.kinds.clone();
        k.sort();
        k.dedup();
        k
    }

    fn sorted_atoms(&self) -> Vec<usize> {
        let mut a = self.atoms.clone();
        a.sort_unstable();
        a.dedup();
        a
    }
}

// ---------------------------------------------------------------------------
// Output rows

/// A record that can be written as one CSV line.
pub trait CsvRecord {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: ModelKind,
    pub n_atoms: usize,
    pub beta: f64,
    pub f: f64,
    pub u: f64,
    pub s: f64,
    pub jx2_per_atom2: f64,
    pub jz_per_atom: f64,
    pub photon_density: Option<f64>,
    pub cutoff_used: Option<usize>,
}

impl SweepRow {
    pub fn new(kind: ModelKind, n_atoms: usize, t: &ThermoPoint) -> Self {
        Self {
            kind,
            n_atoms,
            beta: t.beta,
            f: t.free_energy_per_atom,
            u: t.internal_energy_per_atom,
            s: t.entropy_per_atom,
            jx2_per_atom2: t.jx2_per_atom2,
            jz_per_atom: t.jz_per_atom,
            photon_density: t.photon_density,
            cutoff_used: t.cutoff_used,
        }
    }
}

impl CsvRecord for SweepRow {
    const HEADER: &'static [&'static str] =
        &["kind", "n_atoms", "beta", "f", "u", "s", "jx2_per_atom2", "jz_per_atom", "photon_density", "cutoff_used"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.kind.to_string(),
            self.n_atoms.to_string(),
            num(self.beta),
            num(self.f),
            num(self.u),
            num(self.s),
            num(self.jx2_per_atom2),
            num(self.jz_per_atom),
            opt_num(self.photon_density),
            self.cutoff_used.map(|c| c.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcRow {
    pub kind: ModelKind,
    pub epsilon: f64,
    pub lambda: f64,
    pub beta_c: Option<f64>,
    pub t_c: Option<f64>,
    pub exists: bool,
}

impl CsvRecord for TcRow {
    const HEADER: &'static [&'static str] = &["kind", "epsilon", "lambda", "beta_c", "t_c", "exists"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.kind.to_string(),
            num(self.epsilon),
            num(self.lambda),
            opt_num(self.beta_c),
            opt_num(self.t_c),
            self.exists.to_string(),
        ]
    }
}

/// Free energies per atom at the largest atom count, plus discrepancies
/// against the exact effective model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub beta: f64,
    pub n_atoms: usize,
    pub f_dicke: f64,
    pub f_exact: f64,
    pub f_reslen: f64,
    pub f_lz: f64,
    pub f_limit_exact: f64,
    pub d_dicke: f64,
    pub d_reslen: f64,
    pub d_lz: f64,
}

impl CsvRecord for CompareRow {
    const HEADER: &'static [&'static str] = &[
        "beta", "n_atoms", "f_dicke", "f_exact", "f_reslen", "f_lz", "f_limit_exact", "d_dicke", "d_reslen", "d_lz",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.beta),
            self.n_atoms.to_string(),
            num(self.f_dicke),
            num(self.f_exact),
            num(self.f_reslen),
            num(self.f_lz),
            num(self.f_limit_exact),
            num(self.d_dicke),
            num(self.d_reslen),
            num(self.d_lz),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub beta: f64,
    pub n_atoms: usize,
    pub f_dicke: f64,
    pub f_exact: f64,
    pub delta: f64,
}

impl CsvRecord for ConvergenceRow {
    const HEADER: &'static [&'static str] = &["beta", "n_atoms", "f_dicke", "f_exact", "delta"];

    fn fields(&self) -> Vec<String> {
        vec![num(self.beta), self.n_atoms.to_string(), num(self.f_dicke), num(self.f_exact), num(self.delta)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub beta: f64,
    pub cutoff: usize,
    pub f: f64,
}

impl CsvRecord for LadderRow {
    const HEADER: &'static [&'static str] = &["beta", "cutoff", "f"];

    fn fields(&self) -> Vec<String> {
        vec![num(self.beta), self.cutoff.to_string(), num(self.f)]
    }
}

pub fn to_csv<R: CsvRecord>(rows: &[R]) -> String {
    let mut out = R::HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.fields().join(","));
    }
    out
}

fn write_table<R: CsvRecord + Serialize>(cfg: &RunConfig, stem: &str, rows: &[R]) -> Result<PathBuf, RunError> {
    let path = cfg.out.join(format!("{stem}.{}", cfg.format.extension()));
    let body = match cfg.format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialise");
            s.push('\n');
            s
        }
    };
    fs::create_dir_all(&cfg.out).map_err(|source| RunError::Io { path: cfg.out.clone(), source })?;
    fs::write(&path, body).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(path)
}

fn numeric(point: String) -> impl FnOnce(Error) -> RunError {
    move |source| match source {
        Error::InvalidParameter(msg) => RunError::Config(format!("{point}: {msg}")),
        source => RunError::Numeric { point, source },
    }
}

// ---------------------------------------------------------------------------
// Commands

pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<SweepRow>, RunError> {
    let mut grid = Vec::new();
    for kind in cfg.sorted_kinds() {
        for n in cfg.sorted_atoms() {
            for &beta in &cfg.betas {
                grid.push((kind, n, beta));
            }
        }
    }
    grid.into_par_iter()
        .map(|(kind, n, beta)| {
            let params = cfg.params(n)?;
            let t = thermo_point(&params, kind, beta, cfg.tol)
                .map_err(numeric(format!("kind={kind} n_atoms={n} beta={beta}")))?;
            Ok(SweepRow::new(kind, n, &t))
        })
        .collect()
}

/// One row per (kind, N, β) with every thermodynamic output.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let rows = sweep_rows(cfg)?;
    Ok(vec![write_table(cfg, "sweep", &rows)?])
}

pub fn tc_rows(cfg: &RunConfig) -> Result<Vec<TcRow>, RunError> {
    let mut grid = Vec::new();
    for kind in cfg.sorted_kinds() {
        for &eps in &cfg.epsilon {
            for &lam in &cfg.lambda {
                grid.push((kind, eps, lam));
            }
        }
    }
    grid.into_par_iter()
        .map(|(kind, epsilon, lambda)| {
            let sol = critical_beta(kind, epsilon, lambda)
                .map_err(numeric(format!("kind={kind} epsilon={epsilon} lambda={lambda}")))?;
            Ok(TcRow { kind, epsilon, lambda, beta_c: sol.beta_c, t_c: sol.t_c(), exists: sol.beta_c.is_some() })
        })
        .collect()
}

/// Critical temperatures over the (kind, ε, λ) product grid.
pub fn cmd_tc(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let rows = tc_rows(cfg)?;
    Ok(vec![write_table(cfg, "tc", &rows)?])
}

fn dicke_free_energy(params: &ModelParams, beta: f64, tol: f64) -> Result<f64, Error> {
    let ladder = cutoff_ladder(params, beta, tol, DEFAULT_CUTOFF_CAP)?;
    Ok(ladder[ladder.len() - 2].1)
}

pub fn compare_rows(cfg: &RunConfig) -> Result<(Vec<CompareRow>, Vec<ConvergenceRow>), RunError> {
    let atoms = cfg.sorted_atoms();
    let n_max = *atoms.last().expect("validated non-empty");

    let mut grid = Vec::new();
    for &beta in &cfg.betas {
        for &n in &atoms {
            grid.push((beta, n));
        }
    }
    // (f_dicke, f_exact) for every (β, N)
    let pairs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&(beta, n)| {
            let params = cfg.params(n)?;
            let point = format!("n_atoms={n} beta={beta}");
            let fd = dicke_free_energy(&params, beta, cfg.tol).map_err(numeric(format!("Dicke {point}")))?;
            let fe = free_energy_per_atom(&params, ModelKind::ExactEffective, beta, None)
                .map_err(numeric(format!("ExactEffective {point}")))?;
            Ok((fd, fe))
        })
        .collect::<Result<_, RunError>>()?;

    let convergence: Vec<ConvergenceRow> = grid
        .iter()
        .zip(&pairs)
        .map(|(&(beta, n_atoms), &(f_dicke, f_exact))| ConvergenceRow {
            beta,
            n_atoms,
            f_dicke,
            f_exact,
            delta: (f_dicke - f_exact).abs(),
        })
        .collect();

    let params = cfg.params(n_max)?;
    let compare = cfg
        .betas
        .par_iter()
        .map(|&beta| {
            let row = convergence
                .iter()
                .find(|r| r.beta == beta && r.n_atoms == n_max)
                .expect("grid covers every beta at n_max");
            let point = |k: ModelKind| format!("kind={k} n_atoms={n_max} beta={beta}");
            let f_reslen = free_energy_per_atom(&params, ModelKind::ReslenEffective, beta, None)
                .map_err(numeric(point(ModelKind::ReslenEffective)))?;
            let f_lz = free_energy_per_atom(&params, ModelKind::LibertiZaffino, beta, None)
                .map_err(numeric(point(ModelKind::LibertiZaffino)))?;
            let limit = limit_free_energy(ModelKind::ExactEffective, beta, cfg.epsilon[0], cfg.lambda[0])
                .map_err(numeric(format!("limit beta={beta}")))?;
            Ok(CompareRow {
                beta,
                n_atoms: n_max,
                f_dicke: row.f_dicke,
                f_exact: row.f_exact,
                f_reslen,
                f_lz,
                f_limit_exact: limit.free_energy,
                d_dicke: (row.f_dicke - row.f_exact).abs(),
                d_reslen: (f_reslen - row.f_exact).abs(),
                d_lz: (f_lz - row.f_exact).abs(),
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok((compare, convergence))
}

/// Dicke vs effective-model free energies, plus the Dicke/exact gap per N.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let (compare, convergence) = compare_rows(cfg)?;
    Ok(vec![write_table(cfg, "compare", &compare)?, write_table(cfg, "convergence", &convergence)?])
}

/// The boson-cutoff ladder at the largest atom count for each β.
pub fn converge_rows(cfg: &RunConfig) -> Result<Vec<LadderRow>, RunError> {
    let n = *cfg.sorted_atoms().last().expect("validated non-empty");
    let params = cfg.params(n)?;
    let ladders = cfg
        .betas
        .par_iter()
        .map(|&beta| {
            let ladder = cutoff_ladder(&params, beta, cfg.tol, DEFAULT_CUTOFF_CAP)
                .map_err(numeric(format!("kind=Dicke n_atoms={n} beta={beta}")))?;
            Ok(ladder.into_iter().map(|(cutoff, f)| LadderRow { beta, cutoff, f }).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(ladders.into_iter().flatten().collect())
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let rows = converge_rows(cfg)?;
    Ok(vec![write_table(cfg, "converge", &rows)?])
}

// ---------------------------------------------------------------------------
// Entry point

#[derive(Debug, Parser)]
#[command(name = "dicke-thermo", version, about = "Dicke model vs effective spin Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Finite-N thermodynamics over (kind, N, beta)
    Sweep(Overrides),
    /// Critical temperatures from the gap equation
    Tc(Overrides),
    /// Free-energy discrepancies between Dicke and the effective models
    Compare(Overrides),
    /// Boson-cutoff convergence ladder
    Converge(Overrides),
}

fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|n: &usize| *n > 0)
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand => EXIT_UNKNOWN_COMMAND,
                _ => EXIT_CONFIG,
            };
        }
    };
    let (command, ov) = match cli.command {
        CliCommand::Sweep(o) => (Command::Sweep, o),
        CliCommand::Tc(o) => (Command::Tc, o),
        CliCommand::Compare(o) => (Command::Compare, o),
        CliCommand::Converge(o) => (Command::Converge, o),
    };

    let result = (|| {
        let file = match &ov.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let cfg = RunConfig::resolve(command, file, &ov)?;
        let exec = || match command {
            Command::Sweep => cmd_sweep(&cfg),
            Command::Tc => cmd_tc(&cfg),
            Command::Compare => cmd_compare(&cfg),
            Command::Converge => cmd_converge(&cfg),
        };
        match worker_count() {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| config_err(format!("{WORKERS_ENV}: {e}")))?
                .install(exec),
            None => exec(),
        }
    })();

    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn overrides() -> Overrides {
        Overrides::default()
    }

    #[test]
    fn beta_range_expansion() {
        let lin = BetaSpec::Range { min: 1.0, max: 3.0, steps: 3, scale: BetaScale::Linear };
        assert_eq!(lin.expand().unwrap(), vec![1.0, 2.0, 3.0]);
        let log = BetaSpec::Range { min: 0.1, max: 10.0, steps: 3, scale: BetaScale::Log };
        let v = log.expand().unwrap();
        assert!((v[1] - 1.0).abs() < 1e-14 && (v[2] - 10.0).abs() < 1e-12);
        let bad = BetaSpec::Range { min: 0.0, max: 1.0, steps: 3, scale: BetaScale::Log };
        assert!(bad.expand().is_err());
    }

    #[test]
    fn config_precedence() {
        let file: ConfigFile = serde_json::from_str(
            r#"{"epsilon": 2.0, "lambda": [0.5], "atoms": [2, 4], "beta": [0.5, 1.0], "tol": 1e-6}"#,
        )
        .unwrap();
        let ov = Overrides { lambda: Some(vec![0.7]), atoms: Some(vec![3]), ..overrides() };
        let cfg = RunConfig::resolve(Command::Sweep, file, &ov).unwrap();
        assert_eq!(cfg.epsilon, vec![2.0]);
        assert_eq!(cfg.lambda, vec![0.7]);
        assert_eq!(cfg.atoms, vec![3]);
        assert_eq!(cfg.betas, vec![0.5, 1.0]);
        assert_eq!(cfg.tol, 1e-6);
        assert_eq!(cfg.kinds, ModelKind::ALL.to_vec());
    }

    #[test]
    fn beta_flags_replace_file_grid() {
        let file: ConfigFile = serde_json::from_str(r#"{"beta": [0.5]}"#).unwrap();
        let ov = Overrides { beta_min: Some(1.0), beta_max: Some(2.0), beta_steps: Some(2), ..overrides() };
        let cfg = RunConfig::resolve(Command::Sweep, file, &ov).unwrap();
        assert_eq!(cfg.betas, vec![1.0, 2.0]);
        let partial = Overrides { beta_min: Some(1.0), ..overrides() };
        assert!(RunConfig::resolve(Command::Sweep, ConfigFile::default(), &partial).is_err());
    }

    #[test]
    fn validation_failures() {
        let with = |json: &str| {
            let file: ConfigFile = serde_json::from_str(json).unwrap();
            RunConfig::resolve(Command::Sweep, file, &overrides())
        };
        assert!(with(r#"{}"#).is_err(), "empty beta grid");
        assert!(with(r#"{"beta": []}"#).is_err());
        assert!(with(r#"{"beta": [1.0, 0.5]}"#).is_err());
        assert!(with(r#"{"beta": [0.0, 0.5]}"#).is_err());
        assert!(with(r#"{"beta": [1.0], "atoms": [21]}"#).is_err());
        assert!(with(r#"{"beta": [1.0], "atoms": [0]}"#).is_err());
        assert!(with(r#"{"beta": [1.0], "epsilon": -1.0}"#).is_err());
        assert!(with(r#"{"beta": [1.0], "lambda": [0.1, 0.2]}"#).is_err());
        assert!(with(r#"{"beta": [1.0], "tol": 0.0}"#).is_err());
        assert!(with(r#"{"beta": [1.0]}"#).is_ok());
        assert!(serde_json::from_str::<ConfigFile>(r#"{"betta": [1.0]}"#).is_err());
    }

    #[test]
    fn tc_kind_rules() {
        let cfg = RunConfig::resolve(Command::Tc, ConfigFile::default(), &overrides()).unwrap();
        assert!(!cfg.kinds.contains(&ModelKind::Dicke));
        let ov = Overrides { kinds: Some(vec!["Dicke".into()]), ..overrides() };
        assert!(RunConfig::resolve(Command::Tc, ConfigFile::default(), &ov).is_err());
        let ov = Overrides { kinds: Some(vec!["ExactEffective".into()]), ..overrides() };
        let file: ConfigFile = serde_json::from_str(r#"{"beta": [1.0]}"#).unwrap();
        assert!(RunConfig::resolve(Command::Compare, file, &ov).is_err());
    }

    #[test]
    fn csv_formatting() {
        let row = TcRow { kind: ModelKind::ExactEffective, epsilon: 1.0, lambda: 0.4, beta_c: None, t_c: None, exists: false };
        assert_eq!(to_csv(&[row]), "kind,epsilon,lambda,beta_c,t_c,exists\nExactEffective,1,0.4,,,false\n");
        assert_eq!(num(0.1 + 0.2), "0.30000000000000004");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["dicke-thermo", "frobnicate"]), EXIT_UNKNOWN_COMMAND);
        assert_eq!(run(["dicke-thermo", "sweep", "--atoms", "2"]), EXIT_CONFIG);
        assert_eq!(run(["dicke-thermo", "sweep", "--no-such-flag"]), EXIT_CONFIG);
    }
}

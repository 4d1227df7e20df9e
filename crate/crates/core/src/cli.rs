//! Command-line front end: argument parsing, CSV and TOML emission, run
//! manifests and the figure-data recipes.
//!
//! Every table is CSV with a header row. Floats are written as `{:.16e}`
//! (17 significant digits, enough to round-trip an `f64`); non-finite values
//! appear as `inf`, `-inf` or `nan`. Column sets are listed in the README and
//! versioned by [`CSV_SCHEMA_VERSION`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algo_thresholds::{self, SignalFamily};
use crate::bounds;
use crate::config::DistConfig;
use crate::dist::{Distribution, MixtureDistribution};
use crate::error::{Error, Result};
use crate::gaussian_closedform::{self, Sensitivities};
use crate::random_matrix_lab::{self, SimConfig};
use crate::replica;
use crate::scalar_channel;
use crate::state_evolution;

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// `simulate` finished but more than half of its trials diverged.
pub const EXIT_DIVERGED: i32 = 3;

/// Path recorded for output sent to standard output.
pub const STDOUT: &str = "-";

#[derive(Debug, Parser)]
#[command(name = "csdim", version, about = "Noise sensitivity and phase transitions of compressed sensing")]
pub struct Cli {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a run manifest (TOML) here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scalar-channel MMSE and mutual information along an snr grid.
    Mmse {
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long)]
        snr_grid: Grid,
    },
    /// Replica fixed point and decoder MSE.
    Replica {
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long = "R")]
        rate: Grid,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Closed-form distortions and sensitivities for a Gaussian input.
    Gaussian {
        #[arg(long = "R")]
        rate: Grid,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Noiseless phase-transition thresholds.
    Thresholds {
        #[arg(long, value_enum, default_value = "all")]
        family: FamilyArg,
        #[arg(long)]
        gamma_grid: Grid,
    },
    /// Soft-threshold state evolution, α optimized unless given.
    Se {
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long = "R")]
        rate: Grid,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Seeded Monte Carlo from a simulation config; writes a TOML report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Per-trial MSE as CSV.
        #[arg(long)]
        per_trial: Option<PathBuf>,
    },
    /// Lipschitz achievability constants.
    Bounds {
        #[arg(long)]
        gamma_grid: Grid,
        #[arg(long = "R")]
        rate: Grid,
        /// Entropy of the discrete part, in nats.
        #[arg(long = "H", default_value = "0")]
        entropy: Grid,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta_p: f64,
    },
    /// Data behind the standard plots, one CSV per figure.
    Figures {
        #[arg(value_enum, default_value = "all")]
        which: FigureArg,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mmse { .. } => "mmse",
            Command::Replica { .. } => "replica",
            Command::Gaussian { .. } => "gaussian",
            Command::Thresholds { .. } => "thresholds",
            Command::Se { .. } => "se",
            Command::Simulate { .. } => "simulate",
            Command::Bounds { .. } => "bounds",
            Command::Figures { .. } => "figures",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    /// Distribution config (TOML).
    #[arg(long, conflicts_with = "prior")]
    pub dist: Option<PathBuf>,
    /// Built-in law: `gaussian`, `cantor` or `sparse:<gamma>`, all standardized.
    #[arg(long)]
    pub prior: Option<String>,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct NoiseArgs {
    #[arg(long)]
    pub sigma2_grid: Option<Grid>,
    /// σ² = 1/snr.
    #[arg(long)]
    pub snr_grid: Option<Grid>,
}

impl NoiseArgs {
    fn noise_vars(&self) -> Vec<f64> {
        match (&self.sigma2_grid, &self.snr_grid) {
            (Some(g), _) => g.0.clone(),
            (None, Some(g)) => g.0.iter().map(|s| 1.0 / s).collect(),
            (None, None) => unreachable!("clap enforces one noise grid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Pm,
    Plus,
    Simple,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Plot,
    #[value(name = "plot_snr")]
    PlotSnr,
    Worstsens,
    Dmm,
    #[value(name = "noisy_sparse")]
    NoisySparse,
    Cantor,
    All,
}

impl FigureArg {
    const EACH: [FigureArg; 6] = [
        FigureArg::Plot,
        FigureArg::PlotSnr,
        FigureArg::Worstsens,
        FigureArg::Dmm,
        FigureArg::NoisySparse,
        FigureArg::Cantor,
    ];

    fn file_stem(self) -> &'static str {
        match self {
            FigureArg::Plot => "plot",
            FigureArg::PlotSnr => "plot_snr",
            FigureArg::Worstsens => "worstsens",
            FigureArg::Dmm => "dmm",
            FigureArg::NoisySparse => "noisy_sparse",
            FigureArg::Cantor => "cantor",
            FigureArg::All => "all",
        }
    }
}

/// A list of values: `lin:a:b:n`, `log:a:b:n` or `v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_grid(s).map(Grid)
    }
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::InvalidArgument(format!("grid {spec:?}: {m}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(&format!("{t:?} is not a number")));
    let parts: Vec<&str> = spec.split(':').collect();
    let out = match parts.as_slice() {
        [kind @ ("lin" | "log"), a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad("point count must be a positive integer"))?;
            if n == 0 {
                return Err(bad("point count must be a positive integer"));
            }
            let log = *kind == "log";
            if log && !(a > 0.0 && b > 0.0) {
                return Err(bad("log grid endpoints must be positive"));
            }
            (0..n)
                .map(|i| {
                    if i == 0 {
                        a
                    } else if i == n - 1 {
                        b
                    } else {
                        let f = i as f64 / (n - 1) as f64;
                        if log {
                            (a.ln() + f * (b.ln() - a.ln())).exp()
                        } else {
                            a + f * (b - a)
                        }
                    }
                })
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => return Err(bad("expected lin:a:b:n, log:a:b:n or a comma list")),
    };
    if out.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(out)
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// CSV accumulator; every row must match the header width.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            text: header.join(",") + "\n",
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.width, "row width");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&format_float(*x)),
                Cell::I(n) => write!(self.text, "{n}").expect("write to string"),
            }
        }
        self.text.push('\n');
    }

    pub fn floats(&mut self, xs: &[f64]) {
        let cells: Vec<Cell> = xs.iter().map(|&x| Cell::F(x)).collect();
        self.row(&cells);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    F(f64),
    I(i64),
}

/// One file (or standard output) produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

/// Everything a subcommand produced, before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub config: toml::Table,
    pub seeds: Vec<u64>,
    pub exit: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Arguments after the program name; re-parsing them repeats the run.
    pub argv: Vec<String>,
    pub version: String,
    pub csv_schema: u32,
    pub seeds: Vec<u64>,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
    /// Parameters after defaults and grids were expanded.
    pub config: toml::Table,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::config("manifest", e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(format!("manifest serialization: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputCheck {
    pub path: String,
    pub expected: String,
    pub actual: Option<String>,
}

impl OutputCheck {
    pub fn matches(&self) -> bool {
        self.actual.as_deref() == Some(self.expected.as_str())
    }
}

/// Recomputes a manifest's outputs in memory and compares hashes. Nothing is
/// written.
pub fn replay(manifest: &RunManifest) -> Result<Vec<OutputCheck>> {
    let argv = std::iter::once("csdim".to_string()).chain(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let outcome = execute(&cli)?;
    Ok(manifest
        .outputs
        .iter()
        .map(|rec| OutputCheck {
            path: rec.path.clone(),
            expected: rec.sha256.clone(),
            actual: outcome.artifacts.iter().find(|a| a.path == rec.path).map(Artifact::sha256),
        })
        .collect())
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidArgument(_) | Error::NotStandardized { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `argv` (program name first), runs, writes artifacts and the
/// optional manifest, and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("csdim {}: {e}", cli.command.name());
            return exit_code_for(&e);
        }
    };
    if let Err(e) = write_artifacts(&outcome.artifacts) {
        eprintln!("csdim {}: {e}", cli.command.name());
        return EXIT_FAILURE;
    }
    if let Some(path) = &cli.manifest {
        let manifest = RunManifest {
            subcommand: cli.command.name().into(),
            argv: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
            version: env!("CARGO_PKG_VERSION").into(),
            csv_schema: CSV_SCHEMA_VERSION,
            seeds: outcome.seeds.clone(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            exit_code: outcome.exit,
            config: outcome.config.clone(),
            outputs: outcome
                .artifacts
                .iter()
                .map(|a| OutputRecord {
                    path: a.path.clone(),
                    sha256: a.sha256(),
                })
                .collect(),
        };
        let written = manifest.to_toml_string().and_then(|t| std::fs::write(path, t).map_err(Error::from));
        if let Err(e) = written {
            eprintln!("csdim: cannot write manifest: {e}");
            return EXIT_FAILURE;
        }
    }
    if outcome.exit == EXIT_DIVERGED {
        eprintln!("csdim simulate: more than half of the trials diverged");
    }
    outcome.exit
}

fn write_artifacts(artifacts: &[Artifact]) -> Result<()> {
    use std::io::Write;
    for a in artifacts {
        if a.path == STDOUT {
            let mut out = std::io::stdout().lock();
            out.write_all(&a.bytes)?;
            out.flush()?;
        } else {
            let p = Path::new(&a.path);
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, &a.bytes)?;
        }
    }
    Ok(())
}

fn out_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(|| STDOUT.to_string(), |p| p.to_string_lossy().into_owned())
}

fn table_value<T: Serialize>(v: &T) -> Result<toml::Value> {
    toml::Value::try_from(v).map_err(|e| Error::InvalidArgument(format!("config serialization: {e}")))
}

fn floats_value(xs: &[f64]) -> toml::Value {
    toml::Value::Array(xs.iter().map(|&x| toml::Value::Float(x)).collect())
}

/// Resolves `--dist` / `--prior` to a law and its config.
pub fn resolve_prior(args: &PriorArgs, default: &str) -> Result<(Distribution, DistConfig)> {
    let dist = match (&args.dist, &args.prior) {
        (Some(path), _) => DistConfig::from_path(path)?.build()?,
        (None, p) => builtin_prior(p.as_deref().unwrap_or(default))?,
    };
    let cfg = DistConfig::from_distribution(&dist);
    Ok((dist, cfg))
}

pub fn builtin_prior(name: &str) -> Result<Distribution> {
    match name {
        "gaussian" => Ok(Distribution::standard_gaussian()),
        "cantor" => Ok(Distribution::standard_cantor()),
        s => match s.strip_prefix("sparse:").map(str::parse::<f64>) {
            Some(Ok(g)) if g > 0.0 && g < 1.0 => Ok(Distribution::standard_sparse_gaussian(g)),
            Some(_) => Err(Error::config("prior", format!("sparse weight must lie in (0, 1), got {s:?}"))),
            None => Err(Error::config("prior", format!("unknown built-in law {s:?}"))),
        },
    }
}

/// Runs a parsed command without touching the filesystem (apart from reading
/// its inputs).
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let mut config = toml::Table::new();
    let mut seeds = Vec::new();
    let mut exit = EXIT_OK;
    let out = out_path(&cli.out);
    let artifacts = match &cli.command {
        Command::Mmse { prior, snr_grid } => {
            let (dist, dcfg) = resolve_prior(prior, "gaussian")?;
            config.insert("dist".into(), table_value(&dcfg)?);
            config.insert("snr".into(), floats_value(&snr_grid.0));
            vec![Artifact {
                path: out,
                bytes: mmse_table(&dist, &snr_grid.0)?,
            }]
        }
        Command::Replica { prior, rate, noise } => {
            let (dist, dcfg) = resolve_prior(prior, "gaussian")?;
            let sigma2 = noise.noise_vars();
            config.insert("dist".into(), table_value(&dcfg)?);
            config.insert("rate".into(), floats_value(&rate.0));
            config.insert("sigma2".into(), floats_value(&sigma2));
            vec![Artifact {
                path: out,
                bytes: replica_table(&dist, &rate.0, &sigma2)?,
            }]
        }
        Command::Gaussian { rate, noise } => {
            let sigma2 = noise.noise_vars();
            config.insert("rate".into(), floats_value(&rate.0));
            config.insert("sigma2".into(), floats_value(&sigma2));
            vec![Artifact {
                path: out,
                bytes: gaussian_table(&rate.0, &sigma2)?,
            }]
        }
        Command::Thresholds { family, gamma_grid } => {
            config.insert("family".into(), toml::Value::String(format!("{family:?}").to_lowercase()));
            config.insert("gamma".into(), floats_value(&gamma_grid.0));
            vec![Artifact {
                path: out,
                bytes: thresholds_table(*family, &gamma_grid.0)?,
            }]
        }
        Command::Se {
            prior,
            rate,
            noise,
            alpha,
        } => {
            let (dist, dcfg) = resolve_prior(prior, "sparse:0.1")?;
            let Distribution::Mixture(mix) = dist else {
                return Err(Error::config("dist.kind", "state evolution needs a mixture law"));
            };
            let sigma2 = noise.noise_vars();
            config.insert("dist".into(), table_value(&dcfg)?);
            config.insert("rate".into(), floats_value(&rate.0));
            config.insert("sigma2".into(), floats_value(&sigma2));
            if let Some(a) = alpha {
                config.insert("alpha".into(), toml::Value::Float(*a));
            }
            vec![Artifact {
                path: out,
                bytes: se_table(&mix, &rate.0, &sigma2, *alpha)?,
            }]
        }
        Command::Simulate { config: path, per_trial } => {
            let text = std::fs::read_to_string(path)?;
            let cfg = SimConfig::from_toml_str(&text)?;
            config.insert("simulation".into(), table_value(&cfg)?);
            seeds.push(cfg.master_seed);
            let report = random_matrix_lab::run_simulation(&cfg)?;
            if 2 * report.diverged > cfg.trials {
                exit = EXIT_DIVERGED;
            }
            let mut arts = vec![Artifact {
                path: out,
                bytes: toml::to_string(&report)
                    .map_err(|e| Error::InvalidArgument(format!("report serialization: {e}")))?
                    .into_bytes(),
            }];
            if let Some(p) = per_trial {
                let mut csv = Csv::new(&["trial", "mse"]);
                for (i, &m) in report.per_trial.iter().enumerate() {
                    csv.row(&[Cell::I(i as i64), Cell::F(m)]);
                }
                arts.push(Artifact {
                    path: p.to_string_lossy().into_owned(),
                    bytes: csv.into_bytes(),
                });
            }
            arts
        }
        Command::Bounds {
            gamma_grid,
            rate,
            entropy,
            delta,
            delta_p,
        } => {
            config.insert("gamma".into(), floats_value(&gamma_grid.0));
            config.insert("rate".into(), floats_value(&rate.0));
            config.insert("entropy".into(), floats_value(&entropy.0));
            config.insert("delta".into(), toml::Value::Float(*delta));
            config.insert("delta_p".into(), toml::Value::Float(*delta_p));
            vec![Artifact {
                path: out,
                bytes: bounds_table(&gamma_grid.0, &rate.0, &entropy.0, *delta, *delta_p)?,
            }]
        }
        Command::Figures { which, out_dir } => {
            config.insert("figure".into(), toml::Value::String(which.file_stem().into()));
            let list: Vec<FigureArg> = if *which == FigureArg::All {
                FigureArg::EACH.to_vec()
            } else {
                vec![*which]
            };
            list.into_iter()
                .map(|f| {
                    Ok(Artifact {
                        path: out_dir.join(format!("{}.csv", f.file_stem())).to_string_lossy().into_owned(),
                        bytes: figure(f)?,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(Outcome {
        artifacts,
        config,
        seeds,
        exit,
    })
}

pub fn mmse_table(dist: &Distribution, snr: &[f64]) -> Result<Vec<u8>> {
    let mut csv = Csv::new(&["snr", "mmse", "snr_mmse", "mutual_info"]);
    for p in scalar_channel::channel_curve(dist, snr)? {
        csv.floats(&[p.snr, p.mmse, p.snr * p.mmse, p.mutual_info]);
    }
    Ok(csv.into_bytes())
}

fn pairs(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

pub fn replica_table(dist: &Distribution, rates: &[f64], sigma2: &[f64]) -> Result<Vec<u8>> {
    let sols: Vec<replica::ReplicaSolution> = pairs(rates, sigma2)
        .par_iter()
        .map(|&(r, s)| replica::replica_mse(dist, r, s))
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&["R", "sigma2", "n_roots", "beta_star", "eta", "dl_mse", "dl_mse_over_sigma2"]);
    for s in sols {
        csv.row(&[
            Cell::F(s.rate),
            Cell::F(s.noise_var),
            Cell::I(s.roots.len() as i64),
            Cell::F(s.selected_beta),
            Cell::F(s.eta),
            Cell::F(s.dl_mse),
            Cell::F(s.dl_mse / s.noise_var),
        ]);
    }
    Ok(csv.into_bytes())
}

fn sensitivities(rates: &[f64]) -> Result<Vec<Sensitivities>> {
    rates.par_iter().map(|&r| gaussian_closedform::gaussian_sensitivities(r)).collect()
}

pub fn gaussian_table(rates: &[f64], sigma2: &[f64]) -> Result<Vec<u8>> {
    let sens = sensitivities(rates)?;
    let mut csv = Csv::new(&["R", "sigma2", "d_star", "d_star_linear", "d_l", "zeta_star", "zeta_star_l", "zeta_l"]);
    for (&r, z) in rates.iter().zip(&sens) {
        for &s in sigma2 {
            let p = gaussian_closedform::gaussian_curves(r, s)?;
            csv.floats(&[r, s, p.d_star, p.d_star_linear, p.d_l, z.zeta_star, z.zeta_star_linear, z.zeta_l]);
        }
    }
    Ok(csv.into_bytes())
}

pub fn thresholds_table(family: FamilyArg, gammas: &[f64]) -> Result<Vec<u8>> {
    let single = match family {
        FamilyArg::Pm => SignalFamily::Pm,
        FamilyArg::Plus => SignalFamily::Plus,
        FamilyArg::Simple => SignalFamily::Simple,
        FamilyArg::All => {
            let mut csv = Csv::new(&["gamma", "optimal", "r_pm", "r_plus", "r_simple"]);
            for r in algo_thresholds::phase_diagram(gammas)? {
                csv.floats(&[r.gamma, r.optimal, r.r_pm, r.r_plus, r.r_simple]);
            }
            return Ok(csv.into_bytes());
        }
    };
    let curve = algo_thresholds::threshold_curve(single, gammas)?;
    let mut csv = Csv::new(&["gamma", "threshold", "alpha"]);
    for i in 0..gammas.len() {
        csv.floats(&[curve.gammas[i], curve.thresholds[i], curve.optimizer_alphas[i]]);
    }
    Ok(csv.into_bytes())
}

pub fn se_table(mix: &MixtureDistribution, rates: &[f64], sigma2: &[f64], alpha: Option<f64>) -> Result<Vec<u8>> {
    let sols: Vec<(f64, f64, state_evolution::StateEvolutionSolution)> = pairs(rates, sigma2)
        .par_iter()
        .map(|&(r, s)| {
            let sol = match alpha {
                Some(a) => state_evolution::solve_se(mix, r, s, a)?,
                None => state_evolution::optimize_alpha(mix, r, s)?,
            };
            Ok((r, s, sol))
        })
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&["R", "sigma2", "alpha_star", "tau_sq", "mse", "mse_over_sigma2"]);
    for (r, s, sol) in sols {
        csv.floats(&[r, s, sol.alpha, sol.tau_star_sq, sol.mse, sol.mse / s]);
    }
    Ok(csv.into_bytes())
}

pub fn bounds_table(gammas: &[f64], rates: &[f64], entropies: &[f64], delta: f64, delta_p: f64) -> Result<Vec<u8>> {
    let mut csv = Csv::new(&["gamma", "R", "H", "L", "sensitivity_bound", "t"]);
    for &g in gammas {
        for &r in rates {
            for &h in entropies {
                let b = bounds::achievability_bound(g, h, r)?;
                // An unsatisfiable shrinkage inequality is reported as nan.
                let t = match bounds::min_shrinkage_t(g, h, r, delta, delta_p) {
                    Ok(t) => t,
                    Err(Error::Unsatisfiable(_)) => f64::NAN,
                    Err(e) => return Err(e),
                };
                csv.floats(&[g, r, h, b.lipschitz, b.sensitivity_bound, t]);
            }
        }
    }
    Ok(csv.into_bytes())
}

/// Rate grid shared by the rate-axis figures.
fn rate_axis() -> Vec<f64> {
    parse_grid("lin:0.05:5:100").expect("static grid")
}

pub const CANTOR_FIGURE_RATE: f64 = 0.632;

pub fn cantor_figure_noise_var() -> f64 {
    3f64.powi(-14)
}

pub fn figure(which: FigureArg) -> Result<Vec<u8>> {
    match which {
        FigureArg::Plot => {
            let snr = parse_grid("log:1e-2:1e4:60")?;
            let sigma2: Vec<f64> = snr.iter().map(|s| 1.0 / s).collect();
            gaussian_table(&[0.3, 1.0, 5.0], &sigma2)
        }
        FigureArg::PlotSnr => gaussian_table(&rate_axis(), &[1.0]),
        FigureArg::Worstsens => {
            let rates = rate_axis();
            let mut csv = Csv::new(&["R", "zeta_star", "zeta_star_l", "zeta_l"]);
            for (r, z) in rates.iter().zip(sensitivities(&rates)?) {
                csv.floats(&[*r, z.zeta_star, z.zeta_star_linear, z.zeta_l]);
            }
            Ok(csv.into_bytes())
        }
        FigureArg::Dmm => thresholds_table(FamilyArg::All, &parse_grid("lin:0.01:0.99:99")?),
        FigureArg::NoisySparse => {
            let gamma = 0.1;
            let dist = Distribution::standard_sparse_gaussian(gamma);
            let mut csv = Csv::new(&["R", "optimal", "lasso"]);
            for r in parse_grid("lin:0.05:1:96")? {
                csv.floats(&[
                    r,
                    replica::sensitivity_asymptote(&dist, r),
                    algo_thresholds::lasso_sensitivity(gamma, r)?,
                ]);
            }
            Ok(csv.into_bytes())
        }
        FigureArg::Cantor => {
            let dist = Distribution::standard_cantor();
            let (rate, s2) = (CANTOR_FIGURE_RATE, cantor_figure_noise_var());
            let roots = replica::find_roots(&dist, rate, s2)?;
            let sol = replica::solution_from_roots(&dist, rate, s2, roots)?;
            let chosen = sol.selected_index();
            let mut csv = Csv::new(&["root", "beta", "eta", "mmse", "free_energy", "selected"]);
            for (i, (&b, &g)) in sol.roots.iter().zip(&sol.free_energies).enumerate() {
                csv.row(&[
                    Cell::I(i as i64),
                    Cell::F(b),
                    Cell::F(b * s2 / rate),
                    Cell::F(scalar_channel::mmse(&dist, b)?),
                    Cell::F(g),
                    Cell::I((i == chosen) as i64),
                ]);
            }
            Ok(csv.into_bytes())
        }
        FigureArg::All => Err(Error::InvalidArgument("`all` is not a single figure".into())),
    }
}

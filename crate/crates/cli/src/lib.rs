//! Command implementations behind the `asynch` binary.
//!
//! Each command reads a flat TOML config (see [`asynch_core::config`]) and
//! renders its result as CSV or JSON text. Rendering is deterministic: the
//! same config and seed give byte-identical output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use asynch_core::capacity::compute_capacity;
use asynch_core::config::{Config, DEFAULT_NUM_POINTS};
use asynch_core::exponents::{
    achievable_curve, achievable_exponent, best_preamble_letter, default_grid_resolution,
    letter_exponents, rate_grid, training_bound_curve, ExponentCurve, TrainingBound,
};
use asynch_core::format::{fmt_real, serialize_ext, serialize_opt_ext};
use asynch_core::sim::{
    delay_growth_experiment, growth_threshold, run_experiment, Budget, GrowthRow,
};
use asynch_core::validation::{validate, ValidationOptions, ValidationReport};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Capacity,
    Bounds,
    Curves,
    Simulate,
    DelayGrowth,
    ValidateOracles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// One invocation: what to run, on which config, and where to write it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: PathBuf,
    pub output_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Format,
    pub trials: Option<usize>,
    pub budget: Option<u64>,
    /// Adds bit-valued copies of capacity and exponents to the output.
    pub bits: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] asynch_core::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

/// Rendered output of a command. `success` is false when an embedded
/// validation failed; the text is still worth writing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            success: true,
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Checks that the config can be read and the output location exists.
pub fn validate_paths(m: &RunManifest) -> Result<(), CliError> {
    if !m.config_path.is_file() {
        return Err(io_error(&m.config_path, "config file not found"));
    }
    if let Some(out) = &m.output_path {
        if out.is_dir() {
            return Err(io_error(out, "output path is a directory"));
        }
        let parent = out.parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(parent) = parent {
            if !parent.is_dir() {
                return Err(io_error(out, "output directory does not exist"));
            }
        }
    }
    Ok(())
}

pub fn load_config(m: &RunManifest) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(&m.config_path).map_err(|e| io_error(&m.config_path, e))?;
    let mut cfg = Config::parse(&text)?;
    if let Some(s) = m.seed {
        cfg.seed = Some(s);
    }
    if let Some(t) = m.trials {
        cfg.trials = Some(t);
    }
    if let Some(b) = m.budget {
        cfg.budget = Some(b);
    }
    Ok(cfg)
}

/// Runs the command and renders its output; writes nothing.
pub fn execute(m: &RunManifest) -> Result<Outcome, CliError> {
    validate_paths(m)?;
    let cfg = load_config(m)?;
    match m.command {
        Command::Capacity => cmd_capacity(&cfg, m.format, m.bits),
        Command::Bounds => cmd_bounds(&cfg, m.format, m.bits),
        Command::Curves => cmd_curves(&cfg, m.format),
        Command::Simulate => cmd_simulate(&cfg, m.format),
        Command::DelayGrowth => cmd_delay_growth(&cfg, m.format),
        Command::ValidateOracles => cmd_validate_oracles(&cfg, m.format),
    }
}

/// Runs the command and writes the output to the manifest's path, or
/// returns it for printing when no path is set.
pub fn run(m: &RunManifest) -> Result<Outcome, CliError> {
    let outcome = execute(m)?;
    if let Some(out) = &m.output_path {
        std::fs::write(out, &outcome.text).map_err(|e| io_error(out, e))?;
    }
    Ok(outcome)
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn join_probs(p: &[f64]) -> String {
    p.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(" ")
}

fn to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

pub fn cmd_capacity(cfg: &Config, format: Format, bits: bool) -> Result<Outcome, CliError> {
    let ch = cfg.channel()?;
    let r = compute_capacity(&ch, cfg.tolerance())?;
    Ok(Outcome::ok(match format {
        Format::Json => {
            let mut v = serde_json::to_value(&r).expect("capacity serializes");
            v["channel_digest"] = json!(ch.digest());
            if bits {
                v["capacity_bits"] = json!(to_bits(r.capacity_nats));
            }
            pretty(&v)
        }
        Format::Csv => {
            let mut out = String::from("capacity_nats,gap,iterations,input_dist,output_dist");
            out.push_str(if bits { ",capacity_bits\n" } else { "\n" });
            let _ = write!(
                out,
                "{},{},{},{},{}",
                fmt_real(r.capacity_nats),
                fmt_real(r.gap),
                r.iterations,
                join_probs(r.input_dist.probs()),
                join_probs(r.output_dist.probs())
            );
            if bits {
                let _ = write!(out, ",{}", fmt_real(to_bits(r.capacity_nats)));
            }
            out.push('\n');
            out
        }
    }))
}

#[derive(Debug, Serialize)]
struct Bounds {
    channel_digest: String,
    capacity_nats: f64,
    #[serde(serialize_with = "serialize_ext")]
    training_constant: f64,
    degenerate: bool,
    preamble_letter: usize,
    letter_exponents: Vec<ExtValue>,
    /// Achievable exponent at the capacity-achieving input law.
    #[serde(serialize_with = "serialize_ext")]
    achievable_at_capacity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    capacity_bits: Option<f64>,
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "serialize_opt_ext"
    )]
    training_constant_bits: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(transparent)]
struct ExtValue(#[serde(serialize_with = "serialize_ext")] f64);

pub fn cmd_bounds(cfg: &Config, format: Format, bits: bool) -> Result<Outcome, CliError> {
    let ch = cfg.channel()?;
    let tol = cfg.tolerance();
    let cap = compute_capacity(&ch, tol)?;
    let bound = TrainingBound::new(&ch, tol)?;
    let b = Bounds {
        channel_digest: ch.digest(),
        capacity_nats: cap.capacity_nats,
        training_constant: bound.constant,
        degenerate: bound.is_degenerate(),
        preamble_letter: best_preamble_letter(&ch, tol)?,
        letter_exponents: letter_exponents(&ch, tol)?
            .into_iter()
            .map(ExtValue)
            .collect(),
        achievable_at_capacity: achievable_exponent(&ch, &cap.input_dist, tol)?,
        capacity_bits: bits.then(|| to_bits(cap.capacity_nats)),
        training_constant_bits: bits.then(|| to_bits(bound.constant)),
    };
    Ok(Outcome::ok(match format {
        Format::Json => pretty(&b),
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            let _ = writeln!(out, "channel_digest,{}", b.channel_digest);
            let _ = writeln!(out, "capacity_nats,{}", fmt_real(b.capacity_nats));
            let _ = writeln!(out, "training_constant,{}", fmt_real(b.training_constant));
            let _ = writeln!(out, "degenerate,{}", b.degenerate);
            let _ = writeln!(out, "preamble_letter,{}", b.preamble_letter);
            for (x, e) in b.letter_exponents.iter().enumerate() {
                let _ = writeln!(out, "letter_exponent_{x},{}", fmt_real(e.0));
            }
            let _ = writeln!(
                out,
                "achievable_at_capacity,{}",
                fmt_real(b.achievable_at_capacity)
            );
            if let (Some(c), Some(k)) = (b.capacity_bits, b.training_constant_bits) {
                let _ = writeln!(out, "capacity_bits,{}", fmt_real(c));
                let _ = writeln!(out, "training_constant_bits,{}", fmt_real(k));
            }
            out
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub rate_nats: f64,
    #[serde(serialize_with = "serialize_ext")]
    pub alpha_thm1: f64,
    #[serde(serialize_with = "serialize_ext")]
    pub alpha_thm2_training: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub channel_digest: String,
    pub capacity_nats: f64,
    #[serde(serialize_with = "serialize_ext")]
    pub training_constant: f64,
    pub degenerate: bool,
    /// Largest grid rate at which the training bound still exceeds the
    /// achievable curve.
    pub crossing_rate: Option<f64>,
    pub rows: Vec<CurveRow>,
    pub achievable: ExponentCurve,
    pub training: ExponentCurve,
}

/// Both curves sampled on a shared grid of rates from 0 to `C`.
pub fn curve_table(cfg: &Config) -> Result<CurveTable, CliError> {
    let ch = cfg.channel()?;
    let tol = cfg.tolerance();
    let points = cfg.num_points.unwrap_or(DEFAULT_NUM_POINTS);
    let resolution = cfg
        .grid_resolution
        .unwrap_or_else(|| default_grid_resolution(ch.inputs()));
    let achievable = achievable_curve(&ch, resolution, tol)?;
    let training = training_bound_curve(&ch, points, tol)?;
    let bound = TrainingBound::new(&ch, tol)?;
    let rows: Vec<CurveRow> = rate_grid(bound.capacity, points)
        .into_iter()
        .map(|r| CurveRow {
            rate_nats: r,
            alpha_thm1: achievable.value_at(r),
            alpha_thm2_training: bound.alpha_at(r),
        })
        .collect();
    let crossing_rate = rows
        .iter()
        .filter(|r| r.alpha_thm2_training > r.alpha_thm1)
        .map(|r| r.rate_nats)
        .next_back();
    Ok(CurveTable {
        channel_digest: ch.digest(),
        capacity_nats: bound.capacity,
        training_constant: bound.constant,
        degenerate: bound.is_degenerate(),
        crossing_rate,
        rows,
        achievable,
        training,
    })
}

pub fn cmd_curves(cfg: &Config, format: Format) -> Result<Outcome, CliError> {
    let t = curve_table(cfg)?;
    Ok(Outcome::ok(match format {
        Format::Json => pretty(&t),
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# channel_digest={} capacity_nats={} training_constant={} degenerate={} crossing_rate={}",
                t.channel_digest,
                fmt_real(t.capacity_nats),
                fmt_real(t.training_constant),
                t.degenerate,
                t.crossing_rate.map_or_else(|| "none".to_string(), fmt_real)
            );
            out.push_str("rate_nats,alpha_thm1,alpha_thm2_training\n");
            for r in &t.rows {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    fmt_real(r.rate_nats),
                    fmt_real(r.alpha_thm1),
                    fmt_real(r.alpha_thm2_training)
                );
            }
            out
        }
    }))
}

pub fn cmd_simulate(cfg: &Config, format: Format) -> Result<Outcome, CliError> {
    let exp = cfg.experiment()?;
    let report = run_experiment(&exp)?;
    Ok(Outcome::ok(match format {
        Format::Json => pretty(&report),
        Format::Csv => format!(
            "{}\n{}\n",
            asynch_core::sim::ExperimentReport::CSV_HEADER,
            report.csv_row()
        ),
    }))
}

#[derive(Debug, Serialize)]
struct GrowthTable {
    channel_digest: String,
    eta: f64,
    alpha: f64,
    /// Smallest admissible `alpha`.
    alpha_threshold: f64,
    trials: usize,
    budget: Budget,
    rows: Vec<GrowthRow>,
}

pub fn cmd_delay_growth(cfg: &Config, format: Format) -> Result<Outcome, CliError> {
    let g = cfg.growth()?;
    let rows = delay_growth_experiment(&g)?;
    let t = GrowthTable {
        channel_digest: g.channel.digest(),
        eta: g.eta,
        alpha: g.alpha,
        alpha_threshold: growth_threshold(&g.channel, g.eta)?,
        trials: g.trials,
        budget: g.budget,
        rows,
    };
    Ok(Outcome::ok(match format {
        Format::Json => pretty(&t),
        Format::Csv => {
            let mut out = String::from("n,level,mean_delay,error_rate,rate_nats\n");
            for r in &t.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n,
                    r.level,
                    fmt_real(r.mean_delay),
                    fmt_real(r.error_rate),
                    r.rate_nats
                        .map_or_else(|| "undefined".to_string(), fmt_real)
                );
            }
            out
        }
    }))
}

pub fn validation_options(cfg: &Config) -> ValidationOptions {
    let d = ValidationOptions::default();
    ValidationOptions {
        tolerance: cfg.tolerance(),
        minimax_step: cfg.minimax_step.unwrap_or(d.minimax_step),
        oracle_step: cfg.oracle_step.unwrap_or(d.oracle_step),
        n: cfg.n.unwrap_or(d.n),
        eta: cfg.eta.unwrap_or(d.eta),
        alpha: cfg.alpha.unwrap_or(d.alpha),
        messages: cfg.messages.unwrap_or(d.messages),
        probes: cfg.probes.unwrap_or(d.probes),
        replays: cfg.replays.unwrap_or(d.replays),
        seed: cfg.seed(),
        corrupt_reduction: cfg.corrupt_reduction.unwrap_or(false),
    }
}

pub fn validation_report(cfg: &Config) -> Result<ValidationReport, CliError> {
    Ok(validate(&cfg.channel()?, &validation_options(cfg))?)
}

pub fn cmd_validate_oracles(cfg: &Config, format: Format) -> Result<Outcome, CliError> {
    let report = validation_report(cfg)?;
    let text = match format {
        Format::Json => pretty(&json!({
            "passed": report.passed(),
            "checks": report.checks,
        })),
        Format::Csv => report.to_csv(),
    };
    Ok(Outcome {
        text,
        success: report.passed(),
    })
}

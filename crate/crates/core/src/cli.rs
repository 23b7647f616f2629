//! Command-line front end: `calibrate`, `simulate`, `replay` and `report`.
//!
//! Exit codes are 0 on success, 1 when inputs fail validation and 2 when a
//! valid run fails.

use crate::calibration::{calibrate, load_calibration_csv, CalibrationError};
use crate::config::{load_json, ConfigError, LayoutDoc, SimConfigDoc};
use crate::io::{self, IoError, PeriodResultLine, RunSummary, SimulationSummary};
use crate::replay::{parse_replay_csv, run_replay, ReplayError};
use crate::simulator::{error_stats, run_batch, SimError, StepRecord};
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "ntcwla", version, about = "RSSI localization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit path-loss parameters from a `distance_cm,rssi_dbm` CSV.
    Calibrate(CalibrateArgs),
    /// Run the simulator from a JSON config.
    Simulate(SimulateArgs),
    /// Localize recorded packets period by period.
    Replay(ReplayArgs),
    /// Summarize a steps CSV, replay JSONL or summary JSON.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub csv: PathBuf,
    /// Rows at or below this RSSI are dropped.
    #[arg(long, default_value_t = -70.0, allow_hyphen_values = true)]
    pub mr_floor: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Replaces `rng_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dotted-path override such as `pipeline.rpn=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub packets: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    /// Layout JSON; a simulation config works too.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// JSON lines output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `.csv` steps file, `.jsonl` replay output or `.json` summary.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ReplayError> for CliError {
    fn from(e: ReplayError) -> Self {
        match e {
            ReplayError::Localize(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn input_err(path: &Path) -> impl Fn(IoError) -> CliError + '_ {
    move |e| CliError::Validation(format!("{}: {e}", path.display()))
}

fn output_err(e: IoError) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Run a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Calibrate(a) => cmd_calibrate(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Replay(a) => cmd_replay(&a, out),
        Command::Report(a) => cmd_report(&a, out),
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_calibrate(a: &CalibrateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load_calibration_csv(&a.csv, a.mr_floor)
        .map_err(|e| CliError::Validation(format!("{}: {e}", a.csv.display())))?;
    let report = calibrate(&loaded.samples)?;
    let file = io::create(&a.out).map_err(output_err)?;
    io::write_params_json(file, &report.selected).map_err(output_err)?;
    let mut text = format!(
        "{} samples kept, {} dropped at or below {} dBm\n\n",
        loaded.samples.len(),
        loaded.dropped,
        a.mr_floor
    );
    text.push_str(&report.render_table());
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run_file_stem(n_cap: Option<usize>) -> String {
    match n_cap {
        Some(n) => format!("n{n}"),
        None => "all".into(),
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut overrides = a.overrides.clone();
    if let Some(seed) = a.seed {
        overrides.push(format!("rng_seed={seed}"));
    }
    let doc: SimConfigDoc = load_json(&a.config, &overrides)?;
    let configs = doc.to_configs()?;
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Validation(format!("{}: {e}", a.out_dir.display())))?;

    let mut runs = Vec::new();
    for (cfg, outcome) in configs.iter().zip(run_batch(&configs)) {
        let outcome = outcome?;
        let stem = run_file_stem(cfg.n_cap);
        let steps_file = format!("steps_{stem}.csv");
        let trace_file = format!("period_trace_{stem}.csv");
        io::write_steps_csv(
            io::create(a.out_dir.join(&steps_file)).map_err(output_err)?,
            &outcome.steps,
        )
        .map_err(output_err)?;
        io::write_period_trace_csv(
            io::create(a.out_dir.join(&trace_file)).map_err(output_err)?,
            &outcome.period_checks,
        )
        .map_err(output_err)?;
        runs.push(RunSummary {
            n_cap: cfg.n_cap,
            rng_seed: cfg.rng_seed,
            steps: outcome.steps.len(),
            steps_file,
            period_trace_file: trace_file,
            summary: outcome.summary,
        });
    }
    let summary = SimulationSummary {
        name: doc.name.clone(),
        runs,
    };
    let file = io::create(a.out_dir.join("summary.json")).map_err(output_err)?;
    serde_json::to_writer_pretty(file, &summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.write_all(render_summary(&summary).as_bytes())
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_replay(a: &ReplayArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc: LayoutDoc = load_json(&a.config, &a.overrides)?;
    let layout = doc.to_layout()?;
    let params = io::read_params_json(io::open(&a.params).map_err(input_err(&a.params))?)
        .map_err(input_err(&a.params))?;
    let file = io::open(&a.packets).map_err(input_err(&a.packets))?;
    let events = parse_replay_csv(file)
        .map_err(|e| CliError::Validation(format!("{}: {e}", a.packets.display())))?;
    let lines = run_replay(&events, &layout, &params)?;
    match &a.out {
        Some(path) => {
            io::write_period_lines(io::create(path).map_err(output_err)?, &lines)
                .map_err(output_err)?;
            out.write_all(render_period_lines(&lines).as_bytes())
        }
        None => {
            io::write_period_lines(&mut *out, &lines).map_err(output_err)?;
            Ok(())
        }
    }
    .map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ext = a.input.extension().and_then(|e| e.to_str()).unwrap_or("");
    let file = io::open(&a.input).map_err(input_err(&a.input))?;
    let text = match ext {
        "csv" => {
            let steps = io::read_steps_csv(file).map_err(input_err(&a.input))?;
            render_steps(&steps)?
        }
        "jsonl" => {
            let lines = io::read_period_lines(BufReader::new(file)).map_err(input_err(&a.input))?;
            render_period_lines(&lines)
        }
        "json" => {
            let summary: SimulationSummary = serde_json::from_reader(file)
                .map_err(|e| CliError::Validation(format!("{}: {e}", a.input.display())))?;
            render_summary(&summary)
        }
        _ => {
            return Err(CliError::Validation(format!(
                "{}: expected a .csv, .jsonl or .json file",
                a.input.display()
            )))
        }
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn render_summary(s: &SimulationSummary) -> String {
    let mut text = String::new();
    if let Some(name) = &s.name {
        let _ = writeln!(text, "{name}");
    }
    let _ = writeln!(
        text,
        "{:>6} {:>6} {:>10} {:>10} {:>10} {:>9} {:>8}",
        "n_cap", "steps", "mean_cm", "rmse_cm", "max_cm", "localized", "skipped"
    );
    for r in &s.runs {
        let cap = r.n_cap.map_or("all".to_string(), |n| n.to_string());
        let _ = writeln!(
            text,
            "{:>6} {:>6} {:>10.3} {:>10.3} {:>10.3} {:>9} {:>8}",
            cap,
            r.steps,
            r.summary.mean_cm,
            r.summary.rmse_cm,
            r.summary.max_cm,
            r.summary.localized,
            r.summary.skipped
        );
    }
    text
}

fn render_steps(steps: &[StepRecord]) -> Result<String, CliError> {
    let s = error_stats(steps).map_err(|e| CliError::Validation(e.to_string()))?;
    let mean_ann = steps.iter().map(|r| r.ann as f64).sum::<f64>() / steps.len() as f64;
    Ok(format!(
        "steps {}\nlocalized {}\nskipped {}\nmean_cm {:.3}\nrmse_cm {:.3}\nmax_cm {:.3}\nmean_ann {:.2}\n",
        steps.len(),
        s.localized,
        s.skipped,
        s.mean_cm,
        s.rmse_cm,
        s.max_cm,
        mean_ann
    ))
}

pub fn render_period_lines(lines: &[PeriodResultLine]) -> String {
    let localized = lines.iter().filter(|l| l.estimate.is_some()).count();
    let mut text = format!(
        "periods {}\nlocalized {}\nskipped {}\n",
        lines.len(),
        localized,
        lines.len() - localized
    );
    for l in lines {
        let _ = match l.estimate {
            Some([x, y]) => writeln!(
                text,
                "period {:>4}: ({x:.2}, {y:.2}) ann={} refs={}/{}",
                l.period, l.ann, l.n_after_filter, l.n_references
            ),
            None => writeln!(
                text,
                "period {:>4}: skipped ({})",
                l.period,
                l.skipped.as_deref().unwrap_or("no estimate")
            ),
        };
    }
    text
}

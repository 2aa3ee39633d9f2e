//! Command-line driver: configuration ingestion, campaign orchestration,
//! and result serialization (CSV records, JSON summaries).
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 I/O
//! error.

use clap::{Parser, Subcommand};
use prs_radar::montecarlo::{
    aggregate, link_budget, roc_sweep, run_campaign, DropRecord, MetricsSummary, RunConfig,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "prs-radar", version, about = "Monostatic 5G NR PRS radar simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write records.csv, summary.json and
    /// config.resolved.json into the output directory.
    Run {
        /// JSON configuration file; missing keys take deployment defaults.
        config: PathBuf,
        /// Output directory (created if absent).
        #[arg(long)]
        out: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override drops per configuration.
        #[arg(long)]
        drops: Option<usize>,
    },
    /// Run paired campaigns with and without a target and write roc.csv.
    Roc {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Lowest threshold of the grid, dB.
        #[arg(long, default_value_t = 0.0)]
        eta_min: f64,
        /// Highest threshold of the grid, dB.
        #[arg(long, default_value_t = 10.0)]
        eta_max: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 41)]
        eta_steps: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        drops: Option<usize>,
    },
    /// Merge record files and print / write the metrics summary.
    Summarize {
        /// One or more records.csv files.
        files: Vec<PathBuf>,
        /// Optional summary.json destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Runtime(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) | CliError::Io(m) => m,
        }
    }
}

fn io_err(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

#[derive(Serialize)]
struct RunMetadata {
    tool_version: &'static str,
    config_hash: String,
    master_seed: u64,
    timestamp_utc: String,
    wall_seconds: f64,
    tx_power_dbm: f64,
    noise_per_tone_dbm: f64,
}

#[derive(Serialize)]
struct SummaryDocument {
    metadata: RunMetadata,
    summary: MetricsSummary,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            drops,
        } => command_run(&config, &out, seed, drops),
        Command::Roc {
            config,
            out,
            eta_min,
            eta_max,
            eta_steps,
            seed,
            drops,
        } => command_roc(&config, &out, eta_min, eta_max, eta_steps, seed, drops),
        Command::Summarize { files, out } => command_summarize(&files, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

/// Parse and validate a configuration file; unknown keys are rejected and
/// missing keys resolve to deployment defaults.
fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

fn apply_overrides(config: &mut RunConfig, seed: Option<u64>, drops: Option<usize>) {
    if let Some(s) = seed {
        config.master_seed = s;
    }
    if let Some(d) = drops {
        config.drops_per_config = d;
    }
}

fn write_records_csv(path: &Path, records: &[DropRecord]) -> Result<(), CliError> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| io_err(&format!("writing {}", path.display()), e))?;
    for record in records {
        writer
            .serialize(record)
            .map_err(|e| io_err("serializing record", e))?;
    }
    writer.flush().map_err(|e| io_err("flushing records.csv", e))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| io_err("serializing JSON", e))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| io_err(&format!("writing {}", path.display()), e))
}

fn prepare_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| io_err(&format!("creating {}", out.display()), e))
}

fn metadata(config: &RunConfig, started: Instant) -> RunMetadata {
    let budget = link_budget(config);
    RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash(),
        master_seed: config.master_seed,
        timestamp_utc: chrono::Utc::now().to_rfc3339(),
        wall_seconds: started.elapsed().as_secs_f64(),
        tx_power_dbm: budget.tx_power_dbm,
        noise_per_tone_dbm: budget.noise_per_tone_dbm,
    }
}

fn command_run(
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    drops: Option<usize>,
) -> Result<(), CliError> {
    let mut config = load_config(config_path)?;
    apply_overrides(&mut config, seed, drops);
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    prepare_out_dir(out)?;

    let started = Instant::now();
    let records = run_campaign(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
    let summary = aggregate(&records).map_err(|e| CliError::Runtime(e.to_string()))?;

    write_json(&out.join("config.resolved.json"), &config)?;
    write_records_csv(&out.join("records.csv"), &records)?;
    write_json(
        &out.join("summary.json"),
        &SummaryDocument {
            metadata: metadata(&config, started),
            summary,
        },
    )?;
    eprintln!(
        "wrote {} records to {} (config {})",
        records.len(),
        out.display(),
        config.hash()
    );
    Ok(())
}

#[derive(Serialize)]
struct RocRow {
    eta_db: f64,
    p_fa: f64,
    p_d: f64,
}

#[allow(clippy::too_many_arguments)]
fn command_roc(
    config_path: &Path,
    out: &Path,
    eta_min: f64,
    eta_max: f64,
    eta_steps: usize,
    seed: Option<u64>,
    drops: Option<usize>,
) -> Result<(), CliError> {
    if eta_steps == 0 || (eta_steps > 1 && !(eta_max > eta_min)) {
        return Err(CliError::Config(
            "eta grid needs eta_steps >= 1 and eta_max > eta_min".into(),
        ));
    }
    let mut config = load_config(config_path)?;
    apply_overrides(&mut config, seed, drops);
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    prepare_out_dir(out)?;
    let started = Instant::now();

    let mut with_cfg = config.clone();
    with_cfg.with_target = true;
    let mut without_cfg = config.clone();
    without_cfg.with_target = false;
    let records_with = run_campaign(&with_cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let records_without =
        run_campaign(&without_cfg).map_err(|e| CliError::Runtime(e.to_string()))?;

    let grid: Vec<f64> = (0..eta_steps)
        .map(|i| {
            if eta_steps == 1 {
                eta_min
            } else {
                eta_min + (eta_max - eta_min) * i as f64 / (eta_steps - 1) as f64
            }
        })
        .collect();
    let roc =
        roc_sweep(&records_with, &records_without, &grid).map_err(|e| CliError::Runtime(e.to_string()))?;

    let roc_path = out.join("roc.csv");
    let mut writer = csv::Writer::from_path(&roc_path)
        .map_err(|e| io_err(&format!("writing {}", roc_path.display()), e))?;
    for point in &roc {
        writer
            .serialize(RocRow {
                eta_db: point.eta_db,
                p_fa: point.p_fa,
                p_d: point.p_d,
            })
            .map_err(|e| io_err("serializing roc row", e))?;
    }
    writer.flush().map_err(|e| io_err("flushing roc.csv", e))?;

    let mut summary = aggregate(&records_with).map_err(|e| CliError::Runtime(e.to_string()))?;
    summary.roc = Some(roc);
    write_json(&out.join("config.resolved.json"), &config)?;
    write_json(
        &out.join("summary.json"),
        &SummaryDocument {
            metadata: metadata(&config, started),
            summary,
        },
    )?;
    eprintln!(
        "wrote {} ROC points to {} (config {})",
        grid.len(),
        out.display(),
        config.hash()
    );
    Ok(())
}

fn read_records_csv(path: &Path) -> Result<Vec<DropRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    let expected = [
        "drop_id",
        "scenario",
        "h_uav_m",
        "target_present",
        "los",
        "true_x_m",
        "true_y_m",
        "true_z_m",
        "detected",
        "par_db",
        "est_x_m",
        "est_y_m",
        "est_z_m",
        "position_error_m",
        "error",
        "config_hash",
    ];
    let headers = reader
        .headers()
        .map_err(|e| io_err("reading CSV header", e))?
        .clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(CliError::Config(format!(
            "{}: unexpected schema {:?}, expected {:?}",
            path.display(),
            found,
            expected
        )));
    }
    let mut records = Vec::new();
    for row in reader.deserialize() {
        let record: DropRecord =
            row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        records.push(record);
    }
    Ok(records)
}

fn command_summarize(files: &[PathBuf], out: Option<&Path>) -> Result<(), CliError> {
    if files.is_empty() {
        return Err(CliError::Config("summarize needs at least one records file".into()));
    }
    let mut records = Vec::new();
    for file in files {
        records.extend(read_records_csv(file)?);
    }
    let summary = aggregate(&records).map_err(|e| CliError::Runtime(e.to_string()))?;

    println!("{:7} {:>6} {:>7} {:>9} {:>7} {:>8} {:>8} {:>8}", "scen", "h[m]", "drops", "Pmd", "Pfa", "p50[m]", "p90[m]", "p99[m]");
    for g in &summary.groups {
        let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let (p50, p90, p99) = g
            .position_error
            .map(|e| {
                (
                    format!("{:.2}", e.p50_m),
                    format!("{:.2}", e.p90_m),
                    format!("{:.2}", e.p99_m),
                )
            })
            .unwrap_or_else(|| ("-".into(), "-".into(), "-".into()));
        println!(
            "{:7} {:>6} {:>7} {:>9} {:>7} {:>8} {:>8} {:>8}",
            format!("{}", g.scenario),
            g.h_uav_m,
            g.n_drops,
            fmt_opt(g.miss_detection_prob),
            fmt_opt(g.false_alarm_rate),
            p50,
            p90,
            p99
        );
    }
    if let Some(path) = out {
        write_json(&path.to_path_buf(), &summary)?;
    }
    Ok(())
}

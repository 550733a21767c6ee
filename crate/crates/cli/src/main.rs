//! `gaugelab` command-line front end.

mod args;
mod commands;
mod config;
mod error;
mod record;
mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::record::{render_csv, Payload, ResultRecord, SCHEMA_VERSION};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GAUGELAB_OUT_DIR";

pub fn new_record(config: RunConfig, payload: Payload, wall_time_s: f64) -> ResultRecord {
    ResultRecord {
        schema_version: SCHEMA_VERSION.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        config,
        payload,
        wall_time_s,
    }
}

pub fn to_json(rec: &ResultRecord) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(rec).context("cannot serialize result record")?;
    s.push('\n');
    Ok(s)
}

/// Where the record goes: `--out`, else `$GAUGELAB_OUT_DIR/<subcommand>.<ext>`,
/// else standard output.
fn output_path(cfg: &RunConfig, ext: &str) -> Option<PathBuf> {
    cfg.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(|dir| PathBuf::from(dir).join(format!("{}.{ext}", cfg.subcommand)))
    })
}

fn run_single(cfg: RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool, CliError> {
    let start = Instant::now();
    let payload = commands::execute(&cfg)?;
    let failed = payload.failed();
    let format = cfg.resolved_format();
    let rec = new_record(cfg, payload, start.elapsed().as_secs_f64());
    let (text, ext) = match format {
        Format::Csv => (render_csv(&rec.payload), "csv"),
        _ => (to_json(&rec)?, "json"),
    };
    let summary = rec.payload.summary();
    match output_path(&rec.config, ext) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("cannot create {}", dir.display()))?;
            }
            sweep::write_atomic(&path, &text)?;
            let _ = writeln!(out, "{summary}");
            let _ = writeln!(out, "wrote {}", path.display());
        }
        None => {
            let _ = write!(out, "{text}");
            let _ = writeln!(err, "{summary}");
        }
    }
    Ok(failed)
}

fn run_sweep(cfg: RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let dir = cfg
        .output
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join("sweep")))
        .ok_or_else(|| CliError::Usage(format!("sweep needs --out <dir> or {OUT_DIR_ENV}")))?;
    let s = sweep::run_sweep(&cfg, &dir, out)?;
    let _ = writeln!(
        out,
        "{} points in {}: {} computed, {} already present, {} failed",
        s.points,
        dir.display(),
        s.computed,
        s.skipped,
        s.failed
    );
    Ok(s.failed > 0)
}

/// Parses `argv`, runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = cli.into_config().and_then(|cfg| {
        if cfg.subcommand == "sweep" {
            run_sweep(cfg, out)
        } else {
            run_single(cfg, out, err)
        }
    });
    match result {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            let kind = if e.exit_code() == 2 {
                "usage error"
            } else {
                "error"
            };
            let _ = writeln!(err, "{kind}: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let code = run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code)
}

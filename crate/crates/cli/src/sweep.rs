//! Grid sweeps over (a, g^2, L, N), one record file per point.
//!
//! Points run in a fixed order and a point whose record file already parses
//! is skipped, so an interrupted sweep resumes where it stopped.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;

use crate::commands::{check_grid, execute, validate};
use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::record::{render_csv, ResultRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepSummary {
    pub points: usize,
    pub computed: usize,
    pub skipped: usize,
    pub failed: usize,
}

/// Per-point configurations in sweep order (a outermost, N innermost).
pub fn grid_points(cfg: &RunConfig) -> Result<Vec<RunConfig>, CliError> {
    let or_default = |g: &[f64], v: f64| if g.is_empty() { vec![v] } else { g.to_vec() };
    let a_grid = or_default(&cfg.a_grid, cfg.model.a);
    let g2_grid = or_default(&cfg.g2_grid, cfg.model.g2);
    let l_grid = if cfg.l_grid.is_empty() {
        vec![cfg.model.l]
    } else {
        cfg.l_grid.clone()
    };
    let n_grid = if cfg.n_grid.is_empty() {
        vec![cfg.model.n]
    } else {
        cfg.n_grid.clone()
    };
    check_grid("a-grid", &a_grid, |a| a > 0.0 && a <= 1.0)?;
    check_grid("g2-grid", &g2_grid, |g| g > 0.0)?;
    let mut points = Vec::new();
    for &a in &a_grid {
        for &g2 in &g2_grid {
            for &l in &l_grid {
                for &n in &n_grid {
                    let mut p = cfg.clone();
                    p.subcommand = cfg.task.name().to_string();
                    p.model.a = a;
                    p.model.g2 = g2;
                    p.model.l = l;
                    p.model.n = n;
                    p.output = None;
                    p.a_grid.clear();
                    p.g2_grid.clear();
                    p.l_grid.clear();
                    p.n_grid.clear();
                    validate(&p)?;
                    points.push(p);
                }
            }
        }
    }
    Ok(points)
}

pub fn point_file(dir: &Path, index: usize, p: &RunConfig) -> PathBuf {
    let m = &p.model;
    dir.join(format!(
        "{index:04}-{}-a{}-g2{}-L{}-N{}.json",
        p.subcommand, m.a, m.g2, m.l, m.n
    ))
}

fn completed(path: &Path) -> bool {
    fs::read_to_string(path)
        .ok()
        .and_then(|s| serde_json::from_str::<ResultRecord>(&s).ok())
        .is_some()
}

pub fn run_sweep(
    cfg: &RunConfig,
    dir: &Path,
    log: &mut dyn std::io::Write,
) -> Result<SweepSummary, CliError> {
    let points = grid_points(cfg)?;
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut summary = SweepSummary {
        points: points.len(),
        ..Default::default()
    };
    let mut records = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let path = point_file(dir, i, p);
        if completed(&path) {
            summary.skipped += 1;
            let text = fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let rec: ResultRecord =
                serde_json::from_str(&text).context("record changed while reading")?;
            summary.failed += usize::from(rec.payload.failed());
            records.push(rec);
            continue;
        }
        let start = Instant::now();
        let payload = execute(p)?;
        let rec = crate::new_record(p.clone(), payload, start.elapsed().as_secs_f64());
        write_atomic(&path, &crate::to_json(&rec)?)?;
        summary.computed += 1;
        summary.failed += usize::from(rec.payload.failed());
        let _ = writeln!(
            log,
            "[{}/{}] {}",
            i + 1,
            points.len(),
            rec.payload.summary()
        );
        records.push(rec);
    }
    if cfg.resolved_format() == Format::Csv {
        let mut out = String::new();
        for (i, rec) in records.iter().enumerate() {
            let body = render_csv(&rec.payload);
            let m = &rec.config.model;
            for (j, line) in body.lines().enumerate() {
                if j == 0 {
                    if i == 0 {
                        out.push_str(&format!("a,g2,L,N,{line}\n"));
                    }
                    continue;
                }
                out.push_str(&format!(
                    "{},{},{},{},{line}\n",
                    crate::record::num(m.a),
                    crate::record::num(m.g2),
                    m.l,
                    m.n
                ));
            }
        }
        write_atomic(&dir.join("summary.csv"), &out)?;
    }
    Ok(summary)
}

/// Writes through a temporary file so a partial record is never left behind.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move record into {}", path.display()))?;
    Ok(())
}

//! Command-line flags. Every flag is optional; unset flags leave the value
//! from the config file or the default in place.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gaugelab::action::FieldKind;
use gaugelab::GroupKind;

use crate::config::{Format, Links, RunConfig, Task, Theorem, Variant, WeightArg, WilsonMethod};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "gaugelab",
    version,
    about = "Partition functions and stability bounds for bosonic lattice gauge models"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Site, bond, plaquette and retained-bond counts.
    LatticeInfo(Common),
    /// Single-bond integral z (wilson), z1 (quadratic) or z~ (restricted).
    ZBond {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bond: BondArgs,
    },
    /// Exact Gaussian Bose partition function for one gauge configuration.
    BoseExact {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bose: BoseArgs,
    },
    /// Pure-gauge partition function Z^w and Z_Y.
    WilsonMc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        wilson: WilsonArgs,
    },
    /// Check one of the stability bounds or auxiliary inequalities.
    VerifyBounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// w(beta) / beta^{N^2/2} against its small-beta limit.
    CueGue {
        #[command(flatten)]
        common: Common,
        /// Comma-separated beta values.
        #[arg(long, value_delimiter = ',')]
        beta_grid: Vec<f64>,
        #[arg(long, value_enum)]
        weight: Option<WeightArg>,
    },
    /// d = 2 free energy ln z - N^2 ln(g a) against its continuum limit.
    D2Limit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated lattice spacings.
        #[arg(long, value_delimiter = ',')]
        a_grid: Vec<f64>,
    },
    /// SU(2) gluon-coordinate integrals and single-bond bounds.
    Su2Check(Common),
    /// Run a task over a grid of (a, g2, L, N); one record per point.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        task: Option<Task>,
        #[arg(long, value_delimiter = ',')]
        a_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        g2_grid: Vec<f64>,
        #[arg(long = "L-grid", value_delimiter = ',')]
        l_grid: Vec<usize>,
        #[arg(long = "N-grid", value_delimiter = ',')]
        n_grid: Vec<usize>,
        #[command(flatten)]
        bond: BondArgs,
        #[command(flatten)]
        bose: BoseArgs,
        #[command(flatten)]
        wilson: WilsonArgs,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Config file with [model], [run], [options] and [grid] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension, 2 to 4.
    #[arg(long)]
    d: Option<usize>,
    /// Lattice side length.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Lattice spacing in (0, 1].
    #[arg(long)]
    a: Option<f64>,
    /// Gauge coupling g^2.
    #[arg(long)]
    g2: Option<f64>,
    /// Upper limit g0^2 of the coupling range.
    #[arg(long)]
    g0_sq: Option<f64>,
    #[arg(long)]
    kappa_u_sq: Option<f64>,
    #[arg(long)]
    m_u: Option<f64>,
    /// Matrix size N.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Flavours per colour.
    #[arg(long)]
    n_f: Option<usize>,
    /// u or su.
    #[arg(long, value_parser = parse_group)]
    group: Option<GroupKind>,
    /// real or complex Bose field.
    #[arg(long, value_parser = parse_field)]
    field: Option<FieldKind>,
    #[arg(long)]
    n_samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Quadrature nodes per axis.
    #[arg(long)]
    nodes: Option<usize>,
    /// Output file (a directory for sweep).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct BondArgs {
    #[arg(long, value_enum)]
    variant: Option<Variant>,
}

#[derive(Debug, Args)]
struct BoseArgs {
    /// Random Haar links (from the seed) or identity links.
    #[arg(long, value_enum)]
    links: Option<Links>,
}

#[derive(Debug, Args)]
struct WilsonArgs {
    #[arg(long, value_enum)]
    method: Option<WilsonMethod>,
    /// Sample only the retained bonds of the temporal gauge.
    #[arg(long)]
    gauge_fixed: Option<bool>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    theorem: Option<Theorem>,
    /// Retained links per plaquette for the quadratic lemma.
    #[arg(long)]
    k: Option<usize>,
}

fn parse_group(s: &str) -> Result<GroupKind, String> {
    s.parse().map_err(|e: gaugelab::Error| e.to_string())
}

fn parse_field(s: &str) -> Result<FieldKind, String> {
    s.parse().map_err(|e: gaugelab::Error| e.to_string())
}

macro_rules! set {
    ($($src:expr => $dst:expr),* $(,)?) => {
        $(if let Some(v) = $src { $dst = v; })*
    };
}

fn set_grid<T: Clone>(src: &[T], dst: &mut Vec<T>) {
    if !src.is_empty() {
        *dst = src.to_vec();
    }
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.model;
        set! {
            self.d => m.d, self.l => m.l, self.a => m.a, self.g2 => m.g2, self.g0_sq => m.g0_sq,
            self.kappa_u_sq => m.kappa_u_sq, self.m_u => m.m_u, self.n => m.n, self.n_f => m.n_f,
            self.group => m.group, self.field => m.field,
            self.n_samples => cfg.n_samples, self.seed => cfg.seed, self.workers => cfg.workers,
            self.nodes => cfg.nodes, self.format => cfg.format,
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
    }
}

impl BondArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(self.variant => cfg.variant);
    }
}

impl BoseArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(self.links => cfg.links);
    }
}

impl WilsonArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(self.method => cfg.method, self.gauge_fixed => cfg.gauge_fixed);
    }
}

impl BoundsArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(self.theorem => cfg.theorem, self.k => cfg.k);
    }
}

impl Cli {
    /// Defaults, then the config file, then explicit flags.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let (name, common) = match &self.command {
            Command::LatticeInfo(c) => ("lattice-info", c),
            Command::ZBond { common, .. } => ("z-bond", common),
            Command::BoseExact { common, .. } => ("bose-exact", common),
            Command::WilsonMc { common, .. } => ("wilson-mc", common),
            Command::VerifyBounds { common, .. } => ("verify-bounds", common),
            Command::CueGue { common, .. } => ("cue-gue", common),
            Command::D2Limit { common, .. } => ("d2-limit", common),
            Command::Su2Check(c) => ("su2-check", c),
            Command::Sweep { common, .. } => ("sweep", common),
        };
        let mut cfg = RunConfig::new(name);
        if let Some(path) = &common.config {
            cfg.apply_file(path)?;
        }
        common.apply(&mut cfg);
        match &self.command {
            Command::ZBond { bond, .. } => bond.apply(&mut cfg),
            Command::BoseExact { bose, .. } => bose.apply(&mut cfg),
            Command::WilsonMc { wilson, .. } => wilson.apply(&mut cfg),
            Command::VerifyBounds { bounds, .. } => bounds.apply(&mut cfg),
            Command::CueGue {
                beta_grid, weight, ..
            } => {
                set_grid(beta_grid, &mut cfg.beta_grid);
                set!(*weight => cfg.weight);
            }
            Command::D2Limit { a_grid, .. } => set_grid(a_grid, &mut cfg.a_grid),
            Command::Sweep {
                task,
                a_grid,
                g2_grid,
                l_grid,
                n_grid,
                bond,
                bose,
                wilson,
                bounds,
                ..
            } => {
                set!(*task => cfg.task);
                set_grid(a_grid, &mut cfg.a_grid);
                set_grid(g2_grid, &mut cfg.g2_grid);
                set_grid(l_grid, &mut cfg.l_grid);
                set_grid(n_grid, &mut cfg.n_grid);
                bond.apply(&mut cfg);
                bose.apply(&mut cfg);
                wilson.apply(&mut cfg);
                bounds.apply(&mut cfg);
            }
            Command::LatticeInfo(_) | Command::Su2Check(_) => {}
        }
        Ok(cfg)
    }
}

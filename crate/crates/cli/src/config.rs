//! Run configuration: defaults, the sectioned key-value config file, and
//! the command-line overrides applied on top.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use gaugelab::action::{FieldKind, ModelParams};
use gaugelab::partition::SingleBond;
use gaugelab::rmt::Weight;
use gaugelab::GroupKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// CSV for the limit sweeps, JSON otherwise.
    #[default]
    Auto,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
pub enum Theorem {
    /// Bose bounds 1 <= Z_B <= exp(c_B,u Lambda_s).
    #[default]
    #[serde(rename = "1")]
    #[value(name = "1")]
    Bose,
    /// Gauge bounds on Z_Y.
    #[serde(rename = "2")]
    #[value(name = "2")]
    Gauge,
    /// Combined bounds on Z.
    #[serde(rename = "3")]
    #[value(name = "3")]
    Combined,
    /// Quadratic plaquette lemma.
    #[serde(rename = "quadratic")]
    Quadratic,
    /// Scalar and norm inequalities.
    #[serde(rename = "elementary")]
    Elementary,
}

/// Computation run at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    ZBond,
    BoseExact,
    WilsonMc,
    #[default]
    VerifyBounds,
    Su2Check,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::ZBond => "z-bond",
            Task::BoseExact => "bose-exact",
            Task::WilsonMc => "wilson-mc",
            Task::VerifyBounds => "verify-bounds",
            Task::Su2Check => "su2-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WilsonMethod {
    #[default]
    Mc,
    /// Trapezoid rule over bond angles, U(1) only.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Links {
    /// Haar links drawn from the run seed.
    #[default]
    Random,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Wilson,
    Quadratic,
    Restricted,
}

impl From<Variant> for SingleBond {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Wilson => SingleBond::Wilson,
            Variant::Quadratic => SingleBond::Quadratic,
            Variant::Restricted => SingleBond::Restricted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WeightArg {
    Wilson,
    Quadratic,
}

impl From<WeightArg> for Weight {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Wilson => Weight::Wilson,
            WeightArg::Quadratic => Weight::Quadratic,
        }
    }
}

/// Everything a run depends on. Echoed verbatim into each result record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub model: ModelParams,
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub nodes: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub theorem: Theorem,
    /// Retained links per plaquette for the quadratic lemma.
    pub k: usize,
    pub variant: Variant,
    pub links: Links,
    pub method: WilsonMethod,
    pub gauge_fixed: bool,
    pub weight: WeightArg,
    pub task: Task,
    pub beta_grid: Vec<f64>,
    pub a_grid: Vec<f64>,
    pub g2_grid: Vec<f64>,
    #[serde(rename = "L_grid")]
    pub l_grid: Vec<usize>,
    #[serde(rename = "N_grid")]
    pub n_grid: Vec<usize>,
}

impl RunConfig {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            model: ModelParams::default(),
            n_samples: 10_000,
            seed: 1,
            workers: 1,
            nodes: 32,
            output: None,
            format: Format::Auto,
            theorem: Theorem::Bose,
            k: 4,
            variant: Variant::Wilson,
            links: Links::Random,
            method: WilsonMethod::Mc,
            gauge_fixed: true,
            weight: WeightArg::Wilson,
            task: Task::VerifyBounds,
            beta_grid: vec![1e-1, 1e-2, 1e-3, 1e-4],
            a_grid: vec![1e-1, 1e-2, 1e-3],
            g2_grid: Vec::new(),
            l_grid: Vec::new(),
            n_grid: Vec::new(),
        }
    }

    /// Output format after resolving `auto`.
    pub fn resolved_format(&self) -> Format {
        match self.format {
            Format::Auto if matches!(self.subcommand.as_str(), "cue-gue" | "d2-limit") => {
                Format::Csv
            }
            Format::Auto => Format::Json,
            f => f,
        }
    }

    /// Reads `path` and applies every key in it.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        self.apply_text(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses the config format:
    ///
    /// ```text
    /// # comment
    /// [model]
    /// d = 3
    /// L = 2
    /// [run]
    /// seed = 7
    /// ```
    ///
    /// Keys may use '-' or '_'; each key belongs to exactly one section.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |m: String| CliError::Usage(format!("line {}: {m}", i + 1));
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("malformed section header '{line}'")))?;
                let name = name.trim().to_ascii_lowercase();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(at(format!(
                        "unknown section [{name}] (expected one of {})",
                        SECTIONS.join(", ")
                    )));
                }
                section = Some(name);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim().replace('-', "_");
            let Some(sec) = &section else {
                return Err(at(format!("key '{key}' appears before any section header")));
            };
            match section_of(&key) {
                Some(expected) if expected == sec => {}
                Some(expected) => {
                    return Err(at(format!(
                        "key '{key}' belongs in [{expected}], not [{sec}]"
                    )))
                }
                None => return Err(at(format!("unknown key '{key}'"))),
            }
            self.set(&key, value.trim()).map_err(at)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let m = &mut self.model;
        match key {
            "d" => m.d = parse(key, v)?,
            "L" => m.l = parse(key, v)?,
            "a" => m.a = parse(key, v)?,
            "g2" => m.g2 = parse(key, v)?,
            "g0_sq" => m.g0_sq = parse(key, v)?,
            "kappa_u_sq" => m.kappa_u_sq = parse(key, v)?,
            "m_u" => m.m_u = parse(key, v)?,
            "N" => m.n = parse(key, v)?,
            "n_f" => m.n_f = parse(key, v)?,
            "group" => m.group = GroupKind::from_str(v).map_err(|e| e.to_string())?,
            "field" => m.field = FieldKind::from_str(v).map_err(|e| e.to_string())?,
            "n_samples" => self.n_samples = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "nodes" => self.nodes = parse(key, v)?,
            "out" => self.output = Some(PathBuf::from(v)),
            "format" => self.format = value_enum(key, v)?,
            "theorem" => self.theorem = value_enum(key, v)?,
            "k" => self.k = parse(key, v)?,
            "variant" => self.variant = value_enum(key, v)?,
            "links" => self.links = value_enum(key, v)?,
            "method" => self.method = value_enum(key, v)?,
            "gauge_fixed" => self.gauge_fixed = parse(key, v)?,
            "weight" => self.weight = value_enum(key, v)?,
            "task" => self.task = value_enum(key, v)?,
            "beta_grid" => self.beta_grid = parse_list(key, v)?,
            "a_grid" => self.a_grid = parse_list(key, v)?,
            "g2_grid" => self.g2_grid = parse_list(key, v)?,
            "L_grid" => self.l_grid = parse_list(key, v)?,
            "N_grid" => self.n_grid = parse_list(key, v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }
}

const SECTIONS: [&str; 4] = ["model", "run", "options", "grid"];

fn section_of(key: &str) -> Option<&'static str> {
    Some(match key {
        "d" | "L" | "a" | "g2" | "g0_sq" | "kappa_u_sq" | "m_u" | "N" | "n_f" | "group"
        | "field" => "model",
        "n_samples" | "seed" | "workers" | "nodes" | "out" | "format" => "run",
        "theorem" | "k" | "variant" | "links" | "method" | "gauge_fixed" | "weight" | "task" => {
            "options"
        }
        "beta_grid" | "a_grid" | "g2_grid" | "L_grid" | "N_grid" => "grid",
        _ => return None,
    })
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| format!("invalid value '{v}' for {key}: {e}"))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn value_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T, String> {
    T::from_str(v, true).map_err(|_| {
        let names: Vec<String> = T::value_variants()
            .iter()
            .filter_map(|x| x.to_possible_value())
            .map(|p| p.get_name().to_string())
            .collect();
        format!(
            "invalid value '{v}' for {key} (expected one of {})",
            names.join(", ")
        )
    })
}

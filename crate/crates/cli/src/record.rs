//! Result records and their JSON and CSV renderings.

use gaugelab::bounds::BoundReport;
use gaugelab::rmt::LimitSweep;
use gaugelab::su2::Su2BoundCheck;
use gaugelab::{Estimate, GroupKind};
use serde::{Deserialize, Serialize};

use crate::config::{Links, RunConfig, Variant};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub config: RunConfig,
    pub payload: Payload,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    LatticeInfo(LatticeInfo),
    ZBond(ZBond),
    BoseExact(BoseExact),
    WilsonMc(WilsonRun),
    Bounds(BoundReport),
    CueGue(LimitSweep),
    D2Limit(LimitSweep),
    Su2Check(Su2BoundCheck),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeInfo {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub sites: usize,
    pub bonds: usize,
    pub plaquettes: usize,
    pub retained_bonds: usize,
    pub horizontal_plaquettes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZBond {
    pub variant: Variant,
    pub group: GroupKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub a: f64,
    pub g2: f64,
    /// a^{d-4} / g^2.
    pub coupling: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoseExact {
    pub links: Links,
    pub unscaled: Estimate,
    pub scaled: Estimate,
    /// Relative defect of Z_B = s_B^n Z_B^u.
    pub scaling_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilsonRun {
    pub gauge_fixed: bool,
    pub z_w: Estimate,
    pub z_y: Estimate,
    /// z^{Lambda_r} from single-bond quadrature, d = 2 only.
    pub exact_d2: Option<Estimate>,
}

impl Payload {
    /// Whether the payload records a failed check.
    pub fn failed(&self) -> bool {
        match self {
            Payload::Bounds(r) => r.verdict == gaugelab::bounds::Verdict::Fail,
            Payload::Su2Check(c) => !c.holds,
            _ => false,
        }
    }

    pub fn summary(&self) -> String {
        match self {
            Payload::LatticeInfo(l) => format!(
                "d={} L={}: {} sites, {} bonds, {} plaquettes, {} retained bonds",
                l.d, l.l, l.sites, l.bonds, l.plaquettes, l.retained_bonds
            ),
            Payload::ZBond(z) => format!(
                "{:?} single bond {}: ln z = {}",
                z.variant,
                z.group.label(z.n),
                z.estimate.log_value
            ),
            Payload::BoseExact(b) => {
                format!(
                    "ln Z_B^u = {}, ln Z_B = {}",
                    b.unscaled.log_value, b.scaled.log_value
                )
            }
            Payload::WilsonMc(w) => format!(
                "ln Z^w = {} (rel. std. error {:.3e}), ln Z_Y = {}",
                w.z_w.log_value, w.z_w.rel_std_error, w.z_y.log_value
            ),
            Payload::Bounds(r) => format!(
                "{} bounds: {:?}, ln value in [{}, {}] vs [{}, {}], {} violations",
                r.theorem,
                r.verdict,
                r.log_value_min,
                r.log_value_max,
                r.log_lower,
                r.log_upper,
                r.violations
            ),
            Payload::CueGue(s) | Payload::D2Limit(s) => {
                let last = s.points.last().map(|p| p.value).unwrap_or(f64::NAN);
                format!("N={}: last value {last} vs limit {}", s.n, s.target)
            }
            Payload::Su2Check(c) => format!(
                "SU(2) a={} g2={}: z gluon {} vs Weyl {}, bounds hold: {}",
                c.a, c.g2, c.z_gluon, c.z_weyl, c.holds
            ),
        }
    }

    /// Header and rows of the CSV rendering.
    pub fn csv(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        match self {
            Payload::LatticeInfo(l) => (
                vec![
                    "d",
                    "L",
                    "sites",
                    "bonds",
                    "plaquettes",
                    "retained_bonds",
                    "horizontal_plaquettes",
                ],
                vec![[
                    l.d,
                    l.l,
                    l.sites,
                    l.bonds,
                    l.plaquettes,
                    l.retained_bonds,
                    l.horizontal_plaquettes,
                ]
                .iter()
                .map(|v| v.to_string())
                .collect()],
            ),
            Payload::ZBond(z) => (
                vec![
                    "variant",
                    "group",
                    "N",
                    "d",
                    "a",
                    "g2",
                    "coupling",
                    "log_value",
                    "value",
                    "rel_error",
                ],
                vec![vec![
                    enum_name(&z.variant),
                    enum_name(&z.group),
                    z.n.to_string(),
                    z.d.to_string(),
                    num(z.a),
                    num(z.g2),
                    num(z.coupling),
                    num(z.estimate.log_value),
                    opt(z.estimate.value),
                    num(z.estimate.rel_std_error),
                ]],
            ),
            Payload::BoseExact(b) => (
                vec!["quantity", "log_value", "value", "method"],
                vec![
                    estimate_row("z_b_unscaled", &b.unscaled),
                    estimate_row("z_b", &b.scaled),
                ]
                .into_iter()
                .map(|r| r[..4].to_vec())
                .collect(),
            ),
            Payload::WilsonMc(w) => {
                let mut rows = vec![estimate_row("z_w", &w.z_w), estimate_row("z_y", &w.z_y)];
                if let Some(e) = &w.exact_d2 {
                    rows.push(estimate_row("z_w_exact_d2", e));
                }
                (
                    vec![
                        "quantity",
                        "log_value",
                        "value",
                        "method",
                        "std_error",
                        "rel_std_error",
                        "n_samples",
                        "seed",
                    ],
                    rows,
                )
            }
            Payload::Bounds(r) => (
                vec![
                    "theorem",
                    "verdict",
                    "n_checks",
                    "violations",
                    "log_value_min",
                    "log_value_max",
                    "log_lower",
                    "log_upper",
                    "margin",
                    "log_std_error",
                ],
                vec![vec![
                    r.theorem.clone(),
                    enum_name(&r.verdict),
                    r.n_checks.to_string(),
                    r.violations.to_string(),
                    num(r.log_value_min),
                    num(r.log_value_max),
                    num(r.log_lower),
                    num(r.log_upper),
                    num(r.margin),
                    num(r.log_std_error),
                ]],
            ),
            Payload::CueGue(s) | Payload::D2Limit(s) => {
                let x = if matches!(self, Payload::CueGue(_)) {
                    "beta"
                } else {
                    "a"
                };
                (
                    vec![x, "value", "target", "abs_err"],
                    s.points
                        .iter()
                        .map(|p| vec![num(p.x), num(p.value), num(p.target), num(p.abs_err)])
                        .collect(),
                )
            }
            Payload::Su2Check(c) => (
                vec![
                    "a",
                    "g2",
                    "d",
                    "z_gluon",
                    "z_weyl",
                    "scaled_z",
                    "scaled_upper",
                    "z_tilde",
                    "scaled_z_tilde",
                    "scaled_lower",
                    "holds",
                ],
                vec![vec![
                    num(c.a),
                    num(c.g2),
                    c.d.to_string(),
                    num(c.z_gluon),
                    num(c.z_weyl),
                    num(c.scaled_z),
                    num(c.scaled_upper),
                    num(c.z_tilde),
                    num(c.scaled_z_tilde),
                    num(c.scaled_lower),
                    c.holds.to_string(),
                ]],
            ),
        }
    }
}

fn estimate_row(name: &str, e: &Estimate) -> Vec<String> {
    vec![
        name.to_string(),
        num(e.log_value),
        opt(e.value),
        enum_name(&e.method),
        opt(e.std_error),
        num(e.rel_std_error),
        e.n_samples.to_string(),
        e.seed.map(|s| s.to_string()).unwrap_or_default(),
    ]
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

pub fn render_csv(payload: &Payload) -> String {
    let (header, rows) = payload.csv();
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    fn record(subcommand: &str, edit: impl FnOnce(&mut RunConfig)) -> ResultRecord {
        let mut cfg = RunConfig::new(subcommand);
        cfg.n_samples = 300;
        edit(&mut cfg);
        let payload = crate::commands::execute(&cfg).unwrap();
        crate::new_record(cfg, payload, 0.25)
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let recs = [
            record("lattice-info", |_| {}),
            record("z-bond", |c| c.model.a = 0.3),
            record("bose-exact", |c| c.model.l = 3),
            record("wilson-mc", |c| c.model.l = 3),
            record("verify-bounds", |c| c.model.a = 0.1),
            record("cue-gue", |_| {}),
            record("d2-limit", |_| {}),
            record("su2-check", |_| {}),
        ];
        for rec in recs {
            let text = crate::to_json(&rec).unwrap();
            let back: ResultRecord = serde_json::from_str(&text).unwrap();
            assert_eq!(back, rec);
            assert_eq!(crate::to_json(&back).unwrap(), text);
        }
    }

    #[test]
    fn only_failed_checks_fail() {
        let mut rec = record("verify-bounds", |_| {});
        assert!(!rec.payload.failed());
        if let Payload::Bounds(r) = &mut rec.payload {
            r.verdict = gaugelab::bounds::Verdict::Fail;
        }
        assert!(rec.payload.failed());
        let mut rec = record("su2-check", |_| {});
        assert!(!rec.payload.failed());
        if let Payload::Su2Check(c) = &mut rec.payload {
            c.holds = false;
        }
        assert!(rec.payload.failed());
        assert!(!record("lattice-info", |_| {}).payload.failed());
    }
}

//! Runs one configured computation and returns its payload.

use gaugelab::action::GaugeConfig;
use gaugelab::bounds::{
    verify_elementary, verify_quadratic_lemma, verify_theorem1, verify_theorem2, verify_theorem3,
};
use gaugelab::mc::sample_rng;
use gaugelab::partition::{
    log_s_y_factor, z_bose_exact, z_bose_scaling_identity, z_single_bond, z_wilson_exact_d2,
    z_wilson_mc, z_wilson_u1_quadrature,
};
use gaugelab::rmt::{cue_gue_limit, d2_free_energy};
use gaugelab::su2::su2_bounds_check;
use gaugelab::{Estimate, GroupKind, Method};

use crate::config::{Links, RunConfig, Theorem, WilsonMethod};
use crate::error::CliError;
use crate::record::{BoseExact, LatticeInfo, Payload, WilsonRun, ZBond};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Range checks shared by all subcommands, beyond those of the model itself.
pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let d = cfg.model.d;
    if !(2..=4).contains(&d) {
        return Err(usage(format!("d must be in {{2, 3, 4}}, got {d}")));
    }
    cfg.model.validate()?;
    if cfg.workers == 0 {
        return Err(usage("workers must be at least 1"));
    }
    if cfg.n_samples == 0 {
        return Err(usage("n-samples must be at least 1"));
    }
    if cfg.nodes < 4 || !cfg.nodes.is_multiple_of(2) {
        return Err(usage(format!(
            "nodes must be even and at least 4, got {}",
            cfg.nodes
        )));
    }
    if !(1..=4).contains(&cfg.k) {
        return Err(usage(format!("k must be in 1..=4, got {}", cfg.k)));
    }
    Ok(())
}

pub fn execute(cfg: &RunConfig) -> Result<Payload, CliError> {
    validate(cfg)?;
    let p = &cfg.model;
    let lattice = p.lattice()?;
    Ok(match cfg.subcommand.as_str() {
        "lattice-info" => {
            let c = lattice.counts();
            Payload::LatticeInfo(LatticeInfo {
                d: p.d,
                l: p.l,
                sites: c.sites,
                bonds: c.bonds,
                plaquettes: c.plaquettes,
                retained_bonds: c.retained_bonds,
                horizontal_plaquettes: lattice.horizontal_plaquettes().len(),
            })
        }
        "z-bond" => Payload::ZBond(ZBond {
            variant: cfg.variant,
            group: p.group,
            n: p.n,
            d: p.d,
            a: p.a,
            g2: p.g2,
            coupling: p.plaquette_coupling(),
            estimate: z_single_bond(cfg.variant.into(), p.group, p.n, p.d, p.a, p.g2)?,
        }),
        "bose-exact" => {
            let cfg_links = match cfg.links {
                Links::Identity => GaugeConfig::identity(&lattice, p.n),
                Links::Random => {
                    GaugeConfig::random(&lattice, p.group, p.n, &mut sample_rng(cfg.seed, 0))?
                }
            };
            Payload::BoseExact(BoseExact {
                links: cfg.links,
                unscaled: z_bose_exact(&lattice, &cfg_links, p, false)?,
                scaled: z_bose_exact(&lattice, &cfg_links, p, true)?,
                scaling_rel_error: z_bose_scaling_identity(&lattice, &cfg_links, p)?.rel_error,
            })
        }
        "wilson-mc" => {
            let z_w = match cfg.method {
                WilsonMethod::Mc => z_wilson_mc(
                    &lattice,
                    p,
                    cfg.n_samples,
                    cfg.seed,
                    cfg.gauge_fixed,
                    cfg.workers,
                )?,
                WilsonMethod::Quadrature => {
                    if p.group != GroupKind::U || p.n != 1 {
                        return Err(usage("wilson-mc --method quadrature needs U(1)"));
                    }
                    let q = z_wilson_u1_quadrature(&lattice, p, cfg.nodes, cfg.gauge_fixed)?;
                    Estimate::deterministic(q.value.ln(), q.rel_error(), Method::Quadrature)
                }
            };
            let z_y = z_w.scaled_by_log(log_s_y_factor(&lattice, p));
            let exact_d2 = if p.d == 2 {
                Some(z_wilson_exact_d2(&lattice, p)?)
            } else {
                None
            };
            Payload::WilsonMc(WilsonRun {
                gauge_fixed: cfg.gauge_fixed,
                z_w,
                z_y,
                exact_d2,
            })
        }
        "verify-bounds" => Payload::Bounds(match cfg.theorem {
            Theorem::Bose => verify_theorem1(p, cfg.n_samples, cfg.seed)?,
            Theorem::Gauge => verify_theorem2(p, cfg.n_samples, cfg.seed, cfg.workers)?,
            Theorem::Combined => verify_theorem3(p, cfg.n_samples, cfg.seed, cfg.workers)?,
            Theorem::Quadratic => {
                verify_quadratic_lemma(p.group, p.n, cfg.k, cfg.n_samples, cfg.seed, cfg.workers)?
            }
            Theorem::Elementary => verify_elementary(cfg.n_samples, p.n, cfg.seed, cfg.workers)?,
        }),
        "cue-gue" => {
            check_grid("beta-grid", &cfg.beta_grid, |b| b > 0.0)?;
            Payload::CueGue(cue_gue_limit(p.n, &cfg.beta_grid, cfg.weight.into())?)
        }
        "d2-limit" => {
            check_grid("a-grid", &cfg.a_grid, |a| a > 0.0 && a <= 1.0)?;
            Payload::D2Limit(d2_free_energy(p.n, &cfg.a_grid, p.g2)?)
        }
        "su2-check" => Payload::Su2Check(su2_bounds_check(p.a, p.g2, p.d, p.g0_sq)?),
        other => return Err(usage(format!("unknown subcommand '{other}'"))),
    })
}

pub fn check_grid(name: &str, grid: &[f64], ok: impl Fn(f64) -> bool) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(usage(format!("{name} must not be empty")));
    }
    if let Some(bad) = grid.iter().find(|&&x| !ok(x)) {
        return Err(usage(format!("{name} contains out-of-range value {bad}")));
    }
    Ok(())
}

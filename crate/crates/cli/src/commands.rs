//! The four experiment commands.

use serde_json::{json, Value};
use subexit_core::analytic::{escape_prob_interval, getoor_u, mfet_gaussian_ball};
use subexit_core::estimator::{compare_with, estimate_escape, estimate_mfet};
use subexit_core::{
    mean_rate, CompareRule, Domain, Driver, Dynamics, EnsembleConfig, Error, MCEstimate, TargetSet,
    TemperedStableParams,
};

use crate::config::{DriverKind, ExperimentConfig, Formula};
use crate::error::{config, CliError};
use crate::report::{Cell, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Mfet,
    Escape,
    Analytic,
    Ratio,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Mfet => "mfet",
            CommandKind::Escape => "escape",
            CommandKind::Analytic => "analytic",
            CommandKind::Ratio => "ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    /// A comparison failed or a closed form diverged.
    pub failed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed)
    }
}

pub fn execute(kind: CommandKind, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match kind {
        CommandKind::Mfet => cmd_mfet(cfg),
        CommandKind::Escape => cmd_escape(cfg),
        CommandKind::Analytic => cmd_analytic(cfg),
        CommandKind::Ratio => cmd_ratio(cfg),
    }
}

/// Master seed of the `k`-th point of a sweep; point 0 uses `seed` itself.
pub fn point_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn clock(alpha: f64, mu: f64) -> Result<TemperedStableParams, CliError> {
    let p = TemperedStableParams::new(alpha, mu).map_err(|e| config(e.to_string()))?;
    match mean_rate(&p) {
        Err(Error::Divergence { .. }) => Err(config(format!(
            "mu = 0 with alpha = {alpha} < 1: the mean exit time is infinite"
        ))),
        Err(e) => Err(config(e.to_string())),
        Ok(_) => Ok(p),
    }
}

fn single_beta(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    match cfg.betas[..] {
        [b] => Ok(b),
        _ => Err(config("this command takes a single beta")),
    }
}

fn mfet_ds(cfg: &ExperimentConfig) -> f64 {
    cfg.ds.unwrap_or(match cfg.driver {
        DriverKind::Gaussian => 1e-2 * (cfg.radius / 10.0).powi(2),
        DriverKind::Stable => 1e-2,
    })
}

/// Escape runs default to jump scale `r / 100`.
fn escape_ds(cfg: &ExperimentConfig, beta: f64) -> f64 {
    cfg.ds.unwrap_or((cfg.radius / 100.0).powf(beta))
}

fn driver(cfg: &ExperimentConfig, beta: f64) -> Result<Driver, CliError> {
    let d = match cfg.driver {
        DriverKind::Gaussian => Driver::gaussian(cfg.diffusion, cfg.eps),
        DriverKind::Stable => Driver::stable(beta, cfg.eps),
    };
    d.map_err(|e| config(e.to_string()))
}

fn dynamics(cfg: &ExperimentConfig, beta: f64, ds: f64) -> Result<Dynamics, CliError> {
    let domain = Domain::ball(cfg.dim, cfg.radius).map_err(|e| config(e.to_string()))?;
    Ok(Dynamics::new(domain, driver(cfg, beta)?, ds).with_max_steps(cfg.max_steps))
}

fn ensemble(cfg: &ExperimentConfig, k: u64) -> EnsembleConfig {
    EnsembleConfig::new(cfg.trajectories, point_seed(cfg.seed, k)).with_workers(cfg.workers)
}

/// Closed-form mean exit time for the configured driver, including the
/// noise-intensity scaling.
fn mfet_closed_form(
    formula: Formula,
    cfg: &ExperimentConfig,
    x: &[f64],
    clock: &TemperedStableParams,
    beta: f64,
) -> subexit_core::Result<f64> {
    match formula {
        Formula::Gaussian => Ok(mfet_gaussian_ball(x, cfg.radius, clock)? / (cfg.eps * cfg.diffusion)),
        Formula::Stable => Ok(mean_rate(clock)? * getoor_u(x, cfg.radius, beta)? / cfg.eps.powf(beta)),
        Formula::Escape => unreachable!("escape is not an exit time"),
    }
}

fn driver_formula(cfg: &ExperimentConfig) -> Formula {
    match cfg.driver {
        DriverKind::Gaussian => Formula::Gaussian,
        DriverKind::Stable => Formula::Stable,
    }
}

pub fn cmd_mfet(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.check_simulation()?;
    let beta = single_beta(cfg)?;
    let clocks = cfg
        .alphas
        .iter()
        .flat_map(|&a| cfg.mus.iter().map(move |&m| (a, m)))
        .map(|(a, m)| clock(a, m).map(|c| (a, m, c)))
        .collect::<Result<Vec<_>, _>>()?;
    let ds = mfet_ds(cfg);
    let dynamics = dynamics(cfg, beta, ds)?;
    let rule = CompareRule::new(cfg.rel_tol.unwrap_or(0.05));
    let mut report = Report::new(
        cfg.metadata("mfet", json!(ds)),
        vec![
            "alpha",
            "mu",
            "x0",
            "mc_mean",
            "mc_stderr",
            "mc_operational_mean",
            "n_eff",
            "analytic",
            "z",
            "rel_err",
            "pass",
        ],
    );
    let mut failed = false;
    let mut k = 0;
    for (alpha, mu, clock) in &clocks {
        for &x in &cfg.x0 {
            let p = cfg.point(x);
            let est = estimate_mfet(&p, &dynamics, clock, &ensemble(cfg, k))?;
            k += 1;
            let analytic = mfet_closed_form(driver_formula(cfg), cfg, &p, clock, beta)?;
            let cmp = compare_with(&est.physical, analytic, rule);
            failed |= !cmp.pass;
            report.push(vec![
                (*alpha).into(),
                (*mu).into(),
                x.into(),
                est.physical.mean.into(),
                est.physical.stderr.into(),
                est.operational.mean.into(),
                est.physical.count.into(),
                analytic.into(),
                cmp.z.into(),
                cmp.rel_err.into(),
                cmp.pass.into(),
            ]);
        }
    }
    Ok(Outcome { report, failed })
}

pub fn cmd_escape(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.check_simulation()?;
    if cfg.driver != DriverKind::Stable {
        return Err(config("escape needs the stable driver"));
    }
    if cfg.dim != 1 {
        return Err(config("escape is defined on an interval; use dim = 1"));
    }
    for &a in &cfg.alphas {
        for &m in &cfg.mus {
            TemperedStableParams::new(a, m).map_err(|e| config(e.to_string()))?;
        }
    }
    let ds_meta = match cfg.ds {
        Some(ds) => json!(ds),
        None => Value::Array(cfg.betas.iter().map(|&b| json!(escape_ds(cfg, b))).collect()),
    };
    let rule = CompareRule {
        z_max: 3.0,
        rel_tol: cfg.rel_tol.unwrap_or(0.0),
    };
    let target = TargetSet::HalfLineRight { threshold: cfg.radius };
    let mut report = Report::new(
        cfg.metadata("escape", ds_meta),
        vec!["beta", "x0", "mc_estimate", "mc_stderr", "analytic", "z", "pass"],
    );
    let mut failed = false;
    let mut k = 0;
    for &beta in &cfg.betas {
        let dynamics = dynamics(cfg, beta, escape_ds(cfg, beta))?;
        for &x in &cfg.x0 {
            let est: MCEstimate = estimate_escape(&[x], &dynamics, &target, &ensemble(cfg, k))?;
            k += 1;
            let analytic = escape_prob_interval(x, cfg.radius, beta)?;
            let cmp = compare_with(&est, analytic, rule);
            failed |= !cmp.pass;
            report.push(vec![
                beta.into(),
                x.into(),
                est.mean.into(),
                est.stderr.into(),
                analytic.into(),
                cmp.z.into(),
                cmp.pass.into(),
            ]);
        }
    }
    Ok(Outcome { report, failed })
}

pub fn cmd_ratio(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.check_simulation()?;
    let beta = single_beta(cfg)?;
    let [x] = cfg.x0[..] else {
        return Err(config("ratio takes a single x0"));
    };
    let ds = mfet_ds(cfg);
    let dynamics = dynamics(cfg, beta, ds)?;
    let mut report = Report::new(
        cfg.metadata("ratio", json!(ds)),
        vec!["alpha", "mu", "ratio_mc", "ratio_stderr", "analytic_factor", "z", "pass"],
    );
    let p = cfg.point(x);
    let mut failed = false;
    let mut k = 0;
    for &alpha in &cfg.alphas {
        for &mu in &cfg.mus {
            if mu == 0.0 {
                return Err(config(format!(
                    "mu = 0: the physical mean exit time diverges, so the ratio is undefined (alpha = {alpha})"
                )));
            }
            let c = clock(alpha, mu)?;
            let est = estimate_mfet(&p, &dynamics, &c, &ensemble(cfg, k))?;
            k += 1;
            let factor = mean_rate(&c)?;
            let diff = est.ratio - factor;
            let z = if diff == 0.0 { 0.0 } else { diff / est.ratio_stderr };
            let pass = z.abs() <= 3.0;
            failed |= !pass;
            report.push(vec![
                alpha.into(),
                mu.into(),
                est.ratio.into(),
                est.ratio_stderr.into(),
                factor.into(),
                z.into(),
                pass.into(),
            ]);
        }
    }
    Ok(Outcome { report, failed })
}

pub const DIVERGENT: &str = "divergent";

pub fn cmd_analytic(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    for &x in &cfg.x0 {
        if x.abs() > cfg.radius {
            return Err(config(format!("x0 = {x} lies outside the closed ball of radius {}", cfg.radius)));
        }
    }
    let formula = cfg.formula.unwrap_or_else(|| driver_formula(cfg));
    let surface = |e: Error| config(e.to_string());
    let mut failed = false;
    let report = match formula {
        Formula::Escape => {
            if cfg.dim != 1 {
                return Err(config("the escape formula is defined on an interval; use dim = 1"));
            }
            let mut report = Report::new(cfg.metadata("analytic", Value::Null), vec!["beta", "x0", "escape_prob"]);
            for &beta in &cfg.betas {
                for &x in &cfg.x0 {
                    let v = escape_prob_interval(x, cfg.radius, beta).map_err(surface)?;
                    report.push(vec![beta.into(), x.into(), v.into()]);
                }
            }
            report
        }
        Formula::Gaussian | Formula::Stable => {
            let betas = match formula {
                Formula::Gaussian => vec![2.0],
                _ => cfg.betas.clone(),
            };
            let mut report = Report::new(
                cfg.metadata("analytic", Value::Null),
                vec!["alpha", "mu", "beta", "x0", "mfet"],
            );
            for &alpha in &cfg.alphas {
                for &mu in &cfg.mus {
                    let c = TemperedStableParams::new(alpha, mu).map_err(surface)?;
                    for &beta in &betas {
                        for &x in &cfg.x0 {
                            let cell = match mfet_closed_form(formula, cfg, &cfg.point(x), &c, beta) {
                                Ok(v) => Cell::Float(v),
                                Err(Error::Divergence { .. }) => {
                                    failed = true;
                                    Cell::Text(DIVERGENT.into())
                                }
                                Err(e) => return Err(surface(e)),
                            };
                            report.push(vec![alpha.into(), mu.into(), beta.into(), x.into(), cell]);
                        }
                    }
                }
            }
            report
        }
    };
    Ok(Outcome { report, failed })
}

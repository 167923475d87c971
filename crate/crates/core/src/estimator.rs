//! Monte Carlo ensembles: mean first exit times, escape probabilities, and
//! comparison of estimates against closed-form values.
//!
//! Trajectory `i` always runs on stream `(master_seed, i)` and per-trajectory
//! results are folded in index order, so every estimate is bit-identical for
//! any worker count.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::{Dynamics, ExitRecord, Simulator};
use crate::error::{domain, Error, Result};
use crate::rand_stable::{make_stream, TemperedStableParams};

/// One-pass mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

pub fn accumulate(mut state: Accumulator, sample: f64) -> Accumulator {
    state.push(sample);
    state
}

/// Streaming moments of paired samples `(x, y)`, including their covariance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairAccumulator {
    x: Accumulator,
    y: Accumulator,
    co_moment: f64,
}

impl PairAccumulator {
    pub fn push(&mut self, x: f64, y: f64) {
        let dx = x - self.x.mean;
        self.x.push(x);
        self.y.push(y);
        self.co_moment += dx * (y - self.y.mean);
    }

    pub fn x(&self) -> &Accumulator {
        &self.x
    }

    pub fn y(&self) -> &Accumulator {
        &self.y
    }

    pub fn covariance(&self) -> f64 {
        if self.x.count < 2 {
            0.0
        } else {
            self.co_moment / (self.x.count - 1) as f64
        }
    }

    /// Ratio of means `mean(x) / mean(y)` with its delta-method standard error.
    pub fn ratio(&self) -> (f64, f64) {
        let r = self.x.mean / self.y.mean;
        let n = self.x.count as f64;
        let var = self.x.variance() - 2.0 * r * self.covariance() + r * r * self.y.variance();
        (r, (var.max(0.0) / n).sqrt() / self.y.mean.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    PhysicalMfet,
    OperationalMfet,
    EscapeProb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
    pub kind: EstimateKind,
}

impl MCEstimate {
    fn from_acc(acc: &Accumulator, kind: EstimateKind) -> Self {
        Self {
            mean: acc.mean(),
            stderr: acc.stderr(),
            count: acc.count(),
            kind,
        }
    }

    /// Bernoulli estimate with `stderr = sqrt(p (1 - p) / n)`.
    pub fn bernoulli(hits: u64, count: u64) -> Self {
        let p = hits as f64 / count as f64;
        Self {
            mean: p,
            stderr: (p * (1.0 - p) / count as f64).sqrt(),
            count,
            kind: EstimateKind::EscapeProb,
        }
    }
}

/// Ensemble size, seeding and parallelism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
}

impl EnsembleConfig {
    pub fn new(n_traj: u64, master_seed: u64) -> Self {
        Self {
            n_traj,
            master_seed,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Largest tolerated fraction of trajectories hitting `max_steps`.
pub const MAX_CENSORED_FRACTION: f64 = 1e-3;

const BLOCK: u64 = 1 << 14;

/// Runs `sim` on streams `0..n_traj` and hands the results to `fold` in index
/// order.
fn run_ensemble<F>(cfg: &EnsembleConfig, sim: &Simulator, x0: &[f64], mut fold: F) -> Result<()>
where
    F: FnMut(Result<ExitRecord>) -> Result<()>,
{
    let run_block = |lo: u64, hi: u64| -> Vec<Result<ExitRecord>> {
        (lo..hi)
            .into_par_iter()
            .map_init(
                || sim.clone(),
                |local, i| {
                    let mut stream = make_stream(cfg.master_seed, i);
                    local.run(x0, &mut stream)
                },
            )
            .collect()
    };
    let pool = match cfg.workers {
        0 => None,
        n => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| domain(format!("cannot start worker pool: {e}")))?,
        ),
    };
    let mut lo = 0;
    while lo < cfg.n_traj {
        let hi = (lo + BLOCK).min(cfg.n_traj);
        let block = match &pool {
            Some(p) => p.install(|| run_block(lo, hi)),
            None => run_block(lo, hi),
        };
        for rec in block {
            fold(rec)?;
        }
        lo = hi;
    }
    Ok(())
}

fn check_censoring(censored: u64, total: u64) -> Result<()> {
    if censored as f64 > MAX_CENSORED_FRACTION * total as f64 {
        return Err(Error::Censored { censored, total });
    }
    Ok(())
}

fn check_ensemble(cfg: &EnsembleConfig) -> Result<()> {
    if cfg.n_traj < 2 {
        return Err(domain(format!("need at least 2 trajectories, got {}", cfg.n_traj)));
    }
    Ok(())
}

/// Physical and operational mean exit times from one ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfetEstimate {
    pub physical: MCEstimate,
    pub operational: MCEstimate,
    /// Physical over operational mean, and its delta-method stderr.
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub censored: u64,
}

/// Mean first exit time from `x0`, estimated over `cfg.n_traj` trajectories.
///
/// Censored trajectories are excluded from the means; more than 0.1% of them
/// is an [`Error::Censored`].
pub fn estimate_mfet(
    x0: &[f64],
    dynamics: &Dynamics,
    clock: &TemperedStableParams,
    cfg: &EnsembleConfig,
) -> Result<MfetEstimate> {
    check_ensemble(cfg)?;
    dynamics.validate_start(x0)?;
    let sim = Simulator::new(dynamics, Some(clock))?;
    let mut acc = PairAccumulator::default();
    let mut censored = 0;
    run_ensemble(cfg, &sim, x0, |rec| {
        match rec {
            Ok(r) => acc.push(r.t_exit, r.s_exit),
            Err(Error::MaxStepsExceeded { .. }) => censored += 1,
            Err(e) => return Err(e),
        }
        Ok(())
    })?;
    check_censoring(censored, cfg.n_traj)?;
    let (ratio, ratio_stderr) = acc.ratio();
    Ok(MfetEstimate {
        physical: MCEstimate::from_acc(acc.x(), EstimateKind::PhysicalMfet),
        operational: MCEstimate::from_acc(acc.y(), EstimateKind::OperationalMfet),
        ratio,
        ratio_stderr,
        censored,
    })
}

/// The exterior landing set `E` whose hitting probability is estimated.
#[derive(Clone)]
pub enum TargetSet {
    /// First coordinate `>= threshold`.
    HalfLineRight { threshold: f64 },
    /// First coordinate `<= threshold`.
    HalfLineLeft { threshold: f64 },
    /// The whole complement of the domain.
    Complement,
    Predicate(Arc<dyn Fn(&[f64]) -> bool + Send + Sync>),
}

impl fmt::Debug for TargetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSet::HalfLineRight { threshold } => write!(f, "HalfLineRight({threshold})"),
            TargetSet::HalfLineLeft { threshold } => write!(f, "HalfLineLeft({threshold})"),
            TargetSet::Complement => f.write_str("Complement"),
            TargetSet::Predicate(_) => f.write_str("Predicate(..)"),
        }
    }
}

impl TargetSet {
    pub fn contains(&self, landing: &[f64]) -> bool {
        match self {
            TargetSet::HalfLineRight { threshold } => landing[0] >= *threshold,
            TargetSet::HalfLineLeft { threshold } => landing[0] <= *threshold,
            TargetSet::Complement => true,
            TargetSet::Predicate(p) => p(landing),
        }
    }

    fn check_exterior(&self, radius: f64) -> Result<()> {
        match *self {
            TargetSet::HalfLineRight { threshold } if threshold < radius => Err(domain(format!(
                "target [{threshold}, inf) meets the domain of radius {radius}"
            ))),
            TargetSet::HalfLineLeft { threshold } if threshold > -radius => Err(domain(format!(
                "target (-inf, {threshold}] meets the domain of radius {radius}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Probability that the first landing point outside the domain lies in
/// `target`. Only the spatial path is simulated: the waiting times never
/// enter.
pub fn estimate_escape(
    x0: &[f64],
    dynamics: &Dynamics,
    target: &TargetSet,
    cfg: &EnsembleConfig,
) -> Result<MCEstimate> {
    if !dynamics.driver.is_stable() {
        return Err(domain(
            "escape probability needs a stable driver; Gaussian paths are continuous",
        ));
    }
    check_ensemble(cfg)?;
    dynamics.validate_start(x0)?;
    target.check_exterior(dynamics.domain.radius())?;
    let sim = Simulator::new(dynamics, None)?;
    let (mut hits, mut count, mut censored) = (0u64, 0u64, 0u64);
    run_ensemble(cfg, &sim, x0, |rec| {
        match rec {
            Ok(r) => {
                count += 1;
                if target.contains(&r.landing) {
                    hits += 1;
                }
            }
            Err(Error::MaxStepsExceeded { .. }) => censored += 1,
            Err(e) => return Err(e),
        }
        Ok(())
    })?;
    check_censoring(censored, cfg.n_traj)?;
    Ok(MCEstimate::bernoulli(hits, count))
}

/// Pass rule: `|z| <= z_max` or `rel_err <= rel_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRule {
    pub z_max: f64,
    pub rel_tol: f64,
}

impl CompareRule {
    pub fn new(rel_tol: f64) -> Self {
        Self { z_max: 3.0, rel_tol }
    }

    /// Statistical agreement only.
    pub fn z_only(z_max: f64) -> Self {
        Self { z_max, rel_tol: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareReport {
    pub analytic: f64,
    pub estimate: MCEstimate,
    pub z: f64,
    pub rel_err: f64,
    pub pass: bool,
}

pub fn compare(estimate: &MCEstimate, analytic: f64, rel_tol: f64) -> CompareReport {
    compare_with(estimate, analytic, CompareRule::new(rel_tol))
}

pub fn compare_with(estimate: &MCEstimate, analytic: f64, rule: CompareRule) -> CompareReport {
    let diff = estimate.mean - analytic;
    let z = if diff == 0.0 { 0.0 } else { diff / estimate.stderr };
    let rel_err = if diff == 0.0 { 0.0 } else { diff.abs() / analytic.abs() };
    CompareReport {
        analytic,
        estimate: *estimate,
        z,
        rel_err,
        pass: z.abs() <= rule.z_max || rel_err <= rule.rel_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Domain, Driver};

    fn est(mean: f64, stderr: f64) -> MCEstimate {
        MCEstimate {
            mean,
            stderr,
            count: 100,
            kind: EstimateKind::PhysicalMfet,
        }
    }

    #[test]
    fn accumulate_small_sample() {
        let acc = [1.0, 2.0, 3.0].into_iter().fold(Accumulator::default(), accumulate);
        assert_eq!(acc.mean(), 2.0);
        assert!((acc.stderr() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn accumulate_constant() {
        let mut acc = Accumulator::default();
        for _ in 0..1_000_000 {
            acc.push(7.25);
        }
        assert_eq!(acc.mean(), 7.25);
        assert_eq!(acc.stderr(), 0.0);
    }

    #[test]
    fn compare_examples() {
        let r = compare(&est(50.1, 0.2), 50.0, 0.05);
        assert!(r.pass);
        assert!((r.z - 0.5).abs() < 1e-9);
        assert!(!compare(&est(60.0, 0.2), 50.0, 0.05).pass);
        let r = compare_with(&est(50.4, 1.0), 50.0, CompareRule::z_only(3.0));
        assert!(r.pass);
        let exact = compare(&est(0.5, 0.0), 0.5, 0.0);
        assert!(exact.pass && exact.z == 0.0 && exact.rel_err == 0.0);
    }

    #[test]
    fn bernoulli_stderr() {
        let e = MCEstimate::bernoulli(25, 100);
        assert_eq!(e.mean, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(MCEstimate::bernoulli(0, 10).stderr, 0.0);
    }

    #[test]
    fn pair_ratio_of_identical_samples() {
        let mut p = PairAccumulator::default();
        for v in [1.0, 4.0, 2.5, 9.0] {
            p.push(v, v);
        }
        assert_eq!(p.ratio(), (1.0, 0.0));
    }

    #[test]
    fn escape_rejects_gaussian_and_bad_targets() {
        let cfg = EnsembleConfig::new(10, 1);
        let g = Dynamics::new(Domain::interval(1.0).unwrap(), Driver::gaussian(1.0, 1.0).unwrap(), 0.01);
        let right = TargetSet::HalfLineRight { threshold: 1.0 };
        assert!(estimate_escape(&[0.0], &g, &right, &cfg).is_err());
        let s = Dynamics::new(Domain::interval(1.0).unwrap(), Driver::stable(1.0, 1.0).unwrap(), 0.01);
        let inside = TargetSet::HalfLineRight { threshold: 0.5 };
        assert!(estimate_escape(&[0.0], &s, &inside, &cfg).is_err());
        assert!(estimate_escape(&[0.0], &s, &right, &EnsembleConfig::new(1, 1)).is_err());
    }

    #[test]
    fn censoring_threshold() {
        let d = Dynamics::new(Domain::interval(100.0).unwrap(), Driver::gaussian(1.0, 1.0).unwrap(), 0.01)
            .with_max_steps(5);
        let clock = TemperedStableParams::new(1.0, 1.0).unwrap();
        let err = estimate_mfet(&[0.0], &d, &clock, &EnsembleConfig::new(20, 3)).unwrap_err();
        assert_eq!(err, Error::Censored { censored: 20, total: 20 });
    }

    #[test]
    fn complement_target_always_hit() {
        let d = Dynamics::new(Domain::ball(2, 1.0).unwrap(), Driver::stable(1.5, 1.0).unwrap(), 0.01);
        let e = estimate_escape(&[0.2, 0.1], &d, &TargetSet::Complement, &EnsembleConfig::new(200, 2)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.count, 200);
    }
}

use proptest::prelude::*;
use subexit_core::analytic::{escape_prob_interval, mfet_stable_ball};
use subexit_core::estimator::{accumulate, compare, estimate_escape, estimate_mfet, Accumulator};
use subexit_core::{Domain, Driver, Dynamics, EnsembleConfig, TargetSet, TemperedStableParams};

fn stable_interval(r: f64, beta: f64, ds: f64) -> Dynamics {
    Dynamics::new(Domain::interval(r).unwrap(), Driver::stable(beta, 1.0).unwrap(), ds)
}

#[test]
fn escape_from_centre_is_one_half() {
    let d = stable_interval(1.0, 1.0, 1e-2);
    let e = estimate_escape(&[0.0], &d, &TargetSet::HalfLineRight { threshold: 1.0 }, &EnsembleConfig::new(20_000, 21))
        .unwrap();
    assert!((e.mean - 0.5).abs() < 3.0 * e.stderr, "{e:?}");
}

#[test]
fn escape_symmetry_across_the_centre() {
    let d = stable_interval(1.0, 0.8, 1e-3);
    let right = TargetSet::HalfLineRight { threshold: 1.0 };
    let a = estimate_escape(&[0.4], &d, &right, &EnsembleConfig::new(20_000, 22)).unwrap();
    let b = estimate_escape(&[-0.4], &d, &right, &EnsembleConfig::new(20_000, 23)).unwrap();
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.mean + b.mean - 1.0).abs() < 3.0 * se, "{a:?} {b:?}");
    let left = TargetSet::HalfLineLeft { threshold: -1.0 };
    let c = estimate_escape(&[0.4], &d, &left, &EnsembleConfig::new(20_000, 22)).unwrap();
    // Same streams: every trajectory lands on exactly one side.
    assert_eq!(a.mean + c.mean, 1.0);
}

#[test]
fn escape_grows_with_beta_off_centre() {
    let r = 1.0f64;
    let mut est = Vec::new();
    for (beta, seed) in [(0.5f64, 24u64), (1.8, 25)] {
        // Jump scale ds^(1/beta) = r / 30.
        let d = stable_interval(r, beta, (r / 30.0).powf(beta));
        let e = estimate_escape(&[0.5], &d, &TargetSet::HalfLineRight { threshold: r }, &EnsembleConfig::new(100_000, seed))
            .unwrap();
        est.push(e);
    }
    let se = (est[0].stderr.powi(2) + est[1].stderr.powi(2)).sqrt();
    assert!(est[1].mean - est[0].mean > 3.0 * se, "{est:?}");
    let analytic = escape_prob_interval(0.5, 1.0, 1.8).unwrap();
    assert!((est[1].mean - analytic).abs() < 0.02);
}

#[test]
fn results_independent_of_worker_count() {
    let d = stable_interval(10.0, 1.3, 0.01);
    let clock = TemperedStableParams::new(0.7, 0.2).unwrap();
    let one = estimate_mfet(&[2.0], &d, &clock, &EnsembleConfig::new(3000, 26).with_workers(1)).unwrap();
    let three = estimate_mfet(&[2.0], &d, &clock, &EnsembleConfig::new(3000, 26).with_workers(3)).unwrap();
    let global = estimate_mfet(&[2.0], &d, &clock, &EnsembleConfig::new(3000, 26)).unwrap();
    assert_eq!(format!("{one:?}"), format!("{three:?}"));
    assert_eq!(format!("{one:?}"), format!("{global:?}"));
}

#[test]
fn mfet_profile_decreases_with_distance_from_centre() {
    let d = stable_interval(10.0, 1.5, 0.01);
    let clock = TemperedStableParams::new(0.5, 0.2).unwrap();
    let est: Vec<_> = [0.0, 4.0, 8.0]
        .iter()
        .enumerate()
        .map(|(i, &x)| estimate_mfet(&[x], &d, &clock, &EnsembleConfig::new(5000, 30 + i as u64)).unwrap().physical)
        .collect();
    for w in est.windows(2) {
        let se = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        assert!(w[0].mean - w[1].mean > 3.0 * se, "{est:?}");
    }
    let analytic = mfet_stable_ball(&[0.0], 10.0, &clock, 1.5).unwrap();
    assert!(compare(&est[0], analytic, 0.05).pass, "{:?} vs {analytic}", est[0]);
}

fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

proptest! {
    #[test]
    fn streaming_matches_two_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..500), shift in -1e4f64..1e4) {
        let xs: Vec<f64> = xs.into_iter().map(|x| x + shift).collect();
        let acc = xs.iter().copied().fold(Accumulator::default(), accumulate);
        let (mean, var) = two_pass(&xs);
        prop_assert!((acc.mean() - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        prop_assert!((acc.variance() - var).abs() <= 1e-12 * var.max(1e-300) + 1e-12);
    }
}

use proptest::prelude::*;
use subexit_core::analytic::{
    escape_prob_interval, escape_prob_interval_quad, escape_prob_unit_interval, getoor_u, mfet_gaussian_1d,
    mfet_gaussian_ball, mfet_stable_ball,
};
use subexit_core::specfun::QuadSpec;
use subexit_core::TemperedStableParams;

fn clock(alpha: f64, mu: f64) -> TemperedStableParams {
    TemperedStableParams::new(alpha, mu).unwrap()
}

#[test]
fn gaussian_formulas_are_the_brownian_getoor_case() {
    let c = clock(0.6, 0.1);
    for i in 0..=40 {
        let x = -10.0 + i as f64 * 0.5;
        let g1 = mfet_gaussian_1d(x, 10.0, &c).unwrap();
        let s1 = mfet_stable_ball(&[x], 10.0, &c, 2.0).unwrap();
        let b1 = mfet_gaussian_ball(&[x], 10.0, &c).unwrap();
        assert!((g1 - s1).abs() <= 1e-12 * g1.abs().max(1.0), "x {x}: {g1} vs {s1}");
        assert!((g1 - b1).abs() <= 1e-12 * g1.abs().max(1.0));
        let p = [x * 0.6, x * 0.7];
        let g2 = mfet_gaussian_ball(&p, 10.0, &c).unwrap();
        let s2 = mfet_stable_ball(&p, 10.0, &c, 2.0).unwrap();
        let closed = c.alpha() * c.mu().powf(c.alpha() - 1.0) * (100.0 - p[0] * p[0] - p[1] * p[1]) / 4.0;
        assert!((g2 - s2).abs() <= 1e-12 * g2.abs().max(1.0));
        assert!((g2 - closed).abs() <= 1e-12 * g2.abs().max(1.0));
    }
}

#[test]
fn mfet_vanishes_on_boundary_and_positive_inside() {
    let c = clock(0.3, 0.5);
    let r = 7.0;
    for beta in [0.3, 1.0, 1.7, 2.0] {
        for n in 1..=3 {
            let mut edge = vec![0.0; n];
            edge[0] = r;
            assert_eq!(mfet_stable_ball(&edge, r, &c, beta).unwrap(), 0.0);
            let inside = vec![r / (2.0 * n as f64); n];
            assert!(mfet_stable_ball(&inside, r, &c, beta).unwrap() > 0.0);
        }
    }
    assert_eq!(mfet_gaussian_1d(-r, r, &c).unwrap(), 0.0);
    assert_eq!(mfet_gaussian_ball(&[0.0, r], r, &c).unwrap(), 0.0);
}

#[test]
fn escape_incomplete_beta_matches_quadrature() {
    let spec = QuadSpec::default();
    for beta in [0.3, 0.5, 0.9, 1.2, 1.5, 1.8, 1.95] {
        for r in [1.0, 100.0] {
            for i in 0..=20 {
                let x = r * (-1.0 + i as f64 * 0.1);
                let p = escape_prob_interval(x, r, beta).unwrap();
                let q = escape_prob_interval_quad(x, r, beta, spec).unwrap();
                assert!((p - q).abs() < 1e-8, "beta {beta} r {r} x {x}: {p} vs {q}");
            }
        }
    }
}

#[test]
fn escape_monotone_in_start_and_beta() {
    for beta in [0.3, 0.8, 1.4, 1.9] {
        let mut prev = 0.0;
        for i in 1..200 {
            let x = -100.0 + i as f64;
            let p = escape_prob_interval(x, 100.0, beta).unwrap();
            assert!(p > prev, "beta {beta} x {x}");
            prev = p;
        }
    }
    for x in [10.0, 50.0, 90.0] {
        let mut prev = 0.0;
        for k in 3..=19 {
            let beta = k as f64 / 10.0;
            let p = escape_prob_interval(x, 100.0, beta).unwrap();
            assert!(p > prev, "x {x} beta {beta}");
            prev = p;
        }
    }
}

#[test]
fn unit_interval_formula_is_the_r_equals_one_case() {
    let mut worst: f64 = 0.0;
    for beta in [0.2, 0.7, 1.1, 1.6, 1.9] {
        for i in 0..=40 {
            let x = -1.0 + i as f64 * 0.05;
            worst = worst.max((escape_prob_unit_interval(x, beta).unwrap() - escape_prob_interval(x, 1.0, beta).unwrap()).abs());
        }
    }
    assert!(worst <= 1e-12);
}

#[test]
fn tempering_factor_peaks_at_minus_inverse_log_mu() {
    let mu: f64 = 0.1;
    let f = |a: f64| subexit_core::mean_rate(&clock(a, mu)).unwrap();
    let (mut best, mut arg) = (f64::MIN, 0.0);
    for i in 1..=100_000 {
        let a = i as f64 / 100_000.0;
        let v = f(a);
        if v > best {
            best = v;
            arg = a;
        }
    }
    assert!((arg - 1.0 / 10f64.ln()).abs() < 1e-3, "argmax {arg}");
    assert!((arg + 1.0 / mu.ln()).abs() < 1e-3);
}

#[test]
fn getoor_kac_pollard_case() {
    for x in [0.0, 25.0, -60.0, 99.0] {
        let u = getoor_u(&[x], 100.0, 1.0).unwrap();
        assert!((u - (1e4 - x * x).sqrt()).abs() < 1e-11 * u.max(1.0));
    }
}

proptest! {
    #[test]
    fn escape_symmetry(t in -1.0f64..=1.0, r in 0.01f64..1e4, beta in 0.05f64..1.99) {
        let x = t * r;
        let s = escape_prob_interval(x, r, beta).unwrap() + escape_prob_interval(-x, r, beta).unwrap();
        prop_assert!((s - 1.0).abs() <= 1e-12, "sum {}", s);
    }

    #[test]
    fn escape_scale_invariant(t in -1.0f64..=1.0, c in 0.01f64..100.0, beta in 0.05f64..1.99) {
        let a = escape_prob_interval(t, 1.0, beta).unwrap();
        let b = escape_prob_interval(c * t, c, beta).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn stable_mfet_vanishes_only_on_boundary(t in 0.0f64..0.999, beta in 0.05f64..=2.0, n in 1usize..4, alpha in 0.05f64..=1.0, mu in 0.01f64..5.0) {
        let mut x = vec![0.0; n];
        x[0] = t * 50.0;
        let v = mfet_stable_ball(&x, 50.0, &clock(alpha, mu), beta).unwrap();
        prop_assert!(v > 0.0 && v.is_finite());
    }
}

//! Desired state against a finite-difference oracle built from the closed-form
//! manufactured pair, independent of the analytic jets in the library.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stcontrol::problem::{derive_desired_state, Example1Variant, ProblemSpec, Subdomain};

const ETA: f64 = 1e-6;

fn shift(moving: bool, t: f64) -> f64 {
    if moving {
        0.05 * (1.0 - (2.0 * PI * t).cos())
    } else {
        0.0
    }
}

fn velocity(moving: bool, t: f64) -> f64 {
    if moving {
        0.1 * PI * (2.0 * PI * t).sin()
    } else {
        0.0
    }
}

fn w(inner: bool, moving: bool, x: f64, t: f64) -> f64 {
    let s = shift(moving, t);
    let drift = (10.0 * PI * s + 23.0 * PI / 6.0).sin();
    if inner {
        (20.0 * PI * (x - s) - 47.0 * PI / 6.0).sin() + drift
    } else {
        (10.0 * PI * (x - s) - 23.0 * PI / 6.0).sin() + drift
    }
}

fn state(inner: bool, moving: bool, x: f64, t: f64) -> f64 {
    w(inner, moving, x, t) * (PI * t / 2.0).sin()
}

fn adjoint(inner: bool, moving: bool, x: f64, t: f64) -> f64 {
    -ETA * w(inner, moving, x, t) * ((PI - PI * t) / 2.0).sin()
}

/// Central differences with step `h` and `h/2`, Richardson-combined.
fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64, second: bool) -> f64 {
    let d = |h: f64| {
        if second {
            (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
        } else {
            (f(x + h) - f(x - h)) / (2.0 * h)
        }
    };
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn oracle(moving: bool, x: f64, t: f64) -> f64 {
    let s = shift(moving, t);
    let inner = 0.4 + s < x && x < 0.6 + s;
    let kappa = if inner { 0.5 } else { 1.0 };
    let step = 1e-5;
    let p_t = richardson(|tt| adjoint(inner, moving, x, tt), t, step, false);
    let p_x = richardson(|xx| adjoint(inner, moving, xx, t), x, step, false);
    let p_xx = richardson(|xx| adjoint(inner, moving, xx, t), x, step, true);
    state(inner, moving, x, t) + p_t + velocity(moving, t) * p_x + kappa * p_xx
}

fn check_random_points(variant: Example1Variant, seed: u64) {
    let moving = variant == Example1Variant::Moving;
    let spec = ProblemSpec::example1(variant);
    let desired = derive_desired_state(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        // Keep the stencils inside the time interval.
        let x = rng.gen_range(0.0..1.0);
        let t = rng.gen_range(1e-4..1.0 - 1e-4);
        let want = oracle(moving, x, t);
        let got = desired(x, t);
        let rel = (got - want).abs() / want.abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-6, "{variant:?} at ({x}, {t}): {got} vs {want}");
    }
    assert!(worst.is_finite());
}

#[test]
fn static_desired_state_matches_finite_differences() {
    check_random_points(Example1Variant::Static, 7);
}

#[test]
fn moving_desired_state_matches_finite_differences() {
    check_random_points(Example1Variant::Moving, 11);
}

#[test]
fn static_centre_point() {
    let spec = ProblemSpec::example1(Example1Variant::Static);
    let desired = derive_desired_state(&spec).unwrap();
    let want = oracle(false, 0.5, 0.5);
    assert!((desired(0.5, 0.5) - want).abs() <= 1e-6 * want.abs());
    // p* itself at the centre, analytic jet vs the printed formula.
    let exact = spec.exact.as_ref().unwrap();
    let p = exact.adjoint.value(Subdomain::One, 0.5, 0.5);
    assert!((p - adjoint(true, false, 0.5, 0.5)).abs() <= 1e-18);
}

#[test]
fn missing_exact_pair_is_a_config_error() {
    let mut spec = ProblemSpec::example1(Example1Variant::Static);
    spec.exact = None;
    assert!(derive_desired_state(&spec).is_err());
}

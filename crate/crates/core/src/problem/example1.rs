//! Manufactured optimal state/adjoint pair on `(0,1)^2` with the band
//! `0.4 + s(t) < x < 0.6 + s(t)` as subdomain one.

use std::f64::consts::PI;

use super::{Jet, PiecewiseField, Subdomain, Velocity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example1Variant {
    /// `v = 0`.
    Static,
    /// `v(t) = 0.1 pi sin(2 pi t)`.
    Moving,
}

impl Example1Variant {
    pub fn velocity(self) -> Velocity {
        match self {
            Example1Variant::Static => Velocity::Zero,
            Example1Variant::Moving => Velocity::example1_moving(),
        }
    }

    pub fn preset_name(self) -> &'static str {
        match self {
            Example1Variant::Static => "example1-static",
            Example1Variant::Moving => "example1-moving",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    /// `w_i(x,t) sin(pi t / 2)`.
    State,
    /// `-eta w_i(x,t) sin((pi - pi t) / 2)`.
    Adjoint,
}

/// One of the two manufactured fields, with all partials up to second order
/// coded analytically.
#[derive(Debug, Clone)]
pub struct Example1Field {
    pub role: FieldRole,
    pub eta: f64,
    pub velocity: Velocity,
}

/// Spatial wave number and phase of `w_1` / `w_2`.
fn wave(branch: Subdomain) -> (f64, f64) {
    match branch {
        Subdomain::One => (20.0 * PI, 47.0 * PI / 6.0),
        Subdomain::Two => (10.0 * PI, 23.0 * PI / 6.0),
    }
}

const DRIFT_WAVE: f64 = 10.0 * PI;
const DRIFT_PHASE: f64 = 23.0 * PI / 6.0;

impl Example1Field {
    /// `w_i` and its partials.
    fn w(&self, branch: Subdomain, x: f64, t: f64) -> Jet {
        let (k, c) = wave(branch);
        let s = self.velocity.integral(t);
        let v = self.velocity.value(t);
        let dv = self.velocity.derivative(t);
        let phase = k * (x - s) - c;
        let drift = DRIFT_WAVE * s + DRIFT_PHASE;
        let (sp, cp) = phase.sin_cos();
        let (sd, cd) = drift.sin_cos();
        Jet {
            value: sp + sd,
            dx: k * cp,
            dt: -k * v * cp + DRIFT_WAVE * v * cd,
            dxx: -k * k * sp,
            dtt: -k * dv * cp - (k * v) * (k * v) * sp + DRIFT_WAVE * dv * cd
                - (DRIFT_WAVE * v) * (DRIFT_WAVE * v) * sd,
            dxt: k * k * v * sp,
        }
    }

    /// Time factor `g(t)` with `g'` and `g''`.
    fn time_factor(&self, t: f64) -> (f64, f64, f64) {
        let w = 0.5 * PI;
        match self.role {
            FieldRole::State => {
                let (s, c) = (w * t).sin_cos();
                (s, w * c, -w * w * s)
            }
            FieldRole::Adjoint => {
                // -eta sin((pi - pi t)/2) = -eta cos(pi t / 2)
                let (s, c) = (w * t).sin_cos();
                let e = self.eta;
                (-e * c, e * w * s, e * w * w * c)
            }
        }
    }
}

impl PiecewiseField for Example1Field {
    fn jet(&self, branch: Subdomain, x: f64, t: f64) -> Jet {
        let w = self.w(branch, x, t);
        let (g, dg, ddg) = self.time_factor(t);
        Jet {
            value: w.value * g,
            dx: w.dx * g,
            dt: w.dt * g + w.value * dg,
            dxx: w.dxx * g,
            dtt: w.dtt * g + 2.0 * w.dt * dg + w.value * ddg,
            dxt: w.dxt * g + w.dx * dg,
        }
    }
}

/// Exact optimal state and adjoint of Example 1.
pub fn example1_exact(variant: Example1Variant, eta: f64) -> (Example1Field, Example1Field) {
    let velocity = variant.velocity();
    (
        Example1Field {
            role: FieldRole::State,
            eta,
            velocity: velocity.clone(),
        },
        Example1Field {
            role: FieldRole::Adjoint,
            eta,
            velocity,
        },
    )
}

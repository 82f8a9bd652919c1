//! Problem instances: the space-time cylinder, the two subdomains separated by
//! a moving interface, coefficients, and the desired state.

mod example1;
mod velocity;

use std::fmt;
use std::sync::Arc;

pub use example1::{example1_exact, Example1Field, Example1Variant, FieldRole};
pub use velocity::{CubicSpline, Velocity};

use crate::error::{Error, Result};

/// Subdomain label: `One` is the band between the two interface curves,
/// `Two` is its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subdomain {
    One,
    Two,
}

impl Subdomain {
    pub fn label(self) -> u8 {
        match self {
            Subdomain::One => 1,
            Subdomain::Two => 2,
        }
    }

    pub fn from_label(label: u8) -> Option<Self> {
        match label {
            1 => Some(Subdomain::One),
            2 => Some(Subdomain::Two),
            _ => None,
        }
    }
}

/// Result of classifying a point of the closed cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointRegion {
    Subdomain(Subdomain),
    Interface,
}

/// Value and partial derivatives (up to second order) of a scalar field.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub dx: f64,
    pub dt: f64,
    pub dxx: f64,
    pub dtt: f64,
    pub dxt: f64,
}

/// A field given by one smooth branch per subdomain. The branches are expected
/// to agree on the interface curves.
pub trait PiecewiseField: Send + Sync + fmt::Debug {
    fn jet(&self, branch: Subdomain, x: f64, t: f64) -> Jet;

    fn value(&self, branch: Subdomain, x: f64, t: f64) -> f64 {
        self.jet(branch, x, t).value
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl PiecewiseField for ZeroField {
    fn jet(&self, _branch: Subdomain, _x: f64, _t: f64) -> Jet {
        Jet::default()
    }
}

/// Optimal state and adjoint, when known in closed form.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub state: Arc<dyn PiecewiseField>,
    pub adjoint: Arc<dyn PiecewiseField>,
}

impl ExactSolution {
    pub fn zero() -> Self {
        Self {
            state: Arc::new(ZeroField),
            adjoint: Arc::new(ZeroField),
        }
    }

    /// The same pair with state and adjoint exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            state: self.adjoint.clone(),
            adjoint: self.state.clone(),
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Desired state `u_d`.
#[derive(Clone)]
pub enum DesiredState {
    Zero,
    Constant(f64),
    /// `value` on the disk `(x - x0)^2 + (t - t0)^2 <= radius^2`, zero elsewhere.
    Bump {
        value: f64,
        x0: f64,
        t0: f64,
        radius: f64,
    },
    /// `(x^2 - 1) exp(2 t)`.
    ExpQuadratic,
    /// Strong-form residual of the adjoint equation at the exact pair.
    DerivedFromExact,
    Custom(ScalarFn),
}

impl fmt::Debug for DesiredState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesiredState::Zero => write!(f, "Zero"),
            DesiredState::Constant(c) => write!(f, "Constant({c})"),
            DesiredState::Bump {
                value,
                x0,
                t0,
                radius,
            } => write!(f, "Bump {{ value: {value}, x0: {x0}, t0: {t0}, radius: {radius} }}"),
            DesiredState::ExpQuadratic => write!(f, "ExpQuadratic"),
            DesiredState::DerivedFromExact => write!(f, "DerivedFromExact"),
            DesiredState::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A complete problem instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub x_min: f64,
    pub x_max: f64,
    pub final_time: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub eta: f64,
    pub velocity: Velocity,
    /// Interface curves are `x = a + s(t)` and `x = b + s(t)`.
    pub offsets: (f64, f64),
    pub desired: DesiredState,
    pub exact: Option<ExactSolution>,
}

/// Number of samples used to check that the interface stays inside the domain.
const INTERIOR_SAMPLES: usize = 4096;

impl ProblemSpec {
    /// Example 1 with regularization `eta = 1e-6`.
    pub fn example1(variant: Example1Variant) -> Self {
        Self::example1_with_eta(variant, 1e-6)
    }

    pub fn example1_with_eta(variant: Example1Variant, eta: f64) -> Self {
        let velocity = variant.velocity();
        let (state, adjoint) = example1_exact(variant, eta);
        Self {
            name: variant.preset_name().to_string(),
            x_min: 0.0,
            x_max: 1.0,
            final_time: 1.0,
            kappa1: 0.5,
            kappa2: 1.0,
            eta,
            velocity,
            offsets: (0.4, 0.6),
            desired: DesiredState::DerivedFromExact,
            exact: Some(ExactSolution {
                state: Arc::new(state),
                adjoint: Arc::new(adjoint),
            }),
        }
    }

    /// Look up a named preset (`example1-static`, `example1-moving`).
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "example1-static" => Ok(Self::example1(Example1Variant::Static)),
            "example1-moving" => Ok(Self::example1(Example1Variant::Moving)),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected example1-static or example1-moving)"
            ))),
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["example1-static", "example1-moving"]
    }

    /// Check coefficient signs, interval ordering, and that both interface
    /// curves stay strictly inside `(x_min, x_max)` on `[0, T]`.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("kappa1", self.kappa1)?;
        positive("kappa2", self.kappa2)?;
        positive("eta", self.eta)?;
        positive("final time T", self.final_time)?;
        if !(self.x_min < self.x_max) {
            return Err(Error::Config(format!(
                "spatial interval must satisfy x_min < x_max, got ({}, {})",
                self.x_min, self.x_max
            )));
        }
        let (a, b) = self.offsets;
        if !(a < b) {
            return Err(Error::Geometry(format!(
                "interface offsets must satisfy a < b, got ({a}, {b})"
            )));
        }
        if let DesiredState::DerivedFromExact = self.desired {
            if self.exact.is_none() {
                return Err(Error::Config(
                    "desired state derived from the exact solution requires exact state and adjoint"
                        .into(),
                ));
            }
        }
        let (lo, hi) = self.displacement_range();
        if !(self.x_min < a + lo) || !(b + hi < self.x_max) {
            return Err(Error::Geometry(format!(
                "interface leaves the domain: curves span [{}, {}] but the domain is ({}, {})",
                a + lo,
                b + hi,
                self.x_min,
                self.x_max
            )));
        }
        Ok(())
    }

    fn displacement_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..=INTERIOR_SAMPLES {
            let t = self.final_time * k as f64 / INTERIOR_SAMPLES as f64;
            let s = self.shift(t);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (lo, hi)
    }

    /// Interface displacement `s(t) = int_0^t v`.
    pub fn displacement(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.final_time).contains(&t) {
            return Err(Error::Domain(format!(
                "time {t} outside [0, {}]",
                self.final_time
            )));
        }
        Ok(self.shift(t))
    }

    /// Unchecked displacement, for hot loops that already stay in the cylinder.
    #[inline]
    pub fn shift(&self, t: f64) -> f64 {
        self.velocity.integral(t)
    }

    /// Positions of the two interface curves at time `t`.
    #[inline]
    pub fn interface_positions(&self, t: f64) -> (f64, f64) {
        let s = self.shift(t);
        (self.offsets.0 + s, self.offsets.1 + s)
    }

    pub fn interface_tolerance(&self) -> f64 {
        1e-12 * (self.x_max - self.x_min)
    }

    pub fn classify_point(&self, x: f64, t: f64) -> PointRegion {
        let (left, right) = self.interface_positions(t);
        let tol = self.interface_tolerance();
        if (x - left).abs() <= tol || (x - right).abs() <= tol {
            PointRegion::Interface
        } else if left < x && x < right {
            PointRegion::Subdomain(Subdomain::One)
        } else {
            PointRegion::Subdomain(Subdomain::Two)
        }
    }

    /// True subdomain of a point; points exactly on an interface curve are
    /// assigned to `Two` (a null set, and piecewise fields agree there).
    #[inline]
    pub fn subdomain_at(&self, x: f64, t: f64) -> Subdomain {
        let (left, right) = self.interface_positions(t);
        if left < x && x < right {
            Subdomain::One
        } else {
            Subdomain::Two
        }
    }

    #[inline]
    pub fn kappa(&self, region: Subdomain) -> f64 {
        match region {
            Subdomain::One => self.kappa1,
            Subdomain::Two => self.kappa2,
        }
    }

    pub fn cylinder_area(&self) -> f64 {
        (self.x_max - self.x_min) * self.final_time
    }

    /// Evaluate the desired state. For [`DesiredState::DerivedFromExact`] this
    /// requires the exact pair; call [`derive_desired_state`] first to get a
    /// checked evaluator.
    pub fn desired_value(&self, x: f64, t: f64) -> f64 {
        match &self.desired {
            DesiredState::Zero => 0.0,
            DesiredState::Constant(c) => *c,
            DesiredState::Bump {
                value,
                x0,
                t0,
                radius,
            } => {
                let r2 = (x - x0) * (x - x0) + (t - t0) * (t - t0);
                if r2 <= radius * radius {
                    *value
                } else {
                    0.0
                }
            }
            DesiredState::ExpQuadratic => (x * x - 1.0) * (2.0 * t).exp(),
            DesiredState::DerivedFromExact => match &self.exact {
                Some(exact) => self.adjoint_residual(exact, x, t),
                None => f64::NAN,
            },
            DesiredState::Custom(f) => f(x, t),
        }
    }

    /// `u + p_t + v p_x + kappa p_xx` on the true subdomain branch.
    fn adjoint_residual(&self, exact: &ExactSolution, x: f64, t: f64) -> f64 {
        let branch = self.subdomain_at(x, t);
        let u = exact.state.value(branch, x, t);
        let p = exact.adjoint.jet(branch, x, t);
        u + p.dt + self.velocity.value(t) * p.dx + self.kappa(branch) * p.dxx
    }
}

/// Desired state as a checked evaluator. For a problem whose desired state is
/// derived from the exact pair, this is the field that makes that pair satisfy
/// the adjoint equation `-p_t - v p_x - (kappa p_x)_x = u - u_d` pointwise.
pub fn derive_desired_state(spec: &ProblemSpec) -> Result<impl Fn(f64, f64) -> f64 + Send + Sync + '_> {
    if let DesiredState::DerivedFromExact = spec.desired {
        if spec.exact.is_none() {
            return Err(Error::Config(
                "cannot derive the desired state without exact state and adjoint".into(),
            ));
        }
    }
    Ok(move |x: f64, t: f64| spec.desired_value(x, t))
}

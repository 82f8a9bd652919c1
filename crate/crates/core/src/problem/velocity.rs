use crate::error::{Error, Result};

/// Interface velocity `v(t)`. It depends on time only, which in one spatial
/// dimension is exactly the divergence-free requirement on the transport field.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    Zero,
    /// `v(t) = amplitude * sin(angular_frequency * t)`.
    Sine {
        amplitude: f64,
        angular_frequency: f64,
    },
    /// Samples interpolated by a natural cubic spline.
    Tabulated(CubicSpline),
}

impl Velocity {
    /// The moving-interface preset `v(t) = 0.1 pi sin(2 pi t)`.
    pub fn example1_moving() -> Self {
        Velocity::Sine {
            amplitude: 0.1 * std::f64::consts::PI,
            angular_frequency: 2.0 * std::f64::consts::PI,
        }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Velocity::Tabulated(CubicSpline::natural(times, values)?))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Velocity::Zero => 0.0,
            Velocity::Sine {
                amplitude,
                angular_frequency,
            } => amplitude * (angular_frequency * t).sin(),
            Velocity::Tabulated(spline) => spline.value(t),
        }
    }

    /// Time derivative `v'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Velocity::Zero => 0.0,
            Velocity::Sine {
                amplitude,
                angular_frequency,
            } => amplitude * angular_frequency * (angular_frequency * t).cos(),
            Velocity::Tabulated(spline) => spline.derivative(t),
        }
    }

    /// `s(t) = int_0^t v`, analytic where available.
    pub(crate) fn integral(&self, t: f64) -> f64 {
        match self {
            Velocity::Zero => 0.0,
            Velocity::Sine {
                amplitude,
                angular_frequency,
            } => {
                if *angular_frequency == 0.0 {
                    0.0
                } else {
                    amplitude / angular_frequency * (1.0 - (angular_frequency * t).cos())
                }
            }
            Velocity::Tabulated(spline) => {
                adaptive_simpson(&|tau| spline.value(tau), 0.0, t, 1e-12, 48)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Velocity::Zero)
    }
}

/// Natural cubic spline through `(times[i], values[i])`; linear extrapolation
/// of the end segments is never needed since queries stay inside `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n < 2 || values.len() != n {
            return Err(Error::Config(format!(
                "tabulated velocity needs at least two (t, v) pairs of equal length, got {} times and {} values",
                n,
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "tabulated velocity times must be strictly increasing".into(),
            ));
        }
        let mut moments = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the interior moments (Thomas algorithm).
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 1..n - 1 {
                let h0 = times[i] - times[i - 1];
                let h1 = times[i + 1] - times[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] =
                    6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for i in 1..m {
                let lower = times[i + 1] - times[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; m];
            sol[m - 1] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
            }
            moments[1..n - 1].copy_from_slice(&sol);
        }
        Ok(Self {
            times,
            values,
            moments,
        })
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.partition_point(|&ti| ti <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.moments[i] + (b * b * b - b) * self.moments[i + 1]) * h * h
                / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        (self.values[i + 1] - self.values[i]) / h
            + (-(3.0 * a * a - 1.0) * self.moments[i] + (3.0 * b * b - 1.0) * self.moments[i + 1])
                * h
                / 6.0
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

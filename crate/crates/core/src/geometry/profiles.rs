//! Built-in function vocabulary for metric specifications.
//!
//! Configs store plain `f64` parameters; evaluation happens in the generic
//! scalar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::rotsym::RotSymConformal;

/// Radial conformal factor `φ(r)` of a conformally flat metric `e^{2φ}δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConformalFactor {
    /// `φ = Σ_k coeffs[k] · r^{2k}`.
    PolyR2 { coeffs: Vec<f64> },
    /// `φ = amplitude · (1 − (r/radius)²)^power`, a convenience for the usual
    /// boundary-vanishing families.
    Bump { amplitude: f64, power: u32, radius: f64 },
    /// Samples of `φ` at increasing radii, interpolated by a natural cubic
    /// spline in `r²`.
    Sampled { radii: Vec<f64>, values: Vec<f64> },
}

/// Radial profile `s(ρ)` of a rotationally symmetric metric `dρ² + s(ρ)² g_{S^{n−1}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotProfile {
    /// `s = sin ρ` (round sphere).
    Sin,
    /// `s = ρ` (flat).
    Linear,
    /// `s = sinh ρ` (hyperbolic space).
    Sinh,
}

/// Metric components `g₁₁, g₁₂, g₂₂` on a planar domain in Cartesian coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricField {
    Identity,
    /// `g = δ + ε(1 − r²) dx⊗dx`: a non-conformal perturbation that keeps the
    /// unit circle isometric.
    AxisStretch { epsilon: f64 },
    /// Flat metric pulled back by the rotation `θ ↦ θ + a(1 − r²)`; isometric
    /// to the flat disk and the identity on the unit circle.
    Twist { amplitude: f64 },
    /// `e^{2φ}δ` evaluated through the general (non-conformal) code path.
    Conformal { phi: ConformalFactor },
}

/// Value and first two radial derivatives of a radial function. `d_r_over_r`
/// is kept separately so the origin is never divided by.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialJet<T> {
    pub value: T,
    pub d_r: T,
    pub d_rr: T,
    pub d_r_over_r: T,
}

impl<T: Real> RadialJet<T> {
    /// Flat Laplacian of the radial function.
    pub fn laplacian(&self) -> T {
        self.d_rr + self.d_r_over_r
    }
}

/// Natural cubic spline `p(u)` with `u = r²`.
#[derive(Clone, Debug)]
pub struct Spline<T> {
    u: Vec<T>,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T: Real> Spline<T> {
    fn new(radii: &[f64], values: &[f64]) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 3 {
            return Err(Error::InvalidSpec("sampled profile needs at least 3 matching samples".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] < 0.0 {
            return Err(Error::InvalidSpec("sampled radii must be nonnegative and increasing".into()));
        }
        let u: Vec<T> = radii.iter().map(|&r| T::lit(r * r)).collect();
        let y: Vec<T> = values.iter().map(|&v| T::lit(v)).collect();
        let n = u.len();
        // tridiagonal solve for second derivatives, natural end conditions
        let mut m = vec![T::zero(); n];
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        for i in 1..n - 1 {
            let h0 = u[i] - u[i - 1];
            let h1 = u[i + 1] - u[i];
            let a = h0 / T::lit(6.0);
            let b = (h0 + h1) / T::lit(3.0);
            let cc = h1 / T::lit(6.0);
            let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self { u, y, m })
    }

    /// `(p, p', p'')` at `u`, extrapolating linearly past the ends.
    fn eval(&self, u: T) -> (T, T, T) {
        let n = self.u.len();
        let k = match self.u.iter().position(|&x| x > u) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => n - 2,
        };
        let (u0, u1) = (self.u[k], self.u[k + 1]);
        let h = u1 - u0;
        let a = (u1 - u) / h;
        let b = (u - u0) / h;
        let six = T::lit(6.0);
        let p = a * self.y[k] + b * self.y[k + 1] + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / six;
        let dp = (self.y[k + 1] - self.y[k]) / h
            + (-(T::lit(3.0) * a * a - T::one()) * self.m[k] + (T::lit(3.0) * b * b - T::one()) * self.m[k + 1]) * h / six;
        let ddp = a * self.m[k] + b * self.m[k + 1];
        (p, dp, ddp)
    }
}

/// Evaluable form of a radial conformal factor.
#[derive(Clone, Debug)]
pub enum RadialFactor<T: Real> {
    Poly(Vec<T>),
    Spline(Spline<T>),
    RotSym(RotSymConformal<T>),
}

impl<T: Real> RadialFactor<T> {
    pub fn from_spec(spec: &ConformalFactor) -> Result<Self> {
        match spec {
            ConformalFactor::PolyR2 { coeffs } => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidSpec("non-finite conformal coefficient".into()));
                }
                Ok(Self::Poly(coeffs.iter().map(|&c| T::lit(c)).collect()))
            }
            ConformalFactor::Bump { amplitude, power, radius } => {
                if !(*radius > 0.0) || !amplitude.is_finite() {
                    return Err(Error::InvalidSpec("bump needs a finite amplitude and positive radius".into()));
                }
                // expand amplitude·(1 − u/R²)^power by the binomial theorem
                let p = *power as usize;
                let mut coeffs = vec![0.0; p + 1];
                let mut binom = 1.0;
                for (k, c) in coeffs.iter_mut().enumerate() {
                    *c = amplitude * binom * (-1.0 / (radius * radius)).powi(k as i32);
                    binom = binom * (p - k) as f64 / (k + 1) as f64;
                }
                Ok(Self::Poly(coeffs.iter().map(|&c| T::lit(c)).collect()))
            }
            ConformalFactor::Sampled { radii, values } => Ok(Self::Spline(Spline::new(radii, values)?)),
        }
    }

    pub fn jet(&self, r: T) -> RadialJet<T> {
        let u = r * r;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let from_u = |p: T, dp: T, ddp: T| RadialJet {
            value: p,
            d_r: two * r * dp,
            d_rr: two * dp + four * u * ddp,
            d_r_over_r: two * dp,
        };
        match self {
            Self::Poly(c) => {
                let (mut p, mut dp, mut ddp) = (T::zero(), T::zero(), T::zero());
                for (k, &ck) in c.iter().enumerate().rev() {
                    let kf = T::from_usize_lossy(k);
                    p = p + ck * u.powi(k as i32);
                    if k >= 1 {
                        dp = dp + ck * kf * u.powi(k as i32 - 1);
                    }
                    if k >= 2 {
                        ddp = ddp + ck * kf * (kf - T::one()) * u.powi(k as i32 - 2);
                    }
                }
                from_u(p, dp, ddp)
            }
            Self::Spline(s) => {
                let (p, dp, ddp) = s.eval(u);
                from_u(p, dp, ddp)
            }
            Self::RotSym(rs) => rs.jet(r),
        }
    }
}

impl RotProfile {
    /// `(s, s′, s″)` at `ρ`.
    pub fn eval<T: Real>(&self, rho: T) -> (T, T, T) {
        match self {
            Self::Sin => (rho.sin(), rho.cos(), -rho.sin()),
            Self::Linear => (rho, T::one(), T::zero()),
            Self::Sinh => (rho.sinh(), rho.cosh(), rho.sinh()),
        }
    }
}

impl MetricField {
    /// `[g₁₁, g₁₂, g₂₂]` at the Cartesian point `(x, y)`.
    pub fn eval<T: Real>(&self, factor: Option<&RadialFactor<T>>, x: T, y: T) -> [T; 3] {
        let one = T::one();
        match self {
            Self::Identity => [one, T::zero(), one],
            Self::AxisStretch { epsilon } => [one + T::lit(*epsilon) * (one - x * x - y * y), T::zero(), one],
            Self::Twist { amplitude } => {
                let two_a = T::lit(2.0 * amplitude);
                // differential of the rotation by a(r) = A(1 − r²), up to the rotation itself
                let m = [[one + two_a * x * y, two_a * y * y], [-two_a * x * x, one - two_a * x * y]];
                let g11 = m[0][0] * m[0][0] + m[1][0] * m[1][0];
                let g12 = m[0][0] * m[0][1] + m[1][0] * m[1][1];
                let g22 = m[0][1] * m[0][1] + m[1][1] * m[1][1];
                [g11, g12, g22]
            }
            Self::Conformal { .. } => {
                let f = factor.expect("conformal metric field needs its evaluated factor");
                let e = (T::lit(2.0) * f.jet((x * x + y * y).sqrt()).value).exp();
                [e, T::zero(), e]
            }
        }
    }
}

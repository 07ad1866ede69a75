//! Rotationally symmetric metrics `dρ² + s(ρ)² g_{S^{n−1}}` on a geodesic ball.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::profiles::{RadialJet, RotProfile};

/// Checks smooth closure at the pole and positivity up to `rho_max`.
pub fn validate_profile(profile: RotProfile, rho_max: f64) -> Result<()> {
    if !(rho_max > 0.0) || !rho_max.is_finite() {
        return Err(Error::InvalidSpec("rho_max must be positive".into()));
    }
    let (s0, ds0, _) = profile.eval(0.0f64);
    if s0.abs() > 1e-14 || (ds0 - 1.0).abs() > 1e-14 {
        return Err(Error::InvalidSpec("profile must satisfy s(0) = 0 and s'(0) = 1".into()));
    }
    let samples = 2000;
    for k in 1..=samples {
        let rho = rho_max * k as f64 / samples as f64;
        if profile.eval(rho).0 <= 0.0 {
            return Err(Error::InvalidSpec(format!("profile must stay positive on (0, rho_max]; s({rho}) <= 0")));
        }
    }
    Ok(())
}

/// Scalar curvature `(n−1)[−2s″/s + (n−2)(1 − s′²)/s²]`.
pub fn scalar_curvature<T: Real>(n: usize, profile: RotProfile, rho: T) -> T {
    let (s, ds, dds) = profile.eval(rho);
    let nm1 = T::from_usize_lossy(n - 1);
    let nm2 = T::from_usize_lossy(n - 2);
    nm1 * (-T::lit(2.0) * dds / s + nm2 * (T::one() - ds * ds) / (s * s))
}

/// Mean curvature of the geodesic sphere `ρ = ρ₀` with respect to the inward normal.
pub fn boundary_mean_curvature<T: Real>(n: usize, profile: RotProfile, rho0: T) -> T {
    let (s, ds, _) = profile.eval(rho0);
    T::from_usize_lossy(n - 1) * ds / s
}

/// Radially sampled geometry of a rotationally symmetric ball in any dimension.
#[derive(Clone, Debug)]
pub struct RotSymGeometry<T> {
    pub n: usize,
    pub rho: Vec<T>,
    pub scalar_r: Vec<T>,
    pub boundary_h: T,
    pub boundary_radius: T,
}

impl<T: Real> RotSymGeometry<T> {
    /// Samples at the half-offset radii `ρ_i = (i + ½)ρ₀/n_rho`.
    pub fn new(n: usize, profile: RotProfile, rho_max: f64, n_rho: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        validate_profile(profile, rho_max)?;
        let rho0 = T::lit(rho_max);
        let h = rho0 / T::from_usize_lossy(n_rho);
        let rho: Vec<T> = (0..n_rho).map(|i| (T::from_usize_lossy(i) + T::lit(0.5)) * h).collect();
        let scalar_r = rho.iter().map(|&r| scalar_curvature(n, profile, r)).collect();
        Ok(Self {
            n,
            rho,
            scalar_r,
            boundary_h: boundary_mean_curvature(n, profile, rho0),
            boundary_radius: profile.eval(rho0).0,
        })
    }
}

/// Two-dimensional rotationally symmetric disk rewritten as `e^{2φ}` times the
/// flat disk of radius `k = s(ρ₀)`, with the conformal radius `r(ρ)` solving
/// `dr/r = dρ/s`.
#[derive(Clone, Debug)]
pub struct RotSymConformal<T> {
    profile: RotProfile,
    rho0: T,
    k: T,
}

impl<T: Real> RotSymConformal<T> {
    pub fn new(profile: RotProfile, rho_max: f64) -> Result<Self> {
        validate_profile(profile, rho_max)?;
        let rho0 = T::lit(rho_max);
        Ok(Self { profile, rho0, k: profile.eval(rho0).0 })
    }

    /// Flat radius of the conformal disk.
    pub fn flat_radius(&self) -> T {
        self.k
    }

    /// `ln r(ρ) = ln k − ln(ρ₀/ρ) − ∫_ρ^{ρ₀} (1/s − 1/t) dt`.
    pub fn log_radius(&self, rho: T) -> T {
        let profile = self.profile;
        let integrand = move |t: T| {
            let s = profile.eval(t).0;
            T::one() / s - T::one() / t
        };
        let tail = adaptive_gauss(&integrand, rho, self.rho0, T::lit(1e-14), 30);
        self.k.ln() - (self.rho0 / rho).ln() - tail
    }

    /// Geodesic radius `ρ` at conformal radius `r` by safeguarded Newton.
    pub fn rho_of_r(&self, r: T) -> T {
        if r >= self.k {
            return self.rho0;
        }
        let target = r.ln();
        let (mut lo, mut hi) = (T::zero(), self.rho0);
        let mut rho = (self.rho0 * r / self.k).max(T::lit(1e-300));
        for _ in 0..100 {
            let f = self.log_radius(rho) - target;
            if f > T::zero() {
                hi = rho;
            } else {
                lo = rho;
            }
            let step = f * self.profile.eval(rho).0;
            let mut next = rho - step;
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            if (next - rho).abs() <= T::lit(4.0) * T::epsilon() * rho {
                return next;
            }
            rho = next;
        }
        rho
    }

    /// `φ = ln(s/r)` and its radial derivatives.
    pub fn jet(&self, r: T) -> RadialJet<T> {
        let rho = self.rho_of_r(r);
        let (s, ds, dds) = self.profile.eval(rho);
        let d_r_over_r = (ds - T::one()) / (r * r);
        RadialJet {
            value: (s / r).ln(),
            d_r: (ds - T::one()) / r,
            d_rr: dds * s / (r * r) - d_r_over_r,
            d_r_over_r,
        }
    }
}

/// Adaptive Gauss–Legendre (10 point) with interval halving.
fn adaptive_gauss<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T, depth: usize) -> T {
    let whole = crate::quadrature::integrate(f, a, b, 1, 10);
    let mid = (a + b) * T::lit(0.5);
    let left = crate::quadrature::integrate(f, a, mid, 1, 10);
    let right = crate::quadrature::integrate(f, mid, b, 1, 10);
    if depth == 0 || (left + right - whole).abs() <= tol * (T::one() + whole.abs()) {
        left + right
    } else {
        adaptive_gauss(f, a, mid, tol, depth - 1) + adaptive_gauss(f, mid, b, tol, depth - 1)
    }
}

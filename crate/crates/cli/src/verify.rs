//! Verification suites. Each check records its value and the margin by which
//! it clears (positive) or misses (negative) its bound.

use std::fmt;

use quasilocal_core::bvp::kernel::kernel_basis;
use quasilocal_core::bvp::system::{Condition, ConstrainedSystem};
use quasilocal_core::clifford::{boundary_involution, build_clifford_rep, FormAlgebra};
use quasilocal_core::dirac::{default_mode, green_residual, inner, lichnerowicz_residual, random_smooth_field};
use quasilocal_core::geometry::{build_domain, RadialFactor};
use quasilocal_core::{
    quasilocal_energy, CMat, ConformalFactor, Cx, EnergyRequest, Fiber, FiberPath, MetricField, MetricSpec, Method,
    Topology,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Clifford,
    Identities,
    Kernel,
    Positivity,
    Agreement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::with_margin(name, value, bound - value)
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::with_margin(name, value, value - bound)
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self::with_margin(name, value, (value - lo).min(hi - value))
    }

    fn with_margin(name: impl Into<String>, value: f64, margin: f64) -> Self {
        // NaN fails
        Self { name: name.into(), value, margin, passed: margin >= 0.0 }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} value={:.6e} margin={:.3e}", self.name, self.value, self.margin)
    }
}

pub fn run_verify(suite: Suite, seed: u64) -> Result<Vec<Check>> {
    match suite {
        Suite::Clifford => clifford(seed),
        Suite::Identities => identities(seed),
        Suite::Kernel => kernel(seed),
        Suite::Positivity => positivity(seed, POSITIVITY_SPECS, (24, 48)),
        Suite::Agreement => agreement(seed, (48, 96)),
    }
}

const EXACT: f64 = 1e-12;

fn max_dev(a: &CMat, b: &CMat) -> f64 {
    (a - b).max_abs()
}

fn clifford(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in [2, 4] {
        let rep = build_clifford_rep::<f64>(n)?;
        let id = CMat::identity(rep.spinor_dim());
        let mut worst = 0.0f64;
        for a in 1..=n {
            for b in 1..=n {
                let expect = if a == b { id.scale_re(2.0) } else { CMat::zeros(id.rows(), id.cols()) };
                worst = worst.max(max_dev(&rep.gamma(a).anticommutator(rep.gamma(b)), &expect));
            }
            worst = worst.max(max_dev(&rep.epsilon().anticommutator(rep.gamma(a)), &CMat::zeros(id.rows(), id.cols())));
        }
        worst = worst.max(max_dev(&(rep.epsilon() * rep.epsilon()), &id));
        checks.push(Check::at_most(format!("clifford relations n={n}"), worst, EXACT));
    }
    let forms = FormAlgebra::<f64>::new(2)?;
    let zero = CMat::zeros(forms.dim(), forms.dim());
    let mut worst = 0.0f64;
    for a in 1..=2 {
        for b in 1..=2 {
            worst = worst.max(max_dev(&forms.gamma(a).anticommutator(forms.gamma_hat(b)), &zero));
        }
    }
    checks.push(Check::at_most("form actions anticommute", worst, EXACT));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = CMat::identity(forms.dim());
    for k in 0..4 {
        let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let b = boundary_involution(&forms, angle)?;
        let dev = max_dev(&(&b.t * &b.t), &id)
            .max(max_dev(&b.t, &b.t.adjoint()))
            .max(max_dev(&b.t.anticommutator(&b.gamma_n), &zero))
            .max((b.pi_plus.trace() - Cx::new(2.0, 0.0)).norm());
        checks.push(Check::at_most(format!("boundary involution sample {k}"), dev, EXACT));
    }
    Ok(checks)
}

/// Mesh levels of the refinement studies.
pub const IDENTITY_LEVELS: [(usize, usize); 3] = [(16, 32), (32, 64), (64, 128)];

/// Green and Lichnerowicz residuals per level, spinor fiber.
pub fn identity_residuals(spec: &MetricSpec, seed: u64) -> Result<Vec<(f64, f64)>> {
    let fiber = Fiber::new(FiberPath::Spinor)?;
    IDENTITY_LEVELS
        .iter()
        .map(|&res| {
            let d = build_domain::<f64>(spec, res)?;
            let mode = default_mode(&d);
            let u = random_smooth_field(&d, fiber.dim(), seed);
            let v = random_smooth_field(&d, fiber.dim(), seed.wrapping_add(1));
            Ok((green_residual(&d, &fiber, mode, &u, &v)?, lichnerowicz_residual(&d, &fiber, mode, &u)?))
        })
        .collect()
}

fn identities(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (label, spec) in [("flat", flat_disk()), ("conformal", conformal_bump(0.5)), ("stretch", stretch(0.2))] {
        let r = identity_residuals(&spec, seed)?;
        for (what, values) in [("green", r.iter().map(|x| x.0).collect::<Vec<_>>()), ("lichnerowicz", r.iter().map(|x| x.1).collect())] {
            for (i, pair) in values.windows(2).enumerate() {
                checks.push(Check::within(format!("{label} {what} decay {i}"), pair[0] / pair[1], 1.5, 3.0));
            }
        }
    }
    Ok(checks)
}

pub fn flat_disk() -> MetricSpec {
    MetricSpec::FlatDisk { radius: 1.0 }
}

pub fn flat_annulus() -> MetricSpec {
    MetricSpec::General2D { topology: Topology::Annulus { inner: 0.5, outer: 1.0 }, metric: MetricField::Identity }
}

/// `φ = c(1 − r²)` on the unit disk.
pub fn conformal_bump(c: f64) -> MetricSpec {
    MetricSpec::ConformalFlat { topology: Topology::Disk { radius: 1.0 }, phi: ConformalFactor::PolyR2 { coeffs: vec![c, -c] } }
}

pub fn stretch(epsilon: f64) -> MetricSpec {
    MetricSpec::General2D { topology: Topology::Disk { radius: 1.0 }, metric: MetricField::AxisStretch { epsilon } }
}

/// Kernel dimension of the twisted problem and, for disks, the cosine of the
/// first kernel vector against the volume form carried by the conformal
/// factor (the plain volume form when there is none).
pub fn kernel_alignment(spec: &MetricSpec, resolution: (usize, usize), seed: u64) -> Result<(usize, Option<f64>)> {
    let d = build_domain::<f64>(spec, resolution)?;
    let s = ConstrainedSystem::new(&d, Fiber::new(FiberPath::Twisted)?, default_mode(&d), Condition::PiPlus)?;
    let k = kernel_basis(&d, &s, 6, seed);
    let Some(first) = k.basis.first() else { return Ok((k.dim, None)) };
    let vol = s.fiber.forms.as_ref().expect("twisted fiber").volume_form();
    let expected: Vec<Cx<f64>> = (0..d.len())
        .flat_map(|p| {
            let w = d.phi.as_ref().map_or(1.0, |phi| (-0.5 * phi[p]).exp());
            vol.iter().map(move |v| v.scale(w))
        })
        .collect();
    let a = &first.values;
    let f = vol.len();
    let cos = inner(&d, f, a, &expected).norm() / (inner(&d, f, a, a).re * inner(&d, f, &expected, &expected).re).sqrt();
    Ok((k.dim, Some(cos)))
}

fn kernel(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (label, spec) in [("flat disk", flat_disk()), ("conformal disk", conformal_bump(0.5))] {
        let (dim, cos) = kernel_alignment(&spec, (32, 64), seed)?;
        checks.push(Check::within(format!("{label} kernel dimension"), dim as f64, 1.0, 1.0));
        checks.push(Check::at_least(format!("{label} kernel cosine"), cos.unwrap_or(0.0), 0.99));
    }
    let (dim, _) = kernel_alignment(&flat_annulus(), (32, 64), seed)?;
    checks.push(Check::within("flat annulus kernel dimension", dim as f64, 2.0, 2.0));
    Ok(checks)
}

pub const POSITIVITY_SPECS: usize = 20;

/// `φ = c₁(r² − 1) + c₂(r⁴ − 1)` with coefficients drawn from `seed`, kept
/// only when the scalar curvature `−2e^{−2φ}Δφ` is nonnegative.
pub fn positive_curvature_specs(seed: u64, count: usize) -> Vec<MetricSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c1 = rng.gen_range(-1.0..0.0);
        let c2 = rng.gen_range(-0.5..0.5);
        let phi = ConformalFactor::PolyR2 { coeffs: vec![-c1 - c2, c1, c2] };
        let factor = RadialFactor::<f64>::from_spec(&phi).expect("polynomial factor");
        if (0..=200).all(|k| factor.jet(k as f64 / 200.0).laplacian() <= 0.0) {
            out.push(MetricSpec::ConformalFlat { topology: Topology::Disk { radius: 1.0 }, phi });
        }
    }
    out
}

/// Runs the seeded positivity family on worker threads; results keep the
/// input order.
pub fn positivity(seed: u64, count: usize, resolution: (usize, usize)) -> Result<Vec<Check>> {
    let specs = positive_curvature_specs(seed, count);
    let reports: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| {
                let mut req = EnergyRequest::new(spec.clone(), resolution);
                req.seed = seed;
                scope.spawn(move || quasilocal_energy(&req))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut checks = Vec::new();
    for (i, rep) in reports.into_iter().enumerate() {
        let rep = rep?;
        let energy = rep.energy.finite().unwrap_or(f64::NEG_INFINITY);
        checks.push(Check::at_least(format!("spec {i} energy"), energy, -1e-4));
        let bulk = rep.method_values.get(&Method::Bulk).and_then(|v| v.finite()).unwrap_or(f64::NEG_INFINITY);
        checks.push(Check::at_least(format!("spec {i} bulk form"), bulk, 0.0));
    }
    Ok(checks)
}

/// Largest pairwise gap between the discrete evaluators, and the energy.
pub fn method_spread(rep: &quasilocal_core::EnergyReport) -> (f64, f64) {
    let values: Vec<f64> = Method::DISCRETE.iter().filter_map(|m| rep.method_values.get(m).and_then(|v| v.finite())).collect();
    let mut spread = if values.len() == Method::DISCRETE.len() { 0.0 } else { f64::INFINITY };
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            spread = f64::max(spread, (a - b).abs());
        }
    }
    (spread, rep.energy.finite().unwrap_or(f64::NAN))
}

fn agreement(seed: u64, resolution: (usize, usize)) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (label, spec) in [("flat", flat_disk()), ("conformal", conformal_bump(0.5))] {
        let mut req = EnergyRequest::new(spec, resolution);
        req.seed = seed;
        let rep = quasilocal_energy(&req)?;
        let (spread, energy) = method_spread(&rep);
        checks.push(Check::at_most(format!("{label} method spread"), spread, 0.05 * energy.abs() + 1e-4));
        if let Some(cf) = rep.closed_form.and_then(|c| c.energy.finite()) {
            checks.push(Check::at_most(format!("{label} vs closed form"), (energy - cf).abs(), 0.02 * cf.abs() + 5e-3));
        }
    }
    Ok(checks)
}

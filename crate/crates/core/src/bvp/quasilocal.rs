//! End-to-end evaluation: build the domain, solve, minimize over the kernel
//! and evaluate every energy expression.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::closed_form::{brown_york, closed_form_for, ClosedFormResult, EnergyValue};
use crate::dirac::{default_mode, green_residual, lichnerowicz_residual, random_smooth_field, AssemblyMode, Fiber, FiberPath, SpinorField};
use crate::error::{Error, Result};
use crate::geometry::{boundary_geometry, build_domain, DiscreteDomain, MetricSpec};
use crate::scalar::Cx;

use super::energy::{energy_boundary, energy_normal_derivative, BulkForm};
use super::kernel::{chirality_data, kernel_basis, project_boundary_data, select_components, solve_bvp, unit_data, KernelInfo};
use super::minimize::{minimize_over_kernel, Minimum};
use super::system::{Condition, ConstrainedSystem};

/// Number of smallest singular values examined for the kernel.
const SPECTRUM_COUNT: usize = 6;
/// Relative size below which a kernel eigenvalue of the energy form is flat.
const FLAT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BoundaryFormula,
    NormalDerivative,
    Bulk,
    ClosedForm,
}

impl Method {
    pub const DISCRETE: [Method; 3] = [Method::BoundaryFormula, Method::NormalDerivative, Method::Bulk];

    pub fn name(self) -> &'static str {
        match self {
            Self::BoundaryFormula => "boundary_formula",
            Self::NormalDerivative => "normal_derivative",
            Self::Bulk => "bulk",
            Self::ClosedForm => "closed_form",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    /// The twisted construction, which is always applicable.
    #[default]
    Auto,
    Spinor,
    Twisted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRequest {
    pub spec: MetricSpec,
    /// Boundary component labels; empty selects the whole boundary.
    #[serde(default)]
    pub components: Vec<String>,
    pub resolution: (usize, usize),
    #[serde(default)]
    pub path: PathChoice,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
}

fn default_method() -> Method {
    Method::Bulk
}

impl EnergyRequest {
    pub fn new(spec: MetricSpec, resolution: (usize, usize)) -> Self {
        Self { spec, components: Vec::new(), resolution, path: PathChoice::Auto, method: Method::Bulk, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub dim: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub ambiguous: bool,
}

impl From<&KernelInfo<f64>> for KernelSummary {
    fn from(k: &KernelInfo<f64>) -> Self {
        Self { dim: k.dim, singular_values: k.singular_values.clone(), threshold: k.threshold, ambiguous: k.ambiguous }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖Dψ‖ / ‖data‖` of the final field(s).
    pub dirac: f64,
    /// Largest violation of the prescribed boundary half.
    pub boundary: f64,
    /// Relative optimality residual of the least-squares solve.
    pub normal_equation: f64,
    /// Green's formula residual on random smooth fields.
    pub green: f64,
    /// Integrated Lichnerowicz formula residual on a random smooth field.
    pub lichnerowicz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: EnergyValue,
    pub method: Method,
    pub path: FiberPath,
    pub assembly: AssemblyMode,
    pub kernel: KernelSummary,
    pub method_values: BTreeMap<Method, EnergyValue>,
    /// Pairwise `|E_a − E_b|` between finite values, keyed `"a-b"`.
    pub cross_check_deltas: BTreeMap<String, f64>,
    pub brown_york: f64,
    pub closed_form: Option<ClosedFormResult>,
    pub residuals: Residuals,
    pub resolution: (usize, usize),
    pub data_modified: bool,
    /// The kernel gap or the minimization was numerically ambiguous.
    pub flagged: bool,
    pub notes: Vec<String>,
}

impl EnergyReport {
    pub fn is_neg_inf(&self) -> bool {
        self.energy.is_neg_inf()
    }
}

/// The discrete energy of one evaluator as a quadratic function of the field.
fn evaluator<'a>(
    method: Method,
    domain: &'a DiscreteDomain<f64>,
    fiber: &'a Fiber<f64>,
    bulk: &'a BulkForm<f64>,
) -> impl Fn(&[Cx<f64>]) -> f64 + 'a {
    move |u: &[Cx<f64>]| {
        let psi = SpinorField { values: u.to_vec(), fiber_dim: fiber.dim() };
        match method {
            Method::BoundaryFormula => energy_boundary(domain, fiber, &psi).expect("fiber checked"),
            Method::NormalDerivative => energy_normal_derivative(domain, fiber, &psi).expect("fiber checked"),
            _ => bulk.eval(u, u).re,
        }
    }
}

fn combine(psi0: &[Cx<f64>], kernel: &[SpinorField<f64>], t: &[Cx<f64>]) -> Vec<Cx<f64>> {
    let mut out = psi0.to_vec();
    for (eta, &c) in kernel.iter().zip(t) {
        for (o, v) in out.iter_mut().zip(&eta.values) {
            *o += c * v;
        }
    }
    out
}

struct Outcome {
    values: BTreeMap<Method, EnergyValue>,
    kernel: KernelSummary,
    residuals: Residuals,
    data_modified: bool,
    flagged: bool,
    notes: Vec<String>,
}

fn twisted(domain: &DiscreteDomain<f64>, components: &[usize], mode: AssemblyMode, seed: u64) -> Result<Outcome> {
    let fiber = Fiber::new(FiberPath::Twisted)?;
    let system = ConstrainedSystem::new(domain, fiber.clone(), mode, Condition::PiPlus)?;
    let kernel = kernel_basis(domain, &system, SPECTRUM_COUNT, seed);
    let raw = unit_data(domain, &fiber, components)?;
    let data = project_boundary_data(domain, &fiber, &raw, &kernel);
    let solution = solve_bvp(domain, &system, &data, &kernel)?;
    let bulk = BulkForm::new(domain, &fiber);
    let psi0 = &solution.field.values;
    let mut notes = Vec::new();
    let mut flagged = kernel.ambiguous;
    if kernel.ambiguous {
        notes.push("kernel spectral gap below the required separation".into());
    }
    let rel = FLAT_TOLERANCE;
    let minimum = minimize_over_kernel(evaluator(Method::Bulk, domain, &fiber, &bulk), psi0, &kernel_fields(&kernel), rel);
    let mut values = BTreeMap::new();
    match minimum {
        Minimum::Finite { coefficients, .. } => {
            // evaluated at the minimizer so the bulk value is a sum of its
            // (nonnegative when R ≥ 0) terms
            let psi = combine(psi0, &kernel.basis, &coefficients);
            for m in Method::DISCRETE {
                values.insert(m, EnergyValue::Finite(evaluator(m, domain, &fiber, &bulk)(&psi)));
            }
        }
        Minimum::Unbounded { flat_direction } => {
            if flat_direction {
                flagged = true;
                notes.push("energy unbounded along a flat kernel direction with nonzero slope".into());
            }
            values.insert(Method::Bulk, EnergyValue::NegInf);
            // every evaluator is minimized over the same affine space
            for m in [Method::BoundaryFormula, Method::NormalDerivative] {
                let v = match minimize_over_kernel(evaluator(m, domain, &fiber, &bulk), psi0, &kernel_fields(&kernel), rel) {
                    Minimum::Finite { value, .. } => EnergyValue::Finite(value),
                    Minimum::Unbounded { .. } => EnergyValue::NegInf,
                };
                values.insert(m, v);
            }
        }
    }
    Ok(Outcome {
        values,
        kernel: (&kernel).into(),
        residuals: Residuals {
            dirac: solution.dirac_residual,
            boundary: solution.boundary_residual,
            normal_equation: solution.normal_residual,
            ..Residuals::default()
        },
        data_modified: data.modified,
        flagged,
        notes,
    })
}

fn kernel_fields(kernel: &KernelInfo<f64>) -> Vec<Vec<Cx<f64>>> {
    kernel.basis.iter().map(|f| f.values.clone()).collect()
}

/// Spinor decomposition: one boundary problem per basis spinor of each
/// chirality, `E = 2^{−n/2} Σ_a (E(ψ_a) + E(ψ′_a))`. Returns `None` when one
/// of the constituent problems has a kernel, in which case the decomposition
/// does not determine the energy.
fn spinor(domain: &DiscreteDomain<f64>, components: &[usize], mode: AssemblyMode, seed: u64) -> Result<Option<Outcome>> {
    let fiber = Fiber::new(FiberPath::Spinor)?;
    let f = fiber.dim();
    let bulk = BulkForm::new(domain, &fiber);
    let mut totals: BTreeMap<Method, f64> = Method::DISCRETE.iter().map(|&m| (m, 0.0)).collect();
    let mut residuals = Residuals::default();
    let mut singular_values = Vec::new();
    let mut threshold: f64 = 0.0;
    let mut ambiguous = false;
    for sign in [1i8, -1] {
        let system = ConstrainedSystem::new(domain, fiber.clone(), mode, Condition::Chirality { sign })?;
        let kernel = kernel_basis(domain, &system, SPECTRUM_COUNT, seed);
        if kernel.dim > 0 {
            return Ok(None);
        }
        ambiguous |= kernel.ambiguous;
        threshold = threshold.max(kernel.threshold);
        singular_values.extend(kernel.singular_values.iter().copied());
        // basis of the sign-chirality eigenspace at the background normal e₁
        let chirality = fiber.rep.boundary_chirality(&[1.0, 0.0]);
        let (_, vecs) = crate::dense::hermitian_eigen(&chirality);
        let target = if sign > 0 { f - f / 2.. f } else { 0..f / 2 };
        for a in target {
            let eps = vecs.column(a);
            let data = chirality_data(domain, &fiber, &eps, components, sign)?;
            let solution = solve_bvp(domain, &system, &data, &kernel)?;
            for m in Method::DISCRETE {
                *totals.get_mut(&m).unwrap() += evaluator(m, domain, &fiber, &bulk)(&solution.field.values);
            }
            residuals.dirac = residuals.dirac.max(solution.dirac_residual);
            residuals.boundary = residuals.boundary.max(solution.boundary_residual);
            residuals.normal_equation = residuals.normal_equation.max(solution.normal_residual);
        }
    }
    let norm = (f as f64).recip();
    singular_values.sort_by(f64::total_cmp);
    Ok(Some(Outcome {
        values: totals.into_iter().map(|(m, v)| (m, EnergyValue::Finite(v * norm))).collect(),
        kernel: KernelSummary { dim: 0, singular_values, threshold, ambiguous },
        residuals,
        data_modified: false,
        flagged: ambiguous,
        notes: Vec::new(),
    }))
}

fn identity_residuals(domain: &DiscreteDomain<f64>, mode: AssemblyMode, seed: u64) -> Result<(f64, f64)> {
    let fiber = Fiber::new(FiberPath::Spinor)?;
    let u = random_smooth_field(domain, fiber.dim(), seed);
    let v = random_smooth_field(domain, fiber.dim(), seed.wrapping_add(1));
    Ok((green_residual(domain, &fiber, mode, &u, &v)?, lichnerowicz_residual(domain, &fiber, mode, &u)?))
}

/// Quasilocal energy of `C ⊂ ∂N` relative to the flat background.
pub fn quasilocal_energy(request: &EnergyRequest) -> Result<EnergyReport> {
    let closed_form = closed_form_for(&request.spec);
    if let MetricSpec::RotSym { n, .. } = request.spec {
        if n != 2 {
            // no grid in other dimensions: the closed form is the only evaluator
            return match (request.method, closed_form) {
                (Method::ClosedForm, Some(cf)) => Ok(closed_form_only(request, cf)),
                _ => Err(Error::Unsupported(format!("dimension {n} is available only through method closed_form"))),
            };
        }
    }
    let domain = build_domain::<f64>(&request.spec, request.resolution)?;
    let components = select_components(&domain, &request.components)?;
    let mode = default_mode(&domain);
    let mut notes = Vec::new();
    let (outcome, path) = match request.path {
        PathChoice::Spinor => match spinor(&domain, &components, mode, request.seed)? {
            Some(o) => (o, FiberPath::Spinor),
            None => {
                notes.push("spinor problem has a kernel; fell back to the twisted path".into());
                (twisted(&domain, &components, mode, request.seed)?, FiberPath::Twisted)
            }
        },
        PathChoice::Auto | PathChoice::Twisted => (twisted(&domain, &components, mode, request.seed)?, FiberPath::Twisted),
    };
    notes.extend(outcome.notes);
    let mut values = outcome.values;
    if let Some(cf) = closed_form {
        values.insert(Method::ClosedForm, cf.energy);
    }
    let energy = match values.get(&request.method) {
        Some(&v) => v,
        None => return Err(Error::Unsupported("no closed form applies to this specification".into())),
    };
    let bg = boundary_geometry(&domain);
    let by = brown_york(&bg, &components);
    let mut residuals = outcome.residuals;
    (residuals.green, residuals.lichnerowicz) = identity_residuals(&domain, mode, request.seed)?;
    Ok(EnergyReport {
        energy,
        method: request.method,
        path,
        assembly: mode,
        kernel: outcome.kernel,
        cross_check_deltas: deltas(&values, by),
        method_values: values,
        brown_york: by,
        closed_form,
        residuals,
        resolution: request.resolution,
        data_modified: outcome.data_modified,
        flagged: outcome.flagged,
        notes,
    })
}

fn deltas(values: &BTreeMap<Method, EnergyValue>, brown_york: f64) -> BTreeMap<String, f64> {
    let finite: Vec<(&str, f64)> = values
        .iter()
        .filter_map(|(m, v)| v.finite().map(|x| (m.name(), x)))
        .chain(std::iter::once(("brown_york", brown_york)))
        .collect();
    let mut out = BTreeMap::new();
    for (i, a) in finite.iter().enumerate() {
        for b in &finite[i + 1..] {
            out.insert(format!("{}-{}", a.0, b.0), (a.1 - b.1).abs());
        }
    }
    out
}

fn closed_form_only(request: &EnergyRequest, cf: ClosedFormResult) -> EnergyReport {
    EnergyReport {
        energy: cf.energy,
        method: Method::ClosedForm,
        path: FiberPath::Twisted,
        assembly: AssemblyMode::Covariant,
        kernel: KernelSummary { dim: 0, singular_values: Vec::new(), threshold: 0.0, ambiguous: false },
        method_values: BTreeMap::from([(Method::ClosedForm, cf.energy)]),
        cross_check_deltas: BTreeMap::new(),
        brown_york: cf.energy.finite().unwrap_or(f64::NEG_INFINITY),
        closed_form: Some(cf),
        residuals: Residuals::default(),
        resolution: request.resolution,
        data_modified: false,
        flagged: false,
        notes: vec!["closed form only; no discrete evaluation in this dimension".into()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConformalFactor, MetricField, RotProfile, Topology};
    use std::f64::consts::PI;

    fn conformal(c: f64) -> MetricSpec {
        MetricSpec::ConformalFlat { topology: Topology::Disk { radius: 1.0 }, phi: ConformalFactor::PolyR2 { coeffs: vec![c, -c] } }
    }

    #[test]
    fn flat_disk_reports_zero() {
        let rep = quasilocal_energy(&EnergyRequest::new(MetricSpec::FlatDisk { radius: 1.0 }, (16, 32))).unwrap();
        assert_eq!(rep.kernel.dim, 1);
        assert!(!rep.data_modified && !rep.flagged);
        for v in rep.method_values.values() {
            assert!(v.finite().unwrap().abs() < 1e-8);
        }
        assert!(rep.brown_york.abs() < 1e-10);
    }

    #[test]
    fn conformal_bump_reports_pi() {
        let rep = quasilocal_energy(&EnergyRequest::new(conformal(0.5), (24, 48))).unwrap();
        assert!((rep.energy.finite().unwrap() - PI).abs() < 0.02 * PI);
        assert!((rep.closed_form.unwrap().energy.finite().unwrap() - PI).abs() < 1e-12);
        assert!((rep.brown_york - PI).abs() < 1e-8);
        // every finite pair is cross-checked, Brown–York included
        assert_eq!(rep.cross_check_deltas.len(), 10);
    }

    #[test]
    fn decreasing_factor_is_negative_infinity() {
        let rep = quasilocal_energy(&EnergyRequest::new(conformal(-0.5), (16, 32))).unwrap();
        assert!(rep.is_neg_inf());
        assert!(rep.method_values.values().all(|v| v.is_neg_inf()));
    }

    #[test]
    fn paths_agree() {
        let mut req = EnergyRequest::new(conformal(0.3), (16, 32));
        let twisted = quasilocal_energy(&req).unwrap();
        req.path = PathChoice::Spinor;
        let spinor = quasilocal_energy(&req).unwrap();
        assert_eq!(spinor.path, FiberPath::Spinor);
        let (a, b) = (twisted.energy.finite().unwrap(), spinor.energy.finite().unwrap());
        assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{a} {b}");
    }

    #[test]
    fn spinor_path_with_kernel_falls_back() {
        // the flat annulus carries harmonic spinors with the chirality condition
        let spec = MetricSpec::General2D { topology: Topology::Annulus { inner: 0.5, outer: 1.0 }, metric: MetricField::Identity };
        let mut req = EnergyRequest::new(spec, (16, 32));
        req.path = PathChoice::Spinor;
        let rep = quasilocal_energy(&req).unwrap();
        if rep.path == FiberPath::Twisted {
            assert!(!rep.notes.is_empty());
        }
        assert!(rep.energy.finite().unwrap().abs() < 5e-3);
    }

    #[test]
    fn closed_form_method_requires_a_closed_form() {
        let spec = MetricSpec::General2D { topology: Topology::Disk { radius: 1.0 }, metric: MetricField::AxisStretch { epsilon: 0.1 } };
        let mut req = EnergyRequest::new(spec, (16, 32));
        req.method = Method::ClosedForm;
        assert!(matches!(quasilocal_energy(&req), Err(Error::Unsupported(_))));
    }

    #[test]
    fn higher_dimensional_balls_use_the_closed_form() {
        let mut req = EnergyRequest::new(MetricSpec::RotSym { n: 3, profile: RotProfile::Sin, rho_max: PI / 3.0 }, (16, 32));
        assert!(quasilocal_energy(&req).is_err());
        req.method = Method::ClosedForm;
        let rep = quasilocal_energy(&req).unwrap();
        assert!((rep.energy.finite().unwrap() - 3f64.sqrt() * PI).abs() < 1e-12);
    }

    #[test]
    fn report_round_trips_through_json() {
        let rep = quasilocal_energy(&EnergyRequest::new(conformal(-0.5), (16, 32))).unwrap();
        let back: EnergyReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(back, rep);
    }
}

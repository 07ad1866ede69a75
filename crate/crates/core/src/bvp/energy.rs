//! The three energy evaluators.
//!
//! For a harmonic `ψ` with flat background they agree in the continuum:
//! `−∫_{∂N}⟨ψ,∇_nψ⟩ = ∫_N |∇ψ|² + (R/4)|ψ|²` (integrated Lichnerowicz
//! formula), and the normal derivative is rewritten tangentially through the
//! Dirac equation. At finite resolution they differ by discretization error.

use crate::dense::CMat;
use crate::dirac::{boundary_operators, boundary_inner, covariant_derivative, restrict, Fiber, FiberPath, SpinorField};
use crate::error::Result;
use crate::geometry::DiscreteDomain;
use crate::scalar::{cx, dot, Cx, Real};
use crate::sparse::CsrMatrix;

/// `−Re ∫_{∂N}⟨ψ, ∇_n ψ⟩` with the one-sided normal difference.
pub fn energy_normal_derivative<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, psi: &SpinorField<T>) -> Result<T> {
    psi.check_fiber(fiber)?;
    let f = fiber.dim();
    let mut total = T::zero();
    for c in 0..domain.boundary.len() {
        let ops = boundary_operators(domain, fiber, c);
        let b = restrict(domain, c, f, &psi.values);
        let nb = ops.normal.mul_vec(&psi.values);
        total = total - boundary_inner(domain, c, f, &b, &nb).re;
    }
    Ok(total)
}

/// The Hermitian form `B(u, v) = ∫ Σ_α⟨∇_α u, ∇_α v⟩ + (R/4)⟨u, v⟩`.
pub struct BulkForm<T: Real> {
    nabla: [CsrMatrix<T>; 2],
    weights: Vec<T>,
    quarter_r: Vec<T>,
    f: usize,
}

impl<T: Real> BulkForm<T> {
    pub fn new(domain: &DiscreteDomain<T>, fiber: &Fiber<T>) -> Self {
        Self {
            nabla: covariant_derivative(domain, fiber),
            weights: domain.weights.clone(),
            quarter_r: domain.scalar_r.iter().map(|&r| r * T::lit(0.25)).collect(),
            f: fiber.dim(),
        }
    }

    /// `(∇₁u, ∇₂u)`, cached by callers that evaluate many pairs.
    pub fn gradient(&self, u: &[Cx<T>]) -> [Vec<Cx<T>>; 2] {
        [self.nabla[0].mul_vec(u), self.nabla[1].mul_vec(u)]
    }

    pub fn eval_with(&self, u: &[Cx<T>], gu: &[Vec<Cx<T>>; 2], v: &[Cx<T>], gv: &[Vec<Cx<T>>; 2]) -> Cx<T> {
        let f = self.f;
        let mut total = cx(T::zero(), T::zero());
        for p in 0..self.weights.len() {
            let s = p * f..(p + 1) * f;
            let local = dot(&gu[0][s.clone()], &gv[0][s.clone()])
                + dot(&gu[1][s.clone()], &gv[1][s.clone()])
                + dot(&u[s.clone()], &v[s]).scale(self.quarter_r[p]);
            total = total + local.scale(self.weights[p]);
        }
        total
    }

    pub fn eval(&self, u: &[Cx<T>], v: &[Cx<T>]) -> Cx<T> {
        self.eval_with(u, &self.gradient(u), v, &self.gradient(v))
    }
}

/// `∫_N |∇ψ|² + (R/4)|ψ|²`.
pub fn energy_bulk<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, psi: &SpinorField<T>) -> Result<T> {
    psi.check_fiber(fiber)?;
    Ok(BulkForm::new(domain, fiber).eval(&psi.values, &psi.values).re)
}

/// `exp(−β/2 · J)` for `J² = −1`.
fn half_angle_rotor<T: Real>(j: &CMat<T>, beta: T) -> CMat<T> {
    let half = beta * T::lit(0.5);
    &CMat::identity(j.rows()).scale_re(half.cos()) - &j.scale_re(half.sin())
}

fn angle<T: Real>(v: &[T]) -> T {
    v[1].atan2(v[0])
}

fn wrap<T: Real>(a: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let mut a = a % two_pi;
    if a > T::PI() {
        a = a - two_pi;
    } else if a < -T::PI() {
        a = a + two_pi;
    }
    a
}

/// Boundary expression of the energy.
///
/// Twisted path: `−∫⟨ψ, D^∂ψ⟩ − ½∫H_N|ψ|² + ½∫⟨ψ, γⁿγ^t γ̂ⁿγ̂^t Â ψ⟩`, with
/// `D^∂ = −γⁿγ^t∇^∂_t` evaluated in the adapted gauge of both frames (where
/// the boundary connection of a circle vanishes).
///
/// Spinor path: `Re ∫⟨ψ, γⁿγ^t∇_t ψ⟩`, the Dirac-equation rewriting of the
/// normal derivative.
pub fn energy_boundary<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, psi: &SpinorField<T>) -> Result<T> {
    psi.check_fiber(fiber)?;
    match fiber.path {
        FiberPath::Spinor => spinor_boundary_energy(domain, fiber, psi),
        FiberPath::Twisted => twisted_boundary_energy(domain, fiber, psi),
    }
}

fn spinor_boundary_energy<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, psi: &SpinorField<T>) -> Result<T> {
    let f = fiber.dim();
    let mut total = T::zero();
    for c in 0..domain.boundary.len() {
        let ops = boundary_operators(domain, fiber, c);
        let b = restrict(domain, c, f, &psi.values);
        let tb = ops.tangential.mul_vec(&psi.values);
        let image: Vec<Cx<T>> = (0..ops.gamma_n.len())
            .flat_map(|k| (&ops.gamma_n[k] * &ops.gamma_t[k]).apply(&tb[k * f..(k + 1) * f]))
            .collect();
        total = total + boundary_inner(domain, c, f, &b, &image).re;
    }
    Ok(total)
}

fn twisted_boundary_energy<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, psi: &SpinorField<T>) -> Result<T> {
    let forms = fiber.forms.as_ref().expect("twisted fiber carries the form algebra");
    let (g1, g2) = (forms.gamma(1), forms.gamma(2));
    let (h1, h2) = (forms.gamma_hat(1), forms.gamma_hat(2));
    let j_n = g1 * g2;
    let j_m = h1 * h2;
    let j_both = &j_n + &j_m;
    // adapted gauge: γ^t = γ¹, γⁿ = γ², and likewise for the hatted action
    let tangential = (g2 * g1).scale_re(-T::one());
    let shape = &(g2 * g1) * &(h2 * h1);
    let half = T::lit(0.5);
    let mut total = T::zero();
    for comp in &domain.boundary {
        let m = comp.nodes.len();
        let u_adj: Vec<CMat<T>> = (0..m)
            .map(|k| {
                let beta_m = angle(&comp.frame_m[k].tangent[0]);
                let delta = wrap(angle(&comp.frame_n[k].tangent[0]) - beta_m);
                // U = U_N(δ) · exp(−β_M/2 (γ¹γ² + γ̂¹γ̂²)) is single valued along the circle
                (&half_angle_rotor(&j_n, delta) * &half_angle_rotor(&j_both, beta_m)).adjoint()
            })
            .collect();
        let adapted: Vec<Vec<Cx<T>>> = (0..m).map(|k| u_adj[k].apply(psi.at(comp.nodes[k]))).collect();
        let dt = T::lit(2.0) * domain.grid.h_theta;
        for k in 0..m {
            let v = &adapted[k];
            let next = &adapted[(k + 1) % m];
            let prev = &adapted[(k + m - 1) % m];
            let scale = comp.tangent_sign / (comp.speed[k] * dt);
            // the gauge frame of N rotates along the circle: ½ω(e_t)γ¹γ² in adapted form
            let p = comp.nodes[k];
            let e_t = &comp.frame_n[k].tangent[0];
            let omega_t = domain.connection[p][0] * e_t[0] + domain.connection[p][1] * e_t[1];
            let twist = u_adj[k].apply(&j_n.apply(psi.at(p)));
            let deriv: Vec<Cx<T>> =
                next.iter().zip(prev).zip(&twist).map(|((a, b), c)| (*a - *b).scale(scale) + c.scale(half * omega_t)).collect();
            let d_boundary = tangential.apply(&deriv);
            let shape_term = shape.apply(v);
            let local = -dot(v, &d_boundary).re - half * comp.mean_curvature[k] * dot(v, v).re
                + half * comp.background_mean_curvature * dot(v, &shape_term).re;
            total = total + local * comp.ds[k];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::random_smooth_field;
    use crate::geometry::{build_domain, ConformalFactor, MetricSpec, Topology};
    use crate::scalar::re;

    fn flat() -> DiscreteDomain<f64> {
        build_domain(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32)).unwrap()
    }

    fn evaluators() -> [fn(&DiscreteDomain<f64>, &Fiber<f64>, &SpinorField<f64>) -> Result<f64>; 3] {
        [energy_boundary, energy_normal_derivative, energy_bulk]
    }

    #[test]
    fn flat_disk_unit_form_has_zero_energy() {
        let d = flat();
        let fiber = Fiber::new(FiberPath::Twisted).unwrap();
        let one = SpinorField::constant(d.len(), &fiber.forms.as_ref().unwrap().unit_form());
        for e in evaluators() {
            assert!(e(&d, &fiber, &one).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn the_boundary_terms_cancel_separately() {
        // −½∫H|1|² = −π and ½∫Â⟨1, γⁿγ^tγ̂ⁿγ̂^t 1⟩ = +π on the unit circle
        let d = flat();
        let comp = &d.boundary[0];
        let h: f64 = comp.mean_curvature.iter().zip(&comp.ds).map(|(h, w)| h * w).sum();
        assert!((0.5 * h - std::f64::consts::PI).abs() < 1e-10);
        assert!((0.5 * comp.background_mean_curvature * comp.ds.iter().sum::<f64>() - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn energies_are_quadratic() {
        let d = flat();
        for path in [FiberPath::Spinor, FiberPath::Twisted] {
            let fiber = Fiber::new(path).unwrap();
            let psi = random_smooth_field(&d, fiber.dim(), 11);
            let twice = psi.scaled(re(2.0));
            let rotated = psi.scaled(cx(0.6, 0.8));
            for e in evaluators() {
                let (a, b, c) = (e(&d, &fiber, &psi).unwrap(), e(&d, &fiber, &twice).unwrap(), e(&d, &fiber, &rotated).unwrap());
                assert!((b - 4.0 * a).abs() < 1e-10 * a.abs().max(1.0));
                assert!((c - a).abs() < 1e-10 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn transported_constant_has_the_conformal_energy() {
        let spec = MetricSpec::ConformalFlat { topology: Topology::Disk { radius: 1.0 }, phi: ConformalFactor::PolyR2 { coeffs: vec![0.5, -0.5] } };
        let d = build_domain::<f64>(&spec, (32, 64)).unwrap();
        let fiber = Fiber::new(FiberPath::Twisted).unwrap();
        let phi = d.phi.as_ref().unwrap();
        let one = fiber.forms.as_ref().unwrap().unit_form();
        let values = (0..d.len()).flat_map(|p| one.iter().map(move |v| v.scale((-0.5 * phi[p]).exp()))).collect();
        let psi = SpinorField { values, fiber_dim: 4 };
        for e in evaluators() {
            let v = e(&d, &fiber, &psi).unwrap();
            assert!((v - std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI, "{v}");
        }
    }

    #[test]
    fn mismatched_field_is_rejected() {
        let d = flat();
        let fiber = Fiber::new(FiberPath::Twisted).unwrap();
        let psi = random_smooth_field(&d, 2, 0);
        assert!(matches!(energy_bulk(&d, &fiber, &psi), Err(crate::error::Error::FiberMismatch { .. })));
    }
}

//! Kernel of the constrained system and boundary data.

use crate::clifford::spin_rotor;
use crate::dirac::{Fiber, FiberPath, SpinorField};
use crate::error::{Error, Result};
use crate::geometry::DiscreteDomain;
use crate::scalar::{cx, dot, norm, Cx, Real};
use crate::sparse::low_spectrum;

use super::system::{boundary_projectors, Condition, ConstrainedSystem};

/// Singular values below this multiple of `1/L` (L the outer radius) are
/// kernel candidates; the first one above it bounds the kernel.
const KERNEL_EDGE: f64 = 0.1;
/// Required separation between the kernel and the rest of the spectrum.
const GAP_RATIO: f64 = 100.0;
/// Absolute floor below which singular values count as exact zeros.
const FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct KernelInfo<T: Real> {
    pub dim: usize,
    /// `L²`-orthonormal kernel fields (homogeneous boundary condition).
    pub basis: Vec<SpinorField<T>>,
    /// The same fields in system coordinates.
    pub coordinates: Vec<Vec<Cx<T>>>,
    /// Smallest singular values of the constrained system, ascending.
    pub singular_values: Vec<T>,
    /// Singular values at or below this count as kernel.
    pub threshold: T,
    /// The kernel is not separated from the rest of the spectrum by the
    /// required factor.
    pub ambiguous: bool,
}

impl<T: Real> KernelInfo<T> {
    pub fn empty() -> Self {
        Self {
            dim: 0,
            basis: Vec::new(),
            coordinates: Vec::new(),
            singular_values: Vec::new(),
            threshold: T::zero(),
            ambiguous: false,
        }
    }
}

/// Outer radius of the domain, the length scale for the kernel threshold.
fn length_scale<T: Real>(domain: &DiscreteDomain<T>) -> T {
    domain.boundary.iter().fold(T::zero(), |m, c| m.max(c.radius))
}

/// Computes the `count` smallest singular values of the constrained system
/// and splits off the kernel.
pub fn kernel_basis<T: Real>(domain: &DiscreteDomain<T>, system: &ConstrainedSystem<T>, count: usize, seed: u64) -> KernelInfo<T> {
    let spectrum = low_spectrum(&system.factor, count, seed, 300);
    let mut pairs: Vec<(T, Vec<Cx<T>>)> = spectrum
        .vectors
        .into_iter()
        .map(|v| (norm(&system.matrix.mul_vec(&v)), v))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let scale = length_scale(domain);
    let sigma: Vec<T> = pairs.iter().map(|p| p.0).collect();
    let floor = T::lit(FLOOR);
    let dim = sigma.iter().position(|&s| s * scale >= T::lit(KERNEL_EDGE)).unwrap_or(sigma.len());
    let (threshold, ambiguous) = if dim == sigma.len() {
        (sigma.last().copied().unwrap_or(floor), true)
    } else {
        let below = if dim == 0 { floor } else { sigma[dim - 1].max(floor) };
        let above = sigma[dim];
        ((below * above).sqrt().max(floor), above < T::lit(GAP_RATIO) * below)
    };
    let coordinates: Vec<Vec<Cx<T>>> = pairs.into_iter().take(dim).map(|p| p.1).collect();
    let zero = vec![cx(T::zero(), T::zero()); system.nodes() * system.fiber.dim()];
    let basis = coordinates.iter().map(|z| system.field(&zero, z)).collect();
    KernelInfo { dim, basis, coordinates, singular_values: sigma, threshold, ambiguous }
}

/// Prescribed boundary values: the target of the prescribed half of the
/// fiber on the selected components, zero elsewhere.
#[derive(Clone, Debug)]
pub struct BoundaryData<T: Real> {
    /// Indices into `domain.boundary`.
    pub components: Vec<usize>,
    /// Full-size field, nonzero only on boundary nodes of `components`.
    pub values: SpinorField<T>,
    /// Whether a projection onto `γⁿ·Ker` traces was removed.
    pub modified: bool,
}

/// Resolves component labels (`"outer"`, `"inner"`; empty means all).
pub fn select_components<T: Real>(domain: &DiscreteDomain<T>, labels: &[String]) -> Result<Vec<usize>> {
    if labels.is_empty() {
        return Ok((0..domain.boundary.len()).collect());
    }
    let mut out = Vec::new();
    for l in labels {
        let i = domain
            .boundary
            .iter()
            .position(|c| &c.label == l)
            .ok_or_else(|| Error::BoundaryData(format!("no boundary component named {l:?}")))?;
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// The twisted-path data `1_C`: the identification element on `C`.
pub fn unit_data<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, components: &[usize]) -> Result<BoundaryData<T>> {
    let forms = match (fiber.path, &fiber.forms) {
        (FiberPath::Twisted, Some(f)) => f,
        _ => return Err(Error::FiberMismatch { expected: 4, got: fiber.dim() }),
    };
    let f = fiber.dim();
    let mut values = vec![cx(T::zero(), T::zero()); domain.len() * f];
    for &c in components {
        let comp = &domain.boundary[c];
        for (k, &p) in comp.nodes.iter().enumerate() {
            let alg = crate::clifford::boundary_algebra(forms, &comp.frame_n[k], &comp.frame_m[k])?;
            values[p * f..(p + 1) * f].copy_from_slice(&alg.identification);
        }
    }
    Ok(BoundaryData { components: components.to_vec(), values: SpinorField { values, fiber_dim: f }, modified: false })
}

/// Spinor-path data: the prescribed chirality part of the constant spinor
/// `spinor`, pulled back to the frame of `N`, on `C`.
pub fn chirality_data<T: Real>(
    domain: &DiscreteDomain<T>,
    fiber: &Fiber<T>,
    spinor: &[Cx<T>],
    components: &[usize],
    sign: i8,
) -> Result<BoundaryData<T>> {
    if fiber.path != FiberPath::Spinor || spinor.len() != fiber.dim() {
        return Err(Error::FiberMismatch { expected: fiber.dim(), got: spinor.len() });
    }
    let f = fiber.dim();
    let projectors = boundary_projectors(domain, fiber, Condition::Chirality { sign })?;
    let mut values = vec![cx(T::zero(), T::zero()); domain.len() * f];
    for &c in components {
        let comp = &domain.boundary[c];
        for (k, &p) in comp.nodes.iter().enumerate() {
            let rotor = spin_rotor(&fiber.rep, &comp.frame_n[k], &comp.frame_m[k])?;
            let pulled = rotor.apply(spinor);
            values[p * f..(p + 1) * f].copy_from_slice(&projectors[c][k].0.apply(&pulled));
        }
    }
    Ok(BoundaryData { components: components.to_vec(), values: SpinorField { values, fiber_dim: f }, modified: false })
}

/// Boundary-indexed trace of a field on every component, concatenated.
fn boundary_trace<T: Real>(domain: &DiscreteDomain<T>, f: usize, values: &[Cx<T>]) -> Vec<Cx<T>> {
    domain
        .boundary
        .iter()
        .flat_map(|c| c.nodes.iter().flat_map(move |&p| values[p * f..(p + 1) * f].iter().copied()))
        .collect()
}

fn boundary_weights<T: Real>(domain: &DiscreteDomain<T>, f: usize) -> Vec<T> {
    domain.boundary.iter().flat_map(|c| c.ds.iter().flat_map(move |&w| std::iter::repeat(w).take(f))).collect()
}

/// Removes from the data its boundary-`L²` projection onto the traces
/// `γⁿ η|∂N` of the kernel fields.
pub fn project_boundary_data<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, raw: &BoundaryData<T>, kernel: &KernelInfo<T>) -> BoundaryData<T> {
    if kernel.dim == 0 {
        return raw.clone();
    }
    let f = fiber.dim();
    let w = boundary_weights(domain, f);
    let sw: Vec<T> = w.iter().map(|x| x.sqrt()).collect();
    // traces γⁿη, weighted by √ds so the Euclidean product is the boundary L² product
    let mut traces: Vec<Vec<Cx<T>>> = kernel
        .basis
        .iter()
        .map(|eta| {
            let mut out = Vec::new();
            for comp in &domain.boundary {
                for (k, &p) in comp.nodes.iter().enumerate() {
                    let g = fiber.clifford([comp.frame_n[k].normal[0], comp.frame_n[k].normal[1]]);
                    out.extend(g.apply(eta.at(p)));
                }
            }
            out.iter().zip(&sw).map(|(z, s)| z.scale(*s)).collect()
        })
        .collect();
    crate::sparse::orthonormalize(&mut traces);
    let data = boundary_trace(domain, f, &raw.values.values);
    let mut weighted: Vec<Cx<T>> = data.iter().zip(&sw).map(|(z, s)| z.scale(*s)).collect();
    let size = norm(&weighted);
    let mut removed = T::zero();
    for q in &traces {
        let c = dot(q, &weighted);
        removed = removed.max(c.norm());
        for (x, y) in weighted.iter_mut().zip(q) {
            *x = *x - c * *y;
        }
    }
    let mut values = raw.values.values.clone();
    let mut i = 0;
    for comp in &domain.boundary {
        for &p in &comp.nodes {
            for a in 0..f {
                values[p * f + a] = weighted[i].unscale(sw[i]);
                i += 1;
            }
        }
    }
    let modified = removed > T::lit(1e-10) * size.max(T::one());
    BoundaryData {
        components: raw.components.clone(),
        values: if modified { SpinorField { values, fiber_dim: f } } else { raw.values.clone() },
        modified,
    }
}

/// A solved boundary value problem.
#[derive(Clone, Debug)]
pub struct Solution<T: Real> {
    pub field: SpinorField<T>,
    /// Relative residual of the (kernel-projected) normal equations.
    pub normal_residual: T,
    /// Discrete `L²` norm of `Dψ` relative to the data norm.
    pub dirac_residual: T,
    /// Largest violation of the prescribed boundary half.
    pub boundary_residual: T,
}

/// Minimum-norm least-squares solution with the given data; components along
/// the kernel are removed.
pub fn solve_bvp<T: Real>(domain: &DiscreteDomain<T>, system: &ConstrainedSystem<T>, data: &BoundaryData<T>, kernel: &KernelInfo<T>) -> Result<Solution<T>> {
    let rhs = system.rhs(&data.values.values);
    let (z, normal_residual) = system.solve(&rhs, &kernel.coordinates, T::lit(1e-10), 60)?;
    let field = system.field(&data.values.values, &z);
    let data_norm = crate::dirac::inner(domain, system.fiber.dim(), &data.values.values, &data.values.values)
        .re
        .sqrt()
        .max(T::min_positive_value());
    let dirac_residual = system.dirac_residual(&field.values) / data_norm;
    let boundary_residual = system.boundary_residual(domain, &data.values.values, &field.values);
    if boundary_residual > T::lit(1e-8) * (T::one() + data_norm) {
        return Err(Error::NonConvergence { residual: boundary_residual.as_f64() });
    }
    Ok(Solution { field, normal_residual, dirac_residual, boundary_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{default_mode, inner};
    use crate::geometry::{build_domain, ConformalFactor, MetricField, MetricSpec, Topology};
    use crate::scalar::re;

    fn twisted_kernel(spec: &MetricSpec, res: (usize, usize)) -> (DiscreteDomain<f64>, ConstrainedSystem<f64>, KernelInfo<f64>) {
        let d = build_domain::<f64>(spec, res).unwrap();
        let s = ConstrainedSystem::new(&d, Fiber::new(FiberPath::Twisted).unwrap(), default_mode(&d), Condition::PiPlus).unwrap();
        let k = kernel_basis(&d, &s, 6, 7);
        (d, s, k)
    }

    fn annulus() -> MetricSpec {
        MetricSpec::General2D { topology: Topology::Annulus { inner: 0.5, outer: 1.0 }, metric: MetricField::Identity }
    }

    fn conformal(c: f64) -> MetricSpec {
        MetricSpec::ConformalFlat { topology: Topology::Disk { radius: 1.0 }, phi: ConformalFactor::PolyR2 { coeffs: vec![c, -c] } }
    }

    /// `|⟨a, b⟩| / (‖a‖‖b‖)` in the discrete `L²` product.
    fn cosine(d: &DiscreteDomain<f64>, f: usize, a: &[Cx<f64>], b: &[Cx<f64>]) -> f64 {
        inner(d, f, a, b).norm() / (inner(d, f, a, a).re * inner(d, f, b, b).re).sqrt()
    }

    #[test]
    fn flat_disk_kernel_is_the_volume_form() {
        let (d, s, k) = twisted_kernel(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32));
        assert_eq!(k.dim, 1);
        assert!(!k.ambiguous);
        let vol = SpinorField::constant(d.len(), &s.fiber.forms.as_ref().unwrap().volume_form());
        assert!(cosine(&d, 4, &k.basis[0].values, &vol.values) > 0.99);
    }

    #[test]
    fn kernel_basis_is_orthonormal_and_annihilated() {
        let (d, s, k) = twisted_kernel(&annulus(), (16, 32));
        assert_eq!(k.dim, 2);
        for (i, a) in k.basis.iter().enumerate() {
            for (j, b) in k.basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&d, 4, &a.values, &b.values) - re(expect)).norm() < 1e-10);
            }
            let zero = vec![re(0.0); a.values.len()];
            assert!(s.boundary_residual(&d, &zero, &a.values) < 1e-12);
        }
        for z in &k.coordinates {
            assert!(norm(&s.matrix.mul_vec(z)) <= k.threshold);
        }
    }

    #[test]
    fn conformal_kernel_is_the_transported_volume_form() {
        let (d, s, k) = twisted_kernel(&conformal(0.5), (16, 32));
        assert_eq!(k.dim, 1);
        let vol = s.fiber.forms.as_ref().unwrap().volume_form();
        let phi = d.phi.as_ref().unwrap();
        let transported: Vec<Cx<f64>> = (0..d.len()).flat_map(|p| vol.iter().map(move |v| v.scale((-0.5 * phi[p]).exp()))).collect();
        assert!(cosine(&d, 4, &k.basis[0].values, &transported) > 0.9999);
    }

    #[test]
    fn chirality_problems_have_trivial_kernel() {
        let d = build_domain::<f64>(&conformal(0.5), (16, 32)).unwrap();
        for sign in [1, -1] {
            let s = ConstrainedSystem::new(&d, Fiber::new(FiberPath::Spinor).unwrap(), default_mode(&d), Condition::Chirality { sign }).unwrap();
            let k = kernel_basis(&d, &s, 4, 1);
            assert_eq!(k.dim, 0);
            assert!(k.singular_values[0] > 0.5);
        }
    }

    #[test]
    fn unit_data_on_flat_disk_is_unmodified() {
        let (d, s, k) = twisted_kernel(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32));
        let raw = unit_data(&d, &s.fiber, &[0]).unwrap();
        let projected = project_boundary_data(&d, &s.fiber, &raw, &k);
        assert!(!projected.modified);
        assert_eq!(projected.values, raw.values);
        // the data lies in Im π₊
        let proj = boundary_projectors(&d, &s.fiber, Condition::PiPlus).unwrap();
        for (k, &p) in d.boundary[0].nodes.iter().enumerate() {
            let v = raw.values.at(p);
            let diff: Vec<Cx<f64>> = proj[0][k].0.apply(v).iter().zip(v).map(|(a, b)| a - b).collect();
            assert!(norm(&diff) < 1e-12);
        }
    }

    #[test]
    fn projection_with_empty_kernel_is_identity() {
        let (d, s, _) = twisted_kernel(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32));
        let raw = unit_data(&d, &s.fiber, &[0]).unwrap();
        let out = project_boundary_data(&d, &s.fiber, &raw, &KernelInfo::empty());
        assert!(!out.modified);
        assert_eq!(out.values, raw.values);
    }

    #[test]
    fn annulus_projection_matches_explicit_harmonic_forms() {
        let (d, s, k) = twisted_kernel(&annulus(), (32, 64));
        let raw = unit_data(&d, &s.fiber, &select_components(&d, &["outer".to_string()]).unwrap()).unwrap();
        let projected = project_boundary_data(&d, &s.fiber, &raw, &k);
        // oracle: Gram–Schmidt against the traces of dvol and dr/r = (x dx + y dy)/r²,
        // the harmonic fields with vanishing tangential part
        let forms = s.fiber.forms.as_ref().unwrap();
        let vol = SpinorField::constant(d.len(), &forms.volume_form());
        let dlogr = SpinorField {
            values: (0..d.len())
                .flat_map(|p| {
                    let (x, y) = d.grid.position(p);
                    let r2 = x * x + y * y;
                    [re(0.0), re(x / r2), re(y / r2), re(0.0)]
                })
                .collect(),
            fiber_dim: 4,
        };
        let mut explicit = KernelInfo::empty();
        explicit.dim = 2;
        explicit.basis = vec![vol, dlogr];
        let oracle = project_boundary_data(&d, &s.fiber, &raw, &explicit);
        let diff: Vec<Cx<f64>> = projected.values.values.iter().zip(&oracle.values.values).map(|(a, b)| a - b).collect();
        let scale = norm(&raw.values.values);
        assert!(norm(&diff) < 1e-2 * scale, "{}", norm(&diff) / scale);
        // γⁿ·dr/r has a scalar part, so data on one circle alone is modified
        assert!(oracle.modified && projected.modified);
    }

    #[test]
    fn flat_disk_unit_data_gives_the_constant_solution() {
        let (d, s, k) = twisted_kernel(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32));
        let data = project_boundary_data(&d, &s.fiber, &unit_data(&d, &s.fiber, &[0]).unwrap(), &k);
        let sol = solve_bvp(&d, &s, &data, &k).unwrap();
        let one = s.fiber.forms.as_ref().unwrap().unit_form();
        for p in 0..d.len() {
            let err: Vec<Cx<f64>> = sol.field.at(p).iter().zip(&one).map(|(a, b)| a - b).collect();
            assert!(norm(&err) < 1e-10);
        }
        assert!(sol.normal_residual < 1e-10);
    }

    #[test]
    fn flat_disk_constant_spinor_data_gives_the_constant_spinor() {
        let d = build_domain::<f64>(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32)).unwrap();
        let fiber = Fiber::new(FiberPath::Spinor).unwrap();
        let eps = [cx(0.6, 0.0), cx(0.0, 0.8)];
        for sign in [1, -1] {
            let s = ConstrainedSystem::new(&d, fiber.clone(), default_mode(&d), Condition::Chirality { sign }).unwrap();
            let k = kernel_basis(&d, &s, 4, 3);
            // prescribing one half of ε at every boundary node recovers ε itself
            let data = chirality_data(&d, &fiber, &eps, &[0], sign).unwrap();
            let sol = solve_bvp(&d, &s, &data, &k).unwrap();
            for p in 0..d.len() {
                let err: Vec<Cx<f64>> = sol.field.at(p).iter().zip(&eps).map(|(a, b)| a - b).collect();
                assert!(norm(&err) < 1e-9, "{}", norm(&err));
            }
        }
    }

    #[test]
    fn conformal_solution_is_the_transported_constant() {
        let mut errs = Vec::new();
        for res in [(16, 32), (32, 64)] {
            let (d, s, k) = twisted_kernel(&conformal(0.5), res);
            let data = project_boundary_data(&d, &s.fiber, &unit_data(&d, &s.fiber, &[0]).unwrap(), &k);
            let sol = solve_bvp(&d, &s, &data, &k).unwrap();
            let phi = d.phi.as_ref().unwrap();
            let one = s.fiber.forms.as_ref().unwrap().unit_form();
            let err = (0..d.len())
                .map(|p| {
                    let e: Vec<Cx<f64>> = sol.field.at(p).iter().zip(&one).map(|(a, b)| a - b.scale((-0.5 * phi[p]).exp())).collect();
                    norm(&e)
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        // the covariant assembly transports the flat solution exactly
        assert!(errs.iter().all(|&e| e < 1e-7), "{errs:?}");
    }

    #[test]
    fn unknown_component_is_rejected() {
        let d = build_domain::<f64>(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32)).unwrap();
        assert!(matches!(select_components(&d, &["inner".to_string()]), Err(Error::BoundaryData(_))));
        assert_eq!(select_components(&d, &[]).unwrap(), vec![0]);
    }
}

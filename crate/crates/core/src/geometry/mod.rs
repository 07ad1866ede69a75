//! Discretized Riemannian data on polar grids: orthonormal frames in the
//! Cartesian gauge, connection coefficients, scalar curvature, quadrature and
//! boundary geometry.
//!
//! Conventions (n = 2):
//! * the frame `e_α = E^k_α ∂_k` is `g^{-1/2}` in Cartesian components, so it
//!   does not rotate with θ;
//! * `ω₁₂σ = g(∇_{e_σ} e₂, e₁)`, which for `[e₁, e₂] = a e₁ + b e₂` gives
//!   `ω₁₂₁ = a`, `ω₁₂₂ = b`;
//! * boundary normals point inward and mean curvature is
//!   `H = g(∇_t t, ν)`, so the unit circle bounding the flat disk has `H = 1`.

pub mod grid;
pub mod profiles;
pub mod rotsym;

use serde::{Deserialize, Serialize};

use crate::clifford::AdaptedFrame;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use grid::{GridShape, PolarGrid, Stencil};
pub use profiles::{ConformalFactor, MetricField, RadialFactor, RadialJet, RotProfile};

/// Planar domain shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

/// Declarative metric specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpec {
    FlatDisk { radius: f64 },
    /// `e^{2φ}` times the flat metric; φ must vanish on every boundary circle.
    ConformalFlat { topology: Topology, phi: ConformalFactor },
    /// `dρ² + s(ρ)² g_{S^{n−1}}` on the geodesic ball of radius `rho_max`.
    /// Only `n = 2` has a discrete grid; other dimensions use the closed form.
    RotSym { n: usize, profile: RotProfile, rho_max: f64 },
    #[serde(rename = "general_2d")]
    General2D { topology: Topology, metric: MetricField },
}

/// Evaluable metric: frames, connection and curvature at arbitrary points.
#[derive(Clone, Debug)]
pub enum MetricModel<T: Real> {
    Flat,
    Conformal(RadialFactor<T>),
    General { field: MetricField, factor: Option<RadialFactor<T>> },
}

type Frame<T> = [[T; 2]; 2];

fn inverse2<T: Real>(m: &Frame<T>) -> Frame<T> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn inverse_sqrt_spd<T: Real>(g: [T; 3]) -> Frame<T> {
    let det = g[0] * g[2] - g[1] * g[1];
    let s = det.sqrt();
    let t = (g[0] + g[2] + T::lit(2.0) * s).sqrt();
    let root = [[(g[0] + s) / t, g[1] / t], [g[1] / t, (g[2] + s) / t]];
    inverse2(&root)
}

/// Fourth-order central difference of a vector-valued function along `dir`.
fn fd4<const N: usize, T: Real>(f: &impl Fn(T, T) -> [T; N], x: T, y: T, dir: usize, h: T) -> [T; N] {
    let at = |k: T| if dir == 0 { f(x + k * h, y) } else { f(x, y + k * h) };
    let (p2, p1, m1, m2) = (at(T::lit(2.0)), at(T::one()), at(-T::one()), at(-T::lit(2.0)));
    let mut out = [T::zero(); N];
    for i in 0..N {
        out[i] = (-p2[i] + T::lit(8.0) * (p1[i] - m1[i]) + m2[i]) / (T::lit(12.0) * h);
    }
    out
}

const FD_STEP: f64 = 1e-3;

impl<T: Real> MetricModel<T> {
    pub fn from_spec(spec: &MetricSpec) -> Result<Self> {
        Ok(match spec {
            MetricSpec::FlatDisk { .. } => Self::Flat,
            MetricSpec::ConformalFlat { phi, .. } => Self::Conformal(RadialFactor::from_spec(phi)?),
            MetricSpec::RotSym { n: 2, profile, rho_max } => {
                Self::Conformal(RadialFactor::RotSym(rotsym::RotSymConformal::new(*profile, *rho_max)?))
            }
            MetricSpec::RotSym { n, .. } => {
                return Err(Error::Unsupported(format!(
                    "discrete grids are two-dimensional; the n = {n} ball is available through the closed form"
                )))
            }
            MetricSpec::General2D { metric, .. } => {
                let factor = match metric {
                    MetricField::Conformal { phi } => Some(RadialFactor::from_spec(phi)?),
                    _ => None,
                };
                Self::General { field: metric.clone(), factor }
            }
        })
    }

    /// Conformal factor at a point, for the conformally flat models.
    pub fn phi_jet(&self, x: T, y: T) -> Option<RadialJet<T>> {
        match self {
            Self::Flat => Some(RadialJet { value: T::zero(), d_r: T::zero(), d_rr: T::zero(), d_r_over_r: T::zero() }),
            Self::Conformal(f) => Some(f.jet((x * x + y * y).sqrt())),
            Self::General { .. } => None,
        }
    }

    pub fn metric(&self, x: T, y: T) -> [T; 3] {
        match self {
            Self::Flat => [T::one(), T::zero(), T::one()],
            Self::Conformal(f) => {
                let e = (T::lit(2.0) * f.jet((x * x + y * y).sqrt()).value).exp();
                [e, T::zero(), e]
            }
            Self::General { field, factor } => field.eval(factor.as_ref(), x, y),
        }
    }

    /// Frame matrix `E[k][α]` (k-th Cartesian component of `e_α`).
    pub fn frame(&self, x: T, y: T) -> Frame<T> {
        match self {
            Self::Flat => [[T::one(), T::zero()], [T::zero(), T::one()]],
            Self::Conformal(f) => {
                let e = (-f.jet((x * x + y * y).sqrt()).value).exp();
                [[e, T::zero()], [T::zero(), e]]
            }
            Self::General { .. } => inverse_sqrt_spd(self.metric(x, y)),
        }
    }

    /// `(ω₁₂₁, ω₁₂₂)`.
    pub fn connection(&self, x: T, y: T) -> [T; 2] {
        match self {
            Self::Flat => [T::zero(), T::zero()],
            Self::Conformal(f) => {
                let j = f.jet((x * x + y * y).sqrt());
                let e = (-j.value).exp();
                [e * j.d_r_over_r * y, -e * j.d_r_over_r * x]
            }
            Self::General { .. } => {
                let flat = |x: T, y: T| {
                    let e = self.frame(x, y);
                    [e[0][0], e[0][1], e[1][0], e[1][1]]
                };
                let h = T::lit(FD_STEP);
                let dx = fd4(&flat, x, y, 0, h);
                let dy = fd4(&flat, x, y, 1, h);
                let e = self.frame(x, y);
                // ∂_l E^k_α with flat index 2k + α
                let d = |l: usize, k: usize, a: usize| if l == 0 { dx[2 * k + a] } else { dy[2 * k + a] };
                let mut bracket = [T::zero(); 2];
                for (k, b) in bracket.iter_mut().enumerate() {
                    for l in 0..2 {
                        *b = *b + e[l][0] * d(l, k, 1) - e[l][1] * d(l, k, 0);
                    }
                }
                let inv = inverse2(&e);
                [
                    inv[0][0] * bracket[0] + inv[0][1] * bracket[1],
                    inv[1][0] * bracket[0] + inv[1][1] * bracket[1],
                ]
            }
        }
    }

    /// Scalar curvature `R = 2(e₁(b) − e₂(a) − a² − b²)`.
    pub fn scalar_curvature(&self, x: T, y: T) -> T {
        match self {
            Self::Flat => T::zero(),
            Self::Conformal(f) => {
                let j = f.jet((x * x + y * y).sqrt());
                -T::lit(2.0) * (-T::lit(2.0) * j.value).exp() * j.laplacian()
            }
            Self::General { .. } => {
                let h = T::lit(FD_STEP);
                let conn = |x: T, y: T| self.connection(x, y);
                let dx = fd4(&conn, x, y, 0, h);
                let dy = fd4(&conn, x, y, 1, h);
                let e = self.frame(x, y);
                let [a, b] = self.connection(x, y);
                let e1_b = e[0][0] * dx[1] + e[1][0] * dy[1];
                let e2_a = e[0][1] * dx[0] + e[1][1] * dy[0];
                T::lit(2.0) * (e1_b - e2_a - a * a - b * b)
            }
        }
    }

    pub fn sqrt_det(&self, x: T, y: T) -> T {
        let g = self.metric(x, y);
        (g[0] * g[2] - g[1] * g[1]).sqrt()
    }
}

/// Geometry of one boundary circle.
#[derive(Clone, Debug)]
pub struct BoundaryComponent<T: Real> {
    /// `"outer"` or `"inner"`.
    pub label: String,
    pub ring: usize,
    pub nodes: Vec<usize>,
    /// Radius of the circle in the flat background.
    pub radius: T,
    /// Adapted frame of `N` in its gauge frame, per node.
    pub frame_n: Vec<AdaptedFrame<T>>,
    /// Adapted frame of the flat background, per node.
    pub frame_m: Vec<AdaptedFrame<T>>,
    /// `|∂_θ|_g`.
    pub speed: Vec<T>,
    /// Boundary measure weights `|∂_θ|_g h_θ`.
    pub ds: Vec<T>,
    /// `+1` when the adapted tangent points along `+∂_θ`.
    pub tangent_sign: T,
    pub mean_curvature: Vec<T>,
    pub background_mean_curvature: T,
    /// `e_n φ` for conformally flat metrics.
    pub normal_derivative_phi: Option<Vec<T>>,
}

/// The discretized Riemannian domain.
#[derive(Clone, Debug)]
pub struct DiscreteDomain<T: Real> {
    pub spec: MetricSpec,
    pub model: MetricModel<T>,
    pub grid: PolarGrid<T>,
    /// `frames[p][k][α]`.
    pub frames: Vec<Frame<T>>,
    /// `(ω₁₂₁, ω₁₂₂)` per node.
    pub connection: Vec<[T; 2]>,
    pub scalar_r: Vec<T>,
    pub sqrt_det: Vec<T>,
    /// Volume quadrature weights.
    pub weights: Vec<T>,
    /// Conformal factor per node for conformally flat metrics.
    pub phi: Option<Vec<T>>,
    pub boundary: Vec<BoundaryComponent<T>>,
}

/// Builds grid, frame, connection, curvature, quadrature and boundary data.
pub fn build_domain<T: Real>(spec: &MetricSpec, resolution: (usize, usize)) -> Result<DiscreteDomain<T>> {
    let (n_r, n_theta) = resolution;
    let model = MetricModel::<T>::from_spec(spec)?;
    let shape = match spec {
        MetricSpec::FlatDisk { radius } => disk_shape(*radius)?,
        MetricSpec::ConformalFlat { topology, .. } | MetricSpec::General2D { topology, .. } => topology_shape(topology)?,
        MetricSpec::RotSym { profile, rho_max, .. } => disk_shape(profile.eval(*rho_max).0)?,
    };
    let grid = PolarGrid::new(shape, n_r, n_theta)?;
    let n = grid.len();
    let mut frames = Vec::with_capacity(n);
    let mut connection = Vec::with_capacity(n);
    let mut scalar_r = Vec::with_capacity(n);
    let mut sqrt_det = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for p in 0..n {
        let (x, y) = grid.position(p);
        let (i, _) = grid.ring_of(p);
        frames.push(model.frame(x, y));
        connection.push(model.connection(x, y));
        scalar_r.push(model.scalar_curvature(x, y));
        let sd = model.sqrt_det(x, y);
        sqrt_det.push(sd);
        weights.push(sd * grid.ring_area[i] * grid.h_theta);
        if let Some(j) = model.phi_jet(x, y) {
            phi.push(j.value);
        }
    }
    let all_finite = frames.iter().all(|f| f.iter().flatten().all(|v| v.is_finite()))
        && connection.iter().flatten().all(|v| v.is_finite())
        && scalar_r.iter().all(|v| v.is_finite())
        && weights.iter().all(|v| v.is_finite() && *v > T::zero());
    if !all_finite {
        return Err(Error::InvalidSpec("metric produced non-finite or degenerate geometry on the grid".into()));
    }
    let phi = if phi.len() == n { Some(phi) } else { None };
    let boundary = grid
        .boundary_rings()
        .into_iter()
        .map(|ring| boundary_component(&model, &grid, ring))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteDomain { spec: spec.clone(), model, grid, frames, connection, scalar_r, sqrt_det, weights, phi, boundary })
}

fn disk_shape<T: Real>(radius: f64) -> Result<GridShape<T>> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidSpec("disk radius must be positive".into()));
    }
    Ok(GridShape::Disk { radius: T::lit(radius) })
}

fn topology_shape<T: Real>(t: &Topology) -> Result<GridShape<T>> {
    match *t {
        Topology::Disk { radius } => disk_shape(radius),
        Topology::Annulus { inner, outer } => {
            if !(inner > 0.0 && outer > inner && outer.is_finite()) {
                return Err(Error::InvalidSpec("annulus needs 0 < inner < outer".into()));
            }
            Ok(GridShape::Annulus { inner: T::lit(inner), outer: T::lit(outer) })
        }
    }
}

fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let mut a = a % two_pi;
    if a > T::PI() {
        a = a - two_pi;
    } else if a < -T::PI() {
        a = a + two_pi;
    }
    a
}

fn boundary_component<T: Real>(model: &MetricModel<T>, grid: &PolarGrid<T>, ring: usize) -> Result<BoundaryComponent<T>> {
    let outer = ring == grid.n_r - 1;
    let radius = grid.r[ring];
    let sigma = if outer { -T::one() } else { T::one() };
    let normal_at = |theta: T| -> ([T; 2], Frame<T>) {
        let (s, c) = theta.sin_cos();
        let e = model.frame(radius * c, radius * s);
        let v = [sigma * (e[0][0] * c + e[1][0] * s), sigma * (e[0][1] * c + e[1][1] * s)];
        let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
        ([v[0] / len, v[1] / len], e)
    };
    let angle_at = |theta: T| {
        let (nv, _) = normal_at(theta);
        nv[1].atan2(nv[0])
    };
    let mut nodes = Vec::with_capacity(grid.n_theta);
    let mut frame_n = Vec::with_capacity(grid.n_theta);
    let mut frame_m = Vec::with_capacity(grid.n_theta);
    let mut speed = Vec::with_capacity(grid.n_theta);
    let mut mean_curvature = Vec::with_capacity(grid.n_theta);
    let mut enphi = Vec::with_capacity(grid.n_theta);
    let mut tangent_sign = T::one();
    let h = T::lit(FD_STEP);
    for j in 0..grid.n_theta {
        let theta = grid.theta[j];
        let (s, c) = theta.sin_cos();
        let (x, y) = (radius * c, radius * s);
        nodes.push(grid.node(ring, j));
        let (nv, e) = normal_at(theta);
        let angle = nv[1].atan2(nv[0]);
        let fr = AdaptedFrame::from_normal_angle(angle);
        let inv = inverse2(&e);
        let dtheta = [-y, x];
        let v = [inv[0][0] * dtheta[0] + inv[0][1] * dtheta[1], inv[1][0] * dtheta[0] + inv[1][1] * dtheta[1]];
        let sp = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if (sp - radius).abs() > T::lit(1e-10) * radius.max(T::one()) {
            return Err(Error::InvalidSpec(format!(
                "boundary circle r = {radius} is not isometric to the background: |∂θ|_g = {sp} at θ = {theta}"
            )));
        }
        let t = [fr.tangent[0][0], fr.tangent[0][1]];
        let sign = if t[0] * v[0] + t[1] * v[1] >= T::zero() { T::one() } else { -T::one() };
        if j == 0 {
            tangent_sign = sign;
        } else if sign != tangent_sign {
            return Err(Error::InvalidSpec("boundary orientation flips along the circle".into()));
        }
        // H = t(angle) − ω₁₂(t)
        let da = (-wrap_angle(angle_at(theta + T::lit(2.0) * h) - angle)
            + T::lit(8.0) * wrap_angle(angle_at(theta + h) - angle)
            - T::lit(8.0) * wrap_angle(angle_at(theta - h) - angle)
            + wrap_angle(angle_at(theta - T::lit(2.0) * h) - angle))
            / (T::lit(12.0) * h);
        let w = model.connection(x, y);
        mean_curvature.push(sign * da / sp - (w[0] * t[0] + w[1] * t[1]));
        speed.push(sp);
        let m_angle = if outer { theta + T::PI() } else { theta };
        frame_m.push(AdaptedFrame::from_normal_angle(m_angle));
        frame_n.push(fr);
        if let Some(jet) = model.phi_jet(x, y) {
            if jet.value.abs() > T::lit(1e-10) {
                return Err(Error::InvalidSpec(format!(
                    "conformal factor must vanish on the boundary circle r = {radius} (φ = {})",
                    jet.value
                )));
            }
            // e_n φ = e^{−φ} ν_flat · ∇φ with ν_flat = σ r̂
            enphi.push((-jet.value).exp() * sigma * jet.d_r);
        }
    }
    let ds = speed.iter().map(|&s| s * grid.h_theta).collect();
    Ok(BoundaryComponent {
        label: if outer { "outer" } else { "inner" }.to_string(),
        ring,
        nodes,
        radius,
        frame_n,
        frame_m,
        speed,
        ds,
        tangent_sign,
        mean_curvature,
        background_mean_curvature: if outer { T::one() / radius } else { -T::one() / radius },
        normal_derivative_phi: if enphi.is_empty() { None } else { Some(enphi) },
    })
}

impl<T: Real> DiscreteDomain<T> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn area(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &w| a + w)
    }

    pub fn boundary_component(&self, label: &str) -> Option<&BoundaryComponent<T>> {
        self.boundary.iter().find(|b| b.label == label)
    }

    /// Per-node boundary lookup: `(component index, position along the circle)`.
    pub fn boundary_index(&self) -> Vec<Option<(usize, usize)>> {
        let mut idx = vec![None; self.len()];
        for (c, comp) in self.boundary.iter().enumerate() {
            for (k, &p) in comp.nodes.iter().enumerate() {
                idx[p] = Some((c, k));
            }
        }
        idx
    }

    /// Frame derivative stencils `e_α` at node `p`.
    pub fn frame_stencils(&self, p: usize) -> [Stencil<T>; 2] {
        let (dx, dy) = self.grid.d_cartesian(p);
        let e = &self.frames[p];
        let build = |a: usize| -> Stencil<T> {
            let mut s: Stencil<T> = dx.iter().map(|&(q, w)| (q, w * e[0][a])).collect();
            s.extend(dy.iter().map(|&(q, w)| (q, w * e[1][a])));
            s
        };
        [build(0), build(1)]
    }

    /// Largest deviation of the frame Gram matrix `g(e_α, e_β)` from the identity.
    pub fn frame_orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for p in 0..self.len() {
            let (x, y) = self.grid.position(p);
            let g = self.model.metric(x, y);
            let e = &self.frames[p];
            for a in 0..2 {
                for b in 0..2 {
                    let gab = g[0] * e[0][a] * e[0][b]
                        + g[1] * (e[0][a] * e[1][b] + e[1][a] * e[0][b])
                        + g[2] * e[1][a] * e[1][b];
                    let target = if a == b { T::one() } else { T::zero() };
                    worst = worst.max((gab - target).abs());
                }
            }
        }
        worst
    }
}

/// Per-node scalar curvature.
pub fn scalar_curvature<T: Real>(domain: &DiscreteDomain<T>) -> Vec<T> {
    domain.scalar_r.clone()
}

/// Boundary mean curvatures and background data on one component.
#[derive(Clone, Debug)]
pub struct BoundaryGeometryComponent<T> {
    pub label: String,
    pub h_n: Vec<T>,
    pub h_m: T,
    /// Background second fundamental form (a scalar per node for n = 2).
    pub a_hat: T,
    pub ds: Vec<T>,
    /// Max deviation of `H_N` from `H_M − e_nφ` (conformally flat metrics only).
    pub conformal_defect: Option<T>,
}

#[derive(Clone, Debug)]
pub struct BoundaryGeometry<T> {
    pub components: Vec<BoundaryGeometryComponent<T>>,
}

pub fn boundary_geometry<T: Real>(domain: &DiscreteDomain<T>) -> BoundaryGeometry<T> {
    let components = domain
        .boundary
        .iter()
        .map(|b| {
            let conformal_defect = b.normal_derivative_phi.as_ref().map(|en| {
                b.mean_curvature
                    .iter()
                    .zip(en)
                    .fold(T::zero(), |m, (&h, &e)| m.max((h - (b.background_mean_curvature - e)).abs()))
            });
            BoundaryGeometryComponent {
                label: b.label.clone(),
                h_n: b.mean_curvature.clone(),
                h_m: b.background_mean_curvature,
                a_hat: b.background_mean_curvature,
                ds: b.ds.clone(),
                conformal_defect,
            }
        })
        .collect();
    BoundaryGeometry { components }
}

/// `|Λ²(dId)| = e^{−2φ}` per node for conformally flat metrics.
pub fn lambda2_distortion<T: Real>(domain: &DiscreteDomain<T>) -> Result<Vec<T>> {
    match &domain.phi {
        Some(phi) => Ok(phi.iter().map(|&f| (-T::lit(2.0) * f).exp()).collect()),
        None => Err(Error::Unsupported("area distortion is defined for conformally flat metrics".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn conformal(c: f64) -> MetricSpec {
        MetricSpec::ConformalFlat {
            topology: Topology::Disk { radius: 1.0 },
            phi: ConformalFactor::PolyR2 { coeffs: vec![c, -c] },
        }
    }

    #[test]
    fn flat_disk_area_and_curvature() {
        let d = build_domain::<f64>(&MetricSpec::FlatDisk { radius: 1.0 }, (32, 64)).unwrap();
        assert!((d.area() - PI).abs() < 1e-3);
        assert!(d.scalar_r.iter().all(|&r| r == 0.0));
        let bg = boundary_geometry(&d);
        assert!(bg.components[0].h_n.iter().all(|h| (h - 1.0).abs() < 1e-10));
        assert!(d.frame_orthonormality_defect() < 1e-12);
    }

    #[test]
    fn conformal_disk_boundary_length_and_curvature() {
        let d = build_domain::<f64>(&conformal(0.5), (32, 64)).unwrap();
        let len: f64 = d.boundary[0].ds.iter().sum();
        assert!((len - 2.0 * PI).abs() < 1e-10);
        let r0 = d.model.scalar_curvature(0.0, 0.0);
        assert!((r0 - 4.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!((r0 - 1.47152).abs() < 1e-5);
        let bg = boundary_geometry(&d);
        assert!(bg.components[0].h_n.iter().all(|h| h.abs() < 1e-9));
        assert!(bg.components[0].conformal_defect.unwrap() < 1e-9);
        let en = d.boundary[0].normal_derivative_phi.as_ref().unwrap();
        assert!(en.iter().all(|e| (e - 1.0).abs() < 1e-12));
        assert!(d.frame_orthonormality_defect() < 1e-12);
    }

    #[test]
    fn general_identity_matches_flat_disk() {
        let a = build_domain::<f64>(&MetricSpec::FlatDisk { radius: 1.0 }, (16, 32)).unwrap();
        let b = build_domain::<f64>(
            &MetricSpec::General2D { topology: Topology::Disk { radius: 1.0 }, metric: MetricField::Identity },
            (16, 32),
        )
        .unwrap();
        assert_eq!(a.frames, b.frames);
        assert_eq!(a.connection, b.connection);
        assert_eq!(a.scalar_r, b.scalar_r);
    }

    #[test]
    fn general_path_reproduces_conformal_geometry() {
        let phi = ConformalFactor::PolyR2 { coeffs: vec![0.5, -0.5] };
        let m = MetricModel::<f64>::from_spec(&MetricSpec::General2D {
            topology: Topology::Disk { radius: 1.0 },
            metric: MetricField::Conformal { phi: phi.clone() },
        })
        .unwrap();
        let c = MetricModel::<f64>::from_spec(&conformal(0.5)).unwrap();
        for &(x, y) in &[(0.1, 0.2), (-0.5, 0.3), (0.7, -0.6)] {
            let (wa, wb) = (m.connection(x, y), c.connection(x, y));
            assert!((wa[0] - wb[0]).abs() < 1e-9 && (wa[1] - wb[1]).abs() < 1e-9);
            assert!((m.scalar_curvature(x, y) - c.scalar_curvature(x, y)).abs() < 1e-7);
        }
    }

    #[test]
    fn axis_stretch_mean_curvature() {
        let eps = 0.1;
        let d = build_domain::<f64>(
            &MetricSpec::General2D { topology: Topology::Disk { radius: 1.0 }, metric: MetricField::AxisStretch { epsilon: eps } },
            (16, 32),
        )
        .unwrap();
        let b = &d.boundary[0];
        for (k, h) in b.mean_curvature.iter().enumerate() {
            let t = d.grid.theta[k];
            assert!((h - (1.0 - eps * t.sin().powi(2))).abs() < 1e-8, "θ={t}: {h}");
        }
    }

    #[test]
    fn twist_is_flat_with_unit_boundary_curvature() {
        let d = build_domain::<f64>(
            &MetricSpec::General2D { topology: Topology::Disk { radius: 1.0 }, metric: MetricField::Twist { amplitude: 0.3 } },
            (16, 32),
        )
        .unwrap();
        assert!(d.scalar_r.iter().all(|r| r.abs() < 1e-7));
        assert!(d.boundary[0].mean_curvature.iter().all(|h| (h - 1.0).abs() < 1e-8));
        // the frames of N and of the background disagree on the boundary
        let f = &d.boundary[0];
        let mismatch = f.frame_n.iter().zip(&f.frame_m).fold(0.0f64, |m, (a, b)| m.max((a.normal[0] - b.normal[0]).abs()));
        assert!(mismatch > 1e-3);
    }

    #[test]
    fn annulus_mean_curvatures() {
        let d = build_domain::<f64>(
            &MetricSpec::General2D { topology: Topology::Annulus { inner: 0.5, outer: 1.0 }, metric: MetricField::Identity },
            (16, 32),
        )
        .unwrap();
        let inner = d.boundary_component("inner").unwrap();
        assert!(inner.mean_curvature.iter().all(|h| (h + 2.0).abs() < 1e-9));
        assert_eq!(inner.background_mean_curvature, -2.0);
    }

    #[test]
    fn validation_errors() {
        let bad_phi = MetricSpec::ConformalFlat {
            topology: Topology::Disk { radius: 1.0 },
            phi: ConformalFactor::PolyR2 { coeffs: vec![0.1] },
        };
        assert!(matches!(build_domain::<f64>(&bad_phi, (16, 32)), Err(Error::InvalidSpec(_))));
        assert!(matches!(
            build_domain::<f64>(&MetricSpec::FlatDisk { radius: 1.0 }, (4, 32)),
            Err(Error::Resolution { .. })
        ));
        let not_isometric = MetricSpec::General2D {
            topology: Topology::Disk { radius: 0.5 },
            metric: MetricField::AxisStretch { epsilon: 0.2 },
        };
        assert!(build_domain::<f64>(&not_isometric, (16, 32)).is_err());
    }

    #[test]
    fn rotsym_two_dimensional_cap_is_conformal() {
        let d = build_domain::<f64>(&MetricSpec::RotSym { n: 2, profile: RotProfile::Sin, rho_max: PI / 3.0 }, (16, 32)).unwrap();
        assert!(d.scalar_r.iter().all(|r| (r - 2.0).abs() < 1e-7));
        let h = 2.0 * (PI / 3.0).cos() / (PI / 3.0).sin() / 2.0;
        assert!(d.boundary[0].mean_curvature.iter().all(|x| (x - h).abs() < 1e-8));
    }

    #[test]
    fn area_distortion() {
        let d = build_domain::<f64>(&conformal(0.5), (16, 32)).unwrap();
        let l = lambda2_distortion(&d).unwrap();
        assert!(l.iter().all(|&v| v > 0.0));
        let origin = (-2.0 * d.model.phi_jet(0.0, 0.0).unwrap().value).exp();
        assert!((origin - (-1.0f64).exp()).abs() < 1e-15);
        let g = build_domain::<f64>(
            &MetricSpec::General2D { topology: Topology::Disk { radius: 1.0 }, metric: MetricField::Identity },
            (16, 32),
        )
        .unwrap();
        assert!(lambda2_distortion(&g).is_err());
    }
}

//! The constrained Dirac system as a weighted least-squares problem.
//!
//! Boundary values are parametrized instead of collocated: at a boundary node
//! `ψ_p = data_p + B_p z_p`, where the columns of `B_p` span the free half of
//! the fiber (`Im π₋` on the twisted path, the opposite chirality on the
//! spinor path). The boundary condition therefore holds exactly, and the
//! Dirac equation is imposed at every node. With rows weighted by `√w_p` and
//! coordinates scaled by `1/√w_p` the Euclidean geometry of the unknowns is
//! the discrete `L²` geometry of the fields.

use crate::clifford::{boundary_algebra, chirality_projectors};
use crate::dense::{hermitian_eigen, CMat};
use crate::dirac::{assemble_dirac, AssemblyMode, Fiber, FiberPath, SpinorField};
use crate::error::{Error, Result};
use crate::geometry::DiscreteDomain;
use crate::scalar::{cx, norm, Cx, Real};
use crate::sparse::{CsrMatrix, NormalFactor};

/// Which half of the boundary fiber is prescribed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `π₊(ψ|∂N)` prescribed (twisted path).
    PiPlus,
    /// `P₊ψ` (`sign = +1`) or `P₋ψ` (`sign = −1`) prescribed, with
    /// `P± = (I ± γ⁰γⁿ)/2` (spinor path).
    Chirality { sign: i8 },
}

/// Orthonormal columns spanning the range of a Hermitian projector.
fn range_basis<T: Real>(projector: &CMat<T>) -> CMat<T> {
    let (vals, vecs) = hermitian_eigen(projector);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > T::lit(0.5)).collect();
    CMat::from_fn(projector.rows(), keep.len(), |r, c| vecs[(r, keep[c])])
}

/// Per-node prescribed and free projectors for a condition.
pub fn boundary_projectors<T: Real>(domain: &DiscreteDomain<T>, fiber: &Fiber<T>, condition: Condition) -> Result<Vec<Vec<(CMat<T>, CMat<T>)>>> {
    domain
        .boundary
        .iter()
        .map(|comp| {
            (0..comp.nodes.len())
                .map(|k| match (condition, fiber.path) {
                    (Condition::PiPlus, FiberPath::Twisted) => {
                        let forms = fiber.forms.as_ref().expect("twisted fiber carries the form algebra");
                        let alg = boundary_algebra(forms, &comp.frame_n[k], &comp.frame_m[k])?;
                        Ok((alg.pi_plus, alg.pi_minus))
                    }
                    (Condition::Chirality { sign }, FiberPath::Spinor) => {
                        let (p, m) = chirality_projectors(&fiber.rep, &comp.frame_n[k].normal);
                        Ok(if sign > 0 { (p, m) } else { (m, p) })
                    }
                    _ => Err(Error::FiberMismatch { expected: fiber.dim(), got: 0 }),
                })
                .collect()
        })
        .collect()
}

/// The assembled least-squares system for one domain, fiber and condition.
pub struct ConstrainedSystem<T: Real> {
    pub fiber: Fiber<T>,
    pub mode: AssemblyMode,
    pub condition: Condition,
    /// Full Dirac operator (rows at every node).
    pub dirac: CsrMatrix<T>,
    /// Weighted least-squares rows on full fields: Dirac rows, then damping rows.
    pub rows: CsrMatrix<T>,
    /// `√w_p` per node.
    pub sqrt_w: Vec<T>,
    /// Maps coordinates to (unweighted) full-field values.
    pub embed: CsrMatrix<T>,
    /// `rows · embed`.
    pub matrix: CsrMatrix<T>,
    /// Prescribed-part projector per boundary node, `[component][k]`.
    pub prescribed: Vec<Vec<CMat<T>>>,
    pub factor: NormalFactor<T>,
    nodes: usize,
}

impl<T: Real> ConstrainedSystem<T> {
    pub fn new(domain: &DiscreteDomain<T>, fiber: Fiber<T>, mode: AssemblyMode, condition: Condition) -> Result<Self> {
        let f = fiber.dim();
        let n = domain.len();
        let projectors = boundary_projectors(domain, &fiber, condition)?;
        let bidx = domain.boundary_index();
        let sqrt_w: Vec<T> = domain.weights.iter().map(|w| w.sqrt()).collect();
        let mut trip = Vec::new();
        let mut col = 0;
        for p in 0..n {
            let s = T::one() / sqrt_w[p];
            match bidx[p] {
                None => {
                    for a in 0..f {
                        trip.push((p * f + a, col + a, cx(s, T::zero())));
                    }
                    col += f;
                }
                Some((c, k)) => {
                    let basis = range_basis(&projectors[c][k].1);
                    for j in 0..basis.cols() {
                        for a in 0..f {
                            let v = basis[(a, j)];
                            if v.norm() > T::zero() {
                                trip.push((p * f + a, col + j, v.scale(s)));
                            }
                        }
                    }
                    col += basis.cols();
                }
            }
        }
        let embed = CsrMatrix::from_triplets(n * f, col, trip);
        let dirac = assemble_dirac(domain, &fiber, mode)?;
        let damping = odd_even_damping(domain, f, mode)?;
        let rows = stack(&row_scale(&dirac, &sqrt_w, f), &row_scale(&damping, &sqrt_w, 2 * f));
        let matrix = crate::dirac::sparse_product(&rows, &embed);
        let factor = NormalFactor::new(&matrix, T::lit(1e-11))?;
        let prescribed = projectors.into_iter().map(|c| c.into_iter().map(|(p, _)| p).collect()).collect();
        Ok(Self { fiber, mode, condition, dirac, rows, sqrt_w, embed, matrix, prescribed, factor, nodes: n })
    }

    pub fn unknowns(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Field `data + embed·z`.
    pub fn field(&self, data: &[Cx<T>], z: &[Cx<T>]) -> SpinorField<T> {
        let v = self.embed.mul_vec(z);
        let values = v.iter().zip(data).map(|(a, b)| *a + *b).collect();
        SpinorField { values, fiber_dim: self.fiber.dim() }
    }

    /// Coordinates of a field whose boundary trace lies in the free half.
    pub fn coordinates(&self, psi: &[Cx<T>]) -> Vec<Cx<T>> {
        // embedᴴ·diag(w)·ψ; embed has orthonormal columns in the weighted inner product.
        let f = self.fiber.dim();
        let weighted: Vec<Cx<T>> = psi.iter().enumerate().map(|(i, z)| z.scale(self.sqrt_w[i / f] * self.sqrt_w[i / f])).collect();
        self.embed.adjoint_mul_vec(&weighted)
    }

    /// Right-hand side `−rows·data`.
    pub fn rhs(&self, data: &[Cx<T>]) -> Vec<Cx<T>> {
        self.rows.mul_vec(data).iter().map(|z| -*z).collect()
    }

    /// `‖diag(√w)·D·ψ‖`, the discrete `L²` norm of `Dψ`.
    pub fn dirac_residual(&self, psi: &[Cx<T>]) -> T {
        let f = self.fiber.dim();
        let d: Vec<Cx<T>> = self.dirac.mul_vec(psi).iter().enumerate().map(|(i, z)| z.scale(self.sqrt_w[i / f])).collect();
        norm(&d)
    }

    /// Largest deviation of the prescribed part of `ψ|∂N` from the data.
    pub fn boundary_residual(&self, domain: &DiscreteDomain<T>, data: &[Cx<T>], psi: &[Cx<T>]) -> T {
        let f = self.fiber.dim();
        let mut worst = T::zero();
        for (c, comp) in domain.boundary.iter().enumerate() {
            for (k, &p) in comp.nodes.iter().enumerate() {
                let diff: Vec<Cx<T>> = (0..f).map(|a| psi[p * f + a] - data[p * f + a]).collect();
                worst = worst.max(norm(&self.prescribed[c][k].apply(&diff)));
            }
        }
        worst
    }

    /// Minimum-norm least-squares solution of `matrix·z = rhs` restricted to
    /// the complement of `kernel` (orthonormal coordinate vectors), by
    /// iterative refinement on the shifted normal equations with residuals
    /// taken in the row space.
    pub fn solve(&self, rhs: &[Cx<T>], kernel: &[Vec<Cx<T>>], tol: T, max_iter: usize) -> Result<(Vec<Cx<T>>, T)> {
        let project = |v: &mut Vec<Cx<T>>| {
            for q in kernel {
                let c = crate::scalar::dot(q, v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x = *x - c * *y;
                }
            }
        };
        let mut target = self.matrix.adjoint_mul_vec(rhs);
        project(&mut target);
        let scale = norm(&target);
        let mut z = vec![cx(T::zero(), T::zero()); self.unknowns()];
        if scale == T::zero() {
            return Ok((z, T::zero()));
        }
        let mut rel = T::infinity();
        for _ in 0..max_iter {
            // Aᴴ(b − Az) rather than Aᴴb − (AᴴA)z: the Gram product loses
            // the small residual components to rounding
            let az = self.matrix.mul_vec(&z);
            let res: Vec<Cx<T>> = rhs.iter().zip(&az).map(|(a, b)| *a - *b).collect();
            let mut r = self.matrix.adjoint_mul_vec(&res);
            project(&mut r);
            let next = norm(&r) / scale;
            // past the tolerance, keep refining while it still pays: the
            // weakly determined directions converge last
            if next <= tol && !(next < T::lit(0.5) * rel) {
                rel = rel.min(next);
                break;
            }
            rel = next;
            let dz = self.factor.solve(&r);
            for (x, d) in z.iter_mut().zip(&dz) {
                *x = *x + *d;
            }
            project(&mut z);
        }
        if !(rel <= tol) {
            return Err(Error::NonConvergence { residual: rel.as_f64() });
        }
        Ok((z, rel))
    }
}

/// Rows `δ⁴_r ψ / h_r` and `δ⁴_θ ψ / (r h_θ)` (fourth differences, through
/// the center on disks). They are `O(h³)` on smooth fields but `O(1/h)` on
/// the odd–even modes that centered first differences cannot see, which
/// would otherwise pollute the near-kernel of the least-squares system. In
/// covariant mode they are conjugated by the conformal factor like `D`.
pub fn odd_even_damping<T: Real>(domain: &DiscreteDomain<T>, f: usize, mode: AssemblyMode) -> Result<CsrMatrix<T>> {
    let g = &domain.grid;
    let n = g.len();
    let (left, right): (Vec<T>, Vec<T>) = match (mode, &domain.phi) {
        (AssemblyMode::Covariant, Some(phi)) => (
            phi.iter().map(|&v| (-T::lit(1.5) * v).exp()).collect(),
            phi.iter().map(|&v| (T::lit(0.5) * v).exp()).collect(),
        ),
        (AssemblyMode::Covariant, None) => {
            return Err(Error::Unsupported("covariant assembly needs a conformally flat metric".into()))
        }
        _ => (vec![T::one(); n], vec![T::one(); n]),
    };
    let coeffs = [T::one(), -T::lit(4.0), T::lit(6.0), -T::lit(4.0), T::one()];
    let nt = g.n_theta;
    // radial neighbour at signed ring offset, continuing through the center
    let radial = |i: usize, j: usize, off: isize| -> Option<usize> {
        let k = i as isize + off;
        if k >= 0 && (k as usize) < g.n_r {
            Some(g.node(k as usize, j))
        } else if k < 0 && g.is_disk() {
            Some(g.node((-k - 1) as usize, (j + nt / 2) % nt))
        } else {
            None
        }
    };
    let mut trip = Vec::new();
    let mut row = 0;
    for p in 0..n {
        let (i, j) = g.ring_of(p);
        let stencil: Option<Vec<usize>> = (-2..=2).map(|o| radial(i, j, o)).collect();
        if let Some(st) = stencil {
            let scale = left[p] / g.h_r;
            for a in 0..f {
                for (&q, &c) in st.iter().zip(&coeffs) {
                    trip.push((row + a, q * f + a, cx(scale * c * right[q], T::zero())));
                }
            }
        }
        row += f;
        let scale = left[p] / (g.r[i] * g.h_theta);
        for a in 0..f {
            for (o, &c) in (0..5).zip(&coeffs) {
                let q = g.node(i, (j + nt + o - 2) % nt);
                trip.push((row + a, q * f + a, cx(scale * c * right[q], T::zero())));
            }
        }
        row += f;
    }
    // 2f rows per node
    Ok(CsrMatrix::from_triplets(row, n * f, trip))
}

fn stack<T: Real>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> CsrMatrix<T> {
    let mut trip = Vec::with_capacity(a.nnz() + b.nnz());
    for r in 0..a.nrows() {
        trip.extend(a.row(r).map(|(c, v)| (r, c, v)));
    }
    for r in 0..b.nrows() {
        trip.extend(b.row(r).map(|(c, v)| (a.nrows() + r, c, v)));
    }
    CsrMatrix::from_triplets(a.nrows() + b.nrows(), a.ncols(), trip)
}

/// Scales row `r` by `node_scale[r / rows_per_node]`.
fn row_scale<T: Real>(m: &CsrMatrix<T>, node_scale: &[T], rows_per_node: usize) -> CsrMatrix<T> {
    let mut trip = Vec::with_capacity(m.nnz());
    for r in 0..m.nrows() {
        for (c, v) in m.row(r) {
            trip.push((r, c, v.scale(node_scale[r / rows_per_node])));
        }
    }
    CsrMatrix::from_triplets(m.nrows(), m.ncols(), trip)
}

//! Polar grids with half-offset radii on disks and finite-difference stencils.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of the polar grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridShape<T> {
    /// Disk of the given radius; radii `(i + ½)h` with the last ring on the circle.
    Disk { radius: T },
    /// Annulus `inner ≤ r ≤ outer` with rings on both circles.
    Annulus { inner: T, outer: T },
}

/// Polar grid; node `(i, j)` is stored at `i·n_theta + j`.
#[derive(Clone, Debug)]
pub struct PolarGrid<T> {
    pub shape: GridShape<T>,
    pub n_r: usize,
    pub n_theta: usize,
    pub h_r: T,
    pub h_theta: T,
    pub r: Vec<T>,
    pub theta: Vec<T>,
    /// Exact `∫ r dr` over the radial cell of each ring.
    pub ring_area: Vec<T>,
}

/// A stencil: `(node, coefficient)` pairs.
pub type Stencil<T> = Vec<(usize, T)>;

impl<T: Real> PolarGrid<T> {
    pub fn new(shape: GridShape<T>, n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 8 || n_theta < 16 || n_theta % 2 != 0 {
            return Err(Error::Resolution { n_r, n_theta });
        }
        let half = T::lit(0.5);
        let (h_r, r, ring_area) = match shape {
            GridShape::Disk { radius } => {
                let h = radius / (T::from_usize_lossy(n_r) - half);
                let r: Vec<T> = (0..n_r).map(|i| (T::from_usize_lossy(i) + half) * h).collect();
                let mut area: Vec<T> = r.iter().map(|&ri| h * ri).collect();
                let inner_edge = radius - h * half;
                area[n_r - 1] = (radius * radius - inner_edge * inner_edge) * half;
                (h, r, area)
            }
            GridShape::Annulus { inner, outer } => {
                let h = (outer - inner) / T::from_usize_lossy(n_r - 1);
                let r: Vec<T> = (0..n_r).map(|i| inner + T::from_usize_lossy(i) * h).collect();
                let area = (0..n_r)
                    .map(|i| {
                        let lo = if i == 0 { inner } else { r[i] - h * half };
                        let hi = if i == n_r - 1 { outer } else { r[i] + h * half };
                        (hi * hi - lo * lo) * half
                    })
                    .collect();
                (h, r, area)
            }
        };
        let h_theta = T::lit(2.0) * T::PI() / T::from_usize_lossy(n_theta);
        let theta = (0..n_theta).map(|j| T::from_usize_lossy(j) * h_theta).collect();
        Ok(Self { shape, n_r, n_theta, h_r, h_theta, r, theta, ring_area })
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    #[inline]
    pub fn ring_of(&self, p: usize) -> (usize, usize) {
        (p / self.n_theta, p % self.n_theta)
    }

    pub fn position(&self, p: usize) -> (T, T) {
        let (i, j) = self.ring_of(p);
        let (s, c) = self.theta[j].sin_cos();
        (self.r[i] * c, self.r[i] * s)
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.shape, GridShape::Disk { .. })
    }

    /// Rings that lie on a boundary circle.
    pub fn boundary_rings(&self) -> Vec<usize> {
        match self.shape {
            GridShape::Disk { .. } => vec![self.n_r - 1],
            GridShape::Annulus { .. } => vec![self.n_r - 1, 0],
        }
    }

    pub fn is_boundary_ring(&self, i: usize) -> bool {
        i == self.n_r - 1 || (!self.is_disk() && i == 0)
    }

    /// Second-order `∂_r` at node `(i, j)`: centered inside, one-sided on
    /// boundary rings, and across the center on the innermost disk ring.
    pub fn d_r(&self, i: usize, j: usize) -> Stencil<T> {
        let h2 = T::lit(2.0) * self.h_r;
        let last = self.n_r - 1;
        if i == last {
            vec![
                (self.node(i, j), T::lit(3.0) / h2),
                (self.node(i - 1, j), -T::lit(4.0) / h2),
                (self.node(i - 2, j), T::one() / h2),
            ]
        } else if i == 0 && !self.is_disk() {
            vec![
                (self.node(0, j), -T::lit(3.0) / h2),
                (self.node(1, j), T::lit(4.0) / h2),
                (self.node(2, j), -T::one() / h2),
            ]
        } else if i == 0 {
            let opposite = (j + self.n_theta / 2) % self.n_theta;
            vec![(self.node(1, j), T::one() / h2), (self.node(0, opposite), -T::one() / h2)]
        } else {
            vec![(self.node(i + 1, j), T::one() / h2), (self.node(i - 1, j), -T::one() / h2)]
        }
    }

    /// Centered periodic `∂_θ`.
    pub fn d_theta(&self, i: usize, j: usize) -> Stencil<T> {
        let h2 = T::lit(2.0) * self.h_theta;
        let n = self.n_theta;
        vec![(self.node(i, (j + 1) % n), T::one() / h2), (self.node(i, (j + n - 1) % n), -T::one() / h2)]
    }

    /// Cartesian partials `(∂_x, ∂_y)` at node `p`.
    pub fn d_cartesian(&self, p: usize) -> (Stencil<T>, Stencil<T>) {
        let (i, j) = self.ring_of(p);
        let (s, c) = self.theta[j].sin_cos();
        let r = self.r[i];
        let dr = self.d_r(i, j);
        let dt = self.d_theta(i, j);
        let combine = |a: T, b: T| -> Stencil<T> {
            let mut out: Stencil<T> = dr.iter().map(|&(q, w)| (q, w * a)).collect();
            out.extend(dt.iter().map(|&(q, w)| (q, w * b)));
            out
        };
        (combine(c, -s / r), combine(s, c / r))
    }
}

/// Applies a stencil to a scalar field.
pub fn apply<T: Real>(stencil: &Stencil<T>, field: &[T]) -> T {
    stencil.iter().fold(T::zero(), |acc, &(q, w)| acc + w * field[q])
}

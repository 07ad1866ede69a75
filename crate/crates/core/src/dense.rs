//! Small dense complex matrices used for fiber algebra.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use faer::Mat;

use crate::scalar::{cx, Cx, Real};

/// Row-major square or rectangular complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Cx::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from `f64` (re, im) pairs, row-major.
    pub fn from_pairs(rows: usize, cols: usize, entries: &[(f64, f64)]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            data: entries.iter().map(|&(a, b)| cx(T::lit(a), T::lit(b))).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| *x * s).collect() }
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.scale(Cx::new(s, T::zero()))
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.rows.min(self.cols)).fold(Cx::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    pub fn apply(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(Cx::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Cx<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn to_faer(&self) -> Mat<Cx<T>> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_faer(m: faer::MatRef<'_, Cx<T>>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.rows == self.cols && (self - &self.adjoint()).max_abs() <= tol
    }

    /// Orthonormal basis (as columns) of the range of a Hermitian idempotent.
    pub fn projector_range(&self, tol: T) -> Self {
        let (vals, vecs) = hermitian_eigen(self);
        let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > T::lit(0.5).max(tol)).collect();
        Self::from_fn(self.rows, keep.len(), |i, j| vecs[(i, keep[j])])
    }
}

impl<T: Real> Index<(usize, usize)> for CMat<T> {
    type Output = Cx<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMat<T> {
    type Output = CMat<T>;
    fn mul(self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMat<T> {
    type Output = CMat<T>;
    fn add(self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMat<T> {
    type Output = CMat<T>;
    fn sub(self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Real> Neg for &CMat<T> {
    type Output = CMat<T>;
    fn neg(self) -> CMat<T> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -*a).collect() }
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    // symmetrize so rounding asymmetry never leaks into the decomposition
    let sym = CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()).scale(T::lit(0.5)));
    let evd = sym
        .to_faer()
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<T> = (0..n).map(|k| s[k].re).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
    let sorted_vals = order.iter().map(|&k| vals[k]).collect();
    let vecs = CMat::from_fn(n, n, |i, j| u[(i, order[j])]);
    (sorted_vals, vecs)
}

/// Orthonormal basis of the (numerical) null space of `m`, as columns.
pub fn null_space<T: Real>(m: &CMat<T>, tol: T) -> CMat<T> {
    // null space of m = eigenvectors of m^H m with eigenvalue ~ 0
    let gram = &m.adjoint() * m;
    let (vals, vecs) = hermitian_eigen(&gram);
    let scale = vals.last().copied().unwrap_or(T::one()).max(T::one());
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] <= tol * scale).collect();
    CMat::from_fn(m.cols, keep.len(), |i, j| vecs[(i, keep[j])])
}

//! Sparse complex matrices and the normal-equation machinery used by the
//! boundary value solver.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{hermitian_eigen, CMat};
use crate::error::{Error, Result};
use crate::scalar::{cx, dot, norm, Cx, Real};

/// Compressed sparse row matrix with complex entries.
#[derive(Clone, Debug)]
pub struct CsrMatrix<T: Real> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Cx<T>>,
}

impl<T: Real> CsrMatrix<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, Cx<T>)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Cx<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                let k = values.len() - 1;
                values[k] = values[k] + v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of one row as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Cx<T>)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn mul_vec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).fold(cx(T::zero(), T::zero()), |acc, (c, v)| acc + v * x[c]))
            .collect()
    }

    /// `Aᴴ y`.
    pub fn adjoint_mul_vec(&self, y: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(y.len(), self.nrows);
        let mut out = vec![cx(T::zero(), T::zero()); self.ncols];
        for (r, yr) in y.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] = out[c] + v.conj() * *yr;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                trip.push((c, r, v.conj()));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, trip)
    }

    /// Normal matrix `AᴴA` by Gustavson's row-wise product of `Aᴴ` and `A`.
    pub fn gram(&self) -> Self {
        let at = self.adjoint();
        let n = self.ncols;
        let mut acc = vec![cx(T::zero(), T::zero()); n];
        let mut marker = vec![usize::MAX; n];
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut touched = Vec::new();
        for i in 0..n {
            touched.clear();
            for (k, a_ki) in at.row(i) {
                for (j, a_kj) in self.row(k) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = cx(T::zero(), T::zero());
                        touched.push(j);
                    }
                    acc[j] = acc[j] + a_ki * a_kj;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                values.push(acc[j]);
            }
            indptr[i + 1] = indices.len();
        }
        Self { nrows: n, ncols: n, indptr, indices, values }
    }

    pub fn diagonal(&self) -> Vec<Cx<T>> {
        (0..self.nrows.min(self.ncols))
            .map(|r| self.row(r).find(|&(c, _)| c == r).map_or(cx(T::zero(), T::zero()), |(_, v)| v))
            .collect()
    }

    pub fn to_dense(&self) -> CMat<T> {
        let mut m = CMat::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = m[(r, c)] + v;
            }
        }
        m
    }
}

/// Cholesky factorization of the shifted normal matrix `AᴴA + μI`.
pub struct NormalFactor<T: Real> {
    gram: CsrMatrix<T>,
    shift: T,
    llt: faer::sparse::linalg::solvers::Llt<usize, Cx<T>>,
}

impl<T: Real> NormalFactor<T> {
    /// Factors `AᴴA + μI` with `μ = rel_shift · max diag(AᴴA)`.
    pub fn new(a: &CsrMatrix<T>, rel_shift: T) -> Result<Self> {
        let gram = a.gram();
        let max_diag = gram.diagonal().iter().fold(T::zero(), |m, d| m.max(d.re));
        if !(max_diag > T::zero()) || !max_diag.is_finite() {
            return Err(Error::Factorization("normal matrix has no positive diagonal".into()));
        }
        let shift = rel_shift * max_diag;
        let n = gram.nrows();
        let mut trip = Vec::with_capacity(gram.nnz());
        for r in 0..n {
            for (c, v) in gram.row(r) {
                // lower triangle, column-major target
                if c <= r {
                    let v = if c == r { v + cx(shift, T::zero()) } else { v };
                    trip.push(Triplet::new(r, c, v));
                }
            }
        }
        let mat = SparseColMat::<usize, Cx<T>>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let llt = mat.sp_cholesky(Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self { gram, shift, llt })
    }

    pub fn gram(&self) -> &CsrMatrix<T> {
        &self.gram
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// Solves `(AᴴA + μI) x = rhs`.
    pub fn solve(&self, rhs: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut m = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.llt.solve_in_place(m.as_mut());
        (0..rhs.len()).map(|i| m[(i, 0)]).collect()
    }

    fn solve_block(&self, block: &[Vec<Cx<T>>]) -> Vec<Vec<Cx<T>>> {
        let n = self.dim();
        let mut m = Mat::from_fn(n, block.len(), |i, j| block[j][i]);
        self.llt.solve_in_place(m.as_mut());
        (0..block.len()).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect()
    }
}

/// Orthonormalizes the vectors in place (two passes of modified
/// Gram–Schmidt); vectors that become numerically dependent are dropped.
pub fn orthonormalize<T: Real>(vs: &mut Vec<Vec<Cx<T>>>) {
    let mut out: Vec<Vec<Cx<T>>> = Vec::with_capacity(vs.len());
    for mut v in vs.drain(..) {
        let start = norm(&v);
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x = *x - c * *y;
                }
            }
        }
        let nv = norm(&v);
        if nv > T::lit(1e-12) * start.max(T::min_positive_value()) && nv > T::zero() {
            for x in v.iter_mut() {
                *x = x.unscale(nv);
            }
            out.push(v);
        }
    }
    *vs = out;
}

/// Smallest eigenpairs of the Hermitian positive semidefinite normal matrix.
#[derive(Clone, Debug)]
pub struct LowSpectrum<T: Real> {
    /// Eigenvalues of `AᴴA` (shift removed), ascending.
    pub values: Vec<T>,
    pub vectors: Vec<Vec<Cx<T>>>,
    /// Largest relative residual `‖Gv − λv‖ / ‖G‖` over the returned pairs.
    pub residual: T,
}

/// Block inverse iteration with Rayleigh–Ritz on `AᴴA`, using the shifted
/// factor as the inverse. Three guard vectors speed up convergence of the
/// wanted pairs; returns `count` pairs.
pub fn low_spectrum<T: Real>(factor: &NormalFactor<T>, count: usize, seed: u64, max_iter: usize) -> LowSpectrum<T> {
    let n = factor.dim();
    let count = count.min(n);
    let block_size = (count + 3).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block: Vec<Vec<Cx<T>>> = (0..block_size)
        .map(|_| {
            (0..n)
                .map(|_| cx(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
                .collect()
        })
        .collect();
    orthonormalize(&mut block);
    let gnorm = factor.gram.diagonal().iter().fold(T::zero(), |m, d| m.max(d.re)).max(T::min_positive_value());
    let mut values = vec![T::zero(); block.len()];
    let mut residual = T::infinity();
    for _ in 0..max_iter {
        let mut next = factor.solve_block(&block);
        orthonormalize(&mut next);
        let gv: Vec<Vec<Cx<T>>> = next.iter().map(|v| factor.gram.mul_vec(v)).collect();
        let k = next.len();
        let h = CMat::from_fn(k, k, |i, j| dot(&next[i], &gv[j]));
        let (vals, vecs) = hermitian_eigen(&h);
        let rotate = |src: &[Vec<Cx<T>>]| -> Vec<Vec<Cx<T>>> {
            (0..k)
                .map(|j| {
                    let mut out = vec![cx(T::zero(), T::zero()); n];
                    for (i, s) in src.iter().enumerate() {
                        let c = vecs[(i, j)];
                        for (o, x) in out.iter_mut().zip(s) {
                            *o = *o + c * *x;
                        }
                    }
                    out
                })
                .collect()
        };
        block = rotate(&next);
        let gblock = rotate(&gv);
        values = vals.iter().map(|&v| v.max(T::zero())).collect();
        residual = (0..k.min(count))
            .map(|j| {
                let r: Vec<Cx<T>> = gblock[j].iter().zip(&block[j]).map(|(g, v)| *g - v.scale(vals[j])).collect();
                norm(&r) / gnorm
            })
            .fold(T::zero(), |m, r| m.max(r));
        if residual < T::lit(1e-11) {
            break;
        }
    }
    values.truncate(count);
    block.truncate(count);
    LowSpectrum { values, vectors: block, residual }
}

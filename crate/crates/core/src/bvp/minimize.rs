//! Infimum of a quadratic energy over `ψ₀ + span(kernel)`.

use crate::dense::{hermitian_eigen, CMat};
use crate::scalar::{cx, Cx, Real};

/// Outcome of minimizing over the kernel directions.
#[derive(Clone, Debug, PartialEq)]
pub enum Minimum<T: Real> {
    Finite {
        value: T,
        /// Kernel coefficients of the minimizer (minimum norm when not unique).
        coefficients: Vec<Cx<T>>,
    },
    /// Unbounded below. `flat_direction` marks the degenerate case of a
    /// direction with vanishing curvature but nonzero slope.
    Unbounded { flat_direction: bool },
}

fn combine<T: Real>(u: &[Cx<T>], s: Cx<T>, v: &[Cx<T>]) -> Vec<Cx<T>> {
    u.iter().zip(v).map(|(a, b)| *a + s * *b).collect()
}

/// Hermitian form of a real quadratic energy by polarization,
/// conjugate-linear in the first argument.
pub fn polarize<T: Real>(energy: &impl Fn(&[Cx<T>]) -> T, u: &[Cx<T>], v: &[Cx<T>]) -> Cx<T> {
    let one = cx(T::one(), T::zero());
    let i = cx(T::zero(), T::one());
    let quarter = T::lit(0.25);
    let re = energy(&combine(u, one, v)) - energy(&combine(u, -one, v));
    let im = energy(&combine(u, i, v)) - energy(&combine(u, -i, v));
    cx(re * quarter, -im * quarter)
}

/// Minimizes `E(ψ₀ + Σ t_j η_j)` for a Hermitian quadratic `E`.
///
/// Eigenvalues of the restricted form within `rel_tol · scale` of zero count
/// as flat; a flat direction with nonzero slope makes the energy unbounded.
pub fn minimize_over_kernel<T: Real>(
    energy: impl Fn(&[Cx<T>]) -> T,
    psi0: &[Cx<T>],
    kernel: &[Vec<Cx<T>>],
    rel_tol: T,
) -> Minimum<T> {
    let e0 = energy(psi0);
    let k = kernel.len();
    if k == 0 {
        return Minimum::Finite { value: e0, coefficients: Vec::new() };
    }
    let mut q = CMat::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = if a == b { cx(energy(&kernel[a]), T::zero()) } else { polarize(&energy, &kernel[a], &kernel[b]) };
            q[(a, b)] = v;
            q[(b, a)] = v.conj();
        }
    }
    let c: Vec<Cx<T>> = kernel.iter().map(|eta| polarize(&energy, eta, psi0)).collect();
    let (lambda, vecs) = hermitian_eigen(&q);
    let scale = lambda.iter().fold(e0.abs().max(T::one()), |m, l| m.max(l.abs()));
    let tol = rel_tol * scale;
    let mut value = e0;
    let mut s = vec![cx(T::zero(), T::zero()); k];
    for (j, &l) in lambda.iter().enumerate() {
        // d_j = (Vᴴ c)_j
        let d = (0..k).fold(cx(T::zero(), T::zero()), |acc, a| acc + vecs[(a, j)].conj() * c[a]);
        if l < -tol {
            return Minimum::Unbounded { flat_direction: false };
        }
        if l <= tol {
            if d.norm() > tol {
                return Minimum::Unbounded { flat_direction: true };
            }
            continue;
        }
        s[j] = -d.unscale(l);
        value = value - d.norm_sqr() / l;
    }
    let coefficients = (0..k).map(|a| (0..k).fold(cx(T::zero(), T::zero()), |acc, j| acc + vecs[(a, j)] * s[j])).collect();
    Minimum::Finite { value, coefficients }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(h: &CMat<f64>) -> impl Fn(&[Cx<f64>]) -> f64 + '_ {
        move |u: &[Cx<f64>]| crate::scalar::dot(u, &h.apply(u)).re
    }

    fn basis(n: usize, i: usize) -> Vec<Cx<f64>> {
        (0..n).map(|j| cx(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()
    }

    #[test]
    fn polarization_recovers_the_hermitian_form() {
        let h = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => cx(2.0, 0.0),
            (1, 1) => cx(-1.0, 0.0),
            (0, 1) => cx(0.3, 0.7),
            _ => cx(0.3, -0.7),
        });
        let b = polarize(&e(&h), &basis(2, 0), &basis(2, 1));
        assert!((b - cx(0.3, 0.7)).norm() < 1e-14);
    }

    #[test]
    fn positive_direction_is_minimized() {
        // E(x, y) = x² + 2 Re(x̄ y) + 3|y|² over x = 1 + t·0, y = t
        let h = CMat::from_fn(2, 2, |i, j| cx([[1.0, 1.0], [1.0, 3.0]][i][j], 0.0));
        match minimize_over_kernel(e(&h), &basis(2, 0), &[basis(2, 1)], 1e-10) {
            Minimum::Finite { value, coefficients } => {
                assert!((value - (1.0 - 1.0 / 3.0)).abs() < 1e-14);
                assert!((coefficients[0] - cx(-1.0 / 3.0, 0.0)).norm() < 1e-14);
            }
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn negative_and_flat_directions_are_unbounded() {
        let neg = CMat::from_fn(2, 2, |i, j| cx([[1.0, 0.0], [0.0, -1.0]][i][j], 0.0));
        assert_eq!(minimize_over_kernel(e(&neg), &basis(2, 0), &[basis(2, 1)], 1e-10), Minimum::Unbounded { flat_direction: false });
        let flat = CMat::from_fn(2, 2, |i, j| cx([[1.0, 0.5], [0.5, 0.0]][i][j], 0.0));
        assert_eq!(minimize_over_kernel(e(&flat), &basis(2, 0), &[basis(2, 1)], 1e-10), Minimum::Unbounded { flat_direction: true });
        let idle = CMat::from_fn(2, 2, |i, j| cx([[1.0, 0.0], [0.0, 0.0]][i][j], 0.0));
        assert_eq!(
            minimize_over_kernel(e(&idle), &basis(2, 0), &[basis(2, 1)], 1e-10),
            Minimum::Finite { value: 1.0, coefficients: vec![cx(0.0, 0.0)] }
        );
    }
}

//! Gauss–Legendre rules and periodic trapezoid sums for the closed-form
//! evaluators.

use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize_lossy(n);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess
        let k = T::from_usize_lossy(i) + T::lit(0.75);
        let mut x = (T::PI() * k / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { T::one() } else { p1 };
    let dp = T::from_usize_lossy(n) * (x * p1 - p0) / (x * x - T::one());
    (p, dp)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize, order: usize) -> T {
    let (x, w) = gauss_legendre::<T>(order);
    let h = (b - a) / T::from_usize_lossy(panels);
    let half = h * T::lit(0.5);
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + h * (T::from_usize_lossy(p) + T::lit(0.5));
        let mut s = T::zero();
        for (xi, wi) in x.iter().zip(&w) {
            s = s + *wi * f(mid + half * *xi);
        }
        total = total + s * half;
    }
    total
}

/// Integral with a crude error estimate from doubling the panel count.
pub fn integrate_with_error<T: Real>(f: impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let coarse = integrate(&f, a, b, 16, 16);
    let fine = integrate(&f, a, b, 32, 16);
    (fine, (fine - coarse).abs())
}

/// Periodic trapezoid rule over `[0, 2π)` with `m` points.
pub fn periodic_trapezoid<T: Real>(f: impl Fn(T) -> T, m: usize) -> T {
    let h = T::lit(2.0) * T::PI() / T::from_usize_lossy(m);
    (0..m).fold(T::zero(), |acc, j| acc + f(h * T::from_usize_lossy(j))) * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre::<f64>(5);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // degree 9 is integrated exactly by 5 points
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((q - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_integrates_smooth_functions() {
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, 4, 10);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let t = periodic_trapezoid(|t: f64| t.cos().powi(2), 16);
        assert!((t - std::f64::consts::PI).abs() < 1e-13);
    }
}

//! Exact Clifford-algebra machinery for even dimensions.
//!
//! Two concrete modules are provided:
//!
//! * [`CliffordRep`]: the irreducible spinor module `S = C^{2^{n/2}}` with
//!   Hermitian generators `γ^α`, grading `ε` and `γ⁰ = iε`;
//! * [`FormAlgebra`]: the twisted fiber `S ⊗ S* ≅ Λ*(R^n)` of dimension `2^n`,
//!   realized on exterior forms with `γ^α = i(E^α − I^α)` acting on the spinor
//!   factor and `γ̂^α = E^α + I^α` on the dual factor. Here `E^α` is exterior
//!   and `I^α` interior multiplication.
//!
//! Basis forms are indexed by bitmasks: bit `α-1` set means `τ^α` is present,
//! and the form is written in increasing index order.
//!
//! Phase convention: `ε = i^{n/2} γ¹⋯γⁿ`, which is Hermitian with `ε² = I`.
//! For the Jordan–Wigner generators used here this makes
//! `ε = (−1)^{n/2} σ_z ⊗ ⋯ ⊗ σ_z`.

use crate::dense::{null_space, CMat};
use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Real};

/// Irreducible complex spinor module for an even-dimensional Euclidean space.
#[derive(Clone, Debug)]
pub struct CliffordRep<T: Real> {
    n: usize,
    gamma: Vec<CMat<T>>,
    epsilon: CMat<T>,
    gamma0: CMat<T>,
}

fn pauli<T: Real>(which: char) -> CMat<T> {
    match which {
        'x' => CMat::from_pairs(2, 2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]),
        'y' => CMat::from_pairs(2, 2, &[(0., 0.), (0., -1.), (0., 1.), (0., 0.)]),
        'z' => CMat::from_pairs(2, 2, &[(1., 0.), (0., 0.), (0., 0.), (-1., 0.)]),
        _ => CMat::identity(2),
    }
}

fn i_pow<T: Real>(k: usize) -> Cx<T> {
    match k % 4 {
        0 => cx(T::one(), T::zero()),
        1 => cx(T::zero(), T::one()),
        2 => cx(-T::one(), T::zero()),
        _ => cx(T::zero(), -T::one()),
    }
}

/// Builds the Jordan–Wigner representation for even `n` in `2..=8`.
pub fn build_clifford_rep<T: Real>(n: usize) -> Result<CliffordRep<T>> {
    if n % 2 != 0 || !(2..=8).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let k = n / 2;
    let mut gamma = Vec::with_capacity(n);
    for j in 0..k {
        for which in ['x', 'y'] {
            let mut m = CMat::<T>::identity(1);
            for slot in 0..k {
                let factor = match slot.cmp(&j) {
                    std::cmp::Ordering::Less => pauli('z'),
                    std::cmp::Ordering::Equal => pauli(which),
                    std::cmp::Ordering::Greater => pauli('1'),
                };
                m = m.kron(&factor);
            }
            gamma.push(m);
        }
    }
    let dim = 1usize << k;
    let mut prod = CMat::identity(dim);
    for g in &gamma {
        prod = &prod * g;
    }
    let epsilon = prod.scale(i_pow(k));
    let gamma0 = epsilon.scale(cx(T::zero(), T::one()));
    Ok(CliffordRep { n, gamma, epsilon, gamma0 })
}

impl<T: Real> CliffordRep<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spinor dimension `2^{n/2}`.
    pub fn spinor_dim(&self) -> usize {
        1 << (self.n / 2)
    }

    /// Twisted fiber dimension `2^n`.
    pub fn twisted_dim(&self) -> usize {
        1 << self.n
    }

    /// Generator `γ^α` for `α` in `1..=n`.
    pub fn gamma(&self, alpha: usize) -> &CMat<T> {
        &self.gamma[alpha - 1]
    }

    pub fn gammas(&self) -> &[CMat<T>] {
        &self.gamma
    }

    pub fn epsilon(&self) -> &CMat<T> {
        &self.epsilon
    }

    pub fn gamma0(&self) -> &CMat<T> {
        &self.gamma0
    }

    /// Clifford multiplication by the vector with frame components `v`.
    pub fn clifford_vector(&self, v: &[T]) -> CMat<T> {
        assert_eq!(v.len(), self.n);
        let mut out = CMat::zeros(self.spinor_dim(), self.spinor_dim());
        for (alpha, &c) in v.iter().enumerate() {
            out = &out + &self.gamma[alpha].scale_re(c);
        }
        out
    }

    /// Ordered product `γ^{i₁}⋯γ^{i_k}` for a 1-based increasing multi-index.
    pub fn multi_index_product(&self, index: &[usize]) -> Result<CMat<T>> {
        validate_multi_index(index, self.n)?;
        let mut m = CMat::identity(self.spinor_dim());
        for &a in index {
            m = &m * &self.gamma[a - 1];
        }
        Ok(m)
    }

    fn mask_product(&self, mask: usize) -> CMat<T> {
        let mut m = CMat::identity(self.spinor_dim());
        for a in 0..self.n {
            if mask & (1 << a) != 0 {
                m = &m * &self.gamma[a];
            }
        }
        m
    }

    /// Boundary involution `γ⁰γⁿ` on the spinor module.
    pub fn boundary_chirality(&self, normal: &[T]) -> CMat<T> {
        &self.gamma0 * &self.clifford_vector(normal)
    }
}

fn validate_multi_index(index: &[usize], n: usize) -> Result<()> {
    let increasing = index.windows(2).all(|w| w[0] < w[1]);
    let in_range = index.iter().all(|&a| (1..=n).contains(&a));
    if increasing && in_range {
        Ok(())
    } else {
        Err(Error::MalformedMultiIndex(index.to_vec(), n))
    }
}

fn mask_of(index: &[usize]) -> usize {
    index.iter().fold(0, |m, &a| m | (1 << (a - 1)))
}

fn index_of(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|a| mask & (1 << a) != 0).map(|a| a + 1).collect()
}

/// Returns `Σ_I c_I γ^I` for the given multi-index coefficients.
pub fn form_endomorphism<T: Real>(rep: &CliffordRep<T>, coeffs: &[(Vec<usize>, Cx<T>)]) -> Result<CMat<T>> {
    let mut out = CMat::zeros(rep.spinor_dim(), rep.spinor_dim());
    for (index, c) in coeffs {
        let g = rep.multi_index_product(index)?;
        out = &out + &g.scale(*c);
    }
    Ok(out)
}

/// Inverse of [`form_endomorphism`] through the trace pairing
/// `c_I = 2^{-n/2} tr((γ^I)^† A)`; one coefficient per bitmask.
pub fn endomorphism_coefficients<T: Real>(rep: &CliffordRep<T>, a: &CMat<T>) -> Vec<(Vec<usize>, Cx<T>)> {
    let norm = T::one() / T::from_usize_lossy(rep.spinor_dim());
    (0..rep.twisted_dim())
        .map(|mask| {
            let g = rep.mask_product(mask);
            let c = (&g.adjoint() * a).trace().scale(norm);
            (index_of(mask, rep.n), c)
        })
        .collect()
}

/// The twisted fiber `Λ*(R^n)` with its two commuting-up-to-sign Clifford actions.
#[derive(Clone, Debug)]
pub struct FormAlgebra<T: Real> {
    n: usize,
    ext: Vec<CMat<T>>,
    int: Vec<CMat<T>>,
    gamma: Vec<CMat<T>>,
    gamma_hat: Vec<CMat<T>>,
    gamma0: CMat<T>,
    gamma0_hat: CMat<T>,
}

impl<T: Real> FormAlgebra<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n % 2 != 0 || !(2..=8).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let dim = 1usize << n;
        let mut ext = Vec::with_capacity(n);
        let mut int = Vec::with_capacity(n);
        for a in 0..n {
            let mut e = CMat::zeros(dim, dim);
            let mut i = CMat::zeros(dim, dim);
            for mask in 0..dim {
                let below = (mask & ((1 << a) - 1)).count_ones();
                let sign = if below % 2 == 0 { T::one() } else { -T::one() };
                if mask & (1 << a) == 0 {
                    e[(mask | (1 << a), mask)] = cx(sign, T::zero());
                } else {
                    i[(mask & !(1 << a), mask)] = cx(sign, T::zero());
                }
            }
            ext.push(e);
            int.push(i);
        }
        let iu = cx(T::zero(), T::one());
        let gamma: Vec<CMat<T>> = (0..n).map(|a| (&ext[a] - &int[a]).scale(iu)).collect();
        let gamma_hat: Vec<CMat<T>> = (0..n).map(|a| &ext[a] + &int[a]).collect();
        let k = n / 2;
        let grading = |gs: &[CMat<T>]| {
            let mut p = CMat::identity(dim);
            for g in gs {
                p = &p * g;
            }
            p.scale(i_pow::<T>(k) * iu)
        };
        let gamma0 = grading(&gamma);
        let gamma0_hat = grading(&gamma_hat);
        Ok(Self { n, ext, int, gamma, gamma_hat, gamma0, gamma0_hat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Exterior multiplication `E^α`, 1-based.
    pub fn ext(&self, alpha: usize) -> &CMat<T> {
        &self.ext[alpha - 1]
    }

    /// Interior multiplication `I^α`, 1-based.
    pub fn int(&self, alpha: usize) -> &CMat<T> {
        &self.int[alpha - 1]
    }

    /// `γ^α = i(E^α − I^α)`, 1-based.
    pub fn gamma(&self, alpha: usize) -> &CMat<T> {
        &self.gamma[alpha - 1]
    }

    /// `γ̂^α = E^α + I^α`, 1-based.
    pub fn gamma_hat(&self, alpha: usize) -> &CMat<T> {
        &self.gamma_hat[alpha - 1]
    }

    pub fn gamma0(&self) -> &CMat<T> {
        &self.gamma0
    }

    pub fn gamma0_hat(&self) -> &CMat<T> {
        &self.gamma0_hat
    }

    fn combine(ops: &[CMat<T>], v: &[T]) -> CMat<T> {
        assert_eq!(ops.len(), v.len());
        let mut out = CMat::zeros(ops[0].rows(), ops[0].cols());
        for (op, &c) in ops.iter().zip(v) {
            out = &out + &op.scale_re(c);
        }
        out
    }

    pub fn gamma_vec(&self, v: &[T]) -> CMat<T> {
        Self::combine(&self.gamma, v)
    }

    pub fn gamma_hat_vec(&self, v: &[T]) -> CMat<T> {
        Self::combine(&self.gamma_hat, v)
    }

    pub fn ext_vec(&self, v: &[T]) -> CMat<T> {
        Self::combine(&self.ext, v)
    }

    pub fn int_vec(&self, v: &[T]) -> CMat<T> {
        Self::combine(&self.int, v)
    }

    /// Degree parity `(−1)^deg` on forms.
    pub fn parity(&self) -> CMat<T> {
        CMat::from_fn(self.dim(), self.dim(), |i, j| {
            if i != j {
                cx(T::zero(), T::zero())
            } else if i.count_ones() % 2 == 0 {
                cx(T::one(), T::zero())
            } else {
                cx(-T::one(), T::zero())
            }
        })
    }

    /// Grading `i^{n/2+1} C¹⋯Cⁿ` built from the commuting dual action
    /// `C^α = γ̂^α (−1)^deg`.
    pub fn commuting_hat_grading(&self) -> CMat<T> {
        let parity = self.parity();
        let mut p = CMat::identity(self.dim());
        for g in &self.gamma_hat {
            p = &(&p * g) * &parity;
        }
        p.scale(i_pow::<T>(self.n / 2 + 1))
    }

    /// Basis vector of the form with the given 1-based increasing index.
    pub fn basis_form(&self, index: &[usize]) -> Result<Vec<Cx<T>>> {
        validate_multi_index(index, self.n)?;
        let mut v = vec![cx(T::zero(), T::zero()); self.dim()];
        v[mask_of(index)] = cx(T::one(), T::zero());
        Ok(v)
    }

    /// The constant form `1`.
    pub fn unit_form(&self) -> Vec<Cx<T>> {
        let mut v = vec![cx(T::zero(), T::zero()); self.dim()];
        v[0] = cx(T::one(), T::zero());
        v
    }

    /// The volume form `τ¹∧⋯∧τⁿ`.
    pub fn volume_form(&self) -> Vec<Cx<T>> {
        let mut v = vec![cx(T::zero(), T::zero()); self.dim()];
        v[self.dim() - 1] = cx(T::one(), T::zero());
        v
    }
}

/// Orthonormal frame adapted to a boundary point: `tangent[i]` spans the
/// boundary directions and `normal` is the inward unit normal, all given by
/// components in the gauge frame of the respective manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedFrame<T: Real> {
    pub tangent: Vec<Vec<T>>,
    pub normal: Vec<T>,
}

impl<T: Real> AdaptedFrame<T> {
    /// Two-dimensional adapted frame from the polar angle of the inward normal.
    /// The tangent is the normal rotated by −π/2, so (tangent, normal) is
    /// positively oriented.
    pub fn from_normal_angle(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self { tangent: vec![vec![s, -c]], normal: vec![c, s] }
    }
}

/// Boundary fiber algebra of the twisted bundle at one boundary point.
#[derive(Clone, Debug)]
pub struct BoundaryAlgebra<T: Real> {
    /// Involution `T`, normalized so that it fixes [`Self::identification`].
    pub t: CMat<T>,
    pub pi_plus: CMat<T>,
    pub pi_minus: CMat<T>,
    /// Clifford multiplication by the inward normal of `N`.
    pub gamma_n: CMat<T>,
    /// Clifford multiplication by the inward normal of the background.
    pub gamma_hat_n: CMat<T>,
    /// `γ^i` for each boundary direction of `N`.
    pub gamma_tangent: Vec<CMat<T>>,
    /// `γ̂^i` for each boundary direction of the background.
    pub gamma_hat_tangent: Vec<CMat<T>>,
    /// `E^i + I^i` per boundary direction.
    pub hat_plus: Vec<CMat<T>>,
    /// `E^i − I^i` per boundary direction.
    pub hat_minus: Vec<CMat<T>>,
    /// Fiber element realizing the boundary identification (the form `1`
    /// when the two frames agree).
    pub identification: Vec<Cx<T>>,
}

/// Boundary algebra for frames `frame_n` (on `N`) and `frame_m` (on the
/// background), related by the boundary isometry.
pub fn boundary_algebra<T: Real>(
    forms: &FormAlgebra<T>,
    frame_n: &AdaptedFrame<T>,
    frame_m: &AdaptedFrame<T>,
) -> Result<BoundaryAlgebra<T>> {
    let n = forms.n();
    if frame_n.normal.len() != n || frame_m.normal.len() != n || frame_n.tangent.len() + 1 != n {
        return Err(Error::InvalidSpec("adapted frame has the wrong dimension".into()));
    }
    let identification = identification_element(forms, frame_n, frame_m)?;

    let gamma_n = forms.gamma_vec(&frame_n.normal);
    let gamma_hat_n = forms.gamma_hat_vec(&frame_m.normal);
    // The hatted factors of T act on the dual spinor factor and must commute
    // with the γ action, so they are taken as γ̂·(−1)^deg here. With the graded
    // γ̂ the same product would reflect the tangential forms instead.
    let parity = forms.parity();
    let hat0 = forms.commuting_hat_grading();
    let raw = &(&(&(forms.gamma0() * &gamma_n) * &hat0) * &gamma_hat_n) * &parity;
    let image = raw.apply(&identification);
    let phase = crate::scalar::dot(&identification, &image);
    if (phase.norm() - T::one()).abs() > T::lit(1e-8) {
        return Err(Error::InvalidSpec("boundary involution does not fix the identification".into()));
    }
    let t = raw.scale(phase.inv());
    let id = CMat::identity(forms.dim());
    let half = T::lit(0.5);
    let pi_plus = (&id + &t).scale_re(half);
    let pi_minus = (&id - &t).scale_re(half);

    let gamma_tangent = frame_n.tangent.iter().map(|v| forms.gamma_vec(v)).collect();
    let gamma_hat_tangent = frame_m.tangent.iter().map(|v| forms.gamma_hat_vec(v)).collect();
    let hat_plus = frame_n.tangent.iter().map(|v| &forms.ext_vec(v) + &forms.int_vec(v)).collect();
    let hat_minus = frame_n.tangent.iter().map(|v| &forms.ext_vec(v) - &forms.int_vec(v)).collect();
    Ok(BoundaryAlgebra {
        t,
        pi_plus,
        pi_minus,
        gamma_n,
        gamma_hat_n,
        gamma_tangent,
        gamma_hat_tangent,
        hat_plus,
        hat_minus,
        identification,
    })
}

/// Convenience form for `n = 2` with coinciding frames: the inward normal
/// points at polar angle `normal_angle`.
pub fn boundary_involution<T: Real>(forms: &FormAlgebra<T>, normal_angle: T) -> Result<BoundaryAlgebra<T>> {
    if forms.n() != 2 {
        return Err(Error::Unsupported("angle parametrization is two-dimensional".into()));
    }
    let frame = AdaptedFrame::from_normal_angle(normal_angle);
    boundary_algebra(forms, &frame, &frame)
}

/// Solves `γ(u^N_α) Φ = i γ̂(u^M_α) Φ` for every adapted direction. The
/// solution space is one-dimensional; the phase is fixed by `⟨1, Φ⟩ > 0`
/// (or the first nonzero component when that vanishes).
fn identification_element<T: Real>(
    forms: &FormAlgebra<T>,
    frame_n: &AdaptedFrame<T>,
    frame_m: &AdaptedFrame<T>,
) -> Result<Vec<Cx<T>>> {
    let dim = forms.dim();
    let iu = cx(T::zero(), T::one());
    let mut dirs_n: Vec<&Vec<T>> = frame_n.tangent.iter().collect();
    dirs_n.push(&frame_n.normal);
    let mut dirs_m: Vec<&Vec<T>> = frame_m.tangent.iter().collect();
    dirs_m.push(&frame_m.normal);
    let blocks: Vec<CMat<T>> = dirs_n
        .iter()
        .zip(&dirs_m)
        .map(|(u, v)| &forms.gamma_vec(u) - &forms.gamma_hat_vec(v).scale(iu))
        .collect();
    let stacked = CMat::from_fn(dim * blocks.len(), dim, |r, c| blocks[r / dim][(r % dim, c)]);
    let ns = null_space(&stacked, T::lit(1e-10));
    if ns.cols() != 1 {
        return Err(Error::InvalidSpec(format!(
            "boundary frames are not related by an orientation-preserving isometry (nullity {})",
            ns.cols()
        )));
    }
    let mut phi = ns.column(0);
    normalize_phase(&mut phi);
    Ok(phi)
}

fn normalize_phase<T: Real>(v: &mut [Cx<T>]) {
    let pivot = v
        .iter()
        .copied()
        .find(|z| z.norm() > T::lit(1e-8))
        .unwrap_or(cx(T::one(), T::zero()));
    let phase = pivot.conj().unscale(pivot.norm());
    let nrm = crate::scalar::norm(v);
    for z in v.iter_mut() {
        *z = *z * phase / cx(nrm, T::zero());
    }
}

/// Chirality projectors `P± = (I ± γ⁰γⁿ)/2` on the spinor module.
pub fn chirality_projectors<T: Real>(rep: &CliffordRep<T>, normal: &[T]) -> (CMat<T>, CMat<T>) {
    let p = rep.boundary_chirality(normal);
    let id = CMat::identity(rep.spinor_dim());
    let half = T::lit(0.5);
    ((&id + &p).scale_re(half), (&id - &p).scale_re(half))
}

/// Spin lift `R` of the frame change `frame_m → frame_n`:
/// `R γ(u^M_α) = γ(u^N_α) R`, unitary, phase fixed by `tr R > 0`.
pub fn spin_rotor<T: Real>(rep: &CliffordRep<T>, frame_n: &AdaptedFrame<T>, frame_m: &AdaptedFrame<T>) -> Result<CMat<T>> {
    let m = rep.spinor_dim();
    let mut dirs_n: Vec<&Vec<T>> = frame_n.tangent.iter().collect();
    dirs_n.push(&frame_n.normal);
    let mut dirs_m: Vec<&Vec<T>> = frame_m.tangent.iter().collect();
    dirs_m.push(&frame_m.normal);
    // X row-major: (A X − X B) as an m²×m² operator on vec(X)
    let mut blocks = Vec::new();
    for (u, v) in dirs_n.iter().zip(&dirs_m) {
        let a = rep.clifford_vector(u);
        let b = rep.clifford_vector(v);
        blocks.push(CMat::from_fn(m * m, m * m, |r, c| {
            let (i, j) = (r / m, r % m);
            let (k, l) = (c / m, c % m);
            let mut val = cx(T::zero(), T::zero());
            if l == j {
                val = val + a[(i, k)];
            }
            if k == i {
                val = val - b[(l, j)];
            }
            val
        }));
    }
    let rows = m * m;
    let stacked = CMat::from_fn(rows * blocks.len(), rows, |r, c| blocks[r / rows][(r % rows, c)]);
    let ns = null_space(&stacked, T::lit(1e-10));
    if ns.cols() != 1 {
        return Err(Error::InvalidSpec("frames are not related by a rotation".into()));
    }
    let v = ns.column(0);
    let mut r = CMat::from_fn(m, m, |i, j| v[i * m + j]);
    let tr = r.trace();
    let phase = if tr.norm() > T::lit(1e-8) { tr.conj().unscale(tr.norm()) } else { cx(T::one(), T::zero()) };
    // unitary normalization: R^†R = c I
    let c = (&r.adjoint() * &r)[(0, 0)].re.sqrt();
    r = r.scale(phase.unscale(c));
    Ok(r)
}

/// Unitary `Q` with `γ^α_{forms} Q = Q (γ^α ⊗ I)` and
/// `γ̂^β ε_{forms} Q = Q (I ⊗ γ^β)`, identifying the twisted fiber with
/// `S ⊗ S`. Index `(a, k)` of the product space is `a·m + k`.
pub fn twisted_basis_change<T: Real>(rep: &CliffordRep<T>, forms: &FormAlgebra<T>) -> Result<CMat<T>> {
    if rep.n() != 2 || forms.n() != 2 {
        return Err(Error::Unsupported("explicit basis change is implemented for n = 2".into()));
    }
    let dim = forms.dim();
    let m = rep.spinor_dim();
    let id_m = CMat::identity(m);
    let eps_forms = forms.gamma0().scale(cx(T::zero(), -T::one()));
    let mut pairs: Vec<(CMat<T>, CMat<T>)> = Vec::new();
    for a in 1..=rep.n() {
        pairs.push((forms.gamma(a).clone(), rep.gamma(a).kron(&id_m)));
        pairs.push((forms.gamma_hat(a) * &eps_forms, id_m.kron(rep.gamma(a))));
    }
    let mut blocks = Vec::new();
    for (a, b) in &pairs {
        blocks.push(CMat::from_fn(dim * dim, dim * dim, |r, c| {
            let (i, j) = (r / dim, r % dim);
            let (k, l) = (c / dim, c % dim);
            let mut val = cx(T::zero(), T::zero());
            if l == j {
                val = val + a[(i, k)];
            }
            if k == i {
                val = val - b[(l, j)];
            }
            val
        }));
    }
    let rows = dim * dim;
    let stacked = CMat::from_fn(rows * blocks.len(), rows, |r, c| blocks[r / rows][(r % rows, c)]);
    let ns = null_space(&stacked, T::lit(1e-10));
    if ns.cols() != 1 {
        return Err(Error::InvalidSpec(format!("intertwiner space has dimension {}", ns.cols())));
    }
    let v = ns.column(0);
    let q = CMat::from_fn(dim, dim, |i, j| v[i * dim + j]);
    let c = (&q.adjoint() * &q)[(0, 0)].re.sqrt();
    Ok(q.scale_re(T::one() / c))
}

//! Randomized checks of the Clifford module, the form picture and the
//! boundary involution.

use proptest::prelude::*;
use quasilocal_core::clifford::{boundary_involution, build_clifford_rep, FormAlgebra};
use quasilocal_core::CMat;

fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
    (a - b).max_abs() <= tol
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

fn dim_and_pair() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    prop::sample::select(vec![2usize, 4, 6, 8]).prop_flat_map(|n| (Just(n), vector(n), vector(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clifford_multiplication_squares_to_the_norm((n, v, w) in dim_and_pair()) {
        let rep = build_clifford_rep::<f64>(n).unwrap();
        let (cv, cw) = (rep.clifford_vector(&v), rep.clifford_vector(&w));
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let id = CMat::identity(rep.spinor_dim());
        prop_assert!(close(&cv.anticommutator(&cw), &id.scale_re(2.0 * dot), 1e-12));
        prop_assert!(cv.is_hermitian(1e-14));
        prop_assert!(close(&rep.epsilon().anticommutator(&cv), &CMat::zeros(id.rows(), id.cols()), 1e-12));
    }

    #[test]
    fn form_actions_are_two_anticommuting_clifford_actions(v in vector(2), w in vector(2)) {
        let forms = FormAlgebra::<f64>::new(2).unwrap();
        let id = CMat::identity(forms.dim());
        let zero = CMat::zeros(forms.dim(), forms.dim());
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let (g_v, g_w) = (forms.gamma_vec(&v), forms.gamma_vec(&w));
        let (h_v, h_w) = (forms.gamma_hat_vec(&v), forms.gamma_hat_vec(&w));
        prop_assert!(close(&g_v.anticommutator(&g_w), &id.scale_re(2.0 * dot), 1e-12));
        prop_assert!(close(&h_v.anticommutator(&h_w), &id.scale_re(2.0 * dot), 1e-12));
        prop_assert!(close(&g_v.anticommutator(&h_w), &zero, 1e-12));
        // γ = i(E − I), γ̂ = E + I
        let e = forms.ext_vec(&v);
        let i = forms.int_vec(&v);
        prop_assert!(close(&h_v, &(&e + &i), 1e-14));
        prop_assert!(close(&g_v, &(&e - &i).scale(quasilocal_core::Cx::new(0.0, 1.0)), 1e-14));
    }

    #[test]
    fn boundary_involution_is_a_hermitian_reflection(angle in -3.2f64..3.2) {
        let forms = FormAlgebra::<f64>::new(2).unwrap();
        let b = boundary_involution(&forms, angle).unwrap();
        let id = CMat::identity(4);
        prop_assert!(close(&(&b.t * &b.t), &id, 1e-12));
        prop_assert!(b.t.is_hermitian(1e-12));
        prop_assert!(close(&(&b.pi_plus * &b.pi_plus), &b.pi_plus, 1e-12));
        prop_assert!(close(&(&b.pi_plus + &b.pi_minus), &id, 1e-12));
        prop_assert!((b.pi_plus.trace().re - 2.0).abs() < 1e-12);
        // T anticommutes with the normal Clifford action
        prop_assert!(close(&b.t.anticommutator(&b.gamma_n), &CMat::zeros(4, 4), 1e-12));
    }
}

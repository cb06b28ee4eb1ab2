mod common;

use geam_core::linalg::{
    flip, herm_eig, kron, max_abs_diff, partial_trace, trace, trace_norm, CMatrix, Hermitian,
    Subsystem,
};
use geam_core::states::GaussianRng;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = GaussianRng::new(seed);
        let g = common::random_matrix(n, n, &mut rng);
        let h = Hermitian::new((&g + g.adjoint()).scale(0.5)).unwrap();
        let eig = herm_eig(&h).unwrap();
        prop_assert!(max_abs_diff(&eig.reconstruct(), h.matrix()) <= 1e-10);
        let gram = eig.vectors.adjoint() * &eig.vectors;
        prop_assert!(max_abs_diff(&gram, &CMatrix::identity(n, n)) <= 1e-10);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn trace_norm_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=9, m in 1usize..=9) {
        let mut rng = GaussianRng::new(seed);
        let x = common::random_matrix(n, m, &mut rng);
        let u = common::random_unitary(n, &mut rng);
        let v = common::random_unitary(m, &mut rng);
        let base = trace_norm(&x).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!((trace_norm(&(&u * &x * &v)).unwrap() - base).abs() <= 1e-9);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..=5, db in 1usize..=5) {
        let mut rng = GaussianRng::new(seed);
        let a = common::random_matrix(da, da, &mut rng);
        let b = common::random_matrix(db, db, &mut rng);
        let ab = kron(&a, &b);
        let kept_a = partial_trace(&ab, (da, db), Subsystem::A).unwrap();
        prop_assert!(max_abs_diff(&kept_a, &(&a * trace(&b))) <= 1e-11);
        let kept_b = partial_trace(&ab, (da, db), Subsystem::B).unwrap();
        prop_assert!(max_abs_diff(&kept_b, &(&b * trace(&a))) <= 1e-11);
        prop_assert!((trace(&kept_a) - trace(&ab)).norm() <= 1e-12 * (1.0 + trace(&ab).norm()));
    }

    #[test]
    fn flip_swaps_factors(seed in any::<u64>(), d in 2usize..=6) {
        let mut rng = GaussianRng::new(seed);
        let a = common::random_matrix(d, d, &mut rng);
        let b = common::random_matrix(d, d, &mut rng);
        let f = flip(d).unwrap();
        prop_assert!(max_abs_diff(&(&f * kron(&a, &b) * &f), &kron(&b, &a)) <= 1e-11);
        prop_assert!(max_abs_diff(&(&f * &f), &CMatrix::identity(d * d, d * d)) == 0.0);
        prop_assert!((trace(&f).re - d as f64).abs() == 0.0);
    }
}

#[test]
fn trace_norm_zero_only_for_zero_matrix() {
    assert_eq!(trace_norm(&CMatrix::zeros(4, 4)).unwrap(), 0.0);
    let mut rng = GaussianRng::new(3);
    let x = common::random_matrix(4, 4, &mut rng);
    assert!(trace_norm(&x).unwrap() > 1e-12);
}

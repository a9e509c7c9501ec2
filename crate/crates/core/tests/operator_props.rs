use errdist::operator::{
    partial_trace, random_hermitian, random_unitary, spectral_decompose, swap_operator, tensor,
    trace_product, DEGENERACY_TOL,
};
use errdist::{DensityMatrix, Operator, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Partial trace by explicit index sums over a bipartition `d1 ⊗ d2`.
fn trace_out_second(o: &Operator, d1: usize, d2: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d1, d1, |i, j| {
        (0..d2).map(|k| o.get(i * d2 + k, j * d2 + k)).sum()
    })
}

fn trace_out_first(o: &Operator, d1: usize, d2: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d2, d2, |i, j| {
        (0..d1).map(|k| o.get(k * d2 + i, k * d2 + j)).sum()
    })
}

fn integer_matrix(dim: std::ops::Range<usize>) -> impl Strategy<Value = Operator> {
    dim.prop_flat_map(|d| {
        prop::collection::vec((-8i32..8, -8i32..8), d * d).prop_map(move |v| {
            let m = DMatrix::from_iterator(
                d,
                d,
                v.into_iter().map(|(re, im)| C64::new(re as f64, im as f64)),
            );
            Operator::from_matrix(m).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kronecker_is_associative_exactly_on_integer_entries(
        a in integer_matrix(1..4),
        b in integer_matrix(1..4),
        c in integer_matrix(1..4),
    ) {
        prop_assert_eq!(tensor(&tensor(&a, &b), &c), tensor(&a, &tensor(&b, &c)));
    }

    #[test]
    fn kronecker_is_associative(d1 in 1usize..4, d2 in 1usize..4, d3 in 1usize..4, seed in any::<u64>()) {
        let a = random_hermitian(d1, seed);
        let b = random_unitary(d2, seed ^ 1);
        let c = random_hermitian(d3, seed ^ 2);
        prop_assert!(tensor(&tensor(&a, &b), &c).max_abs_diff(&tensor(&a, &tensor(&b, &c))) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_recovers_factors(d1 in 1usize..5, d2 in 1usize..5, seed in any::<u64>()) {
        let a = random_hermitian(d1, seed);
        let b = random_hermitian(d2, seed.wrapping_add(7));
        let ab = tensor(&a, &b);
        let first = partial_trace(&ab, &[d1, d2], &[0]).unwrap();
        let second = partial_trace(&ab, &[d1, d2], &[1]).unwrap();
        prop_assert!(first.max_abs_diff(&a.scale_c(b.trace())) < 1e-12);
        prop_assert!(second.max_abs_diff(&b.scale_c(a.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_sums(d1 in 1usize..5, d2 in 1usize..5, seed in any::<u64>()) {
        let o = random_hermitian(d1 * d2, seed);
        let keep0 = partial_trace(&o, &[d1, d2], &[0]).unwrap();
        let keep1 = partial_trace(&o, &[d1, d2], &[1]).unwrap();
        prop_assert!((keep0.matrix() - trace_out_second(&o, d1, d2)).camax() < 1e-12);
        prop_assert!((keep1.matrix() - trace_out_first(&o, d1, d2)).camax() < 1e-12);
    }

    #[test]
    fn swap_trace_identity(d in 1usize..5, seed in any::<u64>()) {
        let o1 = random_hermitian(d, seed);
        let o2 = random_hermitian(d, seed.wrapping_add(1));
        let s = swap_operator(d);
        let lhs = trace_product(&tensor(&o1, &o2), &s);
        let rhs = (&o1 * &o2).trace();
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((&s * &s).max_abs_diff(&Operator::identity(d * d)) < 1e-15);
    }
}

#[test]
fn spectral_reconstruction_over_random_hermitians() {
    for seed in 0..500u64 {
        let d = 1 + (seed % 8) as usize;
        let o = random_hermitian(d, seed);
        let sd = spectral_decompose(&o, DEGENERACY_TOL).unwrap();
        assert!(sd.reconstruct().max_abs_diff(&o) < 1e-10, "seed {seed}");
        for p in &sd.projectors {
            assert!((p * p).max_abs_diff(p) < 1e-10);
        }
    }
}

#[test]
fn spectral_decomposition_merges_degenerate_eigenvalues() {
    let u = random_unitary(4, 11);
    let o = Operator::diagonal(&[1.0, 1.0, -2.0, 1.0 + 1e-12]).conjugate_by(&u);
    let sd = spectral_decompose(&o, DEGENERACY_TOL).unwrap();
    assert_eq!(sd.len(), 2);
    let ranks: Vec<usize> = sd.projectors.iter().map(|p| p.rank(1e-8)).collect();
    assert_eq!(ranks, vec![1, 3]);
}

#[test]
fn random_constructors_are_deterministic() {
    for d in 1..=4 {
        assert_eq!(random_unitary(d, 3), random_unitary(d, 3));
        assert_eq!(random_hermitian(d, 3), random_hermitian(d, 3));
        let u = random_unitary(d, 5);
        assert!((&u * &u.adjoint()).max_abs_diff(&Operator::identity(d)) < 1e-12);
    }
    let rho: DensityMatrix = errdist::operator::random_density(3, 9);
    assert!((rho.as_operator().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
}

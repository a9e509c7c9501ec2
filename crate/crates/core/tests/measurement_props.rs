use errdist::measurement::{
    bar_map, joint_from_indirect, kraus_povm, naimark_dilation, povm_from_joint,
    projective_dilation, vienna_model,
};
use errdist::operator::{
    commutator, random_density, random_density_of_rank, random_hermitian, random_unitary,
    seeded_rng, DEGENERACY_TOL,
};
use errdist::{DensityMatrix, IndirectModel, Operator, Side, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn model(ds: usize, da: usize, seed: u64) -> IndirectModel {
    let mut rng = seeded_rng(seed);
    let rank = 1 + (seed as usize % da);
    IndirectModel::new(
        ds,
        random_density_of_rank(da, rank, &mut rng),
        random_unitary(ds * da, seed.wrapping_add(1)),
        random_hermitian(da, seed.wrapping_add(2)),
    )
    .unwrap()
}

/// `Ō_ij = Σ_kl O_(ik),(jl) (ρ_a)_lk`.
fn bar_by_indices(o: &Operator, rho_a: &DensityMatrix) -> DMatrix<C64> {
    let da = rho_a.dim();
    let ds = o.dim() / da;
    let r = rho_a.as_operator();
    DMatrix::from_fn(ds, ds, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..da {
            for l in 0..da {
                acc += o.get(i * da + k, j * da + l) * r.get(l, k);
            }
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bar_map_matches_index_sum(ds in 1usize..5, da in 1usize..5, seed in any::<u64>()) {
        let o = random_hermitian(ds * da, seed);
        let rho_a = random_density(da, seed.wrapping_add(3));
        let bar = bar_map(&o, &rho_a).unwrap();
        prop_assert!((bar.matrix() - bar_by_indices(&o, &rho_a)).camax() < 1e-12);
    }

    #[test]
    fn bar_map_is_unital_and_positive(ds in 1usize..5, da in 1usize..5, seed in any::<u64>()) {
        let rho_a = random_density(da, seed);
        let id = bar_map(&Operator::identity(ds * da), &rho_a).unwrap();
        prop_assert!(id.max_abs_diff(&Operator::identity(ds)) < 1e-12);
        let h = random_hermitian(ds * da, seed.wrapping_add(1));
        let psd = &h * &h;
        prop_assert!(bar_map(&psd, &rho_a).unwrap().min_eigenvalue() > -1e-10);
    }

    #[test]
    fn indirect_joint_observables_commute(ds in 1usize..5, da in 1usize..5, seed in any::<u64>()) {
        let m = model(ds, da, seed);
        let b = random_hermitian(ds, seed.wrapping_add(9));
        let j = joint_from_indirect(&m, &b).unwrap();
        let c = commutator(j.observable(Side::A), j.observable(Side::B)).unwrap();
        prop_assert!(c.max_abs() < 1e-12 * (1.0 + b.max_abs()) * 16.0);
    }

    #[test]
    fn kraus_route_gives_the_same_povm(ds in 1usize..5, da in 1usize..5, seed in any::<u64>()) {
        let m = model(ds, da, seed);
        let j = joint_from_indirect(&m, &Operator::identity(ds)).unwrap();
        let from_joint = povm_from_joint(&j, Side::A, DEGENERACY_TOL).unwrap();
        let from_kraus = kraus_povm(&m, DEGENERACY_TOL).unwrap();
        prop_assert!(from_joint.max_abs_diff(&from_kraus, 1e-10) < 1e-10);
    }
}

#[test]
fn kadison_inequality_over_random_models() {
    for seed in 0..500u64 {
        let ds = 1 + (seed % 4) as usize;
        let da = 1 + ((seed / 4) % 4) as usize;
        let o = random_hermitian(ds * da, seed);
        let rho_a = random_density(da, seed + 1000);
        let bar = bar_map(&o, &rho_a).unwrap();
        let bar_sq = bar_map(&o.square(), &rho_a).unwrap();
        let gap = &bar_sq - &bar.square();
        assert!(gap.min_eigenvalue() > -1e-10, "seed {seed}");
    }
}

#[test]
fn naimark_dilation_reproduces_povm() {
    for seed in 0..50u64 {
        let ds = 2 + (seed % 3) as usize;
        let m = model(ds, 3, seed);
        let povm = kraus_povm(&m, DEGENERACY_TOL).unwrap();
        let dilated = naimark_dilation(&povm).unwrap();
        let again = kraus_povm(&dilated, DEGENERACY_TOL).unwrap();
        assert!(povm.max_abs_diff(&again, 1e-10) < 1e-10, "seed {seed}");
    }
}

#[test]
fn projective_dilation_is_sharp() {
    let a = Operator::diagonal(&[1.0, 1.0, -0.5]).conjugate_by(&random_unitary(3, 4));
    let m = projective_dilation(&a, DEGENERACY_TOL).unwrap();
    let j = joint_from_indirect(&m, &Operator::identity(3)).unwrap();
    assert!(j.bar(Side::A).max_abs_diff(&a) < 1e-12);
    assert!(j.bar_of_square(Side::A).max_abs_diff(&a.square()) < 1e-12);
}

#[test]
fn vienna_barred_observables() {
    for k in 0..16 {
        let phi = k as f64 * std::f64::consts::PI / 8.0;
        let j = joint_from_indirect(&vienna_model(phi), &Operator::pauli_y()).unwrap();
        // Oracle: cos φ X + sin φ Y and sin φ times it.
        let (c, s) = (phi.cos(), phi.sin());
        let xphi = Operator::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(c, -s)],
            vec![C64::new(c, s), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(j.bar(Side::A).max_abs_diff(&xphi) < 1e-12);
        assert!(j.bar(Side::B).max_abs_diff(&xphi.scale(s)) < 1e-12);
        assert!(
            j.bar_of_square(Side::B)
                .max_abs_diff(&Operator::identity(2))
                < 1e-12
        );
    }
}

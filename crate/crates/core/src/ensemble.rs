//! Seeded random scenarios for property tests, sweeps and benchmarks.
//!
//! Every scenario is a function of `(kind, seed)` alone. Dimensions are drawn
//! from `d_s ∈ 2..=4`, `d_a ∈ 1..=4` by default; states have random rank.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::Scenario;
use crate::error::Result;
use crate::exec::Execution;
use crate::measurement::{
    joint_from_indirect, joint_from_indirect_readout, IndirectModel, JointObservables, Side,
};
use crate::operator::{
    random_density_of_rank, random_hermitian_with, random_unitary_with, seeded_rng,
    spectral_decompose, tensor, DensityMatrix, Operator, DEGENERACY_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Random indirect measurement of `A` followed by an ideal `B`.
    ErrorDisturbance,
    /// `ℬ` reads a system observable and a function of the meter after the
    /// interaction, so both sides are generically fuzzy.
    GenericJoint,
    /// `ErrorDisturbance` with the `A` target replaced by `Ā`.
    UnbiasedA,
    /// `GenericJoint` with both targets replaced by their barred observables.
    BothUnbiased,
    /// `ℬ = N⊗1` projective; `𝒜` block-diagonal in the eigenspaces of `N`;
    /// targets `Ā` and `N`.
    UnbiasedAProjectiveB,
}

impl ScenarioKind {
    /// Kinds with no unbiasedness or projectivity built in.
    pub const GENERIC: [ScenarioKind; 2] =
        [ScenarioKind::ErrorDisturbance, ScenarioKind::GenericJoint];

    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::ErrorDisturbance,
        ScenarioKind::GenericJoint,
        ScenarioKind::UnbiasedA,
        ScenarioKind::BothUnbiased,
        ScenarioKind::UnbiasedAProjectiveB,
    ];
}

/// Dimension limits for a draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub max_system: usize,
    pub min_apparatus: usize,
    pub max_apparatus: usize,
}

impl Dims {
    /// At most `system` and `apparatus` dimensions.
    pub fn up_to(system: usize, apparatus: usize) -> Self {
        Dims {
            max_system: system,
            min_apparatus: 1,
            max_apparatus: apparatus,
        }
    }
}

impl Default for Dims {
    fn default() -> Self {
        Dims::up_to(4, 4)
    }
}

fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    random_density_of_rank(d, rank, rng)
}

fn random_model<R: Rng + ?Sized>(ds: usize, da: usize, rng: &mut R) -> Result<IndirectModel> {
    let rho_a = random_state(da, rng);
    let u = random_unitary_with(ds * da, rng);
    let meter = random_hermitian_with(da, rng);
    IndirectModel::new(ds, rho_a, u, meter)
}

/// `ℬ = U†(N⊗1 + 1⊗(c₁M + c₂M²))U`.
fn generic_joint<R: Rng + ?Sized>(model: &IndirectModel, rng: &mut R) -> Result<JointObservables> {
    let ds = model.system_dim();
    let da = model.apparatus_dim();
    let n = random_hermitian_with(ds, rng);
    let c1: f64 = StandardNormal.sample(rng);
    let c2: f64 = StandardNormal.sample(rng);
    let m = model.meter();
    let g = &m.scale(c1) + &m.square().scale(c2);
    let readout = &tensor(&n, &Operator::identity(da)) + &tensor(&Operator::identity(ds), &g);
    joint_from_indirect_readout(model, &readout)
}

/// `Σ_k (Π_k⊗1) H (Π_k⊗1)` over the eigenprojectors of `n`.
fn pinched<R: Rng + ?Sized>(n: &Operator, da: usize, rng: &mut R) -> Result<Operator> {
    let ds = n.dim();
    let h = random_hermitian_with(ds * da, rng);
    let sd = spectral_decompose(n, DEGENERACY_TOL)?;
    let id = Operator::identity(da);
    Ok(sd
        .projectors
        .iter()
        .map(|p| {
            let big = tensor(p, &id);
            &(&big * &h) * &big
        })
        .fold(Operator::zeros(ds * da), |acc, t| &acc + &t)
        .hermitian_part())
}

/// Scenario drawn from `seed`; the same `(kind, dims, seed)` always gives the
/// same matrices.
pub fn random_scenario(kind: ScenarioKind, dims: Dims, seed: u64) -> Result<Scenario> {
    let mut rng = seeded_rng(seed);
    let ds = rng.random_range(2..=dims.max_system.max(2));
    let da_min = dims.min_apparatus.max(1);
    let da = rng.random_range(da_min..=dims.max_apparatus.max(da_min));
    let rho = random_state(ds, &mut rng);
    let a = random_hermitian_with(ds, &mut rng);
    let b = random_hermitian_with(ds, &mut rng);

    match kind {
        ScenarioKind::ErrorDisturbance | ScenarioKind::UnbiasedA => {
            let model = random_model(ds, da, &mut rng)?;
            let j = joint_from_indirect(&model, &b)?;
            let a = if kind == ScenarioKind::UnbiasedA {
                j.bar(Side::A)
            } else {
                a
            };
            Scenario::new(j, a, b, rho)
        }
        ScenarioKind::GenericJoint | ScenarioKind::BothUnbiased => {
            let model = random_model(ds, da, &mut rng)?;
            let j = generic_joint(&model, &mut rng)?;
            if kind == ScenarioKind::BothUnbiased {
                let (ta, tb) = (j.bar(Side::A), j.bar(Side::B));
                Scenario::new(j, ta, tb, rho)
            } else {
                Scenario::new(j, a, b, rho)
            }
        }
        ScenarioKind::UnbiasedAProjectiveB => {
            let rho_a = random_state(da, &mut rng);
            let n = random_hermitian_with(ds, &mut rng);
            let joint_a = pinched(&n, da, &mut rng)?;
            let joint_b = tensor(&n, &Operator::identity(da));
            let j = JointObservables::new(ds, rho_a, joint_a, joint_b)?;
            let ta = j.bar(Side::A);
            Scenario::new(j, ta, n, rho)
        }
    }
}

/// `count` scenarios with seeds `first_seed..first_seed+count`, kinds cycled
/// through `kinds` in order.
pub fn scenario_batch(
    kinds: &[ScenarioKind],
    dims: Dims,
    first_seed: u64,
    count: usize,
    exec: Execution,
) -> Result<Vec<Scenario>> {
    exec.map_range(count, |i| {
        random_scenario(kinds[i % kinds.len()], dims, first_seed + i as u64)
    })
    .into_iter()
    .collect()
}

//! Controlled-SWAP estimation circuit.
//!
//! The system (state `ρ`), a reference copy (state `1/d`) and a control qubit
//! (state `|+⟩`) are ordered system ⊗ reference ⊗ qubit. After the
//! controlled swap the system and reference are each read by the joint
//! measurement (or the reference by an ideal measurement of `A` or `B`) and
//! the qubit is measured in the `X` or `Y` basis. Averages of products of the
//! outcomes recover fuzziness, total error, disturbance and the commutator
//! bound.

use nalgebra::DVector;

use crate::analysis::{checked_sqrt, fuzziness, scenario_stats, total_error, Scenario};
use crate::error::{Error, Result};
use crate::measurement::{joint_povm, Side};
use crate::operator::{
    partial_trace, spectral_decompose, swap_operator, tensor, tensor_all, trace_product,
    DensityMatrix, Operator, C64, DEGENERACY_TOL, I,
};

/// Entrywise tolerance between the two constructions of the final state.
pub const FINAL_STATE_TOL: f64 = 1e-12;
/// Probabilities below `-PROBABILITY_TOL` abort; total mass must be 1 within it.
pub const PROBABILITY_TOL: f64 = 1e-10;

/// What the reference system is measured with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReferenceMode {
    /// The same joint measurement as the system.
    Joint,
    /// Ideal projective measurement of `A`.
    IdealA,
    /// Ideal projective measurement of `B`.
    IdealB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitBasis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    ControlledSwap,
    /// `{P_as, 1 - P_as}` on system ⊗ reference in place of the controlled
    /// swap and `X` readout; qubit dimension only.
    SingletProjection,
}

#[derive(Clone, Debug)]
pub struct CircuitConfig {
    pub scenario: Scenario,
    pub reference_mode: ReferenceMode,
    pub basis: QubitBasis,
    pub variant: Variant,
}

impl CircuitConfig {
    pub fn new(
        scenario: Scenario,
        reference_mode: ReferenceMode,
        basis: QubitBasis,
        variant: Variant,
    ) -> Result<Self> {
        if variant == Variant::SingletProjection {
            if scenario.system_dim() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "singlet projection needs a qubit system, got d = {}",
                    scenario.system_dim()
                )));
            }
            if basis != QubitBasis::X {
                return Err(Error::InvalidArgument(
                    "singlet projection replaces the X readout only".into(),
                ));
            }
        }
        Ok(CircuitConfig {
            scenario,
            reference_mode,
            basis,
            variant,
        })
    }

    pub fn dim(&self) -> usize {
        self.scenario.system_dim()
    }
}

/// Labels of one circuit run. In the ideal reference modes the ideal outcome
/// `a` (resp. `b`) sits in `alpha_ref` (resp. `beta_ref`) and the other slot
/// is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_ref: f64,
    pub beta_ref: f64,
    /// `±1` eigenvalue of the qubit readout (`x` or `y`).
    pub qubit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub system_dim: usize,
    pub entries: Vec<(Outcome, f64)>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn expectation(&self, f: impl Fn(&Outcome) -> f64) -> f64 {
        self.entries.iter().map(|(o, p)| p * f(o)).sum()
    }

    /// Largest probability difference between entries with equal labels;
    /// infinite if the supports are labelled differently.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        if self.entries.len() != other.entries.len() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|((o1, p1), (o2, p2))| {
                if o1 == o2 {
                    (p1 - p2).abs()
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// Probability of the qubit outcome `q`.
    pub fn qubit_marginal(&self, q: f64) -> f64 {
        self.entries
            .iter()
            .filter(|(o, _)| o.qubit == q)
            .map(|(_, p)| p)
            .sum()
    }

    fn validate(&self) -> Result<()> {
        if let Some((_, p)) = self.entries.iter().find(|(_, p)| *p < -PROBABILITY_TOL) {
            return Err(Error::numerical("negative outcome probability", *p));
        }
        let r = (self.total() - 1.0).abs();
        if r > PROBABILITY_TOL {
            return Err(Error::numerical("outcome probabilities do not sum to 1", r));
        }
        Ok(())
    }
}

fn plus_state() -> DensityMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&DVector::from_vec(vec![C64::new(r, 0.0), C64::new(r, 0.0)]))
        .expect("normalized")
}

/// `ρ ⊗ 1/d ⊗ |+⟩⟨+|`.
pub fn build_initial_state(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    rho.tensor(&DensityMatrix::maximally_mixed(d))
        .tensor(&plus_state())
}

/// `1⊗1⊗|0⟩⟨0| + S⊗|1⟩⟨1|`.
pub fn controlled_swap(d: usize) -> Operator {
    &tensor(&Operator::identity(d * d), &Operator::unit(2, 0, 0))
        + &tensor(&swap_operator(d), &Operator::unit(2, 1, 1))
}

pub fn final_state_by_conjugation(rho: &DensityMatrix) -> Operator {
    let u = controlled_swap(rho.dim());
    let rho_i = build_initial_state(rho);
    // U ρ_i U† (U is Hermitian and unitary).
    rho_i.as_operator().conjugate_by(&u.adjoint())
}

/// `[ρ⊗1⊗|0⟩⟨0| + 1⊗ρ⊗|1⟩⟨1| + (ρ⊗1)S⊗|0⟩⟨1| + S(ρ⊗1)⊗|1⟩⟨0|] / 2d`.
pub fn final_state_closed_form(rho: &DensityMatrix) -> Operator {
    let d = rho.dim();
    let id = Operator::identity(d);
    let s = swap_operator(d);
    let r = rho.as_operator();
    let r1 = tensor(r, &id);
    let terms = [
        tensor(&r1, &Operator::unit(2, 0, 0)),
        tensor(&tensor(&id, r), &Operator::unit(2, 1, 1)),
        tensor(&(&r1 * &s), &Operator::unit(2, 0, 1)),
        tensor(&(&s * &r1), &Operator::unit(2, 1, 0)),
    ];
    terms
        .iter()
        .fold(Operator::zeros(2 * d * d), |acc, t| &acc + t)
        .scale(1.0 / (2.0 * d as f64))
}

/// State after the controlled swap, cross-checked against the closed form.
pub fn final_state(cfg: &CircuitConfig) -> Result<DensityMatrix> {
    let rho = &cfg.scenario.state;
    let conj = final_state_by_conjugation(rho);
    let closed = final_state_closed_form(rho);
    let r = conj.max_abs_diff(&closed);
    if r > FINAL_STATE_TOL {
        return Err(Error::numerical(
            "controlled-swap final state closed form",
            r,
        ));
    }
    Ok(DensityMatrix::new_unchecked(conj))
}

/// Eigenvectors of the qubit readout, labelled `+1` then `-1`.
fn qubit_projectors(basis: QubitBasis) -> [(f64, Operator); 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (plus, minus) = match basis {
        QubitBasis::X => (
            DVector::from_vec(vec![C64::new(r, 0.0), C64::new(r, 0.0)]),
            DVector::from_vec(vec![C64::new(r, 0.0), C64::new(-r, 0.0)]),
        ),
        QubitBasis::Y => (
            DVector::from_vec(vec![C64::new(r, 0.0), I * r]),
            DVector::from_vec(vec![C64::new(r, 0.0), -I * r]),
        ),
    };
    [
        (1.0, Operator::projector(&plus)),
        (-1.0, Operator::projector(&minus)),
    ]
}

/// Unnormalized system ⊗ reference state conditioned on each qubit outcome.
fn conditional_blocks(cfg: &CircuitConfig) -> Result<Vec<(f64, Operator)>> {
    let d = cfg.dim();
    match cfg.variant {
        Variant::ControlledSwap => {
            let rho_f = final_state(cfg)?;
            let id = Operator::identity(d * d);
            qubit_projectors(cfg.basis)
                .into_iter()
                .map(|(q, proj)| {
                    let gated = &tensor(&id, &proj) * rho_f.as_operator();
                    Ok((q, partial_trace(&gated, &[d, d, 2], &[0, 1])?))
                })
                .collect()
        }
        Variant::SingletProjection => {
            let sigma = tensor(
                cfg.scenario.state.as_operator(),
                DensityMatrix::maximally_mixed(d).as_operator(),
            );
            let id = Operator::identity(d * d);
            let p_as = (&id - &swap_operator(d)).scale(0.5);
            let p_s = &id - &p_as;
            Ok(vec![
                (1.0, &(&p_s * &sigma) * &p_s),
                (-1.0, &(&p_as * &sigma) * &p_as),
            ])
        }
    }
}

type LabelledEffects = Vec<((f64, f64), Operator)>;

fn reference_effects(cfg: &CircuitConfig, joint: &LabelledEffects) -> Result<LabelledEffects> {
    let spectral = |o: &Operator| -> Result<Vec<(f64, Operator)>> {
        let sd = spectral_decompose(o, DEGENERACY_TOL)?;
        Ok(sd.eigenvalues.into_iter().zip(sd.projectors).collect())
    };
    Ok(match cfg.reference_mode {
        ReferenceMode::Joint => joint.clone(),
        ReferenceMode::IdealA => spectral(&cfg.scenario.target_a)?
            .into_iter()
            .map(|(a, p)| ((a, 0.0), p))
            .collect(),
        ReferenceMode::IdealB => spectral(&cfg.scenario.target_b)?
            .into_iter()
            .map(|(b, p)| ((0.0, b), p))
            .collect(),
    })
}

/// Exact distribution of `(α, β, α′|a, β′|b, x|y)` at the circuit output.
pub fn joint_distribution(cfg: &CircuitConfig) -> Result<OutcomeDistribution> {
    let d = cfg.dim();
    let povm = joint_povm(&cfg.scenario.joint, DEGENERACY_TOL)?;
    let system: LabelledEffects = povm.outcomes.into_iter().zip(povm.effects).collect();
    let reference = reference_effects(cfg, &system)?;
    let blocks = conditional_blocks(cfg)?;
    let id = Operator::identity(d);

    let mut entries = Vec::with_capacity(system.len() * reference.len() * 2);
    for ((alpha, beta), m) in &system {
        // tr_sys[(M ⊗ 1) block] for each qubit outcome.
        let reduced = blocks
            .iter()
            .map(|(q, block)| {
                let weighted = &tensor(m, &id) * block;
                Ok((*q, partial_trace(&weighted, &[d, d], &[1])?))
            })
            .collect::<Result<Vec<_>>>()?;
        for ((alpha_ref, beta_ref), m_ref) in &reference {
            for (q, r) in &reduced {
                let p = trace_product(m_ref, r);
                if p.im.abs() > PROBABILITY_TOL {
                    return Err(Error::numerical("complex outcome probability", p.im.abs()));
                }
                entries.push((
                    Outcome {
                        alpha: *alpha,
                        beta: *beta,
                        alpha_ref: *alpha_ref,
                        beta_ref: *beta_ref,
                        qubit: *q,
                    },
                    p.re,
                ));
            }
        }
    }
    let dist = OutcomeDistribution {
        system_dim: d,
        entries,
    };
    dist.validate()?;
    Ok(dist)
}

/// Distribution of the singlet-projection variant (qubit systems only).
pub fn singlet_variant_distribution(cfg: &CircuitConfig) -> Result<OutcomeDistribution> {
    if cfg.variant != Variant::SingletProjection {
        return Err(Error::InvalidArgument(
            "configuration does not use the singlet projection".into(),
        ));
    }
    joint_distribution(cfg)
}

/// Quantities read off the circuit output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Estimator {
    /// `ε̄_𝒜 = sqrt(d E[α(α-α′)x])`
    FuzzinessA,
    /// `ε̄_ℬ = sqrt(d E[β(β-β′)x])`
    FuzzinessB,
    /// `ε_𝒜 = sqrt(d E[(α-a)²x])`
    ErrorA,
    /// `ε_ℬ = sqrt(d E[(β-b)²x])`
    DisturbanceB,
    /// `|⟨[Ā,B̄]⟩|/2 = d |E[αβ′y]|`
    CommutatorBound,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::FuzzinessA,
        Estimator::FuzzinessB,
        Estimator::ErrorA,
        Estimator::DisturbanceB,
        Estimator::CommutatorBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::FuzzinessA => "fuzziness_a",
            Estimator::FuzzinessB => "fuzziness_b",
            Estimator::ErrorA => "error_a",
            Estimator::DisturbanceB => "disturbance_b",
            Estimator::CommutatorBound => "commutator_bound",
        }
    }

    /// Circuit settings whose output this estimator is read from.
    pub fn settings(self) -> (ReferenceMode, QubitBasis) {
        match self {
            Estimator::FuzzinessA | Estimator::FuzzinessB => (ReferenceMode::Joint, QubitBasis::X),
            Estimator::ErrorA => (ReferenceMode::IdealA, QubitBasis::X),
            Estimator::DisturbanceB => (ReferenceMode::IdealB, QubitBasis::X),
            Estimator::CommutatorBound => (ReferenceMode::Joint, QubitBasis::Y),
        }
    }

    /// Estimators readable from a run with the given settings.
    pub fn available(mode: ReferenceMode, basis: QubitBasis) -> Vec<Estimator> {
        Self::ALL
            .into_iter()
            .filter(|e| e.settings() == (mode, basis))
            .collect()
    }

    /// Per-shot random variable whose mean is the squared quantity (or, for
    /// the commutator bound, the signed value before taking `|·|`).
    pub fn kernel(self, o: &Outcome, d: usize) -> f64 {
        let d = d as f64;
        match self {
            Estimator::FuzzinessA => d * o.alpha * (o.alpha - o.alpha_ref) * o.qubit,
            Estimator::FuzzinessB => d * o.beta * (o.beta - o.beta_ref) * o.qubit,
            Estimator::ErrorA => d * (o.alpha - o.alpha_ref).powi(2) * o.qubit,
            Estimator::DisturbanceB => d * (o.beta - o.beta_ref).powi(2) * o.qubit,
            Estimator::CommutatorBound => d * o.alpha * o.beta_ref * o.qubit,
        }
    }

    /// Maps the kernel mean to the reported quantity.
    pub fn finish(self, kernel_mean: f64) -> Result<f64> {
        match self {
            Estimator::CommutatorBound => Ok(kernel_mean.abs()),
            _ => checked_sqrt(kernel_mean, self.name()),
        }
    }

    /// Same quantity computed directly from operators.
    pub fn operator_route(self, scenario: &Scenario) -> Result<f64> {
        let j = &scenario.joint;
        let rho = &scenario.state;
        match self {
            Estimator::FuzzinessA => fuzziness(j, rho, Side::A),
            Estimator::FuzzinessB => fuzziness(j, rho, Side::B),
            Estimator::ErrorA => total_error(j, &scenario.target_a, rho, Side::A),
            Estimator::DisturbanceB => total_error(j, &scenario.target_b, rho, Side::B),
            Estimator::CommutatorBound => {
                Ok(scenario_stats(j, &scenario.target_a, &scenario.target_b, rho)?.fuzz_bound)
            }
        }
    }
}

/// Exact kernel mean of `est` under `dist`.
pub fn exact_kernel_mean(dist: &OutcomeDistribution, est: Estimator) -> f64 {
    dist.expectation(|o| est.kernel(o, dist.system_dim))
}

fn require_settings(cfg: &CircuitConfig, est: Estimator) -> Result<()> {
    let (mode, basis) = est.settings();
    if cfg.reference_mode != mode || cfg.basis != basis {
        return Err(Error::InvalidArgument(format!(
            "{} needs reference {:?} and {:?} basis, got {:?} / {:?}",
            est.name(),
            mode,
            basis,
            cfg.reference_mode,
            cfg.basis
        )));
    }
    Ok(())
}

/// `(ε̄_𝒜, ε̄_ℬ)` from the exact output distribution.
pub fn estimate_fuzziness_exact(cfg: &CircuitConfig) -> Result<(f64, f64)> {
    require_settings(cfg, Estimator::FuzzinessA)?;
    let dist = joint_distribution(cfg)?;
    Ok((
        Estimator::FuzzinessA.finish(exact_kernel_mean(&dist, Estimator::FuzzinessA))?,
        Estimator::FuzzinessB.finish(exact_kernel_mean(&dist, Estimator::FuzzinessB))?,
    ))
}

/// `ε_𝒜` (reference `IdealA`) or the disturbance `ε_ℬ` (reference `IdealB`).
pub fn estimate_error_disturbance_exact(cfg: &CircuitConfig) -> Result<f64> {
    let est = match cfg.reference_mode {
        ReferenceMode::IdealA => Estimator::ErrorA,
        ReferenceMode::IdealB => Estimator::DisturbanceB,
        ReferenceMode::Joint => {
            return Err(Error::InvalidArgument(
                "total error needs an ideal reference measurement".into(),
            ))
        }
    };
    require_settings(cfg, est)?;
    let dist = joint_distribution(cfg)?;
    est.finish(exact_kernel_mean(&dist, est))
}

/// `d |E[αβ′y]|` from the `Y`-basis run.
pub fn estimate_commutator_bound_exact(cfg: &CircuitConfig) -> Result<f64> {
    require_settings(cfg, Estimator::CommutatorBound)?;
    let dist = joint_distribution(cfg)?;
    Estimator::CommutatorBound.finish(exact_kernel_mean(&dist, Estimator::CommutatorBound))
}

/// `tr[(O₁⊗O₂⊗Q) ρ_f]`, used to check the swap-trace reductions.
pub fn final_state_correlation(
    rho: &DensityMatrix,
    o1: &Operator,
    o2: &Operator,
    qubit_observable: &Operator,
) -> C64 {
    let probe = tensor_all(&[o1, o2, qubit_observable]);
    trace_product(&probe, &final_state_closed_form(rho))
}

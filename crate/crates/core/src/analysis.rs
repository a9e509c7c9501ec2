//! Total RMS error, operator bias, fuzziness and the standard deviations that
//! enter the tradeoff relations.
//!
//! For a joint observable `𝒪` and target `T` in the state `ρ⊗ρ_a`:
//!
//! * total error `ε² = ⟨(𝒪 - T⊗1)²⟩`
//! * operator bias `ε_b² = ⟨(Ō - T)²⟩_ρ`
//! * fuzziness `ε̄² = ⟨bar(𝒪²) - Ō²⟩_ρ`
//!
//! and `ε² = ε_b² + ε̄²`. On the `B` side of an error-disturbance scenario the
//! same triple is the disturbance.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::measurement::{naimark_dilation, projectivity_residual, JointObservables, Povm, Side};
use crate::operator::{expectation, psd_sqrt, tensor, trace_product, DensityMatrix, Operator, C64};

/// Radicands down to `-RADICAND_TOL` are clipped to zero; below that is a bug.
pub const RADICAND_TOL: f64 = 1e-10;
/// Absolute tolerance of the `ε² = ε_b² + ε̄²` check (scaled by `max(1, ε²)`).
pub const DECOMPOSITION_TOL: f64 = 1e-10;

pub(crate) fn checked_sqrt(x: f64, what: &str) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::numerical(format!("{what} is not finite"), f64::NAN));
    }
    if x < -RADICAND_TOL {
        return Err(Error::numerical(format!("{what} has negative radicand"), x));
    }
    Ok(x.max(0.0).sqrt())
}

/// Identifies the joint measurement and state a quantity was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Provenance(u64);

impl Provenance {
    pub fn of(j: &JointObservables, rho: &DensityMatrix) -> Self {
        let mut h = DefaultHasher::new();
        let mut feed = |o: &Operator| {
            o.dim().hash(&mut h);
            for z in o.matrix().iter() {
                z.re.to_bits().hash(&mut h);
                z.im.to_bits().hash(&mut h);
            }
        };
        feed(j.observable(Side::A));
        feed(j.observable(Side::B));
        feed(j.apparatus_state().as_operator());
        feed(rho.as_operator());
        Provenance(h.finish())
    }
}

/// Error triple of one side of a joint measurement, plus the residuals that
/// decide whether the conditional relations apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBreakdown {
    pub side: Side,
    pub total: f64,
    pub bias: f64,
    pub fuzziness: f64,
    /// `max|Ō - target|`.
    pub unbiased_residual: f64,
    /// `max|bar(𝒪²) - Ō²|`.
    pub projective_residual: f64,
    pub provenance: Provenance,
}

/// Standard deviations and commutator bounds of a scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioStats {
    pub sigma_a: f64,
    pub sigma_b: f64,
    /// Deviation of `𝒜` in `ρ⊗ρ_a`.
    pub sigma_joint_a: f64,
    pub sigma_joint_b: f64,
    /// Deviation of `Ā` in `ρ`.
    pub sigma_bar_a: f64,
    pub sigma_bar_b: f64,
    /// `|⟨[A,B]⟩_ρ| / 2`.
    pub c_ab: f64,
    /// `|⟨[Ā,B̄]⟩_ρ| / 2`.
    pub fuzz_bound: f64,
    pub provenance: Provenance,
}

fn check_system_operator(
    j: &JointObservables,
    target: &Operator,
    rho: &DensityMatrix,
) -> Result<()> {
    if target.dim() != j.system_dim() || rho.dim() != j.system_dim() {
        return Err(Error::dims(format!(
            "target dim {} and state dim {} must equal system dim {}",
            target.dim(),
            rho.dim(),
            j.system_dim()
        )));
    }
    target.require_hermitian(1e-10)
}

/// `‖D √ρ‖_F = sqrt⟨D†D⟩_ρ`. Being a sum of squares it stays accurate when
/// the RMS value is near zero, where the square root of a rounded radicand
/// would not.
fn rms(d: &Operator, sqrt_rho: &Operator) -> f64 {
    (d * sqrt_rho).matrix().norm()
}

/// `sqrt(ρ ⊗ ρ_a)`.
fn sqrt_joint_state(rho: &DensityMatrix, rho_a: &DensityMatrix) -> Operator {
    tensor(&psd_sqrt(rho.as_operator()), &psd_sqrt(rho_a.as_operator()))
}

/// RMS of `o - target⊗1` in `rho ⊗ rho_a`, after checking the radicand.
fn rms_deviation(
    o: &Operator,
    target: &Operator,
    rho: &DensityMatrix,
    rho_a: &DensityMatrix,
    what: &str,
) -> Result<f64> {
    let diff = o - &tensor(target, &Operator::identity(rho_a.dim()));
    checked_sqrt(expectation(&diff.square(), &rho.tensor(rho_a))?, what)?;
    Ok(rms(&diff, &sqrt_joint_state(rho, rho_a)))
}

pub fn total_error(
    j: &JointObservables,
    target: &Operator,
    rho: &DensityMatrix,
    side: Side,
) -> Result<f64> {
    check_system_operator(j, target, rho)?;
    rms_deviation(
        j.observable(side),
        target,
        rho,
        j.apparatus_state(),
        "total error",
    )
}

/// `sqrt⟨bar(𝒪²) - Ō²⟩_ρ`, evaluated as the RMS of `𝒪 - Ō⊗1` in `ρ⊗ρ_a`
/// (the two agree identically).
pub fn fuzziness(j: &JointObservables, rho: &DensityMatrix, side: Side) -> Result<f64> {
    if rho.dim() != j.system_dim() {
        return Err(Error::dims(format!(
            "state dim {} vs system dim {}",
            rho.dim(),
            j.system_dim()
        )));
    }
    let bar = j.bar(side).hermitian_part();
    let spread = &j.bar_of_square(side) - &bar.square();
    checked_sqrt(expectation(&spread.hermitian_part(), rho)?, "fuzziness")?;
    let diff = j.observable(side) - &tensor(&bar, &Operator::identity(j.apparatus_dim()));
    Ok(rms(&diff, &sqrt_joint_state(rho, j.apparatus_state())))
}

pub fn operator_bias(
    j: &JointObservables,
    target: &Operator,
    rho: &DensityMatrix,
    side: Side,
) -> Result<f64> {
    check_system_operator(j, target, rho)?;
    let diff = &j.bar(side).hermitian_part() - target;
    checked_sqrt(expectation(&diff.square(), rho)?, "operator bias")?;
    Ok(rms(&diff, &psd_sqrt(rho.as_operator())))
}

/// All three error components of one side, with the decomposition checked.
pub fn breakdown(
    j: &JointObservables,
    target: &Operator,
    rho: &DensityMatrix,
    side: Side,
) -> Result<ErrorBreakdown> {
    let total = total_error(j, target, rho, side)?;
    let bias = operator_bias(j, target, rho, side)?;
    let fuzz = fuzziness(j, rho, side)?;
    let residual = (total * total - bias * bias - fuzz * fuzz).abs();
    if residual > DECOMPOSITION_TOL * (total * total).max(1.0) {
        return Err(Error::numerical(
            "error decomposition ε² = ε_b² + ε̄²",
            residual,
        ));
    }
    Ok(ErrorBreakdown {
        side,
        total,
        bias,
        fuzziness: fuzz,
        unbiased_residual: j.bar(side).max_abs_diff(target),
        projective_residual: projectivity_residual(j, side),
        provenance: Provenance::of(j, rho),
    })
}

/// `sqrt(⟨O²⟩ - ⟨O⟩²)`.
pub fn std_dev(o: &Operator, rho: &DensityMatrix) -> Result<f64> {
    let m1 = expectation(o, rho)?;
    let m2 = expectation(&o.square(), rho)?;
    checked_sqrt(m2 - m1 * m1, "variance")?;
    let centered = o - &Operator::identity(o.dim()).scale(m1);
    Ok(rms(&centered, &psd_sqrt(rho.as_operator())))
}

/// `|⟨[a,b]⟩_ρ| / 2`.
pub fn half_commutator_bound(a: &Operator, b: &Operator, rho: &DensityMatrix) -> Result<f64> {
    Ok(commutator_expectation(a, b, rho)?.norm() / 2.0)
}

/// `⟨[a,b]⟩_ρ` (purely imaginary for Hermitian `a`, `b`).
pub fn commutator_expectation(a: &Operator, b: &Operator, rho: &DensityMatrix) -> Result<C64> {
    if a.dim() != b.dim() || a.dim() != rho.dim() {
        return Err(Error::dims(format!(
            "dims {}, {}, state {}",
            a.dim(),
            b.dim(),
            rho.dim()
        )));
    }
    let c = &(a * b) - &(b * a);
    Ok(trace_product(&c, rho.as_operator()))
}

pub fn scenario_stats(
    j: &JointObservables,
    a: &Operator,
    b: &Operator,
    rho: &DensityMatrix,
) -> Result<ScenarioStats> {
    check_system_operator(j, a, rho)?;
    check_system_operator(j, b, rho)?;
    let joint = j.joint_state(rho)?;
    let bar_a = j.bar(Side::A).hermitian_part();
    let bar_b = j.bar(Side::B).hermitian_part();
    Ok(ScenarioStats {
        sigma_a: std_dev(a, rho)?,
        sigma_b: std_dev(b, rho)?,
        sigma_joint_a: std_dev(j.observable(Side::A), &joint)?,
        sigma_joint_b: std_dev(j.observable(Side::B), &joint)?,
        sigma_bar_a: std_dev(&bar_a, rho)?,
        sigma_bar_b: std_dev(&bar_b, rho)?,
        c_ab: half_commutator_bound(a, b, rho)?,
        fuzz_bound: half_commutator_bound(&bar_a, &bar_b, rho)?,
        provenance: Provenance::of(j, rho),
    })
}

/// Total error of a POVM computed through a fresh Neumark dilation of it.
///
/// The result depends only on the POVM, so it must agree with
/// [`total_error`] for any implementation producing that POVM.
pub fn povm_total_error(povm: &Povm, target: &Operator, rho: &DensityMatrix) -> Result<f64> {
    if target.dim() != povm.dim() || rho.dim() != povm.dim() {
        return Err(Error::dims("POVM, target and state dims differ"));
    }
    let model = naimark_dilation(povm)?;
    rms_deviation(
        &model.meter_observable(),
        target,
        rho,
        model.apparatus_state(),
        "total error",
    )
}

/// A joint measurement together with the two target observables and the
/// system state it is applied to.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub joint: JointObservables,
    pub target_a: Operator,
    pub target_b: Operator,
    pub state: DensityMatrix,
}

impl Scenario {
    pub fn new(
        joint: JointObservables,
        target_a: Operator,
        target_b: Operator,
        state: DensityMatrix,
    ) -> Result<Self> {
        check_system_operator(&joint, &target_a, &state)?;
        check_system_operator(&joint, &target_b, &state)?;
        Ok(Scenario {
            joint,
            target_a,
            target_b,
            state,
        })
    }

    pub fn target(&self, side: Side) -> &Operator {
        match side {
            Side::A => &self.target_a,
            Side::B => &self.target_b,
        }
    }

    pub fn breakdown(&self, side: Side) -> Result<ErrorBreakdown> {
        breakdown(&self.joint, self.target(side), &self.state, side)
    }

    pub fn stats(&self) -> Result<ScenarioStats> {
        scenario_stats(&self.joint, &self.target_a, &self.target_b, &self.state)
    }

    pub fn system_dim(&self) -> usize {
        self.joint.system_dim()
    }
}

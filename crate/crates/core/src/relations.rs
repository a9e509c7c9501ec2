//! Error-tradeoff relations as LHS / RHS / slack reports, the derivation
//! chains behind the improved relations, and closed-form boundaries of the
//! forbidden error regions.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{commutator_expectation, ErrorBreakdown, Scenario, ScenarioStats};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measurement::{Side, CONDITION_TOL};
use crate::operator::{expectation, Operator};

/// A relation counts as satisfied when `lhs - rhs >= -SATISFACTION_TOL`.
pub const SATISFACTION_TOL: f64 = 1e-9;
/// Tolerance of the dominance links between improved and original relations.
pub const DOMINANCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationId {
    /// `ε̄_𝒜 ε̄_ℬ >= |⟨[Ā,B̄]⟩|/2`
    FuzzTradeoff,
    /// `ε̄_𝒜ε̄_ℬ + ε_b𝒜 ε_bℬ + ε_b𝒜 σ_B + σ_A ε_bℬ >= c_AB`
    Main,
    /// `ε_𝒜ε_ℬ + ε_𝒜σ_B + σ_Aε_ℬ >= c_AB`
    Ozawa,
    /// Ozawa with `σ_𝒜`, `σ_ℬ` in place of `σ_A`, `σ_B`.
    Hall,
    HallImproved,
    /// `ε_𝒜(σ_ℬ+σ_B)/2 + ε_ℬ(σ_𝒜+σ_A)/2 >= c_AB`
    Weston,
    WestonImproved,
    /// `σ_Āσ_B̄ + ε_b𝒜ε_bℬ + ε_b𝒜σ_B + σ_Aε_bℬ >= c_AB`
    RobertsonType,
    /// `(ε_b𝒜 + σ_Ā)(ε_bℬ + σ_B̄) >= c_AB`
    HeisenbergType,
    /// `σ_𝒜σ_ℬ >= |⟨[Ā,B̄]⟩|`
    RobertsonLikeCommuting,
    /// `sqrt(ε_𝒜² + σ_A²) ε_ℬ >= c_AB` when `Ā = A`.
    CondUnbiasedA,
    /// `ε_ℬ σ_A >= c_AB` when `Ā = A` and the `B` readout is projective.
    CondUnbiasedAProjB,
    /// `ε_𝒜 ε_ℬ >= c_AB` when `Ā = A` and `B̄ = B`.
    CondBothUnbiased,
    /// `ε_𝒜² + ε_ℬ² >= 1`, only at `σ_A = σ_B = c_AB = 1`; boundary use only.
    BranciardSpecial,
}

impl RelationId {
    /// Relations that hold for every joint measurement and state.
    pub const UNIVERSAL: [RelationId; 10] = [
        RelationId::FuzzTradeoff,
        RelationId::Main,
        RelationId::Ozawa,
        RelationId::Hall,
        RelationId::HallImproved,
        RelationId::Weston,
        RelationId::WestonImproved,
        RelationId::RobertsonType,
        RelationId::HeisenbergType,
        RelationId::RobertsonLikeCommuting,
    ];

    pub const CONDITIONAL: [RelationId; 3] = [
        RelationId::CondUnbiasedA,
        RelationId::CondUnbiasedAProjB,
        RelationId::CondBothUnbiased,
    ];

    /// Every relation [`evaluate`] accepts, universal first.
    pub fn evaluable() -> impl Iterator<Item = RelationId> {
        Self::UNIVERSAL.into_iter().chain(Self::CONDITIONAL)
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationId::FuzzTradeoff => "FUZZ_TRADEOFF",
            RelationId::Main => "MAIN",
            RelationId::Ozawa => "OZAWA",
            RelationId::Hall => "HALL",
            RelationId::HallImproved => "HALL_IMPROVED",
            RelationId::Weston => "WESTON",
            RelationId::WestonImproved => "WESTON_IMPROVED",
            RelationId::RobertsonType => "ROBERTSON_TYPE",
            RelationId::HeisenbergType => "HEISENBERG_TYPE",
            RelationId::RobertsonLikeCommuting => "ROBERTSON_LIKE_COMMUTING",
            RelationId::CondUnbiasedA => "COND_UNBIASED_A",
            RelationId::CondUnbiasedAProjB => "COND_UNBIASED_A_PROJ_B",
            RelationId::CondBothUnbiased => "COND_BOTH_UNBIASED",
            RelationId::BranciardSpecial => "BRANCIARD_SPECIAL",
        }
    }

    pub fn is_universal(self) -> bool {
        Self::UNIVERSAL.contains(&self)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::evaluable()
            .chain(std::iter::once(RelationId::BranciardSpecial))
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown relation '{s}'")))
    }
}

/// Whether a report came from scalar summaries or from operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvaluationMode {
    Scalar,
    Operator,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Precondition {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub relation: RelationId,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
    /// False when a conditional relation's preconditions do not hold.
    pub applicable: bool,
    pub preconditions: Vec<Precondition>,
    pub mode: EvaluationMode,
}

fn check_provenance(a: &ErrorBreakdown, b: &ErrorBreakdown, stats: &ScenarioStats) -> Result<()> {
    if a.side != Side::A || b.side != Side::B {
        return Err(Error::InvalidArgument(format!(
            "expected A-side and B-side breakdowns, got {} and {}",
            a.side, b.side
        )));
    }
    if a.provenance != b.provenance || a.provenance != stats.provenance {
        return Err(Error::InvalidArgument(
            "breakdowns and stats come from different scenarios".into(),
        ));
    }
    Ok(())
}

/// Evaluates one relation from the scalar summaries of a scenario.
pub fn evaluate(
    relation: RelationId,
    a: &ErrorBreakdown,
    b: &ErrorBreakdown,
    s: &ScenarioStats,
) -> Result<RelationReport> {
    check_provenance(a, b, s)?;
    let c = s.c_ab;
    let mut preconditions = Vec::new();
    let (lhs, rhs) = match relation {
        RelationId::FuzzTradeoff => (a.fuzziness * b.fuzziness, s.fuzz_bound),
        RelationId::Main => (main_lhs(a, b, s), c),
        RelationId::Ozawa => (ozawa_lhs(a, b, s), c),
        RelationId::Hall => (hall_lhs(a, b, s), c),
        RelationId::HallImproved => (hall_improved_lhs(a, b, s), c),
        RelationId::Weston => (weston_lhs(a, b, s), c),
        RelationId::WestonImproved => (weston_improved_lhs(a, b, s), c),
        RelationId::RobertsonType => (
            s.sigma_bar_a * s.sigma_bar_b
                + a.bias * b.bias
                + a.bias * s.sigma_b
                + s.sigma_a * b.bias,
            c,
        ),
        RelationId::HeisenbergType => ((a.bias + s.sigma_bar_a) * (b.bias + s.sigma_bar_b), c),
        RelationId::RobertsonLikeCommuting => {
            (s.sigma_joint_a * s.sigma_joint_b, 2.0 * s.fuzz_bound)
        }
        RelationId::CondUnbiasedA => {
            preconditions.push(Precondition {
                name: "unbiased_a",
                residual: a.unbiased_residual,
            });
            ((a.total.powi(2) + s.sigma_a.powi(2)).sqrt() * b.total, c)
        }
        RelationId::CondUnbiasedAProjB => {
            preconditions.push(Precondition {
                name: "unbiased_a",
                residual: a.unbiased_residual,
            });
            preconditions.push(Precondition {
                name: "projective_b",
                residual: b.projective_residual,
            });
            (b.total * s.sigma_a, c)
        }
        RelationId::CondBothUnbiased => {
            preconditions.push(Precondition {
                name: "unbiased_a",
                residual: a.unbiased_residual,
            });
            preconditions.push(Precondition {
                name: "unbiased_b",
                residual: b.unbiased_residual,
            });
            (a.total * b.total, c)
        }
        RelationId::BranciardSpecial => return Err(Error::UnsupportedRelation(relation)),
    };
    let slack = lhs - rhs;
    Ok(RelationReport {
        relation,
        lhs,
        rhs,
        slack,
        satisfied: slack >= -SATISFACTION_TOL,
        applicable: preconditions.iter().all(|p| p.residual < CONDITION_TOL),
        preconditions,
        mode: EvaluationMode::Scalar,
    })
}

/// Reports for every evaluable relation, universal ones first.
pub fn evaluate_all(
    a: &ErrorBreakdown,
    b: &ErrorBreakdown,
    s: &ScenarioStats,
) -> Result<Vec<RelationReport>> {
    RelationId::evaluable()
        .map(|r| evaluate(r, a, b, s))
        .collect()
}

fn main_lhs(a: &ErrorBreakdown, b: &ErrorBreakdown, s: &ScenarioStats) -> f64 {
    a.fuzziness * b.fuzziness + a.bias * b.bias + a.bias * s.sigma_b + s.sigma_a * b.bias
}

fn ozawa_lhs(a: &ErrorBreakdown, b: &ErrorBreakdown, s: &ScenarioStats) -> f64 {
    a.total * b.total + a.total * s.sigma_b + s.sigma_a * b.total
}

fn hall_lhs(a: &ErrorBreakdown, b: &ErrorBreakdown, s: &ScenarioStats) -> f64 {
    a.total * b.total + a.total * s.sigma_joint_b + s.sigma_joint_a * b.total
}

fn hall_improved_lhs(a: &ErrorBreakdown, b: &ErrorBreakdown, s: &ScenarioStats) -> f64 {
    a.bias * b.bias
        + a.fuzziness * b.fuzziness
        + a.bias * s.sigma_joint_b
        + s.sigma_joint_a * b.bias
}

fn weston_lhs(a: &ErrorBreakdown, b: &ErrorBreakdown, s: &ScenarioStats) -> f64 {
    a.total * (s.sigma_joint_b + s.sigma_b) / 2.0 + b.total * (s.sigma_joint_a + s.sigma_a) / 2.0
}

fn weston_improved_lhs(a: &ErrorBreakdown, b: &ErrorBreakdown, s: &ScenarioStats) -> f64 {
    a.fuzziness * b.fuzziness
        + a.bias * (s.sigma_bar_b + s.sigma_b) / 2.0
        + b.bias * (s.sigma_bar_a + s.sigma_a) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkKind {
    /// `lhs >= rhs`
    AtLeast,
    /// `lhs == rhs`
    Equal,
}

/// One inequality (or equality) in a chain, with its slack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub label: &'static str,
    pub kind: LinkKind,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl Link {
    fn at_least(label: &'static str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = lhs - rhs;
        Link {
            label,
            kind: LinkKind::AtLeast,
            lhs,
            rhs,
            slack,
            holds: slack >= -tol,
        }
    }

    fn equal(label: &'static str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = lhs - rhs;
        Link {
            label,
            kind: LinkKind::Equal,
            lhs,
            rhs,
            slack,
            holds: slack.abs() <= tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub links: Vec<Link>,
    pub mode: EvaluationMode,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.links.iter().all(|l| l.holds)
    }

    pub fn worst_slack(&self) -> f64 {
        self.links
            .iter()
            .map(|l| match l.kind {
                LinkKind::AtLeast => l.slack,
                LinkKind::Equal => -l.slack.abs(),
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn link(&self, label: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.label == label)
    }
}

/// Checks that each improved relation's LHS is bounded by its original's,
/// through the Schwarz-type inequalities that connect them.
pub fn dominance_check(
    a: &ErrorBreakdown,
    b: &ErrorBreakdown,
    s: &ScenarioStats,
) -> Result<ChainReport> {
    check_provenance(a, b, s)?;
    let tol = DOMINANCE_TOL;
    let links = vec![
        Link::at_least(
            "schwarz_total_product",
            a.total * b.total,
            a.bias * b.bias + a.fuzziness * b.fuzziness,
            tol,
        ),
        Link::at_least("total_ge_bias_a", a.total, a.bias, tol),
        Link::at_least("total_ge_bias_b", b.total, b.bias, tol),
        Link::at_least(
            "schwarz_joint_sigmas",
            s.sigma_joint_a * s.sigma_joint_b,
            a.fuzziness * b.fuzziness + s.sigma_bar_a * s.sigma_bar_b,
            tol,
        ),
        Link::at_least("ozawa_ge_main", ozawa_lhs(a, b, s), main_lhs(a, b, s), tol),
        Link::at_least(
            "hall_ge_hall_improved",
            hall_lhs(a, b, s),
            hall_improved_lhs(a, b, s),
            tol,
        ),
        Link::at_least(
            "weston_ge_weston_improved",
            weston_lhs(a, b, s),
            weston_improved_lhs(a, b, s),
            tol,
        ),
    ];
    Ok(ChainReport {
        links,
        mode: EvaluationMode::Scalar,
    })
}

/// Chains of Robertson bounds and triangle inequalities proving the main and
/// improved-Weston relations, evaluated link by link from operators.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivationReport {
    pub main: ChainReport,
    pub weston_improved: ChainReport,
}

impl DerivationReport {
    pub fn all_hold(&self) -> bool {
        self.main.all_hold() && self.weston_improved.all_hold()
    }
}

pub fn derivation_chain_check(scenario: &Scenario) -> Result<DerivationReport> {
    let tol = SATISFACTION_TOL;
    let rho = &scenario.state;
    let a = &scenario.target_a;
    let b = &scenario.target_b;
    let bar_a = scenario.joint.bar(Side::A).hermitian_part();
    let bar_b = scenario.joint.bar(Side::B).hermitian_part();
    let ea = scenario.breakdown(Side::A)?;
    let eb = scenario.breakdown(Side::B)?;
    let s = scenario.stats()?;

    let da = &bar_a - a;
    let db = &bar_b - b;
    let half = |x: &Operator, y: &Operator| -> Result<f64> {
        Ok(commutator_expectation(x, y, rho)?.norm() / 2.0)
    };
    let rms = |x: &Operator| -> Result<f64> { Ok(expectation(&x.square(), rho)?.max(0.0).sqrt()) };

    // Main relation.
    let t1 = half(&bar_a, &bar_b)?;
    let t2 = half(&da, &db)?;
    let t3 = half(&da, b)?;
    let t4 = half(a, &db)?;
    let lhs = main_lhs(&ea, &eb, &s);
    let bias_a = rms(&da)?;
    let bias_b = rms(&db)?;
    let combined = {
        let c = &(&commutator_of(&bar_b, &bar_a) + &commutator_of(&da, &bar_b))
            + &commutator_of(a, &db);
        crate::operator::trace_product(&c, rho.as_operator()).norm() / 2.0
    };
    let main = ChainReport {
        links: vec![
            Link::at_least("fuzziness_robertson", ea.fuzziness * eb.fuzziness, t1, tol),
            Link::at_least("bias_bias_robertson", bias_a * bias_b, t2, tol),
            Link::at_least("bias_a_sigma_b_robertson", bias_a * s.sigma_b, t3, tol),
            Link::at_least("sigma_a_bias_b_robertson", s.sigma_a * bias_b, t4, tol),
            Link::at_least("lhs_ge_robertson_sum", lhs, t1 + t2 + t3 + t4, tol),
            Link::at_least("triangle", t1 + t2 + t3 + t4, combined, tol),
            Link::equal("combined_equals_c_ab", combined, s.c_ab, tol),
        ],
        mode: EvaluationMode::Operator,
    };

    // Improved Weston relation.
    let u2 = half(&da, &bar_b)? / 2.0;
    let u3 = half(&da, b)? / 2.0;
    let u4 = half(&bar_a, &db)? / 2.0;
    let u5 = half(a, &db)? / 2.0;
    let five = t1 + u2 + u3 + u4 + u5;
    let diff = {
        let c = &commutator_of(a, b) - &commutator_of(&bar_a, &bar_b);
        crate::operator::trace_product(&c, rho.as_operator()).norm() / 2.0
    };
    let w_lhs = weston_improved_lhs(&ea, &eb, &s);
    let weston_improved = ChainReport {
        links: vec![
            Link::at_least("fuzziness_robertson", ea.fuzziness * eb.fuzziness, t1, tol),
            Link::at_least(
                "bias_a_sigma_bar_b_robertson",
                bias_a * s.sigma_bar_b / 2.0,
                u2,
                tol,
            ),
            Link::at_least(
                "bias_a_sigma_b_robertson",
                bias_a * s.sigma_b / 2.0,
                u3,
                tol,
            ),
            Link::at_least(
                "sigma_bar_a_bias_b_robertson",
                s.sigma_bar_a * bias_b / 2.0,
                u4,
                tol,
            ),
            Link::at_least(
                "sigma_a_bias_b_robertson",
                s.sigma_a * bias_b / 2.0,
                u5,
                tol,
            ),
            Link::at_least("lhs_ge_robertson_sum", w_lhs, five, tol),
            Link::at_least("triangle", five, t1 + diff, tol),
            Link::at_least("final_triangle", t1 + diff, s.c_ab, tol),
        ],
        mode: EvaluationMode::Operator,
    };
    Ok(DerivationReport {
        main,
        weston_improved,
    })
}

fn commutator_of(x: &Operator, y: &Operator) -> Operator {
    &(x * y) - &(y * x)
}

/// `σ_A`, `σ_B`, `c_AB` fixing the forbidden regions in the `(ε_𝒜, ε_ℬ)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionParams {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub c_ab: f64,
}

impl RegionParams {
    pub fn new(sigma_a: f64, sigma_b: f64, c_ab: f64) -> Result<Self> {
        for (name, v) in [("sigma_a", sigma_a), ("sigma_b", sigma_b), ("c_ab", c_ab)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(RegionParams {
            sigma_a,
            sigma_b,
            c_ab,
        })
    }

    /// The only triple at which the Branciard special case is defined.
    pub fn is_unit(&self) -> bool {
        [self.sigma_a, self.sigma_b, self.c_ab]
            .iter()
            .all(|v| (v - 1.0).abs() <= 1e-12)
    }
}

impl From<&ScenarioStats> for RegionParams {
    fn from(s: &ScenarioStats) -> Self {
        RegionParams {
            sigma_a: s.sigma_a,
            sigma_b: s.sigma_b,
            c_ab: s.c_ab,
        }
    }
}

/// Relations with a closed-form region boundary.
pub const BOUNDARY_RELATIONS: [RelationId; 5] = [
    RelationId::Ozawa,
    RelationId::BranciardSpecial,
    RelationId::CondBothUnbiased,
    RelationId::CondUnbiasedAProjB,
    RelationId::CondUnbiasedA,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub eps_a: f64,
    /// Smallest allowed `ε_ℬ`; infinite where no finite value is allowed.
    pub eps_b_min: f64,
}

fn require_boundary(relation: RelationId, p: &RegionParams) -> Result<()> {
    if !BOUNDARY_RELATIONS.contains(&relation) {
        return Err(Error::UnsupportedRelation(relation));
    }
    if relation == RelationId::BranciardSpecial && !p.is_unit() {
        return Err(Error::InvalidArgument(format!(
            "BRANCIARD_SPECIAL needs sigma_a = sigma_b = c_ab = 1, got ({}, {}, {})",
            p.sigma_a, p.sigma_b, p.c_ab
        )));
    }
    Ok(())
}

/// Smallest `ε_ℬ` allowed by `relation` at `ε_𝒜 = eps_a`.
pub fn boundary_eps_b(relation: RelationId, p: &RegionParams, eps_a: f64) -> Result<f64> {
    require_boundary(relation, p)?;
    if !(eps_a.is_finite() && eps_a >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps_a must be >= 0, got {eps_a}"
        )));
    }
    let c = p.c_ab;
    Ok(match relation {
        // ε_𝒜ε_ℬ + ε_𝒜σ_B + σ_Aε_ℬ = c solved for ε_ℬ.
        RelationId::Ozawa => ((c - eps_a * p.sigma_b) / (eps_a + p.sigma_a)).max(0.0),
        RelationId::BranciardSpecial => (1.0 - eps_a * eps_a).max(0.0).sqrt(),
        RelationId::CondBothUnbiased => {
            if eps_a == 0.0 {
                f64::INFINITY
            } else {
                c / eps_a
            }
        }
        RelationId::CondUnbiasedAProjB => c / p.sigma_a,
        RelationId::CondUnbiasedA => c / (eps_a * eps_a + p.sigma_a * p.sigma_a).sqrt(),
        _ => unreachable!("checked by require_boundary"),
    })
}

/// LHS - RHS of a boundary relation written in total errors.
pub fn region_slack(relation: RelationId, p: &RegionParams, eps_a: f64, eps_b: f64) -> Result<f64> {
    require_boundary(relation, p)?;
    let c = p.c_ab;
    Ok(match relation {
        RelationId::Ozawa => eps_a * eps_b + eps_a * p.sigma_b + p.sigma_a * eps_b - c,
        RelationId::BranciardSpecial => eps_a * eps_a + eps_b * eps_b - 1.0,
        RelationId::CondBothUnbiased => eps_a * eps_b - c,
        RelationId::CondUnbiasedAProjB => eps_b * p.sigma_a - c,
        RelationId::CondUnbiasedA => (eps_a * eps_a + p.sigma_a * p.sigma_a).sqrt() * eps_b - c,
        _ => unreachable!("checked by require_boundary"),
    })
}

/// Boundary curve of `relation` over `grid`, in grid order.
pub fn region_boundary(
    relation: RelationId,
    p: &RegionParams,
    grid: &[f64],
) -> Result<Vec<BoundaryPoint>> {
    require_boundary(relation, p)?;
    Execution::default()
        .map_slice(grid, |&eps_a| {
            boundary_eps_b(relation, p, eps_a).map(|eps_b_min| BoundaryPoint { eps_a, eps_b_min })
        })
        .into_iter()
        .collect()
}

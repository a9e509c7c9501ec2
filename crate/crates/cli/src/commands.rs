//! The four subcommands. Each produces a [`Table`]; `verify` also reports
//! whether a universal relation failed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use errdist::analysis::commutator_expectation;
use errdist::circuit::{
    exact_kernel_mean, final_state, joint_distribution, singlet_variant_distribution,
    CircuitConfig, Estimator, QubitBasis, ReferenceMode, Variant,
};
use errdist::relations::{boundary_eps_b, evaluate_all, RegionParams, RelationId, RelationReport};
use errdist::sampling::sample;
use errdist::{Execution, Scenario, Side};

use crate::parse::{format_complex, format_real, parse_real, Grid};
use crate::scenario::{load_scenario, ScenarioSpec};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "errdist",
    version,
    about = "Error-disturbance relations workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every universal relation and the applicable conditional ones.
    Verify(SweepArgs),
    /// Per-point error components, spreads and relation left-hand sides.
    Sweep(SweepArgs),
    /// Boundary curves of the forbidden regions in the (eps_a, eps_b) plane.
    Region(RegionArgs),
    /// Exact and sampled estimates from the swap-trick circuit.
    Circuit(CircuitArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file or preset name (presets: vienna).
    #[arg(long, default_value = "vienna")]
    pub scenario: String,
    /// Parameter grid `start:stop:count`; overrides the scenario's sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Take sigma_a, sigma_b and c_ab from this scenario at `--param`.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
    pub param: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real, default_value = "1")]
    pub sigma_a: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real, default_value = "1")]
    pub sigma_b: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real, default_value = "1")]
    pub c_ab: f64,
    /// Require the eps_a^2 + eps_b^2 >= 1 column (unit parameters only).
    #[arg(long)]
    pub branciard: bool,
    /// Grid over eps_a.
    #[arg(long, allow_hyphen_values = true, default_value = "0:2:101")]
    pub grid: Grid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Cswap,
    Singlet,
}

#[derive(Debug, Args)]
pub struct CircuitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Single parameter value; takes precedence over `--grid`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
    pub param: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Qubit readout basis; both when omitted (X only for the singlet variant).
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    #[arg(long, value_enum, default_value = "cswap")]
    pub variant: VariantArg,
}

/// Header plus rows of already formatted cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Input(format!("csv buffer: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub table: Table,
    /// Set when a universal relation is unsatisfied somewhere.
    pub violation: Option<String>,
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Verify(a) => run_verify(&a.common),
        Command::Sweep(a) => run_sweep(&a.common),
        Command::Region(a) => run_region(&a),
        Command::Circuit(a) => run_circuit(&a),
    }
}

/// Evaluates `f` at every point (in parallel when enabled) and returns the
/// results in grid order, or the error of the first failing point.
fn per_point<T: Send>(
    spec: &ScenarioSpec,
    points: &[f64],
    f: impl Fn(f64, &Scenario) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    Execution::default()
        .map_slice(points, |&phi| {
            let s = spec.build(phi)?;
            f(phi, &s).map_err(|e| e.context(format!("param {}", format_real(phi))))
        })
        .into_iter()
        .collect()
}

fn reports(s: &Scenario) -> Result<Vec<RelationReport>, CliError> {
    let a = s.breakdown(Side::A)?;
    let b = s.breakdown(Side::B)?;
    Ok(evaluate_all(&a, &b, &s.stats()?)?)
}

fn find(reports: &[RelationReport], id: RelationId) -> &RelationReport {
    reports
        .iter()
        .find(|r| r.relation == id)
        .expect("evaluate_all covers every evaluable relation")
}

pub const VERIFY_HEADER: [&str; 7] = [
    "param",
    "relation_id",
    "lhs",
    "rhs",
    "slack",
    "satisfied",
    "precondition_residuals",
];

pub fn run_verify(c: &Common) -> Result<Output, CliError> {
    let spec = load_scenario(&c.scenario)?;
    let points = spec.points(c.grid.as_ref());
    let per = per_point(&spec, &points, |_, s| reports(s))?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (phi, reps) in points.iter().zip(per) {
        for r in reps
            .iter()
            .filter(|r| r.relation.is_universal() || r.applicable)
        {
            if r.relation.is_universal() && !r.satisfied {
                violations.push(format!("{} at param {}", r.relation, format_real(*phi)));
            }
            let pre = r
                .preconditions
                .iter()
                .map(|p| format!("{}={}", p.name, format_real(p.residual)))
                .collect::<Vec<_>>()
                .join(";");
            rows.push(vec![
                format_real(*phi),
                r.relation.name().to_string(),
                format_real(r.lhs),
                format_real(r.rhs),
                format_real(r.slack),
                r.satisfied.to_string(),
                pre,
            ]);
        }
    }
    Ok(Output {
        table: Table {
            header: VERIFY_HEADER.to_vec(),
            rows,
        },
        violation: (!violations.is_empty()).then(|| violations.join(", ")),
        out: c.out.clone(),
    })
}

pub const SWEEP_HEADER: [&str; 14] = [
    "param",
    "eps_a",
    "bias_a",
    "fuzziness_a",
    "eps_b",
    "bias_b",
    "fuzziness_b",
    "sigma_a",
    "sigma_b",
    "c_ab",
    "comm_ab",
    "main_lhs",
    "ozawa_lhs",
    "naive_product",
];

pub fn run_sweep(c: &Common) -> Result<Output, CliError> {
    let spec = load_scenario(&c.scenario)?;
    let points = spec.points(c.grid.as_ref());
    let rows = per_point(&spec, &points, |phi, s| {
        let a = s.breakdown(Side::A)?;
        let b = s.breakdown(Side::B)?;
        let stats = s.stats()?;
        let reps = evaluate_all(&a, &b, &stats)?;
        let comm = commutator_expectation(&s.target_a, &s.target_b, &s.state)?;
        Ok(vec![
            format_real(phi),
            format_real(a.total),
            format_real(a.bias),
            format_real(a.fuzziness),
            format_real(b.total),
            format_real(b.bias),
            format_real(b.fuzziness),
            format_real(stats.sigma_a),
            format_real(stats.sigma_b),
            format_real(stats.c_ab),
            format_complex(comm),
            format_real(find(&reps, RelationId::Main).lhs),
            format_real(find(&reps, RelationId::Ozawa).lhs),
            format_real(a.total * b.total),
        ])
    })?;
    Ok(Output {
        table: Table {
            header: SWEEP_HEADER.to_vec(),
            rows,
        },
        violation: None,
        out: c.out.clone(),
    })
}

const REGION_COLUMNS: [(&str, RelationId); 4] = [
    ("eps_b_ozawa", RelationId::Ozawa),
    ("eps_b_both_unbiased", RelationId::CondBothUnbiased),
    ("eps_b_unbiased_a_proj_b", RelationId::CondUnbiasedAProjB),
    ("eps_b_unbiased_a", RelationId::CondUnbiasedA),
];

pub fn run_region(a: &RegionArgs) -> Result<Output, CliError> {
    let params = match &a.scenario {
        Some(source) => {
            let spec = load_scenario(source)?;
            let s = spec.build(a.param.unwrap_or(spec.param))?;
            RegionParams::from(&s.stats()?)
        }
        None => RegionParams::new(a.sigma_a, a.sigma_b, a.c_ab)?,
    };
    if a.branciard && !params.is_unit() {
        return Err(CliError::Input(format!(
            "the BRANCIARD_SPECIAL column needs sigma_a = sigma_b = c_ab = 1, got ({}, {}, {})",
            format_real(params.sigma_a),
            format_real(params.sigma_b),
            format_real(params.c_ab)
        )));
    }
    let mut relations: Vec<(&str, RelationId)> = vec![REGION_COLUMNS[0]];
    if params.is_unit() {
        relations.push(("eps_b_branciard_special", RelationId::BranciardSpecial));
    }
    relations.extend_from_slice(&REGION_COLUMNS[1..]);

    let mut header = vec!["eps_a"];
    header.extend(relations.iter().map(|(h, _)| *h));
    let rows = a
        .grid
        .points()
        .into_iter()
        .map(|eps_a| {
            let mut row = vec![format_real(eps_a)];
            for (_, r) in &relations {
                row.push(format_real(boundary_eps_b(*r, &params, eps_a)?));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Output {
        table: Table { header, rows },
        violation: None,
        out: a.out.clone(),
    })
}

pub const CIRCUIT_HEADER: [&str; 8] = [
    "param",
    "quantity",
    "exact",
    "operator_route",
    "sampled",
    "std_error",
    "shots",
    "seed",
];

/// Largest tolerated gap between the circuit and operator radicands.
pub const CORRESPONDENCE_TOL: f64 = 1e-9;

fn circuit_estimators(a: &CircuitArgs) -> Vec<Estimator> {
    let basis = match (a.basis, a.variant) {
        (Some(BasisArg::X), _) | (None, VariantArg::Singlet) => Some(QubitBasis::X),
        (Some(BasisArg::Y), _) => Some(QubitBasis::Y),
        (None, VariantArg::Cswap) => None,
    };
    Estimator::ALL
        .into_iter()
        .filter(|e| basis.is_none_or(|b| e.settings().1 == b))
        .collect()
}

/// Operator-route value on the kernel-mean scale: squared for the root
/// estimators, unchanged for the commutator bound.
fn radicand(est: Estimator, value: f64) -> f64 {
    match est {
        Estimator::CommutatorBound => value,
        _ => value * value,
    }
}

fn circuit_rows(
    s: &Scenario,
    phi: f64,
    estimators: &[Estimator],
    a: &CircuitArgs,
) -> Result<Vec<Vec<String>>, CliError> {
    let variant = match a.variant {
        VariantArg::Cswap => Variant::ControlledSwap,
        VariantArg::Singlet => Variant::SingletProjection,
    };
    let mut settings: Vec<(ReferenceMode, QubitBasis)> = Vec::new();
    for e in estimators {
        if !settings.contains(&e.settings()) {
            settings.push(e.settings());
        }
    }
    let mut rows = Vec::new();
    for (mode, basis) in settings {
        let here: Vec<Estimator> = estimators
            .iter()
            .copied()
            .filter(|e| e.settings() == (mode, basis))
            .collect();
        let cfg = CircuitConfig::new(s.clone(), mode, basis, variant)?;
        final_state(&cfg)?;
        let dist = match variant {
            Variant::ControlledSwap => joint_distribution(&cfg)?,
            Variant::SingletProjection => singlet_variant_distribution(&cfg)?,
        };
        let run = sample(&dist, &here, a.shots, a.seed)?;
        for est in here {
            let kernel = exact_kernel_mean(&dist, est);
            let operator = est.operator_route(s)?;
            let circuit = match est {
                Estimator::CommutatorBound => kernel.abs(),
                _ => kernel,
            };
            let gap = (circuit - radicand(est, operator)).abs();
            if gap > CORRESPONDENCE_TOL {
                return Err(CliError::Numerical(format!(
                    "{}: circuit and operator routes differ by {gap:e}",
                    est.name()
                )));
            }
            let (sampled, se) = run
                .estimate(est)
                .expect("sampled estimators are the requested ones")
                .finished();
            let row = vec![
                format_real(phi),
                est.name().to_string(),
                format_real(est.finish(kernel)?),
                format_real(operator),
                format_real(sampled),
                se.map(format_real).unwrap_or_default(),
                a.shots.to_string(),
                a.seed.to_string(),
            ];
            rows.push((est, row));
        }
    }
    let order = |e: &Estimator| estimators.iter().position(|x| x == e);
    rows.sort_by_key(|(e, _)| order(e));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn run_circuit(a: &CircuitArgs) -> Result<Output, CliError> {
    if a.shots == 0 {
        return Err(CliError::Input("--shots must be at least 1".into()));
    }
    if a.variant == VariantArg::Singlet && a.basis == Some(BasisArg::Y) {
        return Err(CliError::Input(
            "the singlet variant replaces the X readout; --basis y is not available".into(),
        ));
    }
    let spec = load_scenario(&a.common.scenario)?;
    let points = match (a.param, a.common.grid.as_ref()) {
        (Some(p), _) => vec![p],
        (None, Some(g)) => g.points(),
        (None, None) => vec![spec.param],
    };
    let estimators = circuit_estimators(a);
    let per = per_point(&spec, &points, |phi, s| {
        circuit_rows(s, phi, &estimators, a)
    })?;
    Ok(Output {
        table: Table {
            header: CIRCUIT_HEADER.to_vec(),
            rows: per.into_iter().flatten().collect(),
        },
        violation: None,
        out: a.common.out.clone(),
    })
}

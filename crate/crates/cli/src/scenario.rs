//! Scenario definitions: the built-in presets and the plain-text file format.
//!
//! A scenario file is a list of `key = value` lines; `#` starts a comment.
//!
//! ```text
//! name        = tilted-qubit
//! state       = zplus                 # preset or matrix literal
//! a           = X                     # I, X, Y, Z or matrix literal
//! b           = Y
//! model       = projective            # or: indirect
//! measure     = xphi                  # projective: operator measured on the A side
//! param       = 0.3                   # value of phi when there is no sweep
//! sweep       = 0:2pi:181             # optional grid for phi
//! b_side      = ideal-after           # or: joint (indirect models only)
//! ```
//!
//! Indirect models replace `measure` by `apparatus_state`, `interaction` and
//! `meter`; a joint B side adds `b_readout`, an observable on
//! system ⊗ apparatus commuting with `1 ⊗ meter`.

use std::collections::BTreeMap;
use std::path::Path;

use errdist::measurement::{joint_from_indirect, joint_from_indirect_readout, projective_dilation};
use errdist::operator::DEGENERACY_TOL;
use errdist::{DensityMatrix, IndirectModel, Operator, Scenario, C64};
use nalgebra::DVector;

use crate::parse::{parse_matrix, parse_real, Grid};
use crate::CliError;

pub const PRESETS: [&str; 1] = ["vienna"];

/// Operator that may depend on the swept parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    Fixed(Operator),
    /// `cos φ X + sin φ Y`.
    XPhi,
}

impl OperatorSpec {
    fn at(&self, phi: f64) -> Operator {
        match self {
            OperatorSpec::Fixed(o) => o.clone(),
            OperatorSpec::XPhi => Operator::x_phi(phi),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    /// Sharp measurement of the given operator (von Neumann dilation).
    Projective(OperatorSpec),
    Indirect {
        apparatus_state: DensityMatrix,
        interaction: Operator,
        meter: Operator,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum BSide {
    /// Ideal measurement of `B` after the `A` measurement.
    IdealAfter,
    /// Readout on system ⊗ apparatus measured jointly with the meter.
    Joint(Operator),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub state: DensityMatrix,
    pub target_a: Operator,
    pub target_b: Operator,
    pub model: ModelSpec,
    pub b_side: BSide,
    pub param: f64,
    pub sweep: Option<Grid>,
}

impl ScenarioSpec {
    /// Parameter values to evaluate: the override grid, else the scenario's
    /// sweep, else its single fixed parameter.
    pub fn points(&self, grid: Option<&Grid>) -> Vec<f64> {
        match grid.or(self.sweep.as_ref()) {
            Some(g) => g.points(),
            None => vec![self.param],
        }
    }

    /// The scenario at parameter value `phi`.
    pub fn build(&self, phi: f64) -> Result<Scenario, CliError> {
        let model = match &self.model {
            ModelSpec::Projective(o) => projective_dilation(&o.at(phi), DEGENERACY_TOL)?,
            ModelSpec::Indirect {
                apparatus_state,
                interaction,
                meter,
            } => IndirectModel::new(
                self.state.dim(),
                apparatus_state.clone(),
                interaction.clone(),
                meter.clone(),
            )?,
        };
        let joint = match &self.b_side {
            BSide::IdealAfter => joint_from_indirect(&model, &self.target_b)?,
            BSide::Joint(readout) => joint_from_indirect_readout(&model, readout)?,
        };
        Ok(Scenario::new(
            joint,
            self.target_a.clone(),
            self.target_b.clone(),
            self.state.clone(),
        )?)
    }
}

pub fn vienna() -> ScenarioSpec {
    ScenarioSpec {
        name: "vienna".into(),
        state: DensityMatrix::basis(2, 0),
        target_a: Operator::pauli_x(),
        target_b: Operator::pauli_y(),
        model: ModelSpec::Projective(OperatorSpec::XPhi),
        b_side: BSide::IdealAfter,
        param: 0.0,
        sweep: Some(Grid {
            start: 0.0,
            stop: 2.0 * std::f64::consts::PI,
            count: 181,
        }),
    }
}

/// A preset name or a path to a scenario file.
pub fn load_scenario(source: &str) -> Result<ScenarioSpec, CliError> {
    match source {
        "vienna" => Ok(vienna()),
        path => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::Input(format!("cannot read scenario '{path}': {e}")))?;
            parse_scenario(&text)
        }
    }
}

fn named_operator(s: &str) -> Option<Operator> {
    match s.to_ascii_lowercase().as_str() {
        "i" => Some(Operator::identity(2)),
        "x" => Some(Operator::pauli_x()),
        "y" => Some(Operator::pauli_y()),
        "z" => Some(Operator::pauli_z()),
        _ => None,
    }
}

fn operator_value(s: &str) -> Result<Operator, CliError> {
    match named_operator(s) {
        Some(o) => Ok(o),
        None => parse_matrix(s),
    }
}

fn ket(amplitudes: [C64; 2]) -> DensityMatrix {
    DensityMatrix::pure(&DVector::from_vec(amplitudes.to_vec())).expect("normalized preset")
}

fn named_state(s: &str) -> Option<DensityMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    let lower = s.to_ascii_lowercase();
    if let Some(d) = lower.strip_prefix("mixed") {
        let d = if d.is_empty() {
            Some(2)
        } else {
            d.strip_prefix(':')?.parse().ok()
        };
        return d.filter(|&d| d > 0).map(DensityMatrix::maximally_mixed);
    }
    Some(match lower.as_str() {
        "zplus" => DensityMatrix::basis(2, 0),
        "zminus" => DensityMatrix::basis(2, 1),
        "xplus" => ket([c(r, 0.0), c(r, 0.0)]),
        "xminus" => ket([c(r, 0.0), c(-r, 0.0)]),
        "yplus" => ket([c(r, 0.0), c(0.0, r)]),
        "yminus" => ket([c(r, 0.0), c(0.0, -r)]),
        _ => return None,
    })
}

fn state_value(s: &str) -> Result<DensityMatrix, CliError> {
    match named_state(s) {
        Some(rho) => Ok(rho),
        None => Ok(DensityMatrix::new(parse_matrix(s)?)?),
    }
}

const KEYS: [&str; 13] = [
    "name",
    "state",
    "a",
    "b",
    "model",
    "measure",
    "param",
    "sweep",
    "b_side",
    "apparatus_state",
    "interaction",
    "meter",
    "b_readout",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Input(format!("line {line_no}: expected 'key = value'"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Input(format!(
                    "line {line_no}: unknown key '{key}'"
                )));
            }
            if map
                .insert(key.clone(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(CliError::Input(format!(
                    "line {line_no}: duplicate key '{key}'"
                )));
            }
        }
        Ok(Entries { map })
    }

    fn optional(&self, key: &str) -> Option<&(usize, String)> {
        self.map.get(key)
    }

    fn required(&self, key: &str) -> Result<&(usize, String), CliError> {
        self.optional(key)
            .ok_or_else(|| CliError::Input(format!("missing required key '{key}'")))
    }

    /// Runs `f` on the value of `key`, prefixing errors with the line and key.
    fn with<T>(
        &self,
        key: &str,
        f: impl FnOnce(&str) -> Result<T, CliError>,
    ) -> Result<T, CliError> {
        let (line, value) = self.required(key)?;
        f(value).map_err(|e| e.context(format!("line {line}, '{key}'")))
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, CliError> {
    let e = Entries::parse(text)?;
    let name = e
        .optional("name")
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| "scenario".into());
    let state = e.with("state", state_value)?;
    let target_a = e.with("a", operator_value)?;
    let target_b = e.with("b", operator_value)?;
    let model = match e.with("model", |v| Ok(v.to_ascii_lowercase()))?.as_str() {
        "projective" => ModelSpec::Projective(e.with("measure", |v| {
            if v.eq_ignore_ascii_case("xphi") {
                Ok(OperatorSpec::XPhi)
            } else {
                operator_value(v).map(OperatorSpec::Fixed)
            }
        })?),
        "indirect" => ModelSpec::Indirect {
            apparatus_state: e.with("apparatus_state", state_value)?,
            interaction: e.with("interaction", parse_matrix)?,
            meter: e.with("meter", operator_value)?,
        },
        other => {
            return Err(CliError::Input(format!(
                "model must be 'projective' or 'indirect', got '{other}'"
            )))
        }
    };
    let b_side = match e.optional("b_side").map(|(_, v)| v.to_ascii_lowercase()) {
        None => BSide::IdealAfter,
        Some(v) if v == "ideal-after" => BSide::IdealAfter,
        Some(v) if v == "joint" => {
            if !matches!(model, ModelSpec::Indirect { .. }) {
                return Err(CliError::Input(
                    "b_side = joint needs an indirect model".into(),
                ));
            }
            BSide::Joint(e.with("b_readout", parse_matrix)?)
        }
        Some(v) => {
            return Err(CliError::Input(format!(
                "b_side must be 'ideal-after' or 'joint', got '{v}'"
            )))
        }
    };
    let param = match e.optional("param") {
        Some(_) => e.with("param", parse_real)?,
        None => 0.0,
    };
    let sweep = match e.optional("sweep") {
        Some(_) => Some(e.with("sweep", |v| v.parse::<Grid>())?),
        None => None,
    };
    let spec = ScenarioSpec {
        name,
        state,
        target_a,
        target_b,
        model,
        b_side,
        param,
        sweep,
    };
    // Building once at the first point surfaces dimension and commutation
    // errors at load time.
    spec.build(spec.points(None)[0])?;
    Ok(spec)
}

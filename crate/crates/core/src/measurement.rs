//! Measurement models on system ⊗ apparatus.
//!
//! A joint measurement is stored as a pair of commuting Hermitian operators
//! on the system-plus-apparatus together with the apparatus state; POVMs are
//! derived views obtained by apparatus-averaging spectral projectors.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{
    commutator, eigh, partial_trace, psd_sqrt, spectral_decompose, tensor, DensityMatrix, Operator,
    C64, ONE, ZERO,
};

/// Unitarity tolerance for interaction unitaries.
pub const UNITARY_TOL: f64 = 1e-10;
/// Commutator norm above which a pair of observables is not a joint measurement.
pub const COMMUTE_TOL: f64 = 1e-10;
/// Looser commutator bound used after evolving by a numerically computed unitary.
pub const EVOLVED_COMMUTE_TOL: f64 = 1e-8;
/// Residual below which a measurement counts as unbiased or projective.
pub const CONDITION_TOL: f64 = 1e-10;
/// Positivity and completeness tolerance for POVM effects.
pub const POVM_TOL: f64 = 1e-10;

/// Which half of a joint measurement: the readout approximating `A` or `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

/// Apparatus preparation, system–apparatus unitary, and projective meter.
#[derive(Clone, Debug)]
pub struct IndirectModel {
    system_dim: usize,
    apparatus_state: DensityMatrix,
    interaction: Operator,
    meter: Operator,
}

impl IndirectModel {
    pub fn new(
        system_dim: usize,
        apparatus_state: DensityMatrix,
        interaction: Operator,
        meter: Operator,
    ) -> Result<Self> {
        let da = apparatus_state.dim();
        if system_dim == 0 {
            return Err(Error::InvalidArgument(
                "system dimension must be >= 1".into(),
            ));
        }
        if interaction.dim() != system_dim * da {
            return Err(Error::dims(format!(
                "interaction has dim {}, expected {}·{}",
                interaction.dim(),
                system_dim,
                da
            )));
        }
        if meter.dim() != da {
            return Err(Error::dims(format!(
                "meter has dim {}, apparatus has dim {da}",
                meter.dim()
            )));
        }
        let r = interaction.unitarity_residual();
        if r > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!(
                "interaction is not unitary (max |U†U - 1| = {r:e})"
            )));
        }
        meter.require_hermitian(1e-12)?;
        Ok(IndirectModel {
            system_dim,
            apparatus_state,
            interaction,
            meter,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn apparatus_dim(&self) -> usize {
        self.apparatus_state.dim()
    }

    pub fn apparatus_state(&self) -> &DensityMatrix {
        &self.apparatus_state
    }

    pub fn interaction(&self) -> &Operator {
        &self.interaction
    }

    pub fn meter(&self) -> &Operator {
        &self.meter
    }

    /// Heisenberg-picture observable `U† o U` for `o` on system ⊗ apparatus.
    pub fn evolve(&self, o: &Operator) -> Operator {
        o.conjugate_by(&self.interaction).hermitian_part()
    }

    /// `U†(1 ⊗ M)U`.
    pub fn meter_observable(&self) -> Operator {
        self.evolve(&tensor(&Operator::identity(self.system_dim), &self.meter))
    }
}

/// Two commuting Hermitian observables on system ⊗ apparatus.
#[derive(Clone, Debug)]
pub struct JointObservables {
    system_dim: usize,
    a: Operator,
    b: Operator,
    apparatus_state: DensityMatrix,
}

impl JointObservables {
    pub fn new(
        system_dim: usize,
        apparatus_state: DensityMatrix,
        a: Operator,
        b: Operator,
    ) -> Result<Self> {
        Self::with_tolerance(system_dim, apparatus_state, a, b, COMMUTE_TOL)
    }

    fn with_tolerance(
        system_dim: usize,
        apparatus_state: DensityMatrix,
        a: Operator,
        b: Operator,
        tol: f64,
    ) -> Result<Self> {
        let n = system_dim * apparatus_state.dim();
        if system_dim == 0 || a.dim() != n || b.dim() != n {
            return Err(Error::dims(format!(
                "joint observables must act on {system_dim}·{} = {n} dims, got {} and {}",
                apparatus_state.dim(),
                a.dim(),
                b.dim()
            )));
        }
        a.require_hermitian(1e-10)?;
        b.require_hermitian(1e-10)?;
        let norm = commutator(&a, &b)?.max_abs();
        if norm > tol {
            return Err(Error::NotJointMeasurement(norm));
        }
        Ok(JointObservables {
            system_dim,
            a,
            b,
            apparatus_state,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn apparatus_dim(&self) -> usize {
        self.apparatus_state.dim()
    }

    pub fn apparatus_state(&self) -> &DensityMatrix {
        &self.apparatus_state
    }

    pub fn observable(&self, side: Side) -> &Operator {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    /// Apparatus-averaged system observable of one side.
    pub fn bar(&self, side: Side) -> Operator {
        bar_map(self.observable(side), &self.apparatus_state)
            .expect("dimensions validated at construction")
    }

    /// Apparatus average of the squared observable.
    pub fn bar_of_square(&self, side: Side) -> Operator {
        bar_map(&self.observable(side).square(), &self.apparatus_state)
            .expect("dimensions validated at construction")
    }

    pub fn commutator_norm(&self) -> f64 {
        commutator(&self.a, &self.b)
            .map(|c| c.max_abs())
            .unwrap_or(f64::INFINITY)
    }

    /// `rho ⊗ rho_a`.
    pub fn joint_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.system_dim {
            return Err(Error::dims(format!(
                "state dim {} vs system dim {}",
                rho.dim(),
                self.system_dim
            )));
        }
        Ok(rho.tensor(&self.apparatus_state))
    }
}

/// `Ō = tr_a[O (1 ⊗ rho_a)]`.
pub fn bar_map(o: &Operator, rho_a: &DensityMatrix) -> Result<Operator> {
    let da = rho_a.dim();
    if !o.dim().is_multiple_of(da) {
        return Err(Error::dims(format!(
            "operator dim {} is not a multiple of apparatus dim {da}",
            o.dim()
        )));
    }
    let ds = o.dim() / da;
    let weighted = o * &tensor(&Operator::identity(ds), rho_a.as_operator());
    partial_trace(&weighted, &[ds, da], &[0])
}

/// Real-labelled positive effects summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    outcomes: Vec<f64>,
    effects: Vec<Operator>,
}

impl Povm {
    pub fn new(outcomes: Vec<f64>, effects: Vec<Operator>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != effects.len() {
            return Err(Error::InvalidPovm(format!(
                "{} labels for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        let d = effects[0].dim();
        let mut sum = Operator::zeros(d);
        for (k, e) in effects.iter().enumerate() {
            if e.dim() != d {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has dim {}",
                    e.dim()
                )));
            }
            let h = e.hermiticity_residual();
            if h > POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} not Hermitian (residual {h:e})"
                )));
            }
            let min = e.min_eigenvalue();
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has negative eigenvalue {min:e}"
                )));
            }
            sum = &sum + e;
        }
        let r = sum.max_abs_diff(&Operator::identity(d));
        if r > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {r:e}"
            )));
        }
        Ok(Povm { outcomes, effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    /// `Σ α^k E_α`.
    pub fn moment(&self, k: i32) -> Operator {
        self.outcomes
            .iter()
            .zip(&self.effects)
            .fold(Operator::zeros(self.dim()), |acc, (a, e)| {
                &acc + &e.scale(a.powi(k))
            })
    }

    /// Largest entry difference between matching effects; infinite when the
    /// label sets differ by more than `label_tol`.
    pub fn max_abs_diff(&self, other: &Povm, label_tol: f64) -> f64 {
        if self.len() != other.len()
            || self
                .outcomes
                .iter()
                .zip(&other.outcomes)
                .any(|(a, b)| (a - b).abs() > label_tol)
        {
            return f64::INFINITY;
        }
        self.effects
            .iter()
            .zip(&other.effects)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

/// POVM of one side: apparatus-averaged spectral projectors of its observable.
pub fn povm_from_joint(j: &JointObservables, side: Side, degeneracy_tol: f64) -> Result<Povm> {
    let sd = spectral_decompose(j.observable(side), degeneracy_tol)?;
    let effects = sd
        .projectors
        .iter()
        .map(|p| bar_map(p, j.apparatus_state()).map(|e| e.hermitian_part()))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(sd.eigenvalues, effects)
}

/// Effects `M_{αβ}` of the joint readout, labelled by outcome pairs.
#[derive(Clone, Debug)]
pub struct JointPovm {
    pub outcomes: Vec<(f64, f64)>,
    pub effects: Vec<Operator>,
}

/// Joint POVM from products of commuting spectral projectors of both sides.
/// Pairs whose projector product vanishes are dropped.
pub fn joint_povm(j: &JointObservables, degeneracy_tol: f64) -> Result<JointPovm> {
    let sa = spectral_decompose(j.observable(Side::A), degeneracy_tol)?;
    let sb = spectral_decompose(j.observable(Side::B), degeneracy_tol)?;
    let mut outcomes = Vec::new();
    let mut effects = Vec::new();
    for (alpha, p) in sa.iter() {
        for (beta, q) in sb.iter() {
            let pq = (p * q).hermitian_part();
            if pq.trace().re < 0.5 {
                continue;
            }
            outcomes.push((alpha, beta));
            effects.push(bar_map(&pq, j.apparatus_state())?.hermitian_part());
        }
    }
    let d = j.system_dim();
    let sum = effects.iter().fold(Operator::zeros(d), |acc, e| &acc + e);
    let r = sum.max_abs_diff(&Operator::identity(d));
    if r > POVM_TOL {
        return Err(Error::numerical("joint POVM completeness", r));
    }
    Ok(JointPovm { outcomes, effects })
}

/// POVM of the meter readout built from Kraus operators
/// `√p_k (1⊗⟨l|)(1⊗Π_m) U (1⊗|k⟩)`, without going through the partial trace.
pub fn kraus_povm(model: &IndirectModel, degeneracy_tol: f64) -> Result<Povm> {
    let ds = model.system_dim();
    let da = model.apparatus_dim();
    let (weights, kets) = eigh(model.apparatus_state().as_operator());
    let meter = spectral_decompose(model.meter(), degeneracy_tol)?;
    let u = model.interaction().matrix();

    let embed = |ket: &DVector<C64>| -> DMatrix<C64> {
        // 1 ⊗ |ket⟩ as a (ds·da) × ds matrix.
        DMatrix::from_fn(
            ds * da,
            ds,
            |r, c| {
                if r / da == c {
                    ket[r % da]
                } else {
                    ZERO
                }
            },
        )
    };

    let mut effects = Vec::with_capacity(meter.len());
    for (_, pi) in meter.iter() {
        let gate = tensor(&Operator::identity(ds), pi);
        let mut effect = DMatrix::zeros(ds, ds);
        for (p, k) in weights.iter().zip(&kets) {
            if *p <= 0.0 {
                continue;
            }
            let after = gate.matrix() * u * embed(k);
            for l in 0..da {
                let mut e_l = DVector::zeros(da);
                e_l[l] = ONE;
                let kraus = embed(&e_l).adjoint() * &after * C64::new(p.sqrt(), 0.0);
                effect += kraus.adjoint() * kraus;
            }
        }
        effects.push(Operator::from_matrix(effect)?.hermitian_part());
    }
    Povm::new(meter.eigenvalues, effects)
}

/// `𝒜 = U†(1⊗M)U`, `ℬ = U†(B⊗1)U`: the measurement of `A` followed by an
/// ideal measurement of `B`, recast as one joint measurement.
pub fn joint_from_indirect(model: &IndirectModel, target_b: &Operator) -> Result<JointObservables> {
    target_b.require_hermitian(1e-12)?;
    if target_b.dim() != model.system_dim() {
        return Err(Error::dims(format!(
            "B has dim {}, system has dim {}",
            target_b.dim(),
            model.system_dim()
        )));
    }
    let readout = tensor(target_b, &Operator::identity(model.apparatus_dim()));
    joint_from_indirect_readout(model, &readout)
}

/// Joint measurement with `ℬ = U† R U` for a readout `R` on system ⊗ apparatus
/// that must commute with `1⊗M`.
pub fn joint_from_indirect_readout(
    model: &IndirectModel,
    b_readout: &Operator,
) -> Result<JointObservables> {
    let n = model.system_dim() * model.apparatus_dim();
    if b_readout.dim() != n {
        return Err(Error::dims(format!(
            "readout has dim {}, expected {n}",
            b_readout.dim()
        )));
    }
    b_readout.require_hermitian(1e-10)?;
    let a = model.meter_observable();
    let b = model.evolve(b_readout);
    JointObservables::with_tolerance(
        model.system_dim(),
        model.apparatus_state().clone(),
        a,
        b,
        EVOLVED_COMMUTE_TOL,
    )
}

/// Projective measurement of `a` with a trivial one-dimensional apparatus.
/// Both sides read the same spectral measurement.
pub fn projective_model(a: &Operator) -> Result<JointObservables> {
    a.require_hermitian(1e-12)?;
    JointObservables::new(a.dim(), DensityMatrix::basis(1, 0), a.clone(), a.clone())
}

/// Von Neumann dilation of the projective measurement of `a`: the apparatus
/// register `|0⟩` is shifted to `|k⟩` on the k-th eigenspace and the meter
/// reads the k-th eigenvalue.
pub fn projective_dilation(a: &Operator, degeneracy_tol: f64) -> Result<IndirectModel> {
    let sd = spectral_decompose(a, degeneracy_tol)?;
    let k = sd.len();
    let ds = a.dim();
    let shift = |power: usize| {
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            m[((i + power) % k, i)] = ONE;
        }
        Operator::from_matrix_unchecked(m)
    };
    let u = sd
        .projectors
        .iter()
        .enumerate()
        .fold(Operator::zeros(ds * k), |acc, (j, p)| {
            &acc + &tensor(p, &shift(j))
        });
    IndirectModel::new(
        ds,
        DensityMatrix::basis(k, 0),
        u,
        Operator::diagonal(&sd.eigenvalues),
    )
}

/// Projective `X_φ` measurement on a qubit read out by a qubit apparatus:
/// `U = P₊⊗1 + P₋⊗X`, apparatus in `|0⟩`, meter `Z`.
pub fn vienna_model(phi: f64) -> IndirectModel {
    let id = Operator::identity(2);
    let xp = Operator::x_phi(phi);
    let plus = (&id + &xp).scale(0.5);
    let minus = (&id - &xp).scale(0.5);
    let u = &tensor(&plus, &id) + &tensor(&minus, &Operator::pauli_x());
    IndirectModel::new(2, DensityMatrix::basis(2, 0), u, Operator::pauli_z())
        .expect("controlled flip is unitary")
}

/// Neumark dilation of a POVM: the isometry `|ψ⟩ ↦ Σ √E_α|ψ⟩⊗|α⟩`
/// completed to a unitary, apparatus in `|0⟩`, meter `diag(α)`.
pub fn naimark_dilation(povm: &Povm) -> Result<IndirectModel> {
    let ds = povm.dim();
    let n = povm.len();
    let roots: Vec<Operator> = povm.effects().iter().map(psd_sqrt).collect();

    let mut columns: Vec<Option<DVector<C64>>> = vec![None; ds * n];
    for j in 0..ds {
        let v = DVector::from_fn(ds * n, |r, _| roots[r % n].get(r / n, j));
        columns[j * n] = Some(v);
    }
    let mut basis: Vec<DVector<C64>> = columns.iter().flatten().cloned().collect();
    let mut candidate = 0;
    for slot in columns.iter_mut().filter(|c| c.is_none()) {
        loop {
            let mut v = DVector::zeros(ds * n);
            v[candidate] = ONE;
            candidate += 1;
            for _ in 0..2 {
                for b in &basis {
                    let overlap = b.dotc(&v);
                    v -= b * overlap;
                }
            }
            let norm = v.norm();
            if norm > 1e-6 {
                let v = v.unscale(norm);
                basis.push(v.clone());
                *slot = Some(v);
                break;
            }
        }
    }
    let cols: Vec<DVector<C64>> = columns.into_iter().flatten().collect();
    let u = DMatrix::from_columns(&cols);
    IndirectModel::new(
        ds,
        DensityMatrix::basis(n, 0),
        Operator::from_matrix(u)?,
        Operator::diagonal(povm.outcomes()),
    )
}

/// Whether `bar(side) = target` within [`CONDITION_TOL`], with the residual.
pub fn is_unbiased(j: &JointObservables, target: &Operator, side: Side) -> (bool, f64) {
    let r = j.bar(side).max_abs_diff(target);
    (r < CONDITION_TOL, r)
}

/// `max|bar(O²) - bar(O)²|`; zero iff the side is a projective measurement.
pub fn projectivity_residual(j: &JointObservables, side: Side) -> f64 {
    let bar = j.bar(side);
    j.bar_of_square(side).max_abs_diff(&bar.square())
}

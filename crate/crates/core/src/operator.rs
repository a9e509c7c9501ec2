//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Tensor products use lexicographic basis ordering with the first factor
//! most significant, so `|i⟩⊗|j⟩` is basis vector `i * d2 + j`. All
//! tolerances are max-absolute-entry norms.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance for operators entering the library.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may have.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are merged into one spectral projector.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Largest imaginary part tolerated in the expectation of a Hermitian operator.
pub const IMAG_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A square complex matrix acting on a `dim`-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::dims(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "operator dimension must be >= 1".into(),
            ));
        }
        Ok(Operator { mat })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::dims(format!(
                "row {i} has {} entries, expected {d}",
                r.len()
            )));
        }
        Self::from_matrix(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub(crate) fn from_matrix_unchecked(mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Operator { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Operator {
            mat: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    pub fn pauli_x() -> Self {
        Self::from_matrix_unchecked(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
    }

    pub fn pauli_y() -> Self {
        Self::from_matrix_unchecked(DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]))
    }

    pub fn pauli_z() -> Self {
        Self::from_matrix_unchecked(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]))
    }

    /// `cos(phi) X + sin(phi) Y`.
    pub fn x_phi(phi: f64) -> Self {
        &Self::pauli_x().scale(phi.cos()) + &Self::pauli_y().scale(phi.sin())
    }

    /// Outer product `|v⟩⟨v|` (no normalization).
    pub fn projector(ket: &DVector<C64>) -> Self {
        Self::from_matrix_unchecked(ket * ket.adjoint())
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = ONE;
        Self::from_matrix_unchecked(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix_unchecked(self.mat.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_matrix_unchecked(&self.mat * C64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self::from_matrix_unchecked(&self.mat * s)
    }

    pub fn square(&self) -> Self {
        Self::from_matrix_unchecked(&self.mat * &self.mat)
    }

    /// `U† self U`.
    pub fn conjugate_by(&self, u: &Operator) -> Self {
        Self::from_matrix_unchecked(u.mat.adjoint() * &self.mat * &u.mat)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest absolute entry of `self - other`; infinite when dimensions differ.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                r = r.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub(crate) fn require_hermitian(&self, tol: f64) -> Result<()> {
        let r = self.hermiticity_residual();
        if r > tol {
            Err(Error::NotHermitian(r))
        } else {
            Ok(())
        }
    }

    /// `(O + O†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_matrix_unchecked((&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn unitarity_residual(&self) -> f64 {
        let p = Self::from_matrix_unchecked(self.mat.adjoint() * &self.mat);
        p.max_abs_diff(&Operator::identity(self.dim()))
    }

    /// Sorted eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(self).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|&&l| l.abs() > tol)
            .count()
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(&self.mat + &rhs.mat)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(&self.mat - &rhs.mat)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::from_matrix_unchecked(&self.mat * &rhs.mat)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator::from_matrix_unchecked(-&self.mat)
    }
}

/// A positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |rho - rho†| = {herm:e})"
            )));
        }
        let tr = op.trace();
        let residual = (tr - ONE).norm();
        if residual > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace residual |tr(rho) - 1| = {residual:e}"
            )));
        }
        let min = op.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min:e} is negative"
            )));
        }
        Ok(DensityMatrix { op })
    }

    pub(crate) fn new_unchecked(op: Operator) -> Self {
        DensityMatrix { op }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `ket`.
    pub fn pure(ket: &DVector<C64>) -> Result<Self> {
        let n = ket.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        let v = ket.unscale(n);
        Ok(DensityMatrix {
            op: Operator::projector(&v).hermitian_part(),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        DensityMatrix {
            op: Operator::unit(dim, k, k),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            op: Operator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            op: tensor(&self.op, &other.op),
        }
    }

    pub fn purity(&self) -> f64 {
        (&self.op * &self.op).trace().re
    }
}

/// Kronecker product, first factor most significant.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator::from_matrix_unchecked(a.mat.kronecker(&b.mat))
}

/// Kronecker product of several factors, left to right.
pub fn tensor_all(factors: &[&Operator]) -> Operator {
    let mut it = factors.iter();
    let first = it
        .next()
        .map(|o| (*o).clone())
        .unwrap_or_else(|| Operator::identity(1));
    it.fold(first, |acc, o| tensor(&acc, o))
}

/// Traces out every factor not listed in `keep`.
///
/// `dims` gives the factor dimensions (first most significant); `keep` holds
/// zero-based factor indices in strictly increasing order. The result acts on
/// the kept factors in their original order.
pub fn partial_trace(o: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != o.dim() {
        return Err(Error::dims(format!(
            "factor dims {dims:?} do not multiply to operator dimension {}",
            o.dim()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "keep set {keep:?} must be strictly increasing factor indices below {}",
            dims.len()
        )));
    }

    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();

    // Offsets contributed by a mixed-radix index over a subset of factors.
    let offsets = |factors: &[usize]| -> Vec<usize> {
        let n: usize = factors.iter().map(|&f| dims[f]).product();
        (0..n)
            .map(|mut idx| {
                let mut off = 0;
                for &f in factors.iter().rev() {
                    off += (idx % dims[f]) * strides[f];
                    idx /= dims[f];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(keep);
    let traced_off = offsets(&traced);

    let kd = kept_off.len();
    let m = DMatrix::from_fn(kd, kd, |i, j| {
        traced_off
            .iter()
            .map(|&t| o.mat[(kept_off[i] + t, kept_off[j] + t)])
            .sum()
    });
    Ok(Operator::from_matrix_unchecked(m))
}

/// `tr(o rho)` for Hermitian `o`.
pub fn expectation(o: &Operator, rho: &DensityMatrix) -> Result<f64> {
    if o.dim() != rho.dim() {
        return Err(Error::dims(format!(
            "operator dim {} vs state dim {}",
            o.dim(),
            rho.dim()
        )));
    }
    let z = trace_product(o, rho.as_operator());
    if z.im.abs() > IMAG_TOL {
        return Err(Error::numerical(
            "expectation of Hermitian operator has imaginary part",
            z.im.abs(),
        ));
    }
    Ok(z.re)
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &Operator, b: &Operator) -> C64 {
    let d = a.dim();
    let mut s = ZERO;
    for i in 0..d {
        for k in 0..d {
            s += a.mat[(i, k)] * b.mat[(k, i)];
        }
    }
    s
}

fn require_same_dim(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dims(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    require_same_dim(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// `ab + ba`.
pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    require_same_dim(a, b)?;
    Ok(&(a * b) + &(b * a))
}

/// Sorted eigenvalues and matching orthonormal eigenvectors of the Hermitian part.
pub(crate) fn eigh(o: &Operator) -> (Vec<f64>, Vec<DVector<C64>>) {
    let h = o.hermitian_part();
    let eig = h.mat.symmetric_eigen();
    let mut order: Vec<usize> = (0..o.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect();
    (values, vectors)
}

/// Principal square root of a positive semidefinite operator; tiny negative
/// eigenvalues are clipped to zero.
pub fn psd_sqrt(o: &Operator) -> Operator {
    let (values, vectors) = eigh(o);
    let d = o.dim();
    let mut m = DMatrix::zeros(d, d);
    for (l, v) in values.iter().zip(&vectors) {
        m += v * v.adjoint() * C64::new(l.max(0.0).sqrt(), 0.0);
    }
    Operator::from_matrix_unchecked(m)
}

/// Distinct eigenvalues with their spectral projectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Operator>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Σ λ Π`.
    pub fn reconstruct(&self) -> Operator {
        let d = self.projectors[0].dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(Operator::zeros(d), |acc, (l, p)| &acc + &p.scale(*l))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Operator)> {
        self.eigenvalues.iter().copied().zip(self.projectors.iter())
    }
}

/// Spectral decomposition with near-degenerate eigenvalues merged.
///
/// Sorted eigenvalues whose successive gaps are at most `degeneracy_tol` form
/// one cluster; the cluster's label is `tr(OΠ)/tr(Π)` for its summed projector.
pub fn spectral_decompose(o: &Operator, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    o.require_hermitian(1e-10)?;
    let (values, vectors) = eigh(o);
    let d = o.dim();

    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[end - 1] <= degeneracy_tol {
            end += 1;
        }
        let mut p = DMatrix::zeros(d, d);
        for v in &vectors[start..end] {
            p += v * v.adjoint();
        }
        let label = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        eigenvalues.push(label);
        projectors.push(Operator::from_matrix_unchecked(p).hermitian_part());
        start = end;
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
    })
}

/// Swap operator on `C^d ⊗ C^d`: `S(u⊗v) = v⊗u`.
pub fn swap_operator(d: usize) -> Operator {
    let n = d * d;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = ONE;
        }
    }
    Operator::from_matrix_unchecked(m)
}

/// Deterministic generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_hermitian(d: usize, seed: u64) -> Operator {
    random_hermitian_with(d, &mut seeded_rng(seed))
}

pub fn random_hermitian_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    Operator::from_matrix_unchecked(ginibre(d, d, rng)).hermitian_part()
}

pub fn random_density(d: usize, seed: u64) -> DensityMatrix {
    random_density_with(d, &mut seeded_rng(seed))
}

/// Full-rank Hilbert–Schmidt random state.
pub fn random_density_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    random_density_of_rank(d, d, rng)
}

/// `G G† / tr(G G†)` with `G` a `d × rank` Ginibre matrix.
pub fn random_density_of_rank<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> DensityMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = Operator::from_matrix_unchecked(m * C64::new(1.0 / tr, 0.0)).hermitian_part();
    DensityMatrix::new_unchecked(op)
}

pub fn random_unitary(d: usize, seed: u64) -> Operator {
    random_unitary_with(d, &mut seeded_rng(seed))
}

/// Haar-distributed unitary from the phase-corrected QR of a Ginibre matrix.
pub fn random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = qr.unpack();
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                ONE
            }
        } else {
            ZERO
        }
    });
    Operator::from_matrix_unchecked(q * phases)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn tensor_identity_and_diagonal() {
        let i2 = Operator::identity(2);
        assert_eq!(tensor(&i2, &i2), Operator::identity(4));
        let zi = tensor(&Operator::pauli_z(), &i2);
        assert_eq!(zi, Operator::diagonal(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn tensor_xx_maps_00_to_11() {
        let xx = tensor(&Operator::pauli_x(), &Operator::pauli_x());
        // Hand-expanded: X⊗X is the anti-diagonal of ones.
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i + j == 3 { c(1.0) } else { ZERO };
                assert_eq!(xx.get(i, j), expected);
            }
        }
        let e00 = DVector::from_vec(vec![ONE, ZERO, ZERO, ZERO]);
        let out = xx.matrix() * e00;
        assert_eq!(out[3], ONE);
    }

    #[test]
    fn partial_trace_of_identity() {
        let r = partial_trace(&Operator::identity(4), &[2, 2], &[1]).unwrap();
        assert_eq!(r, Operator::identity(2).scale(2.0));
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = random_density(3, 1);
        let sigma = random_hermitian(2, 2);
        let prod = tensor(rho.as_operator(), &sigma);
        let kept = partial_trace(&prod, &[3, 2], &[0]).unwrap();
        let expected = rho.as_operator().scale_c(sigma.trace());
        assert!(kept.max_abs_diff(&expected) < 1e-12);
        let other = partial_trace(&prod, &[3, 2], &[1]).unwrap();
        assert!(other.max_abs_diff(&sigma) < 1e-12);
    }

    #[test]
    fn partial_trace_middle_factor() {
        let a = random_hermitian(2, 3);
        let b = random_hermitian(3, 4);
        let cc = random_hermitian(2, 5);
        let abc = tensor_all(&[&a, &b, &cc]);
        let ac = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        let expected = tensor(&a, &cc).scale_c(b.trace());
        assert!(ac.max_abs_diff(&expected) < 1e-12);
        let full = partial_trace(&abc, &[2, 3, 2], &[0, 1, 2]).unwrap();
        assert_eq!(full, abc);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let o = Operator::identity(4);
        assert!(matches!(
            partial_trace(&o, &[2, 3], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_trace(&o, &[2, 2], &[1, 0]).is_err());
        assert!(partial_trace(&o, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn pauli_expectations() {
        let up = DensityMatrix::basis(2, 0);
        assert_eq!(expectation(&Operator::pauli_z(), &up).unwrap(), 1.0);
        assert_eq!(expectation(&Operator::pauli_x(), &up).unwrap(), 0.0);
        for k in 0..16 {
            let phi = k as f64 * 0.4;
            let v = expectation(&Operator::x_phi(phi), &up).unwrap();
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let o = Operator::unit(2, 0, 1).scale_c(I);
        let rho = DensityMatrix::new(
            Operator::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
        )
        .unwrap();
        assert!(expectation(&o, &rho).unwrap_err().is_numerical());
        let big = Operator::identity(3);
        assert!(matches!(
            expectation(&big, &rho),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pauli_commutators() {
        let (x, y, z) = (
            Operator::pauli_x(),
            Operator::pauli_y(),
            Operator::pauli_z(),
        );
        let xy = commutator(&x, &y).unwrap();
        assert!(xy.max_abs_diff(&z.scale_c(C64::new(0.0, 2.0))) < 1e-15);
        let h = random_hermitian(3, 9);
        assert_eq!(commutator(&h, &h).unwrap().max_abs(), 0.0);
        for k in 0..10 {
            let phi = 0.3 * k as f64;
            let ac = anticommutator(&Operator::x_phi(phi), &x).unwrap();
            let expected = Operator::identity(2).scale(2.0 * phi.cos());
            assert!(ac.max_abs_diff(&expected) < 1e-15);
        }
        assert!(commutator(&x, &Operator::identity(3)).is_err());
    }

    #[test]
    fn spectral_of_paulis() {
        let sd = spectral_decompose(&Operator::pauli_z(), DEGENERACY_TOL).unwrap();
        assert_eq!(sd.eigenvalues.len(), 2);
        assert!((sd.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!(sd.projectors[0].max_abs_diff(&Operator::unit(2, 1, 1)) < 1e-15);
        assert!(sd.projectors[1].max_abs_diff(&Operator::unit(2, 0, 0)) < 1e-15);

        let sd = spectral_decompose(&Operator::identity(4), DEGENERACY_TOL).unwrap();
        assert_eq!(sd.eigenvalues, vec![1.0]);
        assert!(sd.projectors[0].max_abs_diff(&Operator::identity(4)) < 1e-14);

        let phi = 0.7;
        let xp = Operator::x_phi(phi);
        let sd = spectral_decompose(&xp, DEGENERACY_TOL).unwrap();
        let id = Operator::identity(2);
        let minus = (&id - &xp).scale(0.5);
        let plus = (&id + &xp).scale(0.5);
        assert!((sd.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((sd.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(sd.projectors[0].max_abs_diff(&minus) < 1e-14);
        assert!(sd.projectors[1].max_abs_diff(&plus) < 1e-14);
        for p in &sd.projectors {
            assert!(p.square().max_abs_diff(p) < 1e-14);
        }
        assert!(sd.reconstruct().max_abs_diff(&xp) < 1e-14);
    }

    #[test]
    fn spectral_rejects_non_hermitian() {
        let o = Operator::unit(2, 0, 1);
        assert!(matches!(
            spectral_decompose(&o, DEGENERACY_TOL),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn spectral_merges_near_degenerate() {
        let o = Operator::diagonal(&[0.0, 1.0, 1.0 + 1e-11, 2.0]);
        let sd = spectral_decompose(&o, DEGENERACY_TOL).unwrap();
        assert_eq!(sd.len(), 3);
        assert!((sd.eigenvalues[1] - (1.0 + 0.5e-11)).abs() < 1e-15);
        assert!((sd.projectors[1].trace().re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn swap_basics() {
        assert_eq!(swap_operator(1), Operator::identity(1));
        let s = swap_operator(3);
        assert_eq!(s.square(), Operator::identity(9));

        let p_as = (&Operator::identity(4) - &swap_operator(2)).scale(0.5);
        assert_eq!(p_as.rank(1e-12), 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = DVector::from_vec(vec![ZERO, c(r), c(-r), ZERO]);
        assert!(p_as.max_abs_diff(&Operator::projector(&singlet)) < 1e-15);

        let (x, y) = (Operator::pauli_x(), Operator::pauli_y());
        let v = trace_product(&tensor(&x, &y), &swap_operator(2));
        assert_eq!(v, trace_product(&x, &y));
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn swap_exchanges_factors() {
        let u = DVector::from_vec(vec![c(1.0), C64::new(0.0, 2.0), c(-1.0)]);
        let v = DVector::from_vec(vec![c(0.5), c(3.0), C64::new(1.0, 1.0)]);
        let s = swap_operator(3);
        let uv = u.kronecker(&v);
        let vu = v.kronecker(&u);
        assert!((s.matrix() * uv - vu).norm() < 1e-15);
    }

    #[test]
    fn random_generators_satisfy_invariants() {
        for d in 1..=6 {
            for seed in 0..5 {
                let rho = random_density(d, seed);
                assert!((rho.as_operator().trace() - ONE).norm() < 1e-12);
                assert!(DensityMatrix::new(rho.as_operator().clone()).is_ok());
                let u = random_unitary(d, seed);
                assert!(u.unitarity_residual() < 1e-12);
                assert!(random_hermitian(d, seed).is_hermitian(0.0));
            }
        }
        assert_eq!(random_unitary(4, 11), random_unitary(4, 11));
        assert_eq!(random_density(4, 11), random_density(4, 11));
        assert_eq!(random_hermitian(4, 11), random_hermitian(4, 11));
        assert_ne!(random_hermitian(4, 11), random_hermitian(4, 12));
    }

    #[test]
    fn density_validation_errors() {
        let bad_trace = Operator::diagonal(&[0.5, 0.6]);
        let err = DensityMatrix::new(bad_trace).unwrap_err();
        assert!(err.to_string().contains("trace residual"));
        let negative = Operator::diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = Operator::from_real_rows(&[vec![0.5, 0.1], vec![0.0, 0.5]]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let rho = random_density(4, 3);
        let s = psd_sqrt(rho.as_operator());
        assert!(s.square().max_abs_diff(rho.as_operator()) < 1e-12);
    }

    #[test]
    fn from_rows_checks_shape() {
        assert!(Operator::from_rows(&[vec![ONE, ZERO], vec![ONE]]).is_err());
        assert!(Operator::from_rows(&[]).is_err());
    }
}

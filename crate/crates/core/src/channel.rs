//! Quantum operations and their Choi states.
//!
//! The Choi state of `Phi` is `C = (I kron Phi)|phi><phi|` with the
//! normalized maximally entangled `|phi> = d^{-1/2} sum_i |ii>`, so `C` has
//! unit trace. Because of that normalization the inverse action carries a
//! factor `d`: `Phi(rho) = d tr_I[(rho^T kron I) C]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eig_hermitian, kron, partial_trace_in, partial_trace_out, ComplexMatrix, C64, ZERO};
use crate::tol;

/// `|phi> = d^{-1/2} sum_i |ii>` as a column of length `d^2`.
pub fn maximally_entangled(d: usize) -> ComplexMatrix {
    let mut v = ComplexMatrix::zeros(d * d, 1);
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[(i * d + i, 0)] = amp;
    }
    v
}

/// Unit-trace positive semidefinite matrix on the `d^2`-dimensional
/// input-output space.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiState {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if dim == 0 || matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for d={dim} must be {n}x{n}, got {}x{}",
                matrix.rows(),
                matrix.cols(),
                n = dim * dim
            )));
        }
        let tol = tol::admission();
        let herm = matrix.hermiticity_residual();
        if herm > tol {
            return Err(Error::InvalidChoi(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidChoi(format!("trace {} differs from 1", tr.re)));
        }
        let min = eig_hermitian(&matrix)?.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidChoi(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { dim, matrix })
    }

    /// Pure Choi state `|psi><psi|` from a normalized column of length `d^2`.
    pub fn pure(dim: usize, psi: &ComplexMatrix) -> Result<Self> {
        Self::new(dim, ComplexMatrix::outer(psi, psi))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn is_cptp(&self) -> bool {
        is_cptp(self).cptp
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        eig_hermitian(&self.matrix).map(|e| e.eigenvalues[0]).unwrap_or(f64::NAN)
    }

    pub fn is_pure(&self) -> bool {
        self.largest_eigenvalue() >= 1.0 - tol::admission()
    }

    /// `p C_a + (1 - p) C_b`-style mixture with arbitrary weights.
    pub fn mixture(weights: &[f64], states: &[&ChoiState]) -> Result<Self> {
        check_weights(weights, states.len(), tol::admission())?;
        let d = states[0].dim;
        if states.iter().any(|s| s.dim != d) {
            return Err(Error::DimensionMismatch("mixture members differ in dimension".into()));
        }
        let mut acc = ComplexMatrix::zeros(d * d, d * d);
        for (w, s) in weights.iter().zip(states) {
            acc = &acc + &s.matrix.scale_real(*w);
        }
        Self::new(d, acc)
    }
}

pub(crate) fn check_weights(weights: &[f64], count: usize, tol: f64) -> Result<()> {
    if weights.is_empty() || weights.len() != count {
        return Err(Error::WeightError(format!("{} weights for {count} members", weights.len())));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::WeightError("weights must be nonnegative".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::WeightError(format!("weights sum to {sum}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Unitary(ComplexMatrix),
    Kraus(Vec<ComplexMatrix>),
    Choi(ChoiState),
}

/// An operation on a `d`-dimensional system in one of three interchangeable
/// forms.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumOperation {
    dim: usize,
    repr: Representation,
}

impl QuantumOperation {
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let dim = u.require_square()?;
        let residual = u.unitarity_residual();
        if residual > tol::admission() {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { dim, repr: Representation::Unitary(u) })
    }

    /// Kraus sets are admitted whenever their Choi matrix has unit trace,
    /// i.e. `tr(sum K^dag K) = d`. Trace preservation is reported separately.
    pub fn kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidKraus("empty Kraus set".into()))?;
        let dim = first.require_square()?;
        if ops.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::InvalidKraus("Kraus operators differ in shape".into()));
        }
        let gram = kraus_gram(&ops);
        let tr = gram.trace().re / dim as f64;
        if (tr - 1.0).abs() > tol::admission() {
            return Err(Error::InvalidKraus(format!(
                "tr(sum K^dag K)/d = {tr}, so the Choi matrix would not have unit trace"
            )));
        }
        Ok(Self { dim, repr: Representation::Kraus(ops) })
    }

    pub fn from_choi(choi: ChoiState) -> Self {
        Self { dim: choi.dim, repr: Representation::Choi(choi) }
    }

    pub fn identity(d: usize) -> Self {
        Self { dim: d, repr: Representation::Unitary(ComplexMatrix::identity(d)) }
    }

    /// Completely dephasing channel with Kraus operators `|k><k|`.
    pub fn dephasing(d: usize) -> Self {
        let ops = (0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect();
        Self { dim: d, repr: Representation::Kraus(ops) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn kind(&self) -> &'static str {
        match self.repr {
            Representation::Unitary(_) => "unitary",
            Representation::Kraus(_) => "kraus",
            Representation::Choi(_) => "choi",
        }
    }

    /// Kraus operators; for a Choi representation these come from its
    /// eigendecomposition.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        match &self.repr {
            Representation::Unitary(u) => vec![u.clone()],
            Representation::Kraus(ks) => ks.clone(),
            Representation::Choi(c) => kraus_from_choi(c),
        }
    }

    pub fn choi(&self) -> ChoiState {
        choi_from_operation(self)
    }

    /// `sum_n K_n^dag K_n`.
    pub fn completeness(&self) -> ComplexMatrix {
        kraus_gram(&self.kraus_operators())
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness().max_diff(&ComplexMatrix::identity(self.dim)) <= tol::admission()
    }

    /// Direct action `sum_n K_n X K_n^dag` on an arbitrary `d x d` matrix.
    pub fn apply_direct(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!("operation has d={}, input is {}x{}", self.dim, x.rows(), x.cols())));
        }
        Ok(match &self.repr {
            Representation::Choi(c) => apply_linear_via_choi(c, x),
            _ => {
                let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
                for k in self.kraus_operators() {
                    acc = &acc + &(&(&k * x) * &k.adjoint());
                }
                acc
            }
        })
    }
}

fn kraus_gram(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let d = ops[0].cols();
    ops.iter().fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &(&k.adjoint() * k))
}

/// `C = (I kron Phi)|phi><phi| = sum_n (I kron K_n)|phi><phi|(I kron K_n)^dag`.
pub fn choi_from_operation(op: &QuantumOperation) -> ChoiState {
    let d = op.dim;
    if let Representation::Choi(c) = &op.repr {
        return c.clone();
    }
    let phi = maximally_entangled(d);
    let mut acc = ComplexMatrix::zeros(d * d, d * d);
    for k in op.kraus_operators() {
        let psi = &kron(&ComplexMatrix::identity(d), &k) * &phi;
        acc = &acc + &ComplexMatrix::outer(&psi, &psi);
    }
    ChoiState { dim: d, matrix: acc.hermitian_part() }
}

/// Kraus operators `K_n = sqrt(d lambda_n) unvec(e_n)` with
/// `K_n[alpha][i] = sqrt(d lambda_n) e_n[i d + alpha]`.
pub fn kraus_from_choi(choi: &ChoiState) -> Vec<ComplexMatrix> {
    let d = choi.dim;
    let eig = eig_hermitian(&choi.matrix).expect("ChoiState is Hermitian");
    let cutoff = tol::ALGEBRA;
    let mut ops: Vec<ComplexMatrix> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &lam)| lam > cutoff)
        .map(|(n, &lam)| {
            let w = (d as f64 * lam).sqrt();
            ComplexMatrix::from_fn(d, d, |al, i| eig.eigenvectors[(i * d + al, n)] * w)
        })
        .collect();
    if ops.is_empty() {
        ops.push(ComplexMatrix::zeros(d, d));
    }
    ops
}

/// Unitary `U` with `C = (I kron U)|phi><phi|`, when the Choi state is pure
/// and maximally entangled. The global phase is fixed so the first entry of
/// largest modulus is real and positive.
pub fn unitary_from_choi(choi: &ChoiState) -> Result<ComplexMatrix> {
    let d = choi.dim;
    let eig = eig_hermitian(&choi.matrix)?;
    let tol = tol::admission();
    if eig.eigenvalues[0] < 1.0 - tol {
        return Err(Error::ConversionUndefined(format!(
            "Choi state is not pure (largest eigenvalue {})",
            eig.eigenvalues[0]
        )));
    }
    let marginal = partial_trace_out(&choi.matrix, d)?;
    let target = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    if marginal.max_diff(&target) > tol {
        return Err(Error::ConversionUndefined("pure Choi state is not maximally entangled".into()));
    }
    let sd = (d as f64).sqrt();
    let mut u = ComplexMatrix::from_fn(d, d, |al, i| eig.eigenvectors[(i * d + al, 0)] * sd);
    let pivot = u.as_slice().iter().copied().fold(ZERO, |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
    u = u.scale(pivot.conj() / pivot.norm());
    Ok(u)
}

/// `d tr_I[(X^T kron I) C]` for any `d x d` matrix `X`.
pub fn apply_linear_via_choi(choi: &ChoiState, x: &ComplexMatrix) -> ComplexMatrix {
    let d = choi.dim;
    let lifted = &kron(&x.transpose(), &ComplexMatrix::identity(d)) * &choi.matrix;
    partial_trace_in(&lifted, d).expect("shape fixed by ChoiState").scale_real(d as f64)
}

pub(crate) fn check_density_matrix(rho: &ComplexMatrix, d: usize) -> Result<()> {
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch(format!("expected {d}x{d} state, got {}x{}", rho.rows(), rho.cols())));
    }
    let tol = tol::admission();
    let herm = rho.hermiticity_residual();
    if herm > tol {
        return Err(Error::NotDensityMatrix(format!("not Hermitian (residual {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotDensityMatrix(format!("trace {} differs from 1", tr.re)));
    }
    let min = eig_hermitian(rho)?.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// `Phi(rho)` recovered from the Choi state.
pub fn apply_via_choi(choi: &ChoiState, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_density_matrix(rho, choi.dim)?;
    Ok(apply_linear_via_choi(choi, rho))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpDiagnostics {
    pub cptp: bool,
    pub min_eigenvalue: f64,
    /// `max |tr_O(C) - I/d|`.
    pub marginal_residual: f64,
}

pub fn is_cptp(choi: &ChoiState) -> CptpDiagnostics {
    let d = choi.dim;
    let min_eigenvalue = eig_hermitian(&choi.matrix).map(|e| *e.eigenvalues.last().unwrap()).unwrap_or(f64::NEG_INFINITY);
    let marginal = partial_trace_out(&choi.matrix, d).expect("shape fixed by ChoiState");
    let marginal_residual = marginal.max_diff(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64));
    let tol = tol::admission();
    CptpDiagnostics { cptp: min_eigenvalue >= -tol && marginal_residual <= tol, min_eigenvalue, marginal_residual }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncoherenceDiagnostics {
    pub incoherent: bool,
    pub max_off_diagonal: f64,
}

/// Diagonality of the Choi matrix in the `|i alpha>` basis.
pub fn is_incoherent_operation(choi: &ChoiState) -> IncoherenceDiagnostics {
    let m = &choi.matrix;
    let n = m.rows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    IncoherenceDiagnostics { incoherent: worst <= tol::admission(), max_off_diagonal: worst }
}

/// True when every column has at most one entry of modulus above tolerance,
/// so the operator sends basis kets to multiples of basis kets.
pub fn is_incoherent_kraus_operator(k: &ComplexMatrix) -> bool {
    let tol = tol::admission();
    (0..k.cols()).all(|c| (0..k.rows()).filter(|&r| k[(r, c)].norm() > tol).count() <= 1)
}

/// `Phi_{ij alpha beta} = d <i alpha|C|j beta> = <alpha|Phi(|i><j|)|beta>`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperationMatrixElements {
    dim: usize,
    values: Vec<C64>,
}

impl OperationMatrixElements {
    pub fn from_choi(choi: &ChoiState) -> Self {
        let d = choi.dim;
        let mut values = vec![ZERO; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                for al in 0..d {
                    for be in 0..d {
                        values[((i * d + j) * d + al) * d + be] = choi.matrix[(i * d + al, j * d + be)] * d as f64;
                    }
                }
            }
        }
        Self { dim: d, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, alpha: usize, beta: usize) -> C64 {
        let d = self.dim;
        self.values[((i * d + j) * d + alpha) * d + beta]
    }

    /// `sum_{ij alpha beta} Phi_{ij alpha beta} / d |i alpha><j beta|`.
    pub fn to_choi_matrix(&self) -> ComplexMatrix {
        let d = self.dim;
        ComplexMatrix::from_fn(d * d, d * d, |r, c| self.get(r / d, c / d, r % d, c % d) / d as f64)
    }
}

/// Diagonal incoherent Choi state `sum (T_{alpha i}/d)|i alpha><i alpha|` from
/// a column-stochastic `T`.
pub fn incoherent_choi_from_stochastic(t: &[Vec<f64>]) -> Result<ChoiState> {
    let d = t.len();
    if d == 0 || t.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch("stochastic matrix must be square".into()));
    }
    let mut diag = vec![0.0; d * d];
    for i in 0..d {
        for al in 0..d {
            diag[i * d + al] = t[al][i] / d as f64;
        }
    }
    ChoiState::new(d, ComplexMatrix::diag_real(&diag))
}

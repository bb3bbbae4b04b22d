//! Fidelity-based coherence of operations.
//!
//! For an operation with a pure Choi state the measure is the distance
//! `sqrt(1 - F)` to the nearest pure incoherent state `|i alpha>`; since
//! `F(|psi>, |i alpha>) = |<i alpha|psi>|^2`, it reduces to the largest
//! diagonal entry of the Choi matrix. Mixed Choi states use the convex roof
//! (see [`crate::convex_roof`]).

use serde::{Deserialize, Serialize};

use crate::channel::{check_density_matrix, ChoiState, QuantumOperation};
use crate::error::{Error, Result};
use crate::matrix::{eig_hermitian, trace_norm, ComplexMatrix, C64};
use crate::tol;

/// Eigenvalues at or below this are treated as exact zeros when taking
/// square roots inside the fidelity; round-off on a zero eigenvalue would
/// otherwise contribute `sqrt(1e-16) = 1e-8`.
const FIDELITY_RANK_CUTOFF: f64 = 1e-14;

fn sqrt_with_cutoff(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(a)?.reconstruct_with(|x| if x > FIDELITY_RANK_CUTOFF { x.sqrt() } else { 0.0 }))
}

/// `F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, clamped to `[0, 1]`.
pub fn uhlmann_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let n = rho.require_square()?;
    check_density_matrix(rho, n)?;
    check_density_matrix(sigma, n)?;
    // sqrt(sqrt(rho) sigma sqrt(rho)) has trace ||sqrt(rho) sqrt(sigma)||_1.
    let tr = trace_norm(&(&sqrt_with_cutoff(rho)? * &sqrt_with_cutoff(sigma)?));
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Fidelity of two operations through their Choi states.
pub fn operation_fidelity(a: &QuantumOperation, b: &QuantumOperation) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("operations have d={} and d={}", a.dim(), b.dim())));
    }
    uhlmann_fidelity(a.choi().matrix(), b.choi().matrix())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    ExactPure,
    ClosedFormQubit,
    ConvexRoofUpperBound,
}

impl MeasureKind {
    pub fn is_exact(self) -> bool {
        !matches!(self, MeasureKind::ConvexRoofUpperBound)
    }
}

/// Pure-Choi ensemble `{p_n, Phi_n}`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub weights: Vec<f64>,
    pub members: Vec<QuantumOperation>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, members: Vec<QuantumOperation>) -> Result<Self> {
        crate::channel::check_weights(&weights, members.len(), tol::admission())?;
        for m in &members {
            let top = m.choi().largest_eigenvalue();
            if top < 1.0 - tol::admission() {
                return Err(Error::NotPureChoi { largest_eigenvalue: top });
            }
        }
        Ok(Self { weights, members })
    }

    /// `sum_n p_n C_n`.
    pub fn mixed_choi(&self) -> ComplexMatrix {
        let d = self.members[0].dim();
        self.weights.iter().zip(&self.members).fold(ComplexMatrix::zeros(d * d, d * d), |acc, (w, m)| {
            &acc + &m.choi().matrix().scale_real(*w)
        })
    }
}

#[derive(Clone, Debug)]
pub enum Witness {
    /// Closest incoherent basis state `|i alpha>` with linear index `i d + alpha`.
    BasisState { index: usize, input: usize, output: usize },
    Ensemble(Ensemble),
}

#[derive(Clone, Debug)]
pub struct MeasureResult {
    pub value: f64,
    pub kind: MeasureKind,
    pub witness: Witness,
}

/// Index of the largest diagonal entry; ties within `1e-12` go to the
/// smallest index.
fn argmax_diagonal(m: &ComplexMatrix) -> (usize, f64) {
    let mut best = (0, m[(0, 0)].re);
    for k in 1..m.rows() {
        let v = m[(k, k)].re;
        if v > best.1 + tol::ALGEBRA {
            best = (k, v);
        }
    }
    best
}

fn pure_measure_of_choi(choi: &ChoiState) -> Result<MeasureResult> {
    let top = choi.largest_eigenvalue();
    if top < 1.0 - tol::admission() {
        return Err(Error::NotPureChoi { largest_eigenvalue: top });
    }
    let d = choi.dim();
    let (index, weight) = argmax_diagonal(choi.matrix());
    Ok(MeasureResult {
        value: (1.0 - weight).max(0.0).sqrt(),
        kind: MeasureKind::ExactPure,
        witness: Witness::BasisState { index, input: index / d, output: index % d },
    })
}

/// `min over pure incoherent |i alpha>` of `sqrt(1 - F)` for a pure Choi state.
pub fn mf_pure(op: &QuantumOperation) -> Result<MeasureResult> {
    pure_measure_of_choi(&op.choi())
}

/// Angles of `U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)` with the
/// half-angle convention
/// `U = e^{i alpha} diag(e^{-i beta/2}, e^{i beta/2}) [[cos, -sin], [sin, cos]](gamma/2) diag(e^{-i delta/2}, e^{i delta/2})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl EulerParams {
    pub fn unitary(&self) -> ComplexMatrix {
        let ph = |x: f64| C64::from_polar(1.0, x);
        let (c, s) = ((self.gamma / 2.0).cos(), (self.gamma / 2.0).sin());
        let left = ComplexMatrix::diag(&[ph(-self.beta / 2.0), ph(self.beta / 2.0)]);
        let rot = ComplexMatrix::from_real(2, 2, &[c, -s, s, c]);
        let right = ComplexMatrix::diag(&[ph(-self.delta / 2.0), ph(self.delta / 2.0)]);
        (&(&left * &rot) * &right).scale(ph(self.alpha))
    }
}

fn require_qubit_unitary(u: &ComplexMatrix) -> Result<()> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::DimensionMismatch(format!("expected a 2x2 unitary, got {}x{}", u.rows(), u.cols())));
    }
    let residual = u.unitarity_residual();
    if residual > tol::admission() {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Writing `U = [[a, -b], [e^{2i alpha} b*, e^{2i alpha} a*]]`: `det U = e^{2i alpha}`,
/// `a = e^{i(alpha - beta/2 - delta/2)} cos(gamma/2)`,
/// `b = e^{i(alpha - beta/2 + delta/2)} sin(gamma/2)`. `gamma` is in `[0, pi]`
/// and `alpha` in `[0, pi)`.
pub fn euler_params_from_unitary(u: &ComplexMatrix) -> Result<EulerParams> {
    require_qubit_unitary(u)?;
    let a = u[(0, 0)];
    let b = -u[(0, 1)];
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let alpha = det.arg().rem_euclid(std::f64::consts::TAU) / 2.0;
    let (na, nb) = (a.norm(), b.norm());
    let gamma = if na >= 1.0 - tol::ALGEBRA {
        0.0
    } else if na <= tol::ALGEBRA {
        std::f64::consts::PI
    } else {
        2.0 * nb.atan2(na)
    };
    // sum = beta + delta from arg(a), diff = beta - delta from arg(b); an
    // undefined phase (zero modulus) leaves that combination free, set to 0.
    let sum = if gamma < std::f64::consts::PI { 2.0 * (alpha - a.arg()) } else { 0.0 };
    let diff = if gamma > 0.0 { 2.0 * (alpha - b.arg()) } else { 0.0 };
    let (sum, diff) = match (gamma == 0.0, gamma == std::f64::consts::PI) {
        (true, _) => (sum, sum),
        (_, true) => (diff, diff),
        _ => (sum, diff),
    };
    Ok(EulerParams { alpha, beta: (sum + diff) / 2.0, gamma, delta: (sum - diff) / 2.0 })
}

/// `min{sqrt(1 - cos^2(gamma/2)/2), sqrt(1 - sin^2(gamma/2)/2)}` evaluated from
/// `|U_00| = |cos(gamma/2)|` and `|U_01| = |sin(gamma/2)|`.
pub fn mf_single_qubit_unitary(u: &ComplexMatrix) -> Result<MeasureResult> {
    require_qubit_unitary(u)?;
    let a2 = u[(0, 0)].norm_sqr();
    let b2 = u[(0, 1)].norm_sqr();
    let from_a = (1.0 - a2 / 2.0).sqrt();
    let from_b = (1.0 - b2 / 2.0).sqrt();
    // Diagonal of C_U is (|a|^2, |b|^2, |b|^2, |a|^2)/2.
    let index = if a2 + tol::ALGEBRA >= b2 { 0 } else { 1 };
    Ok(MeasureResult {
        value: from_a.min(from_b),
        kind: MeasureKind::ClosedFormQubit,
        witness: Witness::BasisState { index, input: index / 2, output: index % 2 },
    })
}

/// Single-Kraus qubit operation `sum_{i alpha} 2^{-1/2} e^{i theta_{i alpha}} |alpha><i|`,
/// with `thetas[i * 2 + alpha] = theta_{i alpha}`.
pub fn max_coherent_operation(d: usize, thetas: &[f64]) -> Result<QuantumOperation> {
    if d != 2 {
        return Err(Error::UnsupportedDim(d));
    }
    if thetas.len() != 4 {
        return Err(Error::DimensionMismatch(format!("expected 4 phases, got {}", thetas.len())));
    }
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let k = ComplexMatrix::from_fn(2, 2, |al, i| C64::from_polar(amp, thetas[i * 2 + al]));
    QuantumOperation::kraus(vec![k])
}

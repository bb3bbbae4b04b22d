//! Superoperations: linear maps on Choi matrices.
//!
//! Every superoperation reduces to a `d^4 x d^4` matrix `M` acting on
//! column-stacked Choi matrices, `vec(Omega(C)) = M vec(C)`. Column `p` of
//! `M` is `vec(Omega(E))` for the matrix unit `E` whose vectorization is the
//! `p`-th basis vector.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::channel::{check_weights, is_cptp, ChoiState, CptpDiagnostics, QuantumOperation};
use crate::error::{Error, Result};
use crate::matrix::{devectorize, kron, partial_trace_in, vectorize, ComplexMatrix};
use crate::tol;

#[derive(Clone, Debug)]
pub enum SuperopForm {
    /// `Omega(Phi) = outer . Phi . inner`.
    Sandwich { outer: QuantumOperation, inner: QuantumOperation },
    /// `Omega(C) = sum_n K_n C K_n^dag` with `d^2 x d^2` operators.
    KrausOnChoi(Vec<ComplexMatrix>),
    Matrix(ComplexMatrix),
}

#[derive(Clone, Debug)]
pub struct Superoperation {
    dim: usize,
    form: SuperopForm,
    cache: OnceLock<ComplexMatrix>,
}

impl Superoperation {
    fn with_form(dim: usize, form: SuperopForm) -> Self {
        Self { dim, form, cache: OnceLock::new() }
    }

    pub fn sandwich(outer: QuantumOperation, inner: QuantumOperation) -> Result<Self> {
        if outer.dim() != inner.dim() {
            return Err(Error::DimensionMismatch(format!(
                "sandwich operations have d={} and d={}",
                outer.dim(),
                inner.dim()
            )));
        }
        let d = outer.dim();
        Ok(Self::with_form(d, SuperopForm::Sandwich { outer, inner }))
    }

    pub fn kraus_on_choi(dim: usize, ops: Vec<ComplexMatrix>) -> Result<Self> {
        let n = dim * dim;
        if ops.is_empty() {
            return Err(Error::InvalidKraus("empty Kraus set".into()));
        }
        if ops.iter().any(|k| k.rows() != n || k.cols() != n) {
            return Err(Error::DimensionMismatch(format!("Choi-space Kraus operators must be {n}x{n}")));
        }
        Ok(Self::with_form(dim, SuperopForm::KrausOnChoi(ops)))
    }

    pub fn from_matrix(dim: usize, m: ComplexMatrix) -> Result<Self> {
        let n = dim * dim * dim * dim;
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "superoperation matrix must be {n}x{n}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let s = Self::with_form(dim, SuperopForm::Matrix(m.clone()));
        let _ = s.cache.set(m);
        Ok(s)
    }

    pub fn identity(dim: usize) -> Self {
        Self::with_form(dim, SuperopForm::KrausOnChoi(vec![ComplexMatrix::identity(dim * dim)]))
    }

    /// Phase-out superoperation in its Choi-space Kraus form `{|i alpha><i alpha|}`.
    pub fn phase_out(dim: usize) -> Self {
        let n = dim * dim;
        let ops = (0..n).map(|m| ComplexMatrix::unit(n, m, m)).collect();
        Self::with_form(dim, SuperopForm::KrausOnChoi(ops))
    }

    /// Phase-out superoperation as the sandwich `Delta^O . Phi . Delta^I`.
    pub fn phase_out_sandwich(dim: usize) -> Self {
        Self::with_form(
            dim,
            SuperopForm::Sandwich { outer: QuantumOperation::dephasing(dim), inner: QuantumOperation::dephasing(dim) },
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &SuperopForm {
        &self.form
    }

    pub fn form_name(&self) -> &'static str {
        match self.form {
            SuperopForm::Sandwich { .. } => "sandwich",
            SuperopForm::KrausOnChoi(_) => "kraus_on_choi",
            SuperopForm::Matrix(_) => "matrix",
        }
    }

    /// Choi-space Kraus operators, when the form has them. A sandwich with
    /// operator sets `{A_n}` (outer) and `{B_m}` (inner) has `B_m^T kron A_n`.
    pub fn choi_space_kraus(&self) -> Option<Vec<ComplexMatrix>> {
        match &self.form {
            SuperopForm::KrausOnChoi(ops) => Some(ops.clone()),
            SuperopForm::Sandwich { outer, inner } => {
                let outer_ops = outer.kraus_operators();
                let inner_ops = inner.kraus_operators();
                Some(
                    inner_ops
                        .iter()
                        .flat_map(|b| outer_ops.iter().map(move |a| kron(&b.transpose(), a)))
                        .collect(),
                )
            }
            SuperopForm::Matrix(_) => None,
        }
    }

    /// Applies the constructor form directly, without the matrix representation.
    fn apply_form(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        match &self.form {
            SuperopForm::KrausOnChoi(ops) => {
                let n = d * d;
                ops.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| &acc + &(&(k * x) * &k.adjoint()))
            }
            SuperopForm::Matrix(m) => {
                devectorize(&(m * &vectorize(x).expect("square")), d * d).expect("shape fixed")
            }
            SuperopForm::Sandwich { outer, inner } => {
                // Choi of outer . Phi_X . inner, built from its action on |i><j|.
                let mut acc = ComplexMatrix::zeros(d * d, d * d);
                for i in 0..d {
                    for j in 0..d {
                        let eij = ComplexMatrix::unit(d, i, j);
                        let y = inner.apply_direct(&eij).expect("dims checked");
                        let y = linear_action(d, x, &y);
                        let y = outer.apply_direct(&y).expect("dims checked");
                        acc = &acc + &kron(&eij, &y);
                    }
                }
                acc.scale_real(1.0 / d as f64)
            }
        }
    }

    /// Matrix representation obtained by applying the constructor form to
    /// every matrix unit.
    pub fn matrix_by_probing(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut out = ComplexMatrix::zeros(n * n, n * n);
        for p in 0..n * n {
            let unit = ComplexMatrix::unit(n, p % n, p / n);
            let col = vectorize(&self.apply_form(&unit)).expect("square");
            for r in 0..n * n {
                out[(r, p)] = col[(r, 0)];
            }
        }
        out
    }

    /// `sum_n conj(K_n) kron K_n` from the Choi-space Kraus operators.
    pub fn matrix_by_formula(&self) -> Option<ComplexMatrix> {
        if let SuperopForm::Matrix(m) = &self.form {
            return Some(m.clone());
        }
        let ops = self.choi_space_kraus()?;
        let n = self.dim * self.dim;
        Some(ops.iter().fold(ComplexMatrix::zeros(n * n, n * n), |acc, k| &acc + &kron(&k.conj(), k)))
    }

    /// Cached `d^4 x d^4` matrix representation.
    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.cache.get_or_init(|| match &self.form {
            SuperopForm::Sandwich { .. } => self.matrix_by_probing(),
            _ => self.matrix_by_formula().expect("Kraus and matrix forms have a formula"),
        })
    }

    /// `devectorize(M vec(X))` for any `d^2 x d^2` matrix.
    pub fn apply_to_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim * self.dim;
        if x.rows() != n || x.cols() != n {
            return Err(Error::DimensionMismatch(format!("expected {n}x{n} Choi matrix, got {}x{}", x.rows(), x.cols())));
        }
        devectorize(&(self.as_matrix() * &vectorize(x)?), n)
    }

    /// Output operation in Choi form. The trace is not renormalized, so
    /// the result must itself be a valid Choi state.
    pub fn apply(&self, op: &QuantumOperation) -> Result<QuantumOperation> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("superoperation has d={}, operation d={}", self.dim, op.dim())));
        }
        let out = self.apply_to_matrix(op.choi().matrix())?;
        Ok(QuantumOperation::from_choi(ChoiState::new(self.dim, out.hermitian_part())?))
    }
}

/// `d tr_I[(Y^T kron I) X]` for an arbitrary `d^2 x d^2` matrix `X`.
fn linear_action(d: usize, x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let lifted = &kron(&y.transpose(), &ComplexMatrix::identity(d)) * x;
    partial_trace_in(&lifted, d).expect("shape fixed").scale_real(d as f64)
}

/// One branch `p_n = tr(K_n C K_n^dag)`, `C_n = K_n C K_n^dag / p_n`.
#[derive(Clone, Debug)]
pub struct KrausOutcome {
    pub probability: f64,
    pub operation: QuantumOperation,
}

pub fn kraus_outcomes(s: &Superoperation, op: &QuantumOperation) -> Result<Vec<KrausOutcome>> {
    let ops = s.choi_space_kraus().ok_or(Error::NoKrausForm)?;
    if op.dim() != s.dim {
        return Err(Error::DimensionMismatch(format!("superoperation has d={}, operation d={}", s.dim, op.dim())));
    }
    let c = op.choi();
    let mut out = Vec::new();
    for k in &ops {
        let branch = &(k * c.matrix()) * &k.adjoint();
        let p = branch.trace().re;
        if p > tol::ALGEBRA {
            let state = ChoiState::new(s.dim, branch.scale_real(1.0 / p).hermitian_part())?;
            out.push(KrausOutcome { probability: p, operation: QuantumOperation::from_choi(state) });
        }
    }
    Ok(out)
}

fn same_dim(a: &Superoperation, b: &Superoperation) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!("superoperations have d={} and d={}", a.dim, b.dim)));
    }
    Ok(())
}

/// `first . second`: `second` acts first.
pub fn compose(first: &Superoperation, second: &Superoperation) -> Result<Superoperation> {
    same_dim(first, second)?;
    Superoperation::from_matrix(first.dim, first.as_matrix() * second.as_matrix())
}

pub fn convex_combine(weights: &[f64], ops: &[&Superoperation]) -> Result<Superoperation> {
    check_weights(weights, ops.len(), tol::ALGEBRA)?;
    for s in &ops[1..] {
        same_dim(ops[0], s)?;
    }
    let n = ops[0].as_matrix().rows();
    let m = weights
        .iter()
        .zip(ops)
        .fold(ComplexMatrix::zeros(n, n), |acc, (w, s)| &acc + &s.as_matrix().scale_real(*w));
    Superoperation::from_matrix(ops[0].dim, m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub in_miso: bool,
    pub in_miso_star: bool,
    pub in_diso: bool,
    /// `max |M(Omega Theta) - M(Theta Omega Theta)|`.
    pub miso_residual: f64,
    /// `max |M(Theta Omega) - M(Theta Omega Theta)|`.
    pub miso_star_residual: f64,
    /// `max |M(Omega Theta) - M(Theta Omega)|`.
    pub exchange_residual: f64,
}

impl ClassificationReport {
    /// Exchangeable resource condition evaluated from its own residuals.
    pub fn exchangeable(&self) -> bool {
        let tol = tol::admission();
        self.exchange_residual <= tol && self.miso_star_residual <= tol
    }
}

pub fn classify(s: &Superoperation) -> ClassificationReport {
    let theta = Superoperation::phase_out(s.dim);
    let t = theta.as_matrix();
    let m = s.as_matrix();
    let omega_theta = m * t;
    let theta_omega = t * m;
    let sandwiched = t * &omega_theta;
    let miso_residual = omega_theta.max_diff(&sandwiched);
    let miso_star_residual = theta_omega.max_diff(&sandwiched);
    let exchange_residual = omega_theta.max_diff(&theta_omega);
    let tol = tol::admission();
    let in_miso = miso_residual <= tol;
    let in_miso_star = miso_star_residual <= tol;
    ClassificationReport {
        in_miso,
        in_miso_star,
        in_diso: in_miso && in_miso_star,
        miso_residual,
        miso_star_residual,
        exchange_residual,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub theta_s_in_miso: bool,
    pub theta_s_theta_in_miso: bool,
    pub input_in_miso_star: bool,
    /// Checked only when the input is in MISO*.
    pub theta_s_in_miso_star: Option<bool>,
    pub s_theta_in_miso_star: Option<bool>,
}

impl StructuralReport {
    pub fn holds(&self) -> bool {
        self.theta_s_in_miso
            && self.theta_s_theta_in_miso
            && self.theta_s_in_miso_star.unwrap_or(true)
            && self.s_theta_in_miso_star.unwrap_or(true)
    }
}

/// `Theta S`, `Theta S Theta` lie in MISO for every `S`; if `S` is in MISO*
/// then so are `Theta S` and `S Theta`.
pub fn check_structural_relations(s: &Superoperation) -> StructuralReport {
    let theta = Superoperation::phase_out(s.dim);
    let theta_s = compose(&theta, s).expect("same dim");
    let s_theta = compose(s, &theta).expect("same dim");
    let theta_s_theta = compose(&theta_s, &theta).expect("same dim");
    let input_in_miso_star = classify(s).in_miso_star;
    let theta_s_class = classify(&theta_s);
    StructuralReport {
        theta_s_in_miso: theta_s_class.in_miso,
        theta_s_theta_in_miso: classify(&theta_s_theta).in_miso,
        input_in_miso_star,
        theta_s_in_miso_star: input_in_miso_star.then_some(theta_s_class.in_miso_star),
        s_theta_in_miso_star: input_in_miso_star.then(|| classify(&s_theta).in_miso_star),
    }
}

#[derive(Clone, Debug)]
pub struct CptpPreservation {
    pub preserved: bool,
    pub input: CptpDiagnostics,
    pub output: CptpDiagnostics,
    pub output_operation: QuantumOperation,
}

/// Dephases a CPTP operation and checks that the result is still CPTP.
pub fn check_cptp_preservation(op: &QuantumOperation) -> Result<CptpPreservation> {
    let input = is_cptp(&op.choi());
    if !input.cptp {
        return Err(Error::InputNotCptp);
    }
    let out = Superoperation::phase_out(op.dim()).apply(op)?;
    let output = is_cptp(&out.choi());
    Ok(CptpPreservation { preserved: output.cptp, input, output, output_operation: out })
}

//! JSON file formats. Complex numbers are `[re, im]` pairs and matrices are
//! row-major nested arrays.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{ChoiState, QuantumOperation, Representation};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::superop::Superoperation;

pub const SCHEMA_VERSION: &str = "1";

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    m.to_rows().into_iter().map(|r| r.into_iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|p| C64::new(p[0], p[1])).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationKind {
    Unitary,
    Kraus,
    Choi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperationDocument {
    pub schema_version: String,
    pub d: usize,
    pub kind: OperationKind,
    pub matrices: Vec<MatrixJson>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn check_version(v: &str) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema_version {v:?}")));
    }
    Ok(())
}

fn expect_shape(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::Parse(format!("{what} must be {n}x{n}, got {}x{}", m.rows(), m.cols())));
    }
    Ok(())
}

impl OperationDocument {
    pub fn new(kind: OperationKind, d: usize, matrices: &[ComplexMatrix]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            d,
            kind,
            matrices: matrices.iter().map(matrix_to_json).collect(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_operation(op: &QuantumOperation) -> Self {
        match op.representation() {
            Representation::Unitary(u) => Self::new(OperationKind::Unitary, op.dim(), &[u.clone()]),
            Representation::Kraus(ks) => Self::new(OperationKind::Kraus, op.dim(), ks),
            Representation::Choi(c) => Self::new(OperationKind::Choi, op.dim(), &[c.matrix().clone()]),
        }
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn to_operation(&self) -> Result<QuantumOperation> {
        check_version(&self.schema_version)?;
        if self.d == 0 {
            return Err(Error::Parse("d must be positive".into()));
        }
        let ms = self.matrices.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let single = |what: &str| -> Result<ComplexMatrix> {
            match ms.as_slice() {
                [m] => Ok(m.clone()),
                _ => Err(Error::Parse(format!("{what} document needs exactly one matrix, got {}", ms.len()))),
            }
        };
        match self.kind {
            OperationKind::Unitary => {
                let u = single("unitary")?;
                expect_shape(&u, self.d, "unitary")?;
                QuantumOperation::unitary(u)
            }
            OperationKind::Kraus => {
                if ms.is_empty() {
                    return Err(Error::Parse("kraus document has no operators".into()));
                }
                for k in &ms {
                    expect_shape(k, self.d, "Kraus operator")?;
                }
                QuantumOperation::kraus(ms)
            }
            OperationKind::Choi => {
                let c = single("choi")?;
                expect_shape(&c, self.d * self.d, "Choi matrix")?;
                Ok(QuantumOperation::from_choi(ChoiState::new(self.d, c)?))
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuperopBody {
    /// `Phi -> outer . Phi . inner`.
    Sandwich { outer: OperationDocument, inner: OperationDocument },
    /// Operator-sum map on the `d^2`-dimensional Choi space.
    KrausOnChoi { matrices: Vec<MatrixJson> },
    PhaseOut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperopDocument {
    pub schema_version: String,
    pub d: usize,
    #[serde(flatten)]
    pub body: SuperopBody,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl SuperopDocument {
    pub fn new(d: usize, body: SuperopBody) -> Self {
        Self { schema_version: SCHEMA_VERSION.into(), d, body, metadata: BTreeMap::new() }
    }

    pub fn sandwich(outer: &QuantumOperation, inner: &QuantumOperation) -> Self {
        Self::new(
            outer.dim(),
            SuperopBody::Sandwich {
                outer: OperationDocument::from_operation(outer),
                inner: OperationDocument::from_operation(inner),
            },
        )
    }

    pub fn kraus_on_choi(d: usize, ops: &[ComplexMatrix]) -> Self {
        Self::new(d, SuperopBody::KrausOnChoi { matrices: ops.iter().map(matrix_to_json).collect() })
    }

    pub fn to_superoperation(&self) -> Result<Superoperation> {
        check_version(&self.schema_version)?;
        let s = match &self.body {
            SuperopBody::Sandwich { outer, inner } => Superoperation::sandwich(outer.to_operation()?, inner.to_operation()?)?,
            SuperopBody::KrausOnChoi { matrices } => {
                let ms = matrices.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                Superoperation::kraus_on_choi(self.d, ms)?
            }
            SuperopBody::PhaseOut => Superoperation::phase_out(self.d),
        };
        if s.dim() != self.d {
            return Err(Error::Parse(format!("document says d={}, operations have d={}", self.d, s.dim())));
        }
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Machine-readable result of a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub passed: bool,
    pub body: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl ReportDocument {
    pub fn new(command: Vec<String>, seed: Option<u64>, passed: bool, body: serde_json::Value) -> Self {
        Self { schema_version: SCHEMA_VERSION.into(), command, seed, passed, body, wall_time_ms: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().expect("formatted float parses")
}

/// Measure values are reported with 12 significant digits.
pub fn report_value(x: f64) -> f64 {
    round_sig(x, 12)
}

//! Tolerance ladder shared by every module.
//!
//! Exact-algebra identities are checked at [`ALGEBRA`], eigen-derived
//! quantities at [`EIGEN`], and admission of Hermitian / PSD / unit-trace
//! inputs at [`admission`] (default `1e-9`, overridable at runtime).

use std::sync::atomic::{AtomicU64, Ordering};

/// Exact-algebra identities (vectorization, matrix representations).
pub const ALGEBRA: f64 = 1e-12;

/// Quantities derived from an eigendecomposition.
pub const EIGEN: f64 = 1e-10;

/// Default admission tolerance for Hermiticity, PSD and trace checks.
pub const DEFAULT_ADMISSION: f64 = 1e-9;

static ADMISSION_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Current admission tolerance.
pub fn admission() -> f64 {
    f64::from_bits(ADMISSION_BITS.load(Ordering::Relaxed))
}

/// Override the admission tolerance. Non-finite or non-positive values are ignored.
pub fn set_admission(tol: f64) {
    if tol.is_finite() && tol > 0.0 {
        ADMISSION_BITS.store(tol.to_bits(), Ordering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bits_are_1e_minus_9() {
        assert_eq!(f64::from_bits(0x3E11_2E0B_E826_D695), DEFAULT_ADMISSION);
    }
}

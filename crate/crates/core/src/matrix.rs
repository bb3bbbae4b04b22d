//! Dense complex matrices and the primitives built on them.
//!
//! Bipartite spaces use the product basis `|i alpha>` with linear index
//! `i * d + alpha`: the first (input) factor is the major index. Every
//! partial trace, Kronecker product and Choi matrix in the crate follows
//! this convention. Vectorization stacks columns, so
//! `vec(A X B) = (B^T kron A) vec(X)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data: data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { values[r] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { C64::new(values[r], 0.0) } else { ZERO })
    }

    /// Matrix unit with a single one at `(r, c)`.
    pub fn unit(n: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(r, c)] = ONE;
        m
    }

    /// Column vector from entries.
    pub fn column(entries: &[C64]) -> Self {
        Self { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    /// Basis ket `|k>` in dimension `n`.
    pub fn basis_ket(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n, 1);
        v[(k, 0)] = ONE;
        v
    }

    /// `|v><w|` for column vectors `v`, `w`.
    pub fn outer(v: &Self, w: &Self) -> Self {
        assert!(v.cols == 1 && w.cols == 1);
        Self::from_fn(v.rows, w.rows, |r, c| v.data[r] * w.data[c].conj())
    }

    /// Matrix with i.i.d. standard complex Gaussian entries.
    pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        Self::from_fn(rows, cols, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus of `self - other`; infinite on shape mismatch.
    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_diff(other) <= tol
    }

    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `max |U^dag U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_diff(&Self::identity(self.rows))
    }

    /// Hermitian part `(A + A^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `<v|w>` for column vectors.
    pub fn inner(v: &Self, w: &Self) -> C64 {
        assert!(v.cols == 1 && w.cols == 1 && v.rows == w.rows);
        v.data.iter().zip(&w.data).map(|(a, b)| a.conj() * b).sum()
    }

    fn checked_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ in matrix product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn eigenvector(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::column(&self.eigenvectors.col(k))
    }

    /// `V f(Lambda) V^dag`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let a = v[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += a * v[(c, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEig> {
    let n = a.require_square()?;
    let residual = a.hermiticity_residual();
    if residual > tol::admission() {
        return Err(Error::NotHermitian { residual });
    }
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[(p, q)];
                let bn = b.norm();
                if bn <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = b / bn;
                let tau = (aqq - app) / (2.0 * bn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q).
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * jpp + mkq * jqp;
                    m[(k, q)] = mkp * jpq + mkq * jqq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
                    m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the original index order among equal eigenvalues.
    order.sort_by(|&x, &y| m[(y, y)].re.total_cmp(&m[(x, x)].re));
    let eigenvalues = order.iter().map(|&k| m[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEig { eigenvalues, eigenvectors })
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything more negative is
/// rejected.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(a)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -tol::admission() {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

fn bipartite_side(a: &ComplexMatrix, d: usize) -> Result<()> {
    if d == 0 || a.rows != d * d || a.cols != d * d {
        return Err(Error::DimensionMismatch(format!(
            "expected a {}x{} matrix for local dimension {d}, got {}x{}",
            d * d,
            d * d,
            a.rows,
            a.cols
        )));
    }
    Ok(())
}

/// Traces out the second (output) factor: `B[i][j] = sum_alpha A[i d + alpha][j d + alpha]`.
pub fn partial_trace_out(a: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    bipartite_side(a, d)?;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| (0..d).map(|al| a[(i * d + al, j * d + al)]).sum()))
}

/// Traces out the first (input) factor: `B[alpha][beta] = sum_i A[i d + alpha][i d + beta]`.
pub fn partial_trace_in(a: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    bipartite_side(a, d)?;
    Ok(ComplexMatrix::from_fn(d, d, |al, be| (0..d).map(|i| a[(i * d + al, i * d + be)]).sum()))
}

/// Tensor product with index `(i * rows(B) + alpha, j * cols(B) + beta)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Column-stacking vectorization into an `n^2 x 1` column.
pub fn vectorize(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    let mut data = Vec::with_capacity(n * n);
    for c in 0..n {
        for r in 0..n {
            data.push(a[(r, c)]);
        }
    }
    Ok(ComplexMatrix { rows: n * n, cols: 1, data })
}

/// Inverse of [`vectorize`] for a column of length `n^2`.
pub fn devectorize(v: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if v.cols != 1 || v.rows != n * n {
        return Err(Error::DimensionMismatch(format!(
            "cannot devectorize a {}x{} array into {n}x{n}",
            v.rows, v.cols
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| v.data[c * n + r]))
}

/// Orthonormalizes the columns in place (modified Gram-Schmidt). Returns
/// the diagonal of the triangular factor, positive for full-rank input.
pub fn orthonormalize_columns(m: &mut ComplexMatrix) -> Vec<f64> {
    let (rows, cols) = (m.rows, m.cols);
    let mut diag = Vec::with_capacity(cols);
    for j in 0..cols {
        for k in 0..j {
            let proj: C64 = (0..rows).map(|r| m[(r, k)].conj() * m[(r, j)]).sum();
            for r in 0..rows {
                let mk = m[(r, k)];
                m[(r, j)] -= proj * mk;
            }
        }
        let norm = (0..rows).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        diag.push(norm);
        if norm > 0.0 {
            for r in 0..rows {
                m[(r, j)] /= norm;
            }
        }
    }
    diag
}

/// Haar-random isometry with `cols` orthonormal columns in dimension `rows`.
///
/// QR of a complex Gaussian matrix; Gram-Schmidt already fixes the diagonal
/// of R to be positive, which is the phase correction that makes Q Haar.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(cols <= rows);
    loop {
        let mut g = ComplexMatrix::ginibre(rows, cols, rng);
        let diag = orthonormalize_columns(&mut g);
        if diag.iter().all(|&x| x > 1e-8) {
            return g;
        }
    }
}

pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    haar_isometry(n, n, rng)
}

/// Random full-rank density matrix `G G^dag / tr(G G^dag)`.
pub fn random_density_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::ginibre(n, n, rng);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr).hermitian_part()
}

/// Random pure state `|psi><psi|`.
pub fn random_pure_state(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut g = ComplexMatrix::ginibre(n, 1, rng);
    orthonormalize_columns(&mut g);
    ComplexMatrix::outer(&g, &g)
}

/// Singular values in nonincreasing order (one-sided Jacobi on the columns,
/// which keeps small singular values accurate to working precision).
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (rows, cols) = (a.rows, a.cols);
    let mut w = a.clone();
    let col_dot = |w: &ComplexMatrix, p: usize, q: usize| -> C64 { (0..rows).map(|r| w[(r, p)].conj() * w[(r, q)]).sum() };
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = col_dot(&w, p, p).re;
                let beta = col_dot(&w, q, q).re;
                let g = col_dot(&w, p, q);
                let gn = g.norm();
                if gn <= f64::EPSILON * (alpha * beta).sqrt() || gn == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = g / gn;
                let zeta = (beta - alpha) / (2.0 * gn);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let ap = w[(r, p)];
                    let aq = w[(r, q)] * phase.conj();
                    w[(r, p)] = ap * c - aq * s;
                    w[(r, q)] = ap * s + aq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols).map(|c| col_dot(&w, c, c).re.sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).iter().sum()
}

#[cfg(test)]
mod tests {
    #[test]
    fn singular_values_of_known_matrices() {
        let a = ComplexMatrix::from_real(2, 2, &[3.0, 0.0, 4.0, 5.0]);
        let sv = singular_values(&a);
        assert!((sv[0] - 45f64.sqrt()).abs() < 1e-14 && (sv[1] - 5f64.sqrt()).abs() < 1e-14);
        let u = haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(2));
        let d = ComplexMatrix::diag_real(&[1e-9, 2.0, 0.5]);
        let sv = singular_values(&(&u * &d));
        assert!((sv[0] - 2.0).abs() < 1e-14 && (sv[1] - 0.5).abs() < 1e-14);
        assert!((sv[2] - 1e-9).abs() < 1e-22);
        assert!((trace_norm(&(&u * &d)) - 2.500000001).abs() < 1e-14);
    }
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eig_of_identity_and_diagonal() {
        let e = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        let e = eig_hermitian(&ComplexMatrix::diag_real(&[1.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
    }

    #[test]
    fn eig_of_pauli_x() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = eig_hermitian(&x).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-14);
        assert!(e.reconstruct().approx_eq(&x, 1e-14));
    }

    #[test]
    fn eig_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(eig_hermitian(&rect), Err(Error::NotSquare { .. })));
        let m = ComplexMatrix::from_rows(&[vec![ONE, c(0.0, 1.0)], vec![c(0.0, 1.0), ONE]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=9 {
            let g = ComplexMatrix::ginibre(n, n, &mut rng);
            let h = g.hermitian_part();
            let e = eig_hermitian(&h).unwrap();
            assert!(e.reconstruct().max_diff(&h) <= 1e-10);
            let v = &e.eigenvectors;
            assert!((&v.adjoint() * v).max_diff(&ComplexMatrix::identity(n)) <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn sqrt_examples() {
        let i = ComplexMatrix::identity(3);
        assert!(sqrt_psd(&i).unwrap().approx_eq(&i, 1e-12));
        let s = sqrt_psd(&ComplexMatrix::diag_real(&[4.0, 9.0])).unwrap();
        assert!(s.approx_eq(&ComplexMatrix::diag_real(&[2.0, 3.0]), 1e-12));
        let p = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(sqrt_psd(&p).unwrap().approx_eq(&p, 1e-12));
    }

    #[test]
    fn sqrt_clamps_and_rejects() {
        let tiny = ComplexMatrix::diag_real(&[1.0, -5e-10]);
        let s = sqrt_psd(&tiny).unwrap();
        assert!(s.approx_eq(&ComplexMatrix::diag_real(&[1.0, 0.0]), 1e-12));
        let neg = ComplexMatrix::diag_real(&[1.0, -1e-6]);
        assert!(matches!(sqrt_psd(&neg), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn partial_trace_examples() {
        let mut phi = ComplexMatrix::zeros(4, 4);
        for &(r, cc) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            phi[(r, cc)] = c(0.5, 0.0);
        }
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(partial_trace_out(&phi, 2).unwrap().approx_eq(&half, 1e-15));
        assert!(partial_trace_in(&phi, 2).unwrap().approx_eq(&half, 1e-15));
        let e00 = ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]);
        let want = ComplexMatrix::diag_real(&[1.0, 0.0]);
        assert!(partial_trace_out(&e00, 2).unwrap().approx_eq(&want, 0.0));
        assert!(partial_trace_in(&e00, 2).unwrap().approx_eq(&want, 0.0));
        assert!(matches!(partial_trace_out(&ComplexMatrix::identity(3), 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn partial_trace_in_recovers_state_through_identity_choi() {
        let mut choi = ComplexMatrix::zeros(4, 4);
        for &(r, cc) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            choi[(r, cc)] = c(0.5, 0.0);
        }
        let rho = ComplexMatrix::diag_real(&[0.3, 0.7]);
        let prod = &kron(&rho.transpose(), &ComplexMatrix::identity(2)) * &choi;
        let out = partial_trace_in(&prod, 2).unwrap().scale_real(2.0);
        assert!(out.approx_eq(&rho, 1e-15));
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        assert_eq!(kron(&p0, &p0), ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]));
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let k = kron(&p0, &x);
        let want = ComplexMatrix::from_real(
            4,
            4,
            &[0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        assert_eq!(k, want);
    }

    #[test]
    fn vectorize_examples() {
        let v = vectorize(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(v.as_slice(), &[ONE, ZERO, ZERO, ONE]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = ComplexMatrix::ginibre(4, 4, &mut rng);
        assert_eq!(devectorize(&vectorize(&m).unwrap(), 4).unwrap(), m);
        assert!(devectorize(&v, 3).is_err());
    }

    #[test]
    fn vec_of_kraus_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = ComplexMatrix::ginibre(2, 2, &mut rng);
        let x = ComplexMatrix::ginibre(2, 2, &mut rng);
        let lhs = vectorize(&(&(&k * &x) * &k.adjoint())).unwrap();
        let rhs = &kron(&k.conj(), &k) * &vectorize(&x).unwrap();
        assert!(lhs.max_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn haar_isometry_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = haar_isometry(6, 3, &mut rng);
        assert!((&v.adjoint() * &v).max_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }
}

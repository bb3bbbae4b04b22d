//! Convex-roof estimate of the fidelity coherence measure for mixed Choi states.
//!
//! With `C = sum_i lambda_i |e_i><e_i|` (rank `r`), every pure-state ensemble
//! of `m >= r` members is `|psi_n~> = sum_i V_{ni} sqrt(lambda_i) |e_i>` for an
//! `m x r` isometry `V`. The estimator minimizes
//! `sum_n p_n sqrt(1 - max_k |<k|psi_n>|^2)`, `p_n = <psi_n~|psi_n~>`, by local
//! search over `V` using Givens rotations between rows, restarted from random
//! isometries. The result is an upper bound on the true minimum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChoiState, QuantumOperation};
use crate::coherence::{mf_pure, Ensemble, MeasureKind, MeasureResult, Witness};
use crate::error::{Error, Result};
use crate::matrix::{eig_hermitian, haar_isometry, orthonormalize_columns, ComplexMatrix, C64, ZERO};
use crate::random::rng_from_seed;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexRoofConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Ensemble size `m`; defaults to `r^2`.
    pub ensemble_size: Option<usize>,
    /// Stop a restart once the value improved by less than `stall_tol`
    /// over this many iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl Default for ConvexRoofConfig {
    fn default() -> Self {
        Self { restarts: 32, max_iter: 2000, seed: 0, ensemble_size: None, stall_window: 200, stall_tol: 1e-10 }
    }
}

impl ConvexRoofConfig {
    pub fn new(restarts: usize, max_iter: usize, seed: u64) -> Self {
        Self { restarts, max_iter, seed, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ConvexRoofSearch {
    pub result: MeasureResult,
    /// Final value of each restart.
    pub restart_values: Vec<f64>,
    /// Running minimum over restarts.
    pub best_so_far: Vec<f64>,
}

/// Rows of the unnormalized ensemble, `psi[n][k] = <k|psi_n~>`.
struct Search {
    basis: ComplexMatrix,  // D x r, columns sqrt(lambda_i) e_i
    iso: ComplexMatrix,    // m x r
    psi: ComplexMatrix,    // m x D
    cost: Vec<f64>,
}

fn row_cost(row: &[C64]) -> f64 {
    let mut p = 0.0;
    let mut top: f64 = 0.0;
    for z in row {
        let w = z.norm_sqr();
        p += w;
        top = top.max(w);
    }
    (p * (p - top).max(0.0)).sqrt()
}

impl Search {
    fn new(basis: ComplexMatrix, iso: ComplexMatrix) -> Self {
        let mut s = Self { psi: ComplexMatrix::zeros(1, 1), cost: Vec::new(), basis, iso };
        s.refresh();
        s
    }

    fn refresh(&mut self) {
        self.psi = &self.iso * &self.basis.transpose();
        self.cost = (0..self.psi.rows()).map(|n| row_cost(self.psi.row(n))).collect();
    }

    fn total(&self) -> f64 {
        self.cost.iter().sum()
    }

    fn rotated_rows(m: &ComplexMatrix, a: usize, b: usize, c: f64, s: C64) -> (Vec<C64>, Vec<C64>) {
        // [a'; b'] = [[c, -conj(s)], [s, c]] [a; b]
        let ra = m.row(a);
        let rb = m.row(b);
        let na = ra.iter().zip(rb).map(|(x, y)| x * c - s.conj() * y).collect();
        let nb = ra.iter().zip(rb).map(|(x, y)| s * x + y * c).collect();
        (na, nb)
    }

    fn write_rows(m: &mut ComplexMatrix, a: usize, b: usize, na: &[C64], nb: &[C64]) {
        for (k, z) in na.iter().enumerate() {
            m[(a, k)] = *z;
        }
        for (k, z) in nb.iter().enumerate() {
            m[(b, k)] = *z;
        }
    }

    /// Tries one rotation; keeps it if it lowers the objective.
    fn try_rotation(&mut self, a: usize, b: usize, angle: f64, phase: f64) -> bool {
        let (c, s) = (angle.cos(), C64::from_polar(angle.sin(), phase));
        let (pa, pb) = Self::rotated_rows(&self.psi, a, b, c, s);
        let (ca, cb) = (row_cost(&pa), row_cost(&pb));
        if ca + cb < self.cost[a] + self.cost[b] - 1e-16 {
            Self::write_rows(&mut self.psi, a, b, &pa, &pb);
            let (va, vb) = Self::rotated_rows(&self.iso, a, b, c, s);
            Self::write_rows(&mut self.iso, a, b, &va, &vb);
            self.cost[a] = ca;
            self.cost[b] = cb;
            true
        } else {
            false
        }
    }

    fn run(&mut self, config: &ConvexRoofConfig, rng: &mut impl Rng) {
        let m = self.iso.rows();
        if m < 2 {
            return;
        }
        let mut step = std::f64::consts::FRAC_PI_4;
        let mut fails = 0usize;
        let mut window_start = self.total();
        for it in 1..=config.max_iter {
            let a = rng.random_range(0..m);
            let mut b = rng.random_range(0..m - 1);
            if b >= a {
                b += 1;
            }
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            let improved = self.try_rotation(a, b, step, phase) || self.try_rotation(a, b, -step, phase);
            if improved {
                fails = 0;
            } else {
                fails += 1;
                if fails >= 2 * m {
                    step = (step * 0.5).max(1e-9);
                    fails = 0;
                }
            }
            if it % 100 == 0 {
                orthonormalize_columns(&mut self.iso);
                self.refresh();
            }
            if it % config.stall_window == 0 {
                let now = self.total();
                if window_start - now < config.stall_tol {
                    break;
                }
                window_start = now;
            }
        }
        orthonormalize_columns(&mut self.iso);
        self.refresh();
    }

    fn ensemble(&self, d: usize) -> Result<Ensemble> {
        let mut weights = Vec::new();
        let mut members = Vec::new();
        for n in 0..self.psi.rows() {
            let row = self.psi.row(n);
            let p: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            if p <= 1e-15 {
                continue;
            }
            let v = ComplexMatrix::column(&row.iter().map(|z| z / p.sqrt()).collect::<Vec<_>>());
            let state = ChoiState::new(d, ComplexMatrix::outer(&v, &v).hermitian_part())?;
            weights.push(p);
            members.push(QuantumOperation::from_choi(state));
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ensemble::new(weights, members)
    }
}

/// Full search record, including per-restart values.
pub fn convex_roof_search(op: &QuantumOperation, config: &ConvexRoofConfig) -> Result<ConvexRoofSearch> {
    let choi = op.choi();
    let d = choi.dim();
    if choi.is_pure() {
        let result = mf_pure(op)?;
        let v = result.value;
        return Ok(ConvexRoofSearch { result, restart_values: vec![v], best_so_far: vec![v] });
    }
    let eig = eig_hermitian(choi.matrix()).map_err(|e| Error::InvalidChoi(e.to_string()))?;
    let kept: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] > tol::ALGEBRA).collect();
    let r = kept.len();
    let dd = d * d;
    let basis = ComplexMatrix::from_fn(dd, r, |row, i| eig.eigenvectors[(row, kept[i])] * eig.eigenvalues[kept[i]].sqrt());
    let m = config.ensemble_size.unwrap_or(r * r).max(r);

    let mut rng = rng_from_seed(config.seed);
    let mut best: Option<Search> = None;
    let mut restart_values = Vec::new();
    let mut best_so_far = Vec::new();
    for restart in 0..config.restarts.max(1) {
        let iso = if restart == 0 {
            ComplexMatrix::from_fn(m, r, |n, i| if n == i { C64::new(1.0, 0.0) } else { ZERO })
        } else {
            haar_isometry(m, r, &mut rng)
        };
        let mut search = Search::new(basis.clone(), iso);
        search.run(config, &mut rng);
        let value = search.total();
        restart_values.push(value);
        let improved = best.as_ref().is_none_or(|b| value < b.total());
        if improved {
            best = Some(search);
        }
        let running = best.as_ref().map(Search::total).unwrap();
        best_so_far.push(running);
    }
    let best = best.expect("at least one restart");
    let ensemble = best.ensemble(d)?;
    let value = best.total().clamp(0.0, 1.0);
    Ok(ConvexRoofSearch {
        result: MeasureResult { value, kind: MeasureKind::ConvexRoofUpperBound, witness: Witness::Ensemble(ensemble) },
        restart_values,
        best_so_far,
    })
}

/// Upper bound on the convex-roof fidelity coherence measure; exact (and
/// delegated to [`mf_pure`]) when the Choi state is pure.
pub fn mf_convex_roof(op: &QuantumOperation, restarts: usize, max_iter: usize, seed: u64) -> Result<MeasureResult> {
    convex_roof_search(op, &ConvexRoofConfig::new(restarts, max_iter, seed)).map(|s| s.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_cptp, random_unitary};

    fn z_channel() -> QuantumOperation {
        QuantumOperation::unitary(ComplexMatrix::diag_real(&[1.0, -1.0])).unwrap()
    }

    #[test]
    fn pure_input_matches_pure_measure() {
        let op = random_unitary(2, 4);
        let a = mf_convex_roof(&op, 4, 200, 1).unwrap();
        let b = mf_pure(&op).unwrap();
        assert_eq!(a.kind, MeasureKind::ExactPure);
        assert!((a.value - b.value).abs() <= 1e-12);
    }

    #[test]
    fn dephasing_channel_scores_zero() {
        let r = mf_convex_roof(&QuantumOperation::dephasing(2), 8, 500, 2).unwrap();
        assert_eq!(r.kind, MeasureKind::ConvexRoofUpperBound);
        assert!(r.value <= 1e-6);
    }

    #[test]
    fn identity_z_mixture_scores_zero() {
        let a = QuantumOperation::identity(2).choi();
        let b = z_channel().choi();
        let mix = QuantumOperation::from_choi(ChoiState::mixture(&[0.5, 0.5], &[&a, &b]).unwrap());
        assert!(mix.choi().matrix().approx_eq(&ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]), 1e-15));
        assert!(mf_convex_roof(&mix, 8, 500, 3).unwrap().value <= 1e-6);
    }

    #[test]
    fn witness_ensemble_reconstructs_input() {
        let op = random_cptp(2, 2, 11);
        let s = convex_roof_search(&op, &ConvexRoofConfig::new(6, 800, 5)).unwrap();
        let Witness::Ensemble(e) = &s.result.witness else { panic!("expected ensemble") };
        assert!(e.mixed_choi().approx_eq(op.choi().matrix(), 1e-8));
        assert!(s.best_so_far.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(s.best_so_far.len(), 6);
        assert!((s.best_so_far[5] - s.result.value).abs() < 1e-12);
    }

    #[test]
    fn search_improves_on_eigen_ensemble() {
        let op = random_cptp(2, 2, 12);
        let one = convex_roof_search(&op, &ConvexRoofConfig { restarts: 1, max_iter: 0, ..Default::default() }).unwrap();
        let many = convex_roof_search(&op, &ConvexRoofConfig::new(8, 2000, 1)).unwrap();
        assert!(many.result.value <= one.result.value + 1e-12);
    }

    #[test]
    fn upper_bound_never_below_pure_lower_bound_on_mixtures_of_pure_states() {
        // The ensemble that built the mixture is feasible, so the roof is at most its average.
        let a = random_unitary(2, 20);
        let b = random_unitary(2, 21);
        let mix = ChoiState::mixture(&[0.3, 0.7], &[&a.choi(), &b.choi()]).unwrap();
        let avg = 0.3 * mf_pure(&a).unwrap().value + 0.7 * mf_pure(&b).unwrap().value;
        let est = mf_convex_roof(&QuantumOperation::from_choi(mix), 16, 2000, 9).unwrap();
        assert!(est.value <= avg + 1e-6, "estimate {} above feasible {avg}", est.value);
    }
}

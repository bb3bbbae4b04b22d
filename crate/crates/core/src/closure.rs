//! Sampling members of MISO / MISO* / DISO and checking closure under
//! composition and convex combination.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::random::{random_cptp_with, random_incoherent_cptp_with, random_permutation, rng_from_seed};
use crate::superop::{check_structural_relations, classify, compose, convex_combine, ClassificationReport, Superoperation};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperopClass {
    Miso,
    MisoStar,
    Diso,
}

impl SuperopClass {
    pub const ALL: [SuperopClass; 3] = [SuperopClass::Miso, SuperopClass::MisoStar, SuperopClass::Diso];

    pub fn contains(self, report: &ClassificationReport) -> bool {
        match self {
            SuperopClass::Miso => report.in_miso,
            SuperopClass::MisoStar => report.in_miso_star,
            SuperopClass::Diso => report.in_diso,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SuperopClass::Miso => "MISO",
            SuperopClass::MisoStar => "MISO*",
            SuperopClass::Diso => "DISO",
        }
    }
}

/// Which constructor family the random base superoperations come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructorFamily {
    Sandwich,
    KrausOnChoi,
}

impl ConstructorFamily {
    pub const ALL: [ConstructorFamily; 2] = [ConstructorFamily::Sandwich, ConstructorFamily::KrausOnChoi];
}

pub fn random_sandwich(d: usize, rng: &mut impl Rng) -> Superoperation {
    let e1 = rng.random_range(1..=d);
    let e2 = rng.random_range(1..=d);
    Superoperation::sandwich(random_cptp_with(d, e1, rng), random_cptp_with(d, e2, rng)).expect("same dim")
}

/// Random trace-preserving Kraus set on the `d^2`-dimensional Choi space.
pub fn random_choi_space_kraus(d: usize, rng: &mut impl Rng) -> Superoperation {
    let ops = random_cptp_with(d * d, 2, rng).kraus_operators();
    Superoperation::kraus_on_choi(d, ops).expect("shape fixed")
}

pub fn random_incoherent_sandwich(d: usize, rng: &mut impl Rng) -> Superoperation {
    Superoperation::sandwich(random_incoherent_cptp_with(d, rng), random_incoherent_cptp_with(d, rng)).expect("same dim")
}

/// Trace-preserving Kraus set of monomial operators on the Choi space:
/// `K_n = P_n diag(sqrt(q_n) e^{i phi_n})` with `sum_n q_n = 1` entrywise.
/// Every column (and row) has a single nonzero entry, so each `K_n` is
/// incoherent.
pub fn random_incoherent_choi_kraus(d: usize, count: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let n = d * d;
    let mut weights = vec![vec![0.0; n]; count];
    for c in 0..n {
        let w: Vec<f64> = (0..count).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = w.iter().sum();
        for k in 0..count {
            weights[k][c] = w[k] / s;
        }
    }
    (0..count)
        .map(|k| {
            let perm = random_permutation(n, rng);
            let mut m = ComplexMatrix::zeros(n, n);
            for c in 0..n {
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                m[(perm[c], c)] = C64::from_polar(weights[k][c].sqrt(), phase);
            }
            m
        })
        .collect()
}

fn random_base(family: ConstructorFamily, d: usize, rng: &mut impl Rng) -> Superoperation {
    match family {
        ConstructorFamily::Sandwich => random_sandwich(d, rng),
        ConstructorFamily::KrausOnChoi => random_choi_space_kraus(d, rng),
    }
}

fn random_incoherent_member(family: ConstructorFamily, d: usize, rng: &mut impl Rng) -> Superoperation {
    match family {
        ConstructorFamily::Sandwich => random_incoherent_sandwich(d, rng),
        ConstructorFamily::KrausOnChoi => {
            let count = rng.random_range(1..=3);
            Superoperation::kraus_on_choi(d, random_incoherent_choi_kraus(d, count, rng)).expect("shape fixed")
        }
    }
}

/// Draws a class member: either an incoherent member of the family, or a
/// random base superoperation `Omega` wrapped as `Theta Omega` (MISO),
/// `Omega Theta` (MISO*) or `Theta Omega Theta` (DISO). Each draw is
/// verified by [`classify`] before it is returned.
pub fn sample_member(
    class: SuperopClass,
    family: ConstructorFamily,
    d: usize,
    rng: &mut impl Rng,
) -> Result<Superoperation> {
    const ATTEMPTS: usize = 32;
    let theta = Superoperation::phase_out(d);
    for _ in 0..ATTEMPTS {
        let candidate = if rng.random::<bool>() {
            random_incoherent_member(family, d, rng)
        } else {
            let base = random_base(family, d, rng);
            match class {
                SuperopClass::Miso => compose(&theta, &base)?,
                SuperopClass::MisoStar => compose(&base, &theta)?,
                SuperopClass::Diso => compose(&compose(&theta, &base)?, &theta)?,
            }
        };
        if class.contains(&classify(&candidate)) {
            return Ok(candidate);
        }
    }
    Err(Error::GeneratorExhausted { attempts: ATTEMPTS })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureViolation {
    pub pair: usize,
    /// `"compose"` or `"convex(p)"`.
    pub operation: String,
    pub report: ClassificationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub class: SuperopClass,
    pub family: ConstructorFamily,
    pub dim: usize,
    pub pairs: usize,
    pub checks: usize,
    pub violations: Vec<ClosureViolation>,
    /// DISO = MISO intersect MISO*, checked on every classified superoperation
    /// against the exchangeable resource condition.
    pub intersection_mismatches: usize,
    /// Largest defining residual seen on a combined superoperation.
    pub max_residual: f64,
    /// p = 0 and p = 1 combinations reproduce an operand.
    pub degenerate_weights_exact: bool,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.intersection_mismatches == 0 && self.degenerate_weights_exact
    }
}

pub const MIXING_WEIGHTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn class_residual(class: SuperopClass, r: &ClassificationReport) -> f64 {
    match class {
        SuperopClass::Miso => r.miso_residual,
        SuperopClass::MisoStar => r.miso_star_residual,
        SuperopClass::Diso => r.miso_residual.max(r.miso_star_residual),
    }
}

pub fn closure_harness(
    class: SuperopClass,
    family: ConstructorFamily,
    d: usize,
    samples: usize,
    seed: u64,
) -> Result<ClosureReport> {
    let mut rng = rng_from_seed(seed);
    let mut report = ClosureReport {
        class,
        family,
        dim: d,
        pairs: samples,
        checks: 0,
        violations: Vec::new(),
        intersection_mismatches: 0,
        max_residual: 0.0,
        degenerate_weights_exact: true,
    };
    let record = |pair: usize, operation: String, s: &Superoperation, report: &mut ClosureReport| {
        let r = classify(s);
        report.checks += 1;
        report.max_residual = report.max_residual.max(class_residual(class, &r));
        if r.in_diso != r.exchangeable() {
            report.intersection_mismatches += 1;
        }
        if !class.contains(&r) {
            report.violations.push(ClosureViolation { pair, operation, report: r });
        }
    };
    for pair in 0..samples {
        let s1 = sample_member(class, family, d, &mut rng)?;
        let s2 = sample_member(class, family, d, &mut rng)?;
        for s in [&s1, &s2] {
            let r = classify(s);
            if r.in_diso != r.exchangeable() {
                report.intersection_mismatches += 1;
            }
        }
        record(pair, "compose".into(), &compose(&s1, &s2)?, &mut report);
        for p in MIXING_WEIGHTS {
            let mix = convex_combine(&[p, 1.0 - p], &[&s1, &s2])?;
            if p == 0.0 && mix.as_matrix().max_diff(s2.as_matrix()) > tol::ALGEBRA
                || p == 1.0 && mix.as_matrix().max_diff(s1.as_matrix()) > tol::ALGEBRA
            {
                report.degenerate_weights_exact = false;
            }
            record(pair, format!("convex({p})"), &mix, &mut report);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralHarnessReport {
    pub dim: usize,
    pub samples: usize,
    /// Inputs that were themselves in MISO*, so the second pair of relations applied.
    pub miso_star_inputs: usize,
    pub failures: usize,
}

/// Checks the structural relations on `samples` random superoperations from
/// both families plus `samples` sampled MISO* members.
pub fn structural_harness(d: usize, samples: usize, seed: u64) -> Result<StructuralHarnessReport> {
    let mut rng = rng_from_seed(seed);
    let mut out = StructuralHarnessReport { dim: d, samples: 0, miso_star_inputs: 0, failures: 0 };
    for k in 0..samples {
        let family = ConstructorFamily::ALL[k % 2];
        for s in [random_base(family, d, &mut rng), sample_member(SuperopClass::MisoStar, family, d, &mut rng)?] {
            let r = check_structural_relations(&s);
            out.samples += 1;
            if r.input_in_miso_star {
                out.miso_star_inputs += 1;
            }
            if !r.holds() {
                out.failures += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::is_incoherent_kraus_operator;

    #[test]
    fn generators_produce_verified_members() {
        let mut rng = rng_from_seed(1);
        for class in SuperopClass::ALL {
            for family in ConstructorFamily::ALL {
                for _ in 0..10 {
                    let s = sample_member(class, family, 2, &mut rng).unwrap();
                    assert!(class.contains(&classify(&s)));
                }
            }
        }
    }

    #[test]
    fn monomial_kraus_sets_are_incoherent_and_complete() {
        let mut rng = rng_from_seed(4);
        let ops = random_incoherent_choi_kraus(2, 3, &mut rng);
        assert!(ops.iter().all(is_incoherent_kraus_operator));
        let gram = ops.iter().fold(ComplexMatrix::zeros(4, 4), |acc, k| &acc + &(&k.adjoint() * k));
        assert!(gram.approx_eq(&ComplexMatrix::identity(4), 1e-14));
    }

    #[test]
    fn small_closure_runs_clean() {
        for class in SuperopClass::ALL {
            for family in ConstructorFamily::ALL {
                let r = closure_harness(class, family, 2, 10, 5).unwrap();
                assert!(r.passed(), "{class:?} {family:?}: {r:?}");
                assert_eq!(r.checks, 60);
            }
        }
    }

    #[test]
    fn random_sandwich_is_usually_outside_miso() {
        let mut rng = rng_from_seed(6);
        let outside = (0..10).filter(|_| !classify(&random_sandwich(2, &mut rng)).in_miso).count();
        assert!(outside >= 8);
    }

    #[test]
    fn structural_relations_hold_on_random_samples() {
        let r = structural_harness(2, 10, 3).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.miso_star_inputs >= 10);
    }
}

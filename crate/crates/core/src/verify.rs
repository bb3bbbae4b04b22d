//! Named verification suites run by `qopcoh verify`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::axioms::{verify_axioms, AxiomConfig, AxiomMeasure, Verdict};
use crate::channel::{is_incoherent_operation, QuantumOperation};
use crate::closure::{closure_harness, structural_harness, ConstructorFamily, SuperopClass};
use crate::coherence::{mf_pure, mf_single_qubit_unitary};
use crate::error::{Error, Result};
use crate::matrix::{haar_unitary, ComplexMatrix};
use crate::random::{random_cptp_with, rng_from_seed};
use crate::superop::{check_cptp_preservation, Superoperation};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    /// Sandwich and Kraus forms of the phase-out superoperation agree.
    PhaseOutEquivalence,
    /// Dephasing keeps CPTP channels CPTP.
    CptpPreservation,
    /// MISO, MISO* and DISO are closed under composition and mixing.
    ClassClosure,
    /// Single-qubit unitary measure: closed form and range.
    UnitaryRange,
    /// Measure axioms.
    Axioms,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::PhaseOutEquivalence, Suite::CptpPreservation, Suite::ClassClosure, Suite::UnitaryRange, Suite::Axioms, Suite::All];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PhaseOutEquivalence => "phase-out-forms",
            Suite::CptpPreservation => "cptp-preservation",
            Suite::ClassClosure => "class-closure",
            Suite::UnitaryRange => "unitary-range",
            Suite::Axioms => "axioms",
            Suite::All => "all",
        }
    }

    /// Alternative names accepted on the command line.
    pub fn alias(self) -> Option<&'static str> {
        match self {
            Suite::PhaseOutEquivalence => Some("theorem11"),
            Suite::CptpPreservation => Some("theorem12"),
            Suite::ClassClosure => Some("theorem21"),
            Suite::UnitaryRange => Some("corollary32"),
            _ => None,
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Suite::PhaseOutEquivalence => 100,
            Suite::CptpPreservation => 500,
            Suite::ClassClosure => 200,
            Suite::UnitaryRange => 1000,
            Suite::Axioms => 50,
            Suite::All => 200,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s || x.alias() == Some(s)).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            Error::Parse(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, metrics: &[(&str, f64)]) -> Self {
        Self {
            name: name.into(),
            passed,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub samples: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::PhaseOutEquivalence => phase_out_equivalence(samples, seed)?,
        Suite::CptpPreservation => cptp_preservation(samples, seed)?,
        Suite::ClassClosure => class_closure(samples, seed)?,
        Suite::UnitaryRange => unitary_range(samples, seed)?,
        Suite::Axioms => axioms(samples, seed)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in &Suite::ALL[..5] {
                let s = *s;
                for mut c in run_suite(s, samples, seed)?.checks {
                    c.name = format!("{}/{}", s.name(), c.name);
                    all.push(c);
                }
            }
            all
        }
    };
    Ok(SuiteReport { suite: suite.name().into(), samples, seed, passed: checks.iter().all(|c| c.passed), checks })
}

pub fn phase_out_equivalence(samples: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let mut rng = rng_from_seed(seed);
    for d in [2, 3] {
        let kraus = Superoperation::phase_out(d);
        let sandwich = Superoperation::phase_out_sandwich(d);
        let diff = kraus.as_matrix().max_diff(sandwich.as_matrix());
        out.push(CheckOutcome::new(format!("forms_agree_d{d}"), diff <= tol::ALGEBRA, &[("max_diff", diff)]));
        let t = kraus.as_matrix();
        let idem = (t * t).max_diff(t);
        out.push(CheckOutcome::new(format!("idempotent_d{d}"), idem <= tol::ALGEBRA, &[("max_diff", idem)]));
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let op = random_cptp_with(d, d, &mut rng);
            let c = kraus.apply(&op)?.choi();
            worst = worst.max(is_incoherent_operation(&c).max_off_diagonal);
        }
        out.push(CheckOutcome::new(
            format!("output_incoherent_d{d}"),
            worst <= tol::admission(),
            &[("samples", samples as f64), ("max_off_diagonal", worst)],
        ));
    }
    Ok(out)
}

pub fn cptp_preservation(samples: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let mut rng = rng_from_seed(seed);
    for (d, n) in [(2, samples), (3, (samples * 2).div_ceil(5))] {
        let mut failures = 0;
        let (mut neg, mut marg): (f64, f64) = (0.0, 0.0);
        for k in 0..n {
            let env = 1 + k % (d * d);
            let r = check_cptp_preservation(&random_cptp_with(d, env, &mut rng))?;
            if !r.preserved {
                failures += 1;
            }
            neg = neg.max(-r.output.min_eigenvalue);
            marg = marg.max(r.output.marginal_residual);
        }
        out.push(CheckOutcome::new(
            format!("dephased_cptp_d{d}"),
            failures == 0 && neg <= tol::admission() && marg <= tol::admission(),
            &[("samples", n as f64), ("failures", failures as f64), ("max_negativity", neg.max(0.0)), ("max_marginal_residual", marg)],
        ));
    }
    Ok(out)
}

pub fn class_closure(samples: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (k, class) in SuperopClass::ALL.into_iter().enumerate() {
        for (j, family) in ConstructorFamily::ALL.into_iter().enumerate() {
            let r = closure_harness(class, family, 2, samples, seed.wrapping_add((k * 2 + j) as u64))?;
            let family_name = match family {
                ConstructorFamily::Sandwich => "sandwich",
                ConstructorFamily::KrausOnChoi => "kraus_on_choi",
            };
            out.push(CheckOutcome::new(
                format!("closure_{}_{}", class.name(), family_name),
                r.passed(),
                &[
                    ("pairs", r.pairs as f64),
                    ("checks", r.checks as f64),
                    ("violations", r.violations.len() as f64),
                    ("intersection_mismatches", r.intersection_mismatches as f64),
                    ("max_residual", r.max_residual),
                ],
            ));
        }
    }
    let s = structural_harness(2, samples, seed.wrapping_add(100))?;
    out.push(CheckOutcome::new(
        "structural_relations",
        s.failures == 0,
        &[("samples", s.samples as f64), ("miso_star_inputs", s.miso_star_inputs as f64), ("failures", s.failures as f64)],
    ));
    Ok(out)
}

pub const UNITARY_MIN: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn unitary_max() -> f64 {
    3f64.sqrt() / 2.0
}

pub fn unitary_range(samples: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = rng_from_seed(seed);
    let mut worst_gap: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..samples {
        let u = haar_unitary(2, &mut rng);
        let closed = mf_single_qubit_unitary(&u)?.value;
        let pure = mf_pure(&QuantumOperation::unitary(u)?)?.value;
        worst_gap = worst_gap.max((closed - pure).abs());
        lo = lo.min(pure);
        hi = hi.max(pure);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let boundary = [
        ("identity", ComplexMatrix::identity(2), UNITARY_MIN),
        ("pauli_x", ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]), UNITARY_MIN),
        ("hadamard", ComplexMatrix::from_real(2, 2, &[h, h, h, -h]), unitary_max()),
    ];
    let mut out = vec![CheckOutcome::new(
        "closed_form_agrees",
        worst_gap <= 1e-10,
        &[("samples", samples as f64), ("max_abs_diff", worst_gap)],
    )];
    let mut endpoints_ok = true;
    let mut metrics = Vec::new();
    for (name, u, want) in &boundary {
        let v = mf_pure(&QuantumOperation::unitary(u.clone())?)?.value;
        lo = lo.min(v);
        hi = hi.max(v);
        endpoints_ok &= (v - want).abs() <= tol::ALGEBRA;
        metrics.push((*name, v));
    }
    let in_range = lo >= UNITARY_MIN - tol::admission() && hi <= unitary_max() + tol::admission();
    out.push(CheckOutcome::new("values_in_range", in_range, &[("min_observed", lo), ("max_observed", hi)]));
    out.push(CheckOutcome::new("endpoints_attained", endpoints_ok, &metrics));
    Ok(out)
}

pub fn axioms(samples: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let roof_samples = samples.min(20);
    for (measure, n, label) in [(AxiomMeasure::PureFamily, samples, "pure_family"), (AxiomMeasure::ConvexRoof, roof_samples, "convex_roof")] {
        let r = verify_axioms(&AxiomConfig::new(measure, 2, n, seed))?;
        for c in &r.checks {
            let name = format!("{label}_{}", serde_json::to_value(c.axiom).expect("enum").as_str().expect("string"));
            let mut o = CheckOutcome::new(
                name,
                c.failed == 0,
                &[
                    ("checks", c.checks as f64),
                    ("failed", c.failed as f64),
                    ("inconclusive", c.inconclusive as f64),
                    ("max_excess", c.max_excess),
                ],
            );
            if c.verdict() == Verdict::Inconclusive {
                o = o.with_note(format!("{} comparisons exceeded the bound only through the convex-roof estimate", c.inconclusive));
            }
            out.push(o);
        }
        if r.subnormalized > 0 {
            out.push(CheckOutcome::new(format!("{label}_subnormalized_outcomes"), true, &[("count", r.subnormalized as f64)]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            if let Some(a) = s.alias() {
                assert_eq!(a.parse::<Suite>().unwrap(), s);
            }
        }
        assert!("theorem99".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        for s in [Suite::PhaseOutEquivalence, Suite::CptpPreservation, Suite::ClassClosure, Suite::UnitaryRange, Suite::Axioms] {
            let r = run_suite(s, 10, 3).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(run_suite(Suite::UnitaryRange, 20, 8).unwrap(), run_suite(Suite::UnitaryRange, 20, 8).unwrap());
    }
}

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qopcoh_core::channel::{is_cptp, is_incoherent_operation, unitary_from_choi};
use qopcoh_core::closure::random_sandwich;
use qopcoh_core::coherence::{mf_pure, mf_single_qubit_unitary, MeasureKind, MeasureResult, Witness};
use qopcoh_core::convex_roof::mf_convex_roof;
use qopcoh_core::document::{matrix_to_json, report_value, OperationDocument, OperationKind, ReportDocument, SuperopDocument};
use qopcoh_core::random::{random_cptp, random_incoherent_cptp, random_unitary, rng_from_seed};
use qopcoh_core::superop::{classify, SuperopForm};
use qopcoh_core::verify::{run_suite, Suite};
use qopcoh_core::{tol, Error, QuantumOperation, Representation, Superoperation};

const MAX_RANDOM_DIM: usize = 4;

#[derive(Parser, Debug)]
#[command(name = "qopcoh", version, about = "Coherence analysis of quantum operations through their Choi states")]
struct Cli {
    /// Add wall_time_ms to reports (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert an operation document to another representation.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Test a predicate; exit code 0 if it holds, 1 otherwise.
    Check {
        input: PathBuf,
        #[arg(long, value_enum)]
        predicate: Predicate,
    },
    /// Apply the phase-out superoperation.
    Dephase {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify a superoperation document as MISO / MISO* / DISO.
    Classify { input: PathBuf },
    /// Fidelity coherence measure.
    Measure {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        /// Required for the convex-roof estimate.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a verification suite; exit code 0 iff every check passes.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: u64,
    },
    /// Generate a random operation or superoperation document.
    Random {
        #[arg(long, value_enum)]
        kind: RandomKind,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
        /// Environment dimension for `cptp` (default `d`).
        #[arg(long)]
        env: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Unitary,
    Kraus,
    Choi,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Predicate {
    Cptp,
    Incoherent,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Method {
    Auto,
    Pure,
    QubitClosedForm,
    ConvexRoof,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RandomKind {
    Unitary,
    Cptp,
    IncoherentCptp,
    Superop,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult = Result<Output, Failure>;

struct Output {
    text: String,
    success: bool,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_operation(path: &Path) -> Result<QuantumOperation, Failure> {
    Ok(OperationDocument::from_json(&read(path)?)?.to_operation()?)
}

fn emit(text: String, output: Option<&Path>) -> CmdResult {
    match output {
        Some(p) => {
            std::fs::write(p, format!("{text}\n")).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
            Ok(Output { text: String::new(), success: true })
        }
        None => Ok(Output { text, success: true }),
    }
}

fn cptp_metadata(doc: OperationDocument, op: &QuantumOperation) -> OperationDocument {
    doc.with_metadata("cptp", is_cptp(&op.choi()).cptp.to_string())
}

fn convert(input: &Path, to: Target, output: Option<&Path>) -> CmdResult {
    let op = load_operation(input)?;
    let d = op.dim();
    let doc = match to {
        Target::Unitary => {
            let u = match op.representation() {
                Representation::Unitary(u) => u.clone(),
                Representation::Kraus(ks) if ks.len() == 1 && ks[0].unitarity_residual() <= tol::admission() => ks[0].clone(),
                _ => unitary_from_choi(&op.choi())?,
            };
            OperationDocument::new(OperationKind::Unitary, d, &[u])
        }
        Target::Kraus => OperationDocument::new(OperationKind::Kraus, d, &op.kraus_operators()),
        Target::Choi => OperationDocument::new(OperationKind::Choi, d, &[op.choi().into_matrix()]),
    };
    emit(cptp_metadata(doc, &op).to_json(), output)
}

fn report(command: &[String], seed: Option<u64>, passed: bool, body: Value) -> CmdResult {
    let text = ReportDocument::new(command.to_vec(), seed, passed, body).to_json();
    Ok(Output { text, success: passed })
}

fn check(command: &[String], input: &Path, predicate: Predicate) -> CmdResult {
    let op = load_operation(input)?;
    let choi = op.choi();
    match predicate {
        Predicate::Cptp => {
            let r = is_cptp(&choi);
            report(
                command,
                None,
                r.cptp,
                json!({
                    "predicate": "cptp",
                    "verdict": r.cptp,
                    "min_eigenvalue": r.min_eigenvalue,
                    "marginal_residual": r.marginal_residual,
                    "tolerance": tol::admission(),
                }),
            )
        }
        Predicate::Incoherent => {
            let r = is_incoherent_operation(&choi);
            report(
                command,
                None,
                r.incoherent,
                json!({
                    "predicate": "incoherent",
                    "verdict": r.incoherent,
                    "max_off_diagonal": r.max_off_diagonal,
                    "tolerance": tol::admission(),
                }),
            )
        }
    }
}

fn dephase(input: &Path, output: Option<&Path>) -> CmdResult {
    let op = load_operation(input)?;
    let out = Superoperation::phase_out(op.dim()).apply(&op)?;
    emit(cptp_metadata(OperationDocument::from_operation(&out), &out).to_json(), output)
}

fn classify_cmd(command: &[String], input: &Path) -> CmdResult {
    let s = SuperopDocument::from_json(&read(input)?)?.to_superoperation()?;
    let r = classify(&s);
    report(
        command,
        None,
        true,
        json!({
            "dim": s.dim(),
            "form": s.form_name(),
            "in_miso": r.in_miso,
            "in_miso_star": r.in_miso_star,
            "in_diso": r.in_diso,
            "miso_residual": r.miso_residual,
            "miso_star_residual": r.miso_star_residual,
            "exchange_residual": r.exchange_residual,
            "tolerance": tol::admission(),
        }),
    )
}

fn kind_name(k: MeasureKind) -> &'static str {
    match k {
        MeasureKind::ExactPure => "exact_pure",
        MeasureKind::ClosedFormQubit => "closed_form_qubit",
        MeasureKind::ConvexRoofUpperBound => "convex_roof_upper_bound",
    }
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::BasisState { index, input, output } => {
            json!({ "type": "basis_state", "index": index, "input": input, "output": output })
        }
        Witness::Ensemble(e) => json!({
            "type": "ensemble",
            "weights": e.weights.iter().map(|w| report_value(*w)).collect::<Vec<_>>(),
            "choi_matrices": e.members.iter().map(|m| matrix_to_json(m.choi().matrix())).collect::<Vec<_>>(),
        }),
    }
}

fn qubit_unitary(op: &QuantumOperation) -> Option<qopcoh_core::ComplexMatrix> {
    match op.representation() {
        Representation::Unitary(u) if u.rows() == 2 => Some(u.clone()),
        _ => None,
    }
}

fn measure(command: &[String], input: &Path, method: Method, restarts: usize, max_iter: usize, seed: Option<u64>) -> CmdResult {
    let op = load_operation(input)?;
    let pure = op.choi().is_pure();
    let chosen = match method {
        Method::Auto if pure => Method::Pure,
        Method::Auto if qubit_unitary(&op).is_some() => Method::QubitClosedForm,
        Method::Auto => Method::ConvexRoof,
        m => m,
    };
    let result: MeasureResult = match chosen {
        Method::Pure => mf_pure(&op)?,
        Method::QubitClosedForm => {
            let u = qubit_unitary(&op)
                .ok_or_else(|| Error::MethodInapplicable("qubit-closed-form needs a 2x2 unitary document".into()))?;
            mf_single_qubit_unitary(&u)?
        }
        Method::ConvexRoof => {
            let seed = seed.ok_or_else(|| Failure::Usage("--seed is required for the convex-roof estimate".into()))?;
            mf_convex_roof(&op, restarts, max_iter, seed)?
        }
        Method::Auto => unreachable!(),
    };
    let method_name = match chosen {
        Method::Pure => "pure",
        Method::QubitClosedForm => "qubit-closed-form",
        _ => "convex-roof",
    };
    let mut body = json!({
        "method": method_name,
        "value": report_value(result.value),
        "kind": kind_name(result.kind),
        "exact": result.kind.is_exact(),
        "witness": witness_json(&result.witness),
    });
    if chosen == Method::ConvexRoof {
        body["restarts"] = json!(restarts);
        body["max_iter"] = json!(max_iter);
    }
    let seed = if chosen == Method::ConvexRoof { seed } else { None };
    report(command, seed, true, body)
}

fn verify(command: &[String], suite: Suite, samples: Option<usize>, seed: u64) -> CmdResult {
    let r = run_suite(suite, samples.unwrap_or(suite.default_samples()), seed)?;
    let passed = r.passed;
    report(command, Some(seed), passed, serde_json::to_value(&r).expect("plain data"))
}

fn random(kind: RandomKind, d: usize, seed: u64, env: Option<usize>, output: Option<&Path>) -> CmdResult {
    if d == 0 || d > MAX_RANDOM_DIM {
        return Err(Error::UnsupportedDim(d).into());
    }
    let seed_text = seed.to_string();
    let op_doc = |op: &QuantumOperation| OperationDocument::from_operation(op).with_metadata("seed", seed_text.clone()).to_json();
    let text = match kind {
        RandomKind::Unitary => op_doc(&random_unitary(d, seed)),
        RandomKind::Cptp => {
            let e = env.unwrap_or(d);
            if e == 0 {
                return Err(Failure::Usage("--env must be positive".into()));
            }
            op_doc(&random_cptp(d, e, seed))
        }
        RandomKind::IncoherentCptp => op_doc(&random_incoherent_cptp(d, seed)),
        RandomKind::Superop => {
            let s = random_sandwich(d, &mut rng_from_seed(seed));
            let SuperopForm::Sandwich { outer, inner } = s.form() else { unreachable!("random_sandwich builds a sandwich") };
            let mut doc = SuperopDocument::sandwich(outer, inner);
            doc.metadata.insert("seed".into(), seed_text.clone());
            doc.to_json()
        }
    };
    emit(text, output)
}

fn apply_tolerance_override() -> Result<(), Failure> {
    if let Ok(s) = std::env::var("QOPCOH_TOL") {
        let t: f64 = s.trim().parse().map_err(|_| Failure::Usage(format!("QOPCOH_TOL={s:?} is not a number")))?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::Usage(format!("QOPCOH_TOL must be positive, got {s}")));
        }
        tol::set_admission(t);
    }
    Ok(())
}

fn run(cli: Cli, argv: &[String]) -> CmdResult {
    apply_tolerance_override()?;
    match cli.command {
        Command::Convert { input, to, output } => convert(&input, to, output.as_deref()),
        Command::Check { input, predicate } => check(argv, &input, predicate),
        Command::Dephase { input, output } => dephase(&input, output.as_deref()),
        Command::Classify { input } => classify_cmd(argv, &input),
        Command::Measure { input, method, restarts, max_iter, seed } => measure(argv, &input, method, restarts, max_iter, seed),
        Command::Verify { suite, samples, seed } => verify(argv, suite, samples, seed),
        Command::Random { kind, d, seed, env, output } => random(kind, d, seed, env, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let timing = cli.timing;
    let start = Instant::now();
    match run(cli, &argv) {
        Ok(out) => {
            if !out.text.is_empty() {
                let mut text = out.text;
                if timing {
                    if let Ok(mut v) = serde_json::from_str::<Value>(&text) {
                        v["wall_time_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
                        text = serde_json::to_string_pretty(&v).expect("plain data");
                    }
                }
                let _ = writeln!(std::io::stdout(), "{text}");
            }
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("qopcoh: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("qopcoh: {e}");
            ExitCode::from(2)
        }
    }
}

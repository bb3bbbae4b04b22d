//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export has a plain Rust counterpart so it can be tested natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use qopcoh_core::channel::{is_cptp, is_incoherent_operation, ChoiState};
use qopcoh_core::coherence::{max_coherent_operation, mf_pure, mf_single_qubit_unitary, EulerParams, MeasureKind};
use qopcoh_core::convex_roof::mf_convex_roof;
use qopcoh_core::QuantumOperation;

/// `(gamma, M_f)` pairs for `U = R_y(gamma)`, `gamma` on an even grid over `[0, pi]`.
pub fn measure_curve(points: usize) -> Vec<(f64, f64)> {
    let n = points.max(2);
    (0..n)
        .map(|k| {
            let gamma = std::f64::consts::PI * k as f64 / (n - 1) as f64;
            let u = EulerParams { alpha: 0.0, beta: 0.0, gamma, delta: 0.0 }.unitary();
            (gamma, mf_single_qubit_unitary(&u).expect("rotation is unitary").value)
        })
        .collect()
}

/// Flattened `[gamma_0, m_0, gamma_1, m_1, ...]`.
#[wasm_bindgen(js_name = measureCurve)]
pub fn measure_curve_js(points: usize) -> Vec<f64> {
    measure_curve(points).into_iter().flat_map(|(g, m)| [g, m]).collect()
}

/// Measure, Choi matrix and CPTP diagnostics of the maximally coherent
/// qubit operation with phases `theta_{i alpha}`, as JSON.
pub fn max_coherent_summary(t00: f64, t01: f64, t10: f64, t11: f64) -> serde_json::Value {
    let op = max_coherent_operation(2, &[t00, t01, t10, t11]).expect("d = 2 with four phases");
    let choi = op.choi();
    let cptp = is_cptp(&choi);
    let m = choi.matrix();
    let entries: Vec<Vec<[f64; 2]>> = m.to_rows().into_iter().map(|r| r.into_iter().map(|z| [z.re, z.im]).collect()).collect();
    json!({
        "value": mf_pure(&op).expect("single Kraus operator gives a pure Choi state").value,
        "choi": entries,
        "cptp": cptp.cptp,
        "marginal_residual": cptp.marginal_residual,
        "max_off_diagonal": is_incoherent_operation(&choi).max_off_diagonal,
    })
}

#[wasm_bindgen(js_name = maxCoherentSummary)]
pub fn max_coherent_summary_js(t00: f64, t01: f64, t10: f64, t11: f64) -> String {
    max_coherent_summary(t00, t01, t10, t11).to_string()
}

/// Convex-roof estimate for `p * identity + (1 - p) * dephasing`.
pub fn dephasing_mixture_roof(p: f64, restarts: usize, seed: u64) -> serde_json::Value {
    let p = p.clamp(0.0, 1.0);
    let a = QuantumOperation::identity(2).choi();
    let b = QuantumOperation::dephasing(2).choi();
    let mix = QuantumOperation::from_choi(ChoiState::mixture(&[p, 1.0 - p], &[&a, &b]).expect("weights in [0, 1]"));
    let r = mf_convex_roof(&mix, restarts.max(1), 2000, seed).expect("mixture is a valid Choi state");
    json!({
        "p": p,
        "value": r.value,
        "exact": r.kind.is_exact(),
        "kind": match r.kind {
            MeasureKind::ExactPure => "exact_pure",
            MeasureKind::ClosedFormQubit => "closed_form_qubit",
            MeasureKind::ConvexRoofUpperBound => "convex_roof_upper_bound",
        },
        // Average over the feasible ensemble {p: identity, (1-p)/2: |00>, (1-p)/2: |11>}.
        "mixture_average": p * std::f64::consts::FRAC_1_SQRT_2,
    })
}

#[wasm_bindgen(js_name = dephasingMixtureRoof)]
pub fn dephasing_mixture_roof_js(p: f64, restarts: usize, seed: u64) -> String {
    dephasing_mixture_roof(p, restarts, seed).to_string()
}

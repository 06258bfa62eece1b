//! WebAssembly bindings behind `www/index.html`.
//!
//! Every export returns a JSON string; errors come back as a thrown string.
//! The same functions are plain Rust, so they are tested natively.

use usc_qec::dynamics::{gate_fidelity, CavityFieldSpec, RabiSystem};
use usc_qec::graphcode::{verify_five_qubit, verify_steane, GateSource, GraphSpec};
use usc_qec::noise::{montecarlo_fidelity, CodeKind, NoiseModel};
use wasm_bindgen::prelude::*;

/// Largest Fock cutoff accepted from the page; keeps one call under a few seconds.
pub const MAX_WEB_CUTOFF: usize = 12;
/// Upper bound on Monte Carlo trials per call.
pub const MAX_WEB_TRIALS: usize = 20_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn cavity(kind: &str, value: f64) -> Result<CavityFieldSpec, String> {
    match kind {
        "vacuum" => Ok(CavityFieldSpec::Vacuum),
        "thermal" => Ok(CavityFieldSpec::Thermal { temp_mk: value }),
        "coherent" => Ok(CavityFieldSpec::coherent(value)),
        other => Err(format!("unknown cavity kind {other:?}")),
    }
}

/// Controlled-phase fidelity of the two-qubit, two-mode gate at transversal
/// weight `cx`. `value` is the temperature in mK (thermal) or the amplitude
/// (coherent) and is ignored for vacuum.
#[wasm_bindgen(js_name = gateFidelity)]
pub fn gate_fidelity_json(cx: f64, kind: &str, value: f64, cutoff: usize) -> Result<String, String> {
    if cutoff == 0 || cutoff > MAX_WEB_CUTOFF {
        return Err(format!("cutoff must be in 1..={MAX_WEB_CUTOFF}"));
    }
    let omega = 2.0 * std::f64::consts::PI * 5.0;
    let system =
        RabiSystem::symmetric(2, 2, omega, omega / 4.0, 1.0 / (4.0 * 2f64.sqrt()), 0.0, cutoff).map_err(err)?;
    let spec = cavity(kind, value)?;
    let f = gate_fidelity(&system, &spec, cx).map_err(err)?;
    Ok(serde_json::json!({ "cx": cx, "cavity": spec.label(), "cutoff": cutoff, "fidelity": f }).to_string())
}

/// Trajectory estimate of the logical-state fidelity for `code`
/// (`five-qubit`, `steane`, `pair` or `path3`).
#[wasm_bindgen(js_name = monteCarlo)]
pub fn montecarlo_json(code: &str, p1: f64, p2: f64, p_m: f64, trials: usize, seed: u64) -> Result<String, String> {
    if trials > MAX_WEB_TRIALS {
        return Err(format!("at most {MAX_WEB_TRIALS} trials"));
    }
    let kind: CodeKind = code.parse().map_err(err)?;
    let noise = NoiseModel::new(p1, p2, p_m).map_err(err)?;
    let est = montecarlo_fidelity(kind, &noise, trials, seed).map_err(err)?;
    serde_json::to_string(&est).map_err(err)
}

/// Verification report for `five-qubit` or `steane`. For the Steane code an
/// optional edge list (same format as the CLI's `--graph`) replaces the
/// default ten-vertex graph when non-empty.
#[wasm_bindgen(js_name = verifyCode)]
pub fn verify_code_json(code: &str, edge_list: &str) -> Result<String, String> {
    match code.parse().map_err(err)? {
        CodeKind::FiveQubit => {
            let report = verify_five_qubit(&GateSource::Ideal).map_err(err)?;
            with_passed(&report, report.passed())
        }
        CodeKind::Steane => {
            let graph = if edge_list.trim().is_empty() {
                GraphSpec::steane_ten()
            } else {
                GraphSpec::parse_edge_list(edge_list).map_err(err)?
            };
            let report = verify_steane(&graph).map_err(err)?;
            with_passed(&report, report.passed())
        }
        other => Err(format!("no verification report for {other}")),
    }
}

fn with_passed(report: &impl serde::Serialize, passed: bool) -> Result<String, String> {
    let mut value = serde_json::to_value(report).map_err(err)?;
    value["passed"] = passed.into();
    Ok(value.to_string())
}

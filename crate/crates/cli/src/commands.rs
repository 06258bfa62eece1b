use std::path::Path;

use serde::Serialize;
use usc_qec::dynamics::{
    adiabatic_initialize, gate_fidelity_sweep, ultrafast_cz, CavityFieldSpec, GateSchedule, RabiSystem, RampSpec,
};
use usc_qec::fluxqubit::{sweep_bias, BiasPoint, ChargeBasisSpec, FluxQubitParams};
use usc_qec::graphcode::{verify_five_qubit, verify_steane, GateSource, GraphSpec};
use usc_qec::noise::{
    channel_fidelity, montecarlo_circuit, CodeKind, NoiseCircuit, NoiseModel, SimulationOptions,
};
use usc_qec::resonator::{degenerate_manifold, mode_equation_roots, ResonatorParams};

use crate::config::*;
use crate::output::{num, OutputDir};
use crate::CliError;

pub fn qubit_sweep(cfg: &QubitSweepConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let params = FluxQubitParams::new(cfg.e_j_ghz, cfg.e_j_ghz / cfg.e_c_ratio, 0.8, cfg.beta, cfg.gamma)?;
    let bias = BiasPoint::new(0.5, cfg.f2, cfg.f3);
    let basis = ChargeBasisSpec::new(cfg.n_max)?;
    let alphas = cfg.alpha.values();
    let f1s = cfg.f1.values();
    let surface = sweep_bias(&params, &bias, &basis, cfg.cutoff_policy, &alphas, &f1s)?;
    let header: Vec<String> =
        ["alpha", "f1", "omega_q_GHz", "c0", "cx", "cy", "cz", "cx_eff", "cz_eff"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = surface
        .points
        .iter()
        .map(|p| {
            let c = &p.coefficients;
            vec![
                num(p.alpha),
                num(p.f1),
                num(p.omega_q / (2.0 * std::f64::consts::PI)),
                num(c.c0),
                num(c.cx),
                num(c.cy),
                num(c.cz),
                num(p.effective.cx),
                num(p.effective.cz),
            ]
        })
        .collect();
    out.write_csv("qubit_sweep.csv", &header, &rows)?;
    let max_cx = surface.points.iter().map(|p| p.effective.cx.abs()).fold(0.0, f64::max);
    let max_cz = surface.points.iter().map(|p| p.effective.cz.abs()).fold(0.0, f64::max);
    Ok(format!("{} points, max |cx_eff| = {max_cx:.6}, max |cz_eff| = {max_cz:.6}", rows.len()))
}

fn resonator_params(cfg: &ModesConfig) -> ResonatorParams {
    let mut p = ResonatorParams::synthetic(cfg.n);
    p.gamma = cfg.gamma;
    p.beta = cfg.beta;
    p = p.tuned_to_manifold();
    if let Some(x) = cfg.length_m {
        p.length_m = x;
    }
    if let Some(x) = cfg.l_per_m {
        p.l_per_m = x;
    }
    if let Some(x) = cfg.c_per_m {
        p.c_per_m = x;
    }
    if let Some(x) = cfg.l_j_h {
        p.l_j = x;
    }
    p.c_j = match cfg.c_j_f {
        Some(x) => x,
        None => p.tuned_to_manifold().c_j,
    };
    p
}

pub fn modes(cfg: &ModesConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let params = resonator_params(cfg);
    let set = mode_equation_roots(&params, cfg.max_freq_ghz)?;
    let mut header: Vec<String> = ["index", "freq_GHz", "mass"].map(String::from).to_vec();
    header.extend((1..=cfg.n).map(|j| format!("flux_drop_j{j}")));
    let rows: Vec<Vec<String>> = set
        .modes
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mut r = vec![k.to_string(), num(m.frequency_ghz()), num(set.effective_masses[k])];
            r.extend(set.flux_drops[k].iter().map(|d| num(*d)));
            r
        })
        .collect();
    out.write_csv("modes.csv", &header, &rows)?;
    #[derive(Serialize)]
    struct ModesReport {
        params: ResonatorParams,
        manifold: Option<usc_qec::resonator::ManifoldSpec>,
        manifold_error: Option<String>,
    }
    let (manifold, manifold_error) = match degenerate_manifold(&params, cfg.degeneracy_window) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = match &manifold {
        Some(m) => format!(
            "{} modes, {} degenerate at {:.6} GHz ({} coupled)",
            rows.len(),
            m.mode_count,
            m.degenerate_frequency / (2.0 * std::f64::consts::PI),
            m.coupled_mode_count
        ),
        None => format!("{} modes, no degenerate manifold", rows.len()),
    };
    out.write_json("modes.json", &ModesReport { params, manifold, manifold_error })?;
    Ok(summary)
}

pub fn gate_fidelity(cfg: &GateFidelityConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let omega = omega_rad_per_ns(cfg.omega_ghz);
    let cx_grid = cfg.cx.values();
    if cx_grid.is_empty() {
        return Err(CliError::Config("cx grid is empty".into()));
    }
    let system =
        RabiSystem::symmetric(2, cfg.modes, omega, cfg.omega_q_over_omega * omega, cfg.g_over_omega, 0.0, cfg.cutoff)?;
    let cavities: Vec<CavityFieldSpec> = cfg.cavity.iter().map(|&c| c.into()).collect();
    let rows = gate_fidelity_sweep(&system, &cavities, &cx_grid)?;
    let header: Vec<String> = ["cx", "cavity_kind", "fidelity"].map(String::from).to_vec();
    let table: Vec<Vec<String>> = rows.iter().map(|r| vec![num(r.cx), r.cavity.label(), num(r.fidelity)]).collect();
    out.write_csv("gate_fidelity.csv", &header, &table)?;
    let worst = rows.iter().map(|r| r.fidelity).fold(1.0, f64::min);
    Ok(format!("{} rows, lowest fidelity {worst:.6}", table.len()))
}

pub fn adiabatic(cfg: &AdiabaticConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let omega = omega_rad_per_ns(cfg.omega_ghz);
    let system = RabiSystem::symmetric(
        cfg.qubits,
        cfg.modes,
        omega,
        cfg.omega_q_over_omega * omega,
        cfg.ramp.g0_over_omega,
        cfg.cx,
        cfg.cutoff,
    )?;
    let ramp = RampSpec {
        g0: cfg.ramp.g0_over_omega * omega,
        total_time: cfg.ramp.t_over_omega / omega,
        shape: cfg.ramp.shape,
        steps: cfg.ramp.steps,
        check_halving: cfg.ramp.check_halving,
    };
    let trace = adiabatic_initialize(&system, &ramp)?;
    let header: Vec<String> = ["t_over_T", "fidelity"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = trace
        .times
        .iter()
        .zip(&trace.fidelity)
        .map(|(t, f)| vec![num(t / ramp.total_time), num(*f)])
        .collect();
    out.write_csv("adiabatic.csv", &header, &rows)?;
    out.write_json("adiabatic.json", &trace_summary(&trace))?;
    Ok(format!(
        "final fidelity {:.9}, halving change {}",
        trace.final_fidelity,
        trace.halving_change.map_or("not checked".into(), |c| format!("{c:.2e}"))
    ))
}

fn trace_summary(trace: &usc_qec::dynamics::AdiabaticTrace) -> serde_json::Value {
    serde_json::json!({
        "final_fidelity": trace.final_fidelity,
        "halving_change": trace.halving_change,
        "steps": trace.times.len() - 1,
    })
}

fn simulated_gate() -> Result<GateSource, CliError> {
    let omega = omega_rad_per_ns(5.0);
    let schedule = GateSchedule::symmetric((0, 1), 1, 2);
    let system = RabiSystem::symmetric(2, 2, omega, omega / 4.0, schedule.kappa_i, 0.0, 8)?;
    let cz = ultrafast_cz(&schedule, &system)?;
    Ok(GateSource::phase_corrected(&cz.unitary, 1e-9)?)
}

/// Returns the summary and whether verification passed.
pub fn code(cfg: &CodeConfig, out: &mut OutputDir) -> Result<(String, bool), CliError> {
    let gate = match cfg.gate {
        GateChoice::Ideal => GateSource::Ideal,
        GateChoice::Simulated => simulated_gate()?,
    };
    match cfg.code {
        CodeKind::FiveQubit => {
            let report = verify_five_qubit(&gate)?;
            out.write_json("code_five-qubit.json", &report)?;
            let ok = report.passed();
            Ok((format!("five-qubit: distance {:?}, checks passed: {ok}", report.distance), ok))
        }
        CodeKind::Steane => {
            let graph = match &cfg.graph {
                Some(path) => GraphSpec::parse_edge_list(&std::fs::read_to_string(Path::new(path))?)?,
                None => GraphSpec::steane_ten(),
            };
            let report = verify_steane(&graph)?;
            out.write_json("code_steane.json", &report)?;
            let ok = report.passed();
            Ok((
                format!(
                    "steane: distance {:?}, {} complementations, checks passed: {ok}",
                    report.distance,
                    report.lc_sequence.len()
                ),
                ok,
            ))
        }
        other => Err(CliError::Config(format!("code {other} has no verification report"))),
    }
}

pub fn montecarlo(cfg: &MontecarloConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let circuit = NoiseCircuit::for_code(cfg.code);
    let trials = cfg.resolved_trials();
    let options =
        SimulationOptions { mode: cfg.measurement, backend: cfg.backend, noisy_corrections: cfg.noisy_corrections };
    let (p1s, p2s) = (cfg.p1_grid.values(), cfg.p2_grid.values());
    if p1s.is_empty() || p2s.is_empty() {
        return Err(CliError::Config("noise grids must be non-empty".into()));
    }
    let header: Vec<String> = ["p1", "p2", "mean", "std_error", "trials", "acceptance"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut best = 0.0f64;
    for &p1 in &p1s {
        for &p2 in &p2s {
            let noise = NoiseModel::new(p1, p2, cfg.p_m)?;
            let row = match cfg.mode {
                EstimatorMode::Trajectory => {
                    let e = montecarlo_circuit(&circuit, &noise, trials, cfg.seed, &options)?;
                    best = best.max(e.mean);
                    vec![num(p1), num(p2), num(e.mean), num(e.std_error), e.trials.to_string(), num(e.acceptance_rate())]
                }
                EstimatorMode::Channel => {
                    let c = channel_fidelity(&circuit, &noise, &options)?;
                    best = best.max(c.fidelity);
                    vec![num(p1), num(p2), num(c.fidelity), num(0.0), "0".into(), num(c.acceptance)]
                }
            };
            rows.push(row);
        }
    }
    out.write_csv(&format!("montecarlo_{}.csv", cfg.code), &header, &rows)?;
    Ok(format!("{} grid points, highest fidelity {best:.4}", rows.len()))
}

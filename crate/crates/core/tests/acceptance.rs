//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run alone with `cargo test -p usc-qec --test acceptance`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use usc_qec::dynamics::*;
use usc_qec::fluxqubit::*;
use usc_qec::graphcode::*;
use usc_qec::linalg::C64;
use usc_qec::noise::*;
use usc_qec::resonator::*;

const OMEGA: f64 = 2.0 * PI * 5.0;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kappa() -> f64 {
    1.0 / (4.0 * 2f64.sqrt())
}

fn gate_operating_point() -> Outcome {
    let schedule = GateSchedule::symmetric((0, 1), 1, 2);
    let exact = 1.0 / (4.0 * 2f64.sqrt());
    let t = schedule.gate_time(OMEGA);
    schedule.check_conditions(2).map_err(|e| e.to_string())?;
    let err = (schedule.kappa_i - exact).abs().max((schedule.kappa_j - exact).abs());
    check(err <= 1e-12 && (t - 0.2).abs() < 1e-12, format!("kappa = {:.12}, |error| = {err:.1e}, T = {t} ns", schedule.kappa_i))
}

fn analytic_numeric_equivalence() -> Outcome {
    let sys = RabiSystem::symmetric(2, 2, OMEGA, OMEGA / 4.0, kappa(), 0.0, 12).map_err(|e| e.to_string())?;
    let prop = Propagator::from_system(&sys).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t = rng.gen_range(0.0..2.0 * PI / OMEGA);
        let (a, b) = (rng.gen_range(0.0..1.0f64).sqrt(), rng.gen_range(0.0..2.0 * PI));
        let qubit = [C64::new(a, 0.0), C64::from_polar((1.0 - a * a).sqrt(), b)];
        let st = QuantumState::qubits_with_vacuum(sys.layout(), qubit).map_err(|e| e.to_string())?;
        let x = evolve_analytic(&sys, &st, t).map_err(|e| e.to_string())?;
        let y = prop.evolve(&st, t);
        let (StateRepr::Pure(u), StateRepr::Pure(v)) = (&x.repr, &y.repr) else {
            return Err("expected pure states".into());
        };
        worst = worst.max(1.0 - u.dotc(v).norm_sqr());
    }
    check(worst < 1e-8, format!("max infidelity over 20 times = {worst:.2e}"))
}

fn cz_exactness() -> Outcome {
    let sys = RabiSystem::symmetric(2, 2, OMEGA, OMEGA / 4.0, kappa(), 0.0, 15).map_err(|e| e.to_string())?;
    let thermal = CavityFieldSpec::Thermal { temp_mk: 15.0 };
    let rows = gate_fidelity_sweep(&sys, &[CavityFieldSpec::Vacuum, thermal], &[0.0]).map_err(|e| e.to_string())?;
    let (vac, th) = (rows[0].fidelity, rows[1].fidelity);
    check(
        vac >= 1.0 - 1e-6 && (vac - th).abs() <= 1e-3,
        format!("vacuum F = {vac:.12}, thermal 15 mK F = {th:.12}"),
    )
}

fn coherent_ordering() -> Outcome {
    let sys = RabiSystem::symmetric(2, 2, OMEGA, OMEGA / 4.0, kappa(), 0.0, 15).map_err(|e| e.to_string())?;
    let fields = [
        CavityFieldSpec::coherent(1.0),
        CavityFieldSpec::coherent(0.5),
        CavityFieldSpec::coherent(0.25),
        CavityFieldSpec::Vacuum,
    ];
    let cxs = [0.05, 0.1, 0.2, 0.3];
    let rows = gate_fidelity_sweep(&sys, &fields, &cxs).map_err(|e| e.to_string())?;
    let mut min_margin = f64::INFINITY;
    let mut table = Vec::new();
    for (k, cx) in cxs.iter().enumerate() {
        let f: Vec<f64> = rows[4 * k..4 * k + 4].iter().map(|r| r.fidelity).collect();
        for w in f.windows(2) {
            min_margin = min_margin.min(w[0] - w[1]);
        }
        table.push(format!("cx={cx}: {:.4}/{:.4}/{:.4}/{:.4}", f[0], f[1], f[2], f[3]));
    }
    check(min_margin >= -1e-4, format!("min margin {min_margin:.2e}; {}", table.join(", ")))
}

fn adiabatic_initialization() -> Outcome {
    let sys = RabiSystem::symmetric(2, 2, OMEGA, OMEGA, kappa(), 1.0, 6).map_err(|e| e.to_string())?;
    let ramp = RampSpec {
        g0: kappa() * OMEGA,
        total_time: 250.0 / OMEGA,
        shape: RampShape::LinearInG,
        steps: 500,
        check_halving: true,
    };
    let trace = adiabatic_initialize(&sys, &ramp).map_err(|e| e.to_string())?;
    let halving = trace.halving_change.ok_or("halving check did not run")?;
    check(
        trace.final_fidelity >= 0.99 && halving < 1e-6,
        format!("final F = {:.9}, step-halving change = {halving:.1e}", trace.final_fidelity),
    )
}

/// Smallest weight of a Pauli that commutes with the group without being in
/// it, searched up to `w_max` by listing every support and letter choice.
fn distance_oracle(code: &StabilizerTableau, w_max: usize) -> Option<usize> {
    let n = code.num_qubits();
    let mut best = None;
    for support in 1u32..(1 << n) {
        let w = support.count_ones() as usize;
        if w > w_max || best.is_some_and(|b| w >= b) {
            continue;
        }
        let sites: Vec<usize> = (0..n).filter(|q| support >> q & 1 == 1).collect();
        for choice in 0..3usize.pow(w as u32) {
            let mut letters = vec![Letter::I; n];
            let mut c = choice;
            for &q in &sites {
                letters[q] = Letter::NONTRIVIAL[c % 3];
                c /= 3;
            }
            let p = PauliString::from_letters(&letters);
            if code.commutes_with_all(&p) && code.membership(&p).is_none() {
                best = Some(w);
                break;
            }
        }
    }
    best
}

fn five_qubit() -> Outcome {
    let reference = StabilizerTableau::from_strs(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).map_err(|e| e.to_string())?;
    let schedule = GateSchedule::symmetric((0, 1), 1, 2);
    let sys = RabiSystem::symmetric(2, 2, OMEGA, OMEGA / 4.0, schedule.kappa_i, 0.0, 8).map_err(|e| e.to_string())?;
    let cz = ultrafast_cz(&schedule, &sys).map_err(|e| e.to_string())?;
    let simulated = GateSource::phase_corrected(&cz.unitary, 1e-9).map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    let mut ok = true;
    for (label, gate) in [("ideal", GateSource::Ideal), ("simulated", simulated)] {
        let r = verify_five_qubit(&gate).map_err(|e| e.to_string())?;
        let worst = r.expectations.iter().map(|e| (e - 1.0).abs()).fold(0.0, f64::max);
        let code = StabilizerTableau::new(5, r.code_generators.clone()).map_err(|e| e.to_string())?;
        let same = code.same_group(&reference);
        ok &= worst <= 1e-9 && same && r.passed() && r.distance == Distance::Exact(3);
        details.push(format!("{label}: max|<K>-1| = {worst:.1e}, group match {same}, distance {:?}", r.distance));
    }
    let oracle = distance_oracle(&reference, 3);
    ok &= oracle == Some(3);
    details.push(format!("enumerated distance {oracle:?}"));
    check(ok, details.join("; "))
}

fn steane() -> Outcome {
    let r = verify_steane(&GraphSpec::steane_ten()).map_err(|e| e.to_string())?;
    let code = StabilizerTableau::new(7, r.code_generators.clone()).map_err(|e| e.to_string())?;
    let hamming: [&[usize]; 3] = [&[3, 4, 5, 6], &[1, 2, 5, 6], &[0, 2, 4, 6]];
    let mut gens: Vec<PauliString> = hamming.iter().map(|s| PauliString::x_on(7, s)).collect();
    gens.extend(hamming.iter().map(|s| PauliString::z_on(7, s)));
    let reference = StabilizerTableau::new(7, gens).map_err(|e| e.to_string())?;
    let same = code.same_group(&reference);
    // The measured seven-qubit state must be stabilized by every Hamming
    // check once the local Cliffords are undone.
    let reduced = StabilizerTableau::new(7, r.reduced_generators.clone()).map_err(|e| e.to_string())?;
    let undo = r.local_cliffords.inverse();
    let stabilized = reference.generators().iter().all(|g| reduced.contains(&undo.apply(g)));
    let oracle = distance_oracle(&code, 3);
    check(
        r.passed() && same && stabilized && r.logical_qubits == 1 && oracle == Some(3),
        format!(
            "[[7,{}]] with {} complementations, measured state carries the Steane checks: {stabilized}, dense min <S> = {:.12}, distance {:?} (enumerated {oracle:?})",
            r.logical_qubits,
            r.lc_sequence.len(),
            r.dense_min_expectation,
            r.distance
        ),
    )
}

fn within(a: &FidelityEstimate, b: &FidelityEstimate, sigmas: f64) -> bool {
    a.mean <= b.mean + sigmas * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt() + 1e-12
}

fn montecarlo() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    for code in [CodeKind::FiveQubit, CodeKind::Steane] {
        let e = montecarlo_fidelity(code, &NoiseModel::noiseless(), 500, 1).map_err(|e| e.to_string())?;
        ok &= e.mean == 1.0 && e.std_error == 0.0;
    }
    notes.push("noiseless F = 1, sigma = 0".to_string());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_z: f64 = 0.0;
    for _ in 0..10 {
        let noise = NoiseModel::new(rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1))
            .map_err(|e| e.to_string())?;
        for code in [CodeKind::Pair, CodeKind::Path3] {
            let circuit = NoiseCircuit::for_code(code);
            for mode in [MeasurementMode::Corrected, MeasurementMode::Postselect] {
                let opts = SimulationOptions { mode, ..Default::default() };
                let mc = montecarlo_circuit(&circuit, &noise, 4000, 17, &opts).map_err(|e| e.to_string())?;
                let exact = channel_fidelity(&circuit, &noise, &opts).map_err(|e| e.to_string())?;
                let z = (mc.mean - exact.fidelity).abs() / mc.std_error.max(1e-300);
                ok &= (mc.mean - exact.fidelity).abs() <= 3.0 * mc.std_error + 1e-12;
                worst_z = worst_z.max(z);
            }
        }
    }
    notes.push(format!("toy MC vs channel max |z| = {worst_z:.2}"));

    let grid: Vec<f64> = (0..6).map(|k| 0.01 * k as f64).collect();
    for (code, trials) in [(CodeKind::FiveQubit, 5000), (CodeKind::Steane, 1000)] {
        let mut surface = Vec::new();
        for &p1 in &grid {
            let mut row = Vec::new();
            for &p2 in &grid {
                let noise = NoiseModel::new(p1, p2, 0.01).map_err(|e| e.to_string())?;
                row.push(montecarlo_fidelity(code, &noise, trials, 1).map_err(|e| e.to_string())?);
            }
            surface.push(row);
        }
        let mut violations = 0;
        for i in 0..6 {
            for j in 0..6 {
                if i + 1 < 6 && !within(&surface[i + 1][j], &surface[i][j], 3.0) {
                    violations += 1;
                }
                if j + 1 < 6 && !within(&surface[i][j + 1], &surface[i][j], 3.0) {
                    violations += 1;
                }
            }
        }
        ok &= violations == 0;
        notes.push(format!(
            "{code} surface: F(0,0) = {:.3}, F(0.05,0.05) = {:.3}, monotonicity violations {violations}",
            surface[0][0].mean, surface[5][5].mean
        ));
    }

    let low = montecarlo_fidelity(CodeKind::FiveQubit, &NoiseModel::new(0.005, 0.005, 0.01).unwrap(), 5000, 1)
        .map_err(|e| e.to_string())?;
    ok &= low.mean >= 0.75;
    notes.push(format!("five-qubit F(0.005, 0.005) = {:.3}", low.mean));
    check(ok, notes.join("; "))
}

fn resonator() -> Outcome {
    let bare = ResonatorParams::synthetic(0);
    let set = mode_equation_roots(&bare, 22.0).map_err(|e| e.to_string())?;
    let v = 1.0 / (bare.l_per_m * bare.c_per_m).sqrt();
    let mut harmonic_err: f64 = 0.0;
    for (m, mode) in set.modes.iter().enumerate() {
        let expected = (m + 1) as f64 * PI * v / bare.length_m * 1e-9;
        harmonic_err = harmonic_err.max(((mode.omega - expected) / expected).abs());
    }

    let p = ResonatorParams::synthetic(5);
    let tuning = ((p.shunt_resonance() - p.manifold_frequency()) / p.manifold_frequency()).abs();
    let window = 1e-8;
    let manifold = degenerate_manifold(&p, window).map_err(|e| e.to_string())?;
    let sines: Vec<f64> = (1..=5).map(|j| (PI * j as f64 / 6.0).sin()).collect();
    let norm = sines.iter().map(|s| s * s).sum::<f64>().sqrt();
    let profile_err = manifold
        .coupling_profile
        .iter()
        .zip(&sines)
        .map(|(a, s)| (a - s / norm).abs())
        .fold(0.0, f64::max);

    // The flux drops of the lowest band mode at the manifold carry the same shape.
    let modes = mode_equation_roots(&p, 1.01 * manifold.degenerate_frequency / (2.0 * PI)).map_err(|e| e.to_string())?;
    let band = modes
        .modes
        .iter()
        .find(|m| m.family == ModeFamily::Band { p: 1 } && (m.omega / manifold.degenerate_frequency - 1.0).abs() < 1e-6)
        .ok_or("no band-1 mode at the manifold")?;
    let drops = band.flux_drops();
    let scale = drops[2] / (sines[2] / norm);
    let drop_err = drops.iter().zip(&sines).map(|(d, s)| (d / scale - s / norm).abs()).fold(0.0, f64::max);

    check(
        set.modes.len() >= 3
            && harmonic_err < 1e-10
            && tuning < 1e-12
            && manifold.spread < window
            && profile_err < 1e-10
            && drop_err < 1e-10,
        format!(
            "harmonics rel err {harmonic_err:.1e}; {} modes within spread {:.1e}; profile err {profile_err:.1e}; flux-drop shape err {drop_err:.1e}",
            manifold.mode_count, manifold.spread
        ),
    )
}

fn flux_qubit() -> Outcome {
    let params = FluxQubitParams::new(221.0, 221.0 / 32.0, 0.8, 0.1, 0.1).map_err(|e| e.to_string())?;
    let bias = BiasPoint::new(0.5, 0.0, 0.0);
    let alphas = linspace(0.6, 1.0, 40);
    // Step 0.002 from 0.46; the symmetry point 0.5 is on the grid.
    let f1s: Vec<f64> = (0..40).map(|k| 0.46 + 0.002 * k as f64).collect();
    let basis = ChargeBasisSpec::new(8).map_err(|e| e.to_string())?;
    let surface = sweep_bias(&params, &bias, &basis, CutoffPolicy::Fixed, &alphas, &f1s).map_err(|e| e.to_string())?;
    let max_cx = surface.points.iter().map(|q| q.effective.cx.abs()).fold(0.0, f64::max);
    let max_cz = surface.points.iter().map(|q| q.effective.cz.abs()).fold(0.0, f64::max);
    let residual = surface.points.iter().map(|q| q.reconstruction_residual).fold(0.0, f64::max);

    let mut convergence: f64 = 0.0;
    for &alpha in alphas.iter().step_by(13) {
        for &f1 in f1s.iter().step_by(13) {
            let p = params.with_alpha(alpha);
            let b = bias.with_f1(f1);
            let levels = |n: usize| -> Result<Vec<f64>, String> {
                let h = build_qubit_hamiltonian(&p, &b, &ChargeBasisSpec::new(n).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                Ok(qubit_spectrum(&h, p.e_j).map_err(|e| e.to_string())?.levels)
            };
            let (lo, hi) = (levels(10)?, levels(12)?);
            for k in 0..2 {
                convergence = convergence.max(((lo[k] - hi[k]) / hi[k]).abs());
            }
        }
    }
    check(
        max_cx > 0.99 && max_cz > 0.99 && residual < 1e-10 && convergence < 1e-8,
        format!(
            "40x40 grid: max|cx| = {max_cx:.5}, max|cz| = {max_cz:.5}, residual {residual:.1e}; levels n_max 10 vs 12 on 4x4 sub-grid: {convergence:.1e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gate operating point", gate_operating_point),
        ("analytic vs numeric propagator", analytic_numeric_equivalence),
        ("CZ exactness, vacuum and thermal", cz_exactness),
        ("coherent-field ordering", coherent_ordering),
        ("adiabatic initialization", adiabatic_initialization),
        ("five-qubit code", five_qubit),
        ("Steane code", steane),
        ("Monte Carlo noise", montecarlo),
        ("resonator modes", resonator),
        ("flux-qubit coefficients", flux_qubit),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {:>2}. {name} ({secs:.1} s): {detail}", k + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

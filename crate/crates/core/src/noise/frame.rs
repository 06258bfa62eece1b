use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::circuit::{CodeKind, NoiseCircuit};
use super::{Backend, FidelityEstimate, MeasurementMode, NoiseError, NoiseModel, SimulationOptions};
use crate::graphcode::{Letter, PauliString, Statevector, DENSE_QUBIT_LIMIT};

/// Independent stream for one trial; trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One draw of depolarizing noise on `support` (one or two qubits).
///
/// Both the trigger and the Pauli are always drawn, so runs that differ only
/// in `p` see the same random numbers.
pub fn sample_depolarizing(n: usize, support: &[usize], p: f64, rng: &mut impl Rng) -> PauliString {
    let u: f64 = rng.gen();
    let choice = rng.gen_range(1..1usize << (2 * support.len()));
    let mut out = PauliString::identity(n);
    if u < p {
        for (k, &q) in support.iter().enumerate() {
            let letter = match (choice >> (2 * k)) & 3 {
                0 => Letter::I,
                1 => Letter::X,
                2 => Letter::Y,
                _ => Letter::Z,
            };
            out.set_letter(q, letter);
        }
    }
    out
}

/// Reading of one check qubit.
struct MeasurementDraw {
    flipped: bool,
    /// Selects which of the two equally likely branches occurs.
    minus_branch: bool,
}

fn draw_measurement(p_m: f64, rng: &mut impl Rng) -> MeasurementDraw {
    let u: f64 = rng.gen();
    MeasurementDraw { flipped: u < p_m, minus_branch: rng.gen() }
}

/// Trajectory state under one of the two backends.
trait Trajectory {
    fn apply_pauli(&mut self, p: &PauliString);
    fn apply_cz(&mut self, a: usize, b: usize);
    /// Measures `X_q` given the draw; returns `true` for a `-1` reading
    /// before the classical flip. `byproduct` is the ideal correction.
    fn measure(&mut self, q: usize, byproduct: &PauliString, draw: &MeasurementDraw) -> bool;
    fn fidelity(&self, circuit: &NoiseCircuit) -> f64;
}

struct Frame(PauliString);

impl Trajectory for Frame {
    fn apply_pauli(&mut self, p: &PauliString) {
        self.0 = self.0 * *p;
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        self.0.conjugate_cz(a, b);
    }

    fn measure(&mut self, q: usize, byproduct: &PauliString, draw: &MeasurementDraw) -> bool {
        // The error flips the reading iff it anticommutes with X_q. The
        // branch is tracked relative to the ideal `+1` state through the
        // byproduct.
        let n = self.0.num_qubits();
        let error_flips = !self.0.commutes_with(&PauliString::single(n, q, Letter::X));
        if draw.minus_branch {
            self.0 = self.0 * *byproduct;
        }
        draw.minus_branch ^ error_flips
    }

    fn fidelity(&self, circuit: &NoiseCircuit) -> f64 {
        if circuit.harmless(&self.0) {
            1.0
        } else {
            0.0
        }
    }
}

struct Dense(Statevector);

impl Trajectory for Dense {
    fn apply_pauli(&mut self, p: &PauliString) {
        self.0.apply_pauli(p);
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        self.0.apply_cz(a, b);
    }

    fn measure(&mut self, q: usize, _byproduct: &PauliString, draw: &MeasurementDraw) -> bool {
        let plus_prob = x_plus_probability(&self.0, q);
        let minus = if (plus_prob - 0.5).abs() < 1e-9 { draw.minus_branch } else { plus_prob < 0.5 };
        self.0 = project_x(&self.0, q, minus);
        minus
    }

    fn fidelity(&self, circuit: &NoiseCircuit) -> f64 {
        let mut order = circuit.graph().measure.clone();
        order.sort_unstable_by(|a, b| b.cmp(a));
        let mut state = self.0.clone();
        for q in order {
            // Check qubits end in a product X eigenstate; drop them.
            let sign = if x_plus_probability(&state, q) >= 0.5 { 1 } else { -1 };
            state = state.measure_x(q, sign).expect("check qubit in an X eigenstate").0;
        }
        let target = circuit.target_state().expect("dense target available");
        state.fidelity(target)
    }
}

fn x_plus_probability(state: &Statevector, q: usize) -> f64 {
    let bit = 1usize << q;
    let a = state.amplitudes();
    let mut p = 0.0;
    for i in 0..a.len() {
        if i & bit == 0 {
            p += (a[i] + a[i | bit]).norm_sqr() / 2.0;
        }
    }
    p / a.norm_squared()
}

fn project_x(state: &Statevector, q: usize, minus: bool) -> Statevector {
    let bit = 1usize << q;
    let s = if minus { -1.0 } else { 1.0 };
    let mut a = state.amplitudes().clone();
    for i in 0..a.len() {
        if i & bit == 0 {
            let v = (a[i] + a[i | bit] * s) * 0.5;
            a[i] = v;
            a[i | bit] = v * s;
        }
    }
    let norm = a.norm();
    a.unscale_mut(norm);
    Statevector::from_amplitudes(state.num_qubits(), a).expect("same register")
}

/// Runs one trial; returns whether it is kept and its fidelity.
fn run_trial<T: Trajectory>(
    state: &mut T,
    circuit: &NoiseCircuit,
    noise: &NoiseModel,
    options: &SimulationOptions,
    rng: &mut ChaCha8Rng,
) -> (bool, f64) {
    let graph = circuit.graph();
    let n = graph.n_vertices;
    for q in 0..n {
        state.apply_pauli(&sample_depolarizing(n, &[q], noise.p1, rng));
    }
    for &(a, b) in &graph.edges {
        state.apply_cz(a, b);
        state.apply_pauli(&sample_depolarizing(n, &[a, b], noise.p2, rng));
    }
    let mut accepted = true;
    for (&q, g) in graph.measure.iter().zip(circuit.byproducts()) {
        let draw = draw_measurement(noise.p_m, rng);
        let reads_minus = state.measure(q, g, &draw) ^ draw.flipped;
        match options.mode {
            MeasurementMode::Corrected if reads_minus => state.apply_pauli(g),
            MeasurementMode::Corrected => {}
            MeasurementMode::Postselect => accepted &= !reads_minus,
        }
    }
    if options.noisy_corrections {
        for q in graph.remaining() {
            state.apply_pauli(&sample_depolarizing(n, &[q], noise.p1, rng));
        }
    }
    (accepted, state.fidelity(circuit))
}

fn trial(circuit: &NoiseCircuit, noise: &NoiseModel, options: &SimulationOptions, seed: u64, t: usize) -> (bool, f64) {
    let mut rng = trial_rng(seed, t as u64);
    let n = circuit.num_qubits();
    match options.backend {
        Backend::Frame => run_trial(&mut Frame(PauliString::identity(n)), circuit, noise, options, &mut rng),
        Backend::Dense => {
            let mut s = Dense(Statevector::plus_state(n).expect("size checked"));
            run_trial(&mut s, circuit, noise, options, &mut rng)
        }
    }
}

/// Monte Carlo estimate over `trials` trajectories of `circuit`.
pub fn montecarlo_circuit(
    circuit: &NoiseCircuit,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
    options: &SimulationOptions,
) -> Result<FidelityEstimate, NoiseError> {
    noise.validate()?;
    if trials == 0 {
        return Err(NoiseError::NoTrials);
    }
    if options.backend == Backend::Dense && circuit.num_qubits() > DENSE_QUBIT_LIMIT {
        return Err(NoiseError::DimensionGuard { n: circuit.num_qubits(), limit: DENSE_QUBIT_LIMIT });
    }
    #[cfg(feature = "parallel")]
    let results: Vec<(bool, f64)> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(|t| trial(circuit, noise, options, seed, t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(bool, f64)> = (0..trials).map(|t| trial(circuit, noise, options, seed, t)).collect();

    // Summed in trial order so the result does not depend on scheduling.
    let (mut sum, mut sum_sq, mut accepted) = (0.0, 0.0, 0usize);
    for (kept, f) in results {
        if kept {
            sum += f;
            sum_sq += f * f;
            accepted += 1;
        }
    }
    FidelityEstimate::from_sums(sum, sum_sq, accepted, trials, seed)
}

/// Pauli-frame estimate for a built-in code with corrected measurements.
pub fn montecarlo_fidelity(code: CodeKind, noise: &NoiseModel, trials: usize, seed: u64) -> Result<FidelityEstimate, NoiseError> {
    montecarlo_circuit(&NoiseCircuit::for_code(code), noise, trials, seed, &SimulationOptions::default())
}

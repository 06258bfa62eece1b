use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use usc_qec::graphcode::{GraphSpec, PauliString, Statevector};
use usc_qec::linalg::{max_abs, C64};
use usc_qec::noise::*;

fn within_3_sigma(est: &FidelityEstimate, exact: f64) -> bool {
    // A floor keeps near-deterministic points from demanding exact equality.
    (est.mean - exact).abs() <= 3.0 * est.std_error.max(1e-3)
}

fn corrected() -> SimulationOptions {
    SimulationOptions::default()
}

fn postselect() -> SimulationOptions {
    SimulationOptions { mode: MeasurementMode::Postselect, ..Default::default() }
}

/// Two qubits, one gate. Preparation errors act as `Z` with probability
/// `q = 2 p1 / 3` per qubit; the gate error lands in each of the four
/// cosets of the stabilizer group with the weights below.
fn pair_oracle(p1: f64, p2: f64) -> f64 {
    let q = 2.0 * p1 / 3.0;
    let stay = 1.0 - 4.0 * p2 / 5.0;
    let leave = 4.0 * p2 / 15.0;
    (1.0 - q) * (1.0 - q) * stay + (2.0 * q * (1.0 - q) + q * q) * leave
}

#[test]
fn depolarizing_single_plus_state() {
    let plus = Statevector::plus_state(1).unwrap();
    let rho = DensityMatrix::from_pure(&plus).unwrap();
    assert_relative_eq!(depolarize(&rho, &[0], 1.0).expectation_in(&plus), 1.0 / 3.0, epsilon = 1e-14);
    assert_eq!(depolarize(&rho, &[0], 0.0), rho);
    for p in [0.01, 0.2, 0.7] {
        assert_relative_eq!(depolarize(&rho, &[0], p).expectation_in(&plus), 1.0 - 2.0 * p / 3.0, epsilon = 1e-14);
    }
}

#[test]
fn single_qubit_montecarlo_matches_channel_value() {
    let circuit = NoiseCircuit::from_graph(&GraphSpec::empty(1)).unwrap();
    for (k, p) in [0.05, 0.3, 0.9].into_iter().enumerate() {
        let noise = NoiseModel::new(p, 0.0, 0.0).unwrap();
        let est = montecarlo_circuit(&circuit, &noise, 20_000, 11 + k as u64, &corrected()).unwrap();
        assert!(within_3_sigma(&est, 1.0 - 2.0 * p / 3.0), "{est:?}");
    }
}

#[test]
fn pair_channel_matches_closed_form() {
    let circuit = NoiseCircuit::for_code(CodeKind::Pair);
    for (p1, p2) in [(0.0, 0.0), (0.1, 0.0), (0.0, 0.3), (0.05, 0.2), (1.0, 1.0)] {
        let noise = NoiseModel::new(p1, p2, 0.0).unwrap();
        let ch = channel_fidelity(&circuit, &noise, &corrected()).unwrap();
        assert_relative_eq!(ch.fidelity, pair_oracle(p1, p2), epsilon = 1e-12);
        let est = montecarlo_circuit(&circuit, &noise, 20_000, 3, &corrected()).unwrap();
        assert!(within_3_sigma(&est, ch.fidelity), "{p1} {p2}: {est:?} vs {ch:?}");
    }
}

#[test]
fn toy_circuits_agree_with_channel_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for code in [CodeKind::Pair, CodeKind::Path3] {
        let circuit = NoiseCircuit::for_code(code);
        for k in 0..10 {
            let noise = NoiseModel::new(rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.1)).unwrap();
            for options in [corrected(), postselect()] {
                let ch = channel_fidelity(&circuit, &noise, &options).unwrap();
                let est = montecarlo_circuit(&circuit, &noise, 10_000, k, &options).unwrap();
                assert!(within_3_sigma(&est, ch.fidelity), "{code} {noise:?} {options:?}: {est:?} vs {ch:?}");
                let acc_err = (ch.acceptance * (1.0 - ch.acceptance) / est.trials as f64).sqrt().max(1e-3);
                assert!((est.acceptance_rate() - ch.acceptance).abs() <= 3.0 * acc_err);
            }
        }
    }
}

#[test]
fn zero_noise_is_exact() {
    for code in [CodeKind::FiveQubit, CodeKind::Steane, CodeKind::Path3] {
        for options in [corrected(), postselect()] {
            let est = montecarlo_circuit(&NoiseCircuit::for_code(code), &NoiseModel::noiseless(), 500, 1, &options).unwrap();
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.std_error, 0.0);
        }
    }
    let ch = channel_fidelity(&NoiseCircuit::for_code(CodeKind::Steane), &NoiseModel::noiseless(), &corrected()).unwrap();
    assert_relative_eq!(ch.fidelity, 1.0, epsilon = 1e-12);
}

#[test]
fn perfect_measurement_postselection_keeps_half_per_check() {
    let circuit = NoiseCircuit::for_code(CodeKind::Steane);
    let est = montecarlo_circuit(&circuit, &NoiseModel::noiseless(), 4000, 5, &postselect()).unwrap();
    // Three random X outcomes.
    assert!((est.acceptance_rate() - 0.125).abs() < 3.0 * (0.125 * 0.875 / 4000.0f64).sqrt());
    let ch = channel_fidelity(&circuit, &NoiseModel::noiseless(), &postselect()).unwrap();
    assert_relative_eq!(ch.acceptance, 0.125, epsilon = 1e-12);
}

#[test]
fn five_qubit_and_steane_agree_with_channel() {
    let noise = NoiseModel::new(0.02, 0.03, 0.01).unwrap();
    for (code, trials) in [(CodeKind::FiveQubit, 5000), (CodeKind::Steane, 3000)] {
        let circuit = NoiseCircuit::for_code(code);
        let ch = channel_fidelity(&circuit, &noise, &corrected()).unwrap();
        let est = montecarlo_circuit(&circuit, &noise, trials, 7, &corrected()).unwrap();
        assert!(within_3_sigma(&est, ch.fidelity), "{code}: {est:?} vs {ch:?}");
        assert_relative_eq!(ch.trace, 1.0, epsilon = 1e-12);
        assert!(ch.min_eigenvalue > -1e-10);
    }
}

#[test]
fn dense_backend_matches_frame() {
    let noise = NoiseModel::new(0.05, 0.05, 0.02).unwrap();
    let dense = SimulationOptions { backend: Backend::Dense, ..Default::default() };
    // No measurements: both backends see the same errors trial by trial.
    let c5 = NoiseCircuit::for_code(CodeKind::FiveQubit);
    let a = montecarlo_circuit(&c5, &noise, 400, 21, &corrected()).unwrap();
    let b = montecarlo_circuit(&c5, &noise, 400, 21, &dense).unwrap();
    assert_relative_eq!(a.mean, b.mean, epsilon = 1e-12);
    // With measurements the branch labels differ, so compare statistically.
    let c3 = NoiseCircuit::for_code(CodeKind::Path3);
    let ch = channel_fidelity(&c3, &noise, &corrected()).unwrap();
    let d = montecarlo_circuit(&c3, &noise, 4000, 2, &dense).unwrap();
    assert!(within_3_sigma(&d, ch.fidelity), "{d:?} vs {ch:?}");
}

#[test]
fn deterministic_for_fixed_seed() {
    let noise = NoiseModel::new(0.01, 0.02, 0.01).unwrap();
    let a = montecarlo_fidelity(CodeKind::Steane, &noise, 777, 42).unwrap();
    let b = montecarlo_fidelity(CodeKind::Steane, &noise, 777, 42).unwrap();
    assert_eq!(a, b);
    let c = montecarlo_fidelity(CodeKind::Steane, &noise, 777, 43).unwrap();
    assert_ne!(a.mean, c.mean);
    assert_eq!(a.seed, 42);
    assert_eq!(a.trials, 777);
}

/// Ring state with preparation noise and a final single-qubit channel on
/// every vertex. Modulo the stabilizers, `X_a ~ Z_{N(a)}` and
/// `Y_a ~ Z_a Z_{N(a)}`, so every error reduces to a Z pattern; the state
/// survives iff the two patterns cancel.
fn ring_oracle(p: f64) -> f64 {
    let neighbours = |a: usize| (1usize << ((a + 1) % 5)) | (1 << ((a + 4) % 5));
    let q = 2.0 * p / 3.0;
    let prep = |v: usize| (0..5).map(|a| if v >> a & 1 == 1 { q } else { 1.0 - q }).product::<f64>();
    let mut total = 0.0;
    for letters in 0..1usize << 10 {
        let mut v = 0usize;
        let mut w = 1.0;
        for a in 0..5 {
            match (letters >> (2 * a)) & 3 {
                0 => w *= 1.0 - p,
                1 => (v, w) = (v ^ neighbours(a), w * p / 3.0),
                2 => (v, w) = (v ^ neighbours(a) ^ (1 << a), w * p / 3.0),
                _ => (v, w) = (v ^ (1 << a), w * p / 3.0),
            }
        }
        total += w * prep(v);
    }
    total
}

#[test]
fn noisy_corrections_lower_fidelity() {
    let p = 0.02;
    let noise = NoiseModel::new(p, 0.0, 0.0).unwrap();
    let circuit = NoiseCircuit::for_code(CodeKind::FiveQubit);
    let plain = channel_fidelity(&circuit, &noise, &corrected()).unwrap();
    let opts = SimulationOptions { noisy_corrections: true, ..Default::default() };
    let noisy = channel_fidelity(&circuit, &noise, &opts).unwrap();
    assert_relative_eq!(plain.fidelity, (1.0 - 2.0 * p / 3.0f64).powi(5), epsilon = 1e-12);
    assert_relative_eq!(noisy.fidelity, ring_oracle(p), epsilon = 1e-12);
    let est = montecarlo_circuit(&circuit, &noise, 5000, 8, &opts).unwrap();
    assert!(within_3_sigma(&est, noisy.fidelity));
}

#[test]
fn logical_state_eigenvalues() {
    let m = logical_state_model(0.75, 5).unwrap();
    let eig = m.eigenvalues();
    assert_relative_eq!(eig[0].0, 0.7578125, epsilon = 1e-15);
    assert_eq!(eig[1].1, 31);
    let zero = logical_state_model(0.0, 5).unwrap();
    assert!(zero.eigenvalues().iter().all(|(v, _)| (v - 1.0 / 32.0).abs() < 1e-15));
    let psi = Statevector::plus_state(5).unwrap();
    let rho = DensityMatrix::new(5, m.density(psi.amplitudes()).unwrap()).unwrap();
    assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-13);
    assert_relative_eq!(rho.expectation_in(&psi), 0.7578125, epsilon = 1e-13);
    assert_relative_eq!(rho.min_eigenvalue(), 0.25 / 32.0, epsilon = 1e-13);
    assert!(logical_state_model(1.2, 5).is_err());
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(NoiseModel::new(-0.1, 0.0, 0.0), Err(NoiseError::Probability { name: "p1", .. })));
    assert!(matches!(NoiseModel::new(0.0, 1.5, 0.0), Err(NoiseError::Probability { name: "p2", .. })));
    let c = NoiseCircuit::for_code(CodeKind::Pair);
    assert_eq!(montecarlo_circuit(&c, &NoiseModel::noiseless(), 0, 1, &corrected()), Err(NoiseError::NoTrials));
    assert!("toric".parse::<CodeKind>().is_err());
    assert_eq!("five-qubit".parse::<CodeKind>().unwrap(), CodeKind::FiveQubit);
    // An isolated measured vertex has no correcting stabilizer.
    let g = GraphSpec::new(3, vec![(0, 1)], vec![2]).unwrap();
    assert!(matches!(NoiseCircuit::from_graph(&g), Err(NoiseError::InvalidCircuit(_))));
    assert!(matches!(DensityMatrix::plus_state(11), Err(NoiseError::DimensionGuard { .. })));
}

fn random_density(n: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1 << n;
    let a = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    DensityMatrix::new(n, rho / tr).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn depolarizing_is_trace_preserving_and_positive(seed in any::<u64>(), p in 0.0f64..=1.0, two in any::<bool>()) {
        let rho = random_density(3, seed);
        let support: Vec<usize> = if two { vec![0, 2] } else { vec![1] };
        let out = depolarize(&rho, &support, p);
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.min_eigenvalue() > -1e-10);
        let herm = max_abs(&(out.matrix() - out.matrix().adjoint()));
        prop_assert!(herm < 1e-14);
    }

    #[test]
    fn full_depolarization_of_one_qubit_is_maximally_mixing(seed in any::<u64>()) {
        // p = 3/4 on one qubit replaces it by I/2.
        let rho = random_density(1, seed);
        let out = depolarize(&rho, &[0], 0.75);
        let half = DMatrix::<C64>::identity(2, 2) * C64::new(0.5, 0.0);
        prop_assert!(max_abs(&(out.matrix() - half)) < 1e-14);
    }

    #[test]
    fn pauli_conjugation_is_an_involution(seed in any::<u64>(), x in 0u64..8, z in 0u64..8) {
        let rho = random_density(3, seed);
        let p = PauliString::from_masks(3, x, z);
        prop_assert!(max_abs(&(rho.conjugated(&p).conjugated(&p).matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn channel_outputs_are_states(p1 in 0.0f64..0.3, p2 in 0.0f64..0.3, pm in 0.0f64..0.2) {
        let noise = NoiseModel::new(p1, p2, pm).unwrap();
        let ch = channel_fidelity(&NoiseCircuit::for_code(CodeKind::Path3), &noise, &SimulationOptions::default()).unwrap();
        prop_assert!((ch.trace - 1.0).abs() < 1e-12);
        prop_assert!(ch.min_eigenvalue > -1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ch.fidelity));
    }

    #[test]
    fn trial_streams_are_reproducible(seed in any::<u64>(), t in any::<u64>()) {
        let a: [u64; 4] = trial_rng(seed, t).gen();
        let b: [u64; 4] = trial_rng(seed, t).gen();
        prop_assert_eq!(a, b);
    }
}

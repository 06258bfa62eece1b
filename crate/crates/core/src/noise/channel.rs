use nalgebra::DMatrix;
use serde::Serialize;

use super::circuit::NoiseCircuit;
use super::{MeasurementMode, NoiseError, NoiseModel, SimulationOptions};
use crate::graphcode::{Letter, PauliString, Statevector};
use crate::linalg::{hermitian_eigen, C64};

/// Largest register composed exactly.
pub const CHANNEL_QUBIT_LIMIT: usize = 10;

/// Density operator on `n` qubits, qubit `q` being bit `q` of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: DMatrix<C64>,
}

fn parity_sign(bits: usize) -> f64 {
    if bits.count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

impl DensityMatrix {
    pub fn new(n: usize, rho: DMatrix<C64>) -> Result<Self, NoiseError> {
        if n == 0 || n > CHANNEL_QUBIT_LIMIT {
            return Err(NoiseError::DimensionGuard { n, limit: CHANNEL_QUBIT_LIMIT });
        }
        if rho.shape() != (1 << n, 1 << n) {
            return Err(NoiseError::InvalidCircuit("density matrix shape does not match".into()));
        }
        Ok(Self { n, rho })
    }

    pub fn from_pure(state: &Statevector) -> Result<Self, NoiseError> {
        let a = state.amplitudes();
        Self::new(state.num_qubits(), a * a.adjoint())
    }

    pub fn plus_state(n: usize) -> Result<Self, NoiseError> {
        if n == 0 || n > CHANNEL_QUBIT_LIMIT {
            return Err(NoiseError::DimensionGuard { n, limit: CHANNEL_QUBIT_LIMIT });
        }
        let dim = 1usize << n;
        Self::new(n, DMatrix::from_element(dim, dim, C64::new(1.0 / dim as f64, 0.0)))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.rho).values[0]
    }

    /// `<psi| rho |psi>`.
    pub fn expectation_in(&self, psi: &Statevector) -> f64 {
        let a = psi.amplitudes();
        (a.adjoint() * &self.rho * a)[(0, 0)].re
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let both = (1usize << a) | (1 << b);
        let dim = self.rho.nrows();
        for c in 0..dim {
            for r in 0..dim {
                if (r & both == both) != (c & both == both) {
                    self.rho[(r, c)] = -self.rho[(r, c)];
                }
            }
        }
    }

    /// `P rho P^dagger`.
    pub fn conjugated(&self, p: &PauliString) -> Self {
        let (x, z) = (p.x_mask() as usize, p.z_mask() as usize);
        let dim = self.rho.nrows();
        let mut out = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let sc = parity_sign(c & z);
            for r in 0..dim {
                out[(r ^ x, c ^ x)] = self.rho[(r, c)] * (sc * parity_sign(r & z));
            }
        }
        Self { n: self.n, rho: out }
    }

    /// `Pi rho Pi` with `Pi = (1 +- X_q) / 2`, not renormalised.
    pub fn project_x(&self, q: usize, minus: bool) -> Self {
        let bit = 1usize << q;
        let s = if minus { -1.0 } else { 1.0 };
        let dim = self.rho.nrows();
        let out = DMatrix::from_fn(dim, dim, |r, c| {
            let m = &self.rho;
            (m[(r, c)] + (m[(r ^ bit, c)] + m[(r, c ^ bit)]) * s + m[(r ^ bit, c ^ bit)]) * 0.25
        });
        Self { n: self.n, rho: out }
    }

    /// Traces out `removed`, keeping the other qubits in increasing order.
    pub fn partial_trace(&self, removed: &[usize]) -> Result<Self, NoiseError> {
        let kept: Vec<usize> = (0..self.n).filter(|q| !removed.contains(q)).collect();
        let removed_mask: usize = removed.iter().map(|q| 1usize << q).sum();
        let compact = |i: usize| kept.iter().enumerate().map(|(k, &q)| ((i >> q) & 1) << k).sum::<usize>();
        let small = 1usize << kept.len();
        let mut out = DMatrix::zeros(small, small);
        let dim = self.rho.nrows();
        for c in 0..dim {
            for r in 0..dim {
                if r & removed_mask == c & removed_mask {
                    out[(compact(r), compact(c))] += self.rho[(r, c)];
                }
            }
        }
        Self::new(kept.len(), out)
    }

    fn add_scaled(&mut self, other: &Self, w: f64) {
        self.rho += &other.rho * C64::new(w, 0.0);
    }
}

/// Exact depolarizing channel of strength `p` on `support`.
pub fn depolarize(state: &DensityMatrix, support: &[usize], p: f64) -> DensityMatrix {
    if p == 0.0 || support.is_empty() {
        return state.clone();
    }
    let terms = (1usize << (2 * support.len())) - 1;
    let mut out = state.clone();
    out.rho *= C64::new(1.0 - p, 0.0);
    for choice in 1..=terms {
        let mut pauli = PauliString::identity(state.n);
        for (k, &q) in support.iter().enumerate() {
            pauli.set_letter(q, [Letter::I, Letter::X, Letter::Y, Letter::Z][(choice >> (2 * k)) & 3]);
        }
        out.add_scaled(&state.conjugated(&pauli), p / terms as f64);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelResult {
    /// Fidelity of the (normalised) output with the ideal code state.
    pub fidelity: f64,
    /// Probability that every check qubit reads `+1`; 1 when correcting.
    pub acceptance: f64,
    /// Trace of the output before normalisation.
    pub trace: f64,
    /// Smallest eigenvalue of the normalised output.
    pub min_eigenvalue: f64,
}

/// Composes the noisy circuit as a channel and evaluates the fidelity
/// exactly. The dense backend option is ignored.
pub fn channel_fidelity(
    circuit: &NoiseCircuit,
    noise: &NoiseModel,
    options: &SimulationOptions,
) -> Result<ChannelResult, NoiseError> {
    noise.validate()?;
    let graph = circuit.graph();
    let n = graph.n_vertices;
    let mut rho = DensityMatrix::plus_state(n)?;
    for q in 0..n {
        rho = depolarize(&rho, &[q], noise.p1);
    }
    for &(a, b) in &graph.edges {
        rho.apply_cz(a, b);
        rho = depolarize(&rho, &[a, b], noise.p2);
    }
    let pm = noise.p_m;
    for (&q, g) in graph.measure.iter().zip(circuit.byproducts()) {
        let plus = rho.project_x(q, false);
        let minus = rho.project_x(q, true);
        let mut next = DensityMatrix { n, rho: DMatrix::zeros(rho.rho.nrows(), rho.rho.ncols()) };
        match options.mode {
            MeasurementMode::Corrected => {
                // Reading `-` (true or flipped) triggers the byproduct.
                next.add_scaled(&plus, 1.0 - pm);
                next.add_scaled(&minus.conjugated(g), 1.0 - pm);
                next.add_scaled(&plus.conjugated(g), pm);
                next.add_scaled(&minus, pm);
            }
            MeasurementMode::Postselect => {
                next.add_scaled(&plus, 1.0 - pm);
                next.add_scaled(&minus, pm);
            }
        }
        rho = next;
    }
    if options.noisy_corrections {
        for q in graph.remaining() {
            rho = depolarize(&rho, &[q], noise.p1);
        }
    }
    let reduced = rho.partial_trace(&graph.measure)?;
    let trace = reduced.trace();
    let target = circuit
        .target_state()
        .ok_or(NoiseError::DimensionGuard { n, limit: CHANNEL_QUBIT_LIMIT })?;
    let normalised = DensityMatrix { n: reduced.n, rho: &reduced.rho / C64::new(trace, 0.0) };
    Ok(ChannelResult {
        fidelity: normalised.expectation_in(target),
        acceptance: match options.mode {
            MeasurementMode::Corrected => 1.0,
            MeasurementMode::Postselect => trace,
        },
        trace,
        min_eigenvalue: normalised.min_eigenvalue(),
    })
}

//! Gate-level depolarizing noise and measurement errors on graph-code
//! circuits, sampled by Monte Carlo or composed exactly as a channel.
//!
//! Depolarizing noise of strength `p` on `k` qubits leaves the state alone
//! with probability `1 - p` and otherwise applies one of the `4^k - 1`
//! nontrivial Paulis on the support, uniformly. A preparation of `|+>` is
//! followed by `p1`, every CZ by `p2`, and every X-measurement outcome is
//! flipped with probability `p_m` before the byproduct is chosen.

mod channel;
mod circuit;
mod frame;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphcode::GraphCodeError;
use crate::linalg::C64;

pub use channel::{channel_fidelity, depolarize, ChannelResult, DensityMatrix, CHANNEL_QUBIT_LIMIT};
pub use circuit::{CodeKind, NoiseCircuit};
pub use frame::{montecarlo_circuit, montecarlo_fidelity, sample_depolarizing, trial_rng};

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("no trial passed post-selection")]
    NoAcceptedTrials,
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("unknown code {0:?}")]
    UnknownCode(String),
    #[error("channel simulation of {n} qubits exceeds the limit of {limit}")]
    DimensionGuard { n: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphCodeError),
}

/// Error rates of one noise configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Probability that a measurement outcome is reported flipped.
    pub p_m: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, p_m: f64) -> Result<Self, NoiseError> {
        let m = Self { p1, p2, p_m };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0, p_m: 0.0 }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::Probability { name, value });
            }
        }
        Ok(())
    }
}

/// How measured check qubits are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementMode {
    /// Every trial counts; a `-1` reading triggers the byproduct correction.
    #[default]
    Corrected,
    /// Only trials reading `+1` on every check qubit are kept.
    Postselect,
}

/// How one Monte Carlo trajectory is simulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Pauli frame propagated through the Clifford circuit.
    #[default]
    Frame,
    /// Dense statevector; for validation on small registers.
    Dense,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub mode: MeasurementMode,
    pub backend: Backend,
    /// Also depolarize (with `p1`) every remaining qubit after the final
    /// local corrections.
    pub noisy_corrections: bool,
}

/// Monte Carlo average of the per-trial fidelity with the ideal code state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub mean: f64,
    /// Sample standard deviation over the counted trials divided by the
    /// square root of their number.
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
    /// Trials that contribute to `mean`; equals `trials` unless
    /// post-selecting.
    pub accepted: usize,
}

impl FidelityEstimate {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.trials as f64
    }

    /// Mean and standard error of `n` samples whose sum is `sum` and sum of
    /// squares is `sum_sq`.
    pub fn from_sums(sum: f64, sum_sq: f64, accepted: usize, trials: usize, seed: u64) -> Result<Self, NoiseError> {
        if accepted == 0 {
            return Err(NoiseError::NoAcceptedTrials);
        }
        let n = accepted as f64;
        let mean = sum / n;
        let std_error = if accepted > 1 {
            ((sum_sq - n * mean * mean).max(0.0) / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, std_error, trials, seed, accepted })
    }
}

/// `F |Psi><Psi| + (1 - F) I / 2^nu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalStateModel {
    pub fidelity: f64,
    pub nu: usize,
}

pub fn logical_state_model(fidelity: f64, nu: usize) -> Result<LogicalStateModel, NoiseError> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(NoiseError::Probability { name: "F", value: fidelity });
    }
    if nu == 0 || nu > 30 {
        return Err(NoiseError::InvalidCircuit(format!("block size {nu} out of range")));
    }
    Ok(LogicalStateModel { fidelity, nu })
}

impl LogicalStateModel {
    /// Distinct eigenvalues with multiplicities, largest first.
    pub fn eigenvalues(&self) -> Vec<(f64, usize)> {
        let dim = 1usize << self.nu;
        let floor = (1.0 - self.fidelity) / dim as f64;
        vec![(self.fidelity + floor, 1), (floor, dim - 1)]
    }

    /// Dense operator for a given code state `psi` of dimension `2^nu`.
    pub fn density(&self, psi: &DVector<C64>) -> Result<DMatrix<C64>, NoiseError> {
        let dim = 1usize << self.nu;
        if psi.len() != dim || self.nu > CHANNEL_QUBIT_LIMIT {
            return Err(NoiseError::InvalidCircuit(format!("state of length {} for nu = {}", psi.len(), self.nu)));
        }
        let unit = psi / C64::new(psi.norm(), 0.0);
        let mut rho = &unit * unit.adjoint() * C64::new(self.fidelity, 0.0);
        let floor = C64::new((1.0 - self.fidelity) / dim as f64, 0.0);
        for k in 0..dim {
            rho[(k, k)] += floor;
        }
        Ok(rho)
    }
}

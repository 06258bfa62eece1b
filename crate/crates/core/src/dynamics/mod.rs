//! Multi-qubit, multi-mode Rabi dynamics: Hamiltonian construction, exact
//! numeric and analytic propagation, the ultrafast controlled-phase gate and
//! adiabatic switch-off of the coupling.
//!
//! Frequencies are angular, in rad/ns; times are in ns.
//!
//! Basis ordering is little-endian with qubits first: a basis index is
//! `q + 2^N * m`, where bit `j` of `q` is 1 when qubit `j` is excited and
//! `m = sum_l n_l * prod_{l' < l} (cutoff_{l'} + 1)` enumerates Fock numbers.
//! `sigma_z` has eigenvalue +1 on the excited state.

mod adiabatic;
mod analytic;
mod cavity;
mod gate;
mod hamiltonian;
mod state;

pub use adiabatic::{adiabatic_initialize, AdiabaticTrace, RampShape, RampSpec};
pub use analytic::{displacement, evolve_analytic, analytic_unitary};
pub use cavity::{cavity_ensemble, cavity_state, mean_occupation, CavityFieldSpec};
pub use gate::{
    gate_fidelity, gate_fidelity_sweep, target_cluster_pair, ultrafast_cz, CzResult, GateFidelityRow, GateSchedule,
    PhaseReport,
};
pub use hamiltonian::{build_rabi_hamiltonian, evolve_numeric, Propagator};
pub use state::{QuantumState, StateRepr};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on the Hilbert-space dimension of a [`RabiSystem`].
pub const DEFAULT_DIMENSION_GUARD: usize = 1 << 20;

/// Largest dimension for which dense matrices are formed.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("dimension {dim} exceeds the guard {limit}")]
    DimensionGuard { dim: usize, limit: usize },
    #[error("qubit {qubit} has transversal coupling c_x = {cx:e}; the analytic propagator needs c_x = 0")]
    TransversalCouplingPresent { qubit: usize, cx: f64 },
    #[error("coupling conditions violated: sum-of-squares residual {sum_of_squares:.3e}, product residual {product:.3e}")]
    ConditionViolated { sum_of_squares: f64, product: f64 },
    #[error("cavity state loses {mass:.3e} probability above the Fock cutoff")]
    TailMassTooLarge { mass: f64 },
    #[error("halving the step changes the final fidelity by {change:.3e} at {steps} steps")]
    StepCountTooLow { steps: usize, change: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// Tensor layout of `N` qubits followed by truncated oscillators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisLayout {
    pub n_qubits: usize,
    /// Highest Fock number kept per mode.
    pub cutoffs: Vec<usize>,
}

impl BasisLayout {
    pub fn qubit_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn mode_dim(&self) -> usize {
        self.cutoffs.iter().map(|c| c + 1).product()
    }

    pub fn dimension(&self) -> usize {
        self.qubit_dim() * self.mode_dim()
    }

    /// Index step for one photon in mode `l`.
    pub fn mode_stride(&self, l: usize) -> usize {
        self.qubit_dim() * self.cutoffs[..l].iter().map(|c| c + 1).product::<usize>()
    }

    pub fn index(&self, qubits: usize, fock: &[usize]) -> usize {
        let mut m = 0;
        let mut stride = 1;
        for (n, c) in fock.iter().zip(&self.cutoffs) {
            m += n * stride;
            stride *= c + 1;
        }
        qubits + self.qubit_dim() * m
    }

    /// Inverse of [`index`](Self::index).
    pub fn split(&self, index: usize) -> (usize, Vec<usize>) {
        let q = index % self.qubit_dim();
        let mut m = index / self.qubit_dim();
        let fock = self
            .cutoffs
            .iter()
            .map(|c| {
                let n = m % (c + 1);
                m /= c + 1;
                n
            })
            .collect();
        (q, fock)
    }
}

/// The effective Hamiltonian's parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiSystem {
    pub qubit_freqs: Vec<f64>,
    pub mode_freqs: Vec<f64>,
    /// `g_j`, identical for every mode of the manifold.
    pub couplings: Vec<f64>,
    pub cx: Vec<f64>,
    pub cz: Vec<f64>,
    pub cutoffs: Vec<usize>,
    pub dimension_guard: usize,
}

impl RabiSystem {
    pub fn new(
        qubit_freqs: Vec<f64>,
        mode_freqs: Vec<f64>,
        couplings: Vec<f64>,
        cx: Vec<f64>,
        cz: Vec<f64>,
        cutoffs: Vec<usize>,
    ) -> Result<Self, DynamicsError> {
        let s = Self { qubit_freqs, mode_freqs, couplings, cx, cz, cutoffs, dimension_guard: DEFAULT_DIMENSION_GUARD };
        s.validate()?;
        Ok(s)
    }

    /// Two identical qubits and `modes` degenerate modes at `omega`, with
    /// `g = kappa * omega` and `c_z = sqrt(1 - c_x^2)`.
    pub fn symmetric(
        n_qubits: usize,
        modes: usize,
        omega: f64,
        omega_q: f64,
        kappa: f64,
        cx: f64,
        cutoff: usize,
    ) -> Result<Self, DynamicsError> {
        let cz = (1.0 - cx * cx).max(0.0).sqrt();
        Self::new(
            vec![omega_q; n_qubits],
            vec![omega; modes],
            vec![kappa * omega; n_qubits],
            vec![cx; n_qubits],
            vec![cz; n_qubits],
            vec![cutoff; modes],
        )
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let n = self.qubit_freqs.len();
        let bad = |m: &str| Err(DynamicsError::InvalidSystem(m.to_string()));
        if self.couplings.len() != n || self.cx.len() != n || self.cz.len() != n {
            return bad("per-qubit lists must have equal length");
        }
        if self.cutoffs.len() != self.mode_freqs.len() {
            return bad("one cutoff per mode is required");
        }
        if n > 20 {
            return bad("at most 20 qubits");
        }
        if self.couplings.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return bad("couplings must be finite and non-negative");
        }
        if self.mode_freqs.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return bad("mode frequencies must be positive");
        }
        if self.qubit_freqs.iter().chain(&self.cx).chain(&self.cz).any(|x| !x.is_finite()) {
            return bad("non-finite qubit parameter");
        }
        self.checked_dimension()?;
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.qubit_freqs.len()
    }

    pub fn n_modes(&self) -> usize {
        self.mode_freqs.len()
    }

    pub fn layout(&self) -> BasisLayout {
        BasisLayout { n_qubits: self.n_qubits(), cutoffs: self.cutoffs.clone() }
    }

    pub fn checked_dimension(&self) -> Result<usize, DynamicsError> {
        let mut dim: usize = 1usize << self.n_qubits();
        for c in &self.cutoffs {
            dim = dim.checked_mul(c + 1).ok_or(DynamicsError::DimensionGuard { dim: usize::MAX, limit: self.dimension_guard })?;
        }
        if dim > self.dimension_guard {
            return Err(DynamicsError::DimensionGuard { dim, limit: self.dimension_guard });
        }
        Ok(dim)
    }

    /// Same system with every coupling multiplied by `factor`.
    pub fn with_coupling_scale(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for g in &mut s.couplings {
            *g *= factor;
        }
        s
    }

    /// Same system with transversal weight `cx` on every qubit and
    /// `c_z = sqrt(1 - cx^2)`.
    pub fn with_transversal(&self, cx: f64) -> Self {
        let mut s = self.clone();
        let cz = (1.0 - cx * cx).max(0.0).sqrt();
        s.cx.iter_mut().for_each(|c| *c = cx);
        s.cz.iter_mut().for_each(|c| *c = cz);
        s
    }
}

/// `sigma_z` eigenvalue of qubit `j` in qubit configuration `q`.
pub(crate) fn spin(q: usize, j: usize) -> f64 {
    if q >> j & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_round_trip() {
        let layout = BasisLayout { n_qubits: 2, cutoffs: vec![3, 2] };
        assert_eq!(layout.dimension(), 4 * 4 * 3);
        for i in 0..layout.dimension() {
            let (q, fock) = layout.split(i);
            assert_eq!(layout.index(q, &fock), i);
        }
        assert_eq!(layout.index(1, &[0, 1]), 1 + 4 * 4);
        assert_eq!(layout.mode_stride(1), 16);
    }

    #[test]
    fn dimension_guard_trips() {
        let mut s = RabiSystem::symmetric(2, 2, 1.0, 1.0, 0.1, 0.0, 15).unwrap();
        s.dimension_guard = 100;
        assert!(matches!(s.validate(), Err(DynamicsError::DimensionGuard { .. })));
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let r = RabiSystem::new(vec![1.0, 1.0], vec![1.0], vec![0.1], vec![0.0, 0.0], vec![1.0, 1.0], vec![3]);
        assert!(r.is_err());
        let r = RabiSystem::new(vec![1.0], vec![1.0], vec![-0.1], vec![0.0], vec![1.0], vec![3]);
        assert!(r.is_err());
    }
}

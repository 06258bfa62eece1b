use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::linalg::C64;

const HBAR: f64 = 1.054_571_817e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Probability allowed above the Fock cutoff.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Initial state of every mode in the manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CavityFieldSpec {
    Vacuum,
    Thermal { temp_mk: f64 },
    Coherent { gamma_re: f64, #[serde(default)] gamma_im: f64 },
}

impl CavityFieldSpec {
    pub fn coherent(gamma: f64) -> Self {
        Self::Coherent { gamma_re: gamma, gamma_im: 0.0 }
    }

    /// Short label used in CSV output, e.g. `coherent_0.5`.
    pub fn label(&self) -> String {
        match self {
            Self::Vacuum => "vacuum".into(),
            Self::Thermal { temp_mk } => format!("thermal_{temp_mk}mK"),
            Self::Coherent { gamma_re, gamma_im } if *gamma_im == 0.0 => format!("coherent_{gamma_re}"),
            Self::Coherent { gamma_re, gamma_im } => format!("coherent_{gamma_re}{gamma_im:+}i"),
        }
    }

    /// The five fields compared in the gate-fidelity study.
    pub fn standard_set() -> Vec<Self> {
        vec![
            Self::Thermal { temp_mk: 15.0 },
            Self::Vacuum,
            Self::coherent(0.25),
            Self::coherent(0.5),
            Self::coherent(1.0),
        ]
    }
}

/// Bose-Einstein occupation at angular frequency `omega` (rad/ns) and
/// temperature `temp_mk`.
pub fn mean_occupation(omega: f64, temp_mk: f64) -> f64 {
    let x = HBAR * omega * 1e9 / (BOLTZMANN * temp_mk * 1e-3);
    1.0 / x.exp_m1()
}

fn coherent_amplitudes(gamma: C64, cutoff: usize) -> (DVector<C64>, f64) {
    let mut v = DVector::<C64>::zeros(cutoff + 1);
    let mut term = C64::new((-gamma.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=cutoff {
        if n > 0 {
            term *= gamma / (n as f64).sqrt();
        }
        v[n] = term;
    }
    let kept = v.norm_squared();
    (v, (1.0 - kept).max(0.0))
}

/// Decomposition of the single-mode state into weighted pure states.
pub fn cavity_ensemble(
    spec: &CavityFieldSpec,
    cutoff: usize,
    omega: f64,
) -> Result<Vec<(f64, DVector<C64>)>, DynamicsError> {
    if cutoff < 1 {
        return Err(DynamicsError::InvalidState("cutoff must be at least 1".into()));
    }
    let fock = |n: usize| {
        let mut v = DVector::<C64>::zeros(cutoff + 1);
        v[n] = C64::new(1.0, 0.0);
        v
    };
    match *spec {
        CavityFieldSpec::Vacuum => Ok(vec![(1.0, fock(0))]),
        CavityFieldSpec::Coherent { gamma_re, gamma_im } => {
            let (v, tail) = coherent_amplitudes(C64::new(gamma_re, gamma_im), cutoff);
            if tail > TAIL_TOLERANCE {
                return Err(DynamicsError::TailMassTooLarge { mass: tail });
            }
            let norm = v.norm();
            Ok(vec![(1.0, v / C64::new(norm, 0.0))])
        }
        CavityFieldSpec::Thermal { temp_mk } => {
            if !(temp_mk > 0.0 && temp_mk.is_finite()) {
                return Err(DynamicsError::InvalidState("temperature must be positive".into()));
            }
            let ratio = (-HBAR * omega * 1e9 / (BOLTZMANN * temp_mk * 1e-3)).exp();
            let tail = ratio.powi(cutoff as i32 + 1);
            if tail > TAIL_TOLERANCE {
                return Err(DynamicsError::TailMassTooLarge { mass: tail });
            }
            let weights: Vec<f64> = (0..=cutoff).map(|n| ratio.powi(n as i32)).collect();
            let total: f64 = weights.iter().sum();
            Ok(weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w / total > 1e-18)
                .map(|(n, w)| (w / total, fock(n)))
                .collect())
        }
    }
}

/// Density matrix of one mode, renormalised to unit trace.
pub fn cavity_state(spec: &CavityFieldSpec, cutoff: usize, omega: f64) -> Result<DMatrix<C64>, DynamicsError> {
    let mut rho = DMatrix::<C64>::zeros(cutoff + 1, cutoff + 1);
    for (w, v) in cavity_ensemble(spec, cutoff, omega)? {
        rho += &v * v.adjoint() * C64::new(w, 0.0);
    }
    Ok(rho)
}

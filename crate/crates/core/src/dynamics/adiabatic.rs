use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_rabi_hamiltonian, Propagator};
use super::{DynamicsError, RabiSystem};
use crate::linalg::C64;

/// Fewest piecewise-constant segments accepted for a ramp.
pub const MIN_STEPS: usize = 500;

/// Largest allowed change of the final fidelity when the step is halved.
pub const HALVING_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    /// `g(t) = g0 (1 - t/T)`.
    LinearInG,
    /// `g(t) = g0 cos(pi f3(t))` with `f3` rising linearly from 0 to 1/2.
    LinearInFlux,
}

impl RampShape {
    /// Coupling multiplier at fraction `s` of the ramp.
    pub fn factor(self, s: f64) -> f64 {
        match self {
            Self::LinearInG => 1.0 - s,
            Self::LinearInFlux => (PI * s / 2.0).cos(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    /// Initial coupling of every qubit, rad/ns.
    pub g0: f64,
    /// Ramp duration, ns.
    pub total_time: f64,
    pub shape: RampShape,
    pub steps: usize,
    /// Repeat with half the step and fail if the final fidelity moves by
    /// more than [`HALVING_TOL`].
    pub check_halving: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdiabaticTrace {
    /// Segment boundaries in ns.
    pub times: Vec<f64>,
    /// Overlap with `|g...g> (x) |0...0>` at each boundary.
    pub fidelity: Vec<f64>,
    pub final_fidelity: f64,
    /// Final fidelity difference against the half-step run, if performed.
    pub halving_change: Option<f64>,
}

fn run(system: &RabiSystem, ramp: &RampSpec, steps: usize) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
    let at = |factor: f64| {
        let mut s = system.clone();
        s.couplings.iter_mut().for_each(|g| *g = ramp.g0 * factor);
        s
    };
    let mut psi: DVector<C64> = Propagator::new(&build_rabi_hamiltonian(&at(1.0))?).ground_state();
    let dt = ramp.total_time / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut fidelity = Vec::with_capacity(steps + 1);
    times.push(0.0);
    fidelity.push(psi[0].norm_sqr());
    for k in 0..steps {
        let s = (k as f64 + 0.5) / steps as f64;
        let prop = Propagator::new(&build_rabi_hamiltonian(&at(ramp.shape.factor(s)))?);
        psi = prop.apply(&psi, dt);
        times.push(dt * (k + 1) as f64);
        fidelity.push(psi[0].norm_sqr());
    }
    Ok((times, fidelity))
}

/// Starts in the exact ground state at `g0`, switches the coupling off
/// along `ramp`, and records the overlap with the uncoupled ground state.
pub fn adiabatic_initialize(system: &RabiSystem, ramp: &RampSpec) -> Result<AdiabaticTrace, DynamicsError> {
    system.validate()?;
    if !(ramp.g0 >= 0.0 && ramp.g0.is_finite()) {
        return Err(DynamicsError::InvalidSystem("g0 must be non-negative".into()));
    }
    if !(ramp.total_time > 0.0 && ramp.total_time.is_finite()) {
        return Err(DynamicsError::InvalidSystem("ramp time must be positive".into()));
    }
    if ramp.steps < MIN_STEPS {
        return Err(DynamicsError::InvalidSystem(format!("at least {MIN_STEPS} steps are required")));
    }
    let (times, fidelity) = run(system, ramp, ramp.steps)?;
    let final_fidelity = *fidelity.last().expect("at least one step");
    let halving_change = if ramp.check_halving {
        let (_, fine) = run(system, ramp, 2 * ramp.steps)?;
        let change = (fine.last().expect("non-empty") - final_fidelity).abs();
        if change > HALVING_TOL {
            return Err(DynamicsError::StepCountTooLow { steps: ramp.steps, change });
        }
        Some(change)
    } else {
        None
    };
    Ok(AdiabaticTrace { times, fidelity, final_fidelity, halving_change })
}

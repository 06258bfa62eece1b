//! Closed-form propagator for purely longitudinal coupling.
//!
//! With `c_x = 0` every `sigma_z` is conserved, so on a fixed qubit
//! configuration each mode sees a driven oscillator
//! `w (a^+ a + xi (a + a^+))` with `xi = sum_j g_j c_z^j s_j / w`, whose
//! propagator is `exp(i xi^2 (w t - sin w t)) exp(-i w t a^+ a) D((1 - e^{i w t}) xi)`.

use nalgebra::{DMatrix, DVector};

use super::state::{QuantumState, StateRepr};
use super::{spin, DynamicsError, RabiSystem, DENSE_LIMIT};
use crate::linalg::{hermitian_eigen, C64, I};

const TRANSVERSAL_TOL: f64 = 1e-12;

/// `exp(beta a^+ - beta^* a)` on Fock states `0..=cutoff`, exponentiating
/// the truncated generator so the result is exactly unitary.
pub fn displacement(beta: C64, cutoff: usize) -> DMatrix<C64> {
    let d = cutoff + 1;
    // K = -i (beta a^+ - beta^* a) is Hermitian and D = exp(i K).
    let mut k = DMatrix::<C64>::zeros(d, d);
    for n in 0..cutoff {
        let s = ((n + 1) as f64).sqrt();
        k[(n + 1, n)] = -I * beta * s;
        k[(n, n + 1)] = I * beta.conj() * s;
    }
    let eig = hermitian_eigen(&k);
    let mut scaled = eig.vectors.clone();
    for (c, lam) in eig.values.iter().enumerate() {
        let ph = C64::from_polar(1.0, *lam);
        scaled.column_mut(c).iter_mut().for_each(|z| *z *= ph);
    }
    scaled * eig.vectors.adjoint()
}

fn single_mode_operator(omega: f64, xi: f64, cutoff: usize, t: f64) -> DMatrix<C64> {
    let wt = omega * t;
    let beta = C64::new(xi, 0.0) * (C64::from_polar(1.0, -wt) - 1.0);
    let phase = C64::from_polar(1.0, xi * xi * (wt - wt.sin()));
    let mut op = displacement(beta, cutoff);
    for n in 0..=cutoff {
        let rot = C64::from_polar(1.0, -wt * n as f64) * phase;
        for r in 0..=cutoff {
            op[(r, n)] *= rot;
        }
    }
    op
}

fn check_longitudinal(system: &RabiSystem) -> Result<(), DynamicsError> {
    system.validate()?;
    for (j, cx) in system.cx.iter().enumerate() {
        if cx.abs() > TRANSVERSAL_TOL {
            return Err(DynamicsError::TransversalCouplingPresent { qubit: j, cx: *cx });
        }
    }
    Ok(())
}

/// Operator on the whole mode register for qubit configuration `q`.
fn mode_block(system: &RabiSystem, q: usize, t: f64) -> DMatrix<C64> {
    let nq = system.n_qubits();
    let drive: f64 = (0..nq).map(|j| system.couplings[j] * system.cz[j] * spin(q, j)).sum();
    let qubit_phase: f64 = (0..nq).map(|j| -0.5 * t * system.qubit_freqs[j] * spin(q, j)).sum();
    let mut block = DMatrix::from_element(1, 1, C64::from_polar(1.0, qubit_phase));
    for (l, &w) in system.mode_freqs.iter().enumerate() {
        let op = single_mode_operator(w, drive / w, system.cutoffs[l], t);
        // Mode 0 is the fastest-varying index, so later modes go on the left.
        block = op.kronecker(&block);
    }
    block
}

/// Full analytic propagator as a dense matrix.
pub fn analytic_unitary(system: &RabiSystem, t: f64) -> Result<DMatrix<C64>, DynamicsError> {
    check_longitudinal(system)?;
    let layout = system.layout();
    let dim = layout.dimension();
    if dim > DENSE_LIMIT {
        return Err(DynamicsError::DimensionGuard { dim, limit: DENSE_LIMIT });
    }
    let dq = layout.qubit_dim();
    let mut u = DMatrix::<C64>::zeros(dim, dim);
    for q in 0..dq {
        let block = mode_block(system, q, t);
        for c in 0..block.ncols() {
            for r in 0..block.nrows() {
                u[(q + dq * r, q + dq * c)] = block[(r, c)];
            }
        }
    }
    Ok(u)
}

/// Applies the analytic propagator to `state`; fails if any `c_x` is nonzero.
pub fn evolve_analytic(system: &RabiSystem, state: &QuantumState, t: f64) -> Result<QuantumState, DynamicsError> {
    check_longitudinal(system)?;
    if state.layout != system.layout() {
        return Err(DynamicsError::InvalidState("state layout does not match the system".into()));
    }
    let dq = state.layout.qubit_dim();
    let dm = state.layout.mode_dim();
    let repr = match &state.repr {
        StateRepr::Pure(psi) => {
            let mut out = DVector::<C64>::zeros(psi.len());
            for q in 0..dq {
                let block = mode_block(system, q, t);
                let slice = DVector::from_fn(dm, |m, _| psi[q + dq * m]);
                let moved = block * slice;
                for m in 0..dm {
                    out[q + dq * m] = moved[m];
                }
            }
            StateRepr::Pure(out)
        }
        StateRepr::Mixed(rho) => {
            let u = analytic_unitary(system, t)?;
            StateRepr::Mixed(&u * rho * u.adjoint())
        }
    };
    Ok(QuantumState { layout: state.layout.clone(), repr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;
    use approx::assert_relative_eq;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let beta = C64::new(0.4, -0.3);
        let d = displacement(beta, 30);
        let norm = (-beta.norm_sqr() / 2.0).exp();
        for n in 0..10 {
            let expected = norm * beta.powu(n as u32) / factorial(n).sqrt();
            assert!((d[(n, 0)] - expected).norm() < 1e-12, "n={n}");
        }
        assert!(unitarity_defect(&d) < 1e-12);
    }

    #[test]
    fn displacement_composition_phase() {
        // D(a) D(b) = exp((a b^* - a^* b)/2) D(a + b), checked on low Fock states.
        let (a, b) = (C64::new(0.2, 0.1), C64::new(-0.15, 0.3));
        let lhs = displacement(a, 40) * displacement(b, 40);
        let rhs = displacement(a + b, 40) * ((a * b.conj() - a.conj() * b) / 2.0).exp();
        for r in 0..8 {
            for c in 0..8 {
                assert!((lhs[(r, c)] - rhs[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transversal_coupling_is_rejected() {
        let s = RabiSystem::symmetric(1, 1, 1.0, 1.0, 0.1, 0.2, 4).unwrap();
        assert!(matches!(analytic_unitary(&s, 1.0), Err(DynamicsError::TransversalCouplingPresent { qubit: 0, .. })));
    }

    #[test]
    fn identity_at_time_zero() {
        let s = RabiSystem::symmetric(2, 2, 2.0, 1.3, 0.17, 0.0, 4).unwrap();
        let u = analytic_unitary(&s, 0.0).unwrap();
        let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
        assert!((u - id).norm() < 1e-12);
    }

    #[test]
    fn full_period_leaves_only_phases() {
        let s = RabiSystem::symmetric(2, 2, 2.0, 1.3, 0.17, 0.0, 6).unwrap();
        let u = analytic_unitary(&s, 2.0 * std::f64::consts::PI / 2.0).unwrap();
        for r in 0..u.nrows() {
            for c in 0..u.ncols() {
                if r != c {
                    assert!(u[(r, c)].norm() < 1e-10);
                } else {
                    assert_relative_eq!(u[(r, c)].norm(), 1.0, epsilon = 1e-10);
                }
            }
        }
    }
}

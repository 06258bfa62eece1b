use nalgebra::{DMatrix, DVector};

use super::state::{QuantumState, StateRepr};
use super::{spin, DynamicsError, RabiSystem, DENSE_LIMIT};
use crate::linalg::{symmetric_eigen, SymmetricEigen, C64};

/// Dense real symmetric matrix of
/// `sum_j w_j sz_j / 2 + sum_l w_l n_l + sum_{j,l} g_j (cx_j sx_j + cz_j sz_j)(a_l + a_l^+)`.
pub fn build_rabi_hamiltonian(system: &RabiSystem) -> Result<DMatrix<f64>, DynamicsError> {
    system.validate()?;
    let layout = system.layout();
    let dim = layout.dimension();
    if dim > DENSE_LIMIT {
        return Err(DynamicsError::DimensionGuard { dim, limit: DENSE_LIMIT });
    }
    let nq = system.n_qubits();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let (q, fock) = layout.split(i);
        let mut diag = 0.0;
        for j in 0..nq {
            diag += 0.5 * system.qubit_freqs[j] * spin(q, j);
        }
        for (l, n) in fock.iter().enumerate() {
            diag += system.mode_freqs[l] * *n as f64;
        }
        h[(i, i)] = diag;

        let longitudinal: f64 = (0..nq).map(|j| system.couplings[j] * system.cz[j] * spin(q, j)).sum();
        for (l, &n) in fock.iter().enumerate() {
            if n == system.cutoffs[l] {
                continue;
            }
            let up = i + layout.mode_stride(l);
            let amp = ((n + 1) as f64).sqrt();
            h[(up, i)] += amp * longitudinal;
            h[(i, up)] += amp * longitudinal;
            for j in 0..nq {
                let t = amp * system.couplings[j] * system.cx[j];
                if t != 0.0 {
                    let flipped = up ^ (1 << j);
                    h[(flipped, i)] += t;
                    h[(i, flipped)] += t;
                }
            }
        }
    }
    Ok(h)
}

/// `exp(-i H t)` for a fixed real symmetric `H`, via one eigendecomposition.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigen: SymmetricEigen,
}

impl Propagator {
    pub fn new(h: &DMatrix<f64>) -> Self {
        Self { eigen: symmetric_eigen(h) }
    }

    pub fn from_system(system: &RabiSystem) -> Result<Self, DynamicsError> {
        Ok(Self::new(&build_rabi_hamiltonian(system)?))
    }

    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn ground_state(&self) -> DVector<C64> {
        self.eigen.vectors.column(0).map(|x| C64::new(x, 0.0))
    }

    pub fn apply(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let v = &self.eigen.vectors;
        let re = psi.map(|z| z.re);
        let im = psi.map(|z| z.im);
        let cr = v.tr_mul(&re);
        let ci = v.tr_mul(&im);
        let mut rot_re = DVector::<f64>::zeros(cr.len());
        let mut rot_im = DVector::<f64>::zeros(cr.len());
        for k in 0..cr.len() {
            let (s, c) = (-self.eigen.values[k] * t).sin_cos();
            rot_re[k] = c * cr[k] - s * ci[k];
            rot_im[k] = s * cr[k] + c * ci[k];
        }
        let out_re = v * rot_re;
        let out_im = v * rot_im;
        DVector::from_fn(psi.len(), |i, _| C64::new(out_re[i], out_im[i]))
    }

    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        let v = &self.eigen.vectors;
        let mut vc = v.clone();
        let mut vs = v.clone();
        for (k, e) in self.eigen.values.iter().enumerate() {
            let (s, c) = (-e * t).sin_cos();
            vc.column_mut(k).scale_mut(c);
            vs.column_mut(k).scale_mut(s);
        }
        let re = vc * v.transpose();
        let im = vs * v.transpose();
        re.zip_map(&im, C64::new)
    }

    pub fn evolve(&self, state: &QuantumState, t: f64) -> QuantumState {
        let repr = match &state.repr {
            StateRepr::Pure(psi) => StateRepr::Pure(self.apply(psi, t)),
            StateRepr::Mixed(rho) => {
                let u = self.unitary(t);
                StateRepr::Mixed(&u * rho * u.adjoint())
            }
        };
        QuantumState { layout: state.layout.clone(), repr }
    }
}

/// Exact propagation of `state` under the time-independent Hamiltonian.
pub fn evolve_numeric(system: &RabiSystem, state: &QuantumState, t: f64) -> Result<QuantumState, DynamicsError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DynamicsError::InvalidState(format!("time {t} must be non-negative")));
    }
    if state.layout != system.layout() {
        return Err(DynamicsError::InvalidState("state layout does not match the system".into()));
    }
    Ok(Propagator::from_system(system)?.evolve(state, t))
}

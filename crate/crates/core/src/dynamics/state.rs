use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{BasisLayout, DynamicsError};
use crate::linalg::{hermitian_eigen, hermiticity_defect, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StateRepr {
    #[serde(skip)]
    Pure(DVector<C64>),
    #[serde(skip)]
    Mixed(DMatrix<C64>),
}

/// A state of the qubit-oscillator register in the layout of [`BasisLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    pub layout: BasisLayout,
    pub repr: StateRepr,
}

impl QuantumState {
    pub fn pure(layout: BasisLayout, psi: DVector<C64>) -> Result<Self, DynamicsError> {
        if psi.len() != layout.dimension() {
            return Err(DynamicsError::InvalidState(format!(
                "vector length {} does not match dimension {}",
                psi.len(),
                layout.dimension()
            )));
        }
        Ok(Self { layout, repr: StateRepr::Pure(psi) })
    }

    pub fn mixed(layout: BasisLayout, rho: DMatrix<C64>) -> Result<Self, DynamicsError> {
        let d = layout.dimension();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(DynamicsError::InvalidState(format!("density matrix is not {d}x{d}")));
        }
        Ok(Self { layout, repr: StateRepr::Mixed(rho) })
    }

    /// Tensor product of single-qubit amplitudes `[g, e]` and one pure
    /// vector per mode.
    pub fn product(layout: BasisLayout, qubits: &[[C64; 2]], modes: &[DVector<C64>]) -> Result<Self, DynamicsError> {
        if qubits.len() != layout.n_qubits || modes.len() != layout.cutoffs.len() {
            return Err(DynamicsError::InvalidState("factor count does not match layout".into()));
        }
        for (m, c) in modes.iter().zip(&layout.cutoffs) {
            if m.len() != c + 1 {
                return Err(DynamicsError::InvalidState("mode vector length does not match cutoff".into()));
            }
        }
        let psi = DVector::from_fn(layout.dimension(), |i, _| {
            let (q, fock) = layout.split(i);
            let mut amp = C64::new(1.0, 0.0);
            for (j, qa) in qubits.iter().enumerate() {
                amp *= qa[q >> j & 1];
            }
            for (m, n) in modes.iter().zip(&fock) {
                amp *= m[*n];
            }
            amp
        });
        Self::pure(layout, psi)
    }

    /// Every qubit in `qubit` and every mode in `|0>`.
    pub fn qubits_with_vacuum(layout: BasisLayout, qubit: [C64; 2]) -> Result<Self, DynamicsError> {
        let qs = vec![qubit; layout.n_qubits];
        let modes: Vec<DVector<C64>> = layout.cutoffs.iter().map(|c| fock_state(*c, 0)).collect();
        Self::product(layout, &qs, &modes)
    }

    pub fn dimension(&self) -> usize {
        self.layout.dimension()
    }

    pub fn density(&self) -> DMatrix<C64> {
        match &self.repr {
            StateRepr::Pure(psi) => psi * psi.adjoint(),
            StateRepr::Mixed(rho) => rho.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(psi) => psi.norm_squared(),
            StateRepr::Mixed(rho) => rho.trace().re,
        }
    }

    /// Checks unit norm (pure) or unit trace, Hermiticity and positivity (mixed).
    pub fn check(&self) -> Result<(), DynamicsError> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(DynamicsError::InvalidState(format!("trace {tr} differs from 1")));
        }
        if let StateRepr::Mixed(rho) = &self.repr {
            if hermiticity_defect(rho) > 1e-10 {
                return Err(DynamicsError::InvalidState("density matrix is not Hermitian".into()));
            }
            let min = hermitian_eigen(rho).values[0];
            if min < -1e-9 {
                return Err(DynamicsError::InvalidState(format!("negative eigenvalue {min}")));
            }
        }
        Ok(())
    }

    /// Reduced density matrix of the qubit register (modes traced out).
    pub fn reduced_qubits(&self) -> DMatrix<C64> {
        let dq = self.layout.qubit_dim();
        let dm = self.layout.mode_dim();
        let mut out = DMatrix::<C64>::zeros(dq, dq);
        match &self.repr {
            StateRepr::Pure(psi) => {
                // psi viewed as a dq x dm matrix, column-major in the mode index.
                let block = DMatrix::from_column_slice(dq, dm, psi.as_slice());
                out = &block * block.adjoint();
            }
            StateRepr::Mixed(rho) => {
                for m in 0..dm {
                    for a in 0..dq {
                        for b in 0..dq {
                            out[(a, b)] += rho[(a + dq * m, b + dq * m)];
                        }
                    }
                }
            }
        }
        out
    }

    /// Reduced density matrix of all modes (qubits traced out).
    pub fn reduced_modes(&self) -> DMatrix<C64> {
        let dq = self.layout.qubit_dim();
        let dm = self.layout.mode_dim();
        let mut out = DMatrix::<C64>::zeros(dm, dm);
        match &self.repr {
            StateRepr::Pure(psi) => {
                let block = DMatrix::from_column_slice(dq, dm, psi.as_slice());
                out = block.transpose() * block.map(|z| z.conj());
            }
            StateRepr::Mixed(rho) => {
                for m in 0..dm {
                    for n in 0..dm {
                        for q in 0..dq {
                            out[(m, n)] += rho[(q + dq * m, q + dq * n)];
                        }
                    }
                }
            }
        }
        out
    }

    /// `<phi|rho|phi>` for a pure `phi` on the full space.
    pub fn overlap_with(&self, phi: &DVector<C64>) -> f64 {
        match &self.repr {
            StateRepr::Pure(psi) => phi.dotc(psi).norm_sqr(),
            StateRepr::Mixed(rho) => phi.dotc(&(rho * phi)).re,
        }
    }

    /// Uhlmann fidelity with another state; for at least one pure side this
    /// is `<psi|rho|psi>`.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64, DynamicsError> {
        if self.layout != other.layout {
            return Err(DynamicsError::InvalidState("layouts differ".into()));
        }
        match (&self.repr, &other.repr) {
            (_, StateRepr::Pure(phi)) => Ok(self.overlap_with(phi)),
            (StateRepr::Pure(psi), _) => Ok(other.overlap_with(psi)),
            (StateRepr::Mixed(a), StateRepr::Mixed(b)) => Ok(mixed_fidelity(a, b)),
        }
    }

    /// `tr(rho H)` for a real symmetric operator.
    pub fn expectation_real(&self, op: &DMatrix<f64>) -> f64 {
        match &self.repr {
            StateRepr::Pure(psi) => {
                let re = psi.map(|z| z.re);
                let im = psi.map(|z| z.im);
                re.dot(&(op * &re)) + im.dot(&(op * &im))
            }
            StateRepr::Mixed(rho) => {
                let mut acc = 0.0;
                for r in 0..op.nrows() {
                    for c in 0..op.ncols() {
                        acc += op[(r, c)] * rho[(c, r)].re;
                    }
                }
                acc
            }
        }
    }
}

/// `(tr sqrt(sqrt(a) b sqrt(a)))^2`.
pub fn mixed_fidelity(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let sa = matrix_sqrt(a);
    let inner = &sa * b * &sa;
    let eig = hermitian_eigen(&inner);
    let t: f64 = eig.values.iter().map(|v| v.max(0.0).sqrt()).sum();
    t * t
}

fn matrix_sqrt(a: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen(a);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|v| C64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    &eig.vectors * d * eig.vectors.adjoint()
}

pub(crate) fn fock_state(cutoff: usize, n: usize) -> DVector<C64> {
    let mut v = DVector::zeros(cutoff + 1);
    v[n] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plus() -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [C64::new(s, 0.0), C64::new(s, 0.0)]
    }

    #[test]
    fn product_state_is_normalised_and_traces_correctly() {
        let layout = BasisLayout { n_qubits: 2, cutoffs: vec![2, 3] };
        let st = QuantumState::qubits_with_vacuum(layout, plus()).unwrap();
        st.check().unwrap();
        let rq = st.reduced_qubits();
        for a in 0..4 {
            for b in 0..4 {
                assert_relative_eq!(rq[(a, b)].re, 0.25, epsilon = 1e-14);
            }
        }
        let rm = st.reduced_modes();
        assert_relative_eq!(rm[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(rm.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn mixed_and_pure_partial_traces_agree() {
        let layout = BasisLayout { n_qubits: 1, cutoffs: vec![2] };
        let psi = DVector::from_fn(6, |i, _| C64::new(i as f64 + 1.0, 0.5 - i as f64));
        let psi = &psi / C64::new(psi.norm(), 0.0);
        let pure = QuantumState::pure(layout.clone(), psi.clone()).unwrap();
        let mixed = QuantumState::mixed(layout, pure.density()).unwrap();
        assert!((pure.reduced_qubits() - mixed.reduced_qubits()).norm() < 1e-14);
        assert!((pure.reduced_modes() - mixed.reduced_modes()).norm() < 1e-14);
        assert_relative_eq!(mixed.fidelity(&pure).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(mixed_fidelity(&mixed.density(), &pure.density()), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn invalid_states_are_reported() {
        let layout = BasisLayout { n_qubits: 1, cutoffs: vec![1] };
        let bad = QuantumState::pure(layout.clone(), DVector::from_element(4, C64::new(1.0, 0.0))).unwrap();
        assert!(bad.check().is_err());
        assert!(QuantumState::pure(layout, DVector::zeros(3)).is_err());
    }
}

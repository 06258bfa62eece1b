use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix4};

use super::graph::GraphSpec;
use super::pauli::PauliString;
use super::GraphCodeError;
use crate::linalg::C64;

/// Largest register handled densely.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Dense state on `n` qubits; qubit `q` is bit `q` of the basis index and
/// `|0> = |g>`, `|1> = |e>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: DVector<C64>,
}

/// Which controlled-phase operator builds the graph state.
#[derive(Clone, Debug, PartialEq)]
pub enum GateSource {
    /// `diag(1, 1, 1, -1)`.
    Ideal,
    /// A two-qubit unitary, index `q_a + 2 q_b` for the edge `(a, b)`.
    Custom(Matrix4<C64>),
}

impl GateSource {
    /// Strips local `Z` rotations and the global phase from a diagonal
    /// two-qubit gate, leaving `diag(1, 1, 1, e^{i phi})`.
    pub fn phase_corrected(u: &DMatrix<C64>, tol: f64) -> Result<Self, GraphCodeError> {
        if u.shape() != (4, 4) {
            return Err(GraphCodeError::InvalidArgument("expected a 4x4 gate".into()));
        }
        for r in 0..4 {
            for c in 0..4 {
                if r != c && u[(r, c)].norm() > tol {
                    return Err(GraphCodeError::NotDiagonal(u[(r, c)].norm()));
                }
            }
        }
        let d: Vec<C64> = (0..4).map(|k| u[(k, k)]).collect();
        let entangling = d[0] * d[3] / (d[1] * d[2]);
        let mut m = Matrix4::<C64>::identity();
        m[(3, 3)] = entangling / entangling.norm();
        Ok(GateSource::Custom(m))
    }

    fn matrix(&self) -> Matrix4<C64> {
        match self {
            GateSource::Ideal => {
                let mut m = Matrix4::<C64>::identity();
                m[(3, 3)] = C64::new(-1.0, 0.0);
                m
            }
            GateSource::Custom(m) => *m,
        }
    }
}

impl Statevector {
    pub fn plus_state(n: usize) -> Result<Self, GraphCodeError> {
        if n == 0 || n > DENSE_QUBIT_LIMIT {
            return Err(GraphCodeError::DimensionGuard { n, limit: DENSE_QUBIT_LIMIT });
        }
        let dim = 1usize << n;
        let a = C64::new(FRAC_1_SQRT_2.powi(n as i32), 0.0);
        Ok(Self { n, amps: DVector::from_element(dim, a) })
    }

    pub fn from_amplitudes(n: usize, amps: DVector<C64>) -> Result<Self, GraphCodeError> {
        if n == 0 || n > DENSE_QUBIT_LIMIT {
            return Err(GraphCodeError::DimensionGuard { n, limit: DENSE_QUBIT_LIMIT });
        }
        if amps.len() != 1 << n {
            return Err(GraphCodeError::InvalidArgument("amplitude count does not match".into()));
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let both = (1usize << a) | (1 << b);
        for (i, z) in self.amps.iter_mut().enumerate() {
            if i & both == both {
                *z = -*z;
            }
        }
    }

    /// Applies `u` to qubits `(a, b)`, with `a` the low bit of the 4x4 index.
    pub fn apply_two_qubit(&mut self, a: usize, b: usize, u: &Matrix4<C64>) {
        let (ba, bb) = (1usize << a, 1usize << b);
        for base in 0..self.amps.len() {
            if base & (ba | bb) != 0 {
                continue;
            }
            let idx = [base, base | ba, base | bb, base | ba | bb];
            let old = idx.map(|i| self.amps[i]);
            for r in 0..4 {
                self.amps[idx[r]] = (0..4).map(|c| u[(r, c)] * old[c]).sum();
            }
        }
    }

    /// `P |psi>` for a Pauli string on the same register.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let (x, z) = (p.x_mask() as usize, p.z_mask() as usize);
        let base = C64::new(0.0, 1.0).powu((p.phase() as u32 + (x & z).count_ones()) % 4);
        let old = self.amps.clone();
        for (b, amp) in old.iter().enumerate() {
            let sign = if (z & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            self.amps[b ^ x] = base * *amp * sign;
        }
    }

    pub fn expectation(&self, p: &PauliString) -> C64 {
        let mut out = self.clone();
        out.apply_pauli(p);
        self.amps.dotc(&out.amps)
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr() / (self.amps.norm_squared() * other.amps.norm_squared())
    }

    /// Projects qubit `q` onto `|+>` (`sign = 1`) or `|->` and removes it.
    /// Returns the reduced, renormalised state and the outcome probability.
    pub fn measure_x(&self, q: usize, sign: i8) -> Result<(Self, f64), GraphCodeError> {
        if q >= self.n || self.n == 1 {
            return Err(GraphCodeError::InvalidArgument(format!("cannot measure qubit {q} of {}", self.n)));
        }
        let bit = 1usize << q;
        let s = if sign >= 0 { 1.0 } else { -1.0 };
        let mut reduced = DVector::<C64>::zeros(1 << (self.n - 1));
        for (k, out) in reduced.iter_mut().enumerate() {
            let low = k & (bit - 1);
            let i0 = low | ((k & !(bit - 1)) << 1);
            *out = (self.amps[i0] + self.amps[i0 | bit] * s) * FRAC_1_SQRT_2;
        }
        let prob = reduced.norm_squared() / self.amps.norm_squared();
        if prob < 1e-14 {
            return Err(GraphCodeError::ZeroProjection(q));
        }
        let norm = reduced.norm();
        reduced /= C64::new(norm, 0.0);
        Ok((Self { n: self.n - 1, amps: reduced }, prob))
    }

    /// Projects the listed qubits onto `|+>` one after another (highest index
    /// first, so earlier labels stay valid) and returns the joint probability.
    pub fn postselect_plus(&self, qubits: &[usize]) -> Result<(Self, f64), GraphCodeError> {
        let mut order = qubits.to_vec();
        order.sort_unstable_by(|a, b| b.cmp(a));
        let mut state = self.clone();
        let mut prob = 1.0;
        for q in order {
            let (next, p) = state.measure_x(q, 1)?;
            state = next;
            prob *= p;
        }
        Ok((state, prob))
    }
}

/// `prod_{edges} CZ |+>^n` with edges applied in list order. Measurements
/// listed in the graph are not performed.
pub fn build_cluster_statevector(graph: &GraphSpec, gate: &GateSource) -> Result<Statevector, GraphCodeError> {
    graph.validate()?;
    let mut state = Statevector::plus_state(graph.n_vertices)?;
    let u = gate.matrix();
    for &(a, b) in &graph.edges {
        match gate {
            GateSource::Ideal => state.apply_cz(a, b),
            GateSource::Custom(_) => state.apply_two_qubit(a, b, &u),
        }
    }
    Ok(state)
}

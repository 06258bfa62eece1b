//! Graph states, stabilizer algebra and the two target codes.
//!
//! Conventions: qubit `q` is bit `q` of a basis index, `|0> = |g>`,
//! `Z|0> = |0>`, and `CZ = diag(1, 1, 1, -1)`. Vertex labels in text files
//! are 1-based; everything in code is 0-based.

mod codes;
mod graph;
mod lc;
mod pauli;
mod statevector;
mod tableau;

use thiserror::Error;

pub use codes::{
    code_distance, five_qubit_code, logical_pair_valid, lu_to_code, ring_code_from_cluster, steane_code,
    transversal_logicals, verify_five_qubit, verify_steane, Distance, FiveQubitReport, SteaneReport,
    DISTANCE_QUBIT_LIMIT,
};
pub use graph::{cluster_stabilizers, local_complement, GraphSpec};
pub use lc::{
    find_local_clifford, lc_orbit_check, measured_graph_state, LcWitness, LocalClifford, SingleClifford,
    DEFAULT_ORBIT_BUDGET,
};
pub use pauli::{Letter, PauliString, MAX_QUBITS};
pub use statevector::{build_cluster_statevector, GateSource, Statevector, DENSE_QUBIT_LIMIT};
pub use tableau::{symplectic_rank, MeasureOutcome, StabilizerTableau, XMeasurement};

#[derive(Debug, Error, PartialEq)]
pub enum GraphCodeError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("generators are not independent")]
    Dependent,
    #[error("generator {0} is not Hermitian")]
    NonHermitian(usize),
    #[error("dense simulation of {n} qubits exceeds the limit of {limit}")]
    DimensionGuard { n: usize, limit: usize },
    #[error("outcome has zero probability when measuring qubit {0}")]
    ZeroProjection(usize),
    #[error("qubit {0} is not in an X eigenstate")]
    NotMeasured(usize),
    #[error("gate is not diagonal (off-diagonal magnitude {0:e})")]
    NotDiagonal(f64),
    #[error("orbit search stopped after {visited} graphs")]
    SearchBudgetExceeded { visited: usize },
}

use serde::Serialize;

use super::graph::{cluster_stabilizers, GraphSpec};
use super::lc::{lc_orbit_check, LocalClifford, SingleClifford, DEFAULT_ORBIT_BUDGET};
use super::pauli::{Letter, PauliString};
use super::statevector::{build_cluster_statevector, GateSource};
use super::tableau::StabilizerTableau;
use super::GraphCodeError;

/// Largest register accepted by [`code_distance`].
pub const DISTANCE_QUBIT_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Exact(usize),
    /// No logical operator of weight below this bound.
    AtLeast(usize),
}

/// Cyclic shifts of `XZZXI`.
pub fn five_qubit_code() -> StabilizerTableau {
    StabilizerTableau::from_strs(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).expect("valid code")
}

const HAMMING_CHECKS: [[usize; 4]; 3] = [[3, 4, 5, 6], [1, 2, 5, 6], [0, 2, 4, 6]];

/// X- and Z-type parity checks of the [7,4] Hamming code.
pub fn steane_code() -> StabilizerTableau {
    let mut gens: Vec<PauliString> = HAMMING_CHECKS.iter().map(|c| PauliString::x_on(7, c)).collect();
    gens.extend(HAMMING_CHECKS.iter().map(|c| PauliString::z_on(7, c)));
    StabilizerTableau::new(7, gens).expect("valid code")
}

/// Transversal logical `(X, Z)` of a code on `n` qubits.
pub fn transversal_logicals(n: usize) -> (PauliString, PauliString) {
    let all: Vec<usize> = (0..n).collect();
    (PauliString::x_on(n, &all), PauliString::z_on(n, &all))
}

/// Products of neighbouring cluster generators on a ring,
/// `S'_i = K_i K_{i+1 mod n}` for `i < n - 1`, plus the logicals
/// `X = K_n` and `Z = Z_1 ... Z_n`.
pub fn ring_code_from_cluster(cluster: &StabilizerTableau) -> Result<(StabilizerTableau, PauliString, PauliString), GraphCodeError> {
    let n = cluster.num_qubits();
    let k = cluster.generators();
    let gens = (0..n - 1).map(|i| k[i] * k[(i + 1) % n]).collect();
    let code = StabilizerTableau::new(n, gens)?;
    let all: Vec<usize> = (0..n).collect();
    Ok((code, k[n - 1], PauliString::z_on(n, &all)))
}

/// Conjugates every generator by `map`.
pub fn lu_to_code(tableau: &StabilizerTableau, map: &LocalClifford) -> Result<StabilizerTableau, GraphCodeError> {
    tableau.map(|g| map.apply(g))
}

/// Minimum weight of a Pauli string that commutes with every stabilizer but
/// is not in the group (up to sign), searched up to weight `w_max`.
pub fn code_distance(stabilizers: &StabilizerTableau, w_max: usize) -> Result<Distance, GraphCodeError> {
    let n = stabilizers.num_qubits();
    if n > DISTANCE_QUBIT_LIMIT || w_max > n {
        return Err(GraphCodeError::InvalidArgument(format!("brute force needs n <= {DISTANCE_QUBIT_LIMIT} and w_max <= n")));
    }
    for w in 1..=w_max {
        let supports: Vec<u64> = (1u64..1 << n).filter(|m| m.count_ones() as usize == w).collect();
        let has_logical = |&support: &u64| -> bool {
            let qubits: Vec<usize> = (0..n).filter(|q| support >> q & 1 == 1).collect();
            (0..3usize.pow(w as u32)).any(|mut code| {
                let mut p = PauliString::identity(n);
                for &q in &qubits {
                    p.set_letter(q, Letter::NONTRIVIAL[code % 3]);
                    code /= 3;
                }
                stabilizers.commutes_with_all(&p) && stabilizers.membership(&p).is_none()
            })
        };
        #[cfg(feature = "parallel")]
        let found = {
            use rayon::prelude::*;
            supports.par_iter().any(has_logical)
        };
        #[cfg(not(feature = "parallel"))]
        let found = supports.iter().any(has_logical);
        if found {
            return Ok(Distance::Exact(w));
        }
    }
    Ok(Distance::AtLeast(w_max + 1))
}

/// `true` when `x` and `z` commute with every stabilizer, lie outside the
/// group, and anticommute with each other.
pub fn logical_pair_valid(code: &StabilizerTableau, x: &PauliString, z: &PauliString) -> bool {
    code.commutes_with_all(x)
        && code.commutes_with_all(z)
        && code.membership(x).is_none()
        && code.membership(z).is_none()
        && !x.commutes_with(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct FiveQubitReport {
    pub graph: GraphSpec,
    pub cluster_generators: Vec<PauliString>,
    /// `<K_i>` on the dense state built gate by gate.
    pub expectations: Vec<f64>,
    pub code_generators: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    pub matches_code_group: bool,
    pub logicals_valid: bool,
    pub distance: Distance,
}

impl FiveQubitReport {
    pub fn passed(&self) -> bool {
        self.matches_code_group
            && self.logicals_valid
            && self.distance == Distance::Exact(3)
            && self.expectations.iter().all(|e| (e - 1.0).abs() < 1e-9)
    }
}

/// Builds the ring cluster state and maps it to the five-qubit code with
/// `S` then `H` on every qubit.
pub fn verify_five_qubit(gate: &GateSource) -> Result<FiveQubitReport, GraphCodeError> {
    let graph = GraphSpec::five_cycle();
    let cluster = cluster_stabilizers(&graph)?;
    let state = build_cluster_statevector(&graph, gate)?;
    let expectations = cluster.generators().iter().map(|k| state.expectation(k).re).collect();
    let (ring, x, z) = ring_code_from_cluster(&cluster)?;
    let map = LocalClifford::uniform(5, SingleClifford::phase_then_hadamard());
    let code = lu_to_code(&ring, &map)?;
    let (logical_x, logical_z) = (map.apply(&x), map.apply(&z));
    Ok(FiveQubitReport {
        graph,
        cluster_generators: cluster.generators().to_vec(),
        expectations,
        code_generators: code.generators().to_vec(),
        logical_x,
        logical_z,
        matches_code_group: code.same_group(&five_qubit_code()),
        logicals_valid: logical_pair_valid(&code, &logical_x, &logical_z),
        distance: code_distance(&code, 3)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SteaneReport {
    pub graph: GraphSpec,
    pub expectations: Vec<f64>,
    /// Generators of the post-measurement state on the unmeasured qubits.
    pub reduced_generators: Vec<PauliString>,
    pub independent_generators: usize,
    /// Complementation sequence and local Cliffords that map onto the code.
    pub lc_sequence: Vec<usize>,
    pub local_cliffords: LocalClifford,
    /// Elements of the reduced group that the local Cliffords send to the
    /// code's stabilizers.
    pub code_generators: Vec<PauliString>,
    pub logical_qubits: usize,
    /// Smallest `<g>` over the reduced generators on the dense
    /// post-selected state.
    pub dense_min_expectation: f64,
    pub matches_steane: bool,
    pub distance: Distance,
}

impl SteaneReport {
    pub fn passed(&self) -> bool {
        self.matches_steane
            && self.logical_qubits == 1
            && self.independent_generators == 7
            && self.distance == Distance::Exact(3)
            && self.expectations.iter().all(|e| (e - 1.0).abs() < 1e-9)
            && (self.dense_min_expectation - 1.0).abs() < 1e-9
    }
}

/// Measures `graph.measure` in X and checks that the rest carries the
/// Steane code up to local Cliffords.
pub fn verify_steane(graph: &GraphSpec) -> Result<SteaneReport, GraphCodeError> {
    let target = steane_code();
    let cluster = cluster_stabilizers(graph)?;
    let state = build_cluster_statevector(graph, &GateSource::Ideal)?;
    let expectations = cluster.generators().iter().map(|k| state.expectation(k).re).collect();
    let witness = lc_orbit_check(graph, &target, DEFAULT_ORBIT_BUDGET)?;
    let Some(w) = witness else {
        return Ok(SteaneReport {
            graph: graph.clone(),
            expectations,
            reduced_generators: Vec::new(),
            independent_generators: 0,
            lc_sequence: Vec::new(),
            local_cliffords: LocalClifford::identity(graph.remaining().len()),
            code_generators: Vec::new(),
            logical_qubits: 0,
            dense_min_expectation: 0.0,
            matches_steane: false,
            distance: Distance::AtLeast(0),
        });
    };
    let inverse = w.local.inverse();
    let code = target.map(|t| inverse.apply(t))?;
    // The witness graph is the input graph when no complementation was needed.
    let lc_state = build_cluster_statevector(&w.graph, &GateSource::Ideal)?;
    let (reduced_state, _) = lc_state.postselect_plus(&graph.measure)?;
    let dense_min_expectation =
        w.reduced.generators().iter().map(|g| reduced_state.expectation(g).re).fold(f64::INFINITY, f64::min);
    let mapped = lu_to_code(&w.reduced, &w.local)?;
    let matches_steane = target.generators().iter().all(|t| mapped.contains(t))
        && code.generators().iter().all(|g| w.reduced.contains(g));
    Ok(SteaneReport {
        graph: graph.clone(),
        expectations,
        reduced_generators: w.reduced.generators().to_vec(),
        independent_generators: w.reduced.len(),
        lc_sequence: w.sequence,
        local_cliffords: w.local,
        code_generators: code.generators().to_vec(),
        logical_qubits: code.logical_qubits(),
        dense_min_expectation,
        matches_steane,
        distance: code_distance(&code, 3)?,
    })
}

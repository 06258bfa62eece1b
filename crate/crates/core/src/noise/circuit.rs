use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NoiseError;
use crate::graphcode::{
    build_cluster_statevector, cluster_stabilizers, GateSource, GraphSpec, MeasureOutcome, PauliString,
    StabilizerTableau, Statevector, DENSE_QUBIT_LIMIT,
};

/// Circuits with a built-in schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    /// Five preparations and the five ring gates.
    FiveQubit,
    /// Ten preparations, twelve gates and three check measurements.
    Steane,
    /// Two qubits joined by one gate.
    Pair,
    /// Three-vertex path with the middle vertex measured.
    Path3,
}

impl CodeKind {
    pub fn graph(self) -> GraphSpec {
        match self {
            CodeKind::FiveQubit => GraphSpec::five_cycle(),
            CodeKind::Steane => GraphSpec::steane_ten(),
            CodeKind::Pair => GraphSpec::path(2),
            CodeKind::Path3 => GraphSpec { measure: vec![1], ..GraphSpec::path(3) },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::FiveQubit => "five-qubit",
            CodeKind::Steane => "steane",
            CodeKind::Pair => "pair",
            CodeKind::Path3 => "path3",
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeKind {
    type Err = NoiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "five-qubit" | "five_qubit" | "five" => Ok(CodeKind::FiveQubit),
            "steane" => Ok(CodeKind::Steane),
            "pair" => Ok(CodeKind::Pair),
            "path3" => Ok(CodeKind::Path3),
            _ => Err(NoiseError::UnknownCode(s.to_string())),
        }
    }
}

/// A graph-state circuit with its noiseless byproducts and target.
#[derive(Clone, Debug)]
pub struct NoiseCircuit {
    graph: GraphSpec,
    /// For the `k`-th measurement, the ideal stabilizer that maps the `-1`
    /// branch onto the `+1` branch.
    byproducts: Vec<PauliString>,
    /// Stabilizers of the ideal state on the unmeasured qubits.
    target: StabilizerTableau,
    /// Dense form of `target`, when small enough.
    target_state: Option<Statevector>,
}

impl NoiseCircuit {
    pub fn from_graph(graph: &GraphSpec) -> Result<Self, NoiseError> {
        graph.validate()?;
        let mut tableau = cluster_stabilizers(graph)?;
        let mut byproducts = Vec::with_capacity(graph.measure.len());
        for &q in &graph.measure {
            let m = tableau.measure_x(q, MeasureOutcome::PostselectPlus)?;
            match m.byproduct {
                Some(g) => byproducts.push(g),
                None => {
                    return Err(NoiseError::InvalidCircuit(format!(
                        "measuring vertex {} has no correcting stabilizer",
                        q + 1
                    )))
                }
            }
        }
        let target = tableau.remove_measured(&graph.measure)?;
        let target_state = if graph.n_vertices <= DENSE_QUBIT_LIMIT {
            let full = build_cluster_statevector(graph, &GateSource::Ideal)?;
            Some(if graph.measure.is_empty() { full } else { full.postselect_plus(&graph.measure)?.0 })
        } else {
            None
        };
        Ok(Self { graph: graph.clone(), byproducts, target, target_state })
    }

    pub fn for_code(code: CodeKind) -> Self {
        Self::from_graph(&code.graph()).expect("built-in circuits are valid")
    }

    pub fn graph(&self) -> &GraphSpec {
        &self.graph
    }

    pub fn num_qubits(&self) -> usize {
        self.graph.n_vertices
    }

    pub fn byproducts(&self) -> &[PauliString] {
        &self.byproducts
    }

    pub fn target(&self) -> &StabilizerTableau {
        &self.target
    }

    pub fn target_state(&self) -> Option<&Statevector> {
        self.target_state.as_ref()
    }

    /// Number of qubits left after the measurements.
    pub fn code_size(&self) -> usize {
        self.graph.n_vertices - self.graph.measure.len()
    }

    /// Whether a Pauli error on the unmeasured qubits (phase ignored)
    /// leaves the target state unchanged.
    pub fn harmless(&self, frame: &PauliString) -> bool {
        let kept = frame.remove_qubits(&self.graph.measure);
        self.target.commutes_with_all(&kept)
    }
}

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::pauli::{Letter, PauliString, MAX_QUBITS};
use super::tableau::StabilizerTableau;
use super::GraphCodeError;

/// A graph whose vertices are qubits prepared in `|+>` and whose edges are
/// controlled-phase gates, applied in the listed order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n_vertices: usize,
    /// 0-based vertex pairs.
    pub edges: Vec<(usize, usize)>,
    /// 0-based vertices measured in the X basis, in order.
    #[serde(default)]
    pub measure: Vec<usize>,
}

impl GraphSpec {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>, measure: Vec<usize>) -> Result<Self, GraphCodeError> {
        let g = Self { n_vertices, edges, measure };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraphCodeError> {
        let bad = |m: String| Err(GraphCodeError::InvalidGraph(m));
        if self.n_vertices == 0 || self.n_vertices > MAX_QUBITS {
            return bad(format!("{} vertices is out of range", self.n_vertices));
        }
        let mut seen = Vec::new();
        for &(u, v) in &self.edges {
            if u >= self.n_vertices || v >= self.n_vertices {
                return bad(format!("edge ({u}, {v}) out of range"));
            }
            if u == v {
                return bad(format!("self-loop at {u}"));
            }
            let key = (u.min(v), u.max(v));
            if seen.contains(&key) {
                return bad(format!("duplicate edge ({u}, {v})"));
            }
            seen.push(key);
        }
        for (k, &m) in self.measure.iter().enumerate() {
            if m >= self.n_vertices {
                return bad(format!("measured vertex {m} out of range"));
            }
            if self.measure[..k].contains(&m) {
                return bad(format!("vertex {m} measured twice"));
            }
        }
        Ok(())
    }

    pub fn empty(n: usize) -> Self {
        Self { n_vertices: n, edges: Vec::new(), measure: Vec::new() }
    }

    pub fn path(n: usize) -> Self {
        Self { n_vertices: n, edges: (1..n).map(|k| (k, k - 1)).collect(), measure: Vec::new() }
    }

    /// Five-qubit ring, gates in the order `CZ_21, CZ_32, CZ_43, CZ_54, CZ_15`
    /// (1-based), i.e. first gate first.
    pub fn five_cycle() -> Self {
        Self { n_vertices: 5, edges: vec![(1, 0), (2, 1), (3, 2), (4, 3), (0, 4)], measure: Vec::new() }
    }

    /// Seven data qubits and three check qubits; check qubit `7 + k` is joined
    /// to the data qubits of the `k`-th parity check of the [7,4] Hamming code.
    /// Measuring the check qubits in X leaves a seven-qubit Steane code state.
    pub fn steane_ten() -> Self {
        let checks: [[usize; 4]; 3] = [[3, 4, 5, 6], [1, 2, 5, 6], [0, 2, 4, 6]];
        let edges = checks.iter().enumerate().flat_map(|(k, c)| c.iter().map(move |&d| (7 + k, d))).collect();
        Self { n_vertices: 10, edges, measure: vec![7, 8, 9] }
    }

    /// Neighbour masks.
    pub fn adjacency(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.n_vertices];
        for &(u, v) in &self.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }

    pub fn from_adjacency(adj: &[u64], measure: Vec<usize>) -> Self {
        let n = adj.len();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if adj[u] >> v & 1 == 1 {
                    edges.push((u, v));
                }
            }
        }
        Self { n_vertices: n, edges, measure }
    }

    /// Vertices that are not measured, in increasing order.
    pub fn remaining(&self) -> Vec<usize> {
        (0..self.n_vertices).filter(|v| !self.measure.contains(v)).collect()
    }

    /// Parses `u v` edge lines (1-based) plus optional `vertices: N` and
    /// `measure: a b c` lines. `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphCodeError> {
        let mut n_declared = None;
        let mut edges = Vec::new();
        let mut measure = Vec::new();
        let vertex = |tok: &str, line: usize| -> Result<usize, GraphCodeError> {
            match tok.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(GraphCodeError::Parse(format!("line {line}: bad vertex {tok:?}"))),
            }
        };
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("measure:") {
                for tok in rest.split_whitespace() {
                    measure.push(vertex(tok, k + 1)?);
                }
            } else if let Some(rest) = line.strip_prefix("vertices:") {
                let n = rest.trim().parse().map_err(|_| GraphCodeError::Parse(format!("line {}: bad vertex count", k + 1)))?;
                n_declared = Some(n);
            } else {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(GraphCodeError::Parse(format!("line {}: expected `u v`", k + 1)));
                }
                edges.push((vertex(toks[0], k + 1)?, vertex(toks[1], k + 1)?));
            }
        }
        let inferred = edges.iter().flat_map(|&(u, v)| [u, v]).chain(measure.iter().copied()).max().map_or(0, |m| m + 1);
        let n = n_declared.unwrap_or(inferred);
        Self::new(n, edges, measure)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("vertices: {}\n", self.n_vertices);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        if !self.measure.is_empty() {
            let labels: Vec<String> = self.measure.iter().map(|m| (m + 1).to_string()).collect();
            let _ = writeln!(out, "measure: {}", labels.join(" "));
        }
        out
    }
}

/// Local complementation at `v`: toggles every edge between neighbours of `v`.
pub fn local_complement(adj: &mut [u64], v: usize) {
    let nb = adj[v];
    let mut rest = nb;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        adj[u] ^= nb & !(1 << u);
    }
}

/// `K_v = X_v prod_{u in nb(v)} Z_u`, one per vertex.
pub fn cluster_stabilizers(graph: &GraphSpec) -> Result<StabilizerTableau, GraphCodeError> {
    graph.validate()?;
    let n = graph.n_vertices;
    let adj = graph.adjacency();
    let gens = (0..n)
        .map(|v| {
            let mut k = PauliString::from_masks(n, 1 << v, adj[v]);
            k.set_letter(v, Letter::X);
            k
        })
        .collect();
    StabilizerTableau::new(n, gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let g = GraphSpec::steane_ten();
        let back = GraphSpec::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(GraphSpec::parse_edge_list("1 2 3").is_err());
        assert!(GraphSpec::parse_edge_list("1 1").is_err());
        assert!(GraphSpec::parse_edge_list("0 1").is_err());
        assert!(GraphSpec::parse_edge_list("1 2\nmeasure: 2 2").is_err());
    }

    #[test]
    fn steane_graph_shape() {
        let g = GraphSpec::steane_ten();
        g.validate().unwrap();
        assert_eq!(g.edges.len(), 12);
        assert_eq!(g.remaining(), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn local_complement_of_star_gives_complete_graph() {
        let mut adj = GraphSpec::new(4, vec![(0, 1), (0, 2), (0, 3)], vec![]).unwrap().adjacency();
        local_complement(&mut adj, 0);
        assert_eq!(GraphSpec::from_adjacency(&adj, vec![]).edges.len(), 6);
        local_complement(&mut adj, 0);
        assert_eq!(GraphSpec::from_adjacency(&adj, vec![]).edges.len(), 3);
    }

    #[test]
    fn cluster_generators_of_cycle() {
        let t = cluster_stabilizers(&GraphSpec::five_cycle()).unwrap();
        let s: Vec<String> = t.generators().iter().map(|g| g.to_string()).collect();
        assert_eq!(s, ["+XZIIZ", "+ZXZII", "+IZXZI", "+IIZXZ", "+ZIIZX"]);
    }
}

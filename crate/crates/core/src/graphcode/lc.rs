use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::graph::{cluster_stabilizers, local_complement, GraphSpec};
use super::pauli::{Letter, PauliString};
use super::tableau::{MeasureOutcome, StabilizerTableau};
use super::GraphCodeError;

/// Default cap on the number of graphs visited by [`lc_orbit_check`].
pub const DEFAULT_ORBIT_BUDGET: usize = 1_000_000;

/// A single-qubit Clifford, stored as the images of `X` and `Z` under
/// conjugation, each with a sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SingleClifford {
    pub x_image: (Letter, bool),
    pub z_image: (Letter, bool),
}

impl SingleClifford {
    pub const IDENTITY: Self = Self { x_image: (Letter::X, false), z_image: (Letter::Z, false) };
    pub const HADAMARD: Self = Self { x_image: (Letter::Z, false), z_image: (Letter::X, false) };
    pub const PHASE: Self = Self { x_image: (Letter::Y, false), z_image: (Letter::Z, false) };

    /// `S` first, then `H`: X -> -Y, Z -> X, Y -> -Z.
    pub fn phase_then_hadamard() -> Self {
        Self::PHASE.then(&Self::HADAMARD)
    }

    /// All 24 elements modulo global phase.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for xl in Letter::NONTRIVIAL {
            for zl in Letter::NONTRIVIAL {
                if xl == zl {
                    continue;
                }
                for xs in [false, true] {
                    for zs in [false, true] {
                        out.push(Self { x_image: (xl, xs), z_image: (zl, zs) });
                    }
                }
            }
        }
        out
    }

    /// Image of one letter as a one-qubit string.
    fn image(&self, letter: Letter) -> PauliString {
        let one = |(l, neg): (Letter, bool)| {
            let p = PauliString::single(1, 0, l);
            if neg {
                -p
            } else {
                p
            }
        };
        match letter {
            Letter::I => PauliString::identity(1),
            Letter::X => one(self.x_image),
            Letter::Z => one(self.z_image),
            // Y = i X Z.
            Letter::Y => one(self.x_image) * one(self.z_image) * PauliString::identity(1).with_phase(1),
        }
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &Self) -> Self {
        let lift = |p: PauliString| other.image(p.letter(0)) * PauliString::identity(1).with_phase(p.phase());
        let as_pair = |p: PauliString| (p.letter(0), p.phase() == 2);
        Self { x_image: as_pair(lift(self.image(Letter::X))), z_image: as_pair(lift(self.image(Letter::Z))) }
    }

    pub fn inverse(&self) -> Self {
        Self::all().into_iter().find(|c| self.then(c) == Self::IDENTITY).expect("Clifford group is closed")
    }
}

impl fmt::Display for SingleClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |neg: bool| if neg { "-" } else { "+" };
        write!(
            f,
            "X->{}{},Z->{}{}",
            s(self.x_image.1),
            self.x_image.0.as_char(),
            s(self.z_image.1),
            self.z_image.0.as_char()
        )
    }
}

impl Serialize for SingleClifford {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A tensor product of single-qubit Cliffords.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalClifford {
    pub ops: Vec<SingleClifford>,
}

impl LocalClifford {
    pub fn identity(n: usize) -> Self {
        Self { ops: vec![SingleClifford::IDENTITY; n] }
    }

    pub fn uniform(n: usize, op: SingleClifford) -> Self {
        Self { ops: vec![op; n] }
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|c| *c == SingleClifford::IDENTITY)
    }

    /// `U P U^dagger`.
    pub fn apply(&self, p: &PauliString) -> PauliString {
        assert_eq!(p.num_qubits(), self.ops.len(), "register sizes differ");
        let n = self.ops.len();
        let mut out = PauliString::identity(n).with_phase(p.phase());
        for (q, op) in self.ops.iter().enumerate() {
            let img = op.image(p.letter(q));
            let mut site = PauliString::single(n, q, img.letter(0));
            site = site.with_phase(img.phase());
            out = out * site;
        }
        out
    }

    pub fn inverse(&self) -> Self {
        Self { ops: self.ops.iter().map(|c| c.inverse()).collect() }
    }

    /// Conjugation by a Pauli string after `self`.
    fn then_pauli(&mut self, q: &PauliString) {
        for (k, op) in self.ops.iter_mut().enumerate() {
            let site = PauliString::single(1, 0, q.letter(k));
            for image in [&mut op.x_image, &mut op.z_image] {
                if !PauliString::single(1, 0, image.0).commutes_with(&site) {
                    image.1 = !image.1;
                }
            }
        }
    }
}

/// Solves `<q, rows[i]> = rhs[i]` over GF(2) for a Pauli `q`; the rows must
/// be independent.
fn pauli_with_commutation(n: usize, rows: &[PauliString], rhs: &[bool]) -> Option<PauliString> {
    // <q, r> = q.x . r.z + q.z . r.x, so use the swapped halves of r.
    let mut eqs: Vec<(u128, bool)> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| (r.z_mask() as u128 | (r.x_mask() as u128) << 64, b))
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for bit in (0..n as u32).flat_map(|q| [q, 64 + q]) {
        let Some(pos) = (row..eqs.len()).find(|&k| eqs[k].0 >> bit & 1 == 1) else {
            continue;
        };
        eqs.swap(row, pos);
        let (pv, pb) = eqs[row];
        for (k, e) in eqs.iter_mut().enumerate() {
            if k != row && e.0 >> bit & 1 == 1 {
                e.0 ^= pv;
                e.1 ^= pb;
            }
        }
        pivots.push(bit);
        row += 1;
    }
    if eqs[row..].iter().any(|e| e.1) {
        return None;
    }
    let mut sol = 0u128;
    for (k, &bit) in pivots.iter().enumerate() {
        if eqs[k].1 {
            sol |= 1 << bit;
        }
    }
    Some(PauliString::from_masks(n, sol as u64, (sol >> 64) as u64))
}

fn letter_index(l: Letter) -> usize {
    match l {
        Letter::X => 0,
        Letter::Y => 1,
        Letter::Z => 2,
        Letter::I => unreachable!("identity has no index"),
    }
}

struct Search<'a> {
    targets: Vec<PauliString>,
    candidates: Vec<&'a [PauliString]>,
    /// Per qubit, state letter -> target letter.
    forward: Vec<[Option<Letter>; 3]>,
    chosen: Vec<PauliString>,
}

impl Search<'_> {
    fn assign(&mut self, c: &PauliString, t: &PauliString) -> Option<Vec<(usize, usize)>> {
        let mut added = Vec::new();
        let mut rest = c.support();
        while rest != 0 {
            let q = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let (from, to) = (letter_index(c.letter(q)), t.letter(q));
            match self.forward[q][from] {
                Some(existing) if existing == to => {}
                Some(_) => {
                    self.undo(&added);
                    return None;
                }
                None => {
                    if self.forward[q].contains(&Some(to)) {
                        self.undo(&added);
                        return None;
                    }
                    self.forward[q][from] = Some(to);
                    added.push((q, from));
                }
            }
        }
        Some(added)
    }

    fn undo(&mut self, added: &[(usize, usize)]) {
        for &(q, from) in added {
            self.forward[q][from] = None;
        }
    }

    fn run(&mut self, depth: usize) -> bool {
        if depth == self.targets.len() {
            return true;
        }
        let t = self.targets[depth];
        for c in self.candidates[depth] {
            if let Some(added) = self.assign(c, &t) {
                self.chosen.push(*c);
                if self.run(depth + 1) {
                    return true;
                }
                self.chosen.pop();
                self.undo(&added);
            }
        }
        false
    }
}

/// Finds a local Clifford `L` with every generator of `target` inside
/// `L S L^dagger`, where `S` is the group of `state`.
pub fn find_local_clifford(
    target: &StabilizerTableau,
    state: &StabilizerTableau,
) -> Result<Option<LocalClifford>, GraphCodeError> {
    let n = state.num_qubits();
    if target.num_qubits() != n {
        return Ok(None);
    }
    let mut by_support: HashMap<u64, Vec<PauliString>> = HashMap::new();
    for e in state.elements()? {
        if !e.is_identity() {
            by_support.entry(e.support()).or_default().push(e);
        }
    }
    let empty: Vec<PauliString> = Vec::new();
    let mut order: Vec<usize> = (0..target.len()).collect();
    let count = |k: usize| by_support.get(&target.generators()[k].support()).map_or(0, |v| v.len());
    order.sort_by_key(|&k| count(k));
    if order.first().is_some_and(|&k| count(k) == 0) {
        return Ok(None);
    }
    let targets: Vec<PauliString> = order.iter().map(|&k| target.generators()[k]).collect();
    let candidates =
        targets.iter().map(|t| by_support.get(&t.support()).unwrap_or(&empty).as_slice()).collect::<Vec<_>>();
    let mut search = Search { targets: targets.clone(), candidates, forward: vec![[None; 3]; n], chosen: Vec::new() };
    if !search.run(0) {
        return Ok(None);
    }
    let mut local = LocalClifford::identity(n);
    for (q, map) in search.forward.iter().enumerate() {
        let mut full = *map;
        for k in 0..3 {
            if full[k].is_none() {
                let free = Letter::NONTRIVIAL.into_iter().find(|l| !full.contains(&Some(*l))).expect("three letters");
                full[k] = Some(free);
            }
        }
        local.ops[q] = SingleClifford {
            x_image: (full[0].expect("filled"), false),
            z_image: (full[2].expect("filled"), false),
        };
    }
    let flips: Vec<bool> = search.chosen.iter().zip(&targets).map(|(c, t)| local.apply(c).phase() != t.phase()).collect();
    let fix = pauli_with_commutation(n, &targets, &flips).ok_or(GraphCodeError::Dependent)?;
    local.then_pauli(&fix);
    let mapped = state.map(|g| local.apply(g))?;
    if targets.iter().all(|t| mapped.contains(t)) {
        Ok(Some(local))
    } else {
        Ok(None)
    }
}

/// Result of a successful orbit search.
#[derive(Clone, Debug, Serialize)]
pub struct LcWitness {
    /// Vertices (0-based) at which to complement, in order.
    pub sequence: Vec<usize>,
    /// The graph after the complementations.
    pub graph: GraphSpec,
    /// Stabilizers of the post-measurement state on the remaining qubits.
    pub reduced: StabilizerTableau,
    /// Maps the post-measurement group onto the target.
    pub local: LocalClifford,
    /// Number of graphs examined.
    pub visited: usize,
}

/// Stabilizers left on the unmeasured vertices after X-measuring
/// `graph.measure` with all outcomes `+1`.
pub fn measured_graph_state(graph: &GraphSpec) -> Result<StabilizerTableau, GraphCodeError> {
    let mut t = cluster_stabilizers(graph)?;
    for &q in &graph.measure {
        t.measure_x(q, MeasureOutcome::PostselectPlus)?;
    }
    t.remove_measured(&graph.measure)
}

/// Breadth-first search of the local-complementation orbit of `graph`;
/// returns the first graph whose measured state matches `target` up to
/// local Cliffords, or `None` once the orbit is exhausted.
pub fn lc_orbit_check(
    graph: &GraphSpec,
    target: &StabilizerTableau,
    budget: usize,
) -> Result<Option<LcWitness>, GraphCodeError> {
    graph.validate()?;
    let start = graph.adjacency();
    let mut nodes: Vec<(Vec<u64>, Option<(usize, usize)>)> = vec![(start.clone(), None)];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([start]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        let adj = nodes[idx].0.clone();
        let candidate = GraphSpec::from_adjacency(&adj, graph.measure.clone());
        // A candidate whose `+` pattern has zero probability cannot be the
        // witness, but its neighbours still can.
        let reduced = match measured_graph_state(&candidate) {
            Ok(r) => Some(r),
            Err(GraphCodeError::ZeroProjection(_)) => None,
            Err(e) => return Err(e),
        };
        let found = match &reduced {
            Some(r) => find_local_clifford(target, r)?,
            None => None,
        };
        if let (Some(local), Some(reduced)) = (found, reduced) {
            let mut sequence = Vec::new();
            let mut at = idx;
            while let Some((parent, v)) = nodes[at].1 {
                sequence.push(v);
                at = parent;
            }
            sequence.reverse();
            return Ok(Some(LcWitness { sequence, graph: candidate, reduced, local, visited: seen.len() }));
        }
        for v in 0..adj.len() {
            if adj[v].count_ones() < 2 {
                continue;
            }
            let mut next = adj.clone();
            local_complement(&mut next, v);
            if seen.insert(next.clone()) {
                if seen.len() > budget {
                    return Err(GraphCodeError::SearchBudgetExceeded { visited: seen.len() });
                }
                nodes.push((next, Some((idx, v))));
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_group_has_24_distinct_elements() {
        let all = SingleClifford::all();
        let set: HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), 24);
        for c in &all {
            assert_eq!(c.then(&c.inverse()), SingleClifford::IDENTITY);
        }
    }

    #[test]
    fn phase_then_hadamard_images() {
        let u = LocalClifford::uniform(1, SingleClifford::phase_then_hadamard());
        assert_eq!(u.apply(&"X".parse().unwrap()).to_string(), "-Y");
        assert_eq!(u.apply(&"Z".parse().unwrap()).to_string(), "+X");
        assert_eq!(u.apply(&"Y".parse().unwrap()).to_string(), "-Z");
    }

    #[test]
    fn solves_commutation_pattern() {
        let rows: Vec<PauliString> = ["XX", "ZZ"].iter().map(|s| s.parse().unwrap()).collect();
        let q = pauli_with_commutation(2, &rows, &[true, false]).unwrap();
        assert!(!q.commutes_with(&rows[0]));
        assert!(q.commutes_with(&rows[1]));
    }
}

use serde::Serialize;

use super::pauli::{Letter, PauliString};
use super::GraphCodeError;

/// How an X-measurement outcome is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureOutcome {
    /// Project onto `|+>`; fails if that outcome has probability zero.
    PostselectPlus,
    /// Project onto `|->`; fails if that outcome has probability zero.
    PostselectMinus,
}

/// Result of one X-measurement on a tableau.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XMeasurement {
    pub qubit: usize,
    /// `+1` or `-1`.
    pub outcome: i8,
    /// `false` when the outcome was fixed by the state.
    pub random: bool,
    /// A stabilizer that anticommutes with `X_q`. Applying it after the
    /// `-1` outcome gives the `+1` post-measurement state.
    pub byproduct: Option<PauliString>,
}

/// Independent, commuting, Hermitian generators of a stabilizer group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizerTableau {
    n: usize,
    generators: Vec<PauliString>,
}

fn symplectic(p: &PauliString) -> u128 {
    p.x_mask() as u128 | (p.z_mask() as u128) << 64
}

/// Pivot order: `x_0, z_0, x_1, z_1, ...`.
fn pivot_bits(n: usize) -> impl Iterator<Item = u32> {
    (0..n as u32).flat_map(|q| [q, 64 + q])
}

/// Fully reduced row-echelon form. Returns `(pivot bit, row, generator subset)`.
fn reduce(n: usize, rows: &[PauliString]) -> Vec<(u32, PauliString, u64)> {
    let mut work: Vec<(PauliString, u64)> = rows.iter().enumerate().map(|(k, p)| (*p, 1u64 << k)).collect();
    let mut out: Vec<(u32, PauliString, u64)> = Vec::new();
    for bit in pivot_bits(n) {
        let Some(pos) = work.iter().position(|(p, _)| symplectic(p) >> bit & 1 == 1) else {
            continue;
        };
        let (pivot, combo) = work.swap_remove(pos);
        for (p, c) in work.iter_mut() {
            if symplectic(p) >> bit & 1 == 1 {
                *p = *p * pivot;
                *c ^= combo;
            }
        }
        for (_, p, c) in out.iter_mut() {
            if symplectic(p) >> bit & 1 == 1 {
                *p = *p * pivot;
                *c ^= combo;
            }
        }
        out.push((bit, pivot, combo));
    }
    out
}

/// Number of symplectically independent strings in `rows`.
pub fn symplectic_rank(n: usize, rows: &[PauliString]) -> usize {
    reduce(n, rows).len()
}

impl StabilizerTableau {
    pub fn new(n: usize, generators: Vec<PauliString>) -> Result<Self, GraphCodeError> {
        if n == 0 || n > super::pauli::MAX_QUBITS {
            return Err(GraphCodeError::InvalidArgument(format!("{n} qubits is out of range")));
        }
        if generators.len() > n {
            return Err(GraphCodeError::Dependent);
        }
        for (k, g) in generators.iter().enumerate() {
            if g.num_qubits() != n {
                return Err(GraphCodeError::InvalidArgument(format!("generator {k} acts on {} qubits", g.num_qubits())));
            }
            if !g.is_hermitian() {
                return Err(GraphCodeError::NonHermitian(k));
            }
        }
        for a in 0..generators.len() {
            for b in a + 1..generators.len() {
                if !generators[a].commutes_with(&generators[b]) {
                    return Err(GraphCodeError::NonCommuting(a, b));
                }
            }
        }
        if symplectic_rank(n, &generators) != generators.len() {
            return Err(GraphCodeError::Dependent);
        }
        Ok(Self { n, generators })
    }

    /// Parses one generator per string, e.g. `["XZZXI", "IXZZX"]`.
    pub fn from_strs(strs: &[&str]) -> Result<Self, GraphCodeError> {
        let gens = strs.iter().map(|s| s.parse()).collect::<Result<Vec<PauliString>, _>>()?;
        let n = gens.first().map(|g| g.num_qubits()).ok_or(GraphCodeError::InvalidArgument("no generators".into()))?;
        Self::new(n, gens)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// A tableau with `n` generators describes a single state.
    pub fn is_full_rank(&self) -> bool {
        self.generators.len() == self.n
    }

    /// Encoded qubits, `n - rank`.
    pub fn logical_qubits(&self) -> usize {
        self.n - self.generators.len()
    }

    /// Reduced row-echelon generators; two tableaus generate the same group
    /// exactly when their canonical forms are equal.
    pub fn canonical_form(&self) -> Vec<PauliString> {
        reduce(self.n, &self.generators).into_iter().map(|(_, p, _)| p).collect()
    }

    pub fn same_group(&self, other: &Self) -> bool {
        self.n == other.n && self.canonical_form() == other.canonical_form()
    }

    /// Equality of the groups after dropping all signs.
    pub fn same_group_up_to_signs(&self, other: &Self) -> bool {
        let strip = |t: &Self| t.canonical_form().into_iter().map(|p| p.unsigned()).collect::<Vec<_>>();
        self.n == other.n && strip(self) == strip(other)
    }

    /// `Some(1)` if `p` is in the group, `Some(-1)` if `-p` is, otherwise `None`.
    pub fn membership(&self, p: &PauliString) -> Option<i8> {
        self.decompose(p).map(|(_, sign)| sign)
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.membership(p) == Some(1)
    }

    /// Generators whose product is `sign * p`.
    fn decompose(&self, p: &PauliString) -> Option<(u64, i8)> {
        if p.num_qubits() != self.n {
            return None;
        }
        let mut rest = *p;
        let mut combo = 0u64;
        for (bit, row, c) in reduce(self.n, &self.generators) {
            if symplectic(&rest) >> bit & 1 == 1 {
                rest = rest * row;
                combo ^= c;
            }
        }
        if !rest.is_identity() {
            return None;
        }
        // p * prod = i^k, and prod is self-inverse.
        match rest.phase() {
            0 => Some((combo, 1)),
            2 => Some((combo, -1)),
            _ => None,
        }
    }

    pub fn commutes_with_all(&self, p: &PauliString) -> bool {
        self.generators.iter().all(|g| g.commutes_with(p))
    }

    /// All `2^len` group elements.
    pub fn elements(&self) -> Result<Vec<PauliString>, GraphCodeError> {
        if self.generators.len() > 20 {
            return Err(GraphCodeError::InvalidArgument("group too large to enumerate".into()));
        }
        let mut out = vec![PauliString::identity(self.n)];
        for g in &self.generators {
            let extra: Vec<_> = out.iter().map(|e| *e * *g).collect();
            out.extend(extra);
        }
        Ok(out)
    }

    pub fn apply_h(&mut self, q: usize) {
        self.generators.iter_mut().for_each(|g| g.conjugate_h(q));
    }

    pub fn apply_s(&mut self, q: usize) {
        self.generators.iter_mut().for_each(|g| g.conjugate_s(q));
    }

    pub fn apply_sdg(&mut self, q: usize) {
        self.generators.iter_mut().for_each(|g| g.conjugate_sdg(q));
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        self.generators.iter_mut().for_each(|g| g.conjugate_cz(a, b));
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        self.generators.iter_mut().for_each(|g| g.conjugate_pauli(p));
    }

    /// Measures `X_q` and updates the generators.
    pub fn measure_x(&mut self, q: usize, outcome: MeasureOutcome) -> Result<XMeasurement, GraphCodeError> {
        if q >= self.n {
            return Err(GraphCodeError::InvalidArgument(format!("qubit {q} out of range")));
        }
        let wanted: i8 = match outcome {
            MeasureOutcome::PostselectPlus => 1,
            MeasureOutcome::PostselectMinus => -1,
        };
        let xq = PauliString::single(self.n, q, Letter::X);
        let signed = if wanted == 1 { xq } else { -xq };
        let anti: Vec<usize> = (0..self.generators.len()).filter(|&k| !self.generators[k].commutes_with(&xq)).collect();
        if let Some(&first) = anti.first() {
            let pivot = self.generators[first];
            for &k in &anti[1..] {
                self.generators[k] = self.generators[k] * pivot;
            }
            self.generators[first] = signed;
            return Ok(XMeasurement { qubit: q, outcome: wanted, random: true, byproduct: Some(pivot) });
        }
        match self.membership(&xq) {
            Some(forced) => {
                if forced != wanted {
                    return Err(GraphCodeError::ZeroProjection(q));
                }
                Ok(XMeasurement { qubit: q, outcome: forced, random: false, byproduct: None })
            }
            None => {
                // X_q is a logical operator: the outcome is random and no
                // stabilizer can undo the minus branch.
                self.generators.push(signed);
                Ok(XMeasurement { qubit: q, outcome: wanted, random: true, byproduct: None })
            }
        }
    }

    /// Deletes qubits whose state is fixed to `|+>` or `|->` (so `+-X_q` is
    /// in the group), leaving a tableau on the remaining qubits.
    pub fn remove_measured(&self, qubits: &[usize]) -> Result<Self, GraphCodeError> {
        let mut gens = self.generators.clone();
        for &q in qubits {
            let xq = PauliString::single(self.n, q, Letter::X);
            let current = Self { n: self.n, generators: gens.clone() };
            let (combo, sign) = current.decompose(&xq).ok_or(GraphCodeError::NotMeasured(q))?;
            // Swap one generator of the decomposition for +-X_q itself.
            let replaced = combo.trailing_zeros() as usize;
            gens[replaced] = if sign == 1 { xq } else { -xq };
            let pinned = gens[replaced];
            for (k, g) in gens.iter_mut().enumerate() {
                if k != replaced && g.letter(q) != Letter::I {
                    *g = *g * pinned;
                }
            }
        }
        let kept: Vec<PauliString> = gens
            .iter()
            .filter(|g| !(g.weight() == 1 && qubits.iter().any(|&q| g.letter(q) == Letter::X)))
            .map(|g| g.remove_qubits(qubits))
            .collect();
        Self::new(self.n - qubits.len(), kept)
    }

    /// Conjugates every generator by `u`, given as a function on strings.
    pub fn map(&self, u: impl Fn(&PauliString) -> PauliString) -> Result<Self, GraphCodeError> {
        Self::new(self.n, self.generators.iter().map(u).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_generators() {
        assert!(matches!(StabilizerTableau::from_strs(&["XI", "ZI"]), Err(GraphCodeError::NonCommuting(0, 1))));
        assert!(matches!(StabilizerTableau::from_strs(&["XX", "XX"]), Err(GraphCodeError::Dependent)));
        assert!(matches!(StabilizerTableau::from_strs(&["iXX"]), Err(GraphCodeError::NonHermitian(0))));
    }

    #[test]
    fn canonical_form_identifies_groups() {
        let a = StabilizerTableau::from_strs(&["XX", "ZZ"]).unwrap();
        let b = StabilizerTableau::from_strs(&["-YY", "ZZ"]).unwrap();
        let c = StabilizerTableau::from_strs(&["YY", "ZZ"]).unwrap();
        assert!(a.same_group(&b));
        assert!(!a.same_group(&c));
        assert!(a.same_group_up_to_signs(&c));
    }

    #[test]
    fn membership_reports_sign() {
        let t = StabilizerTableau::from_strs(&["XX", "ZZ"]).unwrap();
        assert_eq!(t.membership(&"-YY".parse().unwrap()), Some(1));
        assert_eq!(t.membership(&"YY".parse().unwrap()), Some(-1));
        assert_eq!(t.membership(&"XI".parse().unwrap()), None);
    }

    #[test]
    fn measuring_bell_pair() {
        let mut t = StabilizerTableau::from_strs(&["XX", "ZZ"]).unwrap();
        let m = t.measure_x(0, MeasureOutcome::PostselectMinus).unwrap();
        assert!(m.random);
        assert_eq!(m.byproduct.unwrap().to_string(), "+ZZ");
        let reduced = t.remove_measured(&[0]).unwrap();
        assert_eq!(reduced.generators()[0].to_string(), "-X");
    }

    #[test]
    fn deterministic_measurement() {
        let mut t = StabilizerTableau::from_strs(&["-XI", "IZ"]).unwrap();
        assert!(matches!(t.measure_x(0, MeasureOutcome::PostselectPlus), Err(GraphCodeError::ZeroProjection(0))));
        let m = t.measure_x(0, MeasureOutcome::PostselectMinus).unwrap();
        assert!(!m.random);
    }
}

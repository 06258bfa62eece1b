use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GraphCodeError;

/// Widest register a [`PauliString`] can describe.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NONTRIVIAL: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// `i^phase` times a tensor product of Hermitian Pauli letters.
///
/// Qubit `q` is bit `q` of the `x` and `z` masks; the letter is
/// X for `(1, 0)`, Z for `(0, 1)` and Y for `(1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self { n, x: 0, z: 0, phase: 0 }
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self { n, x: x & mask(n), z: z & mask(n), phase: 0 }
    }

    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(qubit, letter);
        p
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }

    /// `X` on every qubit of `qubits`.
    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        qubits.iter().for_each(|&q| p.set_letter(q, Letter::X));
        p
    }

    /// `Z` on every qubit of `qubits`.
    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        qubits.iter().for_each(|&q| p.set_letter(q, Letter::Z));
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Exponent `k` of the prefactor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// `+1` or `-1` for Hermitian strings.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        Letter::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn set_letter(&mut self, qubit: usize, letter: Letter) {
        assert!(qubit < self.n, "qubit {qubit} out of range for {} qubits", self.n);
        let (x, z) = letter.bits();
        let bit = 1u64 << qubit;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    /// Symplectic form: `true` when the two strings commute.
    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    pub fn unsigned(mut self) -> Self {
        self.phase = 0;
        self
    }

    /// Same letters with the qubits in `removed` deleted and the rest compacted.
    pub fn remove_qubits(&self, removed: &[usize]) -> Self {
        let kept: Vec<usize> = (0..self.n).filter(|q| !removed.contains(q)).collect();
        let mut out = Self::identity(kept.len()).with_phase(self.phase);
        for (new, &old) in kept.iter().enumerate() {
            out.set_letter(new, self.letter(old));
        }
        out
    }

    /// Conjugation by a Hadamard: X <-> Z, Y -> -Y.
    pub fn conjugate_h(&mut self, q: usize) {
        let bit = 1u64 << q;
        if self.x & self.z & bit != 0 {
            self.phase = (self.phase + 2) % 4;
        }
        let (x, z) = (self.x & bit, self.z & bit);
        self.x = (self.x & !bit) | z;
        self.z = (self.z & !bit) | x;
    }

    /// Conjugation by the phase gate `S = diag(1, i)`: X -> Y, Y -> -X.
    pub fn conjugate_s(&mut self, q: usize) {
        let bit = 1u64 << q;
        if self.x & bit != 0 {
            if self.z & bit != 0 {
                self.phase = (self.phase + 2) % 4;
            }
            self.z ^= bit;
        }
    }

    /// Conjugation by `S^dagger`: X -> -Y, Y -> X.
    pub fn conjugate_sdg(&mut self, q: usize) {
        let bit = 1u64 << q;
        if self.x & bit != 0 {
            if self.z & bit == 0 {
                self.phase = (self.phase + 2) % 4;
            }
            self.z ^= bit;
        }
    }

    /// Conjugation by `CZ = diag(1, 1, 1, -1)`: X_a -> X_a Z_b, X_b -> Z_a X_b.
    pub fn conjugate_cz(&mut self, a: usize, b: usize) {
        let (xa, xb) = (self.x >> a & 1, self.x >> b & 1);
        let (za, zb) = (self.z >> a & 1, self.z >> b & 1);
        if xa & xb & (za ^ zb) == 1 {
            self.phase = (self.phase + 2) % 4;
        }
        self.z ^= xb << a;
        self.z ^= xa << b;
    }

    /// Conjugation by another Pauli string: a sign flip if they anticommute.
    pub fn conjugate_pauli(&mut self, p: &PauliString) {
        if !self.commutes_with(p) {
            self.phase = (self.phase + 2) % 4;
        }
    }
}

/// Power of `i` in the single-qubit product `sigma(x1, z1) sigma(x2, z2)`.
fn letter_product_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

impl Neg for PauliString {
    type Output = Self;

    fn neg(mut self) -> Self {
        self.phase = (self.phase + 2) % 4;
        self
    }
}

impl Mul for PauliString {
    type Output = PauliString;

    fn mul(self, rhs: PauliString) -> PauliString {
        assert_eq!(self.n, rhs.n, "Pauli strings act on different registers");
        let mut k = self.phase as i32 + rhs.phase as i32;
        let mut both = self.support() & rhs.support();
        while both != 0 {
            let q = both.trailing_zeros();
            both &= both - 1;
            k += letter_product_phase(
                self.x >> q & 1 == 1,
                self.z >> q & 1 == 1,
                rhs.x >> q & 1 == 1,
                rhs.z >> q & 1 == 1,
            );
        }
        PauliString { n: self.n, x: self.x ^ rhs.x, z: self.z ^ rhs.z, phase: k.rem_euclid(4) as u8 }
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        *self * *rhs
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = GraphCodeError;

    /// Parses `[+|-][i]LETTERS`, qubit 0 first.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (mut phase, rest) = match s.strip_prefix('-') {
            Some(r) => (2u8, r),
            None => (0u8, s.strip_prefix('+').unwrap_or(s)),
        };
        let rest = match rest.strip_prefix('i') {
            Some(r) => {
                phase += 1;
                r
            }
            None => rest,
        };
        if rest.is_empty() || rest.len() > MAX_QUBITS {
            return Err(GraphCodeError::Parse(format!("bad Pauli string length in {s:?}")));
        }
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(GraphCodeError::Parse(format!("unexpected {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliString::from_letters(&letters).with_phase(phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X") * p("Y"), p("+iZ"));
        assert_eq!(p("Y") * p("X"), p("-iZ"));
        assert_eq!(p("Z") * p("X"), p("+iY"));
        assert_eq!(p("Y") * p("Z"), p("+iX"));
        assert_eq!(p("Y") * p("Y"), p("I"));
    }

    #[test]
    fn round_trip_display() {
        for s in ["+XZZXI", "-iYIZ", "+iX", "-ZZ"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("XI").commutes_with(&p("ZI")));
        assert!(p("XZZXI").commutes_with(&p("IXZZX")));
    }

    #[test]
    fn remove_qubits_compacts() {
        assert_eq!(p("-XYZI").remove_qubits(&[1, 3]), p("-XZ"));
    }

    #[test]
    fn cz_maps_x_to_cluster_generator() {
        let mut q = p("XI");
        q.conjugate_cz(0, 1);
        assert_eq!(q, p("XZ"));
        let mut q = p("XY");
        q.conjugate_cz(0, 1);
        assert_eq!(q, p("-YX"));
    }
}

//! Phase-tracked Pauli tensor words.
//!
//! A [`PauliString`] is `phase · P₁ ⊗ … ⊗ Pₙ` with each `Pₖ ∈ {I, X, Y, Z}` and
//! `phase ∈ {+1, −1, +i, −i}`. Products are computed symbolically letter by
//! letter; [`PauliString::to_matrix`] gives the dense exact matrix used as an
//! independent oracle.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::matrix::{ComplexMatrix, GaussRational};

/// Largest qubit count accepted when constructing or parsing a string.
pub const MAX_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("length mismatch: {left} vs {right} qubits")]
    LengthMismatch { left: usize, right: usize },
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("operator {0} is not hermitian")]
    NotHermitian(PauliString),
    #[error("operator {0} is a multiple of the identity")]
    IdentityWord(PauliString),
    #[error("operators {0} and {1} do not commute")]
    NotCommuting(PauliString, PauliString),
    #[error("edge product {0} is not a signed identity")]
    NotSignedIdentity(PauliString),
    #[error("empty operator list")]
    Empty,
    #[error("cannot parse Pauli string {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// Scalar phase `i^k` for `k = 0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::PlusOne, Phase::PlusI, Phase::MinusOne, Phase::MinusI];

    fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_exponent(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }

    pub fn to_sign(self) -> Option<Sign> {
        match self {
            Phase::PlusOne => Some(Sign::Plus),
            Phase::MinusOne => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn to_gaussian(self) -> GaussRational {
        match self {
            Phase::PlusOne => GaussRational::from_integers(1, 0),
            Phase::PlusI => GaussRational::from_integers(0, 1),
            Phase::MinusOne => GaussRational::from_integers(-1, 0),
            Phase::MinusI => GaussRational::from_integers(0, -1),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + rhs.exponent())
    }
}

impl From<Sign> for Phase {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => Phase::PlusOne,
            Sign::Minus => Phase::MinusOne,
        }
    }
}

/// A real sign, used both as a ±1 eigenvalue and as a hyperedge sign.
///
/// `Plus` orders before `Minus`, which fixes the lexicographic order of outcome
/// tuples everywhere in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn product<I: IntoIterator<Item = Sign>>(signs: I) -> Sign {
        signs.into_iter().fold(Sign::Plus, |acc, s| acc * s)
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::from_value(v).ok_or_else(|| serde::de::Error::custom(format!("sign must be ±1, got {v}")))
    }
}

/// Formats a tuple of signs compactly, e.g. `(+1,-1,+1)`.
pub fn format_tuple(tuple: &[Sign]) -> String {
    let parts: Vec<String> = tuple.iter().map(Sign::to_string).collect();
    format!("({})", parts.join(","))
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    /// Product of two letters as `phase · letter`.
    pub fn times(self, rhs: Letter) -> (Phase, Letter) {
        use Letter::*;
        match (self, rhs) {
            (I, p) | (p, I) => (Phase::PlusOne, p),
            (X, X) | (Y, Y) | (Z, Z) => (Phase::PlusOne, I),
            (X, Y) => (Phase::PlusI, Z),
            (Y, X) => (Phase::MinusI, Z),
            (Y, Z) => (Phase::PlusI, X),
            (Z, Y) => (Phase::MinusI, X),
            (Z, X) => (Phase::PlusI, Y),
            (X, Z) => (Phase::MinusI, Y),
        }
    }

    fn to_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    fn matrix(self) -> ComplexMatrix {
        let g = GaussRational::from_integers;
        let rows = match self {
            Letter::I => [g(1, 0), g(0, 0), g(0, 0), g(1, 0)],
            Letter::X => [g(0, 0), g(1, 0), g(1, 0), g(0, 0)],
            Letter::Y => [g(0, 0), g(0, -1), g(0, 1), g(0, 0)],
            Letter::Z => [g(1, 0), g(0, 0), g(0, 0), g(-1, 0)],
        };
        ComplexMatrix::from_rows(2, rows.to_vec())
    }
}

/// `phase · P₁ ⊗ … ⊗ Pₙ`, with `P₁` acting on the first (most significant) qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    phase: Phase,
    letters: Vec<Letter>,
}

impl PauliString {
    pub fn new(phase: Phase, letters: Vec<Letter>) -> Result<Self, PauliError> {
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(PauliError::QubitCount(letters.len()));
        }
        Ok(Self { phase, letters })
    }

    pub fn identity(n: usize) -> Result<Self, PauliError> {
        Self::new(Phase::PlusOne, vec![Letter::I; n])
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn is_identity_word(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::I)
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        Self {
            phase,
            letters: self.letters.clone(),
        }
    }

    fn check_len(&self, other: &Self) -> Result<(), PauliError> {
        if self.num_qubits() != other.num_qubits() {
            return Err(PauliError::LengthMismatch {
                left: self.num_qubits(),
                right: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// Exact phase-tracked product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_len(other)?;
        let mut phase = self.phase * other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, l) = a.times(b);
                phase = phase * p;
                l
            })
            .collect();
        Ok(Self { phase, letters })
    }

    /// Two Pauli words commute iff they differ (both non-identity) on an even
    /// number of positions.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_len(other)?;
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Letter::I && b != Letter::I && a != b)
            .count();
        Ok(clashes % 2 == 0)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut iter = self.letters.iter();
        let first = iter.next().expect("non-empty by construction").matrix();
        iter.fold(first, |acc, l| acc.kron(&l.matrix()))
            .scale(self.phase.to_gaussian())
    }

    /// Spectral projection `(I ± P)/2` onto the `eigenvalue` eigenspace.
    pub fn spectral_projection(&self, eigenvalue: Sign) -> Result<ComplexMatrix, PauliError> {
        if !self.is_hermitian() {
            return Err(PauliError::NotHermitian(self.clone()));
        }
        if self.is_identity_word() {
            return Err(PauliError::IdentityWord(self.clone()));
        }
        let dim = 1usize << self.num_qubits();
        let id = ComplexMatrix::identity(dim);
        let p = self.to_matrix();
        let sum = match eigenvalue {
            Sign::Plus => &id + &p,
            Sign::Minus => &id - &p,
        };
        Ok(sum.scale(GaussRational::half()))
    }
}

/// The sign `s` such that the ordered product of `ops` equals `s · I`.
///
/// The operators must be mutually commuting, which makes the result independent
/// of their order.
pub fn edge_product(ops: &[PauliString]) -> Result<Sign, PauliError> {
    let first = ops.first().ok_or(PauliError::Empty)?;
    for (k, a) in ops.iter().enumerate() {
        for b in &ops[k + 1..] {
            if !a.commutes(b)? {
                return Err(PauliError::NotCommuting(a.clone(), b.clone()));
            }
        }
    }
    let mut acc = PauliString::identity(first.num_qubits())?;
    for op in ops {
        acc = acc.multiply(op)?;
    }
    match (acc.is_identity_word(), acc.phase.to_sign()) {
        (true, Some(s)) => Ok(s),
        _ => Err(PauliError::NotSignedIdentity(acc)),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::PlusOne => "+",
            Phase::MinusOne => "-",
            Phase::PlusI => "+i",
            Phase::MinusI => "-i",
        };
        f.write_str(prefix)?;
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Parses `[sign][i]LETTERS`, e.g. `+ZZ`, `-iXY`, `XXX`.
    fn from_str(text: &str) -> Result<Self, PauliError> {
        let err = |reason: &str| PauliError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let mut rest = text.trim();
        let mut phase = Phase::PlusOne;
        if let Some(r) = rest.strip_prefix('-') {
            phase = Phase::MinusOne;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('i') {
            phase = phase * Phase::PlusI;
            rest = r;
        }
        if rest.is_empty() {
            return Err(err("no letters"));
        }
        let letters = rest
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| err(&format!("unexpected character {c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if letters.len() > MAX_QUBITS {
            return Err(err(&format!("more than {MAX_QUBITS} qubits")));
        }
        PauliString::new(phase, letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
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
        assert_eq!(p("X").multiply(&p("Y")).unwrap(), p("+iZ"));
        assert_eq!(p("Y").multiply(&p("X")).unwrap(), p("-iZ"));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), p("+iY"));
    }

    #[test]
    fn two_qubit_product_matches_matrix_oracle() {
        let prod = p("ZZ").multiply(&p("XX")).unwrap();
        assert_eq!(prod, p("-YY"));
        assert_eq!(prod.to_matrix(), &p("ZZ").to_matrix() * &p("XX").to_matrix());
    }

    #[test]
    fn identity_is_neutral() {
        for a in Letter::ALL {
            for b in Letter::ALL {
                let q = PauliString::new(Phase::MinusI, vec![a, b]).unwrap();
                assert_eq!(p("II").multiply(&q).unwrap(), q);
            }
        }
    }

    #[test]
    fn commutation_examples() {
        assert!(p("ZI").commutes(&p("IZ")).unwrap());
        assert!(!p("ZI").commutes(&p("XI")).unwrap());
        assert!(p("XZ").commutes(&p("ZX")).unwrap());
        assert!(p("XXX").commutes(&p("YYX")).unwrap());
        assert!(matches!(p("X").commutes(&p("XX")), Err(PauliError::LengthMismatch { .. })));
    }

    #[test]
    fn matrices_of_letters() {
        let g = GaussRational::from_integers;
        assert_eq!(
            p("Z").to_matrix(),
            ComplexMatrix::from_rows(2, vec![g(1, 0), g(0, 0), g(0, 0), g(-1, 0)])
        );
        assert_eq!(
            p("iX").to_matrix(),
            ComplexMatrix::from_rows(2, vec![g(0, 0), g(0, 1), g(0, 1), g(0, 0)])
        );
        let mut zz = ComplexMatrix::zeros(4);
        for (k, v) in [1, -1, -1, 1].into_iter().enumerate() {
            zz.set(k, k, g(v, 0));
        }
        assert_eq!(p("ZZ").to_matrix(), zz);
    }

    #[test]
    fn spectral_projections() {
        let g = GaussRational::from_integers;
        let h = GaussRational::half();
        assert_eq!(
            p("Z").spectral_projection(Sign::Plus).unwrap(),
            ComplexMatrix::from_rows(2, vec![g(1, 0), g(0, 0), g(0, 0), g(0, 0)])
        );
        assert_eq!(
            p("X").spectral_projection(Sign::Plus).unwrap(),
            ComplexMatrix::from_rows(2, vec![h, h, h, h])
        );
        let mut expected = ComplexMatrix::zeros(4);
        expected.set(1, 1, g(1, 0));
        expected.set(2, 2, g(1, 0));
        assert_eq!(p("ZZ").spectral_projection(Sign::Minus).unwrap(), expected);
        assert!(matches!(p("iZ").spectral_projection(Sign::Plus), Err(PauliError::NotHermitian(_))));
        assert!(matches!(p("-II").spectral_projection(Sign::Plus), Err(PauliError::IdentityWord(_))));
    }

    #[test]
    fn edge_products() {
        assert_eq!(edge_product(&[p("ZZ"), p("XX"), p("YY")]).unwrap(), Sign::Minus);
        assert_eq!(edge_product(&[p("ZI"), p("IZ"), p("ZZ")]).unwrap(), Sign::Plus);
        assert_eq!(
            edge_product(&[p("XXX"), p("YYX"), p("YXY"), p("XYY")]).unwrap(),
            Sign::Minus
        );
        assert!(matches!(
            edge_product(&[p("ZI"), p("IZ")]),
            Err(PauliError::NotSignedIdentity(_))
        ));
        assert!(matches!(
            edge_product(&[p("ZI"), p("XI")]),
            Err(PauliError::NotCommuting(..))
        ));
    }

    #[test]
    fn text_form_round_trip() {
        for s in ["+ZZ", "-iXY", "+XXX", "+iI", "-Y"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("XXX").to_string(), "+XXX");
        assert_eq!(p("-iXY").phase(), Phase::MinusI);
        assert!("".parse::<PauliString>().is_err());
        assert!("+iQ".parse::<PauliString>().is_err());
        assert!("XXXXXXXXX".parse::<PauliString>().is_err());
    }

    #[test]
    fn phase_fourth_power_is_one() {
        for ph in Phase::ALL {
            assert_eq!(ph * ph * ph * ph, Phase::PlusOne);
        }
    }
}

//! Single-qubit pure states, the Pauli X/Z and Hadamard gates, and projective
//! measurement in the computational or Hadamard basis.
//!
//! No protocol in this crate entangles transmitted qubits, so a message is a
//! plain sequence of independent single-qubit states.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{Modulus, ZpElement};

/// Tolerance for amplitude comparisons and normalization.
pub const AMPLITUDE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QubitError {
    #[error("value {value} does not fit in {width} qubits")]
    ValueTooWide { value: u64, width: usize },
    #[error("decoded value {value} is not below the modulus {modulus}")]
    DecodedOutOfRange { value: u64, modulus: u64 },
    #[error("bit width {0} exceeds 64")]
    WidthTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Computational,
    Hadamard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    amp0: Complex64,
    amp1: Complex64,
}

impl QubitState {
    /// Normalizes `(amp0, amp1)`; panics on the zero vector.
    pub fn new(amp0: Complex64, amp1: Complex64) -> Self {
        let norm = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        assert!(norm > AMPLITUDE_EPS, "zero vector is not a state");
        Self {
            amp0: amp0 / norm,
            amp1: amp1 / norm,
        }
    }

    fn real(a0: f64, a1: f64) -> Self {
        Self {
            amp0: Complex64::new(a0, 0.0),
            amp1: Complex64::new(a1, 0.0),
        }
    }

    pub fn zero() -> Self {
        Self::real(1.0, 0.0)
    }

    pub fn one() -> Self {
        Self::real(0.0, 1.0)
    }

    pub fn plus() -> Self {
        Self::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    pub fn minus() -> Self {
        Self::real(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
    }

    pub fn basis_state(bit: bool) -> Self {
        if bit {
            Self::one()
        } else {
            Self::zero()
        }
    }

    /// Eigenstate of `basis` for outcome `bit` (`|0>,|1>` or `|+>,|->`).
    pub fn eigenstate(basis: Basis, bit: bool) -> Self {
        match (basis, bit) {
            (Basis::Computational, b) => Self::basis_state(b),
            (Basis::Hadamard, false) => Self::plus(),
            (Basis::Hadamard, true) => Self::minus(),
        }
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    pub fn negated(&self) -> Self {
        Self {
            amp0: -self.amp0,
            amp1: -self.amp1,
        }
    }

    /// Amplitude-wise equality (global phase counts).
    pub fn eq_exact(&self, other: &Self) -> bool {
        (self.amp0 - other.amp0).norm() < AMPLITUDE_EPS
            && (self.amp1 - other.amp1).norm() < AMPLITUDE_EPS
    }

    /// Equality up to a global phase: `|<self|other>| = 1`.
    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        let overlap = self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1;
        (overlap.norm() - 1.0).abs() < AMPLITUDE_EPS
    }

    /// Probability of outcome 0 (`|0>` or `|+>`) when measured in `basis`.
    pub fn prob_zero(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Computational => self.amp0.norm_sqr(),
            Basis::Hadamard => ((self.amp0 + self.amp1) * FRAC_1_SQRT_2).norm_sqr(),
        }
    }

    /// The basis in which this state is an eigenstate, if any.
    pub fn definite_basis(&self) -> Option<Basis> {
        [Basis::Computational, Basis::Hadamard]
            .into_iter()
            .find(|&b| {
                let p = self.prob_zero(b);
                !(AMPLITUDE_EPS..=1.0 - AMPLITUDE_EPS).contains(&p)
            })
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, canon) in [
            ("|0>", Self::zero()),
            ("|1>", Self::one()),
            ("|+>", Self::plus()),
            ("|->", Self::minus()),
        ] {
            if self.eq_exact(&canon) {
                return write!(f, "{label}");
            }
            if self.eq_exact(&canon.negated()) {
                return write!(f, "-{label}");
            }
        }
        write!(f, "({})|0> + ({})|1>", self.amp0, self.amp1)
    }
}

pub fn apply_pauli_x(q: &QubitState) -> QubitState {
    QubitState {
        amp0: q.amp1,
        amp1: q.amp0,
    }
}

pub fn apply_pauli_z(q: &QubitState) -> QubitState {
    QubitState {
        amp0: q.amp0,
        amp1: -q.amp1,
    }
}

pub fn apply_h(q: &QubitState) -> QubitState {
    QubitState {
        amp0: (q.amp0 + q.amp1) * FRAC_1_SQRT_2,
        amp1: (q.amp0 - q.amp1) * FRAC_1_SQRT_2,
    }
}

/// Projective measurement; returns the outcome bit and the collapsed eigenstate.
///
/// Outcomes whose probability is within [`AMPLITUDE_EPS`] of 0 or 1 are
/// resolved without consuming randomness.
pub fn measure<R: Rng + ?Sized>(q: &QubitState, basis: Basis, rng: &mut R) -> (bool, QubitState) {
    let p0 = q.prob_zero(basis);
    let bit = if p0 > 1.0 - AMPLITUDE_EPS {
        false
    } else if p0 < AMPLITUDE_EPS {
        true
    } else {
        rng.random::<f64>() >= p0
    };
    (bit, QubitState::eigenstate(basis, bit))
}

/// Big-endian encoding of `v` into `width` computational-basis qubits.
pub fn encode_value(v: ZpElement, width: usize) -> Result<Vec<QubitState>, QubitError> {
    encode_bits(v.value(), width)
        .map(|bits| bits.into_iter().map(QubitState::basis_state).collect())
}

pub(crate) fn encode_bits(value: u64, width: usize) -> Result<Vec<bool>, QubitError> {
    if width > 64 {
        return Err(QubitError::WidthTooLarge(width));
    }
    if width < 64 && value >> width != 0 {
        return Err(QubitError::ValueTooWide { value, width });
    }
    Ok((0..width).rev().map(|i| (value >> i) & 1 == 1).collect())
}

/// Inverse of [`encode_value`] applied to measured bits.
pub fn decode_bits(bits: &[bool], modulus: Modulus) -> Result<ZpElement, QubitError> {
    if bits.len() > 64 {
        return Err(QubitError::WidthTooLarge(bits.len()));
    }
    let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    modulus
        .element(value)
        .map_err(|_| QubitError::DecodedOutOfRange {
            value,
            modulus: modulus.value(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_state(rng: &mut SeededRng) -> QubitState {
        let mut c = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        QubitState::new(c(), c())
    }

    #[test]
    fn gate_examples() {
        assert!(apply_pauli_x(&QubitState::one()).eq_exact(&QubitState::zero()));
        assert!(apply_pauli_z(&QubitState::one()).eq_exact(&QubitState::one().negated()));
        assert!(apply_pauli_z(&QubitState::plus()).eq_exact(&QubitState::minus()));
        assert!(apply_h(&QubitState::zero()).eq_exact(&QubitState::plus()));
        assert!(apply_h(&QubitState::one()).eq_exact(&QubitState::minus()));
    }

    #[test]
    fn gates_are_involutions_on_canonical_states() {
        let canon = [
            QubitState::zero(),
            QubitState::one(),
            QubitState::plus(),
            QubitState::minus(),
        ];
        for q in canon.iter().flat_map(|q| [*q, q.negated()]) {
            assert!(apply_pauli_x(&apply_pauli_x(&q)).eq_exact(&q));
            assert!(apply_pauli_z(&apply_pauli_z(&q)).eq_exact(&q));
            assert!(apply_h(&apply_h(&q)).eq_exact(&q));
        }
    }

    #[test]
    fn random_states_unitarity() {
        let mut rng = SeededRng::new(5);
        for _ in 0..1000 {
            let q = random_state(&mut rng);
            for g in [apply_pauli_x, apply_pauli_z, apply_h] {
                assert!((g(&q).norm_sqr() - 1.0).abs() < AMPLITUDE_EPS);
                assert!(g(&g(&q)).eq_exact(&q));
            }
        }
    }

    #[test]
    fn phase_equality() {
        let q = QubitState::one();
        assert!(!q.eq_exact(&q.negated()));
        assert!(q.eq_up_to_phase(&q.negated()));
        assert!(!q.eq_up_to_phase(&QubitState::plus()));
        assert_eq!(q.negated().to_string(), "-|1>");
    }

    #[test]
    fn deterministic_measurements() {
        let mut rng = SeededRng::new(0);
        assert!(measure(&QubitState::one(), Basis::Computational, &mut rng).0);
        assert!(!measure(&QubitState::plus(), Basis::Hadamard, &mut rng).0);
        assert!(measure(&QubitState::minus(), Basis::Hadamard, &mut rng).0);
        let (bit, post) = measure(&QubitState::one().negated(), Basis::Computational, &mut rng);
        assert!(bit);
        assert!(post.eq_exact(&QubitState::one()));
    }

    #[test]
    fn born_rule_plus_in_computational_basis() {
        let mut rng = SeededRng::new(11);
        let trials = 10_000;
        let ones = (0..trials)
            .filter(|_| measure(&QubitState::plus(), Basis::Computational, &mut rng).0)
            .count();
        let sigma = (0.25f64 / trials as f64).sqrt();
        assert!(
            (ones as f64 / trials as f64 - 0.5).abs() <= 3.0 * sigma,
            "{ones}"
        );
    }

    #[test]
    fn born_rule_random_states() {
        let mut rng = SeededRng::new(12);
        for _ in 0..5 {
            let q = random_state(&mut rng);
            for basis in [Basis::Computational, Basis::Hadamard] {
                let p0 = q.prob_zero(basis);
                let trials = 10_000;
                let zeros = (0..trials)
                    .filter(|_| !measure(&q, basis, &mut rng).0)
                    .count();
                let sigma = (p0 * (1.0 - p0) / trials as f64).sqrt();
                assert!((zeros as f64 / trials as f64 - p0).abs() <= 3.0 * sigma + 1e-9);
            }
        }
    }

    #[test]
    fn measurement_replay() {
        let outcomes = |seed| {
            let mut rng = SeededRng::new(seed);
            (0..256)
                .map(|_| measure(&QubitState::plus(), Basis::Computational, &mut rng).0)
                .collect::<Vec<_>>()
        };
        assert_eq!(outcomes(3), outcomes(3));
        assert_ne!(outcomes(3), outcomes(4));
    }

    #[test]
    fn encoding_examples() {
        let p8 = Modulus::new(8).unwrap();
        let enc = encode_value(p8.reduce(2), 3).unwrap();
        let expect = [QubitState::zero(), QubitState::one(), QubitState::zero()];
        assert!(enc.iter().zip(&expect).all(|(a, b)| a.eq_exact(b)));
        let zero = encode_value(p8.reduce(0), 3).unwrap();
        assert!(zero.iter().all(|q| q.eq_exact(&QubitState::zero())));
        assert_eq!(
            encode_value(p8.reduce(5), 2),
            Err(QubitError::ValueTooWide { value: 5, width: 2 })
        );
        let p5 = Modulus::new(5).unwrap();
        assert_eq!(
            decode_bits(&[true, true, false], p5),
            Err(QubitError::DecodedOutOfRange {
                value: 6,
                modulus: 5
            })
        );
    }

    #[test]
    fn decode_inverts_encode_exhaustively() {
        let p8 = Modulus::new(8).unwrap();
        let mut rng = SeededRng::new(1);
        for v in 0..8 {
            let bits: Vec<bool> = encode_value(p8.reduce(v), 3)
                .unwrap()
                .iter()
                .map(|q| measure(q, Basis::Computational, &mut rng).0)
                .collect();
            assert_eq!(decode_bits(&bits, p8).unwrap().value(), v);
        }
    }

    proptest! {
        #[test]
        fn encode_decode_full_width(v in any::<u64>()) {
            let m = Modulus::new(u64::MAX).unwrap();
            let v = m.reduce(v);
            let bits = encode_bits(v.value(), 64).unwrap();
            prop_assert_eq!(decode_bits(&bits, m).unwrap(), v);
        }
    }
}

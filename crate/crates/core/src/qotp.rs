//! Quantum one-time pad over single qubits.
//!
//! Qubit `i` (1-based) is encrypted as `Z^{K_{2i-1}} X^{K_{2i}}`: X first, then
//! Z. Decryption applies Z, then X. Keys are drawn uniformly and treated as
//! already shared by both endpoints; no key distribution protocol is run.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubit::{apply_pauli_x, apply_pauli_z, QubitState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QotpError {
    #[error("key for {0} qubits must cover at least one qubit")]
    EmptyKey(usize),
    #[error("key has {key_bits} bits but the message needs {needed}")]
    LengthMismatch { key_bits: usize, needed: usize },
    #[error("invalid key string: {0}")]
    Parse(String),
}

/// A `2n`-bit Pauli key. Bit `2i-1` controls Z and bit `2i` controls X on qubit `i`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliKey {
    bits: Vec<bool>,
}

impl PauliKey {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self, QotpError> {
        if bits.is_empty() || !bits.len().is_multiple_of(2) {
            return Err(QotpError::Parse(format!(
                "key length {} is not a positive even number",
                bits.len()
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of qubits this key covers.
    pub fn qubits(&self) -> usize {
        self.bits.len() / 2
    }

    /// `(z, x)` control bits for 0-based qubit `i`.
    pub fn pair(&self, i: usize) -> (bool, bool) {
        (self.bits[2 * i], self.bits[2 * i + 1])
    }

    /// Leading part of the key covering the first `qubits` qubits.
    pub fn prefix(&self, qubits: usize) -> Result<PauliKey, QotpError> {
        if qubits == 0 {
            return Err(QotpError::EmptyKey(0));
        }
        if 2 * qubits > self.bits.len() {
            return Err(QotpError::LengthMismatch {
                key_bits: self.bits.len(),
                needed: 2 * qubits,
            });
        }
        Ok(PauliKey {
            bits: self.bits[..2 * qubits].to_vec(),
        })
    }

    /// Copy with bit `index` (0-based) inverted.
    pub fn with_flipped_bit(&self, index: usize) -> PauliKey {
        let mut bits = self.bits.clone();
        bits[index] = !bits[index];
        PauliKey { bits }
    }

    fn check(&self, qubits: usize) -> Result<(), QotpError> {
        if self.bits.len() != 2 * qubits {
            return Err(QotpError::LengthMismatch {
                key_bits: self.bits.len(),
                needed: 2 * qubits,
            });
        }
        Ok(())
    }
}

impl fmt::Display for PauliKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bits
            .iter()
            .try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

impl fmt::Debug for PauliKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliKey({self})")
    }
}

impl FromStr for PauliKey {
    type Err = QotpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QotpError::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_bits(bits)
    }
}

impl TryFrom<String> for PauliKey {
    type Error = QotpError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PauliKey> for String {
    fn from(k: PauliKey) -> String {
        k.to_string()
    }
}

/// Uniform `2n`-bit key for an `n`-qubit message.
pub fn keygen<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PauliKey, QotpError> {
    if n == 0 {
        return Err(QotpError::EmptyKey(0));
    }
    Ok(PauliKey {
        bits: (0..2 * n).map(|_| rng.random()).collect(),
    })
}

pub fn qotp_encrypt(qubits: &[QubitState], key: &PauliKey) -> Result<Vec<QubitState>, QotpError> {
    key.check(qubits.len())?;
    Ok(qubits
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let (z, x) = key.pair(i);
            let q = if x { apply_pauli_x(q) } else { *q };
            if z {
                apply_pauli_z(&q)
            } else {
                q
            }
        })
        .collect())
}

pub fn qotp_decrypt(qubits: &[QubitState], key: &PauliKey) -> Result<Vec<QubitState>, QotpError> {
    key.check(qubits.len())?;
    Ok(qubits
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let (z, x) = key.pair(i);
            let q = if z { apply_pauli_z(q) } else { *q };
            if x {
                apply_pauli_x(&q)
            } else {
                q
            }
        })
        .collect())
}

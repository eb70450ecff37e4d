//! Decoy-checked quantum channel.
//!
//! A sender hides `delta` decoy qubits, each uniformly one of `|0>, |1>, |+>,
//! |->`, at uniformly random positions of its payload and keeps a
//! [`DecoyRecord`]. After delivery the record is disclosed over an
//! authenticated classical channel and the receiver measures every decoy in
//! its preparation basis. The session aborts when the observed error rate
//! exceeds the threshold.
//!
//! Two eavesdroppers are modeled:
//!
//! * intercept-resend measures every qubit in a random basis and forwards the
//!   eigenstate it observed; a decoy is disturbed with probability 1/4.
//! * entangle-measure couples each qubit to an ancilla through
//!   `|x>|y> -> |x>|y xor x>` and reads the ancilla. Computational-basis states
//!   pass untouched; conjugate-basis states collapse to `|0>` or `|1>`, so a
//!   later Hadamard measurement errs with probability 1/2 and the adversary's
//!   sign guess is a coin flip.
//!
//! Trojan-horse probes (delayed or invisible photons) are countered by optical
//! filters and photon-number splitters in hardware; they are not simulated.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubit::{measure, Basis, QubitState};
use crate::transcript::Transcript;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("decoy record has {positions} positions but {states} states")]
    RecordShape { positions: usize, states: usize },
    #[error("decoy positions must be strictly increasing")]
    UnsortedPositions,
    #[error("decoy position {position} out of bounds for a message of {len} qubits")]
    OutOfBounds { position: usize, len: usize },
    #[error(
        "message of {message} qubits cannot hold {payload} payload qubits and {decoys} decoys"
    )]
    LengthMismatch {
        message: usize,
        payload: usize,
        decoys: usize,
    },
}

/// The four decoy states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoyState {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl DecoyState {
    pub const ALL: [DecoyState; 4] = [Self::Zero, Self::One, Self::Plus, Self::Minus];

    pub fn from_basis_bit(basis: Basis, bit: bool) -> Self {
        match (basis, bit) {
            (Basis::Computational, false) => Self::Zero,
            (Basis::Computational, true) => Self::One,
            (Basis::Hadamard, false) => Self::Plus,
            (Basis::Hadamard, true) => Self::Minus,
        }
    }

    pub fn basis(&self) -> Basis {
        match self {
            Self::Zero | Self::One => Basis::Computational,
            Self::Plus | Self::Minus => Basis::Hadamard,
        }
    }

    pub fn bit(&self) -> bool {
        matches!(self, Self::One | Self::Minus)
    }

    pub fn state(&self) -> QubitState {
        QubitState::eigenstate(self.basis(), self.bit())
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.random_range(0..4)]
    }
}

/// Sender-side secret: where the decoys sit (0-based) and what they are.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecoyRecord {
    positions: Vec<usize>,
    states: Vec<DecoyState>,
}

impl DecoyRecord {
    pub fn new(positions: Vec<usize>, states: Vec<DecoyState>) -> Result<Self, ChannelError> {
        if positions.len() != states.len() {
            return Err(ChannelError::RecordShape {
                positions: positions.len(),
                states: states.len(),
            });
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ChannelError::UnsortedPositions);
        }
        Ok(Self { positions, states })
    }

    /// Uniform interleaving of `delta` decoys into a payload of `payload_len`.
    pub fn random<R: Rng + ?Sized>(payload_len: usize, delta: usize, rng: &mut R) -> Self {
        let mut positions = index::sample(rng, payload_len + delta, delta).into_vec();
        positions.sort_unstable();
        let states = (0..delta).map(|_| DecoyState::random(rng)).collect();
        Self { positions, states }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn states(&self) -> &[DecoyState] {
        &self.states
    }

    pub fn delta(&self) -> usize {
        self.positions.len()
    }

    /// Classical bits needed to disclose the record for a message of `len`
    /// qubits: an index of `ceil(log2 len)` bits plus two state bits per decoy.
    pub fn disclosure_bits(&self, len: usize) -> u64 {
        let index_bits = usize::BITS - len.saturating_sub(1).leading_zeros();
        (self.delta() as u64) * (index_bits.max(1) as u64 + 2)
    }

    fn check_against(&self, len: usize) -> Result<(), ChannelError> {
        match self.positions.last() {
            Some(&last) if last >= len => Err(ChannelError::OutOfBounds {
                position: last,
                len,
            }),
            _ => Ok(()),
        }
    }
}

/// A transmitted qubit sequence: payload with decoys interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMessage {
    qubits: Vec<QubitState>,
    payload_len: usize,
}

impl QuantumMessage {
    pub fn qubits(&self) -> &[QubitState] {
        &self.qubits
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn decoy_count(&self) -> usize {
        self.qubits.len() - self.payload_len
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryModel {
    #[default]
    None,
    InterceptResend,
    EntangleMeasure,
}

/// What the eavesdropper learned about one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interception {
    pub position: usize,
    pub guess: DecoyState,
}

/// Places the decoys of `record` into `payload`.
pub fn insert_decoys_with(
    payload: &[QubitState],
    record: &DecoyRecord,
) -> Result<QuantumMessage, ChannelError> {
    let len = payload.len() + record.delta();
    record.check_against(len)?;
    let mut qubits = Vec::with_capacity(len);
    let mut data = payload.iter();
    let mut decoys = record.positions.iter().zip(&record.states).peekable();
    for pos in 0..len {
        match decoys.peek() {
            Some((&p, state)) if p == pos => {
                qubits.push(state.state());
                decoys.next();
            }
            _ => qubits.push(*data.next().expect("payload length checked")),
        }
    }
    Ok(QuantumMessage {
        qubits,
        payload_len: payload.len(),
    })
}

/// Hides `delta` random decoys in `payload`; the record stays with the sender.
pub fn insert_decoys<R: Rng + ?Sized>(
    payload: &[QubitState],
    delta: usize,
    rng: &mut R,
) -> (QuantumMessage, DecoyRecord) {
    let record = DecoyRecord::random(payload.len(), delta, rng);
    let msg = insert_decoys_with(payload, &record).expect("random record fits");
    (msg, record)
}

/// Delivers `msg` through the channel; the adversary's view is discarded.
pub fn transmit<R: Rng + ?Sized>(
    msg: &QuantumMessage,
    adversary: AdversaryModel,
    rng: &mut R,
) -> QuantumMessage {
    intercept(msg, adversary, rng).0
}

/// Delivers `msg` and also returns the adversary's per-qubit guesses.
pub fn intercept<R: Rng + ?Sized>(
    msg: &QuantumMessage,
    adversary: AdversaryModel,
    rng: &mut R,
) -> (QuantumMessage, Vec<Interception>) {
    let mut view = Vec::new();
    let qubits = match adversary {
        AdversaryModel::None => msg.qubits.clone(),
        AdversaryModel::InterceptResend => msg
            .qubits
            .iter()
            .enumerate()
            .map(|(position, q)| {
                let basis = if rng.random() {
                    Basis::Hadamard
                } else {
                    Basis::Computational
                };
                let (bit, resent) = measure(q, basis, rng);
                view.push(Interception {
                    position,
                    guess: DecoyState::from_basis_bit(basis, bit),
                });
                resent
            })
            .collect(),
        AdversaryModel::EntangleMeasure => msg
            .qubits
            .iter()
            .enumerate()
            .map(|(position, q)| {
                let (ancilla, after) = entangle_and_read(q, rng);
                // The adversary is granted the basis. The ancilla pins the
                // computational value but is independent of a conjugate-basis
                // sign, so reading it as the sign is a coin flip.
                let basis = q.definite_basis().unwrap_or(Basis::Computational);
                let guess = DecoyState::from_basis_bit(basis, ancilla);
                view.push(Interception { position, guess });
                after
            })
            .collect(),
    };
    (
        QuantumMessage {
            qubits,
            payload_len: msg.payload_len,
        },
        view,
    )
}

/// XOR-oracle coupling to a fresh ancilla followed by reading the ancilla.
/// The qubit keeps the phase of the surviving amplitude.
fn entangle_and_read<R: Rng + ?Sized>(q: &QubitState, rng: &mut R) -> (bool, QubitState) {
    let (bit, _) = measure(q, Basis::Computational, rng);
    let amp = if bit { q.amp1() } else { q.amp0() };
    let phase = amp / amp.norm();
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let after = if bit {
        QubitState::new(zero, phase)
    } else {
        QubitState::new(phase, zero)
    };
    (bit, after)
}

/// Outcome of the receiver's decoy check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyCheck {
    pub errors: usize,
    pub delta: usize,
}

impl DecoyCheck {
    /// Mismatches per decoy; zero when no decoys were sent.
    pub fn error_rate(&self) -> f64 {
        if self.delta == 0 {
            0.0
        } else {
            self.errors as f64 / self.delta as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verified {
    Accepted {
        payload: Vec<QubitState>,
        check: DecoyCheck,
    },
    Abort(DecoyCheck),
}

/// Measures each decoy in its preparation basis and strips the decoys.
///
/// With `delta = 0` the check always passes and detects nothing.
pub fn verify_and_strip<R: Rng + ?Sized>(
    msg: &QuantumMessage,
    record: &DecoyRecord,
    threshold: f64,
    rng: &mut R,
) -> Result<Verified, ChannelError> {
    record.check_against(msg.len())?;
    if msg.len() != msg.payload_len + record.delta() {
        return Err(ChannelError::LengthMismatch {
            message: msg.len(),
            payload: msg.payload_len,
            decoys: record.delta(),
        });
    }
    let mut errors = 0;
    for (&pos, state) in record.positions.iter().zip(&record.states) {
        let (bit, _) = measure(&msg.qubits[pos], state.basis(), rng);
        if bit != state.bit() {
            errors += 1;
        }
    }
    let check = DecoyCheck {
        errors,
        delta: record.delta(),
    };
    if check.error_rate() > threshold {
        return Ok(Verified::Abort(check));
    }
    let mut decoys = record.positions.iter().peekable();
    let payload = msg
        .qubits
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            if decoys.peek() == Some(&i) {
                decoys.next();
                false
            } else {
                true
            }
        })
        .map(|(_, q)| *q)
        .collect();
    Ok(Verified::Accepted { payload, check })
}

/// A directed link with an optional eavesdropper on it.
#[derive(Debug, Clone)]
pub struct Channel {
    edge: String,
    adversary: AdversaryModel,
}

impl Channel {
    pub fn new(edge: impl Into<String>, adversary: AdversaryModel) -> Self {
        Self {
            edge: edge.into(),
            adversary,
        }
    }

    pub fn edge(&self) -> &str {
        &self.edge
    }

    pub fn adversary(&self) -> AdversaryModel {
        self.adversary
    }

    /// Transmits `msg`, then discloses `record` classically; both are logged.
    pub fn send<R: Rng + ?Sized>(
        &self,
        label: &str,
        msg: &QuantumMessage,
        record: &DecoyRecord,
        log: &mut Transcript,
        rng: &mut R,
    ) -> QuantumMessage {
        let delivered = transmit(msg, self.adversary, rng);
        log.quantum(&self.edge, label, msg.len(), msg.decoy_count());
        log.classical(
            &self.edge,
            &format!("{label}:decoy-disclosure"),
            record.disclosure_bits(msg.len()),
        );
        delivered
    }
}

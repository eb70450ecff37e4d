//! Three-party oblivious linear evaluation.
//!
//! Bob holds `f(x) = ax + b`, Alice holds `alpha` and learns `f(alpha)`. A
//! helper TP hands Bob a random line `S` and hands Alice a point `(d, g = S(d))`.
//! Alice sends `l = alpha - d`, Bob answers with `V(x) = f(x + l) + S(x)`, and
//! Alice outputs `V(d) - g`.
//!
//! Every value travels as `L = ceil(log2 p)` big-endian qubits, one-time-padded
//! and interleaved with decoys. Message flows and their payload widths:
//!
//! | edge         | payload           | key            |
//! |--------------|-------------------|----------------|
//! | TP -> Bob    | `S` (slope, icpt) | `K_B`, 4L bits  |
//! | TP -> Alice  | `d`, `g`          | `K_A`, 4L bits  |
//! | Alice -> Bob | `l`               | first 2L bits of `K_AB` |
//! | Bob -> Alice | `V` (slope, icpt) | `K_AB`, 4L bits |
//!
//! The modulus need not be prime. A decoded value `>= p` can only come from a
//! disturbed channel and aborts the session as an integrity failure.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    insert_decoys_with, AdversaryModel, Channel, ChannelError, DecoyCheck, DecoyRecord,
    QuantumMessage, Verified,
};
use crate::qotp::{keygen, qotp_decrypt, qotp_encrypt, PauliKey, QotpError};
use crate::qubit::{decode_bits, encode_value, measure, Basis, QubitError, QubitState};
use crate::ring::{Modulus, Polynomial, RingError, ZpElement};
use crate::rng::SeededRng;
use crate::transcript::Transcript;

pub const DEFAULT_DELTA: usize = 16;
pub const DEFAULT_THRESHOLD: f64 = 0.0;

const STREAM_KEYS: u64 = 0;
const STREAM_PROTOCOL: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OleError {
    #[error("session aborted: {0}")]
    Aborted(OleAbort),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Qotp(#[from] QotpError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Qubit(#[from] QubitError),
}

/// The four quantum links of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    TpToBob,
    TpToAlice,
    AliceToBob,
    BobToAlice,
}

impl Edge {
    pub const ALL: [Edge; 4] = [
        Edge::TpToBob,
        Edge::TpToAlice,
        Edge::AliceToBob,
        Edge::BobToAlice,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Edge::TpToBob => "tp->bob",
            Edge::TpToAlice => "tp->alice",
            Edge::AliceToBob => "alice->bob",
            Edge::BobToAlice => "bob->alice",
        }
    }

    fn receiver(&self) -> &'static str {
        match self {
            Edge::TpToBob | Edge::AliceToBob => "bob",
            Edge::TpToAlice | Edge::BobToAlice => "alice",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum AbortReason {
    /// Decoy error rate above the threshold.
    Eavesdropping { errors: usize, delta: usize },
    /// A decoded value was not a residue mod `p`.
    Integrity { value: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OleAbort {
    pub edge: Edge,
    #[serde(flatten)]
    pub reason: AbortReason,
}

impl std::fmt::Display for OleAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.reason {
            AbortReason::Eavesdropping { errors, delta } => write!(
                f,
                "{} decoy check failed ({errors}/{delta} errors)",
                self.edge.label()
            ),
            AbortReason::Integrity { value } => {
                write!(
                    f,
                    "{} delivered out-of-range value {value}",
                    self.edge.label()
                )
            }
        }
    }
}

/// Bob's private line `f(x) = ax + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OleFunction {
    pub a: ZpElement,
    pub b: ZpElement,
}

impl OleFunction {
    pub fn new(a: ZpElement, b: ZpElement) -> Result<Self, RingError> {
        a.add(&b)?;
        Ok(Self { a, b })
    }

    pub fn modulus(&self) -> Modulus {
        self.a.modulus()
    }

    pub fn eval(&self, x: ZpElement) -> Result<ZpElement, RingError> {
        self.a.mul(&x)?.add(&self.b)
    }

    pub fn as_polynomial(&self) -> Polynomial {
        Polynomial::linear(self.a, self.b).expect("shared modulus")
    }
}

/// TP's correlated randomness: a random line `S` and the point `(d, S(d))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OleTpSecrets {
    pub s: Polynomial,
    pub d: ZpElement,
    pub g: ZpElement,
}

/// Per-session parameters and one-time keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OleSessionConfig {
    pub modulus: Modulus,
    pub width: usize,
    pub delta: usize,
    pub threshold: f64,
    pub key_a: PauliKey,
    pub key_b: PauliKey,
    pub key_ab: PauliKey,
    pub seed: u64,
}

impl OleSessionConfig {
    /// Fresh uniform keys, drawn from a stream derived from `seed`.
    pub fn generate(modulus: Modulus, delta: usize, threshold: f64, seed: u64) -> Self {
        let width = modulus.bit_width();
        let mut rng = SeededRng::new(seed).derive(&[STREAM_KEYS]);
        let mut key = || keygen(2 * width, &mut rng).expect("width >= 1");
        let (key_a, key_b, key_ab) = (key(), key(), key());
        Self {
            modulus,
            width,
            delta,
            threshold,
            key_a,
            key_b,
            key_ab,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), OleError> {
        if self.width != self.modulus.bit_width() {
            return Err(OleError::Config(format!(
                "qubit width {} does not match ceil(log2 {}) = {}",
                self.width,
                self.modulus,
                self.modulus.bit_width()
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(OleError::Config(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        for (name, key) in [
            ("K_A", &self.key_a),
            ("K_B", &self.key_b),
            ("K_AB", &self.key_ab),
        ] {
            if key.bits().len() != 4 * self.width {
                return Err(OleError::Config(format!(
                    "{name} has {} bits, expected {}",
                    key.bits().len(),
                    4 * self.width
                )));
            }
        }
        Ok(())
    }

    fn check_element(&self, what: &str, x: &ZpElement) -> Result<(), OleError> {
        if x.modulus() != self.modulus {
            return Err(OleError::Config(format!(
                "{what} lives mod {} but the session is mod {}",
                x.modulus(),
                self.modulus
            )));
        }
        Ok(())
    }
}

/// A sent message together with the sender's decoy record.
#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub message: QuantumMessage,
    pub record: DecoyRecord,
}

/// Every random choice TP makes in a session.
#[derive(Debug, Clone, PartialEq)]
pub struct TpChoices {
    pub s_slope: ZpElement,
    pub s_intercept: ZpElement,
    pub d: ZpElement,
    pub bob_decoys: DecoyRecord,
    pub alice_decoys: DecoyRecord,
}

impl TpChoices {
    pub fn sample<R: Rng + ?Sized>(cfg: &OleSessionConfig, rng: &mut R) -> Self {
        let m = cfg.modulus;
        Self {
            s_slope: m.random(rng),
            s_intercept: m.random(rng),
            d: m.random(rng),
            bob_decoys: DecoyRecord::random(2 * cfg.width, cfg.delta, rng),
            alice_decoys: DecoyRecord::random(2 * cfg.width, cfg.delta, rng),
        }
    }
}

/// Intermediate states prepared by TP.
#[derive(Debug, Clone, PartialEq)]
pub struct TpTrace {
    pub s_plain: Vec<QubitState>,
    pub s_encrypted: Vec<QubitState>,
    pub dg_plain: Vec<QubitState>,
    pub dg_encrypted: Vec<QubitState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpOutput {
    pub to_bob: Outbound,
    pub to_alice: Outbound,
    pub secrets: OleTpSecrets,
    pub trace: TpTrace,
}

fn encode_all(values: &[ZpElement], width: usize) -> Result<Vec<QubitState>, OleError> {
    let mut out = Vec::with_capacity(values.len() * width);
    for v in values {
        out.extend(encode_value(*v, width)?);
    }
    Ok(out)
}

fn seal(
    values: &[ZpElement],
    width: usize,
    key: &PauliKey,
    decoys: &DecoyRecord,
) -> Result<(Vec<QubitState>, Vec<QubitState>, Outbound), OleError> {
    let plain = encode_all(values, width)?;
    let encrypted = qotp_encrypt(&plain, &key.prefix(plain.len())?)?;
    let message = insert_decoys_with(&encrypted, decoys)?;
    Ok((
        plain,
        encrypted,
        Outbound {
            message,
            record: decoys.clone(),
        },
    ))
}

/// What a receiver recovers from one message.
#[derive(Debug, Clone, PartialEq)]
pub struct Opened {
    pub check: DecoyCheck,
    pub encrypted: Vec<QubitState>,
    pub plain: Vec<QubitState>,
    pub values: Vec<ZpElement>,
}

/// Decoy check, strip, decrypt, measure, decode into `count` values.
fn open<R: Rng + ?Sized>(
    edge: Edge,
    msg: &QuantumMessage,
    record: &DecoyRecord,
    key: &PauliKey,
    count: usize,
    cfg: &OleSessionConfig,
    rng: &mut R,
) -> Result<Opened, OleError> {
    let (encrypted, check) =
        match crate::channel::verify_and_strip(msg, record, cfg.threshold, rng)? {
            Verified::Accepted { payload, check } => (payload, check),
            Verified::Abort(check) => {
                return Err(OleError::Aborted(OleAbort {
                    edge,
                    reason: AbortReason::Eavesdropping {
                        errors: check.errors,
                        delta: check.delta,
                    },
                }))
            }
        };
    if encrypted.len() != count * cfg.width {
        return Err(OleError::Config(format!(
            "{} carried {} payload qubits, expected {}",
            edge.label(),
            encrypted.len(),
            count * cfg.width
        )));
    }
    let plain = qotp_decrypt(&encrypted, &key.prefix(encrypted.len())?)?;
    let bits: Vec<bool> = plain
        .iter()
        .map(|q| measure(q, Basis::Computational, rng).0)
        .collect();
    let values = bits
        .chunks(cfg.width)
        .map(|chunk| {
            decode_bits(chunk, cfg.modulus).map_err(|e| match e {
                QubitError::DecodedOutOfRange { value, .. } => OleError::Aborted(OleAbort {
                    edge,
                    reason: AbortReason::Integrity { value },
                }),
                other => other.into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Opened {
        check,
        encrypted,
        plain,
        values,
    })
}

pub fn tp_initialize<R: Rng + ?Sized>(
    cfg: &OleSessionConfig,
    rng: &mut R,
) -> Result<TpOutput, OleError> {
    tp_initialize_with(cfg, &TpChoices::sample(cfg, rng))
}

/// TP's initialization with every random choice supplied.
pub fn tp_initialize_with(
    cfg: &OleSessionConfig,
    choices: &TpChoices,
) -> Result<TpOutput, OleError> {
    cfg.validate()?;
    for (what, x) in [
        ("S slope", &choices.s_slope),
        ("S intercept", &choices.s_intercept),
        ("d", &choices.d),
    ] {
        cfg.check_element(what, x)?;
    }
    let s = Polynomial::linear(choices.s_slope, choices.s_intercept)?;
    let g = s.eval(choices.d)?;
    let (s_plain, s_encrypted, to_bob) = seal(
        &[choices.s_slope, choices.s_intercept],
        cfg.width,
        &cfg.key_b,
        &choices.bob_decoys,
    )?;
    let (dg_plain, dg_encrypted, to_alice) = seal(
        &[choices.d, g],
        cfg.width,
        &cfg.key_a,
        &choices.alice_decoys,
    )?;
    Ok(TpOutput {
        to_bob,
        to_alice,
        secrets: OleTpSecrets { s, d: choices.d, g },
        trace: TpTrace {
            s_plain,
            s_encrypted,
            dg_plain,
            dg_encrypted,
        },
    })
}

/// What Alice keeps between her two phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliceState {
    pub alpha: ZpElement,
    pub d: ZpElement,
    pub g: ZpElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlicePhase1 {
    pub to_bob: Outbound,
    pub state: AliceState,
    pub l: ZpElement,
    pub from_tp: Opened,
    pub l_plain: Vec<QubitState>,
    pub l_encrypted: Vec<QubitState>,
}

/// Alice checks TP's message, recovers `(d, g)` and sends `l = alpha - d`.
pub fn alice_phase1<R: Rng + ?Sized>(
    from_tp: &QuantumMessage,
    tp_record: &DecoyRecord,
    alpha: ZpElement,
    cfg: &OleSessionConfig,
    l_decoys: &DecoyRecord,
    rng: &mut R,
) -> Result<AlicePhase1, OleError> {
    cfg.validate()?;
    cfg.check_element("alpha", &alpha)?;
    let opened = open(Edge::TpToAlice, from_tp, tp_record, &cfg.key_a, 2, cfg, rng)?;
    let (d, g) = (opened.values[0], opened.values[1]);
    let l = alpha.sub(&d)?;
    let (l_plain, l_encrypted, to_bob) = seal(&[l], cfg.width, &cfg.key_ab, l_decoys)?;
    Ok(AlicePhase1 {
        to_bob,
        state: AliceState { alpha, d, g },
        l,
        from_tp: opened,
        l_plain,
        l_encrypted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BobPhase {
    pub to_alice: Outbound,
    pub s: Polynomial,
    pub l: ZpElement,
    pub v: Polynomial,
    pub from_tp: Opened,
    pub from_alice: Opened,
    pub v_plain: Vec<QubitState>,
    pub v_encrypted: Vec<QubitState>,
}

/// Bob checks both incoming messages (TP's first, then Alice's), recovers
/// `S` and `l`, and answers with `V(x) = f(x + l) + S(x)`.
#[allow(clippy::too_many_arguments)]
pub fn bob_phase<R: Rng + ?Sized>(
    s_msg: &QuantumMessage,
    s_record: &DecoyRecord,
    l_msg: &QuantumMessage,
    l_record: &DecoyRecord,
    f: &OleFunction,
    cfg: &OleSessionConfig,
    v_decoys: &DecoyRecord,
    rng: &mut R,
) -> Result<BobPhase, OleError> {
    cfg.validate()?;
    cfg.check_element("f", &f.a)?;
    let from_tp = open(Edge::TpToBob, s_msg, s_record, &cfg.key_b, 2, cfg, rng)?;
    let from_alice = open(Edge::AliceToBob, l_msg, l_record, &cfg.key_ab, 1, cfg, rng)?;
    let s = Polynomial::linear(from_tp.values[0], from_tp.values[1])?;
    let l = from_alice.values[0];
    let v = f.as_polynomial().shift(l)?.add(&s)?;
    let (v_plain, v_encrypted, to_alice) =
        seal(&[v.coeff(1), v.coeff(0)], cfg.width, &cfg.key_ab, v_decoys)?;
    Ok(BobPhase {
        to_alice,
        s,
        l,
        v,
        from_tp,
        from_alice,
        v_plain,
        v_encrypted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlicePhase2 {
    pub output: ZpElement,
    pub v: Polynomial,
    pub from_bob: Opened,
}

/// Alice checks Bob's message, recovers `V` and outputs `V(d) - g`.
pub fn alice_phase2<R: Rng + ?Sized>(
    v_msg: &QuantumMessage,
    v_record: &DecoyRecord,
    state: &AliceState,
    cfg: &OleSessionConfig,
    rng: &mut R,
) -> Result<AlicePhase2, OleError> {
    cfg.validate()?;
    let opened = open(Edge::BobToAlice, v_msg, v_record, &cfg.key_ab, 2, cfg, rng)?;
    let v = Polynomial::linear(opened.values[0], opened.values[1])?;
    let output = v.eval(state.d)?.sub(&state.g)?;
    Ok(AlicePhase2 {
        output,
        v,
        from_bob: opened,
    })
}

/// Eavesdropper placement, one model per link.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeAdversaries {
    pub tp_bob: AdversaryModel,
    pub tp_alice: AdversaryModel,
    pub alice_bob: AdversaryModel,
    pub bob_alice: AdversaryModel,
}

impl EdgeAdversaries {
    pub fn honest() -> Self {
        Self::default()
    }

    /// `model` on `edge`, honest elsewhere.
    pub fn single(edge: Edge, model: AdversaryModel) -> Self {
        let mut adv = Self::default();
        *adv.slot(edge) = model;
        adv
    }

    pub fn on(&self, edge: Edge) -> AdversaryModel {
        match edge {
            Edge::TpToBob => self.tp_bob,
            Edge::TpToAlice => self.tp_alice,
            Edge::AliceToBob => self.alice_bob,
            Edge::BobToAlice => self.bob_alice,
        }
    }

    fn slot(&mut self, edge: Edge) -> &mut AdversaryModel {
        match edge {
            Edge::TpToBob => &mut self.tp_bob,
            Edge::TpToAlice => &mut self.tp_alice,
            Edge::AliceToBob => &mut self.alice_bob,
            Edge::BobToAlice => &mut self.bob_alice,
        }
    }

    fn channel(&self, edge: Edge) -> Channel {
        Channel::new(edge.label(), self.on(edge))
    }
}

/// Values each party observed; kept for auditing, never serialized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OleViews {
    pub alice_d: Option<u64>,
    pub alice_g: Option<u64>,
    pub bob_l: Option<u64>,
    pub bob_s: Option<(u64, u64)>,
    pub alice_v: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OleTranscript {
    pub seed: u64,
    pub log: Transcript,
    pub abort: Option<OleAbort>,
    pub output: Option<u64>,
    #[serde(skip)]
    pub views: OleViews,
}

impl OleTranscript {
    pub fn completed(&self) -> bool {
        self.output.is_some()
    }
}

fn check_verdict(log: &mut Transcript, edge: Edge, check: &DecoyCheck) {
    log.verdict(
        edge.receiver(),
        &format!("decoy-check {}", edge.label()),
        true,
        format!("{}/{} errors", check.errors, check.delta),
    );
}

/// Runs one full session: TP -> Bob, TP -> Alice, Alice -> Bob, Bob -> Alice.
///
/// Aborts are recorded in the transcript; only misconfiguration is an error.
pub fn run_ole(
    f: &OleFunction,
    alpha: ZpElement,
    cfg: &OleSessionConfig,
    adversaries: &EdgeAdversaries,
) -> Result<OleTranscript, OleError> {
    cfg.validate()?;
    cfg.check_element("f", &f.a)?;
    cfg.check_element("alpha", &alpha)?;
    let mut rng = SeededRng::new(cfg.seed).derive(&[STREAM_PROTOCOL]);
    let mut transcript = OleTranscript {
        seed: cfg.seed,
        log: Transcript::default(),
        abort: None,
        output: None,
        views: OleViews::default(),
    };
    match drive(f, alpha, cfg, adversaries, &mut rng, &mut transcript) {
        Ok(output) => {
            transcript.output = Some(output.value());
            transcript
                .log
                .verdict("alice", "output", true, format!("f(alpha) = {output}"));
            Ok(transcript)
        }
        Err(OleError::Aborted(abort)) => {
            transcript.abort = Some(abort);
            transcript
                .log
                .verdict(abort.edge.receiver(), "abort", false, abort.to_string());
            Ok(transcript)
        }
        Err(e) => Err(e),
    }
}

fn drive(
    f: &OleFunction,
    alpha: ZpElement,
    cfg: &OleSessionConfig,
    adversaries: &EdgeAdversaries,
    rng: &mut SeededRng,
    t: &mut OleTranscript,
) -> Result<ZpElement, OleError> {
    let tp = tp_initialize(cfg, rng)?;
    let s_recv = adversaries.channel(Edge::TpToBob).send(
        "S''",
        &tp.to_bob.message,
        &tp.to_bob.record,
        &mut t.log,
        rng,
    );
    let dg_recv = adversaries.channel(Edge::TpToAlice).send(
        "d''g''",
        &tp.to_alice.message,
        &tp.to_alice.record,
        &mut t.log,
        rng,
    );

    let l_decoys = DecoyRecord::random(cfg.width, cfg.delta, rng);
    let alice = alice_phase1(&dg_recv, &tp.to_alice.record, alpha, cfg, &l_decoys, rng)?;
    check_verdict(&mut t.log, Edge::TpToAlice, &alice.from_tp.check);
    t.views.alice_d = Some(alice.state.d.value());
    t.views.alice_g = Some(alice.state.g.value());
    let l_recv = adversaries.channel(Edge::AliceToBob).send(
        "l''",
        &alice.to_bob.message,
        &alice.to_bob.record,
        &mut t.log,
        rng,
    );

    let v_decoys = DecoyRecord::random(2 * cfg.width, cfg.delta, rng);
    let bob = bob_phase(
        &s_recv,
        &tp.to_bob.record,
        &l_recv,
        &alice.to_bob.record,
        f,
        cfg,
        &v_decoys,
        rng,
    )?;
    check_verdict(&mut t.log, Edge::TpToBob, &bob.from_tp.check);
    check_verdict(&mut t.log, Edge::AliceToBob, &bob.from_alice.check);
    t.views.bob_l = Some(bob.l.value());
    t.views.bob_s = Some((bob.s.coeff(1).value(), bob.s.coeff(0).value()));
    let v_recv = adversaries.channel(Edge::BobToAlice).send(
        "V''",
        &bob.to_alice.message,
        &bob.to_alice.record,
        &mut t.log,
        rng,
    );

    let fin = alice_phase2(&v_recv, &bob.to_alice.record, &alice.state, cfg, rng)?;
    check_verdict(&mut t.log, Edge::BobToAlice, &fin.from_bob.check);
    t.views.alice_v = Some((fin.v.coeff(1).value(), fin.v.coeff(0).value()));
    Ok(fin.output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u64, seed: u64) -> OleSessionConfig {
        OleSessionConfig::generate(Modulus::new(p).unwrap(), DEFAULT_DELTA, 0.0, seed)
    }

    #[test]
    fn honest_run_small_cases() {
        let p2 = Modulus::new(2).unwrap();
        let f = OleFunction::new(p2.one(), p2.one()).unwrap();
        let t = run_ole(&f, p2.one(), &cfg(2, 1), &EdgeAdversaries::honest()).unwrap();
        assert_eq!(t.output, Some(0));
        assert!(t.abort.is_none());
    }

    #[test]
    fn constant_function_ignores_alpha() {
        let p = Modulus::new(101).unwrap();
        let f = OleFunction::new(p.zero(), p.reduce(42)).unwrap();
        for alpha in [0, 1, 57, 100] {
            let t = run_ole(
                &f,
                p.reduce(alpha),
                &cfg(101, alpha),
                &EdgeAdversaries::honest(),
            )
            .unwrap();
            assert_eq!(t.output, Some(42));
        }
    }

    #[test]
    fn zero_line_gives_zero_g() {
        let c = cfg(8, 3);
        let m = c.modulus;
        let choices = TpChoices {
            s_slope: m.zero(),
            s_intercept: m.zero(),
            d: m.reduce(5),
            bob_decoys: DecoyRecord::default(),
            alice_decoys: DecoyRecord::default(),
        };
        assert_eq!(
            tp_initialize_with(&c, &choices).unwrap().secrets.g.value(),
            0
        );
    }

    #[test]
    fn tp_secrets_satisfy_g_equals_s_of_d() {
        let c = cfg(101, 4);
        let mut rng = SeededRng::new(4);
        for _ in 0..1000 {
            let out = tp_initialize(&c, &mut rng).unwrap();
            let sec = out.secrets;
            assert_eq!(sec.s.eval(sec.d).unwrap(), sec.g);
        }
    }

    #[test]
    fn alice_l_is_alpha_minus_d() {
        let c = cfg(101, 5);
        let m = c.modulus;
        let mut rng = SeededRng::new(5);
        for _ in 0..200 {
            let alpha = m.random(&mut rng);
            let tp = tp_initialize(&c, &mut rng).unwrap();
            let l_dec = DecoyRecord::random(c.width, c.delta, &mut rng);
            let a = alice_phase1(
                &tp.to_alice.message,
                &tp.to_alice.record,
                alpha,
                &c,
                &l_dec,
                &mut rng,
            )
            .unwrap();
            let expect = (alpha.value() + 101 - tp.secrets.d.value()) % 101;
            assert_eq!(a.l.value(), expect);
            assert_eq!(a.state.d, tp.secrets.d);
            assert_eq!(a.state.g, tp.secrets.g);
        }
    }

    #[test]
    fn bob_v_matches_closed_form() {
        let c = cfg(97, 6);
        let m = c.modulus;
        let mut rng = SeededRng::new(6);
        for _ in 0..200 {
            let f = OleFunction::new(m.random(&mut rng), m.random(&mut rng)).unwrap();
            let alpha = m.random(&mut rng);
            let tp = tp_initialize(&c, &mut rng).unwrap();
            let l_dec = DecoyRecord::random(c.width, c.delta, &mut rng);
            let a = alice_phase1(
                &tp.to_alice.message,
                &tp.to_alice.record,
                alpha,
                &c,
                &l_dec,
                &mut rng,
            )
            .unwrap();
            let v_dec = DecoyRecord::random(2 * c.width, c.delta, &mut rng);
            let bob = bob_phase(
                &tp.to_bob.message,
                &tp.to_bob.record,
                &a.to_bob.message,
                &a.to_bob.record,
                &f,
                &c,
                &v_dec,
                &mut rng,
            )
            .unwrap();
            // (a + a1) x + (a l + b + b1)
            let (fa, fb) = (f.a.value() as u128, f.b.value() as u128);
            let (a1, b1) = (
                tp.secrets.s.coeff(1).value() as u128,
                tp.secrets.s.coeff(0).value() as u128,
            );
            let l = a.l.value() as u128;
            assert_eq!(bob.v.coeff(1).value() as u128, (fa + a1) % 97);
            assert_eq!(bob.v.coeff(0).value() as u128, (fa * l + fb + b1) % 97);
            let fin = alice_phase2(
                &bob.to_alice.message,
                &bob.to_alice.record,
                &a.state,
                &c,
                &mut rng,
            )
            .unwrap();
            assert_eq!(fin.output, f.eval(alpha).unwrap());
        }
    }

    #[test]
    fn payload_qubits_are_seven_l() {
        for p in [2u64, 8, 101, 257, 65_537] {
            let c = cfg(p, p);
            let m = c.modulus;
            let f = OleFunction::new(m.one(), m.zero()).unwrap();
            let t = run_ole(&f, m.one(), &c, &EdgeAdversaries::honest()).unwrap();
            let l = c.width as u64;
            assert_eq!(t.log.counters.payload_qubits(), 7 * l);
            assert_eq!(t.log.counters.decoys_sent, 4 * DEFAULT_DELTA as u64);
            let edges = &t.log.counters.per_edge;
            assert_eq!(edges["tp->bob"].qubits, 2 * l + 16);
            assert_eq!(edges["tp->alice"].qubits, 2 * l + 16);
            assert_eq!(edges["alice->bob"].qubits, l + 16);
            assert_eq!(edges["bob->alice"].qubits, 2 * l + 16);
        }
    }

    #[test]
    fn transcript_is_deterministic() {
        let c = cfg(65_521, 99);
        let m = c.modulus;
        let f = OleFunction::new(m.reduce(1234), m.reduce(777)).unwrap();
        let adv = EdgeAdversaries::single(Edge::AliceToBob, AdversaryModel::InterceptResend);
        let a = run_ole(&f, m.reduce(5), &c, &adv).unwrap();
        let b = run_ole(&f, m.reduce(5), &c, &adv).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn intercept_on_each_edge_aborts() {
        let m = Modulus::new(8).unwrap();
        let f = OleFunction::new(m.reduce(2), m.reduce(3)).unwrap();
        for edge in Edge::ALL {
            let adv = EdgeAdversaries::single(edge, AdversaryModel::InterceptResend);
            let trials = 2000;
            let aborted: Vec<_> = (0..trials)
                .filter_map(|s| run_ole(&f, m.reduce(4), &cfg(8, s), &adv).unwrap().abort)
                .collect();
            assert!(
                aborted.len() as f64 / trials as f64 >= 0.98,
                "{edge:?} {}",
                aborted.len()
            );
            assert!(aborted.iter().all(|a| a.edge == edge));
        }
    }

    #[test]
    fn config_errors() {
        let mut c = cfg(8, 1);
        c.key_ab = "10".parse().unwrap();
        assert!(matches!(c.validate(), Err(OleError::Config(_))));
        let c = cfg(8, 1);
        let other = Modulus::new(7).unwrap();
        let f = OleFunction::new(other.one(), other.one()).unwrap();
        assert!(matches!(
            run_ole(&f, other.one(), &c, &EdgeAdversaries::honest()),
            Err(OleError::Config(_))
        ));
        let mut c = cfg(8, 1);
        c.threshold = 1.5;
        assert!(c.validate().is_err());
    }
}

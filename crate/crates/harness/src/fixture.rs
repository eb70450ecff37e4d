//! Pinned replay of the worked qOLE example.
//!
//! Qubit sequences are written as space-separated tokens: `0`, `1`, `+`, `-`
//! for the four BB84 states and a leading `-` for a global sign, so `-1` is
//! `-|1>` and `--` is `-|->`. Decoy positions are 1-based.

use serde::{Deserialize, Serialize};

use qsmpc_core::channel::{DecoyRecord, DecoyState};
use qsmpc_core::ole::{
    alice_phase1, alice_phase2, bob_phase, tp_initialize_with, OleError, OleFunction,
    OleSessionConfig, TpChoices,
};
use qsmpc_core::qotp::PauliKey;
use qsmpc_core::qubit::QubitState;
use qsmpc_core::ring::Modulus;
use qsmpc_core::SeededRng;

use crate::error::HarnessError;
use crate::report::{Body, Report, StepCheck, Verdict};

pub const TOY_FIXTURE_JSON: &str = include_str!("../fixtures/toy_example_v1.json");
pub const TOY_FIXTURE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keys {
    pub k_a: String,
    pub k_b: String,
    pub k_ab: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TpPins {
    /// `[slope, intercept]` of `S`.
    pub s: [u64; 2],
    pub d: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoyPins {
    pub tp_bob: Vec<(usize, String)>,
    pub tp_alice: Vec<(usize, String)>,
    pub alice_bob: Vec<(usize, String)>,
    pub bob_alice: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub g: u64,
    pub s_ket: String,
    pub s_prime: String,
    pub s_double: String,
    pub dg_ket: String,
    pub dg_prime: String,
    pub dg_double: String,
    pub alice_dg: [u64; 2],
    pub l: u64,
    pub l_ket: String,
    pub l_prime: String,
    pub l_double: String,
    pub bob_s: [u64; 2],
    pub bob_l: u64,
    pub v: [u64; 2],
    pub v_ket: String,
    pub v_prime: String,
    pub v_double: String,
    pub alice_v: [u64; 2],
    pub v_at_d: u64,
    pub output: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyFixture {
    pub version: u32,
    pub modulus: u64,
    pub f: [u64; 2],
    pub alpha: u64,
    pub keys: Keys,
    pub tp: TpPins,
    pub decoys: DecoyPins,
    pub expected: Expected,
}

impl ToyFixture {
    pub fn builtin() -> Self {
        Self::from_json(TOY_FIXTURE_JSON).expect("bundled fixture parses")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let fx: ToyFixture = serde_json::from_str(text)?;
        if fx.version != TOY_FIXTURE_VERSION {
            return Err(HarnessError::Config(format!(
                "toy fixture version {} is not {TOY_FIXTURE_VERSION}",
                fx.version
            )));
        }
        Ok(fx)
    }

    /// Flips one bit of `K_B`, for negative controls.
    pub fn with_flipped_kb_bit(mut self, index: usize) -> Self {
        let mut bits: Vec<u8> = self.keys.k_b.bytes().collect();
        bits[index] = if bits[index] == b'0' { b'1' } else { b'0' };
        self.keys.k_b = String::from_utf8(bits).expect("ascii");
        self
    }
}

/// Canonical token for a qubit, or its amplitudes if it is none of the eight.
pub fn token(q: &QubitState) -> String {
    let named = [
        ("0", QubitState::zero()),
        ("1", QubitState::one()),
        ("+", QubitState::plus()),
        ("-", QubitState::minus()),
    ];
    for (name, s) in &named {
        if q.eq_exact(s) {
            return (*name).to_owned();
        }
        if q.eq_exact(&s.negated()) {
            return format!("-{name}");
        }
    }
    format!("({:.6},{:.6})", q.amp0(), q.amp1())
}

pub fn render(qs: &[QubitState]) -> String {
    qs.iter().map(token).collect::<Vec<_>>().join(" ")
}

fn parse_decoy(s: &str) -> Result<DecoyState, HarnessError> {
    Ok(match s {
        "0" => DecoyState::Zero,
        "1" => DecoyState::One,
        "+" => DecoyState::Plus,
        "-" => DecoyState::Minus,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown decoy state {other:?}"
            )))
        }
    })
}

fn record(pins: &[(usize, String)]) -> Result<DecoyRecord, HarnessError> {
    let mut positions = Vec::with_capacity(pins.len());
    let mut states = Vec::with_capacity(pins.len());
    for (pos, s) in pins {
        if *pos == 0 {
            return Err(HarnessError::Config("decoy positions are 1-based".into()));
        }
        positions.push(pos - 1);
        states.push(parse_decoy(s)?);
    }
    DecoyRecord::new(positions, states).map_err(|e| HarnessError::Config(e.to_string()))
}

fn key(bits: &str) -> Result<PauliKey, HarnessError> {
    bits.parse()
        .map_err(|e: qsmpc_core::qotp::QotpError| HarnessError::Config(e.to_string()))
}

struct Steps(Vec<StepCheck>);

impl Steps {
    fn check(&mut self, step: &str, expected: impl ToString, actual: impl ToString) {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        self.0.push(StepCheck {
            step: step.to_owned(),
            matched: expected == actual,
            expected,
            actual,
        });
    }

    fn pair(v: [u64; 2]) -> String {
        format!("{} {}", v[0], v[1])
    }
}

/// Replays the bundled fixture.
pub fn replay_toy() -> Report {
    replay_fixture(&ToyFixture::builtin()).expect("bundled fixture is well-formed")
}

/// Runs every step with the fixture's pinned choices and compares each
/// intermediate against the fixture.
pub fn replay_fixture(fx: &ToyFixture) -> Result<Report, HarnessError> {
    let m = Modulus::new(fx.modulus)?;
    let cfg = OleSessionConfig {
        modulus: m,
        width: m.bit_width(),
        delta: fx.decoys.tp_bob.len(),
        threshold: 0.0,
        key_a: key(&fx.keys.k_a)?,
        key_b: key(&fx.keys.k_b)?,
        key_ab: key(&fx.keys.k_ab)?,
        seed: 0,
    };
    let choices = TpChoices {
        s_slope: m.element(fx.tp.s[0])?,
        s_intercept: m.element(fx.tp.s[1])?,
        d: m.element(fx.tp.d)?,
        bob_decoys: record(&fx.decoys.tp_bob)?,
        alice_decoys: record(&fx.decoys.tp_alice)?,
    };
    let f = OleFunction::new(m.element(fx.f[0])?, m.element(fx.f[1])?)?;
    let alpha = m.element(fx.alpha)?;
    let l_rec = record(&fx.decoys.alice_bob)?;
    let v_rec = record(&fx.decoys.bob_alice)?;
    let e = &fx.expected;

    let mut steps = Steps(Vec::new());
    // Every state is definite in its measured basis, so this stream is never drawn.
    let mut rng = SeededRng::new(0);
    let outcome: Result<(), OleError> = (|| {
        let tp = tp_initialize_with(&cfg, &choices)?;
        steps.check("g = S(d)", e.g, tp.secrets.g.value());
        steps.check("|S>", &e.s_ket, render(&tp.trace.s_plain));
        steps.check("S' = QOTP_KB(S)", &e.s_prime, render(&tp.trace.s_encrypted));
        steps.check(
            "S'' with decoys",
            &e.s_double,
            render(tp.to_bob.message.qubits()),
        );
        steps.check("|d>|g>", &e.dg_ket, render(&tp.trace.dg_plain));
        steps.check(
            "d'g' = QOTP_KA(dg)",
            &e.dg_prime,
            render(&tp.trace.dg_encrypted),
        );
        steps.check(
            "d''g'' with decoys",
            &e.dg_double,
            render(tp.to_alice.message.qubits()),
        );

        let alice = alice_phase1(
            &tp.to_alice.message,
            &tp.to_alice.record,
            alpha,
            &cfg,
            &l_rec,
            &mut rng,
        )?;
        steps.check(
            "Alice recovers d, g",
            Steps::pair(e.alice_dg),
            format!("{} {}", alice.state.d, alice.state.g),
        );
        steps.check("l = alpha - d", e.l, alice.l.value());
        steps.check("|l>", &e.l_ket, render(&alice.l_plain));
        steps.check("l' = QOTP_KAB(l)", &e.l_prime, render(&alice.l_encrypted));
        steps.check(
            "l'' with decoys",
            &e.l_double,
            render(alice.to_bob.message.qubits()),
        );

        let bob = bob_phase(
            &tp.to_bob.message,
            &tp.to_bob.record,
            &alice.to_bob.message,
            &alice.to_bob.record,
            &f,
            &cfg,
            &v_rec,
            &mut rng,
        )?;
        steps.check(
            "Bob recovers S",
            Steps::pair(e.bob_s),
            format!("{} {}", bob.s.coeff(1), bob.s.coeff(0)),
        );
        steps.check("Bob recovers l", e.bob_l, bob.l.value());
        steps.check(
            "V(x) = f(x + l) + S(x)",
            Steps::pair(e.v),
            format!("{} {}", bob.v.coeff(1), bob.v.coeff(0)),
        );
        steps.check("|V>", &e.v_ket, render(&bob.v_plain));
        steps.check("V' = QOTP_KAB(V)", &e.v_prime, render(&bob.v_encrypted));
        steps.check(
            "V'' with decoys",
            &e.v_double,
            render(bob.to_alice.message.qubits()),
        );

        let fin = alice_phase2(
            &bob.to_alice.message,
            &bob.to_alice.record,
            &alice.state,
            &cfg,
            &mut rng,
        )?;
        steps.check(
            "Alice recovers V",
            Steps::pair(e.alice_v),
            format!("{} {}", fin.v.coeff(1), fin.v.coeff(0)),
        );
        steps.check("V(d)", e.v_at_d, fin.v.eval(alice.state.d)?.value());
        steps.check("output = V(d) - g", e.output, fin.output.value());
        Ok(())
    })();

    let mut steps = steps.0;
    if let Err(err) = outcome {
        steps.push(StepCheck {
            step: "protocol".into(),
            expected: "completes".into(),
            actual: err.to_string(),
            matched: false,
        });
    }
    let first_divergence = steps.iter().find(|s| !s.matched).map(|s| s.step.clone());
    let matched = steps.iter().filter(|s| s.matched).count();
    let verdict = Verdict::new(
        "toy-fidelity",
        first_divergence.is_none(),
        match &first_divergence {
            None => format!("all {matched} steps match"),
            Some(step) => format!("first divergence at {step}"),
        },
    );
    Ok(Report::new(
        "replay-toy",
        None,
        0,
        vec![verdict],
        Body::Replay {
            steps,
            first_divergence,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        assert_eq!(token(&QubitState::one().negated()), "-1");
        assert_eq!(token(&QubitState::minus().negated()), "--");
        assert_eq!(render(&[QubitState::plus(), QubitState::zero()]), "+ 0");
    }

    #[test]
    fn builtin_replay_passes() {
        let r = replay_toy();
        assert!(r.passed, "{}", r.to_json());
    }

    #[test]
    fn flipped_key_bit_is_caught_at_the_pad() {
        // Bit 1 is the X bit of the first qubit; a Z bit on |0> would be invisible.
        let r = replay_fixture(&ToyFixture::builtin().with_flipped_kb_bit(1)).unwrap();
        assert!(!r.passed);
        match r.body {
            Body::Replay {
                first_divergence, ..
            } => assert_eq!(first_divergence.as_deref(), Some("S' = QOTP_KB(S)")),
            _ => unreachable!(),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let text = TOY_FIXTURE_JSON.replace("\"version\": 1", "\"version\": 2");
        assert!(ToyFixture::from_json(&text).is_err());
    }
}

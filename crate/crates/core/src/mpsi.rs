//! m-party private set intersection from chained OLE sessions.
//!
//! Party `A_j` encodes its set as the monic polynomial `P_{A_j}` vanishing on
//! it and masks it as `P'_{A_j} = P_{A_j} r_{A_j}`. At each evaluation point
//! `alpha_i` the parties build, one OLE per link,
//!
//! ```text
//! P^i_1 = P'_{A_1}(alpha_i) + u_{A_1}(alpha_i)
//! P^i_j = P'_{A_j}(alpha_i) r_{j-1}(alpha_i) + P^i_{j-1}      (j = 2..m)
//! ```
//!
//! with `A_{j-1}` holding the line `r^i_{j-1} x + P^i_{j-1}` and `A_j`
//! evaluating it at `P'^i_{A_j}`. `A_m` adds the shared mask `u`, `A_1` removes
//! `u_{A_1}`, and `A_2` removes `u` and interpolates
//!
//! ```text
//! P_cap = P_{A_m} r_{A_m} r_{m-1} + ... + P_{A_2} r_{A_2} r_1 + P_{A_1} r_{A_1}
//! ```
//!
//! through the `3n + 1` points, announcing the elements of its own set that are
//! roots of `P_cap`.
//!
//! Masks `r_{A_j}, r_j` have no root anywhere in `Z_p`, so they never create or
//! cancel a root. An element outside the intersection is still announced if
//! the masked sum happens to vanish there, which happens with probability at
//! most `3n * n / p` per run.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::AdversaryModel;
use crate::ole::{
    run_ole, EdgeAdversaries, OleAbort, OleError, OleFunction, OleSessionConfig, OleTranscript,
    DEFAULT_DELTA, DEFAULT_THRESHOLD,
};
use crate::ring::{
    poly_from_roots, poly_interpolate, sample_rootfree_poly, EvalPoint, Modulus, Polynomial,
    RingError, ZpElement,
};
use crate::rng::{derive_seed, SeededRng};
use crate::transcript::Transcript;

const STREAM_PREP: u64 = 0;
const STREAM_SHARED_U: u64 = 1;
const STREAM_OLE: u64 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsiError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("aborted in the OLE between A{} and A{party} at point {point}: {abort}", party - 1)]
    Aborted {
        point: usize,
        party: usize,
        abort: OleAbort,
    },
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Ole(OleError),
}

/// Degree policy for the additive masks `u_{A_1}` and `u`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UDegree {
    /// Degree `n`. Too few coefficients to hide all `3n + 1` values.
    Paper,
    /// Degree `3n`: the `3n + 1` masked values are jointly uniform.
    #[default]
    Secure,
}

impl UDegree {
    pub fn degree(&self, n: usize) -> usize {
        match self {
            UDegree::Paper => n,
            UDegree::Secure => 3 * n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyInput {
    /// 1-based party index.
    pub id: usize,
    pub set: BTreeSet<u64>,
}

impl PartyInput {
    pub fn new(id: usize, set: impl IntoIterator<Item = u64>) -> Self {
        Self {
            id,
            set: set.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsiPublicParams {
    pub modulus: Modulus,
    pub parties: usize,
    pub set_size: usize,
    pub points: Vec<ZpElement>,
    pub u_degree: UDegree,
    pub delta: usize,
    pub threshold: f64,
}

impl MpsiPublicParams {
    /// Defaults: `alpha_i = i`, secure mask degree, 16 decoys, zero threshold.
    pub fn new(modulus: Modulus, parties: usize, set_size: usize) -> Result<Self, MpsiError> {
        let count = 3 * set_size as u64 + 1;
        if count >= modulus.value() {
            return Err(MpsiError::Config(format!(
                "need p > 3n + 1 = {count} for the default points, got p = {modulus}"
            )));
        }
        let params = Self {
            modulus,
            parties,
            set_size,
            points: (1..=count).map(|i| modulus.reduce(i)).collect(),
            u_degree: UDegree::default(),
            delta: DEFAULT_DELTA,
            threshold: DEFAULT_THRESHOLD,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), MpsiError> {
        let p = self.modulus.value();
        if !self.modulus.is_prime() {
            return Err(MpsiError::Config(format!("modulus {p} must be prime")));
        }
        if p == 2 {
            return Err(MpsiError::Config("modulus must be an odd prime".into()));
        }
        if self.parties < 2 {
            return Err(MpsiError::Config(format!(
                "need at least 2 parties, got {}",
                self.parties
            )));
        }
        if self.set_size == 0 {
            return Err(MpsiError::Config("empty sets are not supported".into()));
        }
        if self.points.len() != 3 * self.set_size + 1 {
            return Err(MpsiError::Config(format!(
                "need 3n + 1 = {} evaluation points, got {}",
                3 * self.set_size + 1,
                self.points.len()
            )));
        }
        let distinct: BTreeSet<u64> = self.points.iter().map(|x| x.value()).collect();
        if distinct.len() != self.points.len() {
            return Err(MpsiError::Config(
                "evaluation points must be distinct".into(),
            ));
        }
        if self.points.iter().any(|x| x.modulus() != self.modulus) {
            return Err(MpsiError::Config(
                "evaluation point with a foreign modulus".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(MpsiError::Config(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }

    fn check_input(&self, input: &PartyInput) -> Result<(), MpsiError> {
        if input.id == 0 || input.id > self.parties {
            return Err(MpsiError::Config(format!(
                "party id {} out of range",
                input.id
            )));
        }
        if input.set.len() != self.set_size {
            return Err(MpsiError::Config(format!(
                "party {} holds {} elements, expected {}",
                input.id,
                input.set.len(),
                self.set_size
            )));
        }
        if let Some(&bad) = input.set.iter().find(|&&v| v >= self.modulus.value()) {
            return Err(MpsiError::Config(format!(
                "party {} element {bad} is not below {}",
                input.id, self.modulus
            )));
        }
        Ok(())
    }

    fn width(&self) -> u64 {
        self.modulus.bit_width() as u64
    }
}

/// A party's private polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyMasks {
    pub id: usize,
    pub set: BTreeSet<u64>,
    /// `P_{A_j}`: monic, vanishing exactly on the party's set.
    pub set_poly: Polynomial,
    /// `r_{A_j}`, multiplied into the party's own polynomial.
    pub own_mask: Polynomial,
    /// `r_j`, the slope this party contributes as OLE holder.
    pub link_mask: Polynomial,
    /// `P'_{A_j} = P_{A_j} r_{A_j}`.
    pub masked: Polynomial,
    /// `u_{A_1}`, party 1 only.
    pub u_a1: Option<Polynomial>,
    /// `P_1 = P'_{A_1} + u_{A_1}`, party 1 only.
    pub p1: Option<Polynomial>,
}

fn random_poly<R: rand::Rng + ?Sized>(degree: usize, m: Modulus, rng: &mut R) -> Polynomial {
    let coeffs: Vec<u64> = (0..=degree).map(|_| m.random(rng).value()).collect();
    Polynomial::from_coeffs(&coeffs, m)
}

pub fn prep_party<R: rand::Rng + ?Sized>(
    input: &PartyInput,
    params: &MpsiPublicParams,
    rng: &mut R,
) -> Result<PartyMasks, MpsiError> {
    params.validate()?;
    params.check_input(input)?;
    let m = params.modulus;
    let roots: Vec<ZpElement> = input.set.iter().map(|&v| m.reduce(v)).collect();
    let set_poly = poly_from_roots(&roots, m)?;
    let own_mask = sample_rootfree_poly(params.set_size, m, rng)?;
    let link_mask = sample_rootfree_poly(params.set_size, m, rng)?;
    let masked = set_poly.mul(&own_mask)?;
    let (u_a1, p1) = if input.id == 1 {
        let u = random_poly(params.u_degree.degree(params.set_size), m, rng);
        let p1 = masked.add(&u)?;
        (Some(u), Some(p1))
    } else {
        (None, None)
    };
    Ok(PartyMasks {
        id: input.id,
        set: input.set.clone(),
        set_poly,
        own_mask,
        link_mask,
        masked,
        u_a1,
        p1,
    })
}

/// One chain link at point `point`: `A_{party-1}` holds the line
/// `holder_r * x + holder_value`, `A_party` evaluates it at `evaluator_value`.
/// Returns `P^i_j` (held by `A_party`) and the OLE transcript.
pub fn chain_step(
    point: usize,
    party: usize,
    holder_value: ZpElement,
    holder_r: ZpElement,
    evaluator_value: ZpElement,
    cfg: &OleSessionConfig,
    adversaries: &EdgeAdversaries,
) -> Result<(ZpElement, OleTranscript), MpsiError> {
    if holder_r.is_zero() {
        return Err(MpsiError::Config(format!(
            "link mask of A{} vanishes at point {point}",
            party - 1
        )));
    }
    let f = OleFunction::new(holder_r, holder_value)?;
    let t = run_ole(&f, evaluator_value, cfg, adversaries).map_err(MpsiError::Ole)?;
    if let Some(abort) = t.abort {
        return Err(MpsiError::Aborted {
            point,
            party,
            abort,
        });
    }
    let out = cfg
        .modulus
        .reduce(t.output.expect("completed session has output"));
    Ok((out, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsiResult {
    pub intersection: BTreeSet<u64>,
    pub p_cap: Polynomial,
    /// Number of OLE sessions executed.
    pub sessions: usize,
    /// Classical messages and verdicts, with counters covering all traffic.
    pub log: Transcript,
    /// Per-session transcripts, ordered by point then party.
    pub ole_transcripts: Vec<OleTranscript>,
    /// Simulator-side copies of every party's private polynomials.
    pub masks: Vec<PartyMasks>,
    /// The shared mask `u`.
    pub u: Polynomial,
    /// Values `A_2` receives from `A_1`, before removing `u`.
    pub a2_received: Vec<u64>,
}

/// Unmasking, interpolation and announcement, given `P^i_m` for every point.
pub fn finalize(
    chain_outputs: &[ZpElement],
    masks: &[PartyMasks],
    u: &Polynomial,
    params: &MpsiPublicParams,
    log: &mut Transcript,
) -> Result<(BTreeSet<u64>, Polynomial, Vec<u64>), MpsiError> {
    params.validate()?;
    if chain_outputs.len() != params.points.len() {
        return Err(MpsiError::Config(format!(
            "expected {} chain outputs, got {}",
            params.points.len(),
            chain_outputs.len()
        )));
    }
    let m = params.parties;
    let width = params.width();
    let count = params.points.len() as u64;
    let first = masks
        .iter()
        .find(|pm| pm.id == 1)
        .ok_or_else(|| MpsiError::Config("missing masks of A1".into()))?;
    let second = masks
        .iter()
        .find(|pm| pm.id == 2)
        .ok_or_else(|| MpsiError::Config("missing masks of A2".into()))?;
    let u_a1 = first
        .u_a1
        .as_ref()
        .ok_or_else(|| MpsiError::Config("A1 has no u_A1".into()))?;

    let mut to_a1 = Vec::with_capacity(chain_outputs.len());
    for (x, out) in params.points.iter().zip(chain_outputs) {
        to_a1.push(out.add(&u.eval(*x)?)?);
    }
    log.classical(&format!("A{m}->A1"), "R", count * width);

    let mut to_a2 = Vec::with_capacity(to_a1.len());
    for (x, r) in params.points.iter().zip(&to_a1) {
        to_a2.push(r.sub(&u_a1.eval(*x)?)?);
    }
    log.classical("A1->A2", "R-uA1", count * width);

    let mut pts = Vec::with_capacity(to_a2.len());
    for (x, v) in params.points.iter().zip(&to_a2) {
        pts.push(EvalPoint::new(*x, v.sub(&u.eval(*x)?)?)?);
    }
    let p_cap = poly_interpolate(&pts)?;

    let mut intersection = BTreeSet::new();
    for &gamma in &second.set {
        if p_cap.eval(params.modulus.reduce(gamma))?.is_zero() {
            intersection.insert(gamma);
        }
    }
    log.classical(
        "A2->all",
        "announce",
        (m as u64 - 1) * intersection.len() as u64 * width,
    );
    log.verdict(
        "A2",
        "intersection",
        true,
        format!("{} element(s)", intersection.len()),
    );
    Ok((
        intersection,
        p_cap,
        to_a2.iter().map(|v| v.value()).collect(),
    ))
}

/// Runs the whole protocol. Point indices run in parallel; the chain within
/// a point is sequential.
pub fn run_mpsi(
    inputs: &[PartyInput],
    params: &MpsiPublicParams,
    adversaries: &EdgeAdversaries,
    seed: u64,
) -> Result<MpsiResult, MpsiError> {
    params.validate()?;
    if inputs.len() != params.parties {
        return Err(MpsiError::Config(format!(
            "expected {} parties, got {}",
            params.parties,
            inputs.len()
        )));
    }
    for (k, input) in inputs.iter().enumerate() {
        if input.id != k + 1 {
            return Err(MpsiError::Config(format!(
                "party at position {k} has id {}, expected {}",
                input.id,
                k + 1
            )));
        }
    }
    let root = SeededRng::new(seed);
    let masks = inputs
        .iter()
        .map(|input| {
            prep_party(
                input,
                params,
                &mut root.derive(&[STREAM_PREP, input.id as u64]),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let m = params.modulus;
    let width = params.width();
    let u_degree = params.u_degree.degree(params.set_size);
    let u = random_poly(u_degree, m, &mut root.derive(&[STREAM_SHARED_U]));

    let mut log = Transcript::default();
    for k in 3..=params.parties {
        log.classical(&format!("A2->A{k}"), "u", (u_degree as u64 + 1) * width);
    }

    let per_point: Vec<Result<(ZpElement, Vec<OleTranscript>), MpsiError>> = params
        .points
        .par_iter()
        .enumerate()
        .map(|(i, &x)| run_point(i, x, &masks, params, adversaries, seed))
        .collect();

    let mut chain_outputs = Vec::with_capacity(per_point.len());
    let mut ole_transcripts = Vec::new();
    for r in per_point {
        let (out, ts) = r?;
        chain_outputs.push(out);
        ole_transcripts.extend(ts);
    }
    for t in &ole_transcripts {
        log.counters.merge(&t.log.counters);
    }
    let (intersection, p_cap, a2_received) =
        finalize(&chain_outputs, &masks, &u, params, &mut log)?;
    Ok(MpsiResult {
        intersection,
        p_cap,
        sessions: ole_transcripts.len(),
        log,
        ole_transcripts,
        masks,
        u,
        a2_received,
    })
}

fn run_point(
    i: usize,
    x: ZpElement,
    masks: &[PartyMasks],
    params: &MpsiPublicParams,
    adversaries: &EdgeAdversaries,
    seed: u64,
) -> Result<(ZpElement, Vec<OleTranscript>), MpsiError> {
    let p1 = masks[0].p1.as_ref().expect("party 1 has P_1");
    let mut value = p1.eval(x)?;
    let mut transcripts = Vec::with_capacity(masks.len() - 1);
    for j in 2..=masks.len() {
        let holder = &masks[j - 2];
        let evaluator = &masks[j - 1];
        let cfg = OleSessionConfig::generate(
            params.modulus,
            params.delta,
            params.threshold,
            derive_seed(seed, &[STREAM_OLE, i as u64, j as u64]),
        );
        let (next, t) = chain_step(
            i + 1,
            j,
            value,
            holder.link_mask.eval(x)?,
            evaluator.masked.eval(x)?,
            &cfg,
            adversaries,
        )?;
        value = next;
        transcripts.push(t);
    }
    Ok((value, transcripts))
}

/// Adversary on every link of every OLE session.
pub fn everywhere(model: AdversaryModel) -> EdgeAdversaries {
    EdgeAdversaries {
        tp_bob: model,
        tp_alice: model,
        alice_bob: model,
        bob_alice: model,
    }
}

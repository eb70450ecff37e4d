//! Machine-readable experiment reports.

use serde::{Deserialize, Serialize};

use qsmpc_core::channel::AdversaryModel;
use qsmpc_core::transcript::CostCounters;

use crate::stats::{BinomialCheck, LinearFit};

pub const REPORT_SCHEMA: &str = "qsmpc-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Correct,
    Wrong,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    /// OLE: `[f(alpha)]`; MPSI: the announced intersection.
    pub result: Vec<u64>,
    pub expected: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort: Option<String>,
}

/// Counts that combine by addition, so any merge order gives the same totals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: u64,
    pub correct: u64,
    pub wrong: u64,
    pub aborted: u64,
    pub eavesdropping_aborts: u64,
    pub integrity_aborts: u64,
    pub sessions: u64,
    pub costs: CostCounters,
}

impl Aggregate {
    pub fn merge(mut self, other: &Aggregate) -> Aggregate {
        self.trials += other.trials;
        self.correct += other.correct;
        self.wrong += other.wrong;
        self.aborted += other.aborted;
        self.eavesdropping_aborts += other.eavesdropping_aborts;
        self.integrity_aborts += other.integrity_aborts;
        self.sessions += other.sessions;
        self.costs.merge(&other.costs);
        self
    }

    pub fn summary(&self) -> Summary {
        let n = self.trials.max(1) as f64;
        let (lo, hi) = crate::stats::empirical_interval(self.aborted, self.trials);
        Summary {
            success_rate: self.correct as f64 / n,
            abort_rate: self.aborted as f64 / n,
            abort_rate_lower: lo,
            abort_rate_upper: hi,
        }
    }
}

/// Rates derived from an [`Aggregate`]; the interval is 3 sigma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub success_rate: f64,
    pub abort_rate: f64,
    pub abort_rate_lower: f64,
    pub abort_rate_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub step: String,
    pub expected: String,
    pub actual: String,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub delta: usize,
    pub detection: BinomialCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OleCostRow {
    pub modulus: u64,
    pub width: usize,
    pub payload_qubits: u64,
    pub decoys: u64,
    pub classical_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsiCostRow {
    pub modulus: u64,
    pub width: usize,
    pub parties: usize,
    pub set_size: usize,
    pub sessions: usize,
    pub payload_qubits: u64,
    pub total_qubits: u64,
    pub classical_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Replay {
        steps: Vec<StepCheck>,
        #[serde(skip_serializing_if = "Option::is_none")]
        first_divergence: Option<String>,
    },
    Trials {
        aggregate: Aggregate,
        summary: Summary,
        outcomes: Vec<TrialOutcome>,
    },
    AttackCurve {
        model: AdversaryModel,
        rows: Vec<CurveRow>,
        #[serde(skip_serializing_if = "Option::is_none")]
        hadamard_guess: Option<BinomialCheck>,
    },
    CommAudit {
        delta: usize,
        ole: Vec<OleCostRow>,
        mpsi: Vec<MpsiCostRow>,
        fit_width: LinearFit,
        fit_sessions: LinearFit,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_sha256: Option<String>,
    pub seed: u64,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    pub body: Body,
}

impl Report {
    /// `passed` is the conjunction of `verdicts`.
    pub fn new(
        command: &str,
        scenario_sha256: Option<String>,
        seed: u64,
        verdicts: Vec<Verdict>,
        body: Body,
    ) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_owned(),
            command: command.to_owned(),
            scenario_sha256,
            seed,
            passed: verdicts.iter().all(|v| v.passed),
            verdicts,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

//! Scenario files: one JSON object per experiment, validated before use.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qsmpc_core::mpsi::UDegree;
use qsmpc_core::ole::{EdgeAdversaries, DEFAULT_DELTA, DEFAULT_THRESHOLD};
use qsmpc_core::ring::{is_prime, Modulus};

use crate::error::HarnessError;

pub const SCENARIO_VERSION: u32 = 1;
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Ole,
    Mpsi,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<PathBuf>,
}

fn default_version() -> u32 {
    SCENARIO_VERSION
}
fn default_delta() -> usize {
    DEFAULT_DELTA
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_version")]
    pub version: u32,
    pub protocol: Protocol,
    pub modulus: u64,
    /// OLE only: `[a, b]` for `f(x) = a x + b`; random per trial when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<[u64; 2]>,
    /// OLE only: the evaluation point; random per trial when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u64>,
    /// MPSI only: one set per party, all of the same size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<u64>>>,
    /// MPSI only: evaluation points; `1..=3n+1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<u64>>,
    #[serde(default = "default_delta")]
    pub delta: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub adversaries: EdgeAdversaries,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub u_degree: UDegree,
    #[serde(default)]
    pub output: OutputPaths,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub delta: Option<usize>,
    pub threshold: Option<f64>,
    pub u_degree: Option<UDegree>,
}

fn config(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), HarnessError> {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.delta {
            self.delta = v;
        }
        if let Some(v) = o.threshold {
            self.threshold = v;
        }
        if let Some(v) = o.u_degree {
            self.u_degree = v;
        }
        self.validate()
    }

    pub fn modulus(&self) -> Result<Modulus, HarnessError> {
        Ok(Modulus::new(self.modulus)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.version != SCENARIO_VERSION {
            return Err(config(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        let p = self.modulus;
        if p < 2 {
            return Err(config(format!("modulus must be at least 2, got {p}")));
        }
        if self.trials == 0 {
            return Err(config("trials must be positive"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(config(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        let below = |what: &str, v: u64| {
            if v >= p {
                Err(config(format!("{what} = {v} is not below the modulus {p}")))
            } else {
                Ok(())
            }
        };
        match self.protocol {
            Protocol::Ole => {
                if self.sets.is_some() || self.points.is_some() {
                    return Err(config("sets and points only apply to protocol mpsi"));
                }
                if let Some([a, b]) = self.f {
                    below("f.a", a)?;
                    below("f.b", b)?;
                }
                if let Some(x) = self.alpha {
                    below("alpha", x)?;
                }
            }
            Protocol::Mpsi => {
                if self.f.is_some() || self.alpha.is_some() {
                    return Err(config("f and alpha only apply to protocol ole"));
                }
                if !is_prime(p) || p == 2 {
                    return Err(config(format!(
                        "protocol mpsi needs an odd prime modulus, got {p}"
                    )));
                }
                let sets = self
                    .sets
                    .as_ref()
                    .ok_or_else(|| config("protocol mpsi requires sets"))?;
                if sets.len() < 2 {
                    return Err(config("protocol mpsi needs at least 2 sets"));
                }
                let n = sets[0].len();
                if n == 0 {
                    return Err(config("empty sets are not supported"));
                }
                for (k, s) in sets.iter().enumerate() {
                    if s.len() != n {
                        return Err(config(format!(
                            "set {} has {} elements, set 1 has {n}",
                            k + 1,
                            s.len()
                        )));
                    }
                    if s.iter().collect::<BTreeSet<_>>().len() != n {
                        return Err(config(format!("set {} repeats an element", k + 1)));
                    }
                    for &v in s {
                        below(&format!("element of set {}", k + 1), v)?;
                    }
                }
                let count = 3 * n + 1;
                match &self.points {
                    Some(pts) => {
                        if pts.len() != count {
                            return Err(config(format!(
                                "need 3n + 1 = {count} points, got {}",
                                pts.len()
                            )));
                        }
                        if pts.iter().collect::<BTreeSet<_>>().len() != count {
                            return Err(config("points must be distinct"));
                        }
                        for &v in pts {
                            below("point", v)?;
                        }
                    }
                    None if count as u64 >= p => {
                        return Err(config(format!(
                            "default points 1..={count} need a modulus above {count}"
                        )))
                    }
                    None => {}
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

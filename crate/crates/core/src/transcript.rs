//! Session transcripts and communication accounting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Traffic on one directed edge, e.g. `tp->bob`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCost {
    pub qubits: u64,
    pub decoys: u64,
    pub classical_bits: u64,
}

impl EdgeCost {
    fn merge(&mut self, other: &EdgeCost) {
        self.qubits += other.qubits;
        self.decoys += other.decoys;
        self.classical_bits += other.classical_bits;
    }
}

/// Running totals of quantum and classical traffic. Only ever increases.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCounters {
    pub qubits_sent: u64,
    pub decoys_sent: u64,
    pub classical_bits_sent: u64,
    pub per_edge: BTreeMap<String, EdgeCost>,
}

impl CostCounters {
    pub fn record_quantum(&mut self, edge: &str, qubits: usize, decoys: usize) {
        self.qubits_sent += qubits as u64;
        self.decoys_sent += decoys as u64;
        let e = self.per_edge.entry(edge.to_owned()).or_default();
        e.qubits += qubits as u64;
        e.decoys += decoys as u64;
    }

    pub fn record_classical(&mut self, edge: &str, bits: u64) {
        self.classical_bits_sent += bits;
        self.per_edge
            .entry(edge.to_owned())
            .or_default()
            .classical_bits += bits;
    }

    /// Qubits that carried data rather than decoys.
    pub fn payload_qubits(&self) -> u64 {
        self.qubits_sent - self.decoys_sent
    }

    /// Associative, commutative accumulation.
    pub fn merge(&mut self, other: &CostCounters) {
        self.qubits_sent += other.qubits_sent;
        self.decoys_sent += other.decoys_sent;
        self.classical_bits_sent += other.classical_bits_sent;
        for (edge, cost) in &other.per_edge {
            self.per_edge.entry(edge.clone()).or_default().merge(cost);
        }
    }
}

/// One transcript line. Messages are `quantum` or `classical`; everything
/// decided locally by a party is a `verdict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Quantum {
        edge: String,
        label: String,
        qubits: usize,
        decoys: usize,
    },
    Classical {
        edge: String,
        label: String,
        bits: u64,
    },
    Verdict {
        party: String,
        label: String,
        passed: bool,
        detail: String,
    },
}

impl Event {
    pub fn is_message(&self) -> bool {
        !matches!(self, Event::Verdict { .. })
    }
}

/// Ordered event log with its cost totals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
    pub counters: CostCounters,
}

impl Transcript {
    pub fn quantum(&mut self, edge: &str, label: &str, qubits: usize, decoys: usize) {
        self.counters.record_quantum(edge, qubits, decoys);
        self.events.push(Event::Quantum {
            edge: edge.to_owned(),
            label: label.to_owned(),
            qubits,
            decoys,
        });
    }

    pub fn classical(&mut self, edge: &str, label: &str, bits: u64) {
        self.counters.record_classical(edge, bits);
        self.events.push(Event::Classical {
            edge: edge.to_owned(),
            label: label.to_owned(),
            bits,
        });
    }

    pub fn verdict(&mut self, party: &str, label: &str, passed: bool, detail: impl Into<String>) {
        self.events.push(Event::Verdict {
            party: party.to_owned(),
            label: label.to_owned(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn append(&mut self, other: Transcript) {
        self.counters.merge(&other.counters);
        self.events.extend(other.events);
    }

    pub fn message_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_message()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_is_order_independent() {
        let mut a = CostCounters::default();
        a.record_quantum("tp->bob", 10, 4);
        let mut b = CostCounters::default();
        b.record_quantum("tp->bob", 3, 1);
        b.record_classical("a2->all", 64);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.payload_qubits(), 8);
        assert_eq!(ab.per_edge["tp->bob"].qubits, 13);
    }
}

// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Correctness oracles for routed circuits.

mod statevector;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use statevector::{statevector_oracle, Statevector, DEFAULT_MAX_QUBITS, OVERLAP_TOLERANCE};

use crate::circuit::{Circuit, GateId, VirtualQubit};
use crate::router::{GateOrigin, RoutedCircuit};
use crate::scalar::Scalar;
use crate::topology::Topology;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Position in the routed gate list, or the list length for problems
    /// detected after the replay.
    pub gate_index: usize,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gate {}: {}", self.gate_index, self.reason)
    }
}

/// Outcome of one or more checks. Flags left `None` were not checked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub legal: Option<bool>,
    pub equivalent: Option<bool>,
    pub first_violation: Option<Violation>,
    pub fidelity_overlap: Option<f64>,
}

impl VerificationReport {
    /// True when every check that ran passed.
    pub fn passed(&self) -> bool {
        self.legal != Some(false) && self.equivalent != Some(false)
    }

    /// Combines two reports; the earlier violation wins.
    pub fn merge(mut self, other: VerificationReport) -> VerificationReport {
        let and = |a: Option<bool>, b: Option<bool>| match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => Some(x && y),
        };
        self.legal = and(self.legal, other.legal);
        self.equivalent = and(self.equivalent, other.equivalent);
        self.first_violation = match (self.first_violation, other.first_violation) {
            (Some(a), Some(b)) => Some(if b.gate_index < a.gate_index { b } else { a }),
            (a, b) => a.or(b),
        };
        self.fidelity_overlap = self.fidelity_overlap.or(other.fidelity_overlap);
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("routed gate {index} refers to unknown original gate {id}")]
    UnknownGate { index: usize, id: GateId },
    #[error("original gate {id} emitted twice (routed gates {first} and {second})")]
    DuplicateGate { id: GateId, first: usize, second: usize },
    #[error("{qubits} qubits exceed the simulator limit of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },
    #[error("gate kind {0} cannot be simulated")]
    Unsimulable(crate::circuit::GateKind),
}

fn violation(gate_index: usize, reason: impl Into<String>) -> Option<Violation> {
    Some(Violation { gate_index, reason: reason.into() })
}

/// Every two-qubit output gate must act on a topology edge.
pub fn check_legality<T: Scalar>(rc: &RoutedCircuit, topo: &Topology<T>) -> VerificationReport {
    let m = topo.num_qubits();
    for (i, g) in rc.gates().iter().enumerate() {
        let bad = match *g.qubits() {
            [a] if a.index() >= m => Some(format!("qubit {a} outside the topology")),
            [a, b] if a.index() >= m || b.index() >= m => Some(format!("pair ({a}, {b}) outside the topology")),
            [a, b] if !topo.are_adjacent(a, b) => Some(format!("{} on uncoupled pair ({a}, {b})", g.kind())),
            _ => None,
        };
        if let Some(reason) = bad {
            return VerificationReport { legal: Some(false), first_violation: violation(i, reason), ..Default::default() };
        }
    }
    VerificationReport { legal: Some(true), ..Default::default() }
}

/// Replays the routed circuit from its initial placement and checks that each
/// original gate hits its own virtual operands, in an order consistent with
/// the per-qubit gate order of `original`, exactly once, and that the replay
/// ends in the declared final placement.
pub fn check_permutation_equivalence(original: &Circuit, rc: &RoutedCircuit) -> Result<VerificationReport, VerifyError> {
    let n = original.num_qubits() as usize;
    let fail = |i: usize, reason: String| {
        Ok(VerificationReport { equivalent: Some(false), first_violation: violation(i, reason), ..Default::default() })
    };
    let initial = rc.initial_placement();
    if initial.num_virtual() != n || initial.num_physical() != rc.num_physical() {
        return fail(0, format!("initial placement covers {} virtual qubits, circuit has {n}", initial.num_virtual()));
    }

    // Per-qubit gate sequences of the original, CSR layout.
    let mut offsets = vec![0u32; n + 1];
    for g in original.gates() {
        for q in g.qubits() {
            offsets[q.index() + 1] += 1;
        }
    }
    for q in 0..n {
        offsets[q + 1] += offsets[q];
    }
    let mut cursor: Vec<u32> = offsets[..n].to_vec();
    let mut order = vec![0u32; offsets[n] as usize];
    for g in original.gates() {
        for q in g.qubits() {
            order[cursor[q.index()] as usize] = g.id().0;
            cursor[q.index()] += 1;
        }
    }
    cursor.copy_from_slice(&offsets[..n]);

    let mut seen = vec![u32::MAX; original.len()];
    let mut pi = initial.clone();
    let m = rc.num_physical();
    let mut verdict: Option<Violation> = None;
    for (i, g) in rc.gates().iter().enumerate() {
        if let Some(q) = g.qubits().iter().find(|q| q.index() >= m) {
            verdict = verdict.or(violation(i, format!("physical qubit {q} out of range")));
            continue;
        }
        let id = match g.origin() {
            GateOrigin::Swap => {
                let (a, b) = g.pair().expect("swap has two operands");
                pi.swap_physical(a, b);
                continue;
            }
            GateOrigin::Original(id) => id,
        };
        if id.index() >= original.len() {
            return Err(VerifyError::UnknownGate { index: i, id });
        }
        if seen[id.index()] != u32::MAX {
            return Err(VerifyError::DuplicateGate { id, first: seen[id.index()] as usize, second: i });
        }
        seen[id.index()] = i as u32;
        if verdict.is_some() {
            continue;
        }
        let want = original.gate(id);
        let got: Vec<Option<VirtualQubit>> = g.qubits().iter().map(|&p| pi.virt(p)).collect();
        let expect: Vec<Option<VirtualQubit>> = want.qubits().iter().map(|&v| Some(v)).collect();
        let operands_ok = g.kind() == want.kind()
            && (got == expect || (want.kind().is_symmetric() && got.len() == 2 && got[0] == expect[1] && got[1] == expect[0]));
        if !operands_ok {
            verdict = violation(i, format!("{} {id} expected virtual {:?}, found {:?}", want.kind(), expect, got));
            continue;
        }
        for q in want.qubits() {
            let c = &mut cursor[q.index()];
            if order[*c as usize] != id.0 {
                verdict = violation(i, format!("{id} emitted before {} on {q}", GateId(order[*c as usize])));
                break;
            }
            *c += 1;
        }
    }

    if verdict.is_none() {
        if let Some(missing) = seen.iter().position(|&s| s == u32::MAX) {
            verdict = violation(rc.gates().len(), format!("original gate {} never emitted", GateId(missing as u32)));
        } else if &pi != rc.final_placement() {
            verdict = violation(rc.gates().len(), "replayed placement differs from the declared final placement");
        }
    }
    Ok(VerificationReport { equivalent: Some(verdict.is_none()), first_violation: verdict, ..Default::default() })
}

/// Legality plus permutation equivalence.
pub fn check_all<T: Scalar>(original: &Circuit, rc: &RoutedCircuit, topo: &Topology<T>) -> Result<VerificationReport, VerifyError> {
    Ok(check_legality(rc, topo).merge(check_permutation_equivalence(original, rc)?))
}

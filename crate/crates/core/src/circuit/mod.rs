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

//! Circuit intermediate representation over virtual qubits.
//!
//! A [`Circuit`] is a flat, ordered list of one- and two-qubit gates. Gate ids
//! always equal their position in the list, so ids double as indices into
//! per-gate side tables elsewhere in the crate.

mod generators;
mod qasm;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generators::{gen_cuccaro_adder, gen_qft, gen_quantum_volume, gen_random, AdderLayout};
pub use qasm::{parse_qasm, serialize_qasm, QasmError};

/// Index of a qubit in the program being compiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VirtualQubit(pub u32);

impl VirtualQubit {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VirtualQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Position of a gate in its circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateId(pub u32);

impl GateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// Opaque single-qubit unitary. Carries no parameters.
    Generic1q,
    /// Opaque two-qubit unitary, e.g. a Quantum Volume SU(4) block.
    Generic2q,
    H,
    X,
    T,
    Tdg,
    S,
    Sdg,
    CX,
    /// Controlled phase with one angle.
    CP,
    CZ,
    Swap,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::Generic1q,
        GateKind::Generic2q,
        GateKind::H,
        GateKind::X,
        GateKind::T,
        GateKind::Tdg,
        GateKind::S,
        GateKind::Sdg,
        GateKind::CX,
        GateKind::CP,
        GateKind::CZ,
        GateKind::Swap,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Generic1q
            | GateKind::H
            | GateKind::X
            | GateKind::T
            | GateKind::Tdg
            | GateKind::S
            | GateKind::Sdg => 1,
            GateKind::Generic2q | GateKind::CX | GateKind::CP | GateKind::CZ | GateKind::Swap => 2,
        }
    }

    /// Number of angles the gate carries.
    pub fn num_params(self) -> usize {
        match self {
            GateKind::CP => 1,
            _ => 0,
        }
    }

    /// Whether exchanging the two operands leaves the gate unchanged.
    pub fn is_symmetric(self) -> bool {
        matches!(self, GateKind::CZ | GateKind::Swap)
    }

    pub fn qasm_name(self) -> &'static str {
        match self {
            GateKind::Generic1q => "g1q",
            GateKind::Generic2q => "g2q",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::CX => "cx",
            GateKind::CP => "cp",
            GateKind::CZ => "cz",
            GateKind::Swap => "swap",
        }
    }

    pub fn from_qasm_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.qasm_name() == name)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.qasm_name())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("{kind} expects {expected} operand(s), got {got}")]
    Arity { kind: GateKind, expected: usize, got: usize },
    #[error("{kind} expects {expected} parameter(s), got {got}")]
    Params { kind: GateKind, expected: usize, got: usize },
    #[error("two-qubit gate {kind} has repeated operand {qubit}")]
    RepeatedOperand { kind: GateKind, qubit: VirtualQubit },
    #[error("operand {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: VirtualQubit, num_qubits: u32 },
}

/// A single gate. For one-qubit gates both operand slots hold the same qubit
/// and the parameter slot is zero unless the kind is parameterized, so
/// structurally equal gates compare equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    id: GateId,
    kind: GateKind,
    qubits: [VirtualQubit; 2],
    param: f64,
}

impl Gate {
    #[inline]
    pub fn id(&self) -> GateId {
        self.id
    }

    #[inline]
    pub fn kind(&self) -> GateKind {
        self.kind
    }

    #[inline]
    pub fn qubits(&self) -> &[VirtualQubit] {
        &self.qubits[..self.kind.arity()]
    }

    #[inline]
    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    /// Both operands of a two-qubit gate; `None` for one-qubit gates.
    #[inline]
    pub fn pair(&self) -> Option<(VirtualQubit, VirtualQubit)> {
        self.is_two_qubit().then_some((self.qubits[0], self.qubits[1]))
    }

    #[inline]
    pub fn params(&self) -> &[f64] {
        if self.kind.num_params() == 1 {
            std::slice::from_ref(&self.param)
        } else {
            &[]
        }
    }
}

/// Ordered gate list over `num_qubits` virtual qubits.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    num_qubits: u32,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: u32) -> Self {
        Circuit { num_qubits, gates: Vec::new() }
    }

    pub fn with_capacity(num_qubits: u32, capacity: usize) -> Self {
        Circuit { num_qubits, gates: Vec::with_capacity(capacity) }
    }

    #[inline]
    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    #[inline]
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    #[inline]
    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.index()]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn num_two_qubit_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Appends a gate after validating arity, operand range and parameters.
    pub fn push(
        &mut self,
        kind: GateKind,
        qubits: &[VirtualQubit],
        params: &[f64],
    ) -> Result<GateId, CircuitError> {
        if qubits.len() != kind.arity() {
            return Err(CircuitError::Arity { kind, expected: kind.arity(), got: qubits.len() });
        }
        if params.len() != kind.num_params() {
            return Err(CircuitError::Params {
                kind,
                expected: kind.num_params(),
                got: params.len(),
            });
        }
        for &q in qubits {
            if q.0 >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(CircuitError::RepeatedOperand { kind, qubit: qubits[0] });
        }
        let second = *qubits.get(1).unwrap_or(&qubits[0]);
        Ok(self.push_raw(kind, [qubits[0], second], params.first().copied().unwrap_or(0.0)))
    }

    /// Generator-internal append; the caller guarantees validity.
    pub(crate) fn push_raw(&mut self, kind: GateKind, qubits: [VirtualQubit; 2], param: f64) -> GateId {
        debug_assert!(qubits[0].0 < self.num_qubits && qubits[1].0 < self.num_qubits);
        debug_assert!(kind.arity() == 1 || qubits[0] != qubits[1]);
        let id = GateId(self.gates.len() as u32);
        self.gates.push(Gate { id, kind, qubits, param });
        id
    }

    pub(crate) fn one(&mut self, kind: GateKind, q: u32) -> GateId {
        debug_assert_eq!(kind.arity(), 1);
        self.push_raw(kind, [VirtualQubit(q); 2], 0.0)
    }

    pub(crate) fn two(&mut self, kind: GateKind, a: u32, b: u32) -> GateId {
        debug_assert_eq!(kind.arity(), 2);
        self.push_raw(kind, [VirtualQubit(a), VirtualQubit(b)], 0.0)
    }

    pub(crate) fn cp(&mut self, theta: f64, a: u32, b: u32) -> GateId {
        self.push_raw(GateKind::CP, [VirtualQubit(a), VirtualQubit(b)], theta)
    }

    /// Prefix of `X` gates preparing the computational basis state `bits`
    /// (bit `i` of `bits` drives qubit `i`).
    pub fn with_basis_prefix(&self, bits: u64) -> Circuit {
        let mut out = Circuit::with_capacity(self.num_qubits, self.len() + self.num_qubits as usize);
        for q in 0..self.num_qubits.min(64) {
            if bits >> q & 1 == 1 {
                out.one(GateKind::X, q);
            }
        }
        for g in &self.gates {
            out.push_raw(g.kind, g.qubits, g.param);
        }
        out
    }
}

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

//! Gate dependency DAG with a ready front and on-demand layer indices.
//!
//! Dependencies are immediate predecessors per qubit: each gate points at the
//! next gate on each of its operands. A gate is ready once every predecessor
//! has been removed. Layer `l` of a gate is 0 when it is ready and otherwise
//! one more than the largest layer among its remaining predecessors.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Circuit, GateId};

const NONE: u32 = u32::MAX;
const REMOVED: u8 = u8::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("gate {0} still has pending predecessors")]
    NotReady(GateId),
    #[error("gate {0} was already removed")]
    AlreadyRemoved(GateId),
    #[error("gate {0} is not part of the DAG")]
    Unknown(GateId),
}

/// Dependency DAG over the gates of one circuit. Mutated by [`OpDag::remove`]
/// as gates are executed.
#[derive(Clone, Debug)]
pub struct OpDag<'c> {
    circuit: &'c Circuit,
    /// Next gate on each operand slot of every gate.
    succs: Vec<[u32; 2]>,
    /// Remaining predecessor edges per gate, or `REMOVED`.
    pending: Vec<u8>,
    /// First remaining gate on each virtual qubit.
    head: Vec<u32>,
    ready: BTreeSet<GateId>,
    remaining: usize,
}

/// Gates made ready by one removal.
pub type Unlocked = [Option<GateId>; 2];

impl<'c> OpDag<'c> {
    pub fn build(circuit: &'c Circuit) -> Self {
        let n = circuit.len();
        let mut succs = vec![[NONE; 2]; n];
        let mut pending = vec![0u8; n];
        let mut head = vec![NONE; circuit.num_qubits() as usize];
        // (gate, operand slot) of the latest gate seen on each qubit.
        let mut last: Vec<Option<(u32, usize)>> = vec![None; circuit.num_qubits() as usize];
        for g in circuit.gates() {
            let id = g.id().0;
            for &q in g.qubits() {
                match last[q.index()] {
                    Some((prev, slot)) => {
                        succs[prev as usize][slot] = id;
                        pending[id as usize] += 1;
                    }
                    None => head[q.index()] = id,
                }
            }
            for (slot, &q) in g.qubits().iter().enumerate() {
                last[q.index()] = Some((id, slot));
            }
        }
        let ready = (0..n as u32).filter(|&g| pending[g as usize] == 0).map(GateId).collect();
        OpDag { circuit, succs, pending, head, ready, remaining: n }
    }

    #[inline]
    pub fn circuit(&self) -> &'c Circuit {
        self.circuit
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    /// Number of gates not yet removed.
    #[inline]
    pub fn len(&self) -> usize {
        self.remaining
    }

    /// Gates with no remaining predecessors, in id order.
    #[inline]
    pub fn ready(&self) -> &BTreeSet<GateId> {
        &self.ready
    }

    #[inline]
    pub fn is_ready(&self, g: GateId) -> bool {
        self.pending.get(g.index()) == Some(&0)
    }

    #[inline]
    pub fn contains(&self, g: GateId) -> bool {
        self.pending.get(g.index()).is_some_and(|&p| p != REMOVED)
    }

    /// Earliest remaining gate acting on virtual qubit `q`.
    #[inline]
    pub fn head(&self, q: crate::circuit::VirtualQubit) -> Option<GateId> {
        let h = self.head[q.index()];
        (h != NONE).then_some(GateId(h))
    }

    /// Distinct dependency edges `(earlier, later)` among remaining gates.
    pub fn edges(&self) -> Vec<(GateId, GateId)> {
        let mut out = Vec::new();
        for (g, s) in self.succs.iter().enumerate() {
            if self.pending[g] == REMOVED {
                continue;
            }
            for (i, &t) in s.iter().enumerate() {
                if t != NONE && !(i == 1 && s[0] == t) {
                    out.push((GateId(g as u32), GateId(t)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Removes a ready gate and returns the successors it made ready.
    pub fn remove(&mut self, g: GateId) -> Result<Unlocked, DagError> {
        match self.pending.get(g.index()) {
            None => return Err(DagError::Unknown(g)),
            Some(&REMOVED) => return Err(DagError::AlreadyRemoved(g)),
            Some(&0) => {}
            Some(_) => return Err(DagError::NotReady(g)),
        }
        self.pending[g.index()] = REMOVED;
        self.ready.remove(&g);
        self.remaining -= 1;
        let gate = self.circuit.gate(g);
        let mut unlocked = [None, None];
        for (slot, &q) in gate.qubits().iter().enumerate() {
            let s = self.succs[g.index()][slot];
            self.head[q.index()] = s;
            if s == NONE {
                continue;
            }
            let p = &mut self.pending[s as usize];
            *p -= 1;
            if *p == 0 {
                self.ready.insert(GateId(s));
                unlocked[slot] = Some(GateId(s));
            }
        }
        Ok(unlocked)
    }

    /// Gates grouped by layer index `0..=k`. Element 0 is the ready set;
    /// trailing layers may be empty.
    pub fn front_layers(&self, k: usize) -> Vec<Vec<GateId>> {
        let mut layers = Vec::with_capacity(k + 1);
        let mut hits = HashMap::new();
        self.front_layers_into(k, &mut layers, &mut hits);
        layers
    }

    /// Allocation-reusing form of [`OpDag::front_layers`].
    pub fn front_layers_into(
        &self,
        k: usize,
        layers: &mut Vec<Vec<GateId>>,
        hits: &mut HashMap<u32, u8>,
    ) {
        layers.resize_with(k + 1, Vec::new);
        layers.truncate(k + 1);
        layers.iter_mut().for_each(Vec::clear);
        hits.clear();
        layers[0].extend(self.ready.iter().copied());
        for l in 1..=k {
            let (done, rest) = layers.split_at_mut(l);
            let next = &mut rest[0];
            for &g in &done[l - 1] {
                for &s in &self.succs[g.index()] {
                    if s == NONE {
                        continue;
                    }
                    let h = hits.entry(s).or_insert(0);
                    *h += 1;
                    if *h == self.pending[s as usize] {
                        next.push(GateId(s));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_unstable();
        }
    }

    /// Layer index of every remaining gate (`None` for removed gates),
    /// computed over the whole DAG.
    pub fn layers(&self) -> Vec<Option<u32>> {
        let mut layer = vec![None; self.succs.len()];
        let mut hits = vec![0u8; self.succs.len()];
        let mut current: Vec<u32> = self.ready.iter().map(|g| g.0).collect();
        let mut l = 0;
        while !current.is_empty() {
            let mut next = Vec::new();
            for &g in &current {
                layer[g as usize] = Some(l);
                for &s in &self.succs[g as usize] {
                    if s == NONE {
                        continue;
                    }
                    hits[s as usize] += 1;
                    if hits[s as usize] == self.pending[s as usize] {
                        next.push(s);
                    }
                }
            }
            current = next;
            l += 1;
        }
        layer
    }

    /// Graphviz rendering of the remaining DAG.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ops {\n");
        for g in self.circuit.gates() {
            if !self.contains(g.id()) {
                continue;
            }
            let qs: Vec<String> = g.qubits().iter().map(|q| q.0.to_string()).collect();
            let _ = writeln!(out, "  {} [label=\"{} {}\"];", g.id().0, g.kind(), qs.join(","));
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  {} -> {};", a.0, b.0);
        }
        out.push_str("}\n");
        out
    }
}

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

//! Force-directed SWAP routing.
//!
//! Each iteration executes every ready gate whose operands are coupled,
//! accumulates attraction-force coefficients over the first `k + 1` DAG
//! layers, and applies a conflict-free set of SWAPs picked greedily by
//! descending coefficient. Iterations repeat until the DAG is empty.

mod forces;
mod placement;
mod select;

use std::collections::{HashMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forces::{accumulate_coefficients, attraction_force, layer_weight, ForceField, WeightMode};
pub use placement::{Placement, PlacementError};
pub use select::select_swaps;

use crate::circuit::{Circuit, GateId, GateKind};
use crate::dag::OpDag;
use crate::scalar::Scalar;
use crate::topology::{EdgeId, PhysicalQubit, Topology};
use forces::{accumulate_layers, Scaling};

/// Perturbation probability used while stalled when the configured one is 0.
const STALL_RHO_FLOOR: f64 = 0.05;
const STALL_RHO_CAP: f64 = 0.5;
/// Idle iterations, in stall windows, after which the router stops selecting
/// by coefficient and walks the oldest front gate along a shortest path.
const FORCED_AFTER_WINDOWS: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouterConfig<T = f64> {
    /// Lookahead `k`: DAG layers beyond the front that contribute forces.
    pub lookahead: usize,
    /// Penalization threshold `p`: edges with a smaller coefficient are ignored.
    pub penalty: T,
    /// Fidelity exponent `r`.
    pub fidelity_exponent: T,
    pub weight_mode: WeightMode,
    pub seed: u64,
    /// Probability of exchanging adjacent entries of the sorted SWAP list.
    pub perturb_rho: f64,
    /// Iterations without progress before perturbation escalates. An
    /// iteration progresses if it executes a gate or brings the operands of
    /// the ready gates closer than ever since the last execution.
    pub stall_window: usize,
    pub max_iterations: usize,
    /// Rejects a SWAP that moves a ready gate's operand when the other
    /// operand already moved this iteration and the pair would not get
    /// closer. Off reproduces plain endpoint-disjoint greedy selection.
    #[serde(default = "default_true")]
    pub partner_check: bool,
}

fn default_true() -> bool {
    true
}

impl<T: Scalar> Default for RouterConfig<T> {
    fn default() -> Self {
        RouterConfig {
            lookahead: 1,
            penalty: T::zero(),
            fidelity_exponent: T::zero(),
            weight_mode: WeightMode::Diameter,
            seed: 0,
            perturb_rho: 0.05,
            stall_window: 4,
            max_iterations: 10_000_000,
            partner_check: true,
        }
    }
}

impl<T: Scalar> RouterConfig<T> {
    pub fn validate(&self) -> Result<(), RouteError> {
        let bad = |msg: String| Err(RouteError::InvalidConfig(msg));
        if !(0.0..1.0).contains(&self.perturb_rho) {
            return bad(format!("perturb_rho must lie in [0, 1), got {}", self.perturb_rho));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if self.stall_window == 0 {
            return bad("stall_window must be positive".into());
        }
        if !(self.fidelity_exponent >= T::zero()) || self.fidelity_exponent.is_infinite() {
            return bad(format!("fidelity exponent must be finite and >= 0, got {}", self.fidelity_exponent));
        }
        if self.penalty.is_nan() {
            return bad("penalty must not be NaN".into());
        }
        Ok(())
    }
}

/// Where an output gate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOrigin {
    Original(GateId),
    Swap,
}

const SWAP_TAG: u32 = u32::MAX;

/// Physical qubit indices must fit below this bound so a [`RoutedGate`] packs
/// its kind into the spare high byte of the second operand.
pub const MAX_PHYSICAL_QUBITS: usize = 1 << KIND_SHIFT;

const KIND_SHIFT: u32 = 24;
const QUBIT_MASK: u32 = (1 << KIND_SHIFT) - 1;

/// Output gate addressed by physical qubits. Twelve bytes: scaling runs keep
/// on the order of 10^8 of these.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RoutedGateRepr", into = "RoutedGateRepr")]
pub struct RoutedGate {
    source: u32,
    a: u32,
    b_kind: u32,
}

/// Operands of a [`RoutedGate`], one or two physical qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Operands {
    qubits: [PhysicalQubit; 2],
    len: u8,
}

impl std::ops::Deref for Operands {
    type Target = [PhysicalQubit];

    fn deref(&self) -> &[PhysicalQubit] {
        &self.qubits[..self.len as usize]
    }
}

impl IntoIterator for Operands {
    type Item = PhysicalQubit;
    type IntoIter = std::iter::Take<std::array::IntoIter<PhysicalQubit, 2>>;

    fn into_iter(self) -> Self::IntoIter {
        self.qubits.into_iter().take(self.len as usize)
    }
}

impl RoutedGate {
    fn pack(source: u32, kind: GateKind, [a, b]: [PhysicalQubit; 2]) -> Self {
        assert!(a.0 <= QUBIT_MASK && b.0 <= QUBIT_MASK, "physical qubit index exceeds {MAX_PHYSICAL_QUBITS}");
        // `ALL` lists the kinds in declaration order.
        let tag = kind as u32;
        debug_assert_eq!(GateKind::ALL[tag as usize], kind);
        RoutedGate { source, a: a.0, b_kind: b.0 | tag << KIND_SHIFT }
    }

    pub fn original(id: GateId, kind: GateKind, qubits: [PhysicalQubit; 2]) -> Self {
        debug_assert!(id.0 != SWAP_TAG);
        Self::pack(id.0, kind, qubits)
    }

    pub fn swap(a: PhysicalQubit, b: PhysicalQubit) -> Self {
        Self::pack(SWAP_TAG, GateKind::Swap, [a, b])
    }

    #[inline]
    pub fn origin(&self) -> GateOrigin {
        if self.source == SWAP_TAG {
            GateOrigin::Swap
        } else {
            GateOrigin::Original(GateId(self.source))
        }
    }

    #[inline]
    pub fn is_swap(&self) -> bool {
        self.source == SWAP_TAG
    }

    #[inline]
    pub fn kind(&self) -> GateKind {
        GateKind::ALL[(self.b_kind >> KIND_SHIFT) as usize]
    }

    #[inline]
    pub fn qubits(&self) -> Operands {
        Operands {
            qubits: [PhysicalQubit(self.a), PhysicalQubit(self.b_kind & QUBIT_MASK)],
            len: self.kind().arity() as u8,
        }
    }

    #[inline]
    pub fn pair(&self) -> Option<(PhysicalQubit, PhysicalQubit)> {
        (self.kind().arity() == 2).then_some((PhysicalQubit(self.a), PhysicalQubit(self.b_kind & QUBIT_MASK)))
    }
}

impl std::fmt::Debug for RoutedGate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RoutedGate")
            .field("origin", &self.origin())
            .field("kind", &self.kind())
            .field("qubits", &&*self.qubits())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct RoutedGateRepr {
    gate: Option<GateId>,
    kind: GateKind,
    qubits: Vec<PhysicalQubit>,
}

impl From<RoutedGate> for RoutedGateRepr {
    fn from(g: RoutedGate) -> Self {
        let gate = match g.origin() {
            GateOrigin::Original(id) => Some(id),
            GateOrigin::Swap => None,
        };
        RoutedGateRepr { gate, kind: g.kind(), qubits: g.qubits().to_vec() }
    }
}

impl TryFrom<RoutedGateRepr> for RoutedGate {
    type Error = String;

    fn try_from(r: RoutedGateRepr) -> Result<Self, String> {
        let kind = if r.gate.is_none() { GateKind::Swap } else { r.kind };
        if r.qubits.len() != kind.arity() {
            return Err(format!("{kind} expects {} operand(s), got {}", kind.arity(), r.qubits.len()));
        }
        if let Some(q) = r.qubits.iter().find(|q| q.index() >= MAX_PHYSICAL_QUBITS) {
            return Err(format!("physical qubit {q} exceeds {MAX_PHYSICAL_QUBITS}"));
        }
        let a = r.qubits[0];
        let b = r.qubits.get(1).copied().unwrap_or(a);
        Ok(Self::pack(r.gate.map_or(SWAP_TAG, |g| g.0), kind, [a, b]))
    }
}

/// Boundaries of one iteration inside [`RoutedCircuit::gates`]: executed
/// gates occupy `start..executed_end`, inserted SWAPs `executed_end..swaps_end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationSpan {
    pub executed_end: usize,
    pub swaps_end: usize,
}

/// One iteration of a route, borrowed from the routed circuit or router.
#[derive(Clone, Copy, Debug)]
pub struct IterationView<'a> {
    pub index: usize,
    pub executed: &'a [RoutedGate],
    pub swaps: &'a [RoutedGate],
}

/// Routed program: original gates and inserted SWAPs on physical qubits,
/// with the placements before and after and the per-iteration trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutedCircuit {
    num_physical: usize,
    gates: Vec<RoutedGate>,
    initial: Placement,
    #[serde(rename = "final")]
    final_placement: Placement,
    iterations: Vec<IterationSpan>,
}

impl RoutedCircuit {
    /// Assembles a routed circuit from parts; used for hand-built or
    /// deserialized circuits. Spans must tile `gates` in order.
    pub fn from_parts(
        num_physical: usize,
        gates: Vec<RoutedGate>,
        initial: Placement,
        final_placement: Placement,
        iterations: Vec<IterationSpan>,
    ) -> Self {
        RoutedCircuit { num_physical, gates, initial, final_placement, iterations }
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn gates(&self) -> &[RoutedGate] {
        &self.gates
    }

    pub fn initial_placement(&self) -> &Placement {
        &self.initial
    }

    pub fn final_placement(&self) -> &Placement {
        &self.final_placement
    }

    pub fn spans(&self) -> &[IterationSpan] {
        &self.iterations
    }

    pub fn num_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn iterations(&self) -> impl Iterator<Item = IterationView<'_>> + '_ {
        let mut start = 0;
        self.iterations.iter().enumerate().map(move |(index, span)| {
            let view = IterationView {
                index,
                executed: &self.gates[start..span.executed_end],
                swaps: &self.gates[span.executed_end..span.swaps_end],
            };
            start = span.swaps_end;
            view
        })
    }

    pub fn swap_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_swap()).count()
    }

    pub fn swaps(&self) -> impl Iterator<Item = (PhysicalQubit, PhysicalQubit)> + '_ {
        self.gates.iter().filter(|g| g.is_swap()).filter_map(|g| g.pair())
    }

    /// Initial placement with every SWAP applied in order.
    pub fn replay_placement(&self) -> Placement {
        let mut p = self.initial.clone();
        for (a, b) in self.swaps() {
            p.swap_physical(a, b);
        }
        p
    }

    /// The routed program as a circuit over physical qubits, taking kinds and
    /// angles from `original`.
    pub fn to_physical_circuit(&self, original: &Circuit) -> Circuit {
        let mut c = Circuit::with_capacity(self.num_physical as u32, self.gates.len());
        for g in &self.gates {
            let qubits: Vec<_> = g.qubits().iter().map(|p| crate::circuit::VirtualQubit(p.0)).collect();
            let params = match g.origin() {
                GateOrigin::Original(id) => original.gate(id).params(),
                GateOrigin::Swap => &[],
            };
            c.push(g.kind(), &qubits, params).expect("routed gates address valid physical qubits");
        }
        c
    }

    /// Copy without the `index`-th gate. Iteration spans are shifted so the
    /// trace still tiles the gate list.
    pub fn without_gate(&self, index: usize) -> RoutedCircuit {
        let mut out = self.clone();
        out.gates.remove(index);
        for span in &mut out.iterations {
            if span.executed_end > index {
                span.executed_end -= 1;
            }
            if span.swaps_end > index {
                span.swaps_end -= 1;
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("invalid router configuration: {0}")]
    InvalidConfig(String),
    #[error("circuit has {virtual_count} qubits but the topology only {physical_count}")]
    TooManyQubits { virtual_count: usize, physical_count: usize },
    #[error("initial placement covers {placed} virtual / {physical} physical qubits, expected {expected_virtual} / {expected_physical}")]
    PlacementShape { placed: usize, physical: usize, expected_virtual: usize, expected_physical: usize },
    #[error("no convergence after {iterations} iterations ({remaining} gates left)")]
    NoConvergence { iterations: usize, remaining: usize, partial: Box<RoutedCircuit> },
}

/// Per-iteration view yielded by [`Router::step`].
#[derive(Debug)]
pub struct StepView<'r> {
    pub index: usize,
    pub executed: &'r [RoutedGate],
    pub swaps: &'r [RoutedGate],
    pub placement: &'r Placement,
}

/// Incremental router: one call to [`Router::step`] performs one iteration.
pub struct Router<'a, T: Scalar = f64> {
    circuit: &'a Circuit,
    topo: &'a Topology<T>,
    cfg: RouterConfig<T>,
    dag: OpDag<'a>,
    initial: Placement,
    placement: Placement,
    scaling: Scaling<T>,
    field: ForceField<T>,
    layers: Vec<Vec<GateId>>,
    hits: HashMap<u32, u8>,
    selector: select::Selector,
    worklist: VecDeque<GateId>,
    gates: Vec<RoutedGate>,
    spans: Vec<IterationSpan>,
    rng: ChaCha8Rng,
    idle: usize,
    best_spread: u64,
    forced_steps: usize,
    done: bool,
}

impl<'a, T: Scalar> Router<'a, T> {
    pub fn new(
        circuit: &'a Circuit,
        topo: &'a Topology<T>,
        initial: Placement,
        cfg: RouterConfig<T>,
    ) -> Result<Self, RouteError> {
        cfg.validate()?;
        let (n, m) = (circuit.num_qubits() as usize, topo.num_qubits());
        if n > m {
            return Err(RouteError::TooManyQubits { virtual_count: n, physical_count: m });
        }
        if initial.num_virtual() != n || initial.num_physical() != m {
            return Err(RouteError::PlacementShape {
                placed: initial.num_virtual(),
                physical: initial.num_physical(),
                expected_virtual: n,
                expected_physical: m,
            });
        }
        let dag = OpDag::build(circuit);
        let worklist = dag.ready().iter().copied().collect();
        Ok(Router {
            circuit,
            topo,
            scaling: Scaling::new(topo, &cfg),
            field: ForceField::new(topo.num_edges()),
            layers: Vec::new(),
            hits: HashMap::new(),
            selector: select::Selector::new(m, n),
            worklist,
            gates: Vec::with_capacity(circuit.len()),
            spans: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            idle: 0,
            best_spread: u64::MAX,
            forced_steps: 0,
            done: false,
            dag,
            placement: initial.clone(),
            initial,
            cfg,
        })
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn dag(&self) -> &OpDag<'a> {
        &self.dag
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn iterations(&self) -> usize {
        self.spans.len()
    }

    /// Iterations in which the router moved one operand of the oldest front
    /// gate along a shortest path instead of selecting by coefficient.
    pub fn forced_steps(&self) -> usize {
        self.forced_steps
    }

    fn executable(&self, g: GateId) -> bool {
        match self.circuit.gate(g).pair() {
            None => true,
            Some((a, b)) => self.topo.are_adjacent(self.placement.phys(a), self.placement.phys(b)),
        }
    }

    fn emit(&mut self, g: GateId) {
        let gate = self.circuit.gate(g);
        let q = gate.qubits();
        let a = self.placement.phys(q[0]);
        let b = q.get(1).map_or(a, |&v| self.placement.phys(v));
        self.gates.push(RoutedGate::original(g, gate.kind(), [a, b]));
    }

    /// Executes ready gates until none of the remaining ready gates is
    /// executable under the current placement.
    fn drain(&mut self) {
        while let Some(g) = self.worklist.pop_front() {
            if !self.dag.is_ready(g) || !self.executable(g) {
                continue;
            }
            self.emit(g);
            let unlocked = self.dag.remove(g).expect("gate checked ready");
            self.worklist.extend(unlocked.into_iter().flatten());
        }
    }

    /// Sum of coordinate distances between the operands of ready two-qubit
    /// gates; a new minimum counts as progress for stall detection.
    fn front_spread(&self) -> u64 {
        let mut total = 0u64;
        for &g in self.dag.ready() {
            if let Some((a, b)) = self.circuit.gate(g).pair() {
                let (ca, cb) = (self.topo.coords(self.placement.phys(a)), self.topo.coords(self.placement.phys(b)));
                total += (ca[0].abs_diff(cb[0]) + ca[1].abs_diff(cb[1])) as u64;
            }
        }
        total
    }

    fn effective_rho(&self) -> f64 {
        if self.idle < self.cfg.stall_window {
            return self.cfg.perturb_rho;
        }
        let base = if self.cfg.perturb_rho > 0.0 { self.cfg.perturb_rho } else { STALL_RHO_FLOOR };
        let level = (self.idle / self.cfg.stall_window).min(16) as i32;
        (base * 2f64.powi(level)).min(STALL_RHO_CAP)
    }

    /// Shortest-path step for the oldest ready two-qubit gate.
    fn forced_swap(&self) -> Option<EdgeId> {
        let g = self.dag.ready().iter().copied().find(|&g| self.circuit.gate(g).is_two_qubit())?;
        let (a, b) = self.circuit.gate(g).pair()?;
        let (pa, pb) = (self.placement.phys(a), self.placement.phys(b));
        let dist = self.topo.bfs_distances(pb);
        self.topo
            .neighbors(pa)
            .filter_map(|nb| dist[nb.qubit.index()].map(|d| (d, nb.edge)))
            .min()
            .map(|(_, e)| e)
    }

    fn apply_swap(&mut self, e: EdgeId) {
        let edge = *self.topo.edge(e);
        self.placement.swap_physical(edge.a, edge.b);
        self.gates.push(RoutedGate::swap(edge.a, edge.b));
        for p in [edge.a, edge.b] {
            if let Some(h) = self.placement.virt(p).and_then(|v| self.dag.head(v)) {
                if self.dag.is_ready(h) {
                    self.worklist.push_back(h);
                }
            }
        }
    }

    /// Runs one iteration. Returns `None` once the DAG is empty.
    pub fn step(&mut self) -> Result<Option<StepView<'_>>, RouteError> {
        if self.done {
            return Ok(None);
        }
        if self.spans.len() >= self.cfg.max_iterations {
            return Err(RouteError::NoConvergence {
                iterations: self.spans.len(),
                remaining: self.dag.len(),
                partial: Box::new(self.snapshot()),
            });
        }
        let start = self.spans.last().map_or(0, |s| s.swaps_end);
        self.drain();
        let executed_end = self.gates.len();

        if self.dag.is_empty() {
            self.done = true;
        } else {
            let spread = self.front_spread();
            if executed_end > start || spread < self.best_spread {
                self.idle = 0;
                self.best_spread = spread;
            } else {
                self.idle += 1;
            }
            let mut swaps = Vec::new();
            if self.idle < FORCED_AFTER_WINDOWS * self.cfg.stall_window {
                let rho = self.effective_rho();
                self.dag.front_layers_into(self.cfg.lookahead, &mut self.layers, &mut self.hits);
                accumulate_layers(&mut self.field, &self.layers, self.circuit, &self.placement, self.topo, &self.scaling);
                self.selector.clear_partners();
                if self.cfg.partner_check {
                    for &g in self.dag.ready() {
                        if let Some((a, b)) = self.circuit.gate(g).pair() {
                            self.selector.add_partners(a, b);
                        }
                    }
                }
                swaps = self.selector.select(&self.field, self.topo, &self.placement, self.cfg.penalty, rho, &mut self.rng);
            }
            if swaps.is_empty() {
                if let Some(e) = self.forced_swap() {
                    self.forced_steps += 1;
                    swaps.push(e);
                }
            }
            for e in swaps {
                self.apply_swap(e);
            }
        }
        let swaps_end = self.gates.len();
        self.spans.push(IterationSpan { executed_end, swaps_end });
        Ok(Some(StepView {
            index: self.spans.len() - 1,
            executed: &self.gates[start..executed_end],
            swaps: &self.gates[executed_end..swaps_end],
            placement: &self.placement,
        }))
    }

    fn snapshot(&self) -> RoutedCircuit {
        RoutedCircuit {
            num_physical: self.topo.num_qubits(),
            gates: self.gates.clone(),
            initial: self.initial.clone(),
            final_placement: self.placement.clone(),
            iterations: self.spans.clone(),
        }
    }

    /// Steps until the DAG is empty.
    pub fn run(mut self) -> Result<RoutedCircuit, RouteError> {
        while self.step()?.is_some() {}
        Ok(RoutedCircuit {
            num_physical: self.topo.num_qubits(),
            gates: self.gates,
            initial: self.initial,
            final_placement: self.placement,
            iterations: self.spans,
        })
    }
}

/// Routes `circuit` onto `topo` starting from `initial`.
pub fn route<T: Scalar>(
    circuit: &Circuit,
    topo: &Topology<T>,
    initial: Placement,
    cfg: &RouterConfig<T>,
) -> Result<RoutedCircuit, RouteError> {
    Router::new(circuit, topo, initial, cfg.clone())?.run()
}

/// Uniformly random placement of `n` virtual qubits onto `topo`.
pub fn random_placement<T: Scalar>(n: usize, topo: &Topology<T>, seed: u64) -> Result<Placement, PlacementError> {
    Placement::random(n, topo.num_qubits(), seed)
}

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

//! Attraction forces and per-edge SWAP coefficients.

use serde::{Deserialize, Serialize};

use super::{Placement, RouterConfig};
use crate::circuit::{Circuit, GateId, VirtualQubit};
use crate::dag::OpDag;
use crate::scalar::Scalar;
use crate::topology::{Coord, EdgeId, PhysicalQubit, Topology};

/// Decay applied to interactions by DAG layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `w(l) = 2^-l`.
    Halving,
    /// `w(l) = d^-l` with `d` the topology diameter.
    #[default]
    Diameter,
}

impl std::str::FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "halving" => Ok(WeightMode::Halving),
            "diameter" => Ok(WeightMode::Diameter),
            other => Err(format!("unknown weight mode `{other}` (expected halving or diameter)")),
        }
    }
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightMode::Halving => "halving",
            WeightMode::Diameter => "diameter",
        })
    }
}

pub fn layer_weight<T: Scalar>(l: usize, diameter: u32, mode: WeightMode) -> T {
    let base = match mode {
        WeightMode::Halving => T::of(2.0),
        WeightMode::Diameter => T::of(f64::from(diameter)),
    };
    let l = i32::try_from(l).unwrap_or(i32::MAX);
    T::one() / base.powi(l)
}

#[inline]
fn sub(a: Coord, b: Coord) -> Coord {
    [a[0] - b[0], a[1] - b[1]]
}

/// Forces pulling the two operands of a gate towards each other: the first
/// points from `a`'s position to `b`'s, the second is its negation.
pub fn attraction_force<T: Scalar>(
    topo: &Topology<T>,
    placement: &Placement,
    a: VirtualQubit,
    b: VirtualQubit,
) -> (Coord, Coord) {
    physical_force(topo, placement.phys(a), placement.phys(b))
}

#[inline]
fn physical_force<T: Scalar>(topo: &Topology<T>, pa: PhysicalQubit, pb: PhysicalQubit) -> (Coord, Coord) {
    let (ca, cb) = (topo.coords(pa), topo.coords(pb));
    (sub(cb, ca), sub(ca, cb))
}

/// Accumulated SWAP coefficient per edge. Only edges that received at least
/// one contribution are candidates for selection.
#[derive(Clone, Debug)]
pub struct ForceField<T> {
    coef: Vec<T>,
    hit: Vec<bool>,
    touched: Vec<EdgeId>,
    /// Exact integer sums on the integer path; zero between accumulations.
    units: Vec<i128>,
}

impl<T: Scalar> ForceField<T> {
    pub fn new(num_edges: usize) -> Self {
        ForceField { coef: vec![T::zero(); num_edges], hit: vec![false; num_edges], touched: Vec::new(), units: vec![0; num_edges] }
    }

    pub fn clear(&mut self) {
        for e in self.touched.drain(..) {
            self.coef[e.index()] = T::zero();
            self.hit[e.index()] = false;
        }
    }

    #[inline]
    pub fn add(&mut self, e: EdgeId, v: T) {
        let i = e.index();
        if !self.hit[i] {
            self.hit[i] = true;
            self.touched.push(e);
        }
        self.coef[i] = self.coef[i] + v;
    }

    #[inline]
    fn add_units(&mut self, e: EdgeId, v: i128) {
        let i = e.index();
        if !self.hit[i] {
            self.hit[i] = true;
            self.touched.push(e);
        }
        self.units[i] += v;
    }

    #[inline]
    pub fn get(&self, e: EdgeId) -> T {
        self.coef[e.index()]
    }

    /// Edges with a contribution, in first-touch order.
    pub fn touched(&self) -> &[EdgeId] {
        &self.touched
    }

    pub fn is_touched(&self, e: EdgeId) -> bool {
        self.hit[e.index()]
    }

    pub fn num_edges(&self) -> usize {
        self.coef.len()
    }
}

/// Largest `base^k` kept on the integer path.
const MAX_UNIT_WEIGHT: i128 = 1 << 64;

/// Per-route constants.
///
/// Every weight is `w(l) = base^-l`, so `sum_l w(l) S_l = w(k) sum_l base^(k-l) S_l`
/// with integer `S_l`. The integer path sums `base^(k-l) S_l` exactly and
/// multiplies once by `w(k) F_e^r`. Equal coefficients are then exactly equal
/// and a uniform `F^r` cannot reorder edges. When `base^k` is too large the
/// weights stay in the scalar type.
#[derive(Clone, Debug)]
pub(crate) struct Scaling<T> {
    pub weights: Vec<T>,
    unit_weights: Option<Vec<i128>>,
    /// `w(k) F_e^r` on the integer path, `F_e^r` otherwise.
    edge_scale: Vec<T>,
}

impl<T: Scalar> Scaling<T> {
    pub fn new(topo: &Topology<T>, cfg: &RouterConfig<T>) -> Self {
        let k = cfg.lookahead;
        let weights: Vec<T> = (0..=k).map(|l| layer_weight(l, topo.diameter(), cfg.weight_mode)).collect();
        let base: i128 = match cfg.weight_mode {
            WeightMode::Halving => 2,
            WeightMode::Diameter => i128::from(topo.diameter()),
        };
        let unit_weights = u32::try_from(k)
            .ok()
            .and_then(|k| base.checked_pow(k))
            .filter(|&top| base >= 1 && top <= MAX_UNIT_WEIGHT)
            .map(|_| (0..=k).map(|l| base.pow((k - l) as u32)).collect::<Vec<_>>());
        let common = if unit_weights.is_some() { weights[k] } else { T::one() };
        let edge_scale = topo.edges().iter().map(|e| common * e.fidelity.powf(cfg.fidelity_exponent)).collect();
        Scaling { weights, unit_weights, edge_scale }
    }
}

#[inline]
fn push_endpoint<T: Scalar>(
    field: &mut ForceField<T>,
    topo: &Topology<T>,
    at: PhysicalQubit,
    force: Coord,
    weight: T,
) {
    for nb in topo.neighbors(at) {
        let dot = force[0] * nb.vector[0] + force[1] * nb.vector[1];
        let dot = T::from_i32(dot).expect("coordinate products fit the scalar type");
        field.add(nb.edge, dot * weight);
    }
}

#[inline]
fn push_endpoint_units<T: Scalar>(field: &mut ForceField<T>, topo: &Topology<T>, at: PhysicalQubit, force: Coord, weight: i128) {
    for nb in topo.neighbors(at) {
        let dot = force[0] * nb.vector[0] + force[1] * nb.vector[1];
        field.add_units(nb.edge, i128::from(dot) * weight);
    }
}

/// Replaces the field contents. The per-edge factor is applied once after
/// summation; see [`Scaling`].
pub(crate) fn accumulate_layers<T: Scalar>(
    field: &mut ForceField<T>,
    layers: &[Vec<GateId>],
    circuit: &Circuit,
    placement: &Placement,
    topo: &Topology<T>,
    scaling: &Scaling<T>,
) {
    field.clear();
    for (l, gates) in layers.iter().enumerate() {
        for &g in gates {
            let Some((a, b)) = circuit.gate(g).pair() else { continue };
            let (pa, pb) = (placement.phys(a), placement.phys(b));
            let (fa, fb) = physical_force(topo, pa, pb);
            match &scaling.unit_weights {
                Some(units) => {
                    push_endpoint_units(field, topo, pa, fa, units[l]);
                    push_endpoint_units(field, topo, pb, fb, units[l]);
                }
                None => {
                    push_endpoint(field, topo, pa, fa, scaling.weights[l]);
                    push_endpoint(field, topo, pb, fb, scaling.weights[l]);
                }
            }
        }
    }
    for i in 0..field.touched.len() {
        let e = field.touched[i].index();
        let sum = if scaling.unit_weights.is_some() {
            let u = std::mem::take(&mut field.units[e]);
            T::from_i128(u).unwrap_or_else(|| T::of(u as f64))
        } else {
            field.coef[e]
        };
        field.coef[e] = sum * scaling.edge_scale[e];
    }
}

/// SWAP coefficients for the current DAG front and placement: every
/// two-qubit gate in layers `0..=k` adds `f . e * w(l) * F_e^r` to each edge
/// `e` incident to either operand.
pub fn accumulate_coefficients<T: Scalar>(
    dag: &OpDag<'_>,
    placement: &Placement,
    topo: &Topology<T>,
    cfg: &RouterConfig<T>,
) -> ForceField<T> {
    let scaling = Scaling::new(topo, cfg);
    let layers = dag.front_layers(cfg.lookahead);
    let mut field = ForceField::new(topo.num_edges());
    accumulate_layers(&mut field, &layers, dag.circuit(), placement, topo, &scaling);
    field
}

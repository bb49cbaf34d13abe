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

use std::cmp::Ordering;

use rand::Rng;

use super::{ForceField, Placement};
use crate::scalar::Scalar;
use crate::circuit::VirtualQubit;
use crate::topology::{EdgeId, PhysicalQubit, Topology};

/// Picks a conflict-free set of SWAP edges from a coefficient field.
///
/// Touched edges whose coefficient is at least `threshold` are ordered by
/// descending coefficient (ties by edge index), then each adjacent pair of
/// the ordered list is exchanged with probability `rho` in one left-to-right
/// pass. The list is scanned greedily: an edge is accepted when neither
/// endpoint belongs to an already accepted edge and at least one endpoint
/// holds a virtual qubit.
pub fn select_swaps<T: Scalar, R: Rng + ?Sized>(
    field: &ForceField<T>,
    topo: &Topology<T>,
    placement: &Placement,
    threshold: T,
    rho: f64,
    rng: &mut R,
) -> Vec<EdgeId> {
    Selector::new(topo.num_qubits(), placement.num_virtual()).select(field, topo, placement, threshold, rho, rng)
}

/// Reusable scratch for SWAP selection with an optional partner check.
///
/// With partners registered, a candidate that moves a virtual qubit whose
/// partner was already moved in this selection is accepted only if it brings
/// the two strictly closer at their updated positions.
#[derive(Clone, Debug)]
pub(crate) struct Selector {
    used: Vec<bool>,
    partner: Vec<u32>,
    registered: Vec<u32>,
    moved_to: Vec<u32>,
    moved: Vec<u32>,
    order: Vec<(f64, EdgeId)>,
}

const NONE: u32 = u32::MAX;

impl Selector {
    pub(crate) fn new(num_physical: usize, num_virtual: usize) -> Self {
        Selector {
            used: vec![false; num_physical],
            partner: vec![NONE; num_virtual],
            registered: Vec::new(),
            moved_to: vec![NONE; num_virtual],
            moved: Vec::new(),
            order: Vec::new(),
        }
    }

    pub(crate) fn clear_partners(&mut self) {
        for &v in &self.registered {
            self.partner[v as usize] = NONE;
        }
        self.registered.clear();
    }

    pub(crate) fn add_partners(&mut self, a: VirtualQubit, b: VirtualQubit) {
        self.partner[a.index()] = b.0;
        self.partner[b.index()] = a.0;
        self.registered.extend([a.0, b.0]);
    }

    fn stale_move<T: Scalar>(&self, topo: &Topology<T>, v: VirtualQubit, from: PhysicalQubit, to: PhysicalQubit) -> bool {
        let u = self.partner[v.index()];
        if u == NONE || self.moved_to[u as usize] == NONE {
            return false;
        }
        let target = topo.coords(PhysicalQubit(self.moved_to[u as usize]));
        let dist = |p: PhysicalQubit| {
            let c = topo.coords(p);
            c[0].abs_diff(target[0]) + c[1].abs_diff(target[1])
        };
        dist(to) >= dist(from)
    }

    pub(crate) fn select<T: Scalar, R: Rng + ?Sized>(
        &mut self,
        field: &ForceField<T>,
        topo: &Topology<T>,
        placement: &Placement,
        threshold: T,
        rho: f64,
        rng: &mut R,
    ) -> Vec<EdgeId> {
        let mut order = std::mem::take(&mut self.order);
        order.clear();
        order.extend(
            field
                .touched()
                .iter()
                .map(|&e| (field.get(e), e))
                .filter(|(c, _)| *c >= threshold)
                .map(|(c, e)| (c.to_f64_lossy(), e)),
        );
        order.sort_unstable_by(|(ca, ea), (cb, eb)| cb.partial_cmp(ca).unwrap_or(Ordering::Equal).then(ea.cmp(eb)));

        if rho > 0.0 && order.len() > 1 {
            for i in 0..order.len() - 1 {
                if rng.gen_bool(rho) {
                    order.swap(i, i + 1);
                }
            }
        }

        let mut accepted = Vec::new();
        for &(_, e) in &order {
            let edge = topo.edge(e);
            let (a, b) = (edge.a, edge.b);
            if self.used[a.index()] || self.used[b.index()] {
                continue;
            }
            let (va, vb) = (placement.virt(a), placement.virt(b));
            if va.is_none() && vb.is_none() {
                continue;
            }
            if va.is_some_and(|v| self.stale_move(topo, v, a, b)) || vb.is_some_and(|v| self.stale_move(topo, v, b, a)) {
                continue;
            }
            self.used[a.index()] = true;
            self.used[b.index()] = true;
            for (v, to) in [(va, b), (vb, a)] {
                if let Some(v) = v {
                    self.moved_to[v.index()] = to.0;
                    self.moved.push(v.0);
                }
            }
            accepted.push(e);
        }
        for &e in &accepted {
            let edge = topo.edge(e);
            self.used[edge.a.index()] = false;
            self.used[edge.b.index()] = false;
        }
        for &v in &self.moved {
            self.moved_to[v as usize] = NONE;
        }
        self.moved.clear();
        self.order = order;
        accepted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::PhysicalQubit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Line Q0..Q4 fully occupied; edge i joins Qi and Qi+1.
    fn setup(coefs: &[(u32, f64)]) -> (Topology, Placement, ForceField<f64>) {
        let t = Topology::grid(1, 5, 1.0).unwrap();
        let p = Placement::identity(5, 5).unwrap();
        let mut field = ForceField::new(t.num_edges());
        for &(e, c) in coefs {
            field.add(EdgeId(e), c);
        }
        (t, p, field)
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn disjoint_edges_both_accepted_in_order() {
        let (t, p, f) = setup(&[(2, 3.0), (0, 5.0)]);
        assert_eq!(select_swaps(&f, &t, &p, 0.0, 0.0, &mut rng()), vec![EdgeId(0), EdgeId(2)]);
    }

    #[test]
    fn shared_qubit_blocks_second() {
        let (t, p, f) = setup(&[(0, 5.0), (1, 3.0)]);
        assert_eq!(select_swaps(&f, &t, &p, 0.0, 0.0, &mut rng()), vec![EdgeId(0)]);
    }

    #[test]
    fn threshold_filters() {
        let (t, p, f) = setup(&[(0, 0.5)]);
        assert!(select_swaps(&f, &t, &p, 1.0, 0.0, &mut rng()).is_empty());
        assert_eq!(select_swaps(&f, &t, &p, 0.5, 0.0, &mut rng()), vec![EdgeId(0)]);
    }

    #[test]
    fn ties_prefer_smaller_index() {
        let (t, p, f) = setup(&[(2, 1.0), (1, 1.0)]);
        assert_eq!(select_swaps(&f, &t, &p, 0.0, 0.0, &mut rng()), vec![EdgeId(1)]);
    }

    #[test]
    fn untouched_edges_are_not_candidates() {
        let (t, p, f) = setup(&[(3, -1.0)]);
        assert!(select_swaps(&f, &t, &p, 0.0, 0.0, &mut rng()).is_empty());
        assert_eq!(select_swaps(&f, &t, &p, f64::NEG_INFINITY, 0.0, &mut rng()), vec![EdgeId(3)]);
    }

    #[test]
    fn empty_pairs_are_skipped() {
        let t = Topology::grid(1, 4, 1.0).unwrap();
        // q0 on Q0; Q1..Q3 empty.
        let p = Placement::new(vec![PhysicalQubit(0)], 4).unwrap();
        let mut f = ForceField::new(t.num_edges());
        f.add(EdgeId(1), 9.0);
        f.add(EdgeId(0), 1.0);
        assert_eq!(select_swaps(&f, &t, &p, 0.0, 0.0, &mut rng()), vec![EdgeId(0)]);
    }

    #[test]
    fn perturbation_can_reorder() {
        let (t, p, f) = setup(&[(0, 5.0), (1, 3.0)]);
        let mut seen_second = false;
        let mut r = rng();
        for _ in 0..64 {
            let s = select_swaps(&f, &t, &p, 0.0, 0.5, &mut r);
            assert_eq!(s.len(), 1);
            seen_second |= s[0] == EdgeId(1);
        }
        assert!(seen_second);
    }
}

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

use forcemap::circuit::{gen_qft, gen_random, GateKind, VirtualQubit};
use forcemap::metrics::{
    circuit_depth, depth, esp, figure_of_merit, inter_core_uses, normalize_series, FomInput, MetricsError, SwapCostMode,
};
use forcemap::router::{route, IterationSpan, Placement, RoutedCircuit, RoutedGate, RouterConfig};
use forcemap::topology::{PhysicalQubit, Topology};
use forcemap::{Circuit, GateId};
use proptest::prelude::*;

fn pq(i: u32) -> PhysicalQubit {
    PhysicalQubit(i)
}

fn hand_built(m: usize, gates: Vec<RoutedGate>) -> RoutedCircuit {
    let n = gates.len();
    let p = Placement::identity(m, m).unwrap();
    RoutedCircuit::from_parts(m, gates, p.clone(), p, vec![IterationSpan { executed_end: n, swaps_end: n }])
}

#[test]
fn depth_examples() {
    let h = |i, q| RoutedGate::original(GateId(i), GateKind::H, [pq(q), pq(q)]);
    let cx = |i, a, b| RoutedGate::original(GateId(i), GateKind::CX, [pq(a), pq(b)]);
    assert_eq!(depth(&hand_built(2, vec![h(0, 0), h(1, 1)])), 1);
    assert_eq!(depth(&hand_built(3, vec![cx(0, 0, 1), cx(1, 1, 2)])), 2);
    // Disjoint SWAPs after a full layer add exactly one layer.
    let rc = hand_built(4, vec![cx(0, 0, 1), cx(1, 2, 3), RoutedGate::swap(pq(0), pq(1)), RoutedGate::swap(pq(2), pq(3))]);
    assert_eq!(depth(&rc), 2);
}

#[test]
fn esp_examples() {
    let t = Topology::grid(1, 4, 0.99).unwrap();
    let cx = |i, a, b| RoutedGate::original(GateId(i), GateKind::CX, [pq(a), pq(b)]);
    let rc = hand_built(4, vec![cx(0, 0, 1), cx(1, 1, 2), cx(2, 2, 3)]);
    assert!((esp(&rc, &t, SwapCostMode::SingleFactor) - 0.970299).abs() < 1e-12);
    let ones = hand_built(4, vec![RoutedGate::original(GateId(0), GateKind::T, [pq(2), pq(2)])]);
    assert_eq!(esp(&ones, &t, SwapCostMode::SingleFactor), 1.0);
    let perfect = Topology::grid(1, 4, 1.0).unwrap();
    let with_swap = hand_built(4, vec![cx(0, 0, 1), RoutedGate::swap(pq(1), pq(2))]);
    for mode in [SwapCostMode::SingleFactor, SwapCostMode::ThreeCx] {
        assert_eq!(esp(&with_swap, &perfect, mode), 1.0);
    }
    let swap_only = hand_built(4, vec![RoutedGate::swap(pq(1), pq(2))]);
    assert!((esp(&swap_only, &t, SwapCostMode::ThreeCx) - 0.970299).abs() < 1e-12);
}

#[test]
fn inter_core_examples() {
    // Two 1x2 cores side by side: the only inter-core link is (1, 2).
    let t = Topology::multicore(1, 2, 2, 1, 1.0, 0.98).unwrap();
    let cx = |i, a, b| RoutedGate::original(GateId(i), GateKind::CX, [pq(a), pq(b)]);
    assert_eq!(inter_core_uses(&hand_built(4, vec![cx(0, 0, 1), cx(1, 2, 3)]), &t), Ok(0));
    assert_eq!(inter_core_uses(&hand_built(4, vec![cx(0, 1, 2)]), &t), Ok(1));
    let plain = Topology::grid(1, 4, 1.0).unwrap();
    assert_eq!(inter_core_uses(&hand_built(4, vec![]), &plain), Err(MetricsError::NoCores));

    // A gate across the boundary, routed from every placement.
    let mut c = Circuit::new(2);
    c.push(GateKind::CX, &[VirtualQubit(0), VirtualQubit(1)], &[]).unwrap();
    for a in 0..2u32 {
        for b in 2..4u32 {
            let p = Placement::new(vec![pq(a), pq(b)], 4).unwrap();
            let rc = route(&c, &t, p, &RouterConfig::default()).unwrap();
            assert!(inter_core_uses(&rc, &t).unwrap() >= 1);
        }
    }
}

#[test]
fn fom_examples() {
    let row = |k, time, depth, swaps| FomInput { k, p: 0.0, time, depth, swaps };
    let single = figure_of_merit(&[row(0, 5.0, 5.0, 5.0)]).unwrap();
    assert_eq!(single.rows[0].fom, 1.0);
    let t = figure_of_merit(&[row(0, 1.0, 10.0, 4.0), row(1, 2.0, 12.0, 5.0), row(2, 1.5, 11.0, 4.5)]).unwrap();
    assert_eq!(t.best, 0);
    for r in &t.rows {
        assert!(r.normalized.iter().all(|v| (1.0..=2.0).contains(v)));
    }
    assert!(t.rows[1].fom < t.rows[0].fom);
}

#[test]
fn normalize_examples() {
    assert_eq!(normalize_series(&[2.0, 4.0]), vec![0.0, 1.0]);
    assert_eq!(normalize_series(&[5.0]), vec![0.5]);
}

proptest! {
    #[test]
    fn routed_depth_at_least_original(seed in any::<u64>(), n in 2u32..9, d in 1u32..10) {
        let t = Topology::grid(3, 3, 1.0).unwrap();
        let c = gen_random(n, d, 0.6, seed);
        let rc = route(&c, &t, Placement::random(n as usize, 9, seed).unwrap(), &RouterConfig { seed, ..RouterConfig::default() }).unwrap();
        prop_assert!(depth(&rc) >= circuit_depth(&c));
        prop_assert_eq!(rc.swap_count(), rc.gates().iter().filter(|g| g.is_swap()).count());
    }

    #[test]
    fn esp_non_increasing_along_prefixes(seed in any::<u64>()) {
        let t = Topology::grid(3, 3, 1.0).unwrap().with_random_fidelities(0.9, 0.999, seed).unwrap();
        let c = gen_qft(7);
        let rc = route(&c, &t, Placement::random(7, 9, seed).unwrap(), &RouterConfig::default()).unwrap();
        for mode in [SwapCostMode::SingleFactor, SwapCostMode::ThreeCx] {
            let mut prev = 1.0;
            for end in 0..=rc.gates().len() {
                let prefix = hand_built(9, rc.gates()[..end].to_vec());
                let e = esp(&prefix, &t, mode);
                prop_assert!(e <= prev);
                prop_assert!(e > 0.0 && e <= 1.0);
                prev = e;
            }
        }
    }

    #[test]
    fn inter_core_zero_iff_no_boundary_gate(seed in any::<u64>(), n in 2u32..8) {
        let t = Topology::multicore(2, 2, 2, 1, 1.0, 0.98).unwrap();
        let c = gen_random(n, 6, 0.7, seed);
        let rc = route(&c, &t, Placement::random(n as usize, 8, seed).unwrap(), &RouterConfig::default()).unwrap();
        let uses = inter_core_uses(&rc, &t).unwrap();
        let crosses = rc.gates().iter().filter_map(|g| g.pair()).any(|(a, b)| {
            t.is_inter_core(t.edge_between(a, b).unwrap()).unwrap()
        });
        prop_assert_eq!(uses == 0, !crosses);
    }

    #[test]
    fn fom_argmax_invariant_under_affine_rescale(
        rows in prop::collection::vec((0.1f64..10.0, 1.0f64..100.0, 1.0f64..100.0), 1..12),
        col in 0usize..3, scale in 0.01f64..100.0, shift in 0.0f64..50.0,
    ) {
        let raw: Vec<FomInput> = rows.iter().enumerate().map(|(k, &(time, depth, swaps))| FomInput { k, p: 0.0, time, depth, swaps }).collect();
        let mut scaled = raw.clone();
        for r in &mut scaled {
            let v = match col { 0 => &mut r.time, 1 => &mut r.depth, _ => &mut r.swaps };
            *v = *v * scale + shift;
        }
        let (a, b) = (figure_of_merit(&raw).unwrap(), figure_of_merit(&scaled).unwrap());
        // Normalized values agree to rounding, so compare the optimum's score.
        prop_assert!((a.rows[b.best].fom - a.optimum().fom).abs() <= 1e-9 * a.optimum().fom);
        for r in &a.rows {
            prop_assert!(r.normalized.iter().all(|v| (1.0..=2.0).contains(v)));
        }
    }

    #[test]
    fn normalize_series_monotone(mut v in prop::collection::vec(-1e6f64..1e6, 2..20)) {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        prop_assume!(v.len() >= 2);
        let out = normalize_series(&v);
        prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(out[0], 0.0);
        prop_assert_eq!(*out.last().unwrap(), 1.0);
    }
}

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

use forcemap::circuit::{gen_cuccaro_adder, gen_qft, gen_random, Circuit};
use forcemap::dag::OpDag;
use forcemap::GateId;
use proptest::prelude::*;

/// Layer of each remaining gate by ASAP scan over the residual circuit.
fn rebuild_layers(c: &Circuit, alive: &[bool]) -> Vec<Option<u32>> {
    let mut last: Vec<Option<u32>> = vec![None; c.num_qubits() as usize];
    let mut out = vec![None; c.len()];
    for g in c.gates().iter().filter(|g| alive[g.id().index()]) {
        let layer = g.qubits().iter().filter_map(|q| last[q.index()]).map(|l| l + 1).max().unwrap_or(0);
        for q in g.qubits() {
            last[q.index()] = Some(layer);
        }
        out[g.id().index()] = Some(layer);
    }
    out
}

fn check_against_rebuild(dag: &OpDag<'_>, c: &Circuit, alive: &[bool], k: usize) -> Result<(), TestCaseError> {
    let expect = rebuild_layers(c, alive);
    prop_assert_eq!(dag.layers(), expect.clone());
    let front = dag.front_layers(k);
    prop_assert_eq!(front.len(), k + 1);
    for (l, layer) in front.iter().enumerate() {
        let mut want: Vec<GateId> =
            (0..c.len()).filter(|&i| expect[i] == Some(l as u32)).map(|i| GateId(i as u32)).collect();
        want.sort();
        let mut got = layer.clone();
        got.sort();
        prop_assert_eq!(got, want, "layer {}", l);
    }
    let ready: Vec<GateId> = dag.ready().iter().copied().collect();
    let zero: Vec<GateId> = (0..c.len()).filter(|&i| expect[i] == Some(0)).map(|i| GateId(i as u32)).collect();
    prop_assert_eq!(ready, zero);
    Ok(())
}

fn circuits() -> impl Strategy<Value = Circuit> {
    prop_oneof![
        (2u32..10, 1u32..25, 0.0f64..=1.0, any::<u64>()).prop_map(|(n, d, f, s)| gen_random(n, d, f, s)),
        (1u32..12).prop_map(gen_qft),
        (1u32..3).prop_map(gen_cuccaro_adder),
    ]
}

proptest! {
    #[test]
    fn layers_match_rebuild_after_removals(c in circuits(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..200), k in 0usize..5) {
        prop_assume!(c.len() <= 200);
        let mut dag = OpDag::build(&c);
        let mut alive = vec![true; c.len()];
        check_against_rebuild(&dag, &c, &alive, k)?;
        for pick in picks {
            if dag.is_empty() {
                break;
            }
            let ready: Vec<GateId> = dag.ready().iter().copied().collect();
            let g = *pick.get(&ready);
            dag.remove(g).unwrap();
            alive[g.index()] = false;
            check_against_rebuild(&dag, &c, &alive, k)?;
        }
    }

    #[test]
    fn removals_cover_every_gate_once(c in circuits(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut dag = OpDag::build(&c);
        let mut removed = vec![0u32; c.len()];
        while !dag.is_empty() {
            let ready: Vec<GateId> = dag.ready().iter().copied().collect();
            prop_assert!(!ready.is_empty());
            let g = ready[rng.gen_range(0..ready.len())];
            prop_assert!(dag.remove(g).is_ok());
            prop_assert!(dag.remove(g).is_err());
            removed[g.index()] += 1;
        }
        prop_assert!(removed.iter().all(|&r| r == 1));
    }

    #[test]
    fn removing_pending_gate_is_rejected(c in circuits()) {
        let mut dag = OpDag::build(&c);
        if let Some(g) = (0..c.len() as u32).map(GateId).find(|g| !dag.is_ready(*g)) {
            prop_assert!(dag.remove(g).is_err());
            prop_assert!(dag.contains(g));
        }
    }
}

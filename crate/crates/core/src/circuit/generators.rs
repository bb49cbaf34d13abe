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

//! Benchmark circuit generators.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, GateKind};

const RANDOM_1Q: [GateKind; 6] =
    [GateKind::H, GateKind::X, GateKind::T, GateKind::Tdg, GateKind::S, GateKind::Sdg];

/// Layered random circuit.
///
/// Each layer shuffles the qubits into `n / 2` disjoint pairs. Every pair
/// becomes a CX with probability `two_q_fraction`; otherwise its first qubit
/// receives a random single-qubit Clifford+T gate. A layer therefore always
/// holds exactly `n / 2` gates.
pub fn gen_random(n: u32, depth: u32, two_q_fraction: f64, seed: u64) -> Circuit {
    assert!(n >= 2, "random circuit needs at least 2 qubits");
    assert!(depth >= 1, "random circuit needs at least one layer");
    let fraction = two_q_fraction.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<u32> = (0..n).collect();
    let mut c = Circuit::with_capacity(n, (depth * (n / 2)) as usize);
    for _ in 0..depth {
        perm.shuffle(&mut rng);
        for pair in perm.chunks_exact(2) {
            if rng.gen_bool(fraction) {
                c.two(GateKind::CX, pair[0], pair[1]);
            } else {
                let kind = *RANDOM_1Q.choose(&mut rng).expect("non-empty");
                c.one(kind, pair[0]);
            }
        }
    }
    c
}

/// Quantum Fourier Transform without the final qubit-reversal SWAPs:
/// for each qubit `i`, an `H` followed by `CP(pi / 2^(j - i))` controlled by
/// every `j > i`.
pub fn gen_qft(n: u32) -> Circuit {
    assert!(n >= 1, "QFT needs at least one qubit");
    let total = n as usize * (n as usize + 1) / 2;
    let mut c = Circuit::with_capacity(n, total);
    for i in 0..n {
        c.one(GateKind::H, i);
        for j in (i + 1)..n {
            c.cp(PI / 2f64.powi((j - i) as i32), j, i);
        }
    }
    c
}

/// Interaction skeleton of a Quantum Volume circuit: `depth` layers, each a
/// random permutation with an opaque two-qubit block on every adjacent pair.
pub fn gen_quantum_volume(n: u32, depth: u32, seed: u64) -> Circuit {
    assert!(n >= 2, "quantum volume needs at least 2 qubits");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<u32> = (0..n).collect();
    let mut c = Circuit::with_capacity(n, (depth * (n / 2)) as usize);
    for _ in 0..depth {
        perm.shuffle(&mut rng);
        for pair in perm.chunks_exact(2) {
            c.two(GateKind::Generic2q, pair[0], pair[1]);
        }
    }
    c
}

/// Qubit layout of the ripple-carry adder: carry-in at 0, then `b_i` at
/// `1 + 2i` and `a_i` at `2 + 2i`, carry-out last.
#[derive(Clone, Copy, Debug)]
pub struct AdderLayout {
    pub bits: u32,
}

impl AdderLayout {
    pub fn carry_in(self) -> u32 {
        0
    }

    pub fn b(self, i: u32) -> u32 {
        1 + 2 * i
    }

    pub fn a(self, i: u32) -> u32 {
        2 + 2 * i
    }

    pub fn carry_out(self) -> u32 {
        2 * self.bits + 1
    }

    pub fn num_qubits(self) -> u32 {
        2 * self.bits + 2
    }
}

// Clifford+T Toffoli: 6 CX, 7 T/Tdg, 2 H.
fn toffoli(c: &mut Circuit, a: u32, b: u32, t: u32) {
    c.one(GateKind::H, t);
    c.two(GateKind::CX, b, t);
    c.one(GateKind::Tdg, t);
    c.two(GateKind::CX, a, t);
    c.one(GateKind::T, t);
    c.two(GateKind::CX, b, t);
    c.one(GateKind::Tdg, t);
    c.two(GateKind::CX, a, t);
    c.one(GateKind::T, b);
    c.one(GateKind::T, t);
    c.one(GateKind::H, t);
    c.two(GateKind::CX, a, b);
    c.one(GateKind::T, a);
    c.one(GateKind::Tdg, b);
    c.two(GateKind::CX, a, b);
}

fn maj(c: &mut Circuit, x: u32, y: u32, z: u32) {
    c.two(GateKind::CX, z, y);
    c.two(GateKind::CX, z, x);
    toffoli(c, x, y, z);
}

fn uma(c: &mut Circuit, x: u32, y: u32, z: u32) {
    toffoli(c, x, y, z);
    c.two(GateKind::CX, z, x);
    c.two(GateKind::CX, x, y);
}

/// Cuccaro ripple-carry adder computing `b <- a + b` with the carry written
/// to the carry-out qubit. See [`AdderLayout`] for qubit positions.
pub fn gen_cuccaro_adder(bits: u32) -> Circuit {
    assert!(bits >= 1, "adder needs at least one bit");
    let l = AdderLayout { bits };
    let mut c = Circuit::with_capacity(l.num_qubits(), (bits as usize) * 40 + 1);
    maj(&mut c, l.carry_in(), l.b(0), l.a(0));
    for i in 1..bits {
        maj(&mut c, l.a(i - 1), l.b(i), l.a(i));
    }
    c.two(GateKind::CX, l.a(bits - 1), l.carry_out());
    for i in (1..bits).rev() {
        uma(&mut c, l.a(i - 1), l.b(i), l.a(i));
    }
    uma(&mut c, l.carry_in(), l.b(0), l.a(0));
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::VirtualQubit;

    #[test]
    fn random_single_pair() {
        for seed in 0..20 {
            let c = gen_random(2, 1, 1.0, seed);
            assert_eq!(c.len(), 1);
            let (a, b) = c.gates()[0].pair().unwrap();
            assert_eq!(c.gates()[0].kind(), GateKind::CX);
            let mut ops = [a.0, b.0];
            ops.sort();
            assert_eq!(ops, [0, 1]);
        }
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(gen_random(16, 40, 0.5, 7), gen_random(16, 40, 0.5, 7));
        assert_ne!(gen_random(16, 40, 0.5, 7), gen_random(16, 40, 0.5, 8));
    }

    #[test]
    fn random_gate_count_bounds_over_seeds() {
        let mut two_q = 0usize;
        for seed in 0..1000 {
            let c = gen_random(16, 40, 0.5, seed);
            assert!((160..=480).contains(&c.len()), "seed {seed}: {}", c.len());
            two_q += c.num_two_qubit_gates();
        }
        // 320 slots per circuit, half of them two-qubit on average.
        let mean = two_q as f64 / 1000.0;
        assert!((mean - 160.0).abs() < 3.0, "mean two-qubit count {mean}");
    }

    #[test]
    fn random_layers_are_disjoint() {
        let n = 9;
        let c = gen_random(n, 10, 0.7, 3);
        for layer in c.gates().chunks((n / 2) as usize) {
            let mut seen = vec![false; n as usize];
            for g in layer {
                for q in g.qubits() {
                    assert!(!seen[q.index()]);
                    seen[q.index()] = true;
                }
            }
        }
    }

    #[test]
    fn qft_small_cases() {
        let c = gen_qft(1);
        assert_eq!(c.len(), 1);
        assert_eq!(c.gates()[0].kind(), GateKind::H);
        let c = gen_qft(4);
        assert_eq!(c.gates().iter().filter(|g| g.kind() == GateKind::H).count(), 4);
        assert_eq!(c.gates().iter().filter(|g| g.kind() == GateKind::CP).count(), 6);
        assert_eq!(c.len(), 10);
        assert_eq!(gen_qft(32).len(), 528);
        // CP(pi/2) between qubits 1 and 0 follows H(0).
        assert_eq!(c.gates()[1].qubits(), &[VirtualQubit(1), VirtualQubit(0)]);
        assert_eq!(c.gates()[1].params(), &[PI / 2.0]);
    }

    #[test]
    fn qft_count_formula() {
        for n in 1..=64u32 {
            assert_eq!(gen_qft(n).len() as u32, n * (n + 1) / 2);
        }
    }

    #[test]
    fn quantum_volume_counts() {
        let c = gen_quantum_volume(2, 3, 11);
        assert_eq!(c.len(), 3);
        for g in c.gates() {
            let (a, b) = g.pair().unwrap();
            assert_eq!(a.0 + b.0, 1);
        }
        let c = gen_quantum_volume(5, 4, 2);
        assert_eq!(c.num_two_qubit_gates(), 8);
        assert_eq!(c, gen_quantum_volume(5, 4, 2));
    }

    #[test]
    fn adder_sizes_and_gate_set() {
        assert_eq!(gen_cuccaro_adder(1).num_qubits(), 4);
        assert_eq!(gen_cuccaro_adder(6).num_qubits(), 14);
        let c = gen_cuccaro_adder(3);
        assert!(c.gates().iter().all(|g| g.kind().arity() <= 2));
        // 2 * bits Toffolis, each 15 gates, plus 4 * bits + 1 CX.
        assert_eq!(c.len(), 2 * 3 * 15 + 4 * 3 + 1);
    }
}

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

//! Dense statevector simulation for small circuits.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{VerificationReport, VerifyError, Violation};
use crate::circuit::{Circuit, GateKind};
use crate::router::RoutedCircuit;

pub const DEFAULT_MAX_QUBITS: usize = 10;
/// Minimum overlap accepted as equivalent is `1 - OVERLAP_TOLERANCE`.
pub const OVERLAP_TOLERANCE: f64 = 1e-9;
const HARD_LIMIT: usize = 26;

/// Amplitudes over `n` qubits; qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self, VerifyError> {
        if n > HARD_LIMIT {
            return Err(VerifyError::TooManyQubits { qubits: n, limit: HARD_LIMIT });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Probability of the basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    fn one_qubit(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn phase(&mut self, mask: usize, phase: Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= phase;
            }
        }
    }

    pub fn apply(&mut self, kind: GateKind, qubits: &[usize], params: &[f64]) -> Result<(), VerifyError> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let bit = |k: usize| 1usize << qubits[k];
        match kind {
            GateKind::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                self.one_qubit(qubits[0], [[h, h], [h, -h]]);
            }
            GateKind::X => {
                let b = bit(0);
                for i in 0..self.amps.len() {
                    if i & b == 0 {
                        self.amps.swap(i, i | b);
                    }
                }
            }
            GateKind::T => self.phase(bit(0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            GateKind::Tdg => self.phase(bit(0), Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
            GateKind::S => self.phase(bit(0), c(0.0, 1.0)),
            GateKind::Sdg => self.phase(bit(0), c(0.0, -1.0)),
            GateKind::CZ => self.phase(bit(0) | bit(1), c(-1.0, 0.0)),
            GateKind::CP => self.phase(bit(0) | bit(1), Complex64::from_polar(1.0, params[0])),
            GateKind::CX => {
                let (ctl, tgt) = (bit(0), bit(1));
                for i in 0..self.amps.len() {
                    if i & ctl != 0 && i & tgt == 0 {
                        self.amps.swap(i, i | tgt);
                    }
                }
            }
            GateKind::Swap => {
                let (a, b) = (bit(0), bit(1));
                for i in 0..self.amps.len() {
                    if i & a != 0 && i & b == 0 {
                        self.amps.swap(i, i ^ a ^ b);
                    }
                }
            }
            GateKind::Generic1q | GateKind::Generic2q => return Err(VerifyError::Unsimulable(kind)),
        }
        Ok(())
    }

    /// Runs `c` from `|0...0>`.
    pub fn simulate(c: &Circuit) -> Result<Self, VerifyError> {
        let mut sv = Statevector::zero(c.num_qubits() as usize)?;
        let mut idx = Vec::with_capacity(2);
        for g in c.gates() {
            idx.clear();
            idx.extend(g.qubits().iter().map(|q| q.index()));
            sv.apply(g.kind(), &idx, g.params())?;
        }
        Ok(sv)
    }
}

/// Simulates `original` on its virtual qubits and `rc` on the physical ones,
/// maps the routed state back through the final placement and reports
/// `|<orig|routed>|^2`. Spare physical qubits must end in `|0>`.
pub fn statevector_oracle(original: &Circuit, rc: &RoutedCircuit, max_qubits: usize) -> Result<VerificationReport, VerifyError> {
    let (n, m) = (original.num_qubits() as usize, rc.num_physical());
    if n.max(m) > max_qubits {
        return Err(VerifyError::TooManyQubits { qubits: n.max(m), limit: max_qubits });
    }
    if let Some(g) = original.gates().iter().find(|g| matches!(g.kind(), GateKind::Generic1q | GateKind::Generic2q)) {
        return Err(VerifyError::Unsimulable(g.kind()));
    }
    let psi = Statevector::simulate(original)?;
    let mut routed = Statevector::zero(m)?;
    let mut idx = Vec::with_capacity(2);
    for g in rc.gates() {
        idx.clear();
        idx.extend(g.qubits().iter().map(|p| p.index()));
        let params = match g.origin() {
            crate::router::GateOrigin::Original(id) if id.index() < original.len() => original.gate(id).params(),
            _ => &[],
        };
        if g.kind().num_params() != params.len() {
            return Err(VerifyError::Unsimulable(g.kind()));
        }
        routed.apply(g.kind(), &idx, params)?;
    }

    let fin = rc.final_placement();
    let phys: Vec<usize> = (0..n).map(|v| fin.virt_to_phys()[v].index()).collect();
    let mut inner = Complex64::new(0.0, 0.0);
    for (x, a) in psi.amps.iter().enumerate() {
        let mut y = 0usize;
        for (v, &p) in phys.iter().enumerate() {
            y |= (x >> v & 1) << p;
        }
        inner += a.conj() * routed.amps[y];
    }
    let overlap = inner.norm_sqr();
    let ok = overlap >= 1.0 - OVERLAP_TOLERANCE;
    Ok(VerificationReport {
        equivalent: Some(ok),
        first_violation: (!ok).then(|| Violation {
            gate_index: rc.gates().len(),
            reason: format!("state overlap {overlap:.12} below 1 - {OVERLAP_TOLERANCE:e}"),
        }),
        fidelity_overlap: Some(overlap),
        ..Default::default()
    })
}

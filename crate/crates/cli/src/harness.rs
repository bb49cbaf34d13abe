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

//! Seeded trials. Trial `i` uses seed `base + i`; the circuit and initial
//! placement draw from streams derived from it. Results are collected in
//! trial order, so parallel and serial runs reduce identically.

use std::time::Instant;

use forcemap::circuit::Circuit;
use forcemap::metrics::{mean_std, MetricsReport};
use forcemap::router::{route, Placement, RoutedCircuit};
use forcemap::verify::{check_all, statevector_oracle, VerificationReport, VerifyError};
use forcemap::Topology;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spec::{CircuitSource, RunSpec};
use crate::HarnessError;

pub const CIRCUIT_STREAM: u64 = 1;
pub const PLACEMENT_STREAM: u64 = 2;

/// SplitMix64 of `seed` offset by `stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(spec: &RunSpec, trial: usize) -> u64 {
    spec.seed.wrapping_add(trial as u64)
}

/// Circuit of the trial with seed `seed`.
pub fn trial_circuit(source: &CircuitSource, seed: u64) -> std::borrow::Cow<'_, Circuit> {
    source.circuit(derive_seed(seed, CIRCUIT_STREAM))
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub report: MetricsReport,
    pub verification: VerificationReport,
    /// Whether the statevector oracle ran in addition to the permutation one.
    pub simulated: bool,
    pub routed: Option<RoutedCircuit>,
}

/// Runs both oracles, the statevector one only when the register fits under
/// `sim_limit` and every gate kind is simulable.
pub fn verify_routed(
    original: &Circuit,
    rc: &RoutedCircuit,
    topo: &Topology,
    sim_limit: usize,
) -> Result<(VerificationReport, bool), VerifyError> {
    let mut report = check_all(original, rc, topo)?;
    let width = (original.num_qubits() as usize).max(rc.num_physical());
    let mut simulated = false;
    if width <= sim_limit {
        match statevector_oracle(original, rc, sim_limit) {
            Ok(sv) => {
                report = report.merge(sv);
                simulated = true;
            }
            Err(VerifyError::Unsimulable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((report, simulated))
}

#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    spec: &RunSpec,
    source: &CircuitSource,
    topo: &Topology,
    k: usize,
    p: f64,
    r: f64,
    trial: usize,
    keep_routed: bool,
) -> Result<TrialResult, HarnessError> {
    let seed = trial_seed(spec, trial);
    let circuit = trial_circuit(source, seed);
    let initial = Placement::random(circuit.num_qubits() as usize, topo.num_qubits(), derive_seed(seed, PLACEMENT_STREAM))
        .map_err(|e| HarnessError::Usage(e.to_string()))?;
    let cfg = spec.config(k, p, r, seed);
    let mut times = Vec::with_capacity(spec.timing_repeats);
    let mut routed = None;
    for _ in 0..spec.timing_repeats.max(1) {
        let start = Instant::now();
        let rc = route(&circuit, topo, initial.clone(), &cfg).map_err(|source| HarnessError::Route { trial, seed, source })?;
        times.push(start.elapsed().as_secs_f64());
        routed.get_or_insert(rc);
    }
    let rc = routed.expect("at least one route");
    times.sort_by(f64::total_cmp);
    let compile_time = times[times.len() / 2];

    let fail = |reason: String| HarnessError::Verification { trial, seed, reason };
    let (verification, simulated) = verify_routed(&circuit, &rc, topo, spec.sim_limit).map_err(|e| fail(e.to_string()))?;
    if !verification.passed() {
        let reason = verification.first_violation.as_ref().map_or_else(|| "oracle mismatch".to_string(), |v| v.to_string());
        return Err(fail(reason));
    }
    let report = MetricsReport::compute(trial, &circuit, &rc, topo, &cfg, spec.swap_cost_mode, compile_time);
    Ok(TrialResult { report, verification, simulated, routed: keep_routed.then_some(rc) })
}

/// All trials of one `(k, p, r)` point, in trial order. The error of the
/// lowest failing trial is returned.
pub fn run_trials(
    spec: &RunSpec,
    source: &CircuitSource,
    topo: &Topology,
    k: usize,
    p: f64,
    r: f64,
    keep_first: bool,
) -> Result<Vec<TrialResult>, HarnessError> {
    let results: Vec<Result<TrialResult, HarnessError>> = (0..spec.trials)
        .into_par_iter()
        .map(|i| run_trial(spec, source, topo, k, p, r, i, keep_first && i == 0))
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for res in results {
        match res {
            Ok(t) => out.push(t),
            Err(e) => {
                log::error!("{e}");
                return Err(e);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Summary { mean, std }
    }
}

/// Mean and sample standard deviation of each per-trial metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub gates_in: Summary,
    pub gates_out: Summary,
    pub swaps: Summary,
    pub depth: Summary,
    pub esp: Summary,
    pub inter_core_uses: Option<Summary>,
    pub iterations: Summary,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub compile_time: Option<Summary>,
}

impl Aggregate {
    pub fn of(reports: &[MetricsReport], timing: bool) -> Self {
        let col = |f: fn(&MetricsReport) -> f64| Summary::of(&reports.iter().map(f).collect::<Vec<_>>());
        let inter: Option<Vec<f64>> = reports.iter().map(|r| r.inter_core_uses.map(|u| u as f64)).collect();
        Aggregate {
            trials: reports.len(),
            gates_in: col(|r| r.gates_in as f64),
            gates_out: col(|r| r.gates_out as f64),
            swaps: col(|r| r.swaps_added as f64),
            depth: col(|r| r.depth as f64),
            esp: col(|r| r.esp),
            inter_core_uses: inter.map(|v| Summary::of(&v)),
            iterations: col(|r| r.iterations as f64),
            compile_time: timing.then(|| col(|r| r.compile_time)),
        }
    }
}

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

//! Quality metrics of routed circuits and the design-space figure of merit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::router::{RoutedCircuit, RouterConfig, WeightMode};
use crate::scalar::Scalar;
use crate::topology::Topology;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("topology has no core labels")]
    NoCores,
    #[error("figure of merit needs at least one row")]
    Empty,
    #[error("row {row}: {metric} must be positive, got {value}")]
    NonPositive { row: usize, metric: &'static str, value: f64 },
}

/// How a SWAP enters the success-probability product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapCostMode {
    /// One factor of the edge fidelity.
    #[default]
    SingleFactor,
    /// Three factors, one per CX of the decomposition.
    ThreeCx,
}

impl FromStr for SwapCostMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "single-factor" | "single" => Ok(SwapCostMode::SingleFactor),
            "three-cx" | "3cx" => Ok(SwapCostMode::ThreeCx),
            _ => Err(format!("unknown swap cost mode '{s}' (expected single-factor or three-cx)")),
        }
    }
}

impl fmt::Display for SwapCostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwapCostMode::SingleFactor => "single-factor",
            SwapCostMode::ThreeCx => "three-cx",
        })
    }
}

/// ASAP layering with unit gate durations.
#[derive(Clone, Debug)]
pub struct AsapSchedule {
    level: Vec<usize>,
    depth: usize,
}

impl AsapSchedule {
    pub fn new(num_qubits: usize) -> Self {
        AsapSchedule { level: vec![0; num_qubits], depth: 0 }
    }

    /// Schedules a gate on `qubits` and returns its 1-based layer.
    pub fn push<I: IntoIterator<Item = usize> + Clone>(&mut self, qubits: I) -> usize {
        let layer = 1 + qubits.clone().into_iter().map(|q| self.level[q]).max().unwrap_or(0);
        for q in qubits {
            self.level[q] = layer;
        }
        self.depth = self.depth.max(layer);
        layer
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

pub fn depth(rc: &RoutedCircuit) -> usize {
    let mut s = AsapSchedule::new(rc.num_physical());
    for g in rc.gates() {
        s.push(g.qubits().iter().map(|q| q.index()));
    }
    s.depth()
}

/// Depth of an unrouted circuit on its virtual qubits.
pub fn circuit_depth(c: &Circuit) -> usize {
    let mut s = AsapSchedule::new(c.num_qubits() as usize);
    for g in c.gates() {
        s.push(g.qubits().iter().map(|q| q.index()));
    }
    s.depth()
}

/// Product of gate fidelities. Single-qubit gates count as 1; a two-qubit
/// gate on a pair that is not an edge counts as 0.
pub fn esp<T: Scalar>(rc: &RoutedCircuit, topo: &Topology<T>, mode: SwapCostMode) -> f64 {
    let mut p = 1.0f64;
    for g in rc.gates() {
        let Some((a, b)) = g.pair() else { continue };
        let f = topo.edge_between(a, b).map_or(0.0, |e| topo.edge(e).fidelity.to_f64_lossy());
        p *= match (g.is_swap(), mode) {
            (true, SwapCostMode::ThreeCx) => f * f * f,
            _ => f,
        };
    }
    p
}

/// Number of output gates acting across an inter-core edge.
pub fn inter_core_uses<T: Scalar>(rc: &RoutedCircuit, topo: &Topology<T>) -> Result<usize, MetricsError> {
    let cores = topo.cores().ok_or(MetricsError::NoCores)?;
    Ok(rc
        .gates()
        .iter()
        .filter_map(|g| g.pair())
        .filter(|(a, b)| cores[a.index()] != cores[b.index()])
        .count())
}

/// Min-max normalization to `[0, 1]`; a constant series maps to 0.5.
pub fn normalize_series(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = min_max(values);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; values.len()]
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Raw averaged metrics of one `(k, p)` configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FomInput {
    pub k: usize,
    pub p: f64,
    pub time: f64,
    pub depth: f64,
    pub swaps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FomRow {
    pub raw: FomInput,
    /// Time, depth and SWAPs mapped to `[1, 2]`.
    pub normalized: [f64; 3],
    pub fom: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FomTable {
    pub rows: Vec<FomRow>,
    /// Index of the row with the largest figure of merit; the first wins ties.
    pub best: usize,
}

impl FomTable {
    pub fn optimum(&self) -> &FomRow {
        &self.rows[self.best]
    }
}

/// Normalizes each metric across rows to `[1, 2]` and scores each row by
/// `1 / (time * depth * swaps)` on the normalized values.
pub fn figure_of_merit(rows: &[FomInput]) -> Result<FomTable, MetricsError> {
    if rows.is_empty() {
        return Err(MetricsError::Empty);
    }
    for (i, r) in rows.iter().enumerate() {
        for (metric, value) in [("time", r.time), ("depth", r.depth), ("swaps", r.swaps)] {
            if !(value > 0.0) {
                return Err(MetricsError::NonPositive { row: i, metric, value });
            }
        }
    }
    let column = |f: fn(&FomInput) -> f64| -> Vec<f64> {
        let v: Vec<f64> = rows.iter().map(f).collect();
        let (lo, hi) = min_max(&v);
        v.iter().map(|x| if hi > lo { 1.0 + (x - lo) / (hi - lo) } else { 1.0 }).collect()
    };
    let (t, d, s) = (column(|r| r.time), column(|r| r.depth), column(|r| r.swaps));
    let mut out = Vec::with_capacity(rows.len());
    let mut best = 0;
    for (i, raw) in rows.iter().enumerate() {
        let fom = 1.0 / (t[i] * d[i] * s[i]);
        if fom > out.get(best).map_or(f64::NEG_INFINITY, |r: &FomRow| r.fom) {
            best = i;
        }
        out.push(FomRow { raw: *raw, normalized: [t[i], d[i], s[i]], fom });
    }
    Ok(FomTable { rows: out, best })
}

/// Formats a real with 12 significant digits.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

/// Metrics of one routed trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub p: f64,
    pub r: f64,
    pub weight_mode: WeightMode,
    pub swap_cost_mode: SwapCostMode,
    pub gates_in: usize,
    pub gates_out: usize,
    pub swaps_added: usize,
    pub depth: usize,
    pub esp: f64,
    pub inter_core_uses: Option<usize>,
    pub iterations: usize,
    /// Wall-clock seconds spent in routing.
    pub compile_time: f64,
}

impl MetricsReport {
    /// Column order of [`MetricsReport::csv_fields`]. `compile_time` is last
    /// so timing-free artifacts are a prefix.
    pub const CSV_COLUMNS: [&'static str; 17] = [
        "trial",
        "seed",
        "n",
        "m",
        "k",
        "p",
        "r",
        "weight_mode",
        "swap_cost_mode",
        "gates_in",
        "gates_out",
        "swaps_added",
        "depth",
        "esp",
        "inter_core_uses",
        "iterations",
        "compile_time",
    ];

    #[allow(clippy::too_many_arguments)]
    pub fn compute<T: Scalar>(
        trial: usize,
        original: &Circuit,
        rc: &RoutedCircuit,
        topo: &Topology<T>,
        cfg: &RouterConfig<T>,
        swap_cost_mode: SwapCostMode,
        compile_time: f64,
    ) -> Self {
        MetricsReport {
            trial,
            seed: cfg.seed,
            n: original.num_qubits() as usize,
            m: topo.num_qubits(),
            k: cfg.lookahead,
            p: cfg.penalty.to_f64_lossy(),
            r: cfg.fidelity_exponent.to_f64_lossy(),
            weight_mode: cfg.weight_mode,
            swap_cost_mode,
            gates_in: original.len(),
            gates_out: rc.gates().len(),
            swaps_added: rc.swap_count(),
            depth: depth(rc),
            esp: esp(rc, topo, swap_cost_mode),
            inter_core_uses: inter_core_uses(rc, topo).ok(),
            iterations: rc.num_iterations(),
            compile_time,
        }
    }

    /// Field values in [`MetricsReport::CSV_COLUMNS`] order, reals with 12
    /// significant digits. `timing = false` drops `compile_time`.
    pub fn csv_fields(&self, timing: bool) -> Vec<String> {
        let mut v = vec![
            self.trial.to_string(),
            self.seed.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.k.to_string(),
            fmt_real(self.p),
            fmt_real(self.r),
            self.weight_mode.to_string(),
            self.swap_cost_mode.to_string(),
            self.gates_in.to_string(),
            self.gates_out.to_string(),
            self.swaps_added.to_string(),
            self.depth.to_string(),
            fmt_real(self.esp),
            self.inter_core_uses.map_or_else(String::new, |u| u.to_string()),
            self.iterations.to_string(),
        ];
        if timing {
            v.push(fmt_real(self.compile_time));
        }
        v
    }

    pub fn csv_columns(timing: bool) -> &'static [&'static str] {
        let n = Self::CSV_COLUMNS.len();
        &Self::CSV_COLUMNS[..if timing { n } else { n - 1 }]
    }
}

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

//! Run specifications: benchmark and topology selectors, value ranges and
//! the per-run configuration echoed into every artifact.

use std::borrow::Cow;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use forcemap::circuit::{gen_cuccaro_adder, gen_qft, gen_quantum_volume, gen_random, parse_qasm, Circuit};
use forcemap::metrics::{fmt_real, SwapCostMode};
use forcemap::router::{RouterConfig, WeightMode};
use forcemap::Topology;
use serde_json::json;

use crate::HarnessError;

pub const DEFAULT_RANDOM_DEPTH: u32 = 40;
pub const DEFAULT_QV_DEPTH: u32 = 16;
pub const DEFAULT_TWO_Q_FRACTION: f64 = 0.5;

/// Circuit family. A missing qubit count means "fill the topology".
#[derive(Clone, Debug, PartialEq)]
pub enum BenchmarkSpec {
    Random { n: Option<u32>, depth: u32, two_q_fraction: f64 },
    Qft { n: Option<u32> },
    QVolume { n: Option<u32>, depth: u32 },
    Adder { bits: u32 },
    Qasm { path: PathBuf },
}

fn parse_count(s: &str, what: &str) -> Result<Option<u32>, String> {
    match s.trim() {
        "" | "*" => Ok(None),
        t => t.parse().map(Some).map_err(|_| format!("{what}: `{t}` is not a non-negative integer")),
    }
}

impl FromStr for BenchmarkSpec {
    type Err = String;

    /// `random[:N[,DEPTH[,FRAC]]]`, `qft[:N]`, `qvolume[:N[,DEPTH]]`,
    /// `adder:BITS`, `qasm:PATH`. `N` may be `*` to fill the topology.
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let parts: Vec<&str> = if args.is_empty() { Vec::new() } else { args.split(',').collect() };
        let arg = |i: usize| parts.get(i).copied().unwrap_or("");
        let max_args = |k: usize| {
            if parts.len() > k {
                Err(format!("benchmark `{name}` takes at most {k} argument(s), got {}", parts.len()))
            } else {
                Ok(())
            }
        };
        let spec = match name {
            "random" => {
                max_args(3)?;
                let depth = parse_count(arg(1), "random depth")?.unwrap_or(DEFAULT_RANDOM_DEPTH);
                let two_q_fraction = match arg(2).trim() {
                    "" => DEFAULT_TWO_Q_FRACTION,
                    t => t.parse().map_err(|_| format!("random two-qubit fraction: `{t}` is not a number"))?,
                };
                if !(0.0..=1.0).contains(&two_q_fraction) {
                    return Err(format!("random two-qubit fraction {two_q_fraction} outside [0, 1]"));
                }
                BenchmarkSpec::Random { n: parse_count(arg(0), "random qubits")?, depth, two_q_fraction }
            }
            "qft" => {
                max_args(1)?;
                BenchmarkSpec::Qft { n: parse_count(arg(0), "qft qubits")? }
            }
            "qvolume" | "qv" => {
                max_args(2)?;
                let depth = parse_count(arg(1), "qvolume depth")?.unwrap_or(DEFAULT_QV_DEPTH);
                BenchmarkSpec::QVolume { n: parse_count(arg(0), "qvolume qubits")?, depth }
            }
            "adder" => {
                max_args(1)?;
                let bits = parse_count(arg(0), "adder bits")?.ok_or("adder needs a bit count, e.g. adder:6")?;
                BenchmarkSpec::Adder { bits }
            }
            "qasm" => {
                if args.is_empty() {
                    return Err("qasm needs a file path, e.g. qasm:circuit.qasm".into());
                }
                BenchmarkSpec::Qasm { path: PathBuf::from(args) }
            }
            other => return Err(format!("unknown benchmark `{other}` (expected random, qft, qvolume, adder or qasm)")),
        };
        Ok(spec)
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = |n: &Option<u32>| n.map_or_else(|| "*".to_string(), |n| n.to_string());
        match self {
            BenchmarkSpec::Random { n: q, depth, two_q_fraction } => {
                write!(f, "random:{},{depth},{two_q_fraction}", n(q))
            }
            BenchmarkSpec::Qft { n: q } => write!(f, "qft:{}", n(q)),
            BenchmarkSpec::QVolume { n: q, depth } => write!(f, "qvolume:{},{depth}", n(q)),
            BenchmarkSpec::Adder { bits } => write!(f, "adder:{bits}"),
            BenchmarkSpec::Qasm { path } => write!(f, "qasm:{}", path.display()),
        }
    }
}

/// Produces the circuit of each trial. Seed-free families are built once.
#[derive(Debug)]
pub enum CircuitSource {
    Fixed(Circuit),
    Random { n: u32, depth: u32, two_q_fraction: f64 },
    QVolume { n: u32, depth: u32 },
}

impl CircuitSource {
    pub fn circuit(&self, seed: u64) -> Cow<'_, Circuit> {
        match *self {
            CircuitSource::Fixed(ref c) => Cow::Borrowed(c),
            CircuitSource::Random { n, depth, two_q_fraction } => Cow::Owned(gen_random(n, depth, two_q_fraction, seed)),
            CircuitSource::QVolume { n, depth } => Cow::Owned(gen_quantum_volume(n, depth, seed)),
        }
    }

    pub fn num_qubits(&self) -> u32 {
        match self {
            CircuitSource::Fixed(c) => c.num_qubits(),
            CircuitSource::Random { n, .. } | CircuitSource::QVolume { n, .. } => *n,
        }
    }
}

impl BenchmarkSpec {
    /// Resolves the qubit count against a topology of `m` qubits.
    pub fn source(&self, m: usize) -> Result<CircuitSource, HarnessError> {
        let fill = |n: &Option<u32>| -> Result<u32, HarnessError> {
            let n = n.unwrap_or(u32::try_from(m).unwrap_or(u32::MAX));
            if n < 2 {
                return Err(HarnessError::Usage(format!("benchmark `{self}` needs at least 2 qubits")));
            }
            Ok(n)
        };
        let src = match self {
            BenchmarkSpec::Random { n, depth, two_q_fraction } => {
                if *depth == 0 {
                    return Err(HarnessError::Usage("random depth must be at least 1".into()));
                }
                CircuitSource::Random { n: fill(n)?, depth: *depth, two_q_fraction: *two_q_fraction }
            }
            BenchmarkSpec::Qft { n } => CircuitSource::Fixed(gen_qft(fill(n)?)),
            BenchmarkSpec::QVolume { n, depth } => CircuitSource::QVolume { n: fill(n)?, depth: *depth },
            BenchmarkSpec::Adder { bits } => {
                if *bits == 0 {
                    return Err(HarnessError::Usage("adder needs at least 1 bit".into()));
                }
                CircuitSource::Fixed(gen_cuccaro_adder(*bits))
            }
            BenchmarkSpec::Qasm { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
                let c = parse_qasm(&text).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
                CircuitSource::Fixed(c)
            }
        };
        if src.num_qubits() as usize > m {
            return Err(HarnessError::Usage(format!(
                "benchmark `{self}` needs {} qubits but the topology has {m}",
                src.num_qubits()
            )));
        }
        Ok(src)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TopologyShape {
    Grid { rows: u32, cols: u32 },
    /// Cores of `core_rows x core_cols`, `cores_x` across and `cores_y` down,
    /// intra-core fidelity 1 and inter-core fidelity `inter_f`.
    Multicore { core_rows: u32, core_cols: u32, cores_x: u32, cores_y: u32, inter_f: f64 },
    File(PathBuf),
}

fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (r, c) = s.split_once(['x', 'X']).unwrap_or((s, s));
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("`{s}` is not RxC or a side length"));
    Ok((num(r)?, num(c)?))
}

impl FromStr for TopologyShape {
    type Err = String;

    /// `grid:RxC`, `multicore:R,C,X,Y,INTER_F`, `file:PATH` or a path ending
    /// in `.json`.
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(d) = s.strip_prefix("grid:") {
            let (rows, cols) = parse_dims(d)?;
            return Ok(TopologyShape::Grid { rows, cols });
        }
        if let Some(args) = s.strip_prefix("multicore:") {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            if parts.len() != 5 {
                return Err(format!("multicore expects R,C,X,Y,INTER_F, got `{args}`"));
            }
            let int = |t: &str| t.parse::<u32>().map_err(|_| format!("multicore: `{t}` is not an integer"));
            let inter_f = parts[4].parse::<f64>().map_err(|_| format!("multicore: `{}` is not a number", parts[4]))?;
            return Ok(TopologyShape::Multicore {
                core_rows: int(parts[0])?,
                core_cols: int(parts[1])?,
                cores_x: int(parts[2])?,
                cores_y: int(parts[3])?,
                inter_f,
            });
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(TopologyShape::File(PathBuf::from(p)));
        }
        if s.ends_with(".json") {
            return Ok(TopologyShape::File(PathBuf::from(s)));
        }
        Err(format!("unknown topology `{s}` (expected grid:RxC, multicore:R,C,X,Y,F or a .json file)"))
    }
}

impl fmt::Display for TopologyShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyShape::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
            TopologyShape::Multicore { core_rows, core_cols, cores_x, cores_y, inter_f } => {
                write!(f, "multicore:{core_rows},{core_cols},{cores_x},{cores_y},{inter_f}")
            }
            TopologyShape::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Topology selector plus an optional uniform redraw of link fidelities.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologySpec {
    pub shape: TopologyShape,
    pub fidelities: Option<(f64, f64)>,
    pub fidelity_seed: u64,
}

impl TopologySpec {
    pub fn new(shape: TopologyShape) -> Self {
        TopologySpec { shape, fidelities: None, fidelity_seed: 0 }
    }

    pub fn grid(rows: u32, cols: u32) -> Self {
        Self::new(TopologyShape::Grid { rows, cols })
    }

    pub fn build(&self) -> Result<Topology, HarnessError> {
        let base = match &self.shape {
            TopologyShape::Grid { rows, cols } => Topology::grid(*rows, *cols, 1.0),
            TopologyShape::Multicore { core_rows, core_cols, cores_x, cores_y, inter_f } => {
                Topology::multicore(*core_rows, *core_cols, *cores_x, *cores_y, 1.0, *inter_f)
            }
            TopologyShape::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
                Topology::from_json(&text)
            }
        }
        .map_err(|e| HarnessError::Input(format!("topology `{}`: {e}", self.shape)))?;
        match self.fidelities {
            None => Ok(base),
            Some((lo, hi)) => base
                .with_random_fidelities(lo, hi, self.fidelity_seed)
                .map_err(|e| HarnessError::Usage(format!("fidelities: {e}"))),
        }
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape)?;
        if let Some((lo, hi)) = self.fidelities {
            write!(f, "@uniform({lo},{hi};seed={})", self.fidelity_seed)?;
        }
        Ok(())
    }
}

/// Comma-separated integers with inclusive `a..b` spans: `0..6`, `0,2,4`.
pub fn parse_int_range(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a non-negative integer"));
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(int(item)?),
        }
    }
    Ok(out)
}

/// Comma-separated reals with inclusive `lo:hi:step` spans: `0:1:0.1`,
/// `0,0.5,1`, `-inf`. Span points are rounded to 12 significant digits.
pub fn parse_real_range(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let real = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => {
                let v = real(v)?;
                if v.is_nan() {
                    return Err("NaN is not a valid value".into());
                }
                out.push(v);
            }
            [lo, hi, step] => {
                let (lo, hi, step) = (real(lo)?, real(hi)?, real(step)?);
                if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && lo <= hi) {
                    return Err(format!("`{item}` must be lo:hi:step with finite lo <= hi and step > 0"));
                }
                let count = ((hi - lo) / step + 1e-9).floor() as usize;
                for i in 0..=count {
                    let v: f64 = fmt_real(lo + i as f64 * step).parse().expect("formatted real parses");
                    out.push(v);
                }
            }
            _ => return Err(format!("`{item}` is neither a value nor lo:hi:step")),
        }
    }
    Ok(out)
}

/// Output format of an artifact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything one harness invocation depends on.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub benchmark: BenchmarkSpec,
    pub topology: TopologySpec,
    pub k: Vec<usize>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub weight_mode: WeightMode,
    pub perturb_rho: f64,
    pub swap_cost_mode: SwapCostMode,
    pub partner_check: bool,
    pub stall_window: usize,
    /// Largest qubit count handed to the statevector oracle.
    pub sim_limit: usize,
    /// Include wall-clock columns. Off for byte-reproducible artifacts.
    pub timing: bool,
    /// Each trial's compile time is the median of this many identical routes.
    pub timing_repeats: usize,
    pub format: Format,
}

impl RunSpec {
    pub fn new(benchmark: BenchmarkSpec, topology: TopologySpec) -> Self {
        let d = RouterConfig::<f64>::default();
        RunSpec {
            benchmark,
            topology,
            k: vec![d.lookahead],
            p: vec![d.penalty],
            r: vec![d.fidelity_exponent],
            trials: 1,
            seed: 0,
            weight_mode: d.weight_mode,
            perturb_rho: d.perturb_rho,
            swap_cost_mode: SwapCostMode::default(),
            partner_check: d.partner_check,
            stall_window: d.stall_window,
            sim_limit: forcemap::verify::DEFAULT_MAX_QUBITS,
            timing: true,
            timing_repeats: 1,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Usage("--trials must be at least 1".into()));
        }
        if self.timing_repeats == 0 {
            return Err(HarnessError::Usage("--timing-repeats must be at least 1".into()));
        }
        for (name, empty) in [("--k", self.k.is_empty()), ("--p", self.p.is_empty()), ("--r", self.r.is_empty())] {
            if empty {
                return Err(HarnessError::Usage(format!("{name} range is empty")));
            }
        }
        self.config(self.k[0], self.p[0], self.r[0], self.seed).validate().map_err(|e| HarnessError::Usage(e.to_string()))
    }

    /// Errors unless `k`, `p` and `r` each hold a single value.
    pub fn single(&self) -> Result<(usize, f64, f64), HarnessError> {
        for (name, len) in [("--k", self.k.len()), ("--p", self.p.len()), ("--r", self.r.len())] {
            if len != 1 {
                return Err(HarnessError::Usage(format!("{name} must be a single value here, got {len}")));
            }
        }
        Ok((self.k[0], self.p[0], self.r[0]))
    }

    pub fn config(&self, k: usize, p: f64, r: f64, seed: u64) -> RouterConfig {
        RouterConfig {
            lookahead: k,
            penalty: p,
            fidelity_exponent: r,
            weight_mode: self.weight_mode,
            seed,
            perturb_rho: self.perturb_rho,
            stall_window: self.stall_window,
            partner_check: self.partner_check,
            ..RouterConfig::default()
        }
    }

    /// Configuration echo for artifact headers; stable key order.
    pub fn echo(&self, command: &str) -> serde_json::Value {
        let reals = |v: &[f64]| v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>();
        json!({
            "tool": format!("forcemap {}", env!("CARGO_PKG_VERSION")),
            "command": command,
            "benchmark": self.benchmark.to_string(),
            "topology": self.topology.to_string(),
            "k": self.k,
            "p": reals(&self.p),
            "r": reals(&self.r),
            "trials": self.trials,
            "seed": self.seed,
            "weight_mode": self.weight_mode.to_string(),
            "perturb_rho": fmt_real(self.perturb_rho),
            "swap_cost_mode": self.swap_cost_mode.to_string(),
            "partner_check": self.partner_check,
            "stall_window": self.stall_window,
            "sim_limit": self.sim_limit,
            "timing": self.timing,
            "timing_repeats": self.timing_repeats,
        })
    }
}

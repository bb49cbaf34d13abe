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

use std::path::PathBuf;
use std::process::{Command, ExitCode};

use clap::{Args, Parser, Subcommand};
use forcemap::metrics::SwapCostMode;
use forcemap::router::{RoutedCircuit, WeightMode};
use forcemap::verify::DEFAULT_MAX_QUBITS;
use forcemap_cli::commands::ScaleMeasure;
use forcemap_cli::spec::{parse_int_range, parse_real_range};
use forcemap_cli::{
    cmd_route, cmd_rsweep, cmd_scale, cmd_sweep, cmd_verify, Aggregate, Artifact, BenchmarkSpec, Format, HarnessError, InProcess,
    RunSpec, SizeRunner, TopologyShape, TopologySpec,
};

#[derive(Parser)]
#[command(name = "forcemap", version, about = "Force-directed SWAP routing and experiment harness")]
struct Cli {
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Route `--trials` seeded trials of one configuration and report metrics.
    Route {
        #[command(flatten)]
        common: Common,
        /// Write the routed circuit of the first trial as JSON.
        #[arg(long)]
        emit_routed: Option<PathBuf>,
    },
    /// Sweep the (k, p) grid and report the figure of merit.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the fidelity exponent r.
    Rsweep {
        #[command(flatten)]
        common: Common,
    },
    /// Route the benchmark on growing grids and fit the time scaling.
    Scale {
        #[command(flatten)]
        common: Common,
        /// Grid sizes, e.g. `10,20,40` (square) or `10x20,20x40`.
        #[arg(long)]
        sizes: String,
        /// Route every size in this process instead of a child process.
        #[arg(long)]
        in_process: bool,
    },
    /// Check a routed circuit from `route --emit-routed` against the oracles.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        routed: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// random[:N[,DEPTH[,FRAC]]] | qft[:N] | qvolume[:N[,DEPTH]] | adder:BITS | qasm:PATH.
    /// N may be `*` to fill the topology.
    #[arg(long)]
    benchmark: BenchmarkSpec,
    /// grid:RxC | multicore:R,C,X,Y,INTER_F | file:PATH.json.
    #[arg(long, default_value = "grid:8x8")]
    topology: TopologyShape,
    /// Redraw every link fidelity uniformly from [LO, HI].
    #[arg(long, value_name = "LO,HI")]
    fidelities: Option<String>,
    #[arg(long, default_value_t = 0)]
    fidelity_seed: u64,
    /// Lookahead values: `1`, `0..6`, `0,2,4`.
    #[arg(long, default_value = "1")]
    k: String,
    /// Penalty thresholds: `0`, `0:1:0.1`, `-inf`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    p: String,
    /// Fidelity exponents, same syntax as --p.
    #[arg(long, default_value = "0")]
    r: String,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Trial i uses seed SEED + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "diameter")]
    weight_mode: WeightMode,
    #[arg(long, default_value_t = 0.05)]
    perturb_rho: f64,
    #[arg(long, default_value = "single-factor")]
    swap_cost_mode: SwapCostMode,
    /// Use the literal greedy SWAP selection.
    #[arg(long)]
    no_partner_check: bool,
    #[arg(long, default_value_t = 4)]
    stall_window: usize,
    /// Largest register handed to the statevector oracle.
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    sim_limit: usize,
    /// Drop wall-clock columns so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Time each trial as the median of this many identical routes.
    #[arg(long, default_value_t = 1)]
    timing_repeats: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn spec(&self) -> Result<RunSpec, HarnessError> {
        let usage = |flag: &str, e: String| HarnessError::Usage(format!("{flag}: {e}"));
        let mut topology = TopologySpec::new(self.topology.clone());
        if let Some(f) = &self.fidelities {
            let r = parse_real_range(f).map_err(|e| usage("--fidelities", e))?;
            let [lo, hi] = r[..] else {
                return Err(usage("--fidelities", format!("expected LO,HI, got `{f}`")));
            };
            topology.fidelities = Some((lo, hi));
        }
        topology.fidelity_seed = self.fidelity_seed;
        let mut spec = RunSpec::new(self.benchmark.clone(), topology);
        spec.k = parse_int_range(&self.k).map_err(|e| usage("--k", e))?;
        spec.p = parse_real_range(&self.p).map_err(|e| usage("--p", e))?;
        spec.r = parse_real_range(&self.r).map_err(|e| usage("--r", e))?;
        spec.trials = self.trials;
        spec.seed = self.seed;
        spec.weight_mode = self.weight_mode;
        spec.perturb_rho = self.perturb_rho;
        spec.swap_cost_mode = self.swap_cost_mode;
        spec.partner_check = !self.no_partner_check;
        spec.stall_window = self.stall_window;
        spec.sim_limit = self.sim_limit;
        spec.timing = !self.no_timing;
        spec.timing_repeats = self.timing_repeats;
        spec.format = self.format;
        spec.validate()?;
        Ok(spec)
    }

    fn write(&self, artifact: &Artifact) -> Result<(), HarnessError> {
        let text = artifact.render(self.format);
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn parse_sizes(s: &str) -> Result<Vec<(u32, u32)>, HarnessError> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let (r, c) = item.split_once(['x', 'X']).unwrap_or((item, item));
            match (r.parse(), c.parse()) {
                (Ok(r), Ok(c)) => Ok((r, c)),
                _ => Err(HarnessError::Usage(format!("--sizes: `{item}` is not S or RxC"))),
            }
        })
        .collect()
}

/// Routes each size in a child `forcemap route`, so an allocation failure
/// costs only that size.
struct ChildProcess {
    exe: PathBuf,
    common: Common,
}

impl SizeRunner for ChildProcess {
    fn run(&self, spec: &RunSpec) -> Result<ScaleMeasure, String> {
        let c = &self.common;
        let mut cmd = Command::new(&self.exe);
        cmd.arg("route")
            .arg(format!("--benchmark={}", spec.benchmark))
            .arg(format!("--topology={}", spec.topology.shape))
            .arg(format!("--k={}", c.k))
            .arg(format!("--p={}", c.p))
            .arg(format!("--r={}", c.r))
            .arg(format!("--trials={}", c.trials))
            .arg(format!("--seed={}", c.seed))
            .arg(format!("--weight-mode={}", c.weight_mode))
            .arg(format!("--perturb-rho={}", c.perturb_rho))
            .arg(format!("--swap-cost-mode={}", c.swap_cost_mode))
            .arg(format!("--stall-window={}", c.stall_window))
            .arg(format!("--sim-limit={}", c.sim_limit))
            .arg(format!("--timing-repeats={}", c.timing_repeats))
            .arg("--format=json");
        if c.no_partner_check {
            cmd.arg("--no-partner-check");
        }
        if c.no_timing {
            cmd.arg("--no-timing");
        }
        let out = cmd.output().map_err(|e| format!("could not start child: {e}"))?;
        if !out.status.success() {
            let stderr = String::from_utf8_lossy(&out.stderr);
            let last = stderr.lines().last().unwrap_or("").trim().to_string();
            return Err(match out.status.code() {
                Some(code) => format!("exit {code}: {last}"),
                None => format!("terminated by a signal, likely memory exhaustion: {last}"),
            });
        }
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("unreadable child output: {e}"))?;
        let aggregate: Aggregate =
            serde_json::from_value(v["aggregate"].clone()).map_err(|e| format!("unreadable child aggregate: {e}"))?;
        let n = v["rows"][0]["n"].as_u64().ok_or("child output lacks `n`")? as usize;
        Ok(ScaleMeasure { n, aggregate })
    }
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HarnessError::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Cmd::Route { common, emit_routed } => {
            let spec = common.spec()?;
            let outcome = cmd_route(&spec, emit_routed.is_some())?;
            if let Some(path) = emit_routed {
                let rc = outcome.results[0].routed.as_ref().expect("first trial kept");
                std::fs::write(path, serde_json::to_string(rc).expect("routed circuit serializes"))?;
            }
            common.write(&outcome.artifact)?;
            Ok(true)
        }
        Cmd::Sweep { common } => {
            let outcome = cmd_sweep(&common.spec()?)?;
            common.write(&outcome.artifact)?;
            Ok(true)
        }
        Cmd::Rsweep { common } => {
            let outcome = cmd_rsweep(&common.spec()?)?;
            common.write(&outcome.artifact)?;
            Ok(true)
        }
        Cmd::Scale { common, sizes, in_process } => {
            let spec = common.spec()?;
            let sizes = parse_sizes(&sizes)?;
            let outcome = if in_process {
                cmd_scale(&spec, &sizes, &InProcess)?
            } else {
                let exe = std::env::current_exe()?;
                cmd_scale(&spec, &sizes, &ChildProcess { exe, common: common.clone() })?
            };
            common.write(&outcome.artifact)?;
            Ok(true)
        }
        Cmd::Verify { common, routed } => {
            let spec = common.spec()?;
            let text = std::fs::read_to_string(&routed).map_err(|e| HarnessError::Input(format!("{}: {e}", routed.display())))?;
            let rc: RoutedCircuit =
                serde_json::from_str(&text).map_err(|e| HarnessError::Input(format!("{}: {e}", routed.display())))?;
            let outcome = cmd_verify(&spec, &rc)?;
            common.write(&outcome.artifact)?;
            Ok(outcome.passed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

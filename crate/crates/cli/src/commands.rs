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

//! The five harness commands. Each returns an [`Artifact`] plus the typed
//! values it was rendered from.

use forcemap::metrics::{fmt_real, normalize_series, figure_of_merit, FomInput, FomTable, MetricsReport};
use forcemap::router::RoutedCircuit;
use serde_json::json;

use crate::artifact::Artifact;
use crate::harness::{run_trials, trial_circuit, verify_routed, Aggregate, Summary, TrialResult};
use crate::spec::{RunSpec, TopologySpec};
use crate::HarnessError;

fn real(v: f64) -> String {
    fmt_real(v)
}

fn opt_real(v: Option<Summary>, f: fn(Summary) -> f64) -> String {
    v.map_or_else(String::new, |s| real(f(s)))
}

#[derive(Debug)]
pub struct RouteOutcome {
    pub artifact: Artifact,
    pub aggregate: Aggregate,
    pub results: Vec<TrialResult>,
}

/// Routes every trial of a single `(k, p, r)` point. Rows are written only
/// when all trials pass verification.
pub fn cmd_route(spec: &RunSpec, keep_first: bool) -> Result<RouteOutcome, HarnessError> {
    spec.validate()?;
    let (k, p, r) = spec.single()?;
    let topo = spec.topology.build()?;
    let source = spec.benchmark.source(topo.num_qubits())?;
    let results = run_trials(spec, &source, &topo, k, p, r, keep_first)?;
    let reports: Vec<MetricsReport> = results.iter().map(|t| t.report.clone()).collect();
    let aggregate = Aggregate::of(&reports, spec.timing);

    let mut columns: Vec<&str> = MetricsReport::csv_columns(false).to_vec();
    columns.push("oracles");
    if spec.timing {
        columns.push("compile_time");
    }
    let mut art = Artifact::new(spec.echo("route"), &columns);
    for t in &results {
        let mut row = t.report.csv_fields(false);
        row.push(if t.simulated { "permutation+statevector" } else { "permutation" }.to_string());
        if spec.timing {
            row.push(real(t.report.compile_time));
        }
        art.push_row(row);
    }
    let first = &reports[0];
    for (label, pick) in [("mean", (|s: Summary| s.mean) as fn(Summary) -> f64), ("std", |s: Summary| s.std)] {
        let a = &aggregate;
        let mut row = vec![
            label.to_string(),
            String::new(),
            first.n.to_string(),
            first.m.to_string(),
            first.k.to_string(),
            real(first.p),
            real(first.r),
            first.weight_mode.to_string(),
            first.swap_cost_mode.to_string(),
            real(pick(a.gates_in)),
            real(pick(a.gates_out)),
            real(pick(a.swaps)),
            real(pick(a.depth)),
            real(pick(a.esp)),
            opt_real(a.inter_core_uses, pick),
            real(pick(a.iterations)),
            String::new(),
        ];
        if spec.timing {
            row.push(opt_real(a.compile_time, pick));
        }
        art.push_row(row);
    }
    art.extra.insert("aggregate".into(), serde_json::to_value(&aggregate).expect("aggregate serializes"));
    Ok(RouteOutcome { artifact: art, aggregate, results })
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub k: usize,
    pub p: f64,
    pub aggregate: Aggregate,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub artifact: Artifact,
    pub points: Vec<SweepPoint>,
    /// Present when timing is on and every averaged metric is positive.
    pub fom: Option<FomTable>,
}

/// Cartesian `(k, p)` sweep at a single `r`, `k` outer and `p` inner.
pub fn cmd_sweep(spec: &RunSpec) -> Result<SweepOutcome, HarnessError> {
    spec.validate()?;
    if spec.r.len() != 1 {
        return Err(HarnessError::Usage(format!("sweep takes a single --r value, got {}", spec.r.len())));
    }
    let r = spec.r[0];
    let topo = spec.topology.build()?;
    let source = spec.benchmark.source(topo.num_qubits())?;
    let mut points = Vec::with_capacity(spec.k.len() * spec.p.len());
    for &k in &spec.k {
        for &p in &spec.p {
            let results = run_trials(spec, &source, &topo, k, p, r, false)?;
            let reports: Vec<MetricsReport> = results.into_iter().map(|t| t.report).collect();
            points.push(SweepPoint { k, p, aggregate: Aggregate::of(&reports, true) });
        }
    }

    let mut notes = Vec::new();
    let fom = if spec.timing {
        let inputs: Vec<FomInput> = points
            .iter()
            .map(|pt| FomInput {
                k: pt.k,
                p: pt.p,
                time: pt.aggregate.compile_time.expect("sweep aggregates carry time").mean,
                depth: pt.aggregate.depth.mean,
                swaps: pt.aggregate.swaps.mean,
            })
            .collect();
        match figure_of_merit(&inputs) {
            Ok(t) => Some(t),
            Err(e) => {
                notes.push(("fom".to_string(), format!("unavailable: {e}")));
                None
            }
        }
    } else {
        notes.push(("fom".to_string(), "omitted: needs timing".to_string()));
        None
    };

    let mut columns = vec!["k", "p", "r", "trials", "mean_depth", "std_depth", "mean_swaps", "std_swaps", "mean_esp"];
    if spec.timing {
        columns.extend(["mean_time", "std_time", "norm_time", "norm_depth", "norm_swaps", "fom"]);
    }
    let mut art = Artifact::new(spec.echo("sweep"), &columns);
    for (i, pt) in points.iter().enumerate() {
        let a = &pt.aggregate;
        let mut row = vec![
            pt.k.to_string(),
            real(pt.p),
            real(r),
            a.trials.to_string(),
            real(a.depth.mean),
            real(a.depth.std),
            real(a.swaps.mean),
            real(a.swaps.std),
            real(a.esp.mean),
        ];
        if spec.timing {
            let t = a.compile_time.expect("sweep aggregates carry time");
            row.extend([real(t.mean), real(t.std)]);
            match &fom {
                Some(table) => {
                    let fr = &table.rows[i];
                    row.extend(fr.normalized.iter().map(|v| real(*v)));
                    row.push(real(fr.fom));
                }
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        art.push_row(row);
    }
    if let Some(table) = &fom {
        let best = table.optimum();
        art.note("optimum", format!("k={} p={}", best.raw.k, real(best.raw.p)));
    }
    art.notes.extend(notes);
    Ok(SweepOutcome { artifact: art, points, fom })
}

#[derive(Clone, Debug)]
pub struct RsweepPoint {
    pub r: f64,
    pub aggregate: Aggregate,
    pub normalized_esp: f64,
}

#[derive(Debug)]
pub struct RsweepOutcome {
    pub artifact: Artifact,
    pub points: Vec<RsweepPoint>,
}

/// Series over `r` at a single `(k, p)`.
pub fn cmd_rsweep(spec: &RunSpec) -> Result<RsweepOutcome, HarnessError> {
    spec.validate()?;
    if spec.k.len() != 1 || spec.p.len() != 1 {
        return Err(HarnessError::Usage("rsweep takes a single --k and --p value".into()));
    }
    let (k, p) = (spec.k[0], spec.p[0]);
    let topo = spec.topology.build()?;
    let source = spec.benchmark.source(topo.num_qubits())?;
    let mut aggs = Vec::with_capacity(spec.r.len());
    for &r in &spec.r {
        let results = run_trials(spec, &source, &topo, k, p, r, false)?;
        let reports: Vec<MetricsReport> = results.into_iter().map(|t| t.report).collect();
        aggs.push(Aggregate::of(&reports, spec.timing));
    }
    let norm = normalize_series(&aggs.iter().map(|a| a.esp.mean).collect::<Vec<_>>());
    let points: Vec<RsweepPoint> = spec
        .r
        .iter()
        .zip(aggs)
        .zip(norm)
        .map(|((&r, aggregate), normalized_esp)| RsweepPoint { r, aggregate, normalized_esp })
        .collect();

    let mut columns = vec![
        "r",
        "trials",
        "mean_esp",
        "std_esp",
        "norm_esp",
        "mean_swaps",
        "std_swaps",
        "mean_depth",
        "mean_inter_core_uses",
        "std_inter_core_uses",
    ];
    if spec.timing {
        columns.push("mean_time");
    }
    let mut art = Artifact::new(spec.echo("rsweep"), &columns);
    for pt in &points {
        let a = &pt.aggregate;
        let mut row = vec![
            real(pt.r),
            a.trials.to_string(),
            real(a.esp.mean),
            real(a.esp.std),
            real(pt.normalized_esp),
            real(a.swaps.mean),
            real(a.swaps.std),
            real(a.depth.mean),
            opt_real(a.inter_core_uses, |s| s.mean),
            opt_real(a.inter_core_uses, |s| s.std),
        ];
        if spec.timing {
            row.push(opt_real(a.compile_time, |s| s.mean));
        }
        art.push_row(row);
    }
    Ok(RsweepOutcome { artifact: art, points })
}

/// Result of routing one grid size.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScaleMeasure {
    pub n: usize,
    pub aggregate: Aggregate,
}

#[derive(Clone, Debug)]
pub struct ScaleRow {
    pub rows: u32,
    pub cols: u32,
    pub outcome: Result<ScaleMeasure, String>,
}

/// Routes one size. Failures are reported per size.
pub trait SizeRunner {
    fn run(&self, spec: &RunSpec) -> Result<ScaleMeasure, String>;
}

/// Routes in the calling process.
pub struct InProcess;

impl SizeRunner for InProcess {
    fn run(&self, spec: &RunSpec) -> Result<ScaleMeasure, String> {
        let outcome = std::panic::catch_unwind(|| cmd_route(spec, false));
        match outcome {
            Ok(Ok(o)) => Ok(ScaleMeasure { n: o.results[0].report.n, aggregate: o.aggregate }),
            Ok(Err(e)) => Err(e.to_string()),
            Err(_) => Err("routing panicked".to_string()),
        }
    }
}

#[derive(Debug)]
pub struct ScaleOutcome {
    pub artifact: Artifact,
    pub rows: Vec<ScaleRow>,
    /// Least-squares slope of ln(time) against ln(qubits), when at least two
    /// sizes completed with timing.
    pub slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = points.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Routes the benchmark on each `rows x cols` grid in turn. The topology in
/// `spec` is replaced per size.
pub fn cmd_scale(spec: &RunSpec, sizes: &[(u32, u32)], runner: &dyn SizeRunner) -> Result<ScaleOutcome, HarnessError> {
    spec.validate()?;
    spec.single()?;
    if sizes.is_empty() {
        return Err(HarnessError::Usage("scale needs at least one size".into()));
    }
    let mut out = Vec::with_capacity(sizes.len());
    for &(rows, cols) in sizes {
        let mut s = spec.clone();
        s.topology = TopologySpec::grid(rows, cols);
        log::info!("scale: routing {} on {rows}x{cols}", s.benchmark);
        let outcome = runner.run(&s);
        if let Err(e) = &outcome {
            log::error!("scale: {rows}x{cols}: {e}");
        }
        out.push(ScaleRow { rows, cols, outcome });
    }

    let mut columns = vec!["rows", "cols", "m", "n", "gates_in", "trials", "mean_swaps", "mean_depth", "status"];
    if spec.timing {
        columns.extend(["mean_time", "std_time"]);
    }
    let mut echo = spec.echo("scale");
    echo["topology"] = json!(sizes.iter().map(|(r, c)| format!("grid:{r}x{c}")).collect::<Vec<_>>());
    let mut art = Artifact::new(echo, &columns);
    let mut fit = Vec::new();
    for row in &out {
        let m = row.rows as usize * row.cols as usize;
        let mut cells = vec![row.rows.to_string(), row.cols.to_string(), m.to_string()];
        match &row.outcome {
            Ok(meas) => {
                let a = &meas.aggregate;
                cells.extend([
                    meas.n.to_string(),
                    real(a.gates_in.mean),
                    a.trials.to_string(),
                    real(a.swaps.mean),
                    real(a.depth.mean),
                    "ok".to_string(),
                ]);
                if spec.timing {
                    let t = a.compile_time.ok_or_else(|| HarnessError::Input("size run returned no timing".into()))?;
                    cells.extend([real(t.mean), real(t.std)]);
                    if t.mean > 0.0 {
                        fit.push((m as f64, t.mean));
                    }
                }
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(String::new(), 5));
                cells.push(format!("failed: {e}"));
                if spec.timing {
                    cells.extend([String::new(), String::new()]);
                }
            }
        }
        art.push_row(cells);
    }
    let slope = if spec.timing { log_log_slope(&fit) } else { None };
    match slope {
        Some(s) => art.note("slope", real(s)),
        None if !spec.timing => art.note("slope", "omitted: needs timing"),
        None => art.note("slope", "omitted: fewer than two completed sizes"),
    }
    art.extra.insert("slope".into(), slope.map_or(serde_json::Value::Null, |s| json!(s)));
    Ok(ScaleOutcome { artifact: art, rows: out, slope })
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub artifact: Artifact,
    pub passed: bool,
}

/// Checks a stored routing of the trial with seed `spec.seed` against both
/// oracles.
pub fn cmd_verify(spec: &RunSpec, routed: &RoutedCircuit) -> Result<VerifyOutcome, HarnessError> {
    let topo = spec.topology.build()?;
    let source = spec.benchmark.source(topo.num_qubits())?;
    let circuit = trial_circuit(&source, spec.seed);
    let mut art = Artifact::new(
        spec.echo("verify"),
        &["seed", "n", "m", "gates_out", "swaps", "legal", "equivalent", "statevector_overlap", "first_violation"],
    );
    let flag = |b: Option<bool>| b.map_or_else(String::new, |b| b.to_string());
    let (passed, row) = match verify_routed(&circuit, routed, &topo, spec.sim_limit) {
        Ok((rep, _)) => {
            let row = vec![
                flag(rep.legal),
                flag(rep.equivalent),
                rep.fidelity_overlap.map_or_else(String::new, real),
                rep.first_violation.as_ref().map_or_else(String::new, |v| v.to_string()),
            ];
            (rep.passed(), row)
        }
        Err(e) => (false, vec![String::new(), "false".into(), String::new(), e.to_string()]),
    };
    let mut cells = vec![
        spec.seed.to_string(),
        circuit.num_qubits().to_string(),
        topo.num_qubits().to_string(),
        routed.gates().len().to_string(),
        routed.swap_count().to_string(),
    ];
    cells.extend(row);
    art.push_row(cells);
    art.note("verdict", if passed { "pass" } else { "fail" });
    Ok(VerifyOutcome { artifact: art, passed })
}

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

//! Acceptance suite. Runs every criterion in sequence, so timings are not
//! disturbed by concurrent tests, and prints one PASS/FAIL line each.
//! Pass criterion numbers as arguments to run a subset.
//!
//! Criteria in `KNOWN_FAILURES` still print FAIL with their measurements but
//! do not fail the run; `FORCEMAP_STRICT=1` makes them fatal. A known failure
//! that starts passing fails the run so the list stays accurate.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use forcemap::metrics::{mean_std, AsapSchedule};
use forcemap::router::{route, Placement, RoutedCircuit, Router};
use forcemap::verify::{check_legality, check_permutation_equivalence, statevector_oracle, OVERLAP_TOLERANCE};
use forcemap::{circuit::gen_random, Topology};
use forcemap_cli::commands::{cmd_route, cmd_scale};
use forcemap_cli::harness::{derive_seed, run_trial, run_trials, trial_circuit, trial_seed, PLACEMENT_STREAM};
use forcemap_cli::{InProcess, RunSpec, TopologyShape, TopologySpec};

/// Inter-core uses rise with r for QFT and the adder; see the README.
const KNOWN_FAILURES: [usize; 1] = [7];

const BENCHMARKS: [&str; 4] = ["random:64,40", "qft:32", "qvolume:32,16", "adder:6"];

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn spec(benchmark: &str, topology: TopologySpec, trials: usize) -> RunSpec {
    let mut s = RunSpec::new(benchmark.parse().expect("benchmark parses"), topology);
    s.trials = trials;
    s
}

fn mean(values: &[f64]) -> f64 {
    mean_std(values).0
}

/// Criterion-1 instances: each benchmark on 8x8, seeds 0..50, defaults.
fn correctness_specs() -> Vec<RunSpec> {
    BENCHMARKS.iter().map(|b| spec(b, TopologySpec::grid(8, 8), 50)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (mut total, mut good) = (0, 0);
    let mut failures = Vec::new();
    for s in correctness_specs() {
        let topo = s.topology.build().unwrap();
        let source = s.benchmark.source(topo.num_qubits()).unwrap();
        for i in 0..s.trials {
            total += 1;
            let ok = match run_trial(&s, &source, &topo, s.k[0], s.p[0], s.r[0], i, true) {
                Ok(t) => {
                    let rc = t.routed.as_ref().unwrap();
                    let c = trial_circuit(&source, trial_seed(&s, i));
                    check_legality(rc, &topo).legal == Some(true)
                        && check_permutation_equivalence(&c, rc).map(|r| r.equivalent == Some(true)).unwrap_or(false)
                }
                Err(e) => {
                    failures.push(format!("{} trial {i}: {e}", s.benchmark));
                    false
                }
            };
            good += usize::from(ok);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: good == total && secs < 300.0,
        detail: format!(
            "{good}/{total} routed circuits legal and permutation-equivalent in {secs:.1}s (budget 300s){}",
            if failures.is_empty() { String::new() } else { format!("; first failure: {}", failures[0]) }
        ),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let grids = [Topology::grid(2, 3, 1.0).unwrap(), Topology::grid(3, 3, 1.0).unwrap()];
    let (mut agree, mut worst) = (0, f64::INFINITY);
    let total = 200;
    for i in 0..total as u64 {
        let topo = &grids[i as usize % 2];
        let n = 4 + (i % 3) as u32;
        let c = gen_random(n, 12, 0.5, 1000 + i);
        let initial = Placement::random(n as usize, topo.num_qubits(), 2000 + i).unwrap();
        let cfg = forcemap::router::RouterConfig { seed: i, ..Default::default() };
        let rc = route(&c, topo, initial, &cfg).unwrap();
        let sv = statevector_oracle(&c, &rc, 10).unwrap();
        let perm = check_permutation_equivalence(&c, &rc).unwrap();
        let overlap = sv.fidelity_overlap.unwrap_or(0.0);
        worst = worst.min(overlap);
        if overlap >= 1.0 - OVERLAP_TOLERANCE && sv.equivalent == Some(true) && perm.equivalent == Some(true) {
            agree += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: agree == total && secs < 120.0,
        detail: format!(
            "{agree}/{total} circuits with overlap >= 1-1e-9 and both oracles passing; worst overlap {worst:.15}; {secs:.1}s (budget 120s)"
        ),
    }
}

/// Step-mode traces of every criterion-1 instance: the SWAPs of one
/// iteration are qubit-disjoint, form exactly one layer on their own and
/// raise the depth of the routed prefix by at most one.
fn criterion_3() -> Outcome {
    let (mut iterations, mut swap_iterations, mut bad) = (0usize, 0usize, Vec::new());
    for s in correctness_specs() {
        let topo = s.topology.build().unwrap();
        let source = s.benchmark.source(topo.num_qubits()).unwrap();
        for i in 0..s.trials {
            let seed = trial_seed(&s, i);
            let c = trial_circuit(&source, seed);
            let initial =
                Placement::random(c.num_qubits() as usize, topo.num_qubits(), derive_seed(seed, PLACEMENT_STREAM)).unwrap();
            let cfg = s.config(s.k[0], s.p[0], s.r[0], seed);
            let expected: RoutedCircuit = route(&c, &topo, initial.clone(), &cfg).unwrap();
            let mut router = Router::new(&c, &topo, initial, cfg).unwrap();
            let mut sched = AsapSchedule::new(topo.num_qubits());
            let mut emitted = Vec::new();
            while let Some(step) = router.step().unwrap() {
                iterations += 1;
                for g in step.executed {
                    sched.push(g.qubits().iter().map(|q| q.index()));
                }
                emitted.extend_from_slice(step.executed);
                if step.swaps.is_empty() {
                    continue;
                }
                swap_iterations += 1;
                let before = sched.depth();
                let mut block = AsapSchedule::new(topo.num_qubits());
                for g in step.swaps {
                    block.push(g.qubits().iter().map(|q| q.index()));
                    sched.push(g.qubits().iter().map(|q| q.index()));
                }
                let grew = sched.depth() - before;
                if block.depth() != 1 || grew > 1 {
                    bad.push(format!("{} seed {seed} iteration {}: block depth {}, prefix grew {grew}", s.benchmark, step.index, block.depth()));
                }
                emitted.extend_from_slice(step.swaps);
            }
            if emitted != expected.gates() {
                bad.push(format!("{} seed {seed}: step trace differs from route()", s.benchmark));
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "{swap_iterations} SWAP iterations of {iterations} checked, {} violations{}",
            bad.len(),
            bad.first().map_or(String::new(), |b| format!("; first: {b}"))
        ),
    }
}

fn mean_metric(s: &RunSpec, k: usize, p: f64, r: f64, f: fn(&forcemap::metrics::MetricsReport) -> f64) -> f64 {
    let topo = s.topology.build().unwrap();
    let source = s.benchmark.source(topo.num_qubits()).unwrap();
    let results = run_trials(s, &source, &topo, k, p, r, false).unwrap();
    mean(&results.iter().map(|t| f(&t.report)).collect::<Vec<_>>())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let s = spec("adder:6", TopologySpec::grid(16, 16), 20);
    let d0 = mean_metric(&s, 0, 0.0, 0.0, |r| r.depth as f64);
    let d4 = mean_metric(&s, 4, 0.0, 0.0, |r| r.depth as f64);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: d4 < d0 && secs < 600.0,
        detail: format!("adder(6) on 16x16, 20 seeds: mean depth k=4 {d4:.2} vs k=0 {d0:.2}; {secs:.1}s (budget 600s)"),
    }
}

/// Compile times are sampled round-robin over p, so machine-speed drift
/// lands on every p alike; each (p, seed) keeps the median of its samples.
fn criterion_5() -> Outcome {
    const REPEATS: usize = 15;
    let s = spec("random:64,40", TopologySpec::grid(16, 16), 20);
    let topo = s.topology.build().unwrap();
    let source = s.benchmark.source(topo.num_qubits()).unwrap();
    let ps: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let swaps: Vec<f64> = ps.iter().map(|&p| mean_metric(&s, 1, p, 0.0, |r| r.swaps_added as f64)).collect();
    let jobs: Vec<_> = (0..s.trials)
        .map(|i| {
            let seed = trial_seed(&s, i);
            let c = trial_circuit(&source, seed).into_owned();
            let initial =
                Placement::random(c.num_qubits() as usize, topo.num_qubits(), derive_seed(seed, PLACEMENT_STREAM)).unwrap();
            (c, initial, seed)
        })
        .collect();
    let mut samples = vec![vec![Vec::with_capacity(REPEATS); jobs.len()]; ps.len()];
    for _ in 0..REPEATS {
        for (j, (c, initial, seed)) in jobs.iter().enumerate() {
            for (pi, &p) in ps.iter().enumerate() {
                let cfg = s.config(1, p, 0.0, *seed);
                let start = Instant::now();
                std::hint::black_box(route(c, &topo, initial.clone(), &cfg).unwrap());
                samples[pi][j].push(start.elapsed().as_secs_f64());
            }
        }
    }
    let times: Vec<f64> = samples
        .iter_mut()
        .map(|per_seed| {
            mean(&per_seed
                .iter_mut()
                .map(|v| {
                    v.sort_by(f64::total_cmp);
                    v[v.len() / 2]
                })
                .collect::<Vec<_>>())
        })
        .collect();
    let (lo, hi) = times.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    let spread = (hi - lo) / lo;
    let (s0, s1) = (swaps[0], swaps[10]);
    Outcome {
        pass: s1 <= s0 && spread < 0.2,
        detail: format!(
            "random(64) on 16x16, k=1, 20 seeds: mean SWAPs p=1.0 {s1:.2} vs p=0.0 {s0:.2}; \
             mean compile time (ms) over p=0..1 step 0.1 {:?}, (max-min)/min = {:.1}% (limit 20%)",
            times.iter().map(|t| (t * 1e6).round() / 1e3).collect::<Vec<_>>(),
            spread * 100.0
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut topo = TopologySpec::grid(16, 16);
    topo.fidelities = Some((0.999, 0.9999));
    let mut wins = 0;
    let mut parts = Vec::new();
    for b in BENCHMARKS {
        let s = spec(b, topo.clone(), 50);
        let e0 = mean_metric(&s, 1, 0.0, 0.0, |r| r.esp);
        let e10 = mean_metric(&s, 1, 0.0, 10.0, |r| r.esp);
        wins += usize::from(e10 >= e0);
        parts.push(format!("{b} ESP r=0 {e0:.6} r=10 {e10:.6}"));
    }
    Outcome { pass: wins >= 3, detail: format!("{wins}/4 benchmarks with ESP(r=10) >= ESP(r=0): {}", parts.join("; ")) }
}

fn criterion_7() -> Outcome {
    let shape: TopologyShape = "multicore:4,4,4,4,0.98".parse().unwrap();
    let rs = [0.0, 5.0, 10.0, 25.0, 50.0];
    let mut all_pass = true;
    let mut parts = Vec::new();
    for b in BENCHMARKS {
        let s = spec(b, TopologySpec::new(shape.clone()), 50);
        let topo = s.topology.build().unwrap();
        let source = s.benchmark.source(topo.num_qubits()).unwrap();
        let mut uses = Vec::new();
        let mut split = Vec::new();
        for &r in &rs {
            let (mut u, mut sw, mut orig) = (Vec::new(), 0usize, 0usize);
            for i in 0..s.trials {
                let t = run_trial(&s, &source, &topo, 1, 0.0, r, i, true).unwrap();
                u.push(t.report.inter_core_uses.unwrap() as f64);
                for g in t.routed.unwrap().gates() {
                    let Some((a, q)) = g.pair() else { continue };
                    if topo.core_of(a) != topo.core_of(q) {
                        if g.is_swap() {
                            sw += 1
                        } else {
                            orig += 1
                        }
                    }
                }
            }
            uses.push(mean(&u));
            split.push(format!("{:.1}+{:.1}", sw as f64 / s.trials as f64, orig as f64 / s.trials as f64));
        }
        let banded = uses.windows(2).all(|w| w[1] <= w[0] * 1.05);
        let lower = uses[4] < uses[0];
        all_pass &= banded && lower;
        parts.push(format!(
            "{b} {} [{}] uses {:?} (swaps+gates {})",
            if banded && lower { "ok" } else { "violates" },
            if banded { "banded" } else { "rises >5%" },
            uses.iter().map(|u| (u * 100.0).round() / 100.0).collect::<Vec<_>>(),
            split.join(", ")
        ));
    }
    Outcome { pass: all_pass, detail: format!("mean inter-core uses over r = {rs:?}: {}", parts.join("; ")) }
}

fn criterion_8() -> Outcome {
    let sizes = [(10, 10), (20, 20), (40, 40), (70, 70), (100, 100)];
    let s = spec("qft", TopologySpec::grid(10, 10), 1);
    let out = cmd_scale(&s, &sizes, &InProcess).unwrap();
    let mut parts = Vec::new();
    let mut all_ok = true;
    let mut last_time = f64::INFINITY;
    for row in &out.rows {
        match &row.outcome {
            Ok(m) => {
                let t = m.aggregate.compile_time.unwrap().mean;
                last_time = t;
                parts.push(format!("{}x{} {:.3}s", row.rows, row.cols, t));
            }
            Err(e) => {
                all_ok = false;
                parts.push(format!("{}x{} failed: {e}", row.rows, row.cols));
            }
        }
    }
    let slope = out.slope.unwrap_or(f64::NAN);
    Outcome {
        pass: all_ok && (1.0..=4.0).contains(&slope) && last_time < 7200.0,
        detail: format!("QFT compile times {}; log-log slope {slope:.3} (band [1, 4]); 100x100 budget 7200s", parts.join(", ")),
    }
}

fn criterion_9() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_forcemap");
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    let mut bytes = 0;
    for (idx, s) in correctness_specs().iter().enumerate() {
        let mut lib = s.clone();
        lib.timing = false;
        let reference = cmd_route(&lib, false).unwrap().artifact.to_csv();
        for (run, threads) in [(1, "1"), (2, "1"), (3, "2")] {
            let path = dir.path().join(format!("c{idx}_run{run}.csv"));
            let status = Command::new(exe)
                .args(["--threads", threads, "route", "--topology", "grid:8x8", "--trials", "50", "--seed", "0", "--no-timing"])
                .arg(format!("--benchmark={}", s.benchmark))
                .arg("--out")
                .arg(&path)
                .status()
                .unwrap();
            let got = std::fs::read(&path).unwrap_or_default();
            bytes += got.len();
            if !status.success() || got != reference.as_bytes() {
                mismatches.push(format!("{} run {run} ({threads} threads)", s.benchmark));
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "12 CLI reruns ({bytes} bytes) compared with the in-process artifacts: {} mismatches{}",
            mismatches.len(),
            mismatches.first().map_or(String::new(), |m| format!("; first: {m}"))
        ),
    }
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 9] = [
        (1, "correctness gate", criterion_1),
        (2, "oracle agreement", criterion_2),
        (3, "parallel-SWAP depth law", criterion_3),
        (4, "lookahead trend on the adder", criterion_4),
        (5, "penalization trend", criterion_5),
        (6, "fidelity-aware routing", criterion_6),
        (7, "inter-core avoidance", criterion_7),
        (8, "scaling", criterion_8),
        (9, "determinism", criterion_9),
    ];
    let strict = std::env::var("FORCEMAP_STRICT").is_ok_and(|v| v == "1");
    let (mut failed, mut known, mut fixed) = (Vec::new(), Vec::new(), Vec::new());
    for (n, title, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome { pass: false, detail: format!("panicked: {}", msg.unwrap_or_default()) }
        });
        let expected_fail = KNOWN_FAILURES.contains(&n);
        let verdict = match (outcome.pass, expected_fail) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as a known failure)",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
        };
        println!("criterion {n} {verdict}: {title}: {} [{:.1}s]", outcome.detail, start.elapsed().as_secs_f64());
        match (outcome.pass, expected_fail) {
            (false, true) if !strict => known.push(n),
            (false, _) => failed.push(n),
            (true, true) => fixed.push(n),
            (true, false) => {}
        }
    }
    if !known.is_empty() {
        println!("acceptance: known failures {known:?}");
    }
    if !fixed.is_empty() {
        println!("acceptance: criteria {fixed:?} now pass; remove them from KNOWN_FAILURES");
    }
    if failed.is_empty() && fixed.is_empty() {
        println!("acceptance: no unexpected results");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

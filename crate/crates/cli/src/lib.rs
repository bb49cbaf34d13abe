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

//! Experiment harness around the `forcemap` router: seeded trials, design
//! space sweeps, fidelity-exponent sweeps and scaling runs, written as CSV or
//! JSON artifacts.

pub mod artifact;
pub mod commands;
pub mod harness;
pub mod spec;

use forcemap::router::RouteError;
use thiserror::Error;

pub use artifact::Artifact;
pub use commands::{cmd_route, cmd_rsweep, cmd_scale, cmd_sweep, cmd_verify, InProcess, ScaleRow, SizeRunner};
pub use harness::{run_trial, run_trials, Aggregate, Summary, TrialResult};
pub use spec::{BenchmarkSpec, CircuitSource, Format, RunSpec, TopologyShape, TopologySpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("trial {trial} (seed {seed}) failed verification: {reason}")]
    Verification { trial: usize, seed: u64, reason: String },
    #[error("trial {trial} (seed {seed}): {source}")]
    Route { trial: usize, seed: u64, source: RouteError },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// 1 for verification or convergence failures, 2 for usage and input
    /// errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Verification { .. } => 1,
            HarnessError::Route { source: RouteError::NoConvergence { .. }, .. } => 1,
            _ => 2,
        }
    }
}

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

//! SWAP routing for restricted-connectivity quantum processors driven by
//! geometric attraction forces.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix it to one of the two.

pub mod circuit;
pub mod dag;
pub mod metrics;
pub mod router;
pub mod scalar;
pub mod topology;
pub mod verify;

pub use circuit::{Circuit, Gate, GateId, GateKind, VirtualQubit};
pub use dag::OpDag;
pub use router::{route, Placement, RoutedCircuit, RoutedGate, Router, WeightMode};
pub use scalar::Scalar;
pub use topology::{PhysicalQubit, Topology};

pub type Topology64 = topology::Topology<f64>;
pub type Topology32 = topology::Topology<f32>;
pub type RouterConfig64 = router::RouterConfig<f64>;
pub type RouterConfig32 = router::RouterConfig<f32>;
pub type ForceField64 = router::ForceField<f64>;
pub type ForceField32 = router::ForceField<f32>;

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

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::VirtualQubit;
use crate::topology::PhysicalQubit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlacementError {
    #[error("{virtual_count} virtual qubits do not fit on {physical_count} physical qubits")]
    TooManyVirtual { virtual_count: usize, physical_count: usize },
    #[error("virtual qubit {virt} placed on {phys}, outside 0..{physical_count}")]
    OutOfRange { virt: VirtualQubit, phys: PhysicalQubit, physical_count: usize },
    #[error("virtual qubits {first} and {second} both placed on {phys}")]
    NotInjective { first: VirtualQubit, second: VirtualQubit, phys: PhysicalQubit },
}

/// Injective assignment of virtual to physical qubits, kept in both
/// directions. Physical qubits holding no virtual qubit map to `None`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlacementRepr", into = "PlacementRepr")]
pub struct Placement {
    virt_to_phys: Vec<PhysicalQubit>,
    phys_to_virt: Vec<Option<VirtualQubit>>,
}

impl Placement {
    pub fn new(virt_to_phys: Vec<PhysicalQubit>, num_physical: usize) -> Result<Self, PlacementError> {
        if virt_to_phys.len() > num_physical {
            return Err(PlacementError::TooManyVirtual {
                virtual_count: virt_to_phys.len(),
                physical_count: num_physical,
            });
        }
        let mut phys_to_virt = vec![None; num_physical];
        for (v, &p) in virt_to_phys.iter().enumerate() {
            let virt = VirtualQubit(v as u32);
            let slot = phys_to_virt
                .get_mut(p.index())
                .ok_or(PlacementError::OutOfRange { virt, phys: p, physical_count: num_physical })?;
            if let Some(first) = *slot {
                return Err(PlacementError::NotInjective { first, second: virt, phys: p });
            }
            *slot = Some(virt);
        }
        Ok(Placement { virt_to_phys, phys_to_virt })
    }

    /// Virtual qubit `i` on physical qubit `i`.
    pub fn identity(num_virtual: usize, num_physical: usize) -> Result<Self, PlacementError> {
        Self::new((0..num_virtual as u32).map(PhysicalQubit).collect(), num_physical)
    }

    /// Uniformly random injective placement, deterministic per seed.
    pub fn random(num_virtual: usize, num_physical: usize, seed: u64) -> Result<Self, PlacementError> {
        if num_virtual > num_physical {
            return Err(PlacementError::TooManyVirtual {
                virtual_count: num_virtual,
                physical_count: num_physical,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut slots: Vec<PhysicalQubit> = (0..num_physical as u32).map(PhysicalQubit).collect();
        slots.shuffle(&mut rng);
        slots.truncate(num_virtual);
        Self::new(slots, num_physical)
    }

    #[inline]
    pub fn num_virtual(&self) -> usize {
        self.virt_to_phys.len()
    }

    #[inline]
    pub fn num_physical(&self) -> usize {
        self.phys_to_virt.len()
    }

    #[inline]
    pub fn phys(&self, v: VirtualQubit) -> PhysicalQubit {
        self.virt_to_phys[v.index()]
    }

    #[inline]
    pub fn virt(&self, p: PhysicalQubit) -> Option<VirtualQubit> {
        self.phys_to_virt[p.index()]
    }

    pub fn virt_to_phys(&self) -> &[PhysicalQubit] {
        &self.virt_to_phys
    }

    pub fn phys_to_virt(&self) -> &[Option<VirtualQubit>] {
        &self.phys_to_virt
    }

    /// Exchanges the contents of two physical qubits.
    pub fn swap_physical(&mut self, a: PhysicalQubit, b: PhysicalQubit) {
        self.phys_to_virt.swap(a.index(), b.index());
        if let Some(v) = self.phys_to_virt[a.index()] {
            self.virt_to_phys[v.index()] = a;
        }
        if let Some(v) = self.phys_to_virt[b.index()] {
            self.virt_to_phys[v.index()] = b;
        }
    }

    /// Both tables are mutually inverse.
    pub fn is_consistent(&self) -> bool {
        let forward = self
            .virt_to_phys
            .iter()
            .enumerate()
            .all(|(v, p)| self.phys_to_virt.get(p.index()) == Some(&Some(VirtualQubit(v as u32))));
        let occupied = self.phys_to_virt.iter().filter(|s| s.is_some()).count();
        forward && occupied == self.virt_to_phys.len()
    }
}

#[derive(Serialize, Deserialize)]
struct PlacementRepr {
    num_physical: usize,
    virt_to_phys: Vec<PhysicalQubit>,
}

impl TryFrom<PlacementRepr> for Placement {
    type Error = PlacementError;

    fn try_from(r: PlacementRepr) -> Result<Self, Self::Error> {
        Placement::new(r.virt_to_phys, r.num_physical)
    }
}

impl From<Placement> for PlacementRepr {
    fn from(p: Placement) -> Self {
        PlacementRepr { num_physical: p.num_physical(), virt_to_phys: p.virt_to_phys }
    }
}

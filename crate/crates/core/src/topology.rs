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

//! Coupling graphs with integer 2D geometry and per-link fidelities.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// A node of the device coupling graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhysicalQubit(pub u32);

impl PhysicalQubit {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PhysicalQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

/// Index into [`Topology::edges`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// 2D integer coordinates of a physical qubit, `(x, y)`.
pub type Coord = [i32; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<T> {
    /// Smaller endpoint.
    pub a: PhysicalQubit,
    pub b: PhysicalQubit,
    pub fidelity: T,
}

impl<T> Edge<T> {
    #[inline]
    pub fn other(&self, q: PhysicalQubit) -> PhysicalQubit {
        if q == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// One incident edge as seen from a qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<T> {
    pub qubit: PhysicalQubit,
    pub edge: EdgeId,
    pub fidelity: T,
    /// Neighbor coordinates minus this qubit's coordinates.
    pub vector: Coord,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology needs at least {min} qubits, got {got}")]
    TooSmall { min: usize, got: usize },
    #[error("coupling graph is disconnected ({reached} of {total} qubits reachable from Q0)")]
    Disconnected { reached: usize, total: usize },
    #[error("qubits Q{0} and Q{1} share coordinates")]
    DuplicateCoordinate(u32, u32),
    #[error("edge ({a}, {b}) has fidelity {fidelity} outside (0, 1]")]
    InvalidFidelity { a: u32, b: u32, fidelity: f64 },
    #[error("edge ({0}, {1}) is a self loop")]
    SelfLoop(u32, u32),
    #[error("edge ({0}, {1}) listed twice")]
    DuplicateEdge(u32, u32),
    #[error("edge ({a}, {b}) references a qubit outside 0..{m}")]
    QubitOutOfRange { a: u32, b: u32, m: usize },
    #[error("expected {expected} core labels, got {got}")]
    CoreLabelCount { expected: usize, got: usize },
    #[error("`m` is {m} but {coords} coordinates were given")]
    CoordCount { m: usize, coords: usize },
    #[error("fidelity interval [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("topology has {got} qubits, more than the supported {max}")]
    TooLarge { max: usize, got: usize },
    #[error("topology has no core labels")]
    NoCores,
    #[error("malformed topology file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coupling graph `G(Q, E)` with per-qubit coordinates, per-edge fidelity,
/// optional core labels and the cached hop diameter.
#[derive(Clone, Debug)]
pub struct Topology<T = f64> {
    coords: Vec<Coord>,
    edges: Vec<Edge<T>>,
    adj_start: Vec<u32>,
    adj: Vec<(PhysicalQubit, EdgeId)>,
    cores: Option<Vec<u32>>,
    diameter: u32,
}

impl<T: Scalar> Topology<T> {
    /// Builds and validates a topology from raw parts. The diameter is
    /// computed by breadth-first search from every qubit.
    pub fn new(
        coords: Vec<Coord>,
        edges: Vec<(u32, u32, T)>,
        cores: Option<Vec<u32>>,
    ) -> Result<Self, TopologyError> {
        let mut t = Self::assemble(coords, edges, cores)?;
        t.diameter = t.bfs_diameter();
        Ok(t)
    }

    fn assemble(
        coords: Vec<Coord>,
        raw_edges: Vec<(u32, u32, T)>,
        cores: Option<Vec<u32>>,
    ) -> Result<Self, TopologyError> {
        let m = coords.len();
        if m < 1 {
            return Err(TopologyError::TooSmall { min: 1, got: m });
        }
        if m > crate::router::MAX_PHYSICAL_QUBITS {
            return Err(TopologyError::TooLarge { max: crate::router::MAX_PHYSICAL_QUBITS, got: m });
        }
        let mut seen_coord = std::collections::HashMap::with_capacity(m);
        for (i, c) in coords.iter().enumerate() {
            if let Some(j) = seen_coord.insert(*c, i) {
                return Err(TopologyError::DuplicateCoordinate(j as u32, i as u32));
            }
        }
        if let Some(labels) = &cores {
            if labels.len() != m {
                return Err(TopologyError::CoreLabelCount { expected: m, got: labels.len() });
            }
        }
        let mut seen_edge = HashSet::with_capacity(raw_edges.len());
        let mut edges = Vec::with_capacity(raw_edges.len());
        let mut degree = vec![0u32; m];
        for (a, b, f) in raw_edges {
            if a as usize >= m || b as usize >= m {
                return Err(TopologyError::QubitOutOfRange { a, b, m });
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a, b));
            }
            if !(f > T::zero() && f <= T::one()) {
                return Err(TopologyError::InvalidFidelity { a, b, fidelity: f.to_f64_lossy() });
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if !seen_edge.insert((lo, hi)) {
                return Err(TopologyError::DuplicateEdge(lo, hi));
            }
            degree[lo as usize] += 1;
            degree[hi as usize] += 1;
            edges.push(Edge { a: PhysicalQubit(lo), b: PhysicalQubit(hi), fidelity: f });
        }

        let mut adj_start = Vec::with_capacity(m + 1);
        let mut acc = 0u32;
        adj_start.push(0);
        for d in &degree {
            acc += d;
            adj_start.push(acc);
        }
        let mut fill: Vec<u32> = adj_start[..m].to_vec();
        let mut adj = vec![(PhysicalQubit(0), EdgeId(0)); acc as usize];
        for (i, e) in edges.iter().enumerate() {
            for (from, to) in [(e.a, e.b), (e.b, e.a)] {
                adj[fill[from.index()] as usize] = (to, EdgeId(i as u32));
                fill[from.index()] += 1;
            }
        }

        let t = Topology { coords, edges, adj_start, adj, cores, diameter: 0 };
        let reached = t.bfs_distances(PhysicalQubit(0)).iter().filter(|d| d.is_some()).count();
        if reached != m {
            return Err(TopologyError::Disconnected { reached, total: m });
        }
        Ok(t)
    }

    /// `rows x cols` grid. Qubit `(r, c)` has index `r * cols + c` and
    /// coordinates `(c, r)`.
    pub fn grid(rows: u32, cols: u32, fidelity: T) -> Result<Self, TopologyError> {
        Self::tiled(rows, cols, None, |_, _| fidelity)
    }

    /// `cores_y x cores_x` cores of `core_rows x core_cols` qubits each, tiled
    /// contiguously on one global grid. Links whose endpoints lie in different
    /// cores carry `inter_f`, all others `intra_f`.
    pub fn multicore(
        core_rows: u32,
        core_cols: u32,
        cores_x: u32,
        cores_y: u32,
        intra_f: T,
        inter_f: T,
    ) -> Result<Self, TopologyError> {
        let rows = core_rows * cores_y;
        let cols = core_cols * cores_x;
        let label = |q: u32| {
            let (r, c) = (q / cols, q % cols);
            (r / core_rows.max(1)) * cores_x + c / core_cols.max(1)
        };
        let cores: Vec<u32> = (0..rows * cols).map(label).collect();
        Self::tiled(rows, cols, Some(cores), |a, b| if label(a) == label(b) { intra_f } else { inter_f })
    }

    fn tiled(
        rows: u32,
        cols: u32,
        cores: Option<Vec<u32>>,
        fidelity: impl Fn(u32, u32) -> T,
    ) -> Result<Self, TopologyError> {
        let m = (rows as usize) * (cols as usize);
        if m < 2 {
            return Err(TopologyError::TooSmall { min: 2, got: m });
        }
        let mut coords = Vec::with_capacity(m);
        let mut edges = Vec::with_capacity(2 * m);
        for r in 0..rows {
            for c in 0..cols {
                let q = r * cols + c;
                coords.push([c as i32, r as i32]);
                if c + 1 < cols {
                    edges.push((q, q + 1, fidelity(q, q + 1)));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols, fidelity(q, q + cols)));
                }
            }
        }
        let mut t = Self::assemble(coords, edges, cores)?;
        t.diameter = (rows - 1) + (cols - 1);
        Ok(t)
    }

    /// Copy with every link fidelity drawn uniformly from `[lo, hi]`.
    pub fn with_random_fidelities(&self, lo: f64, hi: f64, seed: u64) -> Result<Self, TopologyError> {
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(TopologyError::InvalidInterval { lo, hi });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for e in &mut out.edges {
            let f = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
            e.fidelity = T::of(f);
        }
        Ok(out)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self, q: PhysicalQubit) -> Coord {
        self.coords[q.index()]
    }

    #[inline]
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> &Edge<T> {
        &self.edges[e.index()]
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Longest shortest path, in hops.
    #[inline]
    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    #[inline]
    fn incident(&self, q: PhysicalQubit) -> &[(PhysicalQubit, EdgeId)] {
        let (s, e) = (self.adj_start[q.index()], self.adj_start[q.index() + 1]);
        &self.adj[s as usize..e as usize]
    }

    pub fn degree(&self, q: PhysicalQubit) -> usize {
        self.incident(q).len()
    }

    /// Incident edges of `q` with fidelity and edge vector.
    pub fn neighbors(&self, q: PhysicalQubit) -> impl ExactSizeIterator<Item = Neighbor<T>> + '_ {
        let here = self.coords(q);
        self.incident(q).iter().map(move |&(nb, edge)| {
            let there = self.coords(nb);
            Neighbor {
                qubit: nb,
                edge,
                fidelity: self.edges[edge.index()].fidelity,
                vector: [there[0] - here[0], there[1] - here[1]],
            }
        })
    }

    pub fn edge_between(&self, a: PhysicalQubit, b: PhysicalQubit) -> Option<EdgeId> {
        self.incident(a).iter().find(|(nb, _)| *nb == b).map(|&(_, e)| e)
    }

    #[inline]
    pub fn are_adjacent(&self, a: PhysicalQubit, b: PhysicalQubit) -> bool {
        self.edge_between(a, b).is_some()
    }

    pub fn cores(&self) -> Option<&[u32]> {
        self.cores.as_deref()
    }

    pub fn core_of(&self, q: PhysicalQubit) -> Option<u32> {
        self.cores.as_ref().map(|c| c[q.index()])
    }

    /// Whether the edge joins two different cores. `None` without core labels.
    pub fn is_inter_core(&self, e: EdgeId) -> Option<bool> {
        let cores = self.cores.as_ref()?;
        let edge = &self.edges[e.index()];
        Some(cores[edge.a.index()] != cores[edge.b.index()])
    }

    pub fn num_inter_core_edges(&self) -> usize {
        (0..self.edges.len()).filter(|&i| self.is_inter_core(EdgeId(i as u32)) == Some(true)).count()
    }

    /// Hop distances from `source`; `None` for unreachable qubits.
    pub fn bfs_distances(&self, source: PhysicalQubit) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.num_qubits()];
        let mut queue = VecDeque::new();
        dist[source.index()] = Some(0);
        queue.push_back(source);
        while let Some(q) = queue.pop_front() {
            let d = dist[q.index()].expect("queued qubits have a distance");
            for &(nb, _) in self.incident(q) {
                if dist[nb.index()].is_none() {
                    dist[nb.index()] = Some(d + 1);
                    queue.push_back(nb);
                }
            }
        }
        dist
    }

    /// Exact diameter by breadth-first search from every qubit.
    pub fn bfs_diameter(&self) -> u32 {
        let m = self.num_qubits();
        let mut dist = vec![u32::MAX; m];
        let mut queue = VecDeque::with_capacity(m);
        let mut best = 0;
        for s in 0..m {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[s] = 0;
            queue.push_back(s as u32);
            while let Some(q) = queue.pop_front() {
                let d = dist[q as usize];
                best = best.max(d);
                for &(nb, _) in self.incident(PhysicalQubit(q)) {
                    if dist[nb.index()] == u32::MAX {
                        dist[nb.index()] = d + 1;
                        queue.push_back(nb.0);
                    }
                }
            }
        }
        best
    }

    pub fn to_file(&self) -> TopologyFile {
        TopologyFile {
            m: self.num_qubits(),
            coords: self.coords.clone(),
            edges: self.edges.iter().map(|e| (e.a.0, e.b.0, e.fidelity.to_f64_lossy())).collect(),
            cores: self.cores.clone(),
        }
    }

    pub fn from_file(file: TopologyFile) -> Result<Self, TopologyError> {
        if file.coords.len() != file.m {
            return Err(TopologyError::CoordCount { m: file.m, coords: file.coords.len() });
        }
        let edges = file.edges.into_iter().map(|(a, b, f)| (a, b, T::of(f))).collect();
        Self::new(file.coords, edges, file.cores)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("topology serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        Self::from_file(serde_json::from_str(text)?)
    }
}

/// On-disk topology: `{"m": .., "coords": [[x,y],..], "edges": [[a,b,F],..], "cores": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    pub m: usize,
    pub coords: Vec<Coord>,
    pub edges: Vec<(u32, u32, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cores: Option<Vec<u32>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: u32) -> Topology {
        let coords = (0..n as i32).map(|i| [i, 0]).collect();
        let edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Topology::new(coords, edges, None).unwrap()
    }

    #[test]
    fn grid_shapes() {
        let t = Topology::<f64>::grid(4, 4, 1.0).unwrap();
        assert_eq!((t.num_qubits(), t.num_edges(), t.diameter()), (16, 24, 6));
        let t = Topology::<f64>::grid(16, 16, 1.0).unwrap();
        assert_eq!((t.num_qubits(), t.diameter()), (256, 30));
        let t = Topology::<f64>::grid(1, 2, 1.0).unwrap();
        assert_eq!((t.num_edges(), t.diameter()), (1, 1));
        assert!(Topology::<f64>::grid(1, 1, 1.0).is_err());
    }

    #[test]
    fn grid_diameter_matches_bfs() {
        for rows in 1..7 {
            for cols in 1..7 {
                if rows * cols < 2 {
                    continue;
                }
                let t = Topology::<f32>::grid(rows, cols, 1.0).unwrap();
                assert_eq!(t.diameter(), t.bfs_diameter());
                assert_eq!(t.diameter(), rows - 1 + cols - 1);
            }
        }
        assert_eq!(Topology::<f64>::grid(8, 8, 1.0).unwrap().bfs_diameter(), 14);
    }

    #[test]
    fn general_diameters() {
        assert_eq!(line(5).diameter(), 4);
        let coords = vec![[0, 0], [1, 0], [0, 1], [1, 1]];
        let edges = vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)];
        assert_eq!(Topology::<f64>::new(coords, edges, None).unwrap().diameter(), 1);
    }

    #[test]
    fn neighbors_of_interior_and_corner() {
        let t = Topology::<f64>::grid(3, 3, 1.0).unwrap();
        let mut v: Vec<Coord> = t.neighbors(PhysicalQubit(4)).map(|n| n.vector).collect();
        v.sort();
        assert_eq!(v, vec![[-1, 0], [0, -1], [0, 1], [1, 0]]);
        assert_eq!(t.neighbors(PhysicalQubit(0)).len(), 2);
        for n in t.neighbors(PhysicalQubit(4)) {
            assert_eq!(t.edge(n.edge).other(PhysicalQubit(4)), n.qubit);
        }
    }

    #[test]
    fn rejects_invalid_graphs() {
        let e = Topology::<f64>::new(vec![[0, 0], [1, 0], [2, 0]], vec![(0, 1, 1.0)], None);
        assert!(matches!(e, Err(TopologyError::Disconnected { reached: 2, total: 3 })));
        let e = Topology::<f64>::new(vec![[0, 0], [0, 0]], vec![(0, 1, 1.0)], None);
        assert!(matches!(e, Err(TopologyError::DuplicateCoordinate(0, 1))));
        let e = Topology::<f64>::new(vec![[0, 0], [1, 0]], vec![(0, 1, 0.0)], None);
        assert!(matches!(e, Err(TopologyError::InvalidFidelity { .. })));
        let e = Topology::<f64>::new(vec![[0, 0], [1, 0]], vec![(0, 1, 1.5)], None);
        assert!(matches!(e, Err(TopologyError::InvalidFidelity { .. })));
        let e = Topology::<f64>::new(vec![[0, 0], [1, 0]], vec![(0, 1, 1.0), (1, 0, 1.0)], None);
        assert!(matches!(e, Err(TopologyError::DuplicateEdge(0, 1))));
        let e = Topology::<f64>::new(vec![[0, 0], [1, 0]], vec![(0, 2, 1.0)], None);
        assert!(matches!(e, Err(TopologyError::QubitOutOfRange { .. })));
    }

    #[test]
    fn multicore_four_by_four_cores() {
        let t = Topology::<f64>::multicore(4, 4, 4, 4, 1.0, 0.98).unwrap();
        assert_eq!(t.num_qubits(), 256);
        let labels: HashSet<u32> = t.cores().unwrap().iter().copied().collect();
        assert_eq!(labels.len(), 16);
        assert_eq!(t.num_inter_core_edges(), 4 * 3 * 4 + 4 * 3 * 4);
        for (i, e) in t.edges().iter().enumerate() {
            let inter = t.is_inter_core(EdgeId(i as u32)).unwrap();
            assert_eq!(e.fidelity, if inter { 0.98 } else { 1.0 });
        }
    }

    #[test]
    fn multicore_degenerate_and_pair() {
        let mc = Topology::<f64>::multicore(3, 5, 1, 1, 1.0, 0.5).unwrap();
        let g = Topology::<f64>::grid(3, 5, 1.0).unwrap();
        assert_eq!(mc.edges(), g.edges());
        assert_eq!(mc.diameter(), g.diameter());
        assert_eq!((0..15).map(|q| mc.coords(PhysicalQubit(q))).collect::<Vec<_>>(),
                   (0..15).map(|q| g.coords(PhysicalQubit(q))).collect::<Vec<_>>());
        let pair = Topology::<f64>::multicore(1, 2, 2, 1, 1.0, 0.98).unwrap();
        assert_eq!(pair.num_inter_core_edges(), 1);
        let boundary = PhysicalQubit(1);
        assert!(pair.neighbors(boundary).any(|n| n.qubit == PhysicalQubit(2) && n.fidelity == 0.98));
    }

    #[test]
    fn inter_core_count_formula() {
        for (cr, cc, cx, cy) in [(2, 3, 3, 2), (4, 4, 4, 4), (1, 1, 5, 2), (3, 2, 1, 4)] {
            let t = Topology::<f64>::multicore(cr, cc, cx, cy, 1.0, 0.9).unwrap();
            let expected = cy * (cx - 1) * cr + cx * (cy - 1) * cc;
            assert_eq!(t.num_inter_core_edges() as u32, expected);
            assert_eq!(t.diameter(), t.bfs_diameter());
            for e in t.edges() {
                let (pa, pb) = (t.coords(e.a), t.coords(e.b));
                assert_eq!((pa[0] - pb[0]).abs() + (pa[1] - pb[1]).abs(), 1);
            }
        }
    }

    #[test]
    fn random_fidelities() {
        let t = Topology::<f64>::grid(4, 4, 1.0).unwrap();
        let same = t.with_random_fidelities(0.99, 0.99, 3).unwrap();
        assert!(same.edges().iter().all(|e| e.fidelity == 0.99));
        let a = t.with_random_fidelities(0.999, 0.9999, 5).unwrap();
        let b = t.with_random_fidelities(0.999, 0.9999, 5).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert!(t.with_random_fidelities(0.5, 0.4, 0).is_err());
        assert!(t.with_random_fidelities(0.0, 0.4, 0).is_err());

        // 23 x 23 grid has 1012 edges.
        let big = Topology::<f64>::grid(23, 23, 1.0).unwrap().with_random_fidelities(0.999, 0.9999, 1).unwrap();
        assert!(big.num_edges() >= 1000);
        let mean = big.edges().iter().map(|e| e.fidelity).sum::<f64>() / big.num_edges() as f64;
        assert!((0.9992..=0.9997).contains(&mean), "{mean}");
        assert!(big.edges().iter().all(|e| (0.999..=0.9999).contains(&e.fidelity)));
    }

    #[test]
    fn json_round_trip() {
        let t = Topology::<f64>::multicore(2, 2, 2, 1, 1.0, 0.98).unwrap();
        let back = Topology::<f64>::from_json(&t.to_json()).unwrap();
        assert_eq!(back.edges(), t.edges());
        assert_eq!(back.cores(), t.cores());
        assert_eq!(back.diameter(), t.diameter());
        let text = r#"{"m": 3, "coords": [[0,0],[1,0],[2,0]], "edges": [[0,1,1.0],[1,2,0.9]]}"#;
        let t = Topology::<f32>::from_json(text).unwrap();
        assert_eq!(t.diameter(), 2);
        assert!(t.cores().is_none());
        assert!(matches!(
            Topology::<f64>::from_json(r#"{"m": 2, "coords": [[0,0]], "edges": []}"#),
            Err(TopologyError::CoordCount { .. })
        ));
    }
}

//! Combinatorial shortcuts for Betti numbers of surfaces.
//!
//! The edge-incidence map `delta` counts the triangles on every edge. From it
//! the engine reads the number of boundary edges (one incident triangle) and
//! of non-manifold edges (zero or three or more). Boundary loops are the
//! connected components of the boundary-edge graph; their count is updated
//! by retracing only the components that touch an edited vertex.

use crate::hash::{HashMap, HashSet};
use std::str::FromStr;

use crate::complex::{EditEvent, SimplicialComplex};
use crate::simplex::{Simplex, Vertex};

/// Which gates a workload may use. Each flag is an assumption the caller
/// makes about every state of the complex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GateConfig {
    /// The complex is always connected.
    pub beta0: bool,
    /// The complex is always a triangulated surface; β₂ follows from the
    /// boundary-edge count.
    pub beta2: bool,
    /// The complex is always a connected genus-0 surface; β₁ follows from
    /// the boundary-loop count.
    pub beta1_genus0: bool,
}

impl GateConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        Self {
            beta0: true,
            beta2: true,
            beta1_genus0: true,
        }
    }

    pub fn any(&self) -> bool {
        self.beta0 || self.beta2 || self.beta1_genus0
    }

    fn surface(&self) -> bool {
        self.beta2 || self.beta1_genus0
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.beta0 {
            out.push("beta0");
        }
        if self.beta2 {
            out.push("beta2");
        }
        if self.beta1_genus0 {
            out.push("beta1-genus0");
        }
        out
    }
}

impl FromStr for GateConfig {
    type Err = String;

    /// Comma-separated list of `beta0`, `beta2`, `beta1-genus0`, or `none`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut g = GateConfig::none();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "none" => {}
                "beta0" => g.beta0 = true,
                "beta2" => g.beta2 = true,
                "beta1-genus0" | "beta1" => g.beta1_genus0 = true,
                other => return Err(format!("unknown gate {other:?}")),
            }
        }
        Ok(g)
    }
}

/// Counters backing the gates.
#[derive(Clone, Debug, Default)]
pub struct GateState {
    pub config: GateConfig,
    /// Edge → number of incident triangles.
    delta: HashMap<Simplex, u32>,
    pub boundary_edge_count: usize,
    pub nonmanifold_edge_count: usize,
    /// Set once the complex stops looking like a surface; cleared only by a
    /// resync that finds it is one again.
    pub nonmanifold_seen: bool,
    /// Number of boundary loops.
    pub loops: usize,
    /// Gates found to disagree with the matrix answer at the last resync.
    pub disabled: [bool; 3],
}

fn is_boundary(c: u32) -> bool {
    c == 1
}

fn is_nonmanifold(c: u32) -> bool {
    c == 0 || c >= 3
}

impl GateState {
    pub fn new(config: GateConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }

    /// Incident-triangle count of an edge.
    pub fn degree(&self, edge: &Simplex) -> Option<u32> {
        self.delta.get(edge).copied()
    }

    /// Recounts everything from scratch.
    pub fn resync(&mut self, k: &SimplicialComplex) {
        self.delta.clear();
        self.delta
            .extend(k.cells(1).iter().map(|e| (*e, k.cofaces(e).len() as u32)));
        self.boundary_edge_count = self.delta.values().filter(|&&c| is_boundary(c)).count();
        self.nonmanifold_edge_count = self.delta.values().filter(|&&c| is_nonmanifold(c)).count();
        self.nonmanifold_seen = !self.looks_like_surface(k);
        self.loops = if self.config.beta1_genus0 {
            self.count_loops(k, k.cells(0).iter().map(|v| v.vertices()[0]))
        } else {
            0
        };
        self.disabled = [false; 3];
    }

    fn looks_like_surface(&self, k: &SimplicialComplex) -> bool {
        self.nonmanifold_edge_count == 0 && k.count(3) == 0
    }

    fn adjust(&mut self, edge: Simplex, by: i32) {
        let c = self.delta.get_mut(&edge).expect("edge tracked");
        let old = *c;
        *c = (old as i32 + by) as u32;
        let new = *c;
        self.boundary_edge_count =
            self.boundary_edge_count + is_boundary(new) as usize - is_boundary(old) as usize;
        self.nonmanifold_edge_count = self.nonmanifold_edge_count + is_nonmanifold(new) as usize
            - is_nonmanifold(old) as usize;
    }

    /// Vertices of every simplex in the event.
    pub fn event_vertices(e: &EditEvent) -> HashSet<Vertex> {
        e.inserted
            .iter()
            .chain(&e.deleted)
            .flat_map(|s| s.vertices().iter().copied())
            .collect()
    }

    /// Distinct boundary loops through the given vertices.
    fn count_loops(&self, k: &SimplicialComplex, seeds: impl IntoIterator<Item = Vertex>) -> usize {
        let mut seen: HashSet<Vertex> = HashSet::default();
        let mut loops = 0;
        let mut stack = Vec::new();
        for v in seeds {
            if seen.contains(&v) || !k.contains(&Simplex::vertex(v)) {
                continue;
            }
            if self.boundary_neighbors(k, v).next().is_none() {
                continue;
            }
            loops += 1;
            seen.insert(v);
            stack.push(v);
            while let Some(x) = stack.pop() {
                let next: Vec<Vertex> = self.boundary_neighbors(k, x).collect();
                for y in next {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
        }
        loops
    }

    fn boundary_neighbors<'a>(
        &'a self,
        k: &'a SimplicialComplex,
        v: Vertex,
    ) -> impl Iterator<Item = Vertex> + 'a {
        k.cofaces(&Simplex::vertex(v))
            .iter()
            .filter(|e| self.delta.get(e).copied().is_some_and(is_boundary))
            .map(move |e| {
                let w = e.vertices();
                if w[0] == v {
                    w[1]
                } else {
                    w[0]
                }
            })
    }

    /// Loops touching the event, measured on the complex before the event.
    /// Pass the result to [`GateState::after_event`].
    pub fn before_event(&self, k: &SimplicialComplex, e: &EditEvent) -> usize {
        if !self.config.beta1_genus0 {
            return 0;
        }
        self.count_loops(k, Self::event_vertices(e))
    }

    /// Updates the counters after `e` has been applied to `k`. Returns true
    /// if the complex has just stopped looking like a surface.
    pub fn after_event(
        &mut self,
        k: &SimplicialComplex,
        e: &EditEvent,
        loops_before: usize,
    ) -> bool {
        for t in e.deleted_in(2) {
            for edge in t.faces() {
                self.adjust(edge, -1);
            }
        }
        for edge in e.deleted_in(1) {
            let c = self.delta.remove(edge).expect("edge tracked");
            self.boundary_edge_count -= is_boundary(c) as usize;
            self.nonmanifold_edge_count -= is_nonmanifold(c) as usize;
        }
        for edge in e.inserted_in(1) {
            self.delta.insert(*edge, 0);
            self.nonmanifold_edge_count += 1;
        }
        for t in e.inserted_in(2) {
            for edge in t.faces() {
                self.adjust(edge, 1);
            }
        }
        if self.config.beta1_genus0 {
            let after = self.count_loops(k, Self::event_vertices(e));
            self.loops = self.loops + after - loops_before;
        }
        let was = self.nonmanifold_seen;
        if !self.looks_like_surface(k) {
            self.nonmanifold_seen = true;
        }
        self.config.surface() && self.nonmanifold_seen && !was
    }

    fn surface_ok(&self, k: &SimplicialComplex) -> bool {
        !self.nonmanifold_seen && k.count(2) > 0 && k.count(3) == 0
    }

    /// β₀ = 1 under the connectedness assumption.
    pub fn gate_beta0(&self, k: &SimplicialComplex) -> Option<usize> {
        (self.config.beta0 && !self.disabled[0] && !k.is_empty()).then_some(1)
    }

    /// β₂ = 1 for a closed surface, 0 for a surface with boundary.
    pub fn gate_beta2(&self, k: &SimplicialComplex) -> Option<usize> {
        (self.config.beta2 && !self.disabled[2] && self.surface_ok(k))
            .then_some(usize::from(self.boundary_edge_count == 0))
    }

    /// β₁ = max(0, L − 1) on a genus-0 surface with L boundary loops.
    pub fn gate_beta1_genus0(&self, k: &SimplicialComplex) -> Option<usize> {
        (self.config.beta1_genus0 && !self.disabled[1] && self.surface_ok(k))
            .then_some(self.loops.saturating_sub(1))
    }
}

//! Deterministic workload generators with closed-form Betti trajectories.
//!
//! * P1: the octahedron boundary with a two-triangle window that is opened
//!   and closed alternately.
//! * P2: a triangulated cube (a 3-ball) under alternating 1→4 stellar
//!   subdivisions of random tetrahedra and their exact inverses.
//! * P3: a subdivided octahedron shell with vertex-star ports toggled open
//!   and sealed at random.
//!
//! Randomness comes from SplitMix64 seeded with the workload seed; a value
//! below `n` is drawn as `next_u64() % n`.

use crate::hash::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::betti::Betti;
use crate::complex::{parse_simplex_fields, EditEvent, SimplicialComplex};
use crate::engine::GateConfig;
use crate::error::{BenchError, ComplexError};
use crate::simplex::{Simplex, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Benchmark {
    P1,
    P2,
    P3,
}

impl Benchmark {
    pub fn label(self) -> &'static str {
        match self {
            Benchmark::P1 => "p1",
            Benchmark::P2 => "p2",
            Benchmark::P3 => "p3",
        }
    }

    /// Gates whose assumptions hold on every state of the workload.
    pub fn default_gates(self) -> GateConfig {
        match self {
            Benchmark::P1 => GateConfig {
                beta0: true,
                beta2: true,
                beta1_genus0: false,
            },
            Benchmark::P2 => GateConfig::none(),
            Benchmark::P3 => GateConfig::all(),
        }
    }
}

impl FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(Benchmark::P1),
            "p2" => Ok(Benchmark::P2),
            "p3" => Ok(Benchmark::P3),
            other => Err(format!(
                "unknown benchmark {other:?} (expected p1, p2 or p3)"
            )),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An initial complex, an event stream, and the Betti numbers expected
/// after every event.
#[derive(Clone, Debug)]
pub struct Workload {
    pub benchmark: Benchmark,
    pub seed: u64,
    pub params: Vec<(String, String)>,
    pub initial: SimplicialComplex,
    pub expected_initial: Betti,
    pub events: Vec<EditEvent>,
    pub expected: Vec<Betti>,
}

impl Workload {
    pub fn steps(&self) -> usize {
        self.events.len()
    }

    /// Keeps only the first `n` events.
    pub fn truncate(&mut self, n: usize) {
        self.events.truncate(n);
        self.expected.truncate(n);
    }

    /// Serializes the header and the event stream.
    pub fn to_log(&self) -> String {
        EventLog {
            benchmark: self.benchmark.label().to_string(),
            seed: self.seed,
            params: self.params.clone(),
            events: self.events.clone(),
        }
        .to_string()
    }
}

pub const OCTAHEDRON_FACES: [[Vertex; 3]; 8] = [
    [0, 1, 4],
    [1, 2, 4],
    [2, 3, 4],
    [3, 0, 4],
    [1, 0, 5],
    [2, 1, 5],
    [3, 2, 5],
    [0, 3, 5],
];

pub fn octahedron() -> SimplicialComplex {
    SimplicialComplex::from_facets(OCTAHEDRON_FACES).expect("valid octahedron")
}

/// Removes the window {0,1,4}, {1,2,4} together with their shared edge.
pub fn p1_open() -> EditEvent {
    EditEvent::new("open")
        .delete(Simplex::from_sorted(&[0, 1, 4]))
        .delete(Simplex::from_sorted(&[1, 2, 4]))
        .delete(Simplex::from_sorted(&[1, 4]))
}

pub fn gen_p1(steps: usize) -> Result<Workload, BenchError> {
    if steps < 2 {
        return Err(BenchError::TooFewSteps {
            benchmark: "p1",
            min: 2,
            got: steps,
        });
    }
    let open = p1_open();
    let close = open.inverse("close");
    let mut events = Vec::with_capacity(steps);
    let mut expected = Vec::with_capacity(steps);
    for t in 1..=steps {
        if t % 2 == 1 {
            events.push(open.clone());
            expected.push(Betti::new(&[1, 0, 0]));
        } else {
            events.push(close.clone());
            expected.push(Betti::new(&[1, 0, 1]));
        }
    }
    Ok(Workload {
        benchmark: Benchmark::P1,
        seed: 0,
        params: vec![("steps".into(), steps.to_string())],
        initial: octahedron(),
        expected_initial: Betti::new(&[1, 0, 1]),
        events,
        expected,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct P2Options {
    /// The initial ball is an n × n × n grid of cubes, six tetrahedra each.
    pub grid: usize,
    /// Tetrahedra subdivided per refinement.
    pub region: usize,
}

impl Default for P2Options {
    fn default() -> Self {
        Self { grid: 2, region: 1 }
    }
}

/// Freudenthal triangulation of an n × n × n grid of unit cubes.
pub fn cube_ball(n: usize) -> SimplicialComplex {
    let side = n as Vertex + 1;
    let id = |x: Vertex, y: Vertex, z: Vertex| x + side * (y + side * z);
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut k = SimplicialComplex::new();
    for z in 0..n as Vertex {
        for y in 0..n as Vertex {
            for x in 0..n as Vertex {
                for perm in PERMS {
                    let mut p = [x, y, z];
                    let mut verts = vec![id(p[0], p[1], p[2])];
                    for axis in perm {
                        p[axis] += 1;
                        verts.push(id(p[0], p[1], p[2]));
                    }
                    k.insert_closure(Simplex::normalize(&verts).expect("distinct grid points"));
                }
            }
        }
    }
    k
}

/// 1→4 stellar subdivision of `tet` with the new vertex `w`.
pub fn stellar_subdivision(tet: Simplex, w: Vertex) -> EditEvent {
    let mut e = EditEvent::new("refine").delete(tet);
    e = e.insert(Simplex::vertex(w));
    for &v in tet.vertices() {
        e = e.insert(Simplex::vertex(v).join(w).expect("new vertex"));
    }
    for f in tet.faces() {
        for edge in f.faces() {
            e = e.insert(edge.join(w).expect("new vertex"));
        }
        e = e.insert(f.join(w).expect("new vertex"));
    }
    e
}

pub fn gen_p2(steps: usize, seed: u64, opts: P2Options) -> Result<Workload, BenchError> {
    if steps < 2 {
        return Err(BenchError::TooFewSteps {
            benchmark: "p2",
            min: 2,
            got: steps,
        });
    }
    if opts.grid == 0 || opts.region == 0 {
        return Err(BenchError::Param("grid and region must be positive".into()));
    }
    let initial = cube_ball(opts.grid);
    if opts.region > initial.count(3) {
        return Err(BenchError::Param(format!(
            "region of {} tetrahedra exceeds the {} available",
            opts.region,
            initial.count(3)
        )));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut k = initial.clone();
    let mut stack: Vec<EditEvent> = Vec::new();
    let mut events = Vec::with_capacity(steps);
    for t in 1..=steps {
        let e = if t % 2 == 1 {
            let mut tets: Vec<Simplex> = k.cells(3).iter().copied().collect();
            tets.sort_unstable();
            let mut next = k
                .cells(0)
                .iter()
                .map(|v| v.vertices()[0])
                .max()
                .map_or(0, |m| m + 1);
            let mut e = EditEvent::new("refine");
            for _ in 0..opts.region {
                let i = (rng.next_u64() % tets.len() as u64) as usize;
                let tet = tets.swap_remove(i);
                let sub = stellar_subdivision(tet, next);
                next += 1;
                e = e.delete_all(sub.deleted).insert_all(sub.inserted);
            }
            stack.push(e.clone());
            e
        } else {
            stack
                .pop()
                .ok_or(BenchError::EmptyStack)?
                .inverse("coarsen")
        };
        k.apply_event(&e)?;
        events.push(e);
    }
    Ok(Workload {
        benchmark: Benchmark::P2,
        seed,
        params: vec![
            ("steps".into(), steps.to_string()),
            ("grid".into(), opts.grid.to_string()),
            ("region".into(), opts.region.to_string()),
        ],
        initial,
        expected_initial: Betti::new(&[1, 0, 0]),
        expected: vec![Betti::new(&[1, 0, 0]); steps],
        events,
    })
}

/// The octahedron boundary after `level` rounds of 1→4 triangle splits with
/// shared edge midpoints: 8·4^level triangles.
pub fn subdivided_octahedron(level: usize) -> SimplicialComplex {
    let mut tris: Vec<[Vertex; 3]> = OCTAHEDRON_FACES.to_vec();
    let mut next: Vertex = 6;
    for _ in 0..level {
        let mut mid: HashMap<(Vertex, Vertex), Vertex> = HashMap::default();
        let mut midpoint = |a: Vertex, b: Vertex| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                next += 1;
                next - 1
            })
        };
        let mut out = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
            out.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = out;
    }
    SimplicialComplex::from_facets(tris).expect("valid shell")
}

/// A port: a vertex whose open star can be removed and restored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub center: Vertex,
    pub open: EditEvent,
}

fn port_at(k: &SimplicialComplex, v: Vertex) -> Port {
    let center = Simplex::vertex(v);
    let mut open = EditEvent::new("open").delete(center);
    for edge in k.cofaces(&center) {
        open = open.delete(*edge);
        for tri in k.cofaces(edge) {
            open = open.delete(*tri);
        }
    }
    Port { center: v, open }
}

/// Closed-star vertex set: the vertex and its neighbours.
fn closed_star(k: &SimplicialComplex, v: Vertex) -> Vec<Vertex> {
    let mut out = vec![v];
    for e in k.cofaces(&Simplex::vertex(v)) {
        out.extend(e.vertices().iter().copied().filter(|&w| w != v));
    }
    out
}

/// Picks `n` ports with vertex-disjoint closed stars, trying vertices in a
/// seeded random order.
pub fn choose_ports(
    k: &SimplicialComplex,
    n: usize,
    rng: &mut SplitMix64,
) -> Result<Vec<Port>, BenchError> {
    let mut order: Vec<Vertex> = k.cells(0).iter().map(|v| v.vertices()[0]).collect();
    order.sort_unstable();
    for i in (1..order.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let mut used: HashSet<Vertex> = HashSet::default();
    let mut ports = Vec::new();
    for v in order {
        if ports.len() == n {
            break;
        }
        let star = closed_star(k, v);
        if star.iter().any(|w| used.contains(w)) {
            continue;
        }
        used.extend(star);
        ports.push(port_at(k, v));
    }
    if ports.len() < n {
        return Err(BenchError::PortsOverlap {
            wanted: n,
            placed: ports.len(),
        });
    }
    Ok(ports)
}

/// Betti numbers of a genus-0 shell with `b` open ports.
pub fn p3_expected(b: usize) -> Betti {
    Betti::new(&[1, b.saturating_sub(1), usize::from(b == 0)])
}

pub fn gen_p3(
    n_ports: usize,
    subdiv: usize,
    steps: usize,
    seed: u64,
) -> Result<Workload, BenchError> {
    if steps < 1 {
        return Err(BenchError::TooFewSteps {
            benchmark: "p3",
            min: 1,
            got: steps,
        });
    }
    if n_ports == 0 {
        return Err(BenchError::Param("at least one port is required".into()));
    }
    let initial = subdivided_octahedron(subdiv);
    let mut rng = SplitMix64::seed_from_u64(seed);
    let ports = choose_ports(&initial, n_ports, &mut rng)?;
    let mut is_open = vec![false; n_ports];
    let mut b = 0;
    let mut events = Vec::with_capacity(steps);
    let mut expected = Vec::with_capacity(steps);
    for _ in 0..steps {
        let i = (rng.next_u64() % n_ports as u64) as usize;
        let label = format!(
            "{} port {}",
            if is_open[i] { "seal" } else { "open" },
            ports[i].center
        );
        let e = if is_open[i] {
            b -= 1;
            ports[i].open.inverse(label)
        } else {
            b += 1;
            EditEvent {
                label,
                ..ports[i].open.clone()
            }
        };
        is_open[i] = !is_open[i];
        events.push(e);
        expected.push(p3_expected(b));
    }
    Ok(Workload {
        benchmark: Benchmark::P3,
        seed,
        params: vec![
            ("steps".into(), steps.to_string()),
            ("ports".into(), n_ports.to_string()),
            ("subdiv".into(), subdiv.to_string()),
        ],
        initial,
        expected_initial: p3_expected(0),
        events,
        expected,
    })
}

/// Header and events of a serialized workload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventLog {
    pub benchmark: String,
    pub seed: u64,
    pub params: Vec<(String, String)>,
    pub events: Vec<EditEvent>,
}

impl fmt::Display for EventLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(out, "benchmark {}", self.benchmark);
        let _ = writeln!(out, "seed {}", self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(out, "param {k} {v}");
        }
        for (i, e) in self.events.iter().enumerate() {
            let _ = writeln!(out, "event {} {}", i + 1, e.label);
            for s in &e.deleted {
                let _ = writeln!(out, "- {s}");
            }
            for s in &e.inserted {
                let _ = writeln!(out, "+ {s}");
            }
        }
        f.write_str(&out)
    }
}

impl FromStr for EventLog {
    type Err = ComplexError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut log = EventLog {
            benchmark: String::new(),
            seed: 0,
            params: Vec::new(),
            events: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| ComplexError::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            let mut fields = line.split_whitespace();
            let Some(head) = fields.next() else {
                continue;
            };
            match head {
                "benchmark" => log.benchmark = fields.next().unwrap_or("").to_string(),
                "seed" => {
                    log.seed = fields
                        .next()
                        .unwrap_or("")
                        .parse()
                        .map_err(|e| err(format!("bad seed: {e}")))?
                }
                "param" => {
                    let key = fields
                        .next()
                        .ok_or_else(|| err("param needs a key".into()))?;
                    let value: Vec<&str> = fields.collect();
                    log.params.push((key.to_string(), value.join(" ")));
                }
                "event" => {
                    fields
                        .next()
                        .ok_or_else(|| err("event needs a number".into()))?;
                    let label: Vec<&str> = fields.collect();
                    log.events.push(EditEvent::new(label.join(" ")));
                }
                "+" | "-" | "\u{2212}" => {
                    let e = log
                        .events
                        .last_mut()
                        .ok_or_else(|| err("simplex line before any event".into()))?;
                    let s = parse_simplex_fields(fields, line_no)?;
                    if head == "+" {
                        e.inserted.insert(s);
                    } else {
                        e.deleted.insert(s);
                    }
                }
                other => return Err(err(format!("unexpected {other:?}"))),
            }
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::oracle_betti;
    use proptest::prelude::*;
    use rand_core::RngCore;

    fn replay_against_oracle(w: &Workload) {
        let mut k = w.initial.clone();
        assert_eq!(oracle_betti(&k).unwrap(), w.expected_initial);
        for (e, want) in w.events.iter().zip(&w.expected) {
            k.apply_event(e).unwrap();
            assert!(k.is_face_closed());
            assert_eq!(oracle_betti(&k).unwrap(), *want, "after {}", e.label);
        }
    }

    #[test]
    fn p1_counts_and_trajectory() {
        let w = gen_p1(6).unwrap();
        assert_eq!(w.initial.counts(), [6, 12, 8, 0]);
        let mut k = w.initial.clone();
        k.apply_event(&w.events[0]).unwrap();
        assert_eq!((k.count(1), k.count(2)), (11, 6));
        k.apply_event(&w.events[1]).unwrap();
        assert_eq!(k, w.initial);
        replay_against_oracle(&w);
        assert!(gen_p1(1).is_err());
    }

    #[test]
    fn p2_ball_and_stellar_counts() {
        let ball = cube_ball(2);
        assert_eq!(ball.count(3), 48);
        assert_eq!(ball.count(0), 27);
        let tet = SimplicialComplex::from_facets([[0, 1, 2, 3]]).unwrap();
        let mut k = tet.clone();
        k.apply_event(&stellar_subdivision(Simplex::from_sorted(&[0, 1, 2, 3]), 4))
            .unwrap();
        let diff: Vec<i64> = (0..4)
            .map(|d| k.count(d) as i64 - tet.count(d) as i64)
            .collect();
        assert_eq!(diff, vec![1, 4, 6, 3]);
    }

    #[test]
    fn p2_replays_to_oracle() {
        let w = gen_p2(20, 7, P2Options::default()).unwrap();
        replay_against_oracle(&w);
        let w = gen_p2(6, 3, P2Options { grid: 1, region: 3 }).unwrap();
        replay_against_oracle(&w);
    }

    #[test]
    fn p3_shell_is_a_sphere() {
        let s = subdivided_octahedron(2);
        assert_eq!(s.count(2), 128);
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(oracle_betti(&s).unwrap(), Betti::new(&[1, 0, 1]));
        assert_eq!(subdivided_octahedron(4).count(2), 2048);
    }

    #[test]
    fn p3_expected_formula() {
        assert_eq!(p3_expected(0), Betti::new(&[1, 0, 1]));
        assert_eq!(p3_expected(1), Betti::new(&[1, 0, 0]));
        assert_eq!(p3_expected(2), Betti::new(&[1, 1, 0]));
        assert_eq!(p3_expected(3), Betti::new(&[1, 2, 0]));
    }

    #[test]
    fn p3_replays_to_oracle() {
        let w = gen_p3(3, 2, 30, 11).unwrap();
        replay_against_oracle(&w);
    }

    #[test]
    fn p3_ports_must_fit() {
        assert!(matches!(
            gen_p3(2, 0, 4, 0),
            Err(BenchError::PortsOverlap { .. })
        ));
    }

    #[test]
    fn p3_edges_stay_manifold() {
        let w = gen_p3(4, 2, 40, 5).unwrap();
        let mut k = w.initial.clone();
        for e in &w.events {
            k.apply_event(e).unwrap();
            for edge in k.cells(1) {
                let deg = k.cofaces(edge).len();
                assert!(deg == 1 || deg == 2, "edge {edge:?} has degree {deg}");
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = gen_p3(3, 2, 20, 42).unwrap();
        let b = gen_p3(3, 2, 20, 42).unwrap();
        assert_eq!(a.events, b.events);
        let c = gen_p2(10, 42, P2Options::default()).unwrap();
        let d = gen_p2(10, 42, P2Options::default()).unwrap();
        assert_eq!(c.events, d.events);
    }

    #[test]
    fn log_roundtrip() {
        let w = gen_p3(2, 1, 5, 1).unwrap();
        let text = w.to_log();
        let log: EventLog = text.parse().unwrap();
        assert_eq!(log.benchmark, "p3");
        assert_eq!(log.seed, 1);
        assert_eq!(log.events, w.events);
        let unicode: EventLog = "event 1 x\n\u{2212} 0 3\n".parse().unwrap();
        assert_eq!(unicode.events[0].deleted.len(), 1);
        assert!("+ 1 0 1\n".parse::<EventLog>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn p2_stack_discipline(seed in any::<u64>(), depth in 1usize..8) {
            // Nested refinements followed by the same number of coarsenings.
            let initial = cube_ball(1);
            let mut rng = SplitMix64::seed_from_u64(seed);
            let mut k = initial.clone();
            let mut stack = Vec::new();
            for i in 0..depth {
                let mut tets: Vec<Simplex> = k.cells(3).iter().copied().collect();
                tets.sort_unstable();
                let tet = tets[(rng.next_u64() % tets.len() as u64) as usize];
                let e = stellar_subdivision(tet, 100 + i as Vertex);
                k.apply_event(&e).unwrap();
                stack.push(e);
            }
            while let Some(e) = stack.pop() {
                k.apply_event(&e.inverse("coarsen")).unwrap();
            }
            prop_assert_eq!(&k, &initial);
            let w = gen_p2(2 * depth, seed, P2Options::default()).unwrap();
            let mut k = w.initial.clone();
            for e in &w.events {
                k.apply_event(e).unwrap();
            }
            prop_assert_eq!(k, w.initial);
        }
    }
}

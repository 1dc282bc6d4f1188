//! Discrete Morse matchings built by coreduction, and the critical chain
//! complex they induce.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::betti::Betti;
use crate::complex::SimplicialComplex;
use crate::error::MorseError;
use crate::gf2::{xor_sorted, Gf2ColumnMatrix};
use crate::hash::{HashMap, HashSet, IndexMap, IndexSet};
use crate::simplex::{Simplex, MAX_DIM};

/// How a simplex participates in a matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Critical,
    /// Matched with the given coface.
    Lower(Simplex),
    /// Matched with the given face.
    Upper(Simplex),
    /// Not covered by the matching at all.
    Unknown,
}

/// Face/coface pairs plus the unmatched (critical) simplices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MorseMatching {
    down: IndexMap<Simplex, Simplex>,
    up: HashMap<Simplex, Simplex>,
    critical: [IndexSet<Simplex>; MAX_DIM + 1],
}

impl MorseMatching {
    pub fn new() -> Self {
        Self::default()
    }

    /// The trivial matching: every simplex of `k` is critical.
    pub fn all_critical(k: &SimplicialComplex) -> Self {
        let mut m = Self::new();
        for s in k.iter() {
            m.critical[s.dim()].insert(*s);
        }
        m
    }

    /// Records the pair (`lower`, `upper`). Returns false and changes nothing
    /// if either simplex is already matched or `lower` is not a facet of
    /// `upper`.
    pub fn add_pair(&mut self, lower: Simplex, upper: Simplex) -> bool {
        let is_facet = upper.faces().any(|f| f == lower);
        if !is_facet || self.partner(&lower).is_some() || self.partner(&upper).is_some() {
            return false;
        }
        self.critical[lower.dim()].swap_remove(&lower);
        self.critical[upper.dim()].swap_remove(&upper);
        self.down.insert(lower, upper);
        self.up.insert(upper, lower);
        true
    }

    pub fn add_critical(&mut self, s: Simplex) {
        self.critical[s.dim()].insert(s);
    }

    /// Forgets a critical simplex. Returns whether it was critical.
    pub fn remove_critical(&mut self, s: &Simplex) -> bool {
        self.critical[s.dim()].swap_remove(s)
    }

    /// Dissolves the pair containing `lower` and returns the former coface.
    pub fn remove_pair(&mut self, lower: &Simplex) -> Option<Simplex> {
        let upper = self.down.swap_remove(lower)?;
        self.up.remove(&upper);
        Some(upper)
    }

    pub fn partner(&self, s: &Simplex) -> Option<Simplex> {
        self.down.get(s).or_else(|| self.up.get(s)).copied()
    }

    pub fn role(&self, s: &Simplex) -> Role {
        if let Some(u) = self.down.get(s) {
            Role::Lower(*u)
        } else if let Some(l) = self.up.get(s) {
            Role::Upper(*l)
        } else if self.critical[s.dim()].contains(s) {
            Role::Critical
        } else {
            Role::Unknown
        }
    }

    /// Pairs as (face, coface), in the order they were formed.
    pub fn pairs(&self) -> impl Iterator<Item = (Simplex, Simplex)> + '_ {
        self.down.iter().map(|(l, u)| (*l, *u))
    }

    pub fn num_pairs(&self) -> usize {
        self.down.len()
    }

    pub fn critical(&self, k: usize) -> &IndexSet<Simplex> {
        &self.critical[k]
    }

    pub fn critical_counts(&self) -> [usize; MAX_DIM + 1] {
        std::array::from_fn(|k| self.critical[k].len())
    }

    pub fn critical_total(&self) -> usize {
        self.critical.iter().map(IndexSet::len).sum()
    }

    /// Every simplex of `k` is either critical or in exactly one pair, and
    /// nothing outside `k` is referenced.
    pub fn partitions(&self, k: &SimplicialComplex) -> bool {
        let covered = 2 * self.down.len() + self.critical_total();
        covered == k.len()
            && self
                .down
                .iter()
                .all(|(l, u)| k.contains(l) && k.contains(u))
            && self.critical.iter().flatten().all(|s| k.contains(s))
    }
}

/// Simplices of a complex numbered stratum by stratum, with face and coface
/// lists in compressed form.
struct Indexed {
    cells: Vec<Simplex>,
    /// First index of each stratum, plus the total at the end.
    offset: [usize; MAX_DIM + 2],
    faces: Vec<[u32; MAX_DIM + 1]>,
    coface_start: Vec<u32>,
    cofaces: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl Indexed {
    fn new(k: &SimplicialComplex) -> Self {
        let mut offset = [0; MAX_DIM + 2];
        for d in 0..=MAX_DIM {
            offset[d + 1] = offset[d] + k.count(d);
        }
        let n = offset[MAX_DIM + 1];
        let mut cells = Vec::with_capacity(n);
        let mut faces = Vec::with_capacity(n);
        let mut degree = vec![0u32; n + 1];
        for d in 0..=MAX_DIM {
            for s in k.cells(d) {
                let mut f = [NONE; MAX_DIM + 1];
                for (slot, face) in f.iter_mut().zip(s.faces()) {
                    let j = offset[d - 1] + k.index_of(&face).expect("face-closed complex");
                    *slot = j as u32;
                    degree[j] += 1;
                }
                cells.push(*s);
                faces.push(f);
            }
        }
        let mut coface_start = vec![0u32; n + 1];
        for i in 0..n {
            coface_start[i + 1] = coface_start[i] + degree[i];
        }
        let mut fill: Vec<u32> = coface_start[..n].to_vec();
        let mut cofaces = vec![0u32; coface_start[n] as usize];
        for (i, f) in faces.iter().enumerate() {
            for &j in f.iter().take_while(|&&j| j != NONE) {
                cofaces[fill[j as usize] as usize] = i as u32;
                fill[j as usize] += 1;
            }
        }
        Self {
            cells,
            offset,
            faces,
            coface_start,
            cofaces,
        }
    }

    fn faces(&self, i: u32) -> impl Iterator<Item = u32> + '_ {
        self.faces[i as usize]
            .iter()
            .copied()
            .take_while(|&j| j != NONE)
    }

    fn cofaces(&self, i: u32) -> &[u32] {
        let (a, b) = (
            self.coface_start[i as usize],
            self.coface_start[i as usize + 1],
        );
        &self.cofaces[a as usize..b as usize]
    }
}

/// Coreduction on an indexed complex. `partner[i]` is the matched simplex or
/// `NONE` for critical ones; pairs and critical cells are also reported in
/// the order they are formed.
struct Coreduction {
    partner: Vec<u32>,
    pairs: Vec<(u32, u32)>,
    critical: Vec<u32>,
}

fn coreduce_indexed(ix: &Indexed) -> Coreduction {
    let n = ix.cells.len();
    let mut removed = vec![false; n];
    let mut live_faces: Vec<u8> = ix
        .faces
        .iter()
        .map(|f| f.iter().take_while(|&&j| j != NONE).count() as u8)
        .collect();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut out = Coreduction {
        partner: vec![NONE; n],
        pairs: Vec::new(),
        critical: Vec::new(),
    };

    let remove =
        |x: u32, removed: &mut Vec<bool>, live_faces: &mut Vec<u8>, queue: &mut VecDeque<u32>| {
            removed[x as usize] = true;
            for &c in ix.cofaces(x) {
                live_faces[c as usize] -= 1;
                if live_faces[c as usize] == 1 && !removed[c as usize] {
                    queue.push_back(c);
                }
            }
        };

    let mut cursor = 0;
    loop {
        while let Some(s) = queue.pop_front() {
            if removed[s as usize] || live_faces[s as usize] != 1 {
                continue;
            }
            let tau = ix
                .faces(s)
                .find(|&f| !removed[f as usize])
                .expect("one live face");
            out.partner[tau as usize] = s;
            out.partner[s as usize] = tau;
            out.pairs.push((tau, s));
            remove(tau, &mut removed, &mut live_faces, &mut queue);
            remove(s, &mut removed, &mut live_faces, &mut queue);
        }
        while cursor < n && removed[cursor] {
            cursor += 1;
        }
        if cursor == n {
            break;
        }
        out.critical.push(cursor as u32);
        remove(cursor as u32, &mut removed, &mut live_faces, &mut queue);
    }
    out
}

impl Coreduction {
    fn matching(&self, ix: &Indexed) -> MorseMatching {
        let mut m = MorseMatching::new();
        m.down.reserve(self.pairs.len());
        m.up.reserve(self.pairs.len());
        for &(l, u) in &self.pairs {
            let (l, u) = (ix.cells[l as usize], ix.cells[u as usize]);
            m.down.insert(l, u);
            m.up.insert(u, l);
        }
        for &c in &self.critical {
            let s = ix.cells[c as usize];
            m.critical[s.dim()].insert(s);
        }
        m
    }
}

/// Computes a matching by coreduction.
///
/// A simplex whose boundary, restricted to the simplices not yet removed,
/// consists of exactly one face is paired with that face and both are
/// removed. When no such simplex exists, the lowest-dimensional unremoved
/// simplex (earliest in stratum order) is removed as critical. Candidates are
/// processed first in, first out.
pub fn coreduce(k: &SimplicialComplex) -> MorseMatching {
    let ix = Indexed::new(k);
    coreduce_indexed(&ix).matching(&ix)
}

/// `coreduce` followed by `critical_boundary`, sharing one indexing pass.
pub fn decompose(k: &SimplicialComplex) -> (MorseMatching, CriticalComplex) {
    let ix = Indexed::new(k);
    let cr = coreduce_indexed(&ix);
    let m = cr.matching(&ix);
    let cells = m.critical.clone();

    // Row position of each critical simplex within its stratum.
    let mut row = vec![NONE; ix.cells.len()];
    for stratum in &cells {
        for (pos, s) in stratum.iter().enumerate() {
            let i = ix.offset[s.dim()] + k.index_of(s).expect("critical cell in complex");
            row[i] = pos as u32;
        }
    }

    // Flow of each simplex, filled on demand. Coreduction matchings are
    // acyclic, so the traversal always terminates.
    let mut flow: Vec<Option<Vec<u32>>> = vec![None; ix.cells.len()];
    let mut stack: Vec<(u32, bool)> = Vec::new();
    let mut buf = Vec::new();
    let mut matrices: [Gf2ColumnMatrix; MAX_DIM + 1] = Default::default();
    for d in 1..=MAX_DIM {
        let mut cols = Vec::with_capacity(cells[d].len());
        for sigma in &cells[d] {
            let i = (ix.offset[d] + k.index_of(sigma).expect("critical cell in complex")) as u32;
            let mut acc: Vec<u32> = Vec::new();
            for f in ix.faces(i) {
                fill_flow(&ix, &cr.partner, &row, &mut flow, &mut stack, f);
                xor_sorted(&acc, flow[f as usize].as_deref().unwrap_or(&[]), &mut buf);
                std::mem::swap(&mut acc, &mut buf);
            }
            cols.push(acc);
        }
        matrices[d] = Gf2ColumnMatrix::from_columns(cells[d - 1].len(), cols)
            .expect("critical rows are in range");
    }
    (m, CriticalComplex { cells, matrices })
}

fn fill_flow(
    ix: &Indexed,
    partner: &[u32],
    row: &[u32],
    flow: &mut [Option<Vec<u32>>],
    stack: &mut Vec<(u32, bool)>,
    x: u32,
) {
    let mut buf = Vec::new();
    stack.clear();
    stack.push((x, false));
    while let Some((c, expanded)) = stack.pop() {
        let ci = c as usize;
        if flow[ci].is_some() {
            continue;
        }
        let p = partner[ci];
        if p == NONE {
            flow[ci] = Some(vec![row[ci]]);
        } else if p < c {
            // Upper half of a pair.
            flow[ci] = Some(Vec::new());
        } else if !expanded {
            stack.push((c, true));
            stack.extend(
                ix.faces(p)
                    .filter(|&z| z != c && flow[z as usize].is_none())
                    .map(|z| (z, false)),
            );
        } else {
            let mut acc: Vec<u32> = Vec::new();
            for z in ix.faces(p).filter(|&z| z != c) {
                xor_sorted(&acc, flow[z as usize].as_deref().unwrap_or(&[]), &mut buf);
                std::mem::swap(&mut acc, &mut buf);
            }
            flow[ci] = Some(acc);
        }
    }
}

/// Checks that `m` is a valid acyclic matching on `k`.
///
/// The gradient digraph has an edge σ → τ for every facet τ of σ, reversed
/// when (τ, σ) is a pair. The matching is valid iff every pair is a
/// face/coface pair of `k`, no simplex is matched twice, and the digraph has
/// no directed cycle.
pub fn validate_acyclic(m: &MorseMatching, k: &SimplicialComplex) -> bool {
    let mut seen = HashSet::default();
    for (l, u) in m.pairs() {
        if !k.contains(&l) || !k.contains(&u) || !u.faces().any(|f| f == l) {
            return false;
        }
        if !seen.insert(l) || !seen.insert(u) {
            return false;
        }
    }
    let ix = Indexed::new(k);
    let n = ix.cells.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for (i, s) in ix.cells.iter().enumerate() {
        for f in ix.faces(i as u32) {
            let f = f as usize;
            let (from, to) = if m.down.get(&ix.cells[f]) == Some(s) {
                (f, i)
            } else {
                (i, f)
            };
            out[from].push(to);
            indeg[to] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut visited = 0;
    while let Some(x) = ready.pop() {
        visited += 1;
        for &y in &out[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                ready.push(y);
            }
        }
    }
    visited == n
}

/// Memoized gradient flow from simplices to critical cells of the same
/// dimension, as sorted critical indices.
///
/// For a critical x the flow is x itself; for the upper half of a pair it is
/// zero; for the lower half x of a pair (x, y) it is the sum of the flows of
/// the other facets of y. The boundary of a critical σ in the critical
/// complex is the sum of the flows of its facets.
#[derive(Debug, Default)]
pub struct FlowMemo {
    memo: HashMap<Simplex, Vec<u32>>,
}

impl FlowMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.memo.clear();
    }

    /// Flow of `x`. `index` maps critical simplices to their row index;
    /// a critical simplex without an index is reported as a matching error.
    pub fn flow<F>(
        &mut self,
        m: &MorseMatching,
        x: Simplex,
        index: &F,
    ) -> Result<&[u32], MorseError>
    where
        F: Fn(&Simplex) -> Option<u32>,
    {
        if !self.memo.contains_key(&x) {
            self.fill(m, x, index)?;
        }
        Ok(&self.memo[&x])
    }

    fn fill<F>(&mut self, m: &MorseMatching, x: Simplex, index: &F) -> Result<(), MorseError>
    where
        F: Fn(&Simplex) -> Option<u32>,
    {
        let mut in_progress: HashSet<Simplex> = HashSet::default();
        let mut stack = vec![(x, false)];
        let mut buf = Vec::new();
        while let Some((c, expanded)) = stack.pop() {
            if self.memo.contains_key(&c) {
                continue;
            }
            match m.role(&c) {
                Role::Critical => {
                    let i = index(&c).ok_or(crate::MatrixError::Unindexed(c))?;
                    self.memo.insert(c, vec![i]);
                }
                Role::Upper(_) | Role::Unknown => {
                    self.memo.insert(c, Vec::new());
                }
                Role::Lower(up) if !expanded => {
                    if !in_progress.insert(c) {
                        return Err(MorseError::Cycle(c));
                    }
                    stack.push((c, true));
                    for z in up.faces().filter(|z| *z != c) {
                        if !self.memo.contains_key(&z) {
                            stack.push((z, false));
                        }
                    }
                }
                Role::Lower(up) => {
                    let mut acc: Vec<u32> = Vec::new();
                    for z in up.faces().filter(|z| *z != c) {
                        xor_sorted(&acc, &self.memo[&z], &mut buf);
                        std::mem::swap(&mut acc, &mut buf);
                    }
                    in_progress.remove(&c);
                    self.memo.insert(c, acc);
                }
            }
        }
        Ok(())
    }

    /// Column of the critical boundary matrix for `sigma`.
    pub fn boundary_column<F>(
        &mut self,
        m: &MorseMatching,
        sigma: &Simplex,
        index: &F,
    ) -> Result<Vec<u32>, MorseError>
    where
        F: Fn(&Simplex) -> Option<u32>,
    {
        let mut acc: Vec<u32> = Vec::new();
        let mut buf = Vec::new();
        for f in sigma.faces() {
            let fl = self.flow(m, f, index)?;
            xor_sorted(&acc, fl, &mut buf);
            std::mem::swap(&mut acc, &mut buf);
        }
        Ok(acc)
    }
}

/// The critical chain complex of a matching.
#[derive(Clone, Debug)]
pub struct CriticalComplex {
    pub cells: [IndexSet<Simplex>; MAX_DIM + 1],
    /// `matrices[k]` is B_k^C for k in 1..=3; index 0 is an empty placeholder.
    pub matrices: [Gf2ColumnMatrix; MAX_DIM + 1],
}

/// Assembles the critical boundary matrices (unreduced). Row and column
/// indices are positions within the critical strata of `m`.
pub fn critical_boundary(
    m: &MorseMatching,
    k: &SimplicialComplex,
) -> Result<CriticalComplex, MorseError> {
    let cells = m.critical.clone();
    let mut matrices: [Gf2ColumnMatrix; MAX_DIM + 1] = Default::default();
    let mut memo = FlowMemo::new();
    for d in 1..=MAX_DIM {
        memo.clear();
        let rows = &cells[d - 1];
        let index = |s: &Simplex| rows.get_index_of(s).map(|i| i as u32);
        let mut cols = Vec::with_capacity(cells[d].len());
        for sigma in &cells[d] {
            debug_assert!(k.contains(sigma));
            cols.push(memo.boundary_column(m, sigma, &index)?);
        }
        matrices[d] = Gf2ColumnMatrix::from_columns(rows.len(), cols)?;
    }
    Ok(CriticalComplex { cells, matrices })
}

impl CriticalComplex {
    pub fn counts(&self) -> [usize; MAX_DIM + 1] {
        std::array::from_fn(|k| self.cells[k].len())
    }

    /// Reduces every matrix and returns the ranks (index 0 is always 0).
    pub fn reduce_all(&mut self) -> [usize; MAX_DIM + 1] {
        let mut r = [0; MAX_DIM + 1];
        for (d, m) in self.matrices.iter_mut().enumerate().skip(1) {
            r[d] = m.reduce_all();
        }
        r
    }

    pub fn betti(&mut self) -> Betti {
        let ranks = self.reduce_all();
        Betti::from_ranks(&self.counts(), &ranks)
    }

    /// Whether B_{k} B_{k+1} = 0 for every k, checked column by column.
    pub fn is_chain_complex(&self) -> bool {
        let mut acc: Vec<u32> = Vec::new();
        let mut buf = Vec::new();
        for d in 2..=MAX_DIM {
            let (lo, hi) = (&self.matrices[d - 1], &self.matrices[d]);
            for j in hi.column_ids() {
                acc.clear();
                for &r in hi.original(j).expect("live column") {
                    let col = lo.original(r as usize).expect("row is a column below");
                    xor_sorted(&acc, col, &mut buf);
                    std::mem::swap(&mut acc, &mut buf);
                }
                if !acc.is_empty() {
                    return false;
                }
            }
        }
        true
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for d in 1..=MAX_DIM {
            let _ = writeln!(out, "B{d}");
            out.push_str(&self.matrices[d].dump());
        }
        for s in self.cells.iter().flatten() {
            let _ = writeln!(out, "critical: {s}");
        }
        out
    }
}

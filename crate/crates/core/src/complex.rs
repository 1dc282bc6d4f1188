//! Face-closed simplicial complexes of dimension at most 3 and the edit
//! events that move them between states.

use crate::hash::HashMap;
use std::fmt::Write as _;

use crate::hash::IndexSet;

use crate::error::ComplexError;
use crate::simplex::{Simplex, Vertex, MAX_DIM};

/// A finite simplicial complex stratified by dimension.
///
/// Every face of a stored simplex is stored. Each stratum is an insertion
/// ordered set; deletions use swap-removal, so iteration order is a
/// deterministic function of the edit history. A face → cofaces index serves
/// star queries in time proportional to the star.
#[derive(Clone, Debug, Default)]
pub struct SimplicialComplex {
    cells: [IndexSet<Simplex>; MAX_DIM + 1],
    cofaces: HashMap<Simplex, Vec<Simplex>>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        (0..=MAX_DIM).all(|k| {
            self.cells[k].len() == other.cells[k].len()
                && self.cells[k].iter().all(|s| other.cells[k].contains(s))
        })
    }
}

impl Eq for SimplicialComplex {}

impl SimplicialComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the closure of the given top simplices. Facets may overlap and
    /// be listed in any order.
    pub fn from_facets<I, V>(facets: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[Vertex]>,
    {
        let mut k = Self::new();
        for f in facets {
            let s = Simplex::normalize(f.as_ref())?;
            k.insert_closure(s);
        }
        Ok(k)
    }

    /// Inserts `s` together with all of its missing faces.
    pub fn insert_closure(&mut self, s: Simplex) {
        if self.contains(&s) {
            return;
        }
        let faces: Vec<_> = s.faces().collect();
        for f in faces {
            self.insert_closure(f);
        }
        self.insert_unchecked(s);
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.cells[s.dim()].contains(s)
    }

    /// Number of k-simplices.
    pub fn count(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, IndexSet::len)
    }

    pub fn counts(&self) -> [usize; MAX_DIM + 1] {
        std::array::from_fn(|k| self.cells[k].len())
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(IndexSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Top dimension, or `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        (0..=MAX_DIM).rev().find(|&k| !self.cells[k].is_empty())
    }

    pub fn cells(&self, k: usize) -> &IndexSet<Simplex> {
        &self.cells[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.cells.iter().flat_map(|c| c.iter())
    }

    /// Position of `s` within its stratum.
    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.cells[s.dim()].get_index_of(s)
    }

    /// Codimension-1 cofaces of `s` currently in the complex.
    pub fn cofaces(&self, s: &Simplex) -> &[Simplex] {
        self.cofaces.get(s).map_or(&[], Vec::as_slice)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts()
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    fn insert_unchecked(&mut self, s: Simplex) {
        for f in s.faces() {
            self.cofaces.entry(f).or_default().push(s);
        }
        self.cells[s.dim()].insert(s);
    }

    fn remove_unchecked(&mut self, s: &Simplex) {
        for f in s.faces() {
            if let Some(list) = self.cofaces.get_mut(&f) {
                if let Some(pos) = list.iter().position(|c| c == s) {
                    list.swap_remove(pos);
                }
            }
        }
        self.cofaces.remove(s);
        self.cells[s.dim()].swap_remove(s);
    }

    /// Checks that `e` can be applied: deleted simplices exist and take all of
    /// their cofaces with them, inserted simplices are new and find every face
    /// either surviving or inserted.
    pub fn validate_event(&self, e: &EditEvent) -> Result<(), ComplexError> {
        for s in &e.deleted {
            if e.inserted.contains(s) {
                return Err(ComplexError::InsertedAndDeleted(*s));
            }
            if !self.contains(s) {
                return Err(ComplexError::Missing(*s));
            }
            if let Some(c) = self.cofaces(s).iter().find(|c| !e.deleted.contains(*c)) {
                return Err(ComplexError::SurvivingCoface {
                    simplex: *s,
                    coface: *c,
                });
            }
        }
        for s in &e.inserted {
            if self.contains(s) {
                return Err(ComplexError::AlreadyPresent(*s));
            }
            for f in s.faces() {
                let survives = self.contains(&f) && !e.deleted.contains(&f);
                if !survives && !e.inserted.contains(&f) {
                    return Err(ComplexError::MissingFace {
                        simplex: *s,
                        face: f,
                    });
                }
            }
        }
        Ok(())
    }

    /// Applies deletions (top dimension first) and then insertions (bottom
    /// dimension first). The complex is left untouched if the event is invalid.
    pub fn apply_event(&mut self, e: &EditEvent) -> Result<(), ComplexError> {
        self.validate_event(e)?;
        for k in (0..=MAX_DIM).rev() {
            for s in e.deleted.iter().filter(|s| s.dim() == k) {
                self.remove_unchecked(s);
            }
        }
        for k in 0..=MAX_DIM {
            for s in e.inserted.iter().filter(|s| s.dim() == k) {
                self.insert_unchecked(*s);
            }
        }
        Ok(())
    }

    /// Exhaustive face-closure check.
    pub fn is_face_closed(&self) -> bool {
        self.iter().all(|s| s.faces().all(|f| self.contains(&f)))
    }

    /// Text dump: one `dim v0 v1 ...` line per simplex, by dimension.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# counts {:?}", self.counts());
        for s in self.iter() {
            let _ = writeln!(out, "{s}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ComplexError> {
        let mut simplices = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let s = parse_simplex_fields(line.split_whitespace(), i + 1)?;
            simplices.push(s);
        }
        simplices.sort_by_key(Simplex::dim);
        let mut k = Self::new();
        for s in simplices {
            if k.contains(&s) {
                return Err(ComplexError::AlreadyPresent(s));
            }
            if let Some(f) = s.faces().find(|f| !k.contains(f)) {
                return Err(ComplexError::MissingFace {
                    simplex: s,
                    face: f,
                });
            }
            k.insert_unchecked(s);
        }
        Ok(k)
    }
}

/// Parses `dim v0 v1 ...`, checking the vertex count matches `dim`.
pub(crate) fn parse_simplex_fields<'a>(
    mut fields: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<Simplex, ComplexError> {
    let err = |msg: String| ComplexError::Parse { line, msg };
    let dim: usize = fields
        .next()
        .ok_or_else(|| err("missing dimension".into()))?
        .parse()
        .map_err(|e| err(format!("bad dimension: {e}")))?;
    let verts = fields
        .map(|f| {
            f.parse::<Vertex>()
                .map_err(|e| err(format!("bad vertex {f:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if verts.len() != dim + 1 {
        return Err(err(format!(
            "dimension {dim} needs {} vertices, got {}",
            dim + 1,
            verts.len()
        )));
    }
    if verts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(err("vertices must be strictly increasing".into()));
    }
    Simplex::normalize(&verts)
}

/// One local update: a set of deletions and a set of insertions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EditEvent {
    pub inserted: IndexSet<Simplex>,
    pub deleted: IndexSet<Simplex>,
    pub label: String,
}

impl EditEvent {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    pub fn insert(mut self, s: Simplex) -> Self {
        self.inserted.insert(s);
        self
    }

    pub fn delete(mut self, s: Simplex) -> Self {
        self.deleted.insert(s);
        self
    }

    pub fn insert_all(mut self, it: impl IntoIterator<Item = Simplex>) -> Self {
        self.inserted.extend(it);
        self
    }

    pub fn delete_all(mut self, it: impl IntoIterator<Item = Simplex>) -> Self {
        self.deleted.extend(it);
        self
    }

    /// The event undoing this one.
    pub fn inverse(&self, label: impl Into<String>) -> Self {
        Self {
            inserted: self.deleted.clone(),
            deleted: self.inserted.clone(),
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.inserted.len() + self.deleted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inserted_in(&self, k: usize) -> impl Iterator<Item = &Simplex> {
        self.inserted.iter().filter(move |s| s.dim() == k)
    }

    pub fn deleted_in(&self, k: usize) -> impl Iterator<Item = &Simplex> {
        self.deleted.iter().filter(move |s| s.dim() == k)
    }
}

/// Simplices whose boundary-operator incidences change under an event.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AffectedSets {
    pub sets: [IndexSet<Simplex>; MAX_DIM + 1],
    /// The row set of B_k (the (k-1)-simplices) changes.
    pub row_set_changed: [bool; MAX_DIM + 1],
    /// The column set of B_k (the k-simplices) changes.
    pub column_set_changed: [bool; MAX_DIM + 1],
}

impl AffectedSets {
    pub fn total(&self) -> usize {
        self.sets.iter().map(IndexSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

/// Compares the stars of the edited region before and after `e`.
///
/// `R_k` collects the inserted and deleted k-simplices plus every k-simplex
/// present in both states that has a changed (k-1)-face.
pub fn face_difference(
    before: &SimplicialComplex,
    after: &SimplicialComplex,
    e: &EditEvent,
) -> AffectedSets {
    let mut out = AffectedSets::default();
    for s in e.inserted.iter().chain(&e.deleted) {
        out.sets[s.dim()].insert(*s);
        out.column_set_changed[s.dim()] = true;
    }
    for k in 1..=MAX_DIM {
        out.row_set_changed[k] = out.column_set_changed[k - 1];
    }
    for f in &e.deleted {
        for c in before.cofaces(f) {
            if after.contains(c) {
                out.sets[c.dim()].insert(*c);
            }
        }
    }
    for f in &e.inserted {
        for c in after.cofaces(f) {
            if before.contains(c) {
                out.sets[c.dim()].insert(*c);
            }
        }
    }
    out
}

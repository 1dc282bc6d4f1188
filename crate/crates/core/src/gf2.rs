//! Sparse column-oriented matrices over GF(2) with incremental rank.
//!
//! Columns are kept as sorted row-index lists. Reduction follows the
//! persistent-homology convention: the pivot ("low") of a column is its
//! largest row index, and `pivot_of_row` maps each pivot row to the one column
//! owning it. Every column also carries a combination record, the set of
//! original columns whose XOR equals its reduced form. Records make column
//! replacement and deletion exact: only columns whose record depends on the
//! edited column are reset and re-reduced, everything else keeps its pivot.

use crate::hash::HashSet;
use std::fmt::Write as _;
use std::ops::Range;

use crate::hash::IndexSet;

use crate::complex::SimplicialComplex;
use crate::error::MatrixError;
use crate::simplex::Simplex;

/// Row and column identifiers are stable slots: deleting a column or row
/// leaves a hole instead of renumbering the others.
pub type RowId = u32;
pub type ColId = usize;

#[derive(Clone, Debug)]
struct Column {
    original: Vec<RowId>,
    reduced: Vec<RowId>,
    /// Sorted column ids; always contains the column itself.
    record: Vec<u32>,
    pivot: Option<RowId>,
}

impl Column {
    fn fresh(id: ColId, rows: Vec<RowId>) -> Self {
        Self {
            reduced: rows.clone(),
            original: rows,
            record: vec![id as u32],
            pivot: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Gf2ColumnMatrix {
    columns: Vec<Option<Column>>,
    /// `dependents[c]`: other columns whose record contains `c`.
    dependents: Vec<HashSet<u32>>,
    row_alive: Vec<bool>,
    pivot_of_row: Vec<Option<u32>>,
    n_rows: usize,
    n_cols: usize,
    rank: usize,
    xor_ops: u64,
    scratch: Vec<RowId>,
}

/// Symmetric difference of two sorted lists.
pub fn xor_sorted<T: Ord + Copy>(a: &[T], b: &[T], out: &mut Vec<T>) {
    out.clear();
    out.reserve(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Rank by plain left-to-right column reduction, without combination records.
pub fn column_rank(n_rows: usize, mut columns: Vec<Vec<RowId>>) -> usize {
    let mut owner: Vec<u32> = vec![u32::MAX; n_rows];
    let mut rank = 0;
    let mut buf = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            let o = owner[low as usize];
            if o == u32::MAX {
                owner[low as usize] = j as u32;
                rank += 1;
                break;
            }
            xor_sorted(&columns[j], &columns[o as usize], &mut buf);
            std::mem::swap(&mut columns[j], &mut buf);
        }
    }
    rank
}

impl Gf2ColumnMatrix {
    /// An `n_rows` × 0 matrix.
    pub fn new(n_rows: usize) -> Self {
        Self {
            row_alive: vec![true; n_rows],
            pivot_of_row: vec![None; n_rows],
            n_rows,
            ..Self::default()
        }
    }

    /// Builds an unreduced matrix from explicit columns. Each column is sorted
    /// and deduplicated (duplicate entries cancel mod 2).
    pub fn from_columns(n_rows: usize, columns: Vec<Vec<RowId>>) -> Result<Self, MatrixError> {
        let mut m = Self::new(n_rows);
        for rows in columns {
            let rows = m.canonical_rows(rows)?;
            let id = m.columns.len();
            m.columns.push(Some(Column::fresh(id, rows)));
            m.dependents.push(HashSet::default());
            m.n_cols += 1;
        }
        Ok(m)
    }

    /// The boundary matrix B_k of `complex`: one column per k-simplex of
    /// `cols`, one row per (k-1)-simplex of `rows`, indexed by position.
    pub fn from_boundary(
        complex: &SimplicialComplex,
        k: usize,
        rows: &IndexSet<Simplex>,
        cols: &IndexSet<Simplex>,
    ) -> Result<Self, MatrixError> {
        let mut columns = Vec::with_capacity(cols.len());
        for s in cols {
            debug_assert_eq!(s.dim(), k);
            if !complex.contains(s) {
                return Err(MatrixError::Unindexed(*s));
            }
            let col = s
                .faces()
                .map(|f| {
                    rows.get_index_of(&f)
                        .map(|i| i as RowId)
                        .ok_or(MatrixError::Unindexed(f))
                })
                .collect::<Result<Vec<_>, _>>()?;
            columns.push(col);
        }
        Self::from_columns(rows.len(), columns)
    }

    fn canonical_rows(&self, mut rows: Vec<RowId>) -> Result<Vec<RowId>, MatrixError> {
        rows.sort_unstable();
        let mut out: Vec<RowId> = Vec::with_capacity(rows.len());
        for r in rows {
            if !self.row_alive.get(r as usize).copied().unwrap_or(false) {
                return Err(MatrixError::NoSuchRow(r));
            }
            if out.last() == Some(&r) {
                out.pop();
            } else {
                out.push(r);
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Total XOR operations performed since construction.
    pub fn xor_ops(&self) -> u64 {
        self.xor_ops
    }

    /// Nonzeros of the original (unreduced) columns.
    pub fn nnz(&self) -> usize {
        self.live_columns().map(|(_, c)| c.original.len()).sum()
    }

    pub fn column_ids(&self) -> impl Iterator<Item = ColId> + '_ {
        self.live_columns().map(|(j, _)| j)
    }

    pub fn row_ids(&self) -> impl Iterator<Item = RowId> + '_ {
        self.row_alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(r, _)| r as RowId)
    }

    fn live_columns(&self) -> impl Iterator<Item = (ColId, &Column)> {
        self.columns
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.as_ref().map(|c| (j, c)))
    }

    fn col(&self, j: ColId) -> Result<&Column, MatrixError> {
        self.columns
            .get(j)
            .and_then(Option::as_ref)
            .ok_or(MatrixError::NoSuchColumn(j))
    }

    fn col_mut(&mut self, j: ColId) -> &mut Column {
        self.columns[j].as_mut().expect("live column")
    }

    pub fn original(&self, j: ColId) -> Result<&[RowId], MatrixError> {
        Ok(&self.col(j)?.original)
    }

    pub fn reduced(&self, j: ColId) -> Result<&[RowId], MatrixError> {
        Ok(&self.col(j)?.reduced)
    }

    pub fn record(&self, j: ColId) -> Result<&[u32], MatrixError> {
        Ok(&self.col(j)?.record)
    }

    pub fn pivot_of_column(&self, j: ColId) -> Result<Option<RowId>, MatrixError> {
        Ok(self.col(j)?.pivot)
    }

    pub fn pivot_of_row(&self, r: RowId) -> Option<ColId> {
        self.pivot_of_row
            .get(r as usize)
            .copied()
            .flatten()
            .map(|c| c as ColId)
    }

    /// Rank of the original columns, computed without touching the
    /// maintained reduction.
    pub fn static_rank(&self) -> usize {
        let cols = self
            .live_columns()
            .map(|(_, c)| c.original.clone())
            .collect();
        column_rank(self.row_alive.len(), cols)
    }

    /// Reduces every column that does not yet own a pivot, in ascending
    /// column order, and returns the rank.
    pub fn reduce_all(&mut self) -> usize {
        for j in 0..self.columns.len() {
            if matches!(&self.columns[j], Some(c) if c.pivot.is_none()) {
                self.reduce_column(j);
            }
        }
        self.rank
    }

    /// Eliminates the low of column `j` against existing pivots until it is
    /// zero or claims a free pivot row.
    fn reduce_column(&mut self, j: ColId) {
        debug_assert!(self.col(j).unwrap().pivot.is_none());
        let mut scratch = std::mem::take(&mut self.scratch);
        loop {
            let Some(&low) = self.col_mut(j).reduced.last() else {
                break;
            };
            match self.pivot_of_row[low as usize] {
                Some(owner) => {
                    let owner = owner as usize;
                    debug_assert_ne!(owner, j);
                    let (src_reduced, src_record) = {
                        let c = self.columns[owner].as_ref().expect("pivot owner is live");
                        (c.reduced.clone(), c.record.clone())
                    };
                    let col = self.col_mut(j);
                    xor_sorted(&col.reduced, &src_reduced, &mut scratch);
                    std::mem::swap(&mut col.reduced, &mut scratch);
                    let mut merged = Vec::new();
                    xor_sorted(&col.record, &src_record, &mut merged);
                    col.record = merged;
                    for &x in &src_record {
                        let x = x as usize;
                        if x == j {
                            continue;
                        }
                        if !self.dependents[x].insert(j as u32) {
                            self.dependents[x].remove(&(j as u32));
                        }
                    }
                    self.xor_ops += 1;
                }
                None => {
                    self.pivot_of_row[low as usize] = Some(j as u32);
                    self.col_mut(j).pivot = Some(low);
                    self.rank += 1;
                    break;
                }
            }
        }
        self.scratch = scratch;
        debug_assert!(self.col(j).unwrap().record.contains(&(j as u32)));
    }

    /// Resets `j` and, transitively, every column whose record refers to a
    /// reset column. Returns the reset set in ascending order.
    fn reset_dependents(&mut self, j: ColId) -> Vec<ColId> {
        let mut seen: HashSet<ColId> = HashSet::default();
        let mut stack = vec![j];
        seen.insert(j);
        while let Some(c) = stack.pop() {
            for &d in &self.dependents[c] {
                if seen.insert(d as ColId) {
                    stack.push(d as ColId);
                }
            }
        }
        let mut reset: Vec<ColId> = seen.into_iter().collect();
        reset.sort_unstable();
        for &c in &reset {
            self.reset_column(c);
        }
        reset
    }

    fn reset_column(&mut self, c: ColId) {
        let col = self.columns[c].as_mut().expect("live column");
        if let Some(p) = col.pivot.take() {
            self.pivot_of_row[p as usize] = None;
            self.rank -= 1;
        }
        col.reduced.clone_from(&col.original);
        let record = std::mem::replace(&mut col.record, vec![c as u32]);
        for x in record {
            if x as usize != c {
                self.dependents[x as usize].remove(&(c as u32));
            }
        }
    }

    /// Replaces the original content of column `j` and restores a valid
    /// reduction. Returns the columns that were reset and re-reduced.
    pub fn replace_column(
        &mut self,
        j: ColId,
        rows: Vec<RowId>,
    ) -> Result<Vec<ColId>, MatrixError> {
        self.col(j)?;
        let rows = self.canonical_rows(rows)?;
        let touched = self.reset_dependents(j);
        let col = self.col_mut(j);
        col.original = rows;
        col.reduced.clone_from(&col.original);
        for &c in &touched {
            self.reduce_column(c);
        }
        Ok(touched)
    }

    /// Appends a column, reduces it, and returns its id.
    pub fn insert_column(&mut self, rows: Vec<RowId>) -> Result<ColId, MatrixError> {
        let rows = self.canonical_rows(rows)?;
        let id = self.columns.len();
        self.columns.push(Some(Column::fresh(id, rows)));
        self.dependents.push(HashSet::default());
        self.n_cols += 1;
        self.reduce_column(id);
        Ok(id)
    }

    /// Removes column `j` after resetting everything built from it. Returns
    /// the re-reduced columns (not including `j`).
    pub fn delete_column(&mut self, j: ColId) -> Result<Vec<ColId>, MatrixError> {
        self.col(j)?;
        let mut touched = self.reset_dependents(j);
        debug_assert!(self.dependents[j].is_empty());
        self.columns[j] = None;
        self.n_cols -= 1;
        touched.retain(|&c| c != j);
        for &c in &touched {
            self.reduce_column(c);
        }
        Ok(touched)
    }

    /// Drops the reduction and recomputes it from the original columns.
    pub fn reinitialize(&mut self) -> usize {
        for p in self.pivot_of_row.iter_mut() {
            *p = None;
        }
        for d in self.dependents.iter_mut() {
            d.clear();
        }
        for (j, slot) in self.columns.iter_mut().enumerate() {
            if let Some(c) = slot {
                c.reduced.clone_from(&c.original);
                c.record = vec![j as u32];
                c.pivot = None;
            }
        }
        self.rank = 0;
        self.reduce_all()
    }

    /// Appends `count` empty rows, then re-initializes the reduction.
    pub fn add_rows(&mut self, count: usize) -> Range<RowId> {
        let start = self.row_alive.len() as RowId;
        self.row_alive.extend(std::iter::repeat_n(true, count));
        self.pivot_of_row
            .extend(std::iter::repeat_n(None, count));
        self.n_rows += count;
        self.reinitialize();
        start..start + count as RowId
    }

    /// Removes rows that carry no entry in any original column, then
    /// re-initializes the reduction. Fails without modifying the matrix if a
    /// row is unknown or still in use.
    pub fn remove_rows(&mut self, rows: &[RowId]) -> Result<(), MatrixError> {
        let doomed: HashSet<RowId> = rows.iter().copied().collect();
        for &r in &doomed {
            if !self.row_alive.get(r as usize).copied().unwrap_or(false) {
                return Err(MatrixError::NoSuchRow(r));
            }
        }
        for (j, c) in self.live_columns() {
            if let Some(&row) = c.original.iter().find(|r| doomed.contains(r)) {
                return Err(MatrixError::RowInUse { row, col: j });
            }
        }
        for &r in &doomed {
            self.row_alive[r as usize] = false;
        }
        self.n_rows -= doomed.len();
        self.reinitialize();
        Ok(())
    }

    /// Id the next added row will receive.
    pub fn next_row_id(&self) -> RowId {
        self.row_alive.len() as RowId
    }

    /// Applies a batch of structural edits and re-initializes the reduction
    /// once: deletes `delete_cols`, appends `add_rows` rows, replaces column
    /// contents, appends `insert_cols`, then removes `remove_rows`. Returns
    /// the ids of the inserted columns. Validation happens before any change.
    pub fn restructure(
        &mut self,
        delete_cols: &[ColId],
        add_rows: usize,
        replace: Vec<(ColId, Vec<RowId>)>,
        insert_cols: Vec<Vec<RowId>>,
        remove_rows: &[RowId],
    ) -> Result<Vec<ColId>, MatrixError> {
        let doomed_cols: HashSet<ColId> = delete_cols.iter().copied().collect();
        for &j in delete_cols.iter().chain(replace.iter().map(|(j, _)| j)) {
            self.col(j)?;
        }
        let doomed_rows: HashSet<RowId> = remove_rows.iter().copied().collect();
        let next = self.next_row_id() as usize + add_rows;
        let check_rows = |rows: &[RowId]| -> Result<(), MatrixError> {
            for &r in rows {
                let alive =
                    (r as usize) < next && self.row_alive.get(r as usize).copied().unwrap_or(true);
                if !alive || doomed_rows.contains(&r) {
                    return Err(MatrixError::NoSuchRow(r));
                }
            }
            Ok(())
        };
        for rows in replace.iter().map(|(_, c)| c).chain(&insert_cols) {
            check_rows(rows)?;
        }
        let replaced: HashSet<ColId> = replace.iter().map(|(j, _)| *j).collect();
        for &r in &doomed_rows {
            if !self.row_alive.get(r as usize).copied().unwrap_or(false) {
                return Err(MatrixError::NoSuchRow(r));
            }
        }
        for (j, c) in self.live_columns() {
            if doomed_cols.contains(&j) || replaced.contains(&j) {
                continue;
            }
            if let Some(&row) = c.original.iter().find(|r| doomed_rows.contains(r)) {
                return Err(MatrixError::RowInUse { row, col: j });
            }
        }

        for &j in &doomed_cols {
            self.columns[j] = None;
            self.n_cols -= 1;
        }
        self.row_alive
            .extend(std::iter::repeat_n(true, add_rows));
        self.pivot_of_row
            .extend(std::iter::repeat_n(None, add_rows));
        self.n_rows += add_rows;
        for (j, rows) in replace {
            let rows = self.canonical_rows(rows)?;
            self.col_mut(j).original = rows;
        }
        let mut ids = Vec::with_capacity(insert_cols.len());
        for rows in insert_cols {
            let rows = self.canonical_rows(rows)?;
            let id = self.columns.len();
            self.columns.push(Some(Column::fresh(id, rows)));
            self.dependents.push(HashSet::default());
            self.n_cols += 1;
            ids.push(id);
        }
        for &r in &doomed_rows {
            self.row_alive[r as usize] = false;
        }
        self.n_rows -= doomed_rows.len();
        self.reinitialize();
        Ok(ids)
    }

    /// One line per live column: `id: rows... | pivot=r` or `| pivot=none`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (j, c) in self.live_columns() {
            let _ = write!(out, "{j}:");
            for r in &c.original {
                let _ = write!(out, " {r}");
            }
            match c.pivot {
                Some(p) => {
                    let _ = writeln!(out, " | pivot={p}");
                }
                None => {
                    let _ = writeln!(out, " | pivot=none");
                }
            }
        }
        out
    }

    /// Exhaustive consistency check of pivots, records and rank.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut pivots = 0;
        let mut buf = Vec::new();
        for (j, c) in self.live_columns() {
            let mut acc: Vec<RowId> = Vec::new();
            for &x in &c.record {
                let src = self
                    .col(x as usize)
                    .map_err(|e| format!("column {j}: {e}"))?;
                xor_sorted(&acc, &src.original, &mut buf);
                std::mem::swap(&mut acc, &mut buf);
            }
            if acc != c.reduced {
                return Err(format!(
                    "column {j}: record does not reproduce reduced form"
                ));
            }
            if !c.record.contains(&(j as u32)) {
                return Err(format!("column {j}: record lost the column itself"));
            }
            match (c.reduced.last(), c.pivot) {
                (None, None) => {}
                (Some(&low), Some(p)) if low == p => {
                    if self.pivot_of_row[p as usize] != Some(j as u32) {
                        return Err(format!("column {j}: pivot row {p} owned elsewhere"));
                    }
                    pivots += 1;
                }
                (Some(_), None) => return Err(format!("column {j}: nonzero without pivot")),
                _ => return Err(format!("column {j}: pivot does not match low")),
            }
            for &x in &c.record {
                if x as usize != j && !self.dependents[x as usize].contains(&(j as u32)) {
                    return Err(format!("column {j}: missing reverse link from {x}"));
                }
            }
        }
        let owned = self.pivot_of_row.iter().filter(|p| p.is_some()).count();
        if owned != pivots || pivots != self.rank {
            return Err(format!(
                "rank {} but {} owned rows and {} pivot columns",
                self.rank, owned, pivots
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;
    use crate::simplex;
    use proptest::prelude::*;

    /// Dense elimination used as the reference rank. Independent of the
    /// sparse reducer: rows as bitmasks over at most 128 columns.
    pub(crate) fn dense_rank(n_rows: usize, cols: &[Vec<RowId>]) -> usize {
        assert!(cols.len() <= 128);
        let mut rows = vec![0u128; n_rows];
        for (j, c) in cols.iter().enumerate() {
            for &r in c {
                rows[r as usize] ^= 1u128 << j;
            }
        }
        let mut rank = 0;
        for bit in 0..cols.len() {
            let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
                continue;
            };
            rows.swap(rank, p);
            for i in 0..rows.len() {
                if i != rank && rows[i] >> bit & 1 == 1 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }

    fn triangle() -> SimplicialComplex {
        SimplicialComplex::from_facets([[0, 1, 2]]).unwrap()
    }

    fn octahedron() -> SimplicialComplex {
        SimplicialComplex::from_facets([
            [0, 1, 4],
            [1, 2, 4],
            [2, 3, 4],
            [3, 0, 4],
            [1, 0, 5],
            [2, 1, 5],
            [3, 2, 5],
            [0, 3, 5],
        ])
        .unwrap()
    }

    #[test]
    fn triangle_boundaries() {
        let k = triangle();
        let b2 = Gf2ColumnMatrix::from_boundary(&k, 2, k.cells(1), k.cells(2)).unwrap();
        assert_eq!((b2.n_rows(), b2.n_cols()), (3, 1));
        assert_eq!(b2.original(0).unwrap(), &[0, 1, 2]);
        let b1 = Gf2ColumnMatrix::from_boundary(&k, 1, k.cells(0), k.cells(1)).unwrap();
        assert_eq!((b1.n_rows(), b1.n_cols()), (3, 3));
        assert!(b1.column_ids().all(|j| b1.original(j).unwrap().len() == 2));
        assert_eq!(b1.rank(), 0, "unreduced until reduce_all");
    }

    #[test]
    fn octahedron_b2_shape_and_rank() {
        let k = octahedron();
        let mut b2 = Gf2ColumnMatrix::from_boundary(&k, 2, k.cells(1), k.cells(2)).unwrap();
        assert_eq!((b2.n_rows(), b2.n_cols()), (12, 8));
        assert!(b2.column_ids().all(|j| b2.original(j).unwrap().len() == 3));
        let mut row_deg = [0; 12];
        for j in b2.column_ids() {
            for &r in b2.original(j).unwrap() {
                row_deg[r as usize] += 1;
            }
        }
        assert!(row_deg.iter().all(|&d| d == 2));
        assert_eq!(b2.reduce_all(), 7);
        b2.check_invariants().unwrap();
    }

    #[test]
    fn octahedron_b1_rank() {
        let k = octahedron();
        let mut b1 = Gf2ColumnMatrix::from_boundary(&k, 1, k.cells(0), k.cells(1)).unwrap();
        assert_eq!(b1.reduce_all(), 5);
        b1.check_invariants().unwrap();
    }

    #[test]
    fn frozen_oracle_values() {
        // Ranks computed once with `dense_rank` and frozen.
        let k = octahedron();
        let cols = |d: usize| -> Vec<Vec<RowId>> {
            k.cells(d)
                .iter()
                .map(|s| {
                    s.faces()
                        .map(|f| k.index_of(&f).unwrap() as RowId)
                        .collect()
                })
                .collect()
        };
        assert_eq!(dense_rank(12, &cols(2)), 7);
        assert_eq!(dense_rank(6, &cols(1)), 5);
    }

    #[test]
    fn lean_rank_agrees() {
        let cols = vec![vec![0, 2], vec![1, 2], vec![0, 1], vec![], vec![3]];
        assert_eq!(column_rank(4, cols.clone()), dense_rank(4, &cols));
        let m = Gf2ColumnMatrix::from_columns(4, cols).unwrap();
        assert_eq!(m.static_rank(), 3);
    }

    #[test]
    fn zero_matrix() {
        let mut m = Gf2ColumnMatrix::from_columns(4, vec![vec![], vec![]]).unwrap();
        assert_eq!(m.reduce_all(), 0);
    }

    #[test]
    fn insert_zero_and_duplicate_columns() {
        let mut m = Gf2ColumnMatrix::from_columns(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        m.reduce_all();
        assert_eq!(m.rank(), 2);
        m.insert_column(vec![]).unwrap();
        assert_eq!(m.rank(), 2);
        let j = m.insert_column(vec![0, 2]).unwrap();
        assert_eq!(m.rank(), 2);
        assert!(m.reduced(j).unwrap().is_empty());
        assert_eq!(
            dense_rank(4, &[vec![0, 2], vec![1, 3], vec![], vec![0, 2]]),
            2
        );
        m.check_invariants().unwrap();
    }

    #[test]
    fn delete_only_nonzero_column() {
        let mut m = Gf2ColumnMatrix::from_columns(3, vec![vec![], vec![0, 1], vec![]]).unwrap();
        m.reduce_all();
        assert_eq!(m.rank(), 1);
        m.delete_column(1).unwrap();
        assert_eq!(m.rank(), 0);
        assert_eq!(m.delete_column(1), Err(MatrixError::NoSuchColumn(1)));
    }

    #[test]
    fn replace_is_idempotent_and_isolated() {
        let mut m =
            Gf2ColumnMatrix::from_columns(5, vec![vec![0, 1], vec![2, 3], vec![1, 4]]).unwrap();
        m.reduce_all();
        let before = m.rank();
        let touched = m.replace_column(1, vec![2, 3]).unwrap();
        assert_eq!(touched, vec![1]);
        assert_eq!(m.rank(), before);
        m.check_invariants().unwrap();
    }

    #[test]
    fn replace_cascades_through_records() {
        // Column 1 reduces against column 0; replacing 0 must reset 1.
        let mut m = Gf2ColumnMatrix::from_columns(3, vec![vec![0, 2], vec![1, 2]]).unwrap();
        m.reduce_all();
        assert_eq!(m.record(1).unwrap(), &[0, 1]);
        let touched = m.replace_column(0, vec![0]).unwrap();
        assert_eq!(touched, vec![0, 1]);
        assert_eq!(m.rank(), 2);
        m.check_invariants().unwrap();
    }

    #[test]
    fn rows_add_and_remove() {
        let k = octahedron();
        let mut open = k.clone();
        open.apply_event(
            &crate::EditEvent::new("open")
                .delete(simplex![0, 1, 4])
                .delete(simplex![1, 2, 4])
                .delete(simplex![1, 4]),
        )
        .unwrap();
        // Keep the deleted edge as an all-zero row of B_2.
        let mut rows = open.cells(1).clone();
        rows.insert(simplex![1, 4]);
        let mut b2 = Gf2ColumnMatrix::from_boundary(&open, 2, &rows, open.cells(2)).unwrap();
        assert_eq!(b2.reduce_all(), 6);
        let zero_row = rows.get_index_of(&simplex![1, 4]).unwrap() as RowId;
        b2.remove_rows(&[zero_row]).unwrap();
        assert_eq!(b2.rank(), 6);
        assert_eq!(b2.n_rows(), 11);
        let r = b2.add_rows(3);
        assert_eq!(r, 12..15);
        assert_eq!(b2.rank(), 6);
        let used = b2.original(0).unwrap()[0];
        assert!(matches!(
            b2.remove_rows(&[used]),
            Err(MatrixError::RowInUse { .. })
        ));
        b2.check_invariants().unwrap();
    }

    #[test]
    fn restructure_batch() {
        let mut m =
            Gf2ColumnMatrix::from_columns(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        m.reduce_all();
        assert_eq!(m.rank(), 2);
        let r = m.next_row_id();
        let ids = m
            .restructure(&[2], 2, vec![(1, vec![1, r])], vec![vec![r, r + 1]], &[2])
            .unwrap();
        assert_eq!(ids, vec![3]);
        assert_eq!(m.n_rows(), 4);
        assert_eq!(m.n_cols(), 3);
        assert_eq!(
            m.rank(),
            dense_rank(5, &[vec![0, 1], vec![1, 3], vec![3, 4]])
        );
        m.check_invariants().unwrap();
        assert!(matches!(
            m.restructure(&[], 0, vec![], vec![], &[0]),
            Err(MatrixError::RowInUse { .. })
        ));
    }

    #[test]
    fn dump_format() {
        let mut m = Gf2ColumnMatrix::from_columns(3, vec![vec![0, 2], vec![]]).unwrap();
        m.reduce_all();
        assert_eq!(m.dump(), "0: 0 2 | pivot=2\n1: | pivot=none\n");
    }

    #[test]
    fn random_replace_script_matches_dense() {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(7);
        let n = 20;
        let mut cols: Vec<Vec<RowId>> = (0..n)
            .map(|_| {
                (0..n as RowId)
                    .filter(|_| rng.next_u64() % 5 == 0)
                    .collect()
            })
            .collect();
        let mut m = Gf2ColumnMatrix::from_columns(n, cols.clone()).unwrap();
        m.reduce_all();
        for _ in 0..100 {
            let j = (rng.next_u64() % n as u64) as usize;
            let rows: Vec<RowId> = (0..n as RowId)
                .filter(|_| rng.next_u64() % 5 == 0)
                .collect();
            cols[j] = rows.clone();
            m.replace_column(j, rows).unwrap();
            assert_eq!(m.rank(), dense_rank(n, &cols));
        }
        m.check_invariants().unwrap();
    }

    #[derive(Clone, Debug)]
    enum Op {
        Insert(Vec<RowId>),
        Delete(usize),
        Replace(usize, Vec<RowId>),
    }

    fn column_strategy(n_rows: u32) -> impl Strategy<Value = Vec<RowId>> {
        prop::collection::btree_set(0..n_rows, 0..6).prop_map(|s| s.into_iter().collect())
    }

    fn op_strategy(n_rows: u32) -> impl Strategy<Value = Op> {
        prop_oneof![
            column_strategy(n_rows).prop_map(Op::Insert),
            any::<usize>().prop_map(Op::Delete),
            (any::<usize>(), column_strategy(n_rows)).prop_map(|(j, c)| Op::Replace(j, c)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn edit_scripts_track_dense_rank(
            n_rows in 1u32..24,
            ops in prop::collection::vec(op_strategy(24), 1..80),
        ) {
            let mut m = Gf2ColumnMatrix::new(n_rows as usize);
            let mut live: Vec<(ColId, Vec<RowId>)> = Vec::new();
            for op in ops {
                match op {
                    Op::Insert(c) => {
                        let c: Vec<_> = c.into_iter().filter(|&r| r < n_rows).collect();
                        let id = m.insert_column(c.clone()).unwrap();
                        live.push((id, c));
                    }
                    Op::Delete(i) if !live.is_empty() => {
                        let (id, _) = live.remove(i % live.len());
                        m.delete_column(id).unwrap();
                    }
                    Op::Replace(i, c) if !live.is_empty() => {
                        let c: Vec<_> = c.into_iter().filter(|&r| r < n_rows).collect();
                        let at = i % live.len();
                        m.replace_column(live[at].0, c.clone()).unwrap();
                        live[at].1 = c;
                    }
                    _ => {}
                }
                if live.len() <= 128 {
                    let cols: Vec<_> = live.iter().map(|(_, c)| c.clone()).collect();
                    prop_assert_eq!(m.rank(), dense_rank(n_rows as usize, &cols));
                }
                prop_assert!(m.check_invariants().is_ok(), "{:?}", m.check_invariants());
            }
        }
    }
}

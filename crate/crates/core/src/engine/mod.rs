//! Dynamic Betti number maintenance.
//!
//! The engine keeps a discrete Morse matching of the current complex and the
//! reduced critical boundary matrices. Between recompressions the matching
//! is frozen: inserted simplices join as critical cells, and a pair whose
//! upper simplex is deleted is dissolved, its surviving lower simplex becoming
//! critical. Matrix maintenance is lazy. Edits are queued until a step cannot
//! be answered by the gates, and only then are the affected critical columns
//! recomputed and re-reduced.

mod gates;
mod policy;

use std::collections::VecDeque;

use crate::hash::{HashMap, HashSet};

use crate::hash::IndexSet;

pub use gates::{GateConfig, GateState};
pub use policy::{locality_ratio, should_recompress, PolicyParams, Trigger};

use crate::baselines::{oracle_betti_limited, DEFAULT_ORACLE_LIMIT};
use crate::betti::Betti;
use crate::complex::{EditEvent, SimplicialComplex};
use crate::error::EngineError;
use crate::gf2::{ColId, Gf2ColumnMatrix, RowId};
use crate::morse::{decompose, FlowMemo, MorseMatching, Role};
use crate::simplex::{Simplex, MAX_DIM};

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub policy: PolicyParams,
    pub gates: GateConfig,
    /// Cross-check every answer against the dense oracle.
    pub paranoid: bool,
    pub oracle_limit: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            policy: PolicyParams::default(),
            gates: GateConfig::none(),
            paranoid: false,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        }
    }
}

/// Metrics of one update (or of initialization, with `t = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub t: u64,
    pub betti: Betti,
    pub rho: f64,
    pub trigger: Option<Trigger>,
    /// Answered from the gates without matrix work.
    pub gated: bool,
    /// Number of simplices whose incidences changed.
    pub changed_simplices: usize,
    pub touched_columns: usize,
    /// Column XOR operations per boundary matrix dimension.
    pub xor_ops: [u64; MAX_DIM + 1],
    pub critical_total: usize,
    pub nnz_total: usize,
}

impl StepReport {
    pub fn recompressed(&self) -> bool {
        self.trigger.is_some()
    }
}

enum GateOutcome {
    Answer(Betti),
    Inapplicable,
    Violated,
}

#[derive(Clone, Debug)]
pub struct Engine {
    config: EngineConfig,
    complex: SimplicialComplex,
    matching: MorseMatching,
    matrices: [Gf2ColumnMatrix; MAX_DIM + 1],
    ranks: [usize; MAX_DIM + 1],
    /// Column of each critical k-simplex in B_k.
    col_of: [HashMap<Simplex, ColId>; MAX_DIM + 1],
    /// Row of each critical k-simplex in B_{k+1}.
    row_of: [HashMap<Simplex, RowId>; MAX_DIM + 1],
    /// Critical cells whose columns must be (re)computed.
    dirty: IndexSet<Simplex>,
    /// Deleted critical cells that still own a row or column.
    removed: Vec<Simplex>,
    /// Lower halves of dissolved pairs; their gradient flow changed.
    broken: IndexSet<Simplex>,
    gates: GateState,
    t: u64,
    betti: Betti,
    last: StepReport,
}

impl Engine {
    /// Computes a matching and the reduced critical matrices of `complex`.
    pub fn new(complex: SimplicialComplex, config: EngineConfig) -> Result<Self, EngineError> {
        PolicyParams::new(config.policy.m, config.policy.tau)?;
        let gates = GateState::new(config.gates);
        let mut e = Self {
            config,
            complex,
            matching: MorseMatching::new(),
            matrices: Default::default(),
            ranks: [0; MAX_DIM + 1],
            col_of: Default::default(),
            row_of: Default::default(),
            dirty: IndexSet::default(),
            removed: Vec::new(),
            broken: IndexSet::default(),
            gates,
            t: 0,
            betti: Betti::default(),
            last: StepReport {
                t: 0,
                betti: Betti::default(),
                rho: 0.0,
                trigger: None,
                gated: false,
                changed_simplices: 0,
                touched_columns: 0,
                xor_ops: [0; MAX_DIM + 1],
                critical_total: 0,
                nnz_total: 0,
            },
        };
        let touched = e.rebuild()?;
        let betti = e.betti;
        e.check(betti)?;
        e.last = e.report(
            betti,
            0.0,
            Some(Trigger::Init),
            false,
            0,
            touched,
            e.xor_counts(),
        );
        Ok(e)
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn matching(&self) -> &MorseMatching {
        &self.matching
    }

    pub fn gates(&self) -> &GateState {
        &self.gates
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn betti(&self) -> Betti {
        self.betti
    }

    /// Cached ranks of the critical boundary matrices, index 0 unused.
    pub fn ranks(&self) -> [usize; MAX_DIM + 1] {
        self.ranks
    }

    pub fn critical_counts(&self) -> [usize; MAX_DIM + 1] {
        self.matching.critical_counts()
    }

    pub fn matrix(&self, k: usize) -> &Gf2ColumnMatrix {
        &self.matrices[k]
    }

    /// Report of the most recent update, or of initialization.
    pub fn last_report(&self) -> &StepReport {
        &self.last
    }

    /// Whether edits are queued that the matrices do not reflect yet.
    pub fn has_pending(&self) -> bool {
        !(self.dirty.is_empty() && self.removed.is_empty() && self.broken.is_empty())
    }

    fn xor_counts(&self) -> [u64; MAX_DIM + 1] {
        std::array::from_fn(|k| self.matrices[k].xor_ops())
    }

    fn nnz_total(&self) -> usize {
        self.matrices.iter().map(Gf2ColumnMatrix::nnz).sum()
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        betti: Betti,
        rho: f64,
        trigger: Option<Trigger>,
        gated: bool,
        changed: usize,
        touched: usize,
        xor_ops: [u64; MAX_DIM + 1],
    ) -> StepReport {
        StepReport {
            t: self.t,
            betti,
            rho,
            trigger,
            gated,
            changed_simplices: changed,
            touched_columns: touched,
            xor_ops,
            critical_total: self.matching.critical_total(),
            nnz_total: self.nnz_total(),
        }
    }

    /// Applies one event and returns the Betti numbers of the new state.
    pub fn apply_update(&mut self, e: &EditEvent) -> Result<StepReport, EngineError> {
        self.complex.validate_event(e)?;
        self.t += 1;

        let critical_before = self.matching.critical_total();
        let affected = e
            .deleted
            .iter()
            .filter(|s| self.matching.role(s) == Role::Critical)
            .count();
        let rho = locality_ratio(affected, critical_before);

        let loops_before = self.gates.before_event(&self.complex, e);
        self.complex.apply_event(e)?;
        let newly_nonmanifold = self.gates.after_event(&self.complex, e, loops_before);
        self.record_event(e);

        let outcome = self.evaluate_gates();
        let gate_valid = !newly_nonmanifold && !matches!(outcome, GateOutcome::Violated);
        let trigger = should_recompress(&self.config.policy, self.t, rho, gate_valid);

        let xor_before = self.xor_counts();
        let (betti, gated, touched, xor_ops) = match (trigger, outcome) {
            (Some(_), _) => {
                let touched = self.rebuild()?;
                (self.betti, false, touched, self.xor_counts())
            }
            (None, GateOutcome::Answer(b)) => (b, true, 0, [0; MAX_DIM + 1]),
            (None, _) => {
                let touched = self.sync()?;
                let b = Betti::from_ranks(&self.matching.critical_counts(), &self.ranks);
                let after = self.xor_counts();
                (
                    b,
                    false,
                    touched,
                    std::array::from_fn(|k| after[k] - xor_before[k]),
                )
            }
        };
        self.betti = betti;
        self.check(betti)?;
        self.last = self.report(betti, rho, trigger, gated, e.len(), touched, xor_ops);
        Ok(self.last.clone())
    }

    fn check(&self, betti: Betti) -> Result<(), EngineError> {
        if !self.config.paranoid {
            return Ok(());
        }
        let oracle = oracle_betti_limited(&self.complex, self.config.oracle_limit)?;
        if oracle != betti {
            return Err(EngineError::Inconsistent {
                step: self.t,
                engine: betti,
                oracle,
            });
        }
        Ok(())
    }

    fn has_slot(&self, s: &Simplex) -> bool {
        self.col_of[s.dim()].contains_key(s) || self.row_of[s.dim()].contains_key(s)
    }

    /// Updates the frozen matching for an applied event and queues the
    /// matrix work it implies.
    fn record_event(&mut self, e: &EditEvent) {
        for s in &e.deleted {
            match self.matching.role(s) {
                Role::Critical => {
                    self.matching.remove_critical(s);
                    self.dirty.shift_remove(s);
                    self.broken.shift_remove(s);
                    if self.has_slot(s) {
                        self.removed.push(*s);
                    }
                }
                Role::Lower(_) => {
                    // Face closure deletes the coface too.
                    self.matching.remove_pair(s);
                }
                Role::Upper(lower) => {
                    self.matching.remove_pair(&lower);
                    if !e.deleted.contains(&lower) {
                        self.matching.add_critical(lower);
                        self.dirty.insert(lower);
                        self.broken.insert(lower);
                    }
                }
                Role::Unknown => {}
            }
        }
        for s in &e.inserted {
            self.matching.add_critical(*s);
            self.dirty.insert(*s);
        }
    }

    /// Combines the gates with the Euler characteristic. Dimensions without
    /// cells are known to be zero; if exactly one dimension remains unknown
    /// it follows from the alternating sum, and the answer is used only when
    /// that dimension keeps its previous value.
    fn evaluate_gates(&self) -> GateOutcome {
        if !self.config.gates.any() {
            return GateOutcome::Inapplicable;
        }
        let k = &self.complex;
        let counts = k.counts();
        let mut known: [Option<usize>; MAX_DIM + 1] =
            std::array::from_fn(|d| (counts[d] == 0).then_some(0));
        let gated = [
            self.gates.gate_beta0(k),
            self.gates.gate_beta1_genus0(k),
            self.gates.gate_beta2(k),
        ];
        for (d, g) in gated.into_iter().enumerate() {
            if let Some(v) = g {
                if known[d].is_some_and(|w| w != v) {
                    return GateOutcome::Violated;
                }
                known[d] = Some(v);
            }
        }
        let sign = |d: usize| if d.is_multiple_of(2) { 1i64 } else { -1 };
        let partial: i64 = known
            .iter()
            .enumerate()
            .filter_map(|(d, v)| v.map(|v| sign(d) * v as i64))
            .sum();
        let chi = k.euler_characteristic();
        let unknown: Vec<usize> = (0..=MAX_DIM).filter(|&d| known[d].is_none()).collect();
        match unknown.as_slice() {
            [] if partial == chi => GateOutcome::Answer(Betti(known.map(|v| v.unwrap_or(0)))),
            [] => GateOutcome::Violated,
            &[d] => {
                let v = sign(d) * (chi - partial);
                if v < 0 {
                    return GateOutcome::Violated;
                }
                if v as usize != self.betti.get(d) {
                    return GateOutcome::Inapplicable;
                }
                known[d] = Some(v as usize);
                GateOutcome::Answer(Betti(known.map(|v| v.unwrap_or(0))))
            }
            _ => GateOutcome::Inapplicable,
        }
    }

    /// Fresh matching, matrices, ranks and gate counters. Returns the number
    /// of columns reduced.
    fn rebuild(&mut self) -> Result<usize, EngineError> {
        let (matching, mut cc) = decompose(&self.complex);
        self.matching = matching;
        self.ranks = cc.reduce_all();
        for d in 0..=MAX_DIM {
            let slots: HashMap<Simplex, u32> = cc.cells[d]
                .iter()
                .enumerate()
                .map(|(i, s)| (*s, i as u32))
                .collect();
            self.col_of[d] = if d >= 1 {
                slots.iter().map(|(s, &i)| (*s, i as ColId)).collect()
            } else {
                HashMap::default()
            };
            self.row_of[d] = if d < MAX_DIM {
                slots
            } else {
                HashMap::default()
            };
        }
        self.matrices = cc.matrices;
        self.dirty.clear();
        self.removed.clear();
        self.broken.clear();
        self.betti = Betti::from_ranks(&self.matching.critical_counts(), &self.ranks);

        self.gates.resync(&self.complex);
        let k = &self.complex;
        let gated = [
            self.gates.gate_beta0(k),
            self.gates.gate_beta1_genus0(k),
            self.gates.gate_beta2(k),
        ];
        for (d, g) in gated.into_iter().enumerate() {
            if g.is_some_and(|v| v != self.betti.get(d)) {
                self.gates.disabled[d] = true;
            }
        }
        Ok(self.matrices.iter().map(Gf2ColumnMatrix::n_cols).sum())
    }

    /// Brings the matrices up to date with the queued edits. Returns the
    /// number of columns re-reduced.
    fn sync(&mut self) -> Result<usize, EngineError> {
        if !self.has_pending() {
            return Ok(0);
        }
        // Critical cells whose gradient flow passes through a dissolved pair.
        let mut queue: VecDeque<Simplex> = self
            .broken
            .iter()
            .filter(|x| self.matching.role(x) == Role::Critical)
            .copied()
            .collect();
        let mut seen: HashSet<Simplex> = queue.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            for c in self.complex.cofaces(&x) {
                match self.matching.role(c) {
                    Role::Critical if self.col_of[c.dim()].contains_key(c) => {
                        self.dirty.insert(*c);
                    }
                    Role::Upper(y) if y != x && seen.insert(y) => queue.push_back(y),
                    _ => {}
                }
            }
        }

        let mut removed: [Vec<Simplex>; MAX_DIM + 1] = Default::default();
        for s in self.removed.drain(..) {
            removed[s.dim()].push(s);
        }
        let mut dirty: [Vec<Simplex>; MAX_DIM + 1] = Default::default();
        for s in self.dirty.drain(..) {
            dirty[s.dim()].push(s);
        }
        self.broken.clear();

        let mut touched = 0;
        let mut memo = FlowMemo::new();
        for k in 1..=MAX_DIM {
            let rows = &mut self.row_of[k - 1];
            let cols = &mut self.col_of[k];
            let m = &mut self.matrices[k];

            let delete: Vec<ColId> = removed[k].iter().filter_map(|s| cols.remove(s)).collect();
            let drop_rows: Vec<RowId> = removed[k - 1]
                .iter()
                .filter_map(|s| rows.remove(s))
                .collect();
            let new_rows: Vec<Simplex> = dirty[k - 1]
                .iter()
                .filter(|s| !rows.contains_key(s))
                .copied()
                .collect();
            let base = m.next_row_id();
            for (i, s) in new_rows.iter().enumerate() {
                rows.insert(*s, base + i as RowId);
            }

            memo.clear();
            let index = |s: &Simplex| rows.get(s).copied();
            let mut replace = Vec::new();
            let mut insert = Vec::new();
            let mut inserted_cells = Vec::new();
            for s in &dirty[k] {
                let col = memo.boundary_column(&self.matching, s, &index)?;
                match cols.get(s) {
                    Some(&j) => replace.push((j, col)),
                    None => {
                        insert.push(col);
                        inserted_cells.push(*s);
                    }
                }
            }
            if delete.is_empty()
                && drop_rows.is_empty()
                && new_rows.is_empty()
                && replace.is_empty()
                && insert.is_empty()
            {
                continue;
            }
            if drop_rows.is_empty() && new_rows.is_empty() {
                for j in delete {
                    touched += m.delete_column(j)?.len();
                }
                for (j, col) in replace {
                    touched += m.replace_column(j, col)?.len();
                }
                for (s, col) in inserted_cells.into_iter().zip(insert) {
                    cols.insert(s, m.insert_column(col)?);
                    touched += 1;
                }
            } else {
                let ids = m.restructure(&delete, new_rows.len(), replace, insert, &drop_rows)?;
                for (s, j) in inserted_cells.into_iter().zip(ids) {
                    cols.insert(s, j);
                }
                touched += m.n_cols();
            }
            self.ranks[k] = m.rank();
        }
        // Removed vertices own only rows of B_1 (handled at k = 1); top
        // cells own only columns of B_3 (handled at k = 3).
        Ok(touched)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex;
    use proptest::prelude::*;

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

    fn open() -> EditEvent {
        EditEvent::new("open")
            .delete(simplex![0, 1, 4])
            .delete(simplex![1, 2, 4])
            .delete(simplex![1, 4])
    }

    fn config(gates: GateConfig, m: u64, tau: f64) -> EngineConfig {
        EngineConfig {
            policy: PolicyParams { m, tau },
            gates,
            paranoid: true,
            ..EngineConfig::default()
        }
    }

    #[test]
    fn initialize_small_complexes() {
        let e = Engine::new(octahedron(), EngineConfig::default()).unwrap();
        assert_eq!(e.betti(), Betti::new(&[1, 0, 1]));
        assert_eq!(e.gates().boundary_edge_count, 0);
        let v = Engine::new(
            SimplicialComplex::from_facets([[0]]).unwrap(),
            EngineConfig::default(),
        )
        .unwrap();
        assert_eq!(v.betti(), Betti::new(&[1]));
        assert_eq!(v.matrix(1).n_cols(), 0);
        let tet = Engine::new(
            SimplicialComplex::from_facets([[0, 1, 2, 3]]).unwrap(),
            EngineConfig::default(),
        )
        .unwrap();
        assert_eq!(tet.betti(), Betti::new(&[1, 0, 0, 0]));
        assert_eq!(tet.last_report().trigger, Some(Trigger::Init));
    }

    #[test]
    fn open_close_gated() {
        let gates = GateConfig {
            beta0: true,
            beta2: true,
            beta1_genus0: false,
        };
        let mut e = Engine::new(octahedron(), config(gates, 32, 0.99)).unwrap();
        let r = e.apply_update(&open()).unwrap();
        assert_eq!(r.betti, Betti::new(&[1, 0, 0]));
        assert!(r.gated);
        assert_eq!(e.gates().boundary_edge_count, 4);
        assert_eq!(r.xor_ops, [0; 4]);
        let r = e.apply_update(&open().inverse("close")).unwrap();
        assert_eq!(r.betti, Betti::new(&[1, 0, 1]));
        assert_eq!(e.gates().boundary_edge_count, 0);
    }

    #[test]
    fn open_close_ungated_uses_matrices() {
        let mut e = Engine::new(octahedron(), config(GateConfig::none(), 1000, 0.99)).unwrap();
        for i in 0..10 {
            let ev = if i % 2 == 0 {
                open()
            } else {
                open().inverse("close")
            };
            let r = e.apply_update(&ev).unwrap();
            assert!(!r.gated && !r.recompressed());
            let want = if i % 2 == 0 {
                Betti::new(&[1, 0, 0])
            } else {
                Betti::new(&[1, 0, 1])
            };
            assert_eq!(r.betti, want);
            assert!(!e.has_pending());
        }
    }

    #[test]
    fn periodic_schedule() {
        let mut e = Engine::new(octahedron(), config(GateConfig::none(), 4, 0.99)).unwrap();
        let mut at = Vec::new();
        for i in 1..=12u64 {
            let ev = if i % 2 == 1 {
                open()
            } else {
                open().inverse("close")
            };
            if e.apply_update(&ev).unwrap().recompressed() {
                at.push(i);
            }
        }
        assert_eq!(at, vec![4, 8, 12]);
    }

    #[test]
    fn invalid_event_leaves_state() {
        let mut e = Engine::new(octahedron(), EngineConfig::default()).unwrap();
        let bad = EditEvent::new("bad").delete(simplex![1, 4]);
        assert!(e.apply_update(&bad).is_err());
        assert_eq!(e.t(), 0);
        assert_eq!(e.complex(), &octahedron());
    }

    #[test]
    fn nonmanifold_fin_triggers_validity() {
        let mut e = Engine::new(octahedron(), config(GateConfig::all(), 1000, 0.99)).unwrap();
        let fin = EditEvent::new("fin")
            .insert(simplex![6])
            .insert(simplex![1, 6])
            .insert(simplex![4, 6])
            .insert(simplex![1, 4, 6]);
        let r = e.apply_update(&fin).unwrap();
        assert_eq!(r.trigger, Some(Trigger::Validity));
        assert_eq!(r.betti, Betti::new(&[1, 0, 1]));
        let r = e.apply_update(&fin.inverse("unfin")).unwrap();
        assert_eq!(r.betti, Betti::new(&[1, 0, 1]));
    }

    #[test]
    fn disconnected_complex_disables_beta0_gate() {
        let mut k = octahedron();
        k.insert_closure(simplex![20, 21, 22]);
        let e = Engine::new(k, config(GateConfig::all(), 1000, 0.99)).unwrap();
        assert_eq!(e.betti(), Betti::new(&[2, 0, 1]));
        assert!(e.gates().disabled[0]);
    }

    /// A random valid event: delete a maximal simplex or insert a simplex
    /// whose faces are present.
    fn random_event(k: &SimplicialComplex, pick: u64, vertex: u32, size: usize) -> EditEvent {
        let cells: Vec<Simplex> = k.iter().copied().collect();
        let maximal: Vec<Simplex> = cells
            .iter()
            .filter(|s| k.cofaces(s).is_empty())
            .copied()
            .collect();
        if pick.is_multiple_of(2) && !maximal.is_empty() {
            let s = maximal[(pick / 2) as usize % maximal.len()];
            return EditEvent::new("del").delete(s);
        }
        let mut vs: Vec<u32> = k.cells(0).iter().map(|v| v.vertices()[0]).collect();
        vs.push(vertex);
        vs.sort_unstable();
        vs.dedup();
        let start = (pick / 2) as usize % vs.len();
        let chosen: Vec<u32> = vs
            .iter()
            .cycle()
            .skip(start)
            .take(size.min(vs.len()))
            .copied()
            .collect();
        let s = Simplex::normalize(&chosen).unwrap();
        let mut ev = EditEvent::new("ins");
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            if !k.contains(&x) && ev.inserted.insert(x) {
                stack.extend(x.faces());
            }
        }
        ev
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn random_edit_streams_match_oracle(
            facets in prop::collection::vec(prop::collection::btree_set(0u32..7, 1..=4), 1..6),
            script in prop::collection::vec((any::<u64>(), 0u32..9, 1usize..=4), 1..40),
            m in 1u64..12,
        ) {
            let mut k = SimplicialComplex::new();
            for f in facets {
                let v: Vec<u32> = f.into_iter().collect();
                k.insert_closure(Simplex::normalize(&v).unwrap());
            }
            let mut e = Engine::new(k, config(GateConfig::none(), m, 0.99)).unwrap();
            for (pick, v, size) in script {
                let ev = random_event(e.complex(), pick, v, size);
                // Paranoid mode compares against the oracle after every step.
                e.apply_update(&ev).unwrap();
                for d in 1..=MAX_DIM {
                    prop_assert!(e.matrix(d).check_invariants().is_ok());
                }
            }
        }
    }
}

//! Reference methods that recompute homology from scratch at every step, and
//! a dense elimination oracle used as ground truth.

use crate::hash::HashMap;

use crate::betti::Betti;
use crate::complex::{EditEvent, SimplicialComplex};
use crate::error::{EngineError, OracleError};
use crate::gf2::{column_rank, xor_sorted};
use crate::morse::decompose;
use crate::simplex::{Simplex, MAX_DIM};

/// Oracle size guard, in simplices.
pub const DEFAULT_ORACLE_LIMIT: usize = 12_000;

/// What a from-scratch method reports for one state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Computed {
    pub betti: Betti,
    pub nnz_total: usize,
    pub critical_total: Option<usize>,
}

fn boundary_columns(k: &SimplicialComplex, d: usize) -> Vec<Vec<u32>> {
    k.cells(d)
        .iter()
        .map(|s| {
            let mut col: Vec<u32> = s
                .faces()
                .map(|f| k.index_of(&f).expect("face-closed") as u32)
                .collect();
            col.sort_unstable();
            col
        })
        .collect()
}

/// Builds every boundary matrix and reduces it.
pub fn full_recompute(k: &SimplicialComplex) -> Computed {
    let mut ranks = [0; MAX_DIM + 1];
    let mut nnz = 0;
    for d in 1..=MAX_DIM {
        let cols = boundary_columns(k, d);
        nnz += cols.iter().map(Vec::len).sum::<usize>();
        ranks[d] = column_rank(k.count(d - 1), cols);
    }
    Computed {
        betti: Betti::from_ranks(&k.counts(), &ranks),
        nnz_total: nnz,
        critical_total: None,
    }
}

pub fn full_recompute_step(k: &SimplicialComplex) -> Betti {
    full_recompute(k).betti
}

/// Coreduction, critical boundary assembly and reduction of the residual
/// matrices.
pub fn coreduction_only(k: &SimplicialComplex) -> Computed {
    let (m, c) = decompose(k);
    let mut ranks = [0; MAX_DIM + 1];
    for (d, r) in ranks.iter_mut().enumerate().skip(1) {
        *r = c.matrices[d].static_rank();
    }
    Computed {
        betti: Betti::from_ranks(&c.counts(), &ranks),
        nnz_total: c.matrices.iter().map(|m| m.nnz()).sum(),
        critical_total: Some(m.critical_total()),
    }
}

pub fn coreduction_only_step(k: &SimplicialComplex) -> Betti {
    coreduction_only(k).betti
}

/// One global reduction of the full boundary matrix with simplices ordered
/// by dimension, then by stratum order. A simplex whose column reduces to
/// zero and that is never a pivot row stays unpaired; β_k counts the
/// unpaired k-simplices.
pub fn static_ph(k: &SimplicialComplex) -> Computed {
    let mut offset = [0usize; MAX_DIM + 2];
    for d in 0..=MAX_DIM {
        offset[d + 1] = offset[d] + k.count(d);
    }
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(k.len());
    for d in 0..=MAX_DIM {
        for s in k.cells(d) {
            let mut col: Vec<u32> = s
                .faces()
                .map(|f| {
                    (offset[d.saturating_sub(1)] + k.index_of(&f).expect("face-closed")) as u32
                })
                .collect();
            col.sort_unstable();
            cols.push(col);
        }
    }
    let nnz = cols.iter().map(Vec::len).sum();
    let n = cols.len();
    let mut owner = vec![u32::MAX; n];
    let mut paired = vec![false; n];
    let mut buf = Vec::new();
    for j in 0..n {
        while let Some(&low) = cols[j].last() {
            let o = owner[low as usize];
            if o == u32::MAX {
                owner[low as usize] = j as u32;
                paired[low as usize] = true;
                paired[j] = true;
                break;
            }
            // Pivots are always owned by earlier columns.
            let (left, right) = cols.split_at_mut(j);
            xor_sorted(&right[0], &left[o as usize], &mut buf);
            std::mem::swap(&mut right[0], &mut buf);
        }
    }
    let mut b = [0; MAX_DIM + 1];
    for (d, slot) in b.iter_mut().enumerate() {
        *slot = (offset[d]..offset[d + 1]).filter(|&i| !paired[i]).count();
    }
    Computed {
        betti: Betti(b),
        nnz_total: nnz,
        critical_total: None,
    }
}

pub fn static_ph_step(k: &SimplicialComplex) -> Betti {
    static_ph(k).betti
}

/// Dense GF(2) rank by Gaussian elimination on bit-packed rows.
fn dense_rank(
    n_rows: usize,
    n_cols: usize,
    entries: impl Iterator<Item = (usize, usize)>,
) -> usize {
    let words = n_cols.div_ceil(64);
    let mut rows = vec![vec![0u64; words]; n_rows];
    for (r, c) in entries {
        rows[r][c / 64] ^= 1 << (c % 64);
    }
    let mut rank = 0;
    for c in 0..n_cols {
        let (w, bit) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (rank..n_rows).find(|&i| rows[i][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[w] & bit != 0 {
                for (x, y) in row.iter_mut().zip(&pivot).skip(w) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers by dense elimination, refusing complexes with more than
/// `limit` simplices.
pub fn oracle_betti_limited(k: &SimplicialComplex, limit: usize) -> Result<Betti, OracleError> {
    if k.len() > limit {
        return Err(OracleError::TooLarge {
            size: k.len(),
            limit,
        });
    }
    let mut ranks = [0; MAX_DIM + 1];
    for d in 1..=MAX_DIM {
        let rows: HashMap<Simplex, usize> = k
            .cells(d - 1)
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
        let entries = k
            .cells(d)
            .iter()
            .enumerate()
            .flat_map(|(j, s)| s.faces().map(move |f| (f, j)).collect::<Vec<_>>())
            .map(|(f, j)| (rows[&f], j));
        ranks[d] = dense_rank(k.count(d - 1), k.count(d), entries);
    }
    Ok(Betti::from_ranks(&k.counts(), &ranks))
}

pub fn oracle_betti(k: &SimplicialComplex) -> Result<Betti, OracleError> {
    oracle_betti_limited(k, DEFAULT_ORACLE_LIMIT)
}

/// The from-scratch methods, selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaselineMethod {
    Full,
    Coreduction,
    StaticPh,
    Oracle,
}

impl BaselineMethod {
    pub fn label(self) -> &'static str {
        match self {
            BaselineMethod::Full => "full",
            BaselineMethod::Coreduction => "coreduction",
            BaselineMethod::StaticPh => "static-ph",
            BaselineMethod::Oracle => "oracle",
        }
    }
}

/// Holds a complex and recomputes its homology after every event.
#[derive(Clone, Debug)]
pub struct BaselineRunner {
    pub method: BaselineMethod,
    complex: SimplicialComplex,
    pub oracle_limit: usize,
}

impl BaselineRunner {
    pub fn new(method: BaselineMethod, complex: SimplicialComplex) -> Self {
        Self {
            method,
            complex,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    /// Homology of the current state.
    pub fn compute(&self) -> Result<Computed, EngineError> {
        Ok(match self.method {
            BaselineMethod::Full => full_recompute(&self.complex),
            BaselineMethod::Coreduction => coreduction_only(&self.complex),
            BaselineMethod::StaticPh => static_ph(&self.complex),
            BaselineMethod::Oracle => Computed {
                betti: oracle_betti_limited(&self.complex, self.oracle_limit)?,
                nnz_total: 0,
                critical_total: None,
            },
        })
    }

    pub fn step(&mut self, e: &EditEvent) -> Result<Computed, EngineError> {
        self.complex.apply_event(e)?;
        self.compute()
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

    fn open_octahedron() -> SimplicialComplex {
        let mut k = octahedron();
        k.apply_event(
            &EditEvent::new("open")
                .delete(simplex![0, 1, 4])
                .delete(simplex![1, 2, 4])
                .delete(simplex![1, 4]),
        )
        .unwrap();
        k
    }

    fn all_methods(k: &SimplicialComplex) -> [Betti; 4] {
        [
            full_recompute_step(k),
            coreduction_only_step(k),
            static_ph_step(k),
            oracle_betti(k).unwrap(),
        ]
    }

    #[test]
    fn octahedron_states() {
        assert_eq!(all_methods(&octahedron()), [Betti::new(&[1, 0, 1]); 4]);
        assert_eq!(all_methods(&open_octahedron()), [Betti::new(&[1, 0, 0]); 4]);
    }

    #[test]
    fn empty_complex() {
        assert_eq!(
            all_methods(&SimplicialComplex::new()),
            [Betti::default(); 4]
        );
    }

    #[test]
    fn oracle_hand_checked() {
        let filled = SimplicialComplex::from_facets([[0, 1, 2]]).unwrap();
        assert_eq!(oracle_betti(&filled).unwrap(), Betti::new(&[1, 0, 0]));
        let sphere =
            SimplicialComplex::from_facets([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap();
        assert_eq!(oracle_betti(&sphere).unwrap(), Betti::new(&[1, 0, 1]));
        let two = SimplicialComplex::from_facets([[0], [1]]).unwrap();
        assert_eq!(oracle_betti(&two).unwrap(), Betti::new(&[2]));
    }

    #[test]
    fn hollow_triangle_and_tetrahedron() {
        let hollow = SimplicialComplex::from_facets([[0, 1], [1, 2], [0, 2]]).unwrap();
        assert_eq!(all_methods(&hollow), [Betti::new(&[1, 1]); 4]);
        let solid = SimplicialComplex::from_facets([[0, 1, 2, 3]]).unwrap();
        assert_eq!(all_methods(&solid), [Betti::new(&[1, 0, 0, 0]); 4]);
        let single = SimplicialComplex::from_facets([[3]]).unwrap();
        assert_eq!(coreduction_only_step(&single), Betti::new(&[1]));
    }

    #[test]
    fn oracle_size_guard() {
        let k = octahedron();
        assert_eq!(
            oracle_betti_limited(&k, 10),
            Err(OracleError::TooLarge {
                size: 26,
                limit: 10
            })
        );
    }

    #[test]
    fn runner_steps() {
        let mut r = BaselineRunner::new(BaselineMethod::StaticPh, octahedron());
        let e = EditEvent::new("open")
            .delete(simplex![0, 1, 4])
            .delete(simplex![1, 2, 4])
            .delete(simplex![1, 4]);
        assert_eq!(r.step(&e).unwrap().betti, Betti::new(&[1, 0, 0]));
        assert_eq!(
            r.step(&e.inverse("close")).unwrap().betti,
            Betti::new(&[1, 0, 1])
        );
        assert_eq!(r.method.label(), "static-ph");
    }

    fn random_complex() -> impl Strategy<Value = SimplicialComplex> {
        let facet = prop::collection::btree_set(0u32..8, 1..=4);
        prop::collection::vec(facet, 1..8)
            .prop_map(|fs| {
                let mut k = SimplicialComplex::new();
                for f in fs {
                    let v: Vec<u32> = f.into_iter().collect();
                    k.insert_closure(Simplex::normalize(&v).unwrap());
                }
                k
            })
            .prop_filter("at most 50 simplices", |k| k.len() <= 50)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn static_ph_matches_rank_formula(k in random_complex()) {
            let oracle = oracle_betti(&k).unwrap();
            prop_assert_eq!(static_ph_step(&k), oracle);
            prop_assert_eq!(full_recompute_step(&k), oracle);
            prop_assert_eq!(coreduction_only_step(&k), oracle);
        }
    }
}

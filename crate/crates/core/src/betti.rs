use std::fmt;

use crate::simplex::MAX_DIM;

/// Betti numbers over GF(2) in dimensions 0..=3.
///
/// Dimensions above the top dimension of the complex are zero, so vectors for
/// complexes of different dimension compare directly.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Betti(pub [usize; MAX_DIM + 1]);

impl Betti {
    pub fn new(values: &[usize]) -> Self {
        assert!(values.len() <= MAX_DIM + 1);
        let mut b = [0; MAX_DIM + 1];
        b[..values.len()].copy_from_slice(values);
        Betti(b)
    }

    /// Assembles Betti numbers from cell counts `n[k]` and boundary ranks
    /// `ranks[k] = rank B_k`, with `ranks[0]` ignored (B_0 = 0).
    ///
    /// `beta_k = n_k - r_k - r_{k+1}`; the caller guarantees the ranks come
    /// from a chain complex so no term goes negative.
    pub fn from_ranks(n: &[usize; MAX_DIM + 1], ranks: &[usize; MAX_DIM + 1]) -> Self {
        let mut b = [0; MAX_DIM + 1];
        for k in 0..=MAX_DIM {
            let r_k = if k == 0 { 0 } else { ranks[k] };
            let r_next = if k == MAX_DIM { 0 } else { ranks[k + 1] };
            b[k] = n[k]
                .checked_sub(r_k + r_next)
                .expect("ranks exceed cell count: not a chain complex");
        }
        Betti(b)
    }

    pub fn get(&self, k: usize) -> usize {
        self.0[k]
    }

    /// Alternating sum, equal to the Euler characteristic of the complex.
    pub fn euler(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

impl fmt::Debug for Betti {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

impl fmt::Display for Betti {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

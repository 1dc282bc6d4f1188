//! Canonical simplices of dimension at most 3.

use std::fmt;

use crate::error::ComplexError;

/// Largest supported simplex dimension.
pub const MAX_DIM: usize = 3;

/// Vertex identifier. Assigned by the caller and never renumbered.
pub type Vertex = u32;

/// A simplex stored as a strictly increasing tuple of 1 to 4 vertices.
///
/// Over GF(2) orientation carries no information, so the sorted tuple is the
/// canonical form and two simplices are equal iff their vertex sets are.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    len: u8,
    verts: [Vertex; 4],
}

impl Simplex {
    /// Sorts `vertices` into canonical form.
    ///
    /// Rejects empty input, more than four vertices, and repeated vertices.
    pub fn normalize(vertices: &[Vertex]) -> Result<Self, ComplexError> {
        if vertices.is_empty() || vertices.len() > MAX_DIM + 1 {
            return Err(ComplexError::BadArity(vertices.len()));
        }
        let mut verts = [0; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        verts[..vertices.len()].sort_unstable();
        if verts[..vertices.len()].windows(2).any(|w| w[0] == w[1]) {
            return Err(ComplexError::Degenerate(vertices.to_vec()));
        }
        Ok(Self {
            len: vertices.len() as u8,
            verts,
        })
    }

    /// Builds a simplex from vertices the caller guarantees are already sorted
    /// and distinct.
    pub(crate) fn from_sorted(vertices: &[Vertex]) -> Self {
        debug_assert!(!vertices.is_empty() && vertices.len() <= 4);
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let mut verts = [0; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Self {
            len: vertices.len() as u8,
            verts,
        }
    }

    pub fn vertex(v: Vertex) -> Self {
        Self::from_sorted(&[v])
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.verts[..self.len as usize]
    }

    /// Codimension-1 faces, in order of the omitted vertex. Empty for vertices.
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.len > 1 { self.len as usize } else { 0 };
        (0..n).map(move |skip| {
            let mut verts = [0; 4];
            let mut at = 0;
            for (i, &v) in self.vertices().iter().enumerate() {
                if i != skip {
                    verts[at] = v;
                    at += 1;
                }
            }
            Simplex {
                len: self.len - 1,
                verts,
            }
        })
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.vertices().binary_search(&v).is_ok()
    }

    /// Returns this simplex with `v` added, or `None` if `v` is already present
    /// or the result would exceed dimension 3.
    pub fn join(&self, v: Vertex) -> Option<Simplex> {
        if self.len as usize > MAX_DIM || self.contains_vertex(v) {
            return None;
        }
        let mut verts = [0; 4];
        let mut at = 0;
        let mut placed = false;
        for &w in self.vertices() {
            if !placed && v < w {
                verts[at] = v;
                at += 1;
                placed = true;
            }
            verts[at] = w;
            at += 1;
        }
        if !placed {
            verts[at] = v;
        }
        Some(Simplex {
            len: self.len + 1,
            verts,
        })
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.dim())?;
        for v in self.vertices() {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

/// Shorthand used throughout the tests and generators.
#[macro_export]
macro_rules! simplex {
    ($($v:expr),+ $(,)?) => {
        $crate::Simplex::normalize(&[$($v),+]).expect("valid simplex literal")
    };
}

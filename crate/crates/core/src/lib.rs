pub mod baselines;
pub mod benchgen;
pub mod betti;
pub mod complex;
pub mod engine;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod hash;
pub mod morse;
pub mod simplex;

pub use betti::Betti;
pub use complex::{face_difference, AffectedSets, EditEvent, SimplicialComplex};
pub use error::{BenchError, ComplexError, EngineError, MatrixError, MorseError, OracleError};
pub use gf2::Gf2ColumnMatrix;
pub use simplex::{Simplex, Vertex, MAX_DIM};

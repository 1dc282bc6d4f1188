use thiserror::Error;

use crate::simplex::{Simplex, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("a simplex needs 1 to 4 vertices, got {0}")]
    BadArity(usize),
    #[error("degenerate simplex with repeated vertices {0:?}")]
    Degenerate(Vec<Vertex>),
    #[error("simplex {0:?} is not in the complex")]
    Missing(Simplex),
    #[error("simplex {0:?} is already in the complex")]
    AlreadyPresent(Simplex),
    #[error("cannot delete {simplex:?}: coface {coface:?} survives the event")]
    SurvivingCoface { simplex: Simplex, coface: Simplex },
    #[error("cannot insert {simplex:?}: face {face:?} is absent")]
    MissingFace { simplex: Simplex, face: Simplex },
    #[error("{0:?} is both inserted and deleted by one event")]
    InsertedAndDeleted(Simplex),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("column {0} does not exist")]
    NoSuchColumn(usize),
    #[error("row {0} does not exist")]
    NoSuchRow(u32),
    #[error("row {row} still has a nonzero entry in column {col}")]
    RowInUse { row: u32, col: usize },
    #[error("simplex {0:?} has no row or column index")]
    Unindexed(Simplex),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorseError {
    #[error("closed V-path through {0:?}")]
    Cycle(Simplex),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("complex has {size} simplices, over the oracle limit of {limit}")]
    TooLarge { size: usize, limit: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("step {step}: engine reports {engine:?} but the oracle reports {oracle:?}")]
    Inconsistent {
        step: u64,
        engine: crate::Betti,
        oracle: crate::Betti,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("{benchmark} needs at least {min} steps, got {got}")]
    TooFewSteps {
        benchmark: &'static str,
        min: usize,
        got: usize,
    },
    #[error("could only place {placed} of {wanted} disjoint ports on the shell")]
    PortsOverlap { wanted: usize, placed: usize },
    #[error("coarsen with an empty refinement stack")]
    EmptyStack,
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

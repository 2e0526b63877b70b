use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample: the genotype table has no draws")]
    EmptySample,

    #[error("at least 2 alleles are required, got {0}")]
    TooFewAlleles(usize),

    #[error("dimension mismatch: expected {expected} alleles, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected {expected} cells for {alleles} alleles, found {found}")]
    CellCount {
        alleles: usize,
        expected: usize,
        found: usize,
    },

    #[error("allele counts must sum to an even number (got {0})")]
    OddAlleleTotal(u64),

    #[error("invalid allele proportions: {0}")]
    InvalidTheta(String),

    #[error("invalid genotype distribution: {0}")]
    InvalidDistribution(String),

    #[error("fitness parameters must be finite and strictly positive: {0}")]
    InvalidFitness(String),

    #[error("inbreeding coefficient {f} outside the valid range [{min}, 1]")]
    InbreedingOutOfRange { f: f64, min: f64 },

    #[error("unknown alternative preset {0} (expected 1-4)")]
    UnknownPreset(u8),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("row {row} (line {line}) has {found} entries, expected {expected}")]
    RowLength {
        row: usize,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("benchmark dataset `{0}` is not bundled with this build")]
    MissingBenchmark(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

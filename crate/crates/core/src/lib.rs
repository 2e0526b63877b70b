//! Monte-Carlo goodness-of-fit tests for Hardy-Weinberg equilibrium.
//!
//! Five discrepancy statistics (χ², G², Hellinger, negative log-likelihood
//! and root-mean-square) are compared with their null distributions under
//! two schemes: plain resampling from the fitted model, and random pairing
//! of the observed alleles. Every run is reproducible from its seed for any
//! number of worker threads.

pub mod alternatives;
pub mod analysis;
pub mod dataset;
mod error;
pub mod genotype;
pub mod pvalue;
pub mod report;
pub mod sampling;
mod special;
pub mod statistics;

pub use error::{Error, Result};
pub use genotype::{hwe_distribution, AlleleCounts, GenotypeDistribution, GenotypeTable, ModelCounts, ThetaVector};
pub use pvalue::{conditional_pvalue, plain_pvalue, Mode, MonteCarlo, PValueResult};
pub use sampling::RandomSource;
pub use statistics::StatisticKind;

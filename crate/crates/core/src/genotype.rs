//! Genotype counts on the lower-triangular array, allele counts, and the
//! Hardy-Weinberg model built from them.
//!
//! Alleles are indexed from 0. The unordered genotype {A_j, A_k} is stored at
//! the canonical position `(j, k)` with `j >= k`; cells are laid out row by
//! row, so row `j` holds `(j, 0), (j, 1), .., (j, j)` starting at flat index
//! `j * (j + 1) / 2`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks on probability vectors.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Number of genotypes for `alleles` alleles.
#[inline]
pub fn cell_count(alleles: usize) -> usize {
    alleles * (alleles + 1) / 2
}

/// Flat index of genotype {A_j, A_k}; the pair is canonicalized first.
#[inline]
pub fn cell_index(j: usize, k: usize) -> usize {
    let (hi, lo) = if j >= k { (j, k) } else { (k, j) };
    hi * (hi + 1) / 2 + lo
}

/// Inverse of [`cell_index`]: the canonical `(j, k)` pair, `j >= k`.
pub fn cell_pair(index: usize) -> (usize, usize) {
    // Largest j with j(j+1)/2 <= index.
    let mut j = (((8 * index + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (j + 1) * (j + 2) / 2 <= index {
        j += 1;
    }
    while j * (j + 1) / 2 > index {
        j -= 1;
    }
    (j, index - j * (j + 1) / 2)
}

/// Iterator over all canonical pairs in storage order.
pub fn cell_pairs(alleles: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..alleles).flat_map(|j| (0..=j).map(move |k| (j, k)))
}

fn check_alleles(alleles: usize) -> Result<()> {
    if alleles < 2 {
        return Err(Error::TooFewAlleles(alleles));
    }
    Ok(())
}

/// Observed genotype counts n_{j,k}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GenotypeTable {
    alleles: usize,
    counts: Vec<u64>,
}

impl GenotypeTable {
    /// All-zero table over `alleles` alleles.
    pub fn zeros(alleles: usize) -> Result<Self> {
        check_alleles(alleles)?;
        Ok(Self {
            alleles,
            counts: vec![0; cell_count(alleles)],
        })
    }

    /// Builds a table from counts in storage order.
    pub fn from_cells(alleles: usize, counts: Vec<u64>) -> Result<Self> {
        check_alleles(alleles)?;
        if counts.len() != cell_count(alleles) {
            return Err(Error::CellCount {
                alleles,
                expected: cell_count(alleles),
                found: counts.len(),
            });
        }
        Ok(Self { alleles, counts })
    }

    /// Builds a table from triangular rows; row `j` must have `j + 1` entries.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let alleles = rows.len();
        check_alleles(alleles)?;
        let mut counts = Vec::with_capacity(cell_count(alleles));
        for (j, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != j + 1 {
                return Err(Error::RowLength {
                    row: j + 1,
                    line: j + 1,
                    expected: j + 1,
                    found: row.len(),
                });
            }
            counts.extend_from_slice(row);
        }
        Ok(Self { alleles, counts })
    }

    pub fn alleles(&self) -> usize {
        self.alleles
    }

    /// Counts in storage order.
    pub fn cells(&self) -> &[u64] {
        &self.counts
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [u64] {
        &mut self.counts
    }

    /// Count for genotype {A_j, A_k}, in either order.
    pub fn get(&self, j: usize, k: usize) -> u64 {
        self.counts[cell_index(j, k)]
    }

    pub fn set(&mut self, j: usize, k: usize, count: u64) {
        self.counts[cell_index(j, k)] = count;
    }

    /// Row `j` of the triangle: counts for {A_j, A_0} .. {A_j, A_j}.
    pub fn row(&self, j: usize) -> &[u64] {
        let start = j * (j + 1) / 2;
        &self.counts[start..=start + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        (0..self.alleles).map(move |j| self.row(j))
    }

    /// Total number of genotypes drawn, n.
    pub fn total_draws(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Allele counts n_j; a homozygote contributes two copies.
    pub fn allele_counts(&self) -> AlleleCounts {
        let mut counts = vec![0u64; self.alleles];
        allele_counts_into(self.alleles, &self.counts, &mut counts);
        AlleleCounts { counts }
    }

    /// Maximum-likelihood Hardy-Weinberg model counts for this table.
    pub fn model_counts(&self) -> Result<ModelCounts> {
        ModelCounts::from_alleles(&self.allele_counts())
    }

    /// Renames allele `a` to `perm[a]` and re-canonicalizes every cell.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.alleles {
            return Err(Error::DimensionMismatch {
                expected: self.alleles,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; self.alleles];
        for &p in perm {
            if p >= self.alleles || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a permutation of 0..{}",
                    self.alleles
                )));
            }
        }
        let mut out = Self::zeros(self.alleles)?;
        for (idx, (j, k)) in cell_pairs(self.alleles).enumerate() {
            out.counts[cell_index(perm[j], perm[k])] = self.counts[idx];
        }
        Ok(out)
    }
}

/// Accumulates allele counts of a flat triangular table into `out`.
pub(crate) fn allele_counts_into(alleles: usize, cells: &[u64], out: &mut [u64]) {
    out.iter_mut().for_each(|c| *c = 0);
    let mut idx = 0;
    for j in 0..alleles {
        for k in 0..=j {
            let c = cells[idx];
            out[j] += c;
            out[k] += c;
            idx += 1;
        }
    }
}

/// Fills `out` with m_{j,k} = (2 - δ_{jk}) n_j n_k / (4n).
pub(crate) fn model_counts_into(allele_counts: &[u64], total: u64, out: &mut [f64]) {
    let four_n = 4.0 * total as f64;
    let mut idx = 0;
    for (j, &nj) in allele_counts.iter().enumerate() {
        let nj = nj as f64;
        for &nk in &allele_counts[..j] {
            out[idx] = 2.0 * (nj * nk as f64) / four_n;
            idx += 1;
        }
        out[idx] = nj * nj / four_n;
        idx += 1;
    }
}

/// Allele counts n_j over the 2n sampled alleles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AlleleCounts {
    counts: Vec<u64>,
}

impl AlleleCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        check_alleles(counts.len())?;
        Ok(Self { counts })
    }

    pub fn alleles(&self) -> usize {
        self.counts.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, j: usize) -> u64 {
        self.counts[j]
    }

    /// Total number of alleles, 2n for a table with n draws.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of genotypes these alleles pair into.
    pub fn draws(&self) -> Result<u64> {
        let total = self.total();
        if total % 2 != 0 {
            return Err(Error::OddAlleleTotal(total));
        }
        Ok(total / 2)
    }

    /// Allele proportions n_j / (2n).
    pub fn proportions(&self) -> Result<ThetaVector> {
        let total = self.total();
        if total == 0 {
            return Err(Error::EmptySample);
        }
        ThetaVector::new(
            self.counts
                .iter()
                .map(|&c| c as f64 / total as f64)
                .collect(),
        )
    }
}

/// Expected genotype counts m_{j,k} under the fitted equilibrium model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelCounts {
    alleles: usize,
    counts: Vec<f64>,
    total: u64,
}

impl ModelCounts {
    pub fn from_alleles(alleles: &AlleleCounts) -> Result<Self> {
        let total = alleles.draws()?;
        if total == 0 {
            return Err(Error::EmptySample);
        }
        let r = alleles.alleles();
        let mut counts = vec![0.0; cell_count(r)];
        model_counts_into(alleles.as_slice(), total, &mut counts);
        Ok(Self {
            alleles: r,
            counts,
            total,
        })
    }

    pub fn alleles(&self) -> usize {
        self.alleles
    }

    pub fn cells(&self) -> &[f64] {
        &self.counts
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.counts[cell_index(j, k)]
    }

    /// The genotype total n the counts were fitted to.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// The model as a probability vector m_{j,k} / n.
    pub fn distribution(&self) -> GenotypeDistribution {
        let n = self.total as f64;
        GenotypeDistribution {
            alleles: self.alleles,
            probs: self.counts.iter().map(|m| m / n).collect(),
        }
    }
}

/// Genotype probabilities p_{j,k} on the triangular array.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenotypeDistribution {
    alleles: usize,
    probs: Vec<f64>,
}

impl GenotypeDistribution {
    pub fn new(alleles: usize, probs: Vec<f64>) -> Result<Self> {
        check_alleles(alleles)?;
        if probs.len() != cell_count(alleles) {
            return Err(Error::CellCount {
                alleles,
                expected: cell_count(alleles),
                found: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} is not a finite nonnegative number"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { alleles, probs })
    }

    pub fn alleles(&self) -> usize {
        self.alleles
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.probs[cell_index(j, k)]
    }

    /// Marginal allele frequencies: p_{j,j} + half of every heterozygote carrying A_j.
    pub fn allele_frequencies(&self) -> Vec<f64> {
        let mut freq = vec![0.0; self.alleles];
        for ((j, k), p) in cell_pairs(self.alleles).zip(&self.probs) {
            freq[j] += p / 2.0;
            freq[k] += p / 2.0;
        }
        freq
    }
}

/// Allele proportions θ_j.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaVector {
    theta: Vec<f64>,
}

impl ThetaVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        check_alleles(theta.len())?;
        if let Some(t) = theta.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidTheta(format!(
                "proportion {t} is not a finite nonnegative number"
            )));
        }
        let sum: f64 = theta.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidTheta(format!(
                "proportions sum to {sum}, not 1"
            )));
        }
        Ok(Self { theta })
    }

    /// Normalizes nonnegative weights into proportions.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidTheta(format!("weights sum to {sum}")));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn alleles(&self) -> usize {
        self.theta.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn get(&self, j: usize) -> f64 {
        self.theta[j]
    }
}

/// Equilibrium genotype probabilities: 2θ_jθ_k off the diagonal, θ_k² on it.
pub fn hwe_distribution(theta: &ThetaVector) -> GenotypeDistribution {
    let t = theta.as_slice();
    let probs = cell_pairs(t.len())
        .map(|(j, k)| {
            if j == k {
                t[j] * t[j]
            } else {
                2.0 * t[j] * t[k]
            }
        })
        .collect();
    GenotypeDistribution {
        alleles: t.len(),
        probs,
    }
}

//! Random genotype tables under the two null schemes, and the seeding
//! contract that makes every Monte-Carlo run reproducible.
//!
//! A [`RandomSource`] is a `(seed, stream)` pair naming one ChaCha8 stream.
//! [`RandomSource::child`] derives substream `index` as a pure function of
//! the parent, so trial `i` of a run always sees the same random numbers no
//! matter how trials are spread over workers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genotype::{cell_count, cell_index, AlleleCounts, GenotypeDistribution, GenotypeTable};

/// Deterministic, splittable source of random streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Substream `index`. Siblings share a ChaCha key and differ in the
    /// stream word; grandchildren get a fresh key derived from the parent.
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream: index,
        }
    }

    /// A generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Multinomial draws from a fixed genotype distribution.
///
/// Small samples over many cells draw n categorical genotypes by inverse-CDF
/// search; otherwise cells are visited in storage order with conditional
/// binomials. Both give exact multinomial counts.
#[derive(Clone, Debug)]
pub struct MultinomialSampler {
    alleles: usize,
    probs: Vec<f64>,
    /// tail[i] = Σ_{c >= i} probs[c]
    tail: Vec<f64>,
    cdf: Vec<f64>,
    last_positive: usize,
}

impl MultinomialSampler {
    pub fn new(dist: &GenotypeDistribution) -> Self {
        let probs = dist.probs().to_vec();
        let mut tail = vec![0.0; probs.len() + 1];
        for i in (0..probs.len()).rev() {
            tail[i] = tail[i + 1] + probs[i];
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self {
            alleles: dist.alleles(),
            probs,
            tail,
            cdf,
            last_positive,
        }
    }

    pub fn alleles(&self) -> usize {
        self.alleles
    }

    /// Overwrites `out` (one entry per cell) with a multinomial(n, p) draw.
    pub fn sample_into<R: Rng + ?Sized>(&self, n: u64, rng: &mut R, out: &mut [u64]) {
        debug_assert_eq!(out.len(), self.probs.len());
        out.iter_mut().for_each(|c| *c = 0);
        if n == 0 {
            return;
        }
        if (n as usize).saturating_mul(4) < self.probs.len() {
            self.categorical(n, rng, out);
        } else {
            self.sequential(n, rng, out);
        }
    }

    fn categorical<R: Rng + ?Sized>(&self, n: u64, rng: &mut R, out: &mut [u64]) {
        let total = self.cdf[self.cdf.len() - 1];
        for _ in 0..n {
            let u = rng.random::<f64>() * total;
            let idx = self.cdf.partition_point(|&c| c <= u).min(self.last_positive);
            out[idx] += 1;
        }
    }

    fn sequential<R: Rng + ?Sized>(&self, n: u64, rng: &mut R, out: &mut [u64]) {
        let mut remaining = n;
        for (i, &p) in self.probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if p <= 0.0 {
                continue;
            }
            let q = p / self.tail[i];
            let draw = if q >= 1.0 || i == self.last_positive {
                remaining
            } else {
                Binomial::new(remaining, q)
                    .expect("conditional probability lies in [0, 1)")
                    .sample(rng)
            };
            out[i] = draw;
            remaining -= draw;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> GenotypeTable {
        let mut table = GenotypeTable::zeros(self.alleles).expect("distribution has >= 2 alleles");
        self.sample_into(n, rng, table.cells_mut());
        table
    }
}

/// Genotype tables with fixed allele counts: shuffle the 2n alleles and
/// pair consecutive positions.
#[derive(Clone, Debug)]
pub struct ConditionalSampler {
    alleles: usize,
    sequence: Vec<u32>,
}

impl ConditionalSampler {
    pub fn new(alleles: &AlleleCounts) -> Result<Self> {
        let draws = alleles.draws()?;
        if draws == 0 {
            return Err(Error::EmptySample);
        }
        let sequence = alleles
            .as_slice()
            .iter()
            .enumerate()
            .flat_map(|(a, &c)| std::iter::repeat_n(a as u32, c as usize))
            .collect();
        Ok(Self {
            alleles: alleles.alleles(),
            sequence,
        })
    }

    pub fn alleles(&self) -> usize {
        self.alleles
    }

    pub fn draws(&self) -> u64 {
        self.sequence.len() as u64 / 2
    }

    /// Overwrites `out` with one draw. `scratch` is reset from the sorted
    /// allele sequence before shuffling, so the draw depends only on `rng`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vec<u32>, out: &mut [u64]) {
        debug_assert_eq!(out.len(), cell_count(self.alleles));
        scratch.clear();
        scratch.extend_from_slice(&self.sequence);
        scratch.shuffle(rng);
        out.iter_mut().for_each(|c| *c = 0);
        for pair in scratch.chunks_exact(2) {
            out[cell_index(pair[0] as usize, pair[1] as usize)] += 1;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GenotypeTable {
        let mut table = GenotypeTable::zeros(self.alleles).expect("allele counts have >= 2 alleles");
        let mut scratch = Vec::with_capacity(self.sequence.len());
        self.sample_into(rng, &mut scratch, table.cells_mut());
        table
    }
}

/// n i.i.d. genotypes from `dist`, aggregated into a table.
pub fn sample_multinomial<R: Rng + ?Sized>(
    dist: &GenotypeDistribution,
    n: u64,
    rng: &mut R,
) -> GenotypeTable {
    MultinomialSampler::new(dist).sample(n, rng)
}

/// A uniformly random pairing of the given alleles.
pub fn sample_conditional<R: Rng + ?Sized>(alleles: &AlleleCounts, rng: &mut R) -> Result<GenotypeTable> {
    Ok(ConditionalSampler::new(alleles)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genotype::{hwe_distribution, ThetaVector};
    use rand::RngCore;

    #[test]
    fn same_source_same_stream() {
        let a = RandomSource::new(42).child(7);
        let b = RandomSource::new(42).child(7);
        assert_eq!(a.rng().next_u64(), b.rng().next_u64());
        assert_ne!(
            RandomSource::new(42).child(7).rng().next_u64(),
            RandomSource::new(42).child(8).rng().next_u64()
        );
        assert_ne!(
            RandomSource::new(42).child(1).child(0).rng().next_u64(),
            RandomSource::new(42).child(0).child(0).rng().next_u64()
        );
    }

    #[test]
    fn degenerate_distribution() {
        let d = hwe_distribution(&ThetaVector::new(vec![1.0, 0.0, 0.0]).unwrap());
        for seed in 0..20 {
            let t = sample_multinomial(&d, 37, &mut RandomSource::new(seed).rng());
            assert_eq!(t.get(0, 0), 37);
            assert_eq!(t.total_draws(), 37);
        }
    }

    #[test]
    fn categorical_path_sums_to_n() {
        // 210 cells, n = 20 goes through the inverse-CDF path.
        let d = hwe_distribution(&ThetaVector::from_weights(&[1.0; 20]).unwrap());
        let t = sample_multinomial(&d, 20, &mut RandomSource::new(3).rng());
        assert_eq!(t.total_draws(), 20);
    }

    #[test]
    fn forced_pairing() {
        let a = AlleleCounts::new(vec![2, 0, 0]).unwrap();
        let t = sample_conditional(&a, &mut RandomSource::new(1).rng()).unwrap();
        assert_eq!(t.get(0, 0), 1);
        assert_eq!(t.total_draws(), 1);
    }

    #[test]
    fn odd_allele_total_rejected() {
        let a = AlleleCounts::new(vec![2, 1]).unwrap();
        let err = sample_conditional(&a, &mut RandomSource::new(1).rng()).unwrap_err();
        assert!(err.to_string().contains("even"));
        let empty = AlleleCounts::new(vec![0, 0]).unwrap();
        assert!(matches!(
            sample_conditional(&empty, &mut RandomSource::new(1).rng()),
            Err(Error::EmptySample)
        ));
    }
}

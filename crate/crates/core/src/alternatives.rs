//! Genotype distributions away from equilibrium: selection through fitness
//! weights and inbreeding, plus the four standard power-study settings.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genotype::{cell_count, cell_index, cell_pairs, GenotypeDistribution, ThetaVector};

/// Genotype fitness weights w_{j,k} > 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitnessMatrix {
    alleles: usize,
    w: Vec<f64>,
}

impl FitnessMatrix {
    pub fn new(alleles: usize, w: Vec<f64>) -> Result<Self> {
        if alleles < 2 {
            return Err(Error::TooFewAlleles(alleles));
        }
        if w.len() != cell_count(alleles) {
            return Err(Error::CellCount {
                alleles,
                expected: cell_count(alleles),
                found: w.len(),
            });
        }
        if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidFitness(format!("weight {x}")));
        }
        Ok(Self { alleles, w })
    }

    pub fn uniform(alleles: usize, weight: f64) -> Result<Self> {
        Self::new(alleles, vec![weight; cell_count(alleles)])
    }

    pub fn alleles(&self) -> usize {
        self.alleles
    }

    pub fn cells(&self) -> &[f64] {
        &self.w
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.w[cell_index(j, k)]
    }
}

/// Every genotype carrying allele 0 gets weight `w1`; all others weight 1.
pub fn common_allele_fitness(alleles: usize, w1: f64) -> Result<FitnessMatrix> {
    let w = cell_pairs(alleles)
        .map(|(_, k)| if k == 0 { w1 } else { 1.0 })
        .collect();
    FitnessMatrix::new(alleles, w)
}

/// p_{j,k} ∝ (2 - δ_{jk}) w_{j,k} θ_j θ_k, normalized by the mean fitness.
pub fn selection_distribution(theta: &ThetaVector, w: &FitnessMatrix) -> Result<GenotypeDistribution> {
    if theta.alleles() != w.alleles() {
        return Err(Error::DimensionMismatch {
            expected: theta.alleles(),
            found: w.alleles(),
        });
    }
    let t = theta.as_slice();
    let weighted: Vec<f64> = cell_pairs(t.len())
        .zip(w.cells())
        .map(|((j, k), &wjk)| {
            let mult = if j == k { 1.0 } else { 2.0 };
            mult * wjk * t[j] * t[k]
        })
        .collect();
    let mean_fitness: f64 = weighted.iter().sum();
    GenotypeDistribution::new(t.len(), weighted.iter().map(|x| x / mean_fitness).collect())
}

/// Inbreeding coefficient f, checked against the allele proportions it is
/// paired with so every genotype probability stays nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InbreedingCoefficient(f64);

impl InbreedingCoefficient {
    pub fn new(f: f64, theta: &ThetaVector) -> Result<Self> {
        let min = Self::lower_bound(theta);
        if !f.is_finite() || f > 1.0 || f < min {
            return Err(Error::InbreedingOutOfRange { f, min });
        }
        Ok(Self(f))
    }

    /// max_k -θ_k / (1 - θ_k) over alleles with 0 < θ_k < 1.
    pub fn lower_bound(theta: &ThetaVector) -> f64 {
        theta
            .as_slice()
            .iter()
            .filter(|&&t| t > 0.0 && t < 1.0)
            .map(|&t| -t / (1.0 - t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// p_{j,k} = 2θ_jθ_k(1 - f) off the diagonal, θ_k² + fθ_k(1 - θ_k) on it.
pub fn inbreeding_distribution(theta: &ThetaVector, f: f64) -> Result<GenotypeDistribution> {
    let f = InbreedingCoefficient::new(f, theta)?.value();
    let t = theta.as_slice();
    let probs = cell_pairs(t.len())
        .map(|(j, k)| {
            if j == k {
                t[k] * t[k] + f * t[k] * (1.0 - t[k])
            } else {
                2.0 * t[j] * t[k] * (1.0 - f)
            }
        })
        .collect();
    GenotypeDistribution::new(t.len(), probs)
}

/// Allele proportions and sample size for power-study setting `id` (1-4).
///
/// Settings 1 and 3 use θ = (1/3, 1/3, 1/24, ..., 1/24) over 10 alleles with
/// n = 100 and n = 200; settings 2 and 4 use θ_j ∝ 1/j over 10 and 20 alleles
/// with n = 100 and n = 200.
pub fn preset_theta(id: u8) -> Result<(ThetaVector, u64)> {
    fn two_common() -> Result<ThetaVector> {
        let mut theta = vec![1.0 / 3.0, 1.0 / 3.0];
        theta.extend(std::iter::repeat_n(1.0 / 24.0, 8));
        ThetaVector::new(theta)
    }
    fn harmonic(alleles: usize) -> Result<ThetaVector> {
        let weights: Vec<f64> = (1..=alleles).map(|j| 1.0 / j as f64).collect();
        ThetaVector::from_weights(&weights)
    }
    match id {
        1 => Ok((two_common()?, 100)),
        2 => Ok((harmonic(10)?, 100)),
        3 => Ok((two_common()?, 200)),
        4 => Ok((harmonic(20)?, 200)),
        _ => Err(Error::UnknownPreset(id)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genotype::hwe_distribution;
    use proptest::prelude::*;

    fn half() -> ThetaVector {
        ThetaVector::new(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn neutral_fitness_is_equilibrium() {
        let theta = preset_theta(2).unwrap().0;
        let hwe = hwe_distribution(&theta);
        for c in [1.0, 2.5] {
            let sel = selection_distribution(&theta, &FitnessMatrix::uniform(10, c).unwrap()).unwrap();
            for (a, b) in sel.probs().iter().zip(hwe.probs()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn selection_by_hand() {
        let w = common_allele_fitness(2, 1.5).unwrap();
        let d = selection_distribution(&half(), &w).unwrap();
        let expect = [0.375 / 1.375, 0.75 / 1.375, 0.25 / 1.375];
        for (p, e) in d.probs().iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }
        assert!((d.get(0, 0) - 0.2727).abs() < 1e-4);
        assert!((d.get(1, 0) - 0.5455).abs() < 1e-4);
        assert!((d.get(1, 1) - 0.1818).abs() < 1e-4);
    }

    #[test]
    fn common_allele_weights() {
        assert_eq!(common_allele_fitness(2, 1.5).unwrap().cells(), &[1.5, 1.5, 1.0]);
        assert!(common_allele_fitness(4, 1.0).unwrap().cells().iter().all(|&w| w == 1.0));
        let w = common_allele_fitness(3, 2.0).unwrap();
        assert_eq!(w.cells(), &[2.0, 2.0, 1.0, 2.0, 1.0, 1.0]);
        assert!(common_allele_fitness(3, 0.0).is_err());
    }

    #[test]
    fn inbreeding_examples() {
        let theta = preset_theta(1).unwrap().0;
        assert_eq!(
            inbreeding_distribution(&theta, 0.0).unwrap(),
            hwe_distribution(&theta)
        );

        let full = inbreeding_distribution(&theta, 1.0).unwrap();
        for (j, k) in cell_pairs(10) {
            if j == k {
                assert!((full.get(j, k) - theta.get(k)).abs() < 1e-15);
            } else {
                assert_eq!(full.get(j, k), 0.0);
            }
        }

        let d = inbreeding_distribution(&half(), 0.1).unwrap();
        assert!((d.get(0, 0) - 0.275).abs() < 1e-15);
        assert!((d.get(1, 1) - 0.275).abs() < 1e-15);
        assert!((d.get(1, 0) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn inbreeding_range_enforced() {
        // θ = (1/2, 1/2) allows f >= -1.
        assert!(inbreeding_distribution(&half(), -1.0).is_ok());
        assert!(matches!(
            inbreeding_distribution(&half(), -1.01),
            Err(Error::InbreedingOutOfRange { .. })
        ));
        assert!(inbreeding_distribution(&half(), 1.01).is_err());
        let theta = preset_theta(1).unwrap().0;
        // smallest allele 1/24 bounds f below by -1/23.
        assert!((InbreedingCoefficient::lower_bound(&theta) + 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn presets() {
        let (theta, n) = preset_theta(1).unwrap();
        assert_eq!((theta.alleles(), n), (10, 100));
        assert!((theta.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);

        let (theta, n) = preset_theta(2).unwrap();
        let h10: f64 = (1..=10).map(|j| 1.0 / j as f64).sum();
        assert!((h10 - 2.928968).abs() < 1e-6);
        assert!((theta.get(0) - 1.0 / h10).abs() < 1e-15);
        assert!((theta.get(0) - 0.34142).abs() < 1e-5);
        assert_eq!(n, 100);

        assert_eq!(preset_theta(3).unwrap().1, 200);
        let (theta, n) = preset_theta(4).unwrap();
        assert_eq!((theta.alleles(), n), (20, 200));
        assert!(matches!(preset_theta(5), Err(Error::UnknownPreset(5))));
    }

    fn theta_strategy() -> impl Strategy<Value = ThetaVector> {
        prop::collection::vec(0.05f64..1.0, 2..8).prop_map(|w| ThetaVector::from_weights(&w).unwrap())
    }

    proptest! {
        #[test]
        fn selection_scale_invariant(theta in theta_strategy(), w1 in 0.2f64..5.0) {
            let w = common_allele_fitness(theta.alleles(), w1).unwrap();
            let w3 = FitnessMatrix::new(theta.alleles(), w.cells().iter().map(|x| 3.0 * x).collect()).unwrap();
            let a = selection_distribution(&theta, &w).unwrap();
            let b = selection_distribution(&theta, &w3).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }

        #[test]
        fn inbreeding_preserves_allele_frequencies(theta in theta_strategy(), u in 0.0f64..1.0) {
            let min = InbreedingCoefficient::lower_bound(&theta);
            let f = min + u * (1.0 - min);
            let d = inbreeding_distribution(&theta, f).unwrap();
            prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(d.probs().iter().all(|&p| p >= 0.0));
            for (freq, t) in d.allele_frequencies().iter().zip(theta.as_slice()) {
                prop_assert!((freq - t).abs() < 1e-12);
            }
        }
    }
}

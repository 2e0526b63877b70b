//! Simulation studies built on the p-value engine: power and Type I error
//! under an alternative, the common-allele sweep over the number of alleles,
//! and rank-wise discrepancy profiles.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genotype::{
    allele_counts_into, cell_count, cell_pair, hwe_distribution, model_counts_into, GenotypeDistribution,
    GenotypeTable, ThetaVector,
};
use crate::pvalue::{count_exceedances, with_workers, Mode};
use crate::sampling::{MultinomialSampler, RandomSource};
use crate::statistics::StatisticKind;

/// An alternative distribution paired with the allele proportions of the
/// null it departs from.
#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub label: String,
    pub theta: ThetaVector,
    pub n: u64,
    pub alternative: GenotypeDistribution,
}

impl Scenario {
    pub fn new(label: impl Into<String>, theta: ThetaVector, n: u64, alternative: GenotypeDistribution) -> Result<Self> {
        if theta.alleles() != alternative.alleles() {
            return Err(Error::DimensionMismatch {
                expected: theta.alleles(),
                found: alternative.alleles(),
            });
        }
        if n == 0 {
            return Err(Error::EmptySample);
        }
        Ok(Self {
            label: label.into(),
            theta,
            n,
            alternative,
        })
    }

    /// The scenario whose alternative is the null itself.
    pub fn null(label: impl Into<String>, theta: ThetaVector, n: u64) -> Result<Self> {
        let dist = hwe_distribution(&theta);
        Self::new(label, theta, n, dist)
    }
}

/// Settings for a two-level (datasets × trials) simulation study.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerStudy {
    pub kinds: Vec<StatisticKind>,
    pub alpha: f64,
    pub sims: u64,
    pub trials: u64,
    pub mode: Mode,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl PowerStudy {
    pub fn new(kinds: &[StatisticKind], alpha: f64, sims: u64, trials: u64, mode: Mode, seed: u64) -> Self {
        Self {
            kinds: kinds.to_vec(),
            alpha,
            sims,
            trials,
            mode,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.sims == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("sims and trials must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.kinds.is_empty() {
            return Err(Error::InvalidArgument("no statistics requested".into()));
        }
        Ok(())
    }

    /// Rejection counts per kind over `sims` datasets drawn from `dist`.
    fn rejections(&self, dist: &GenotypeDistribution, n: u64, source: RandomSource) -> Result<Vec<u64>> {
        let sampler = MultinomialSampler::new(dist);
        let threshold = self.alpha;
        let per_sim = |s: u64| -> Result<Vec<u64>> {
            let sim = source.child(s);
            let data = sampler.sample(n, &mut sim.child(0).rng());
            let ex = count_exceedances(&data, &self.kinds, self.mode, self.trials, sim.child(1))?;
            Ok(ex
                .counts
                .iter()
                .map(|&c| u64::from(c as f64 / self.trials as f64 <= threshold))
                .collect())
        };
        (0..self.sims).into_par_iter().map(per_sim).try_reduce(
            || vec![0u64; self.kinds.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
    }

    /// Power against the scenario's alternative and Type I error against the
    /// equilibrium distribution with the same θ and n.
    pub fn run(&self, scenario: &Scenario) -> Result<PowerReport> {
        self.validate()?;
        let root = RandomSource::new(self.seed);
        let null = hwe_distribution(&scenario.theta);
        let (alt, type1) = with_workers(self.workers, || -> Result<_> {
            Ok((
                self.rejections(&scenario.alternative, scenario.n, root.child(0))?,
                self.rejections(&null, scenario.n, root.child(1))?,
            ))
        })?;
        let sims = self.sims as f64;
        let rates = self
            .kinds
            .iter()
            .zip(alt.iter().zip(&type1))
            .map(|(&kind, (&a, &t))| PowerRate {
                kind,
                power: a as f64 / sims,
                type1: t as f64 / sims,
            })
            .collect();
        Ok(PowerReport {
            alternative: scenario.label.clone(),
            n: scenario.n,
            alpha: self.alpha,
            sims: self.sims,
            trials_per_sim: self.trials,
            mode: self.mode,
            seed: self.seed,
            rates,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerRate {
    pub kind: StatisticKind,
    pub power: f64,
    pub type1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerReport {
    pub alternative: String,
    pub n: u64,
    pub alpha: f64,
    pub sims: u64,
    pub trials_per_sim: u64,
    pub mode: Mode,
    pub seed: u64,
    pub rates: Vec<PowerRate>,
}

impl PowerReport {
    pub fn rate(&self, kind: StatisticKind) -> Option<&PowerRate> {
        self.rates.iter().find(|r| r.kind == kind)
    }

    /// Binomial standard error of a rate estimated from `sims` datasets.
    pub fn standard_error(&self, rate: f64) -> f64 {
        (rate * (1.0 - rate) / self.sims as f64).sqrt()
    }
}

/// Power and Type I error for `dist` against equilibrium with the given θ.
#[allow(clippy::too_many_arguments)]
pub fn power_study(
    dist: &GenotypeDistribution,
    theta: &ThetaVector,
    n: u64,
    kinds: &[StatisticKind],
    alpha: f64,
    sims: u64,
    trials: u64,
    mode: Mode,
    seed: u64,
) -> Result<PowerReport> {
    let scenario = Scenario::new("custom", theta.clone(), n, dist.clone())?;
    PowerStudy::new(kinds, alpha, sims, trials, mode, seed).run(&scenario)
}

/// One common allele and r rare ones: n_{0,0} = r and n_{k,0} = 2 for
/// k = 1..=r, so n = 3r and the allele counts are (4r, 2, ..., 2).
pub fn common_allele_dataset(r: usize) -> Result<GenotypeTable> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("common-allele dataset needs r >= 2, got {r}")));
    }
    let mut table = GenotypeTable::zeros(r + 1)?;
    table.set(0, 0, r as u64);
    for k in 1..=r {
        table.set(k, 0, 2);
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSeries {
    pub kind: StatisticKind,
    pub p_values: Vec<f64>,
    pub exceedances: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCurve {
    pub r_values: Vec<usize>,
    pub mode: Mode,
    pub trials: u64,
    pub seed: u64,
    pub series: Vec<SweepSeries>,
}

impl SweepCurve {
    pub fn series(&self, kind: StatisticKind) -> Option<&SweepSeries> {
        self.series.iter().find(|s| s.kind == kind)
    }
}

/// p-values on the common-allele dataset for each r; every r reuses `seed`.
pub fn common_allele_sweep(
    r_values: &[usize],
    kinds: &[StatisticKind],
    trials: u64,
    mode: Mode,
    seed: u64,
    workers: Option<usize>,
) -> Result<SweepCurve> {
    let mut series: Vec<SweepSeries> = kinds
        .iter()
        .map(|&kind| SweepSeries {
            kind,
            p_values: Vec::with_capacity(r_values.len()),
            exceedances: Vec::with_capacity(r_values.len()),
        })
        .collect();
    for &r in r_values {
        let table = common_allele_dataset(r)?;
        let ex = with_workers(workers, || {
            count_exceedances(&table, kinds, mode, trials, RandomSource::new(seed))
        })?;
        for (s, &count) in series.iter_mut().zip(&ex.counts) {
            s.exceedances.push(count);
            s.p_values.push(count as f64 / trials as f64);
        }
    }
    Ok(SweepCurve {
        r_values: r_values.to_vec(),
        mode,
        trials,
        seed,
        series,
    })
}

/// Cellwise discrepancy used for profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProfileKind {
    /// (m - n)²
    RmsSquared,
    /// (n - m)² / m, zero where m = 0
    ChiSquared,
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rms" | "rms2" | "f" | "rmssquared" => Ok(ProfileKind::RmsSquared),
            "chi" | "chi2" | "x2" | "chisquared" => Ok(ProfileKind::ChiSquared),
            _ => Err(Error::InvalidArgument(format!(
                "unknown profile kind `{s}` (expected rms or chi2)"
            ))),
        }
    }
}

pub const PROFILE_LEVELS: [f64; 5] = [1.0, 25.0, 50.0, 75.0, 99.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyProfile {
    pub kind: ProfileKind,
    pub k: u64,
    pub seed: u64,
    /// Canonical cell indices sorted by nondecreasing model count.
    pub ordering: Vec<usize>,
    /// 0-based (j, k) for each rank.
    pub genotypes: Vec<(usize, usize)>,
    pub observed_counts: Vec<u64>,
    pub model_counts: Vec<f64>,
    /// Normalized observed discrepancy by rank; all zeros when degenerate.
    pub observed: Vec<f64>,
    /// The observed discrepancy vector is identically zero.
    pub degenerate: bool,
    pub levels: [f64; 5],
    /// Percentiles of the normalized simulated discrepancy at each rank.
    pub simulated_percentiles: Vec<[f64; 5]>,
}

/// Cell indices sorted by model count, ties by index.
pub fn sort_by_model(model: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..model.len()).collect();
    order.sort_by(|&a, &b| model[a].total_cmp(&model[b]).then(a.cmp(&b)));
    order
}

fn cell_discrepancy(kind: ProfileKind, n: u64, m: f64) -> f64 {
    let d = n as f64 - m;
    match kind {
        ProfileKind::RmsSquared => d * d,
        ProfileKind::ChiSquared if m > 0.0 => d * d / m,
        ProfileKind::ChiSquared => 0.0,
    }
}

/// Sorted, normalized discrepancy vector; the flag is set when it sums to 0.
fn normalized_profile(kind: ProfileKind, obs: &[u64], model: &[f64]) -> (Vec<f64>, bool) {
    let order = sort_by_model(model);
    let mut d: Vec<f64> = order.iter().map(|&i| cell_discrepancy(kind, obs[i], model[i])).collect();
    let sum: f64 = d.iter().sum();
    if sum > 0.0 {
        d.iter_mut().for_each(|x| *x /= sum);
        (d, false)
    } else {
        (d, true)
    }
}

/// Linear-interpolation percentile of sorted data (q in [0, 100]).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Observed discrepancy by model-count rank against `k` plain-null
/// simulations, each re-fitted and ranked by its own model counts.
pub fn discrepancy_profile(
    obs: &GenotypeTable,
    kind: ProfileKind,
    k: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<DiscrepancyProfile> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let n = obs.total_draws();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let model = obs.model_counts()?;
    let ordering = sort_by_model(model.cells());
    let (observed, degenerate) = normalized_profile(kind, obs.cells(), model.cells());

    let r = obs.alleles();
    let cells = cell_count(r);
    let sampler = MultinomialSampler::new(&model.distribution());
    let source = RandomSource::new(seed);
    let sims: Vec<Vec<f64>> = with_workers(workers, || {
        (0..k)
            .into_par_iter()
            .map(|i| {
                let mut sim = vec![0u64; cells];
                let mut alleles = vec![0u64; r];
                let mut fitted = vec![0.0f64; cells];
                sampler.sample_into(n, &mut source.child(i).rng(), &mut sim);
                allele_counts_into(r, &sim, &mut alleles);
                model_counts_into(&alleles, n, &mut fitted);
                normalized_profile(kind, &sim, &fitted).0
            })
            .collect()
    });

    let mut column = vec![0.0; sims.len()];
    let simulated_percentiles = (0..cells)
        .map(|rank| {
            column.iter_mut().zip(&sims).for_each(|(c, s)| *c = s[rank]);
            column.sort_by(f64::total_cmp);
            PROFILE_LEVELS.map(|q| percentile(&column, q))
        })
        .collect();

    Ok(DiscrepancyProfile {
        kind,
        k,
        seed,
        genotypes: ordering.iter().map(|&i| cell_pair(i)).collect(),
        observed_counts: ordering.iter().map(|&i| obs.cells()[i]).collect(),
        model_counts: ordering.iter().map(|&i| model.cells()[i]).collect(),
        ordering,
        observed,
        degenerate,
        levels: PROFILE_LEVELS,
        simulated_percentiles,
    })
}

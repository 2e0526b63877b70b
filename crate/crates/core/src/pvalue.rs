//! Monte-Carlo p-values under the plain (parametric bootstrap) and fully
//! conditional (allele-permutation) null schemes.
//!
//! Trial `i` always draws from substream `i` of the run's seed, and the
//! exceedance count is an integer sum over fixed-size blocks of trials, so a
//! result is bit-identical for any number of workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::{allele_counts_into, model_counts_into, GenotypeTable};
use crate::sampling::{ConditionalSampler, MultinomialSampler, RandomSource};
use crate::special::beta_quantile;
use crate::statistics::{Evaluator, StatisticKind};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "HWE_RMS_WORKERS";

/// Trials per unit of parallel work.
pub const BLOCK_SIZE: u64 = 1024;

/// Relative slack in the `S >= s` comparison. Distinct tables can share a
/// statistic exactly (H² on alleles (2, 2) gives 4 - 2√2 for both outcomes)
/// while their floating-point values differ in the last bits.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Smallest simulated value counted as an exceedance of `s`.
pub fn exceedance_threshold(s: f64) -> f64 {
    if s.is_finite() {
        s - TIE_TOLERANCE * s.abs()
    } else {
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Resample genotypes from the fitted model and re-fit each trial.
    Plain,
    /// Permute the observed alleles; model counts stay fixed.
    FullyConditional,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Plain, Mode::FullyConditional];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::FullyConditional => "conditional",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(Mode::Plain),
            "conditional" | "fc" | "fully-conditional" | "fullyconditional" => {
                Ok(Mode::FullyConditional)
            }
            _ => Err(Error::InvalidArgument(format!(
                "unknown mode `{s}` (expected plain or conditional)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PValueResult {
    pub kind: StatisticKind,
    pub mode: Mode,
    #[serde(serialize_with = "crate::report::float_or_string")]
    pub observed_statistic: f64,
    pub trials: u64,
    pub exceedances: u64,
    pub p_value: f64,
    pub ci99: (f64, f64),
    pub seed: u64,
    pub add_one: bool,
}

impl PValueResult {
    fn new(
        kind: StatisticKind,
        mode: Mode,
        observed_statistic: f64,
        trials: u64,
        exceedances: u64,
        seed: u64,
        add_one: bool,
    ) -> Self {
        let p_value = if add_one {
            (exceedances + 1) as f64 / (trials + 1) as f64
        } else {
            exceedances as f64 / trials as f64
        };
        Self {
            kind,
            mode,
            observed_statistic,
            trials,
            exceedances,
            p_value,
            ci99: ci99(exceedances, trials),
            seed,
            add_one,
        }
    }

    /// Binomial standard error of the estimate.
    pub fn standard_error(&self) -> f64 {
        (self.p_value * (1.0 - self.p_value) / self.trials as f64).sqrt()
    }
}

/// 99% Clopper-Pearson interval for an exceedance probability.
pub fn ci99(exceedances: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1 && exceedances <= trials, "need 0 <= exceedances <= trials, trials >= 1");
    let alpha = 0.01;
    let (x, n) = (exceedances as f64, trials as f64);
    let lo = if exceedances == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, x, n - x + 1.0)
    };
    let hi = if exceedances == trials {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, x + 1.0, n - x)
    };
    (lo, hi)
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn default_workers() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers.or_else(default_workers) {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Observed statistics and exceedance counts for one table.
#[derive(Clone, Debug)]
pub(crate) struct Exceedances {
    pub observed: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Core Monte-Carlo loop; parallelizes over blocks in the current rayon pool.
pub(crate) fn count_exceedances(
    obs: &GenotypeTable,
    kinds: &[StatisticKind],
    mode: Mode,
    trials: u64,
    source: RandomSource,
) -> Result<Exceedances> {
    let n = obs.total_draws();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let alleles = obs.allele_counts();
    let model = obs.model_counts()?;
    let evaluator = Evaluator::new(n);
    let observed: Vec<f64> = kinds
        .iter()
        .map(|&k| evaluator.eval(k, obs.cells(), model.cells()))
        .collect();
    let thresholds: Vec<f64> = observed.iter().map(|&s| exceedance_threshold(s)).collect();
    let r = obs.alleles();
    let cells = obs.cells().len();

    enum Scheme {
        Plain(MultinomialSampler),
        Conditional(ConditionalSampler),
    }
    let scheme = match mode {
        Mode::Plain => Scheme::Plain(MultinomialSampler::new(&model.distribution())),
        Mode::FullyConditional => Scheme::Conditional(ConditionalSampler::new(&alleles)?),
    };

    let blocks = trials.div_ceil(BLOCK_SIZE);
    let run_block = |b: u64| -> Vec<u64> {
        let mut counts = vec![0u64; kinds.len()];
        let mut sim = vec![0u64; cells];
        let mut sim_alleles = vec![0u64; r];
        let mut sim_model = vec![0.0f64; cells];
        let mut scratch = Vec::new();
        let end = ((b + 1) * BLOCK_SIZE).min(trials);
        for i in b * BLOCK_SIZE..end {
            let mut rng = source.child(i).rng();
            let fitted: &[f64] = match &scheme {
                Scheme::Plain(sampler) => {
                    sampler.sample_into(n, &mut rng, &mut sim);
                    allele_counts_into(r, &sim, &mut sim_alleles);
                    model_counts_into(&sim_alleles, n, &mut sim_model);
                    &sim_model
                }
                Scheme::Conditional(sampler) => {
                    sampler.sample_into(&mut rng, &mut scratch, &mut sim);
                    model.cells()
                }
            };
            for ((count, &kind), &t) in counts.iter_mut().zip(kinds).zip(&thresholds) {
                if evaluator.eval(kind, &sim, fitted) >= t {
                    *count += 1;
                }
            }
        }
        counts
    };

    let counts = (0..blocks)
        .into_par_iter()
        .map(run_block)
        .reduce(
            || vec![0u64; kinds.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(Exceedances { observed, counts })
}

/// Monte-Carlo run settings shared by every p-value computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` falls back to [`WORKERS_ENV`], then rayon's default.
    pub workers: Option<usize>,
    /// Report (exceedances + 1) / (trials + 1) instead of exceedances / trials.
    pub add_one: bool,
}

impl MonteCarlo {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            workers: None,
            add_one: false,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_add_one(mut self, add_one: bool) -> Self {
        self.add_one = add_one;
        self
    }

    /// p-values for every kind in `kinds`, all sharing the same simulated tables.
    pub fn run(&self, obs: &GenotypeTable, kinds: &[StatisticKind], mode: Mode) -> Result<Vec<PValueResult>> {
        let source = RandomSource::new(self.seed);
        let ex = with_workers(self.workers, || count_exceedances(obs, kinds, mode, self.trials, source))?;
        Ok(kinds
            .iter()
            .zip(ex.observed.iter().zip(&ex.counts))
            .map(|(&kind, (&s, &count))| {
                PValueResult::new(kind, mode, s, self.trials, count, self.seed, self.add_one)
            })
            .collect())
    }

    pub fn plain(&self, obs: &GenotypeTable, kind: StatisticKind) -> Result<PValueResult> {
        Ok(self.run(obs, &[kind], Mode::Plain)?.remove(0))
    }

    pub fn conditional(&self, obs: &GenotypeTable, kind: StatisticKind) -> Result<PValueResult> {
        Ok(self.run(obs, &[kind], Mode::FullyConditional)?.remove(0))
    }
}

/// Plain p-value: fraction of re-fitted multinomial resamples whose
/// discrepancy is at least the observed one.
pub fn plain_pvalue(obs: &GenotypeTable, kind: StatisticKind, trials: u64, seed: u64) -> Result<PValueResult> {
    MonteCarlo::new(trials, seed).plain(obs, kind)
}

/// Fully conditional p-value: fraction of random allele pairings whose
/// discrepancy from the observed model counts is at least the observed one.
pub fn conditional_pvalue(
    obs: &GenotypeTable,
    kind: StatisticKind,
    trials: u64,
    seed: u64,
) -> Result<PValueResult> {
    MonteCarlo::new(trials, seed).conditional(obs, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_boundaries() {
        let (lo, hi) = ci99(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.005f64.powf(0.01))).abs() < 1e-12);
        assert!((hi - 0.0516).abs() < 1e-4);
        assert_eq!(ci99(250, 250).1, 1.0);
        assert!(ci99(250, 250).0 < 1.0);
    }

    #[test]
    fn ci_half_width_at_sixteen_million() {
        let trials = 16_000_000;
        let (lo, hi) = ci99(trials / 2, trials);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((hi - lo) / 2.0 <= 0.001);
        // Normal approximation: 2.5758 * sqrt(0.25 / 1.6e7).
        assert!(((hi - lo) / 2.0 - 3.22e-4).abs() < 2e-6);
    }

    #[test]
    fn self_fitting_table_has_p_one() {
        let t = GenotypeTable::from_rows(&[vec![1], vec![2, 1]]).unwrap();
        for kind in [StatisticKind::ChiSquare, StatisticKind::RootMeanSquare] {
            assert_eq!(plain_pvalue(&t, kind, 500, 1).unwrap().p_value, 1.0);
        }
    }

    #[test]
    fn forced_table_has_p_one_in_both_modes() {
        let t = GenotypeTable::from_rows(&[vec![3], vec![0, 0]]).unwrap();
        for kind in StatisticKind::ALL {
            assert_eq!(plain_pvalue(&t, kind, 300, 9).unwrap().p_value, 1.0);
            assert_eq!(conditional_pvalue(&t, kind, 300, 9).unwrap().p_value, 1.0);
        }
    }

    #[test]
    fn empty_sample_rejected() {
        let t = GenotypeTable::zeros(2).unwrap();
        assert!(matches!(
            plain_pvalue(&t, StatisticKind::ChiSquare, 10, 1),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn add_one_variant() {
        let t = GenotypeTable::from_rows(&[vec![0], vec![3, 1], vec![5, 18, 1], vec![3, 7, 5, 2]]).unwrap();
        let mc = MonteCarlo::new(400, 5);
        let plain = mc.plain(&t, StatisticKind::RootMeanSquare).unwrap();
        let add_one = mc.clone().with_add_one(true).plain(&t, StatisticKind::RootMeanSquare).unwrap();
        assert_eq!(plain.exceedances, add_one.exceedances);
        assert_eq!(plain.p_value, plain.exceedances as f64 / 400.0);
        assert_eq!(add_one.p_value, (add_one.exceedances + 1) as f64 / 401.0);
    }

    #[test]
    fn result_invariants() {
        let t = GenotypeTable::from_rows(&[vec![0], vec![3, 1], vec![5, 18, 1], vec![3, 7, 5, 2]]).unwrap();
        for mode in Mode::BOTH {
            for r in MonteCarlo::new(2000, 11).run(&t, &StatisticKind::ALL, mode).unwrap() {
                assert!(r.exceedances <= r.trials);
                assert_eq!(r.p_value, r.exceedances as f64 / r.trials as f64);
                assert!(r.ci99.0 <= r.p_value && r.p_value <= r.ci99.1);
            }
        }
    }

    #[test]
    fn kinds_share_trials() {
        let t = GenotypeTable::from_rows(&[vec![0], vec![3, 1], vec![5, 18, 1], vec![3, 7, 5, 2]]).unwrap();
        let mc = MonteCarlo::new(3000, 77);
        let all = mc.run(&t, &StatisticKind::ALL, Mode::FullyConditional).unwrap();
        let single = mc.conditional(&t, StatisticKind::Hellinger).unwrap();
        assert_eq!(all[2], single);
    }

    #[test]
    fn threshold_only_absorbs_round_off() {
        let s = 4.0 * (4.0 - 2.0 * 2f64.sqrt());
        assert!(exceedance_threshold(s) < s && s - exceedance_threshold(s) < 1e-9);
        assert_eq!(exceedance_threshold(0.0), 0.0);
        assert_eq!(exceedance_threshold(f64::INFINITY), f64::INFINITY);
        assert!(1.0 < exceedance_threshold(1.0 + 1e-6));
    }

    #[test]
    fn parse_mode() {
        assert_eq!("plain".parse::<Mode>().unwrap(), Mode::Plain);
        assert_eq!("FC".parse::<Mode>().unwrap(), Mode::FullyConditional);
        assert!("both".parse::<Mode>().is_err());
    }
}

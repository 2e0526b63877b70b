//! Discrepancy measures between observed genotype counts and model counts.
//!
//! Conventions shared by every measure: a cell with zero observed and zero
//! model count contributes nothing, and natural logarithms are used. A
//! positive observed count in a cell with zero model count makes X², G² and
//! L infinite; H² and F stay finite.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::genotype::{GenotypeTable, ModelCounts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatisticKind {
    ChiSquare,
    LogLikelihoodRatio,
    Hellinger,
    NegLogLikelihood,
    RootMeanSquare,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 5] = [
        StatisticKind::ChiSquare,
        StatisticKind::LogLikelihoodRatio,
        StatisticKind::Hellinger,
        StatisticKind::NegLogLikelihood,
        StatisticKind::RootMeanSquare,
    ];

    /// Short symbol used in tables and on the command line.
    pub fn symbol(self) -> &'static str {
        match self {
            StatisticKind::ChiSquare => "X2",
            StatisticKind::LogLikelihoodRatio => "G2",
            StatisticKind::Hellinger => "H2",
            StatisticKind::NegLogLikelihood => "L",
            StatisticKind::RootMeanSquare => "F",
        }
    }

    /// Whether the measure is a divergence, i.e. zero when obs equals model.
    pub fn is_divergence(self) -> bool {
        !matches!(self, StatisticKind::NegLogLikelihood)
    }

    /// Parses a comma-separated list; `all` expands to every statistic.
    pub fn parse_list(list: &str) -> Result<Vec<StatisticKind>> {
        let mut kinds = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item.eq_ignore_ascii_case("all") {
                kinds.extend(Self::ALL);
            } else {
                kinds.push(item.parse()?);
            }
        }
        kinds.sort();
        kinds.dedup();
        if kinds.is_empty() {
            return Err(Error::InvalidArgument("no statistics selected".into()));
        }
        Ok(kinds)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "x2" | "chi2" | "chisquare" | "chi-square" | "pearson" => StatisticKind::ChiSquare,
            "g2" | "llr" | "loglikelihoodratio" | "log-likelihood-ratio" => {
                StatisticKind::LogLikelihoodRatio
            }
            "h2" | "hellinger" => StatisticKind::Hellinger,
            "l" | "nll" | "neglikelihood" | "negloglikelihood" | "neg-log-likelihood" => {
                StatisticKind::NegLogLikelihood
            }
            "f" | "rms" | "rootmeansquare" | "root-mean-square" => StatisticKind::RootMeanSquare,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown statistic `{s}` (expected X2, G2, H2, L, F or all)"
                )))
            }
        };
        Ok(kind)
    }
}

/// A statistic value together with the measure that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub kind: StatisticKind,
    pub value: f64,
}

/// ln(k!).
#[inline]
pub fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// Statistics over flat cell slices. `obs` and `model` must have equal length.
pub mod cellwise {
    use super::ln_factorial;

    pub fn chi_square(obs: &[u64], model: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (&n, &m) in obs.iter().zip(model) {
            if m > 0.0 {
                let d = n as f64 - m;
                sum += d * d / m;
            } else if n > 0 {
                return f64::INFINITY;
            }
        }
        sum
    }

    pub fn g2(obs: &[u64], model: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (&n, &m) in obs.iter().zip(model) {
            if n > 0 {
                if m <= 0.0 {
                    return f64::INFINITY;
                }
                let n = n as f64;
                sum += n * (n / m).ln();
            }
        }
        2.0 * sum
    }

    pub fn hellinger(obs: &[u64], model: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (&n, &m) in obs.iter().zip(model) {
            let d = (n as f64).sqrt() - m.sqrt();
            sum += d * d;
        }
        4.0 * sum
    }

    pub fn neg_log_likelihood(obs: &[u64], model: &[f64]) -> f64 {
        neg_log_likelihood_with(obs, model, ln_factorial)
    }

    /// Same as [`neg_log_likelihood`] with a caller-supplied ln(k!).
    pub(crate) fn neg_log_likelihood_with(
        obs: &[u64],
        model: &[f64],
        ln_fact: impl Fn(u64) -> f64,
    ) -> f64 {
        let total: u64 = obs.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let mut log_lik = ln_fact(total) - total as f64 * (total as f64).ln();
        for (&n, &m) in obs.iter().zip(model) {
            if n > 0 {
                if m <= 0.0 {
                    return f64::INFINITY;
                }
                log_lik += n as f64 * m.ln() - ln_fact(n);
            }
        }
        -log_lik
    }

    /// sqrt(Σ (n - m)² / (n² · cells)); for a triangular table with r alleles
    /// `cells = r(r+1)/2`.
    pub fn rms(obs: &[u64], model: &[f64]) -> f64 {
        let total: u64 = obs.iter().sum();
        if total == 0 || obs.is_empty() {
            return 0.0;
        }
        let sum: f64 = obs
            .iter()
            .zip(model)
            .map(|(&n, &m)| {
                let d = n as f64 - m;
                d * d
            })
            .sum();
        let n = total as f64;
        (sum / (n * n * obs.len() as f64)).sqrt()
    }
}

/// Evaluates statistics in hot loops, caching ln(k!) up to a fixed total.
#[derive(Clone, Debug)]
pub(crate) struct Evaluator {
    ln_fact: Vec<f64>,
}

impl Evaluator {
    pub(crate) fn new(max_total: u64) -> Self {
        Self {
            ln_fact: (0..=max_total).map(ln_factorial).collect(),
        }
    }

    pub(crate) fn eval(&self, kind: StatisticKind, obs: &[u64], model: &[f64]) -> f64 {
        match kind {
            StatisticKind::ChiSquare => cellwise::chi_square(obs, model),
            StatisticKind::LogLikelihoodRatio => cellwise::g2(obs, model),
            StatisticKind::Hellinger => cellwise::hellinger(obs, model),
            StatisticKind::NegLogLikelihood => {
                cellwise::neg_log_likelihood_with(obs, model, |k| match self.ln_fact.get(k as usize) {
                    Some(v) => *v,
                    None => ln_factorial(k),
                })
            }
            StatisticKind::RootMeanSquare => cellwise::rms(obs, model),
        }
    }
}

fn check_dims(obs: &GenotypeTable, model: &ModelCounts) -> Result<()> {
    if obs.alleles() != model.alleles() {
        return Err(Error::DimensionMismatch {
            expected: model.alleles(),
            found: obs.alleles(),
        });
    }
    Ok(())
}

/// Evaluates `kind` on a table and model counts over the same alleles.
pub fn evaluate(kind: StatisticKind, obs: &GenotypeTable, model: &ModelCounts) -> Result<Discrepancy> {
    check_dims(obs, model)?;
    let (o, m) = (obs.cells(), model.cells());
    let value = match kind {
        StatisticKind::ChiSquare => cellwise::chi_square(o, m),
        StatisticKind::LogLikelihoodRatio => cellwise::g2(o, m),
        StatisticKind::Hellinger => cellwise::hellinger(o, m),
        StatisticKind::NegLogLikelihood => cellwise::neg_log_likelihood(o, m),
        StatisticKind::RootMeanSquare => cellwise::rms(o, m),
    };
    Ok(Discrepancy { kind, value })
}

/// Pearson's X² = Σ (n - m)² / m.
pub fn chi_square(obs: &GenotypeTable, model: &ModelCounts) -> Result<Discrepancy> {
    evaluate(StatisticKind::ChiSquare, obs, model)
}

/// Log-likelihood-ratio G² = 2 Σ n log(n / m).
pub fn g2(obs: &GenotypeTable, model: &ModelCounts) -> Result<Discrepancy> {
    evaluate(StatisticKind::LogLikelihoodRatio, obs, model)
}

/// Hellinger H² = 4 Σ (√n - √m)².
pub fn hellinger(obs: &GenotypeTable, model: &ModelCounts) -> Result<Discrepancy> {
    evaluate(StatisticKind::Hellinger, obs, model)
}

/// Negative log of the multinomial likelihood of `obs` under cell
/// probabilities m / n.
pub fn neg_log_likelihood(obs: &GenotypeTable, model: &ModelCounts) -> Result<Discrepancy> {
    evaluate(StatisticKind::NegLogLikelihood, obs, model)
}

/// Root-mean-square F = sqrt(2 / (n² r (r+1)) · Σ (n - m)²).
pub fn rms(obs: &GenotypeTable, model: &ModelCounts) -> Result<Discrepancy> {
    evaluate(StatisticKind::RootMeanSquare, obs, model)
}

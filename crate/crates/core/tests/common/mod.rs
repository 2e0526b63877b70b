//! Reference computations written directly from the textbook formulas on
//! nested rows, sharing no code with the library.

#![allow(dead_code)]

use hwe_rms::{GenotypeTable, StatisticKind};

/// Lower-triangular rows: rows[j][k] for k <= j.
pub type Rows = Vec<Vec<u64>>;

pub fn rows_of(table: &GenotypeTable) -> Rows {
    table.rows().map(<[u64]>::to_vec).collect()
}

pub fn total(rows: &Rows) -> u64 {
    rows.iter().flatten().sum()
}

/// m_{j,k} = n_j n_k / (2n) off the diagonal and n_j² / (4n) on it.
pub fn model(rows: &Rows) -> Vec<Vec<f64>> {
    let r = rows.len();
    let n = total(rows) as f64;
    let mut alleles = vec![0.0; r];
    for (j, row) in rows.iter().enumerate() {
        for (k, &c) in row.iter().enumerate() {
            alleles[j] += c as f64;
            alleles[k] += c as f64;
        }
    }
    (0..r)
        .map(|j| {
            (0..=j)
                .map(|k| {
                    if j == k {
                        alleles[j] * alleles[j] / (4.0 * n)
                    } else {
                        alleles[j] * alleles[k] / (2.0 * n)
                    }
                })
                .collect()
        })
        .collect()
}

fn ln_fact(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

pub fn statistic(kind: StatisticKind, rows: &Rows, model: &[Vec<f64>]) -> f64 {
    let n = total(rows) as f64;
    let r = rows.len() as f64;
    let pairs = rows
        .iter()
        .zip(model)
        .flat_map(|(o, m)| o.iter().map(|&x| x as f64).zip(m.iter().copied()));
    match kind {
        StatisticKind::ChiSquare => pairs
            .filter(|&(_, m)| m > 0.0)
            .map(|(o, m)| (o - m).powi(2) / m)
            .sum(),
        StatisticKind::LogLikelihoodRatio => {
            2.0 * pairs.filter(|&(o, _)| o > 0.0).map(|(o, m)| o * (o / m).ln()).sum::<f64>()
        }
        StatisticKind::Hellinger => 4.0 * pairs.map(|(o, m)| (o.sqrt() - m.sqrt()).powi(2)).sum::<f64>(),
        StatisticKind::NegLogLikelihood => {
            let mut log_p = ln_fact(n as u64);
            for (o, m) in pairs.filter(|&(o, _)| o > 0.0) {
                log_p += o * (m / n).ln() - ln_fact(o as u64);
            }
            -log_p
        }
        StatisticKind::RootMeanSquare => {
            let ss: f64 = pairs.map(|(o, m)| (o - m).powi(2)).sum();
            (2.0 * ss / (n * n * r * (r + 1.0))).sqrt()
        }
    }
}

/// Every equally likely arrangement of `a0` copies of allele 0 and `a1`
/// copies of allele 1, paired position by position, as biallelic rows.
pub fn biallelic_arrangements(a0: usize, a1: usize) -> Vec<Rows> {
    let len = a0 + a1;
    assert!(len % 2 == 0 && len <= 20);
    (0u32..1 << len)
        .filter(|mask| mask.count_ones() as usize == a1)
        .map(|mask| {
            let mut rows = vec![vec![0u64], vec![0u64, 0u64]];
            for pair in 0..len / 2 {
                let x = (mask >> (2 * pair)) & 1;
                let y = (mask >> (2 * pair + 1)) & 1;
                match x + y {
                    0 => rows[0][0] += 1,
                    1 => rows[1][0] += 1,
                    _ => rows[1][1] += 1,
                }
            }
            rows
        })
        .collect()
}

/// Exact fully conditional p-value: the share of arrangements whose
/// statistic (against the observed model) is at least the observed one.
pub fn exact_conditional_p(kind: StatisticKind, rows: &Rows) -> f64 {
    let a0 = (2 * rows[0][0] + rows[1][0]) as usize;
    let a1 = (2 * rows[1][1] + rows[1][0]) as usize;
    let m = model(rows);
    let s = statistic(kind, rows, &m);
    let all = biallelic_arrangements(a0, a1);
    let hits = all
        .iter()
        .filter(|t| statistic(kind, t, &m) >= s - 1e-9 * s.abs().max(1.0))
        .count();
    hits as f64 / all.len() as f64
}

/// All biallelic tables with `n` draws.
pub fn biallelic_tables(n: u64) -> Vec<Rows> {
    let mut out = Vec::new();
    for n00 in 0..=n {
        for n10 in 0..=n - n00 {
            out.push(vec![vec![n00], vec![n10, n - n00 - n10]]);
        }
    }
    out
}

pub fn table(rows: &Rows) -> GenotypeTable {
    GenotypeTable::from_rows(rows).unwrap()
}

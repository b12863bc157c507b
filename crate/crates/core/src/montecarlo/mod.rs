//! Seeded return simulation and volatility-based risk-capital measurements.
//!
//! Security `i` always draws from [`rng::substream`](crate::rng::substream)
//! `(seed, i)`, so row `i` of a simulated panel is the same whatever `m` is
//! and however the rows are scheduled across threads.

mod basel;
mod fat_tail;
mod histogram;

pub use basel::{
    basel1_experiment, basel1_ratios, basel2_experiment, basel2_risk, standardize_by_mean, Basel1Report, Basel2Report,
    DEFAULT_BIN_WIDTH, YEARLY_WINDOW,
};
pub use fat_tail::{draw_fat_tail, fat_tail_population_moments, FatTailParams};
pub use histogram::Histogram;

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReturnDistribution {
    /// Zero-mean normal with standard deviation `sigma`.
    Normal {
        sigma: f64,
    },
    Fat(FatTailParams),
}

impl ReturnDistribution {
    pub fn standard_normal() -> Self {
        ReturnDistribution::Normal { sigma: 1.0 }
    }

    /// True standard deviation of one draw.
    pub fn population_std(&self) -> f64 {
        match self {
            ReturnDistribution::Normal { sigma } => *sigma,
            ReturnDistribution::Fat(params) => fat_tail_population_moments(params).std,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ReturnDistribution::Normal { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => Err(Error::domain(
                format!("normal sigma must be finite and > 0, got {sigma}"),
            )),
            ReturnDistribution::Fat(p) => FatTailParams::new(p.epsilon(), p.jump()).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ReturnDistribution::Normal { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            ReturnDistribution::Fat(params) => draw_fat_tail(params, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub distribution: ReturnDistribution,
}

impl SimConfig {
    pub fn new(m: usize, n: usize, seed: u64, distribution: ReturnDistribution) -> Result<Self> {
        let config = Self {
            m,
            n,
            seed,
            distribution,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::domain("need at least one security"));
        }
        if self.n < 2 {
            return Err(Error::domain(format!(
                "need at least 2 observations per security, got {}",
                self.n
            )));
        }
        self.distribution.validate()
    }
}

/// Row-major `m × n` matrix of simulated returns, one row per security.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl ReturnMatrix {
    pub fn securities(&self) -> usize {
        self.m
    }

    pub fn periods(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.n)
    }

    pub fn par_rows(&self) -> rayon::slice::Chunks<'_, f64> {
        self.data.par_chunks(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub fn simulate_returns(config: &SimConfig) -> Result<ReturnMatrix> {
    config.validate()?;
    let SimConfig {
        m,
        n,
        seed,
        distribution,
    } = *config;
    let mut data = vec![0.0; m * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let mut rng = substream(seed, i as u64);
        for x in row.iter_mut() {
            *x = distribution.draw(&mut rng);
        }
    });
    Ok(ReturnMatrix { m, n, data })
}

/// Sample standard deviation with the `n − 1` denominator.
pub fn sample_std(returns: &[f64]) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::domain(format!(
            "sample_std needs at least 2 values, got {}",
            returns.len()
        )));
    }
    Ok(std_unchecked(returns))
}

pub(crate) fn std_unchecked(returns: &[f64]) -> f64 {
    let first = returns[0];
    if returns.iter().all(|&x| x == first) {
        return 0.0;
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let ss: f64 = returns.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Mean, sample std and (non-excess) kurtosis of a sample or distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    /// `n − 1` denominator for samples.
    pub std: f64,
    /// `m₄ / m₂²` with central moments; 3 for the normal.
    pub kurtosis: f64,
}

impl MomentSummary {
    pub fn from_sample(values: &[f64]) -> Result<Self> {
        let std = sample_std(values)?;
        if std == 0.0 {
            return Err(Error::Degenerate("kurtosis of a constant sample is undefined".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (m2, m4) = values.iter().fold((0.0, 0.0), |(m2, m4), &x| {
            let d2 = (x - mean) * (x - mean);
            (m2 + d2, m4 + d2 * d2)
        });
        let (m2, m4) = (m2 / n, m4 / n);
        Ok(Self {
            mean,
            std,
            kurtosis: m4 / (m2 * m2),
        })
    }

    /// CSV with header `mean,std,kurtosis` and one data row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["mean", "std", "kurtosis"]).map_err(io)?;
        w.write_record([self.mean.to_string(), self.std.to_string(), self.kurtosis.to_string()])
            .map_err(io)?;
        w.flush()?;
        Ok(())
    }
}

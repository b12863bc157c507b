//! Basel I (single-window std) and Basel II (std plus worst rolling yearly
//! std) risk measurements over simulated securities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate_returns, std_unchecked, Histogram, ReturnMatrix, SimConfig};
use crate::error::{Error, Result};

/// Trading days in the rolling "yearly" window.
pub const YEARLY_WINDOW: usize = 252;

pub const DEFAULT_BIN_WIDTH: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basel1Report {
    pub config: SimConfig,
    /// True per-draw std the sample stds were divided by.
    pub scale: f64,
    /// Per-security `sample_std / scale`, in security order.
    pub ratios: Vec<f64>,
    pub histogram: Histogram,
}

impl Basel1Report {
    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basel2Report {
    pub config: SimConfig,
    pub yearly_window: usize,
    /// Raw `basel2_risk` per security.
    pub risks: Vec<f64>,
    /// `risks` divided by their cross-sectional mean.
    pub standardized: Vec<f64>,
    pub histogram: Histogram,
}

impl Basel2Report {
    pub fn min_standardized(&self) -> f64 {
        self.standardized.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Each row's sample std divided by `scale`.
pub fn basel1_ratios(returns: &ReturnMatrix, scale: f64) -> Vec<f64> {
    returns.par_rows().map(|row| std_unchecked(row) / scale).collect()
}

pub fn basel1_experiment(config: &SimConfig) -> Result<Basel1Report> {
    let returns = simulate_returns(config)?;
    let scale = config.distribution.population_std();
    let ratios = basel1_ratios(&returns, scale);
    let histogram = Histogram::with_bin_width(&ratios, DEFAULT_BIN_WIDTH)?;
    Ok(Basel1Report {
        config: *config,
        scale,
        ratios,
        histogram,
    })
}

/// Whole-series sample std plus the largest sample std over every
/// contiguous window of `yearly_window` observations (step one).
pub fn basel2_risk(returns: &[f64], yearly_window: usize) -> Result<f64> {
    if yearly_window < 2 {
        return Err(Error::domain(format!(
            "yearly window must be at least 2, got {yearly_window}"
        )));
    }
    if returns.len() < yearly_window {
        return Err(Error::domain(format!(
            "series of length {} is shorter than the {yearly_window}-observation window",
            returns.len()
        )));
    }
    let worst_window = returns.windows(yearly_window).map(std_unchecked).fold(0.0, f64::max);
    Ok(std_unchecked(returns) + worst_window)
}

/// Divides every value by the sample mean; fails when the mean is not a
/// positive finite number.
pub fn standardize_by_mean(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::domain("cannot standardize an empty sample"));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Degenerate(format!(
            "cross-sectional mean {mean} cannot standardize the sample"
        )));
    }
    Ok(values.iter().map(|v| v / mean).collect())
}

pub fn basel2_experiment(config: &SimConfig, yearly_window: usize) -> Result<Basel2Report> {
    config.validate()?;
    if config.n < yearly_window {
        return Err(Error::domain(format!(
            "need at least {yearly_window} observations per security, got {}",
            config.n
        )));
    }
    let returns = simulate_returns(config)?;
    let risks = returns
        .par_rows()
        .map(|row| basel2_risk(row, yearly_window))
        .collect::<Result<Vec<_>>>()?;
    let standardized = standardize_by_mean(&risks)?;
    let histogram = Histogram::with_bin_width(&standardized, DEFAULT_BIN_WIDTH)?;
    Ok(Basel2Report {
        config: *config,
        yearly_window,
        risks,
        standardized,
        histogram,
    })
}

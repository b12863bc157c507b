//! Small-sample law of the sample standard deviation of normal returns.
//!
//! If `n` returns are i.i.d. normal with standard deviation σ, then
//! `(n − 1)·s²/σ² ~ χ²_{n−1}`. Everything here follows from that relation:
//! the CDF and density of `s`, the bias constant `Kₙ = E[s]/σ`, and the mean
//! of `s` conditional on falling in a lower or upper tail of its own law.
//! Results are dimensionless ratios to σ unless stated otherwise.

mod chi2;
mod special;

pub use chi2::{chi2_cdf, chi2_pdf, chi2_quantile, chi2_sf};
pub use special::{log_gamma, normal_cdf, normal_central_mass, normal_pdf, normal_quantile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use special::ln_gamma;

/// Which tail of the sample-std law a conditional expectation looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// A tail of the sample-std law for `n` observations holding probability
/// mass `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    n: usize,
    alpha: f64,
    side: Side,
}

impl TailSpec {
    pub fn new(n: usize, alpha: f64, side: Side) -> Result<Self> {
        check_periods(n)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("tail mass must lie in (0, 1], got {alpha}")));
        }
        Ok(Self { n, alpha, side })
    }

    pub fn lower(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, alpha, Side::Lower)
    }

    pub fn upper(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, alpha, Side::Upper)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn side(&self) -> Side {
        self.side
    }
}

/// Sampling law of `sₙ` for `n` normal observations with true std `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdDevLaw {
    n: usize,
    sigma: f64,
}

impl StdDevLaw {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        check_periods(n)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be finite and > 0, got {sigma}")));
        }
        Ok(Self { n, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn dof(&self) -> u32 {
        dof(self.n - 1)
    }
}

fn check_periods(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 observations, got {n}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::domain(format!("observation count {n} is too large")));
    }
    Ok(())
}

fn dof(k: usize) -> u32 {
    u32::try_from(k).expect("observation count validated")
}

/// `Kₙ = Γ(n/2) / (Γ((n−1)/2)·√((n−1)/2))`, the mean of `sₙ/σ`.
pub fn k_n(n: usize) -> Result<f64> {
    check_periods(n)?;
    Ok(bias_constant(n))
}

fn bias_constant(n: usize) -> f64 {
    let half = 0.5 * (n - 1) as f64;
    (ln_gamma(0.5 * n as f64) - ln_gamma(half) - 0.5 * half.ln()).exp()
}

/// `P(sₙ ≤ x)`.
pub fn sample_std_cdf(law: &StdDevLaw, x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let k = (law.n - 1) as f64;
    let arg = k * (x / law.sigma).powi(2);
    chi2_cdf(law.dof(), arg).expect("validated law")
}

/// Density of `sₙ` at `x`.
pub fn sample_std_pdf(law: &StdDevLaw, x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    let k = (law.n - 1) as f64;
    let half = 0.5 * k;
    let u = x / law.sigma;
    let log_density =
        std::f64::consts::LN_2 + half * half.ln() - ln_gamma(half) - law.sigma.ln() + (k - 1.0) * u.ln() - half * u * u;
    log_density.exp()
}

/// The `s` with `P(sₙ ≤ s) = p`, in return units.
pub fn sample_std_quantile(law: &StdDevLaw, p: f64) -> Result<f64> {
    let k = law.n - 1;
    let q = chi2_quantile(dof(k), p)?;
    Ok(law.sigma * (q / k as f64).sqrt())
}

/// `E[sₙ | sₙ in tail] / σ` for normal returns.
///
/// Lower tail of mass α: `Kₙ · P(χ²ₙ ≤ χ²_{n−1,α}) / α`.
/// Upper tail of mass α: `Kₙ · P(χ²ₙ ≥ χ²_{n−1,1−α}) / α`.
pub fn cond_tail_expectation(spec: &TailSpec) -> Result<f64> {
    let n = spec.n;
    let kn = bias_constant(n);
    if spec.alpha == 1.0 {
        return Ok(kn);
    }
    let value = match spec.side {
        Side::Lower => {
            let q = chi2_quantile(dof(n - 1), spec.alpha)?;
            kn * chi2_cdf(dof(n), q)? / spec.alpha
        }
        Side::Upper => {
            let q = chi2_quantile(dof(n - 1), 1.0 - spec.alpha)?;
            kn * chi2_sf(dof(n), q)? / spec.alpha
        }
    };
    Ok(value)
}

/// Expected number of `m` securities whose sample std over `n` periods falls
/// below `beta` times the true σ.
pub fn expected_tail_count(m: usize, n: usize, beta: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("need at least one security"));
    }
    check_periods(n)?;
    if !(beta > 0.0) {
        return Err(Error::domain(format!("std ratio threshold must be > 0, got {beta}")));
    }
    let law = StdDevLaw::new(n, 1.0)?;
    Ok(m as f64 * sample_std_cdf(&law, beta))
}

/// Capital multiple of the daily std implied by a VaR rule:
/// `√horizon · z_confidence · supervisory_factor`.
pub fn basel_multiplier(horizon_days: u32, confidence: f64, supervisory_factor: f64) -> Result<f64> {
    if horizon_days < 1 {
        return Err(Error::domain("horizon must be at least one day"));
    }
    if !(supervisory_factor > 0.0 && supervisory_factor.is_finite()) {
        return Err(Error::domain(format!(
            "supervisory factor must be > 0, got {supervisory_factor}"
        )));
    }
    let z = normal_quantile(confidence)?;
    Ok((horizon_days as f64).sqrt() * z * supervisory_factor)
}

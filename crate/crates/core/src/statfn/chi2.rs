//! Chi-square distribution with integer degrees of freedom.

use super::special::{gamma_pq, ln_gamma, normal_quantile};
use crate::error::{Error, Result};

fn check_dof(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::domain("chi-square degrees of freedom must be >= 1"));
    }
    Ok(())
}

/// `P(χ²_k ≤ x)`; zero for `x ≤ 0`.
pub fn chi2_cdf(k: u32, x: f64) -> Result<f64> {
    check_dof(k)?;
    if x.is_nan() {
        return Err(Error::domain("chi2_cdf evaluated at NaN"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_pq(0.5 * k as f64, 0.5 * x)?.0)
}

/// `P(χ²_k ≥ x)`, computed directly rather than as `1 − cdf`.
pub fn chi2_sf(k: u32, x: f64) -> Result<f64> {
    check_dof(k)?;
    if x.is_nan() {
        return Err(Error::domain("chi2_sf evaluated at NaN"));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_pq(0.5 * k as f64, 0.5 * x)?.1)
}

pub fn chi2_pdf(k: u32, x: f64) -> Result<f64> {
    check_dof(k)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let half_k = 0.5 * k as f64;
    if x == 0.0 {
        return Ok(match k {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        });
    }
    Ok(((half_k - 1.0) * x.ln() - 0.5 * x - half_k * std::f64::consts::LN_2 - ln_gamma(half_k)).exp())
}

/// The `x` with `chi2_cdf(k, x) = p`.
///
/// Starts from the Wilson–Hilferty cube approximation, brackets the root,
/// then runs Newton steps that fall back to bisection whenever a step leaves
/// the bracket.
pub fn chi2_quantile(k: u32, p: f64) -> Result<f64> {
    check_dof(k)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("chi2_quantile requires 0 < p < 1, got {p}")));
    }
    let kf = k as f64;
    let z = normal_quantile(p)?;
    let w = 2.0 / (9.0 * kf);
    let cube = 1.0 - w + z * w.sqrt();
    let mut x = if cube > 0.0 { kf * cube.powi(3) } else { kf * 0.5 };
    if !(x > 0.0) {
        x = kf;
    }

    let mut lo = 0.0;
    let mut hi = x;
    while chi2_cdf(k, hi)? < p {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Convergence {
                routine: "chi2_quantile bracketing",
            });
        }
    }
    x = x.clamp(lo, hi);

    for _ in 0..500 {
        let f = chi2_cdf(k, x)? - p;
        if f.abs() < 1e-13 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = chi2_pdf(k, x)?;
        let newton = x - f / dens;
        x = if dens > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(x);
        }
    }
    Err(Error::Convergence {
        routine: "chi2_quantile",
    })
}

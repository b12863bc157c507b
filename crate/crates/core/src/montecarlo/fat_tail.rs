use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::MomentSummary;
use crate::error::{Error, Result};
use crate::statfn::{normal_central_mass, normal_pdf};

/// Jump-replacement model: a standard normal draw inside `(−ε, ε)` is
/// replaced by `±h` with the sign of the draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatTailParams {
    epsilon: f64,
    jump: f64,
}

impl FatTailParams {
    pub fn new(epsilon: f64, jump: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !(jump > 0.0 && jump.is_finite()) {
            return Err(Error::domain(format!("jump must be finite and > 0, got {jump}")));
        }
        if jump < epsilon {
            return Err(Error::domain(format!("jump {jump} must be at least epsilon {epsilon}")));
        }
        Ok(Self { epsilon, jump })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn jump(&self) -> f64 {
        self.jump
    }

    /// Maps an underlying standard normal draw to the fat-tailed return.
    /// An exact zero goes to `+h`.
    pub fn transform(&self, z: f64) -> f64 {
        if z.abs() >= self.epsilon {
            z
        } else if z < 0.0 {
            -self.jump
        } else {
            self.jump
        }
    }
}

pub fn draw_fat_tail<R: Rng + ?Sized>(params: &FatTailParams, rng: &mut R) -> f64 {
    params.transform(rng.sample(StandardNormal))
}

/// Exact mean, std and kurtosis of the jump-replaced distribution.
///
/// With `p = P(|Z| < ε)`, the band's truncated moments are
/// `t₂ = p − 2εφ(ε)` and `t₄ = 3t₂ − 2ε³φ(ε)`; removing them and adding the
/// jump mass gives `var = 1 − t₂ + p·h²` and `E[X⁴] = 3 − t₄ + p·h⁴`.
pub fn fat_tail_population_moments(params: &FatTailParams) -> MomentSummary {
    let eps = params.epsilon;
    let h = params.jump;
    let p = normal_central_mass(eps);
    let dens = normal_pdf(eps);
    let second_in_band = p - 2.0 * eps * dens;
    let fourth_in_band = 3.0 * second_in_band - 2.0 * eps.powi(3) * dens;
    let variance = 1.0 - second_in_band + p * h * h;
    let fourth = 3.0 - fourth_in_band + p * h.powi(4);
    MomentSummary {
        mean: 0.0,
        std: variance.sqrt(),
        kurtosis: fourth / (variance * variance),
    }
}

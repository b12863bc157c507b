//! Exposure-maximizing banks under a volatility-based capital rule.
//!
//! A bank with a capital budget takes the largest linear, long-only position
//! the rule allows. Exposure per unit of capital is `1 / required_capital`,
//! so the optimum puts the whole budget into the single security with the
//! smallest required capital per unit of exposure (lowest index on ties).
//! This is a formalization of the qualitative argument, not a model of any
//! real bank's objective.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{basel2_risk, sample_std, simulate_returns, ReturnDistribution, ReturnMatrix, SimConfig};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleKind {
    /// Capital = `c` × sample std of the whole history.
    Basel1,
    /// Capital = `c` × (whole-history std + worst rolling-window std).
    Basel2 { yearly_window: usize },
    /// Capital = 100% of market value, whatever the history.
    MarketValue100,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapitalRule {
    pub kind: RuleKind,
    /// Capital multiple; fixed at 1 for the market-value rule.
    pub c: f64,
}

impl CapitalRule {
    pub fn basel1(c: f64) -> Result<Self> {
        Self::new(RuleKind::Basel1, c)
    }

    pub fn basel2(c: f64, yearly_window: usize) -> Result<Self> {
        Self::new(RuleKind::Basel2 { yearly_window }, c)
    }

    pub fn market_value() -> Self {
        Self {
            kind: RuleKind::MarketValue100,
            c: 1.0,
        }
    }

    pub fn new(kind: RuleKind, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!(
                "capital multiple must be finite and > 0, got {c}"
            )));
        }
        if let RuleKind::Basel2 { yearly_window } = kind {
            if yearly_window < 2 {
                return Err(Error::domain("basel2 yearly window must be at least 2"));
            }
        }
        if kind == RuleKind::MarketValue100 {
            return Ok(Self::market_value());
        }
        Ok(Self { kind, c })
    }

    /// Risk measure per unit of true σ when every window std equals σ;
    /// Basel II counts it twice.
    fn sigma_multiple(&self) -> f64 {
        match self.kind {
            RuleKind::Basel2 { .. } => 2.0,
            RuleKind::Basel1 | RuleKind::MarketValue100 => 1.0,
        }
    }
}

/// Capital required per unit of exposure.
pub fn required_capital(rule: &CapitalRule, history: &[f64]) -> Result<f64> {
    let insufficient = |need: usize| {
        Error::domain(format!(
            "rule needs at least {need} observations, history has {}",
            history.len()
        ))
    };
    match rule.kind {
        RuleKind::Basel1 => {
            if history.len() < 2 {
                return Err(insufficient(2));
            }
            Ok(rule.c * sample_std(history)?)
        }
        RuleKind::Basel2 { yearly_window } => {
            if history.len() < yearly_window {
                return Err(insufficient(yearly_window));
            }
            Ok(rule.c * basel2_risk(history, yearly_window)?)
        }
        RuleKind::MarketValue100 => Ok(1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankAllocation {
    pub rule: CapitalRule,
    pub budget: f64,
    /// Exposure per security; nonzero only at `chosen`.
    pub weights: Vec<f64>,
    pub chosen: usize,
    pub capital_per_unit: Vec<f64>,
}

impl BankAllocation {
    pub fn exposure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn capital_used(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.capital_per_unit)
            .map(|(w, c)| w * c)
            .sum()
    }
}

/// Puts the whole budget into the cheapest security under `rule`.
/// Securities whose required capital is zero are skipped as degenerate.
pub fn allocate<H: AsRef<[f64]>>(rule: &CapitalRule, budget: f64, histories: &[H]) -> Result<BankAllocation> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::domain(format!("budget must be finite and > 0, got {budget}")));
    }
    if histories.is_empty() {
        return Err(Error::domain("need at least one security"));
    }
    let capital_per_unit = histories
        .iter()
        .map(|h| required_capital(rule, h.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let chosen = capital_per_unit
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0)
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("every security requires zero capital".into()))?;
    let mut weights = vec![0.0; histories.len()];
    weights[chosen] = budget / capital_per_unit[chosen];
    Ok(BankAllocation {
        rule: *rule,
        budget,
        weights,
        chosen,
        capital_per_unit,
    })
}

/// True risk taken per unit of capital, relative to a reference where the
/// rule is evaluated at each security's true σ.
///
/// For σ-based rules the reference risk per unit of capital is
/// `1 / (c · k)`, with `k` = 1 (Basel I) or 2 (Basel II); for a single
/// chosen security under Basel I this is `σ / s`. The market-value rule
/// has no σ in it, so its reference scales capital to σ normalized by the
/// cross-sectional mean σ, giving `σ_chosen / mean σ`.
pub fn excess_risk_ratio(allocation: &BankAllocation, true_sigmas: &[f64]) -> Result<f64> {
    if true_sigmas.len() != allocation.weights.len() {
        return Err(Error::domain(format!(
            "{} true sigmas for {} securities",
            true_sigmas.len(),
            allocation.weights.len()
        )));
    }
    if true_sigmas.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::domain("true sigmas must be finite and > 0"));
    }
    let true_risk: f64 = allocation.weights.iter().zip(true_sigmas).map(|(w, s)| w * s).sum();
    let rule = &allocation.rule;
    let reference_risk = match rule.kind {
        RuleKind::MarketValue100 => {
            let mean_sigma = true_sigmas.iter().sum::<f64>() / true_sigmas.len() as f64;
            allocation.budget * mean_sigma
        }
        _ => allocation.budget / (rule.c * rule.sigma_multiple()),
    };
    Ok(true_risk / reference_risk)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub banks: usize,
    /// Most frequently chosen security (lowest index on ties).
    pub modal_security: usize,
    /// Fraction of banks holding `modal_security`.
    pub overlap_fraction: f64,
    /// Sum of squared shares of aggregate exposure across securities.
    pub herfindahl: f64,
}

pub fn concentration_report(allocations: &[BankAllocation]) -> Result<ConcentrationReport> {
    if allocations.len() < 2 {
        return Err(Error::domain("concentration needs at least two banks"));
    }
    let m = allocations[0].weights.len();
    if allocations.iter().any(|a| a.weights.len() != m) {
        return Err(Error::domain("banks must share one security universe"));
    }
    let mut picks = vec![0usize; m];
    let mut exposure = vec![0.0; m];
    for a in allocations {
        picks[a.chosen] += 1;
        for (e, w) in exposure.iter_mut().zip(&a.weights) {
            *e += w;
        }
    }
    let (modal_security, &modal_count) = picks
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("m >= 1");
    let total: f64 = exposure.iter().sum();
    let herfindahl = exposure.iter().map(|e| (e / total).powi(2)).sum();
    Ok(ConcentrationReport {
        banks: allocations.len(),
        modal_security,
        overlap_fraction: modal_count as f64 / allocations.len() as f64,
        herfindahl,
    })
}

/// Whether banks look at one common set of histories or at independent
/// resamples of equally risky securities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryMode {
    Shared,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseConfig {
    pub m: usize,
    pub n: usize,
    pub banks: usize,
    pub budget: f64,
    pub rule: CapitalRule,
    pub seed: u64,
    pub mode: HistoryMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankOutcome {
    pub chosen: usize,
    pub exposure: f64,
    pub excess_risk_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseReport {
    pub config: ResponseConfig,
    pub banks: Vec<BankOutcome>,
    pub mean_excess_risk_ratio: f64,
    pub concentration: ConcentrationReport,
}

/// One round of the bank game with `m` unit-σ normal securities.
pub fn run_response(config: &ResponseConfig) -> Result<ResponseReport> {
    if config.banks < 2 {
        return Err(Error::domain("need at least two banks"));
    }
    let sim = |seed| {
        simulate_returns(&SimConfig::new(
            config.m,
            config.n,
            seed,
            ReturnDistribution::standard_normal(),
        )?)
    };
    let shared = match config.mode {
        HistoryMode::Shared => Some(sim(config.seed)?),
        HistoryMode::Independent => None,
    };
    let sigmas = vec![1.0; config.m];
    let allocate_from = |returns: &ReturnMatrix| {
        let rows: Vec<&[f64]> = returns.rows().collect();
        allocate(&config.rule, config.budget, &rows)
    };
    let allocations = (0..config.banks)
        .into_par_iter()
        .map(|b| match &shared {
            Some(returns) => allocate_from(returns),
            None => allocate_from(&sim(derive_seed(config.seed, b as u64))?),
        })
        .collect::<Result<Vec<_>>>()?;

    let banks = allocations
        .iter()
        .map(|a| {
            Ok(BankOutcome {
                chosen: a.chosen,
                exposure: a.exposure(),
                excess_risk_ratio: excess_risk_ratio(a, &sigmas)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_excess_risk_ratio = banks.iter().map(|b| b.excess_risk_ratio).sum::<f64>() / banks.len() as f64;
    Ok(ResponseReport {
        config: *config,
        banks,
        mean_excess_risk_ratio,
        concentration: concentration_report(&allocations)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: usize,
    pub first_seed: u64,
    pub mean_excess_risk_ratio: f64,
    pub mean_overlap_fraction: f64,
    pub min_overlap_fraction: f64,
    pub max_overlap_fraction: f64,
    pub mean_herfindahl: f64,
}

/// Repeats [`run_response`] for seeds `seed, seed + 1, …`.
pub fn run_response_ensemble(config: &ResponseConfig, runs: usize) -> Result<(Vec<ResponseReport>, EnsembleSummary)> {
    if runs < 1 {
        return Err(Error::domain("need at least one run"));
    }
    let reports = (0..runs as u64)
        .map(|k| {
            run_response(&ResponseConfig {
                seed: config.seed.wrapping_add(k),
                ..*config
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = |f: &dyn Fn(&ResponseReport) -> f64| reports.iter().map(f).sum::<f64>() / runs as f64;
    let overlaps = reports.iter().map(|r| r.concentration.overlap_fraction);
    let summary = EnsembleSummary {
        runs,
        first_seed: config.seed,
        mean_excess_risk_ratio: mean(&|r| r.mean_excess_risk_ratio),
        mean_overlap_fraction: mean(&|r| r.concentration.overlap_fraction),
        min_overlap_fraction: overlaps.clone().fold(f64::INFINITY, f64::min),
        max_overlap_fraction: overlaps.fold(f64::NEG_INFINITY, f64::max),
        mean_herfindahl: mean(&|r| r.concentration.herfindahl),
    };
    Ok((reports, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-point history whose sample std is `s`.
    fn history_with_std(s: f64) -> Vec<f64> {
        vec![-s / 2f64.sqrt(), s / 2f64.sqrt()]
    }

    #[test]
    fn basel1_capital_per_unit() {
        let rule = CapitalRule::basel1(22.0).unwrap();
        let cap = required_capital(&rule, &history_with_std(0.01)).unwrap();
        assert!((cap - 0.22).abs() < 1e-15);
        assert!(required_capital(&rule, &[0.01]).is_err());
    }

    #[test]
    fn market_value_is_one_per_unit() {
        let rule = CapitalRule::market_value();
        assert_eq!(required_capital(&rule, &[]).unwrap(), 1.0);
        assert_eq!(required_capital(&rule, &[0.5, -0.3, 9.0]).unwrap(), 1.0);
    }

    #[test]
    fn basel2_degenerate_history() {
        let rule = CapitalRule::basel2(22.0, 5).unwrap();
        assert_eq!(required_capital(&rule, &[0.01; 10]).unwrap(), 0.0);
        assert!(required_capital(&rule, &[0.01; 4]).is_err());
        assert!(matches!(
            allocate(&rule, 1.0, &[vec![0.01; 10]]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn rule_validation() {
        assert!(CapitalRule::basel1(0.0).is_err());
        assert!(CapitalRule::basel2(3.0, 1).is_err());
        assert_eq!(CapitalRule::new(RuleKind::MarketValue100, 5.0).unwrap().c, 1.0);
    }

    #[test]
    fn argmin_takes_the_whole_budget() {
        let c = 22.0;
        let rule = CapitalRule::basel1(c).unwrap();
        let hs = [history_with_std(0.8), history_with_std(1.0), history_with_std(1.2)];
        let a = allocate(&rule, 5.0, &hs).unwrap();
        assert_eq!(a.chosen, 0);
        assert!((a.weights[0] - 5.0 / (0.8 * c)).abs() < 1e-12);
        assert_eq!(&a.weights[1..], &[0.0, 0.0]);
        assert!(a.capital_used() <= a.budget + 1e-9);
    }

    #[test]
    fn single_security_and_ties() {
        let rule = CapitalRule::basel1(3.0).unwrap();
        assert_eq!(allocate(&rule, 1.0, &[history_with_std(0.5)]).unwrap().chosen, 0);
        let hs = [history_with_std(1.0), history_with_std(0.5), history_with_std(0.5)];
        assert_eq!(allocate(&rule, 1.0, &hs).unwrap().chosen, 1);
        assert!(allocate(&rule, 0.0, &hs).is_err());
    }

    #[test]
    fn zero_capital_securities_are_skipped() {
        let rule = CapitalRule::basel1(3.0).unwrap();
        let hs = [vec![0.1, 0.1], history_with_std(0.7)];
        assert_eq!(allocate(&rule, 1.0, &hs).unwrap().chosen, 1);
    }

    #[test]
    fn excess_ratio_examples() {
        let rule = CapitalRule::basel1(22.0).unwrap();
        let a = allocate(&rule, 1.0, &[history_with_std(0.8)]).unwrap();
        assert!((excess_risk_ratio(&a, &[1.0]).unwrap() - 1.25).abs() < 1e-12);
        let b = allocate(&rule, 1.0, &[history_with_std(1.0)]).unwrap();
        assert!((excess_risk_ratio(&b, &[1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(excess_risk_ratio(&b, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn market_value_rule_ignores_risk() {
        let rule = CapitalRule::market_value();
        let hs = [history_with_std(0.1), history_with_std(0.2)];
        let a = allocate(&rule, 1.0, &hs).unwrap();
        assert_eq!(a.chosen, 0);
        let ratio = excess_risk_ratio(&a, &[2.0, 1.0]).unwrap();
        assert!((ratio - 2.0 / 1.5).abs() < 1e-12);
        assert_ne!(ratio, 1.0);
    }

    #[test]
    fn concentration_examples() {
        let rule = CapitalRule::basel1(1.0).unwrap();
        let hs = [history_with_std(1.0), history_with_std(1.0)];
        let same = allocate(&rule, 1.0, &hs).unwrap();
        let r = concentration_report(&[same.clone(), same.clone(), same.clone()]).unwrap();
        assert_eq!((r.overlap_fraction, r.herfindahl, r.modal_security), (1.0, 1.0, 0));

        let other = allocate(&rule, 1.0, &[history_with_std(2.0), history_with_std(1.0)]).unwrap();
        assert_eq!(other.chosen, 1);
        let r = concentration_report(&[same.clone(), other]).unwrap();
        assert!((r.herfindahl - 0.5).abs() < 1e-15);
        assert_eq!(r.overlap_fraction, 0.5);
        assert!(concentration_report(&[same]).is_err());
    }

    #[test]
    fn shared_histories_fully_overlap() {
        let config = ResponseConfig {
            m: 50,
            n: 20,
            banks: 4,
            budget: 1.0,
            rule: CapitalRule::basel1(22.0).unwrap(),
            seed: 3,
            mode: HistoryMode::Shared,
        };
        let report = run_response(&config).unwrap();
        assert_eq!(report.concentration.overlap_fraction, 1.0);
        assert_eq!(report.concentration.herfindahl, 1.0);
        let independent = run_response(&ResponseConfig {
            mode: HistoryMode::Independent,
            ..config
        })
        .unwrap();
        assert!(independent.concentration.overlap_fraction <= 1.0);
        assert_eq!(run_response(&config).unwrap(), report);
    }
}

use rand::Rng;
use rand_distr::ChiSquared;
use volcap::montecarlo::{simulate_returns, ReturnDistribution, SimConfig};
use volcap::response::{allocate, run_response, run_response_ensemble, CapitalRule, HistoryMode, ResponseConfig};

fn config(mode: HistoryMode, seed: u64) -> ResponseConfig {
    ResponseConfig {
        m: 1000,
        n: 60,
        banks: 10,
        budget: 1.0,
        rule: CapitalRule::basel1(22.0).unwrap(),
        seed,
        mode,
    }
}

#[test]
fn allocation_beats_every_single_security_alternative() {
    let rule = CapitalRule::basel1(22.0).unwrap();
    let sim = simulate_returns(&SimConfig::new(200, 60, 31, ReturnDistribution::standard_normal()).unwrap()).unwrap();
    let rows: Vec<&[f64]> = sim.rows().collect();
    let best = allocate(&rule, 3.0, &rows).unwrap();
    for cap in &best.capital_per_unit {
        assert!(best.exposure() >= 3.0 / cap - 1e-12);
    }
    assert!(best.capital_used() <= best.budget + 1e-9);
}

#[test]
fn mean_excess_ratio_matches_the_minimum_order_statistic() {
    // Oracle: σ / min(s) over 1000 securities, drawing s² straight from χ²₅₉/59.
    let mut rng = volcap::rng::substream(555, 0);
    let chi = ChiSquared::new(59.0).unwrap();
    let trials = 4000;
    let oracle = (0..trials)
        .map(|_| {
            let min = (0..1000)
                .map(|_| (rng.sample(chi) / 59.0f64).sqrt())
                .fold(f64::INFINITY, f64::min);
            1.0 / min
        })
        .sum::<f64>()
        / trials as f64;

    let (_, summary) = run_response_ensemble(&config(HistoryMode::Shared, 1000), 200).unwrap();
    assert!(
        (summary.mean_excess_risk_ratio - oracle).abs() < 0.01,
        "{} vs {oracle}",
        summary.mean_excess_risk_ratio
    );
}

#[test]
fn shared_data_concentrates_more_than_independent_data() {
    for seed in 0..5 {
        let shared = run_response(&config(HistoryMode::Shared, seed)).unwrap();
        let independent = run_response(&config(HistoryMode::Independent, seed)).unwrap();
        assert_eq!(shared.concentration.overlap_fraction, 1.0);
        assert!(independent.concentration.overlap_fraction < 1.0);
        assert!(shared.concentration.herfindahl > independent.concentration.herfindahl);
    }
}

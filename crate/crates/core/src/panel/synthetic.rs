use chrono::{Months, NaiveDate};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Observation, ReturnPanel, WindowSpec};
use crate::error::{Error, Result};
use crate::rng::substream;

/// A generated panel and the as-of dates it was sized for.
#[derive(Debug, Clone)]
pub struct SyntheticPanel {
    pub panel: ReturnPanel,
    pub as_of_range: (NaiveDate, NaiveDate),
}

/// Monthly i.i.d. normal returns with a common std `sigma` for every
/// security, long enough that each of `as_of_dates` consecutive dates has a
/// full past window and a full future window.
pub fn synthetic_panel(
    securities: usize,
    as_of_dates: usize,
    spec: &WindowSpec,
    sigma: f64,
    seed: u64,
) -> Result<SyntheticPanel> {
    if securities < 1 || as_of_dates < 1 {
        return Err(Error::domain(
            "synthetic panel needs at least one security and one as-of date",
        ));
    }
    if !(sigma > 0.0 && sigma < 0.2) {
        return Err(Error::domain(format!(
            "synthetic sigma must lie in (0, 0.2), got {sigma}"
        )));
    }
    let periods = spec.past_len() + as_of_dates - 1 + spec.future_len();
    let start = NaiveDate::from_ymd_opt(2000, 1, 31).expect("valid date");
    let dates: Vec<NaiveDate> = (0..periods)
        .map(|j| start.checked_add_months(Months::new(j as u32)).expect("date in range"))
        .collect();

    let width = securities.to_string().len();
    let mut observations = Vec::with_capacity(securities * periods);
    for i in 0..securities {
        let id = format!("SYN{i:0width$}");
        let mut rng = substream(seed, i as u64);
        for &date in &dates {
            let z: f64 = rng.sample(StandardNormal);
            // Clamp keeps the -1 floor unreachable even for extreme draws.
            let ret = (sigma * z).max(-0.99);
            observations.push(Observation {
                date,
                security_id: id.clone(),
                ret,
            });
        }
    }
    let first = dates[spec.past_len() - 1];
    let last = dates[spec.past_len() + as_of_dates - 2];
    Ok(SyntheticPanel {
        panel: ReturnPanel::from_observations(observations)?,
        as_of_range: (first, last),
    })
}

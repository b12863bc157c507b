//! Dated returns panel: past-versus-future volatility by past-volatility
//! bucket.
//!
//! For every as-of date each security gets a strict, gap-free past window
//! ending at that date and a future window of up to `future_len` consecutive
//! observations after it. Securities are ranked by past std, bucketed into
//! quantile groups, and each group reports the mean of `future_std /
//! past_std`.

mod load;
mod report;
mod synthetic;

pub use load::{load_panel, PanelFormat};
pub use report::{
    past_future_stds, quantile_groups, ratio_report, DateRatios, GroupSummary, QuantileGroups, RatioReport,
    RatioSummary, SecurityWindow, WindowSpec, WindowStds,
};
pub use synthetic::{synthetic_panel, SyntheticPanel};

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub security_id: String,
    /// Simple return in decimal units.
    #[serde(rename = "return")]
    pub ret: f64,
}

/// Validated panel, indexed by the sorted set of distinct dates it contains.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    securities: Vec<String>,
    /// Per security, `(date index, return)` sorted by date index.
    series: Vec<Vec<(usize, f64)>>,
}

impl ReturnPanel {
    /// Builds a panel; order of `observations` is irrelevant.
    pub fn from_observations(observations: Vec<Observation>) -> Result<Self> {
        let mut by_security: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
        for obs in observations {
            validate_return(obs.ret)
                .map_err(|msg| Error::domain(format!("{} on {}: {msg}", obs.security_id, obs.date)))?;
            let dates = by_security.entry(obs.security_id.clone()).or_default();
            if dates.insert(obs.date, obs.ret).is_some() {
                return Err(Error::DuplicateKey {
                    date: obs.date.to_string(),
                    security: obs.security_id,
                });
            }
        }
        let mut dates: Vec<NaiveDate> = by_security.values().flat_map(|d| d.keys().copied()).collect();
        dates.sort_unstable();
        dates.dedup();
        let position = |d: &NaiveDate| dates.binary_search(d).expect("date collected above");
        let series = by_security
            .values()
            .map(|d| d.iter().map(|(date, &r)| (position(date), r)).collect())
            .collect();
        Ok(Self {
            securities: by_security.into_keys().collect(),
            dates,
            series,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn securities(&self) -> &[String] {
        &self.securities
    }

    pub fn len(&self) -> usize {
        self.series.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        self.securities.iter().zip(&self.series).flat_map(move |(id, s)| {
            s.iter().map(move |&(d, ret)| Observation {
                date: self.dates[d],
                security_id: id.clone(),
                ret,
            })
        })
    }

    pub(crate) fn series(&self) -> &[Vec<(usize, f64)>] {
        &self.series
    }
}

fn validate_return(ret: f64) -> std::result::Result<(), &'static str> {
    if !ret.is_finite() {
        return Err("non-finite return");
    }
    if ret <= -1.0 {
        return Err("return must exceed -1");
    }
    Ok(())
}

/// Parses `YYYY-MM-DD`, or `YYYY-MM` as the first of that month.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let text = text.trim();
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .ok()
        .or_else(|| NaiveDate::parse_from_str(&format!("{text}-01"), "%Y-%m-%d").ok())
}

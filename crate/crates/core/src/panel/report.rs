use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ReturnPanel;
use crate::error::{Error, Result};
use crate::montecarlo::sample_std;

/// Past and future window lengths, in panel periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    past_len: usize,
    future_len: usize,
    min_future: usize,
}

impl WindowSpec {
    pub fn new(past_len: usize, future_len: usize, min_future: usize) -> Result<Self> {
        if past_len < 2 {
            return Err(Error::domain(format!(
                "past window needs at least 2 periods, got {past_len}"
            )));
        }
        if min_future < 2 || future_len < min_future {
            return Err(Error::domain(format!(
                "need future_len >= min_future >= 2, got future_len={future_len}, min_future={min_future}"
            )));
        }
        Ok(Self {
            past_len,
            future_len,
            min_future,
        })
    }

    pub fn past_len(&self) -> usize {
        self.past_len
    }

    pub fn future_len(&self) -> usize {
        self.future_len
    }

    pub fn min_future(&self) -> usize {
        self.min_future
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            past_len: 60,
            future_len: 60,
            min_future: 2,
        }
    }
}

/// Probability breakpoints splitting the past-std ranking into groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileGroups {
    breakpoints: Vec<f64>,
}

impl QuantileGroups {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::domain("quantile breakpoints must lie in (0, 1)"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("quantile breakpoints must be strictly increasing"));
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Probability interval `[lower, upper)` covered by group `g`.
    pub fn bounds(&self, g: usize) -> (f64, f64) {
        let lower = if g == 0 { 0.0 } else { self.breakpoints[g - 1] };
        let upper = self.breakpoints.get(g).copied().unwrap_or(1.0);
        (lower, upper)
    }

    fn group_of(&self, u: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= u)
    }
}

impl Default for QuantileGroups {
    fn default() -> Self {
        Self {
            breakpoints: vec![0.01, 0.10, 0.90, 0.99],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityWindow {
    pub security_id: String,
    pub past_std: f64,
    pub future_std: f64,
    /// Observations that went into `future_std`.
    pub future_count: usize,
}

/// Window statistics for one as-of date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStds {
    pub as_of: NaiveDate,
    /// Securities with both windows defined, in security-id order.
    pub rows: Vec<SecurityWindow>,
    /// Securities with an observation on `as_of`.
    pub present: usize,
    /// Present securities lacking a full past window or enough future data.
    pub excluded: usize,
}

/// Past and future sample stds of every security present on `as_of`.
///
/// The past window is the `past_len` panel periods ending at and including
/// `as_of`, all of which must be observed. The future window is the run of
/// consecutive observations right after `as_of`, capped at `future_len` and
/// required to reach `min_future`.
pub fn past_future_stds(panel: &ReturnPanel, spec: &WindowSpec, as_of: NaiveDate) -> WindowStds {
    let Ok(t) = panel.dates().binary_search(&as_of) else {
        return WindowStds {
            as_of,
            rows: Vec::new(),
            present: 0,
            excluded: 0,
        };
    };
    let mut rows = Vec::new();
    let mut present = 0;
    let mut past = Vec::with_capacity(spec.past_len);
    let mut future = Vec::with_capacity(spec.future_len);
    for (id, series) in panel.securities().iter().zip(panel.series()) {
        let Ok(pos) = series.binary_search_by_key(&t, |&(d, _)| d) else {
            continue;
        };
        present += 1;
        if pos + 1 < spec.past_len || t + 1 < spec.past_len {
            continue;
        }
        let start = pos + 1 - spec.past_len;
        if series[start].0 != t + 1 - spec.past_len {
            continue;
        }
        past.clear();
        past.extend(series[start..=pos].iter().map(|&(_, r)| r));

        future.clear();
        future.extend(
            series[pos + 1..]
                .iter()
                .enumerate()
                .take(spec.future_len)
                .take_while(|&(j, &(d, _))| d == t + 1 + j)
                .map(|(_, &(_, r))| r),
        );
        if future.len() < spec.min_future {
            continue;
        }
        rows.push(SecurityWindow {
            security_id: id.clone(),
            past_std: sample_std(&past).expect("past_len >= 2"),
            future_std: sample_std(&future).expect("min_future >= 2"),
            future_count: future.len(),
        });
    }
    let excluded = present - rows.len();
    WindowStds {
        as_of,
        rows,
        present,
        excluded,
    }
}

/// Group label for each entry, aligned with the input order.
///
/// Entries are ranked ascending by value (ties by id); rank `r` of `N`
/// lands in the group whose interval contains `(r − 0.5) / N`.
pub fn quantile_groups(past_stds: &[(&str, f64)], groups: &QuantileGroups) -> Vec<usize> {
    let n = past_stds.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        past_stds[a]
            .1
            .total_cmp(&past_stds[b].1)
            .then_with(|| past_stds[a].0.cmp(past_stds[b].0))
    });
    let mut labels = vec![0; n];
    for (rank0, &i) in order.iter().enumerate() {
        let u = (rank0 as f64 + 0.5) / n as f64;
        labels[i] = groups.group_of(u);
    }
    labels
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DateRatios {
    pub date: NaiveDate,
    /// Mean `future_std / past_std` per group; `None` for an empty group.
    pub mean_ratio: Vec<Option<f64>>,
    pub counts: Vec<usize>,
    pub present: usize,
    /// Securities that entered the ranking.
    pub eligible: usize,
    /// Present securities left out, including those with zero past std.
    pub excluded: usize,
    pub zero_past: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub groups: QuantileGroups,
    pub window: WindowSpec,
    pub dates: Vec<DateRatios>,
    /// Per group, the unweighted mean over dates of the per-date means.
    pub overall: Vec<Option<f64>>,
}

/// Runs the window/bucket/ratio pipeline over every panel date inside the
/// inclusive `date_range` (all dates when `None`). Dates with no eligible
/// security are skipped.
pub fn ratio_report(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    groups: &QuantileGroups,
    date_range: Option<(NaiveDate, NaiveDate)>,
) -> RatioReport {
    let in_range = |d: &NaiveDate| date_range.is_none_or(|(lo, hi)| lo <= *d && *d <= hi);
    let as_of_dates: Vec<NaiveDate> = panel.dates().iter().copied().filter(in_range).collect();

    let dates: Vec<DateRatios> = as_of_dates
        .par_iter()
        .filter_map(|&d| date_ratios(panel, spec, groups, d))
        .collect();

    let overall = (0..groups.len())
        .map(|g| {
            let means: Vec<f64> = dates.iter().filter_map(|d| d.mean_ratio[g]).collect();
            (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64)
        })
        .collect();

    RatioReport {
        groups: groups.clone(),
        window: *spec,
        dates,
        overall,
    }
}

fn date_ratios(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    groups: &QuantileGroups,
    as_of: NaiveDate,
) -> Option<DateRatios> {
    let stds = past_future_stds(panel, spec, as_of);
    let usable: Vec<&SecurityWindow> = stds.rows.iter().filter(|r| r.past_std > 0.0).collect();
    let zero_past = stds.rows.len() - usable.len();
    if usable.is_empty() {
        return None;
    }
    let keyed: Vec<(&str, f64)> = usable.iter().map(|r| (r.security_id.as_str(), r.past_std)).collect();
    let labels = quantile_groups(&keyed, groups);

    let mut sums = vec![0.0; groups.len()];
    let mut counts = vec![0usize; groups.len()];
    for (row, &g) in usable.iter().zip(&labels) {
        sums[g] += row.future_std / row.past_std;
        counts[g] += 1;
    }
    let mean_ratio = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    Some(DateRatios {
        date: as_of,
        mean_ratio,
        counts,
        present: stds.present,
        eligible: usable.len(),
        excluded: stds.excluded + zero_past,
        zero_past,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub lower: f64,
    pub upper: f64,
    pub overall_mean_ratio: Option<f64>,
    /// Dates on which the group had at least one member.
    pub dates_populated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub window: WindowSpec,
    pub as_of_dates: usize,
    pub groups: Vec<GroupSummary>,
}

impl RatioReport {
    pub fn summary(&self) -> RatioSummary {
        let groups = (0..self.groups.len())
            .map(|g| {
                let (lower, upper) = self.groups.bounds(g);
                GroupSummary {
                    group: g,
                    lower,
                    upper,
                    overall_mean_ratio: self.overall[g],
                    dates_populated: self.dates.iter().filter(|d| d.counts[g] > 0).count(),
                }
            })
            .collect();
        RatioSummary {
            window: self.window,
            as_of_dates: self.dates.len(),
            groups,
        }
    }

    /// Long CSV `date,group,mean_ratio,count`; an empty group leaves
    /// `mean_ratio` blank.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["date", "group", "mean_ratio", "count"]).map_err(io)?;
        for d in &self.dates {
            for (g, (mean, count)) in d.mean_ratio.iter().zip(&d.counts).enumerate() {
                let mean = mean.map(|m| m.to_string()).unwrap_or_default();
                w.write_record([d.date.to_string(), g.to_string(), mean, count.to_string()])
                    .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

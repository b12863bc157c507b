use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of values over contiguous bins `[edge[i], edge[i+1])`; the last
/// bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Bins of width `width` aligned to integer multiples of `width`,
    /// spanning every value.
    pub fn with_bin_width(values: &[f64], width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::domain(format!("bin width must be finite and > 0, got {width}")));
        }
        if values.is_empty() {
            return Err(Error::domain("cannot bin an empty sample"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("histogram values must be finite"));
        }
        let cell = |v: f64| (v / width).floor() as i64;
        let first = values.iter().copied().map(cell).min().unwrap();
        let last = values.iter().copied().map(cell).max().unwrap();
        let bins = (last - first + 1) as usize;
        let bin_edges = (0..=bins).map(|i| (first + i as i64) as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            counts[(cell(v) - first) as usize] += 1;
        }
        Ok(Self {
            bin_edges,
            counts,
            total: values.len() as u64,
        })
    }

    /// Bins over caller-supplied edges; every value must fall inside them.
    pub fn with_edges(values: &[f64], edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain(
                "histogram edges must be strictly increasing with at least two entries",
            ));
        }
        let lo = edges[0];
        let hi = *edges.last().unwrap();
        let mut counts = vec![0u64; edges.len() - 1];
        for &v in values {
            if !(v >= lo && v <= hi) {
                return Err(Error::domain(format!("value {v} outside histogram range [{lo}, {hi}]")));
            }
            // First edge strictly greater than v, minus one.
            let idx = edges
                .partition_point(|&e| e <= v)
                .saturating_sub(1)
                .min(counts.len() - 1);
            counts[idx] += 1;
        }
        Ok(Self {
            bin_edges: edges,
            counts,
            total: values.len() as u64,
        })
    }

    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.bin_edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| (w[0], w[1], c))
    }

    /// CSV with header `bin_lower,bin_upper,count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["bin_lower", "bin_upper", "count"]).map_err(io)?;
        for (lo, hi, c) in self.bins() {
            w.write_record([lo.to_string(), hi.to_string(), c.to_string()])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

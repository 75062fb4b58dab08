use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::agents::{MetricComponents, UtilityWeights};
use crate::error::{Error, Result};

use super::world::SlotRecord;

/// Per-slot running averages of one repetition, plus the raw counts they
/// are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub seed: u64,
    /// Cumulative deliveries divided by slots elapsed.
    pub throughput: Vec<f64>,
    /// Mean per-slot jammed-red proportion over the active slots so far.
    pub jammed_frac: Vec<f64>,
    /// Failed eavesdropping attempts over attempts, cumulative.
    pub failed_eaves_frac: Vec<f64>,
    /// Time-averaged network utility up to each slot.
    pub utility: Vec<f64>,
    pub records: Vec<SlotRecord>,
}

impl MetricsSeries {
    pub fn from_records(seed: u64, records: Vec<SlotRecord>, w: &UtilityWeights) -> Self {
        let n = records.len();
        let mut throughput = Vec::with_capacity(n);
        let mut jammed_frac = Vec::with_capacity(n);
        let mut failed_eaves_frac = Vec::with_capacity(n);
        let mut utility = Vec::with_capacity(n);
        let (mut delivered, mut jam_sum, mut jam_slots, mut attempts, mut failed, mut util_sum) =
            (0.0, 0.0, 0u64, 0u64, 0u64, 0.0);
        for (t, r) in records.iter().enumerate() {
            delivered += r.components.delivered;
            if r.red_active > 0 {
                jam_sum += r.components.jammed_red_frac;
                jam_slots += 1;
            }
            attempts += r.eaves_attempts as u64;
            failed += r.eaves_failed as u64;
            util_sum += r.components.weighted(w);
            let elapsed = (t + 1) as f64;
            throughput.push(delivered / elapsed);
            jammed_frac.push(if jam_slots > 0 { jam_sum / jam_slots as f64 } else { 0.0 });
            failed_eaves_frac.push(if attempts > 0 { failed as f64 / attempts as f64 } else { 0.0 });
            utility.push(util_sum / elapsed);
        }
        Self {
            seed,
            throughput,
            jammed_frac,
            failed_eaves_frac,
            utility,
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.throughput.len()
    }

    pub fn is_empty(&self) -> bool {
        self.throughput.is_empty()
    }

    pub fn metric(&self, m: Metric) -> &[f64] {
        match m {
            Metric::Throughput => &self.throughput,
            Metric::JammedFrac => &self.jammed_frac,
            Metric::FailedEavesFrac => &self.failed_eaves_frac,
            Metric::Utility => &self.utility,
        }
    }

    pub fn components(&self) -> Vec<MetricComponents> {
        self.records.iter().map(|r| r.components).collect()
    }

    /// Deliveries per slot over `[from, to)`.
    pub fn window_rate(&self, from: usize, to: usize) -> f64 {
        let to = to.min(self.records.len());
        if from >= to {
            return 0.0;
        }
        self.records[from..to].iter().map(|r| r.components.delivered).sum::<f64>() / (to - from) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Throughput,
    JammedFrac,
    FailedEavesFrac,
    Utility,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Throughput, Metric::JammedFrac, Metric::FailedEavesFrac, Metric::Utility];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Throughput => "throughput",
            Metric::JammedFrac => "jammed_frac",
            Metric::FailedEavesFrac => "failed_eaves_frac",
            Metric::Utility => "utility",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub level: f64,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConfidenceBand {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn half_width(&self, t: usize) -> f64 {
        (self.upper[t] - self.lower[t]) / 2.0
    }
}

/// Two-sided Student-t quantile `t_{(1 + level) / 2, dof}`.
pub fn t_quantile(level: f64, dof: usize) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, dof as f64)
        .map_err(|e| Error::InsufficientData(format!("t distribution with {dof} dof: {e}")))?;
    Ok(dist.inverse_cdf(0.5 + level / 2.0))
}

/// Per-slot `mean +- t * stderr` across series of equal length.
pub fn confidence_band(series: &[&[f64]], level: f64) -> Result<ConfidenceBand> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("confidence band needs at least 2 series, got {n}")));
    }
    let len = series[0].len();
    if let Some(bad) = series.iter().find(|s| s.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: bad.len(),
        });
    }
    let t = t_quantile(level, n - 1)?;
    let mut band = ConfidenceBand {
        level,
        mean: Vec::with_capacity(len),
        lower: Vec::with_capacity(len),
        upper: Vec::with_capacity(len),
    };
    for k in 0..len {
        let mean = series.iter().map(|s| s[k]).sum::<f64>() / n as f64;
        let var = series.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let half = t * (var / n as f64).sqrt();
        band.mean.push(mean);
        band.lower.push(mean - half);
        band.upper.push(mean + half);
    }
    Ok(band)
}

/// Band of one metric over a set of repetitions.
pub fn metric_band(runs: &[MetricsSeries], metric: Metric, level: f64) -> Result<ConfidenceBand> {
    let views: Vec<&[f64]> = runs.iter().map(|r| r.metric(metric)).collect();
    confidence_band(&views, level)
}

/// Least-squares slope of `y` against its index.
pub fn slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    if y.len() < 2 {
        return 0.0;
    }
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

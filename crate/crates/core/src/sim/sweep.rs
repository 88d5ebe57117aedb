//! Weight-ratio sweeps over many seeds.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::config::{PlannerKind, SimConfig};
use super::run::{run_eer_sim_with_phases, run_observability_sim, time_averaged_trace};
use crate::error::{Error, Result};
use crate::map::GridMap;

/// Ratios above this are accepted but flagged as outside the useful range.
pub const RATIO_FLAG_ABOVE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMetric {
    /// Mean over steps of the position-covariance trace (m²), particle-filter runs.
    TimeAveragedTrace,
    /// Entropy removed by measurement updates over a run (nats), belief-grid runs.
    TotalEntropyReduction,
}

impl SweepMetric {
    pub fn for_planner(kind: PlannerKind) -> Self {
        match kind {
            PlannerKind::Eer => SweepMetric::TotalEntropyReduction,
            PlannerKind::Observability | PlannerKind::Straight => SweepMetric::TimeAveragedTrace,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepMetric::TimeAveragedTrace => "time_avg_trace_pos",
            SweepMetric::TotalEntropyReduction => "total_entropy_reduction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub ratio: f64,
    pub seed: u64,
    /// Metric value, or the error message of a failed run.
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: f64,
    pub mean: f64,
    /// Sample standard deviation; zero with fewer than two successful runs.
    pub std: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub metric: SweepMetric,
    pub rows: Vec<SweepRow>,
    pub cells: Vec<SweepCell>,
}

/// Runs one simulation and reduces it to the sweep metric.
pub fn run_metric(map: &GridMap, cfg: &SimConfig) -> Result<f64> {
    match SweepMetric::for_planner(cfg.planner) {
        SweepMetric::TimeAveragedTrace => {
            Ok(time_averaged_trace(&run_observability_sim(map, cfg)?))
        }
        SweepMetric::TotalEntropyReduction => {
            Ok(run_eer_sim_with_phases(map, cfg)?.total_entropy_reduction())
        }
    }
}

/// Runs every (ratio, seed) cell with `w_obs = ratio * w_goal`.
///
/// Every ratio sees the same seeds, so columns are paired. Cells run in
/// parallel; results do not depend on scheduling. Failed runs are recorded
/// and left out of the statistics.
pub fn sweep_ratios(
    base: &SimConfig,
    map: &GridMap,
    ratios: &[f64],
    seeds: &[u64],
) -> Result<SweepSummary> {
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("ratio list is empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("seed list is empty".into()));
    }
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "ratios must be finite and non-negative, got {r}"
        )));
    }
    let jobs: Vec<(f64, u64)> = ratios
        .iter()
        .flat_map(|&r| seeds.iter().map(move |&s| (r, s)))
        .collect();
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(ratio, seed)| {
            let mut cfg = base.with_ratio(ratio);
            cfg.seed = seed;
            SweepCell {
                ratio,
                seed,
                outcome: run_metric(map, &cfg).map_err(|e| e.to_string()),
            }
        })
        .collect();

    let rows = ratios
        .iter()
        .enumerate()
        .map(|(i, &ratio)| {
            let chunk = &cells[i * seeds.len()..(i + 1) * seeds.len()];
            let ok: Vec<f64> = chunk
                .iter()
                .filter_map(|c| c.outcome.as_ref().ok().copied())
                .collect();
            let n = ok.len();
            let mean = if n == 0 {
                f64::NAN
            } else {
                ok.iter().sum::<f64>() / n as f64
            };
            let std = if n < 2 {
                0.0
            } else {
                (ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            SweepRow {
                ratio,
                mean,
                std,
                n_ok: n,
                n_failed: chunk.len() - n,
                flagged: ratio > RATIO_FLAG_ABOVE,
            }
        })
        .collect();
    Ok(SweepSummary {
        metric: SweepMetric::for_planner(base.planner),
        rows,
        cells,
    })
}

impl SweepSummary {
    /// CSV with columns `ratio,metric,mean,std,n_ok,n_failed,flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let err = |e: csv::Error| Error::Trace(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ratio", "metric", "mean", "std", "n_ok", "n_failed", "flag"])
            .map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.ratio.to_string(),
                self.metric.name().to_string(),
                r.mean.to_string(),
                r.std.to_string(),
                r.n_ok.to_string(),
                r.n_failed.to_string(),
                if r.flagged {
                    "ratio_above_2".to_string()
                } else {
                    String::new()
                },
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Trace(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

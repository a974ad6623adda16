//! The three canonical scenarios: double slit, Stern-Gerlach pair and the particle in a box.

mod box_experiment;
mod double_slit;
mod stern_gerlach;

pub use box_experiment::{momentum_cdf, run_box_experiment, BoxExperimentConfig};
pub use double_slit::{run_double_slit, DoubleSlitConfig, Slits, FRINGE_FRACTION};
pub use stern_gerlach::{
    contextuality_witness, run_stern_gerlach, ContextualityReport, Starts, SternGerlachConfig,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::guidance::io::trajectory_csv;
use crate::guidance::{MemberStatus, Trajectory};
use crate::numerics::Point;

/// Default cap on trajectory files written for plotting.
pub const MAX_EMITTED_TRAJECTORIES: usize = 200;

/// One assertable claim and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Per-member results plus summary statistics of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub experiment: String,
    pub seed: u64,
    pub dims: usize,
    pub config: serde_json::Value,
    pub initial: Vec<Point>,
    pub final_positions: Vec<Point>,
    /// Slit of origin, spin outcome, ... one per member.
    pub labels: Vec<String>,
    /// Optional scalar per member (the measured velocity in the box run).
    pub values: Option<Vec<f64>>,
    pub status: Vec<MemberStatus>,
    /// Full trajectories for the first members, capped for plotting.
    pub trajectories: Vec<Trajectory>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    experiment: &'a str,
    seed: u64,
    members: usize,
    config: &'a serde_json::Value,
    summary: &'a BTreeMap<String, f64>,
    checks: &'a [Check],
    pass: bool,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }

    /// Columns `id, x0[, y0], x_t[, y_t], label[, value], flag`.
    pub fn outcome_csv(&self) -> String {
        let two = self.dims == 2;
        let mut out = String::from(if two {
            "id,x0,y0,x_t,y_t,label"
        } else {
            "id,x0,x_t,label"
        });
        if self.values.is_some() {
            out.push_str(",value");
        }
        out.push_str(",flag\n");
        for i in 0..self.len() {
            let (a, b) = (self.initial[i], self.final_positions[i]);
            let _ = write!(out, "{i},{:e}", a[0]);
            if two {
                let _ = write!(out, ",{:e}", a[1]);
            }
            let _ = write!(out, ",{:e}", b[0]);
            if two {
                let _ = write!(out, ",{:e}", b[1]);
            }
            let _ = write!(out, ",{}", self.labels[i]);
            if let Some(v) = &self.values {
                let _ = write!(out, ",{:e}", v[i]);
            }
            let _ = writeln!(out, ",{}", self.status[i].as_str());
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SummaryFile {
            experiment: &self.experiment,
            seed: self.seed,
            members: self.len(),
            config: &self.config,
            summary: &self.summary,
            checks: &self.checks,
            pass: self.passed(),
        })?)
    }

    /// Writes `<name>_outcome.csv`, `<name>_summary.json` and up to `max_trajectories`
    /// files `trajectories/<name>_NNNN.csv`.
    pub fn write(&self, dir: &Path, max_trajectories: usize) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let name = &self.experiment;
        std::fs::write(dir.join(format!("{name}_outcome.csv")), self.outcome_csv())?;
        std::fs::write(
            dir.join(format!("{name}_summary.json")),
            self.summary_json()?,
        )?;
        let keep = max_trajectories.min(MAX_EMITTED_TRAJECTORIES);
        if keep > 0 && !self.trajectories.is_empty() {
            let tdir = dir.join("trajectories");
            std::fs::create_dir_all(&tdir)?;
            for (i, t) in self.trajectories.iter().take(keep).enumerate() {
                std::fs::write(
                    tdir.join(format!("{name}_{i:04}.csv")),
                    trajectory_csv(t, self.dims),
                )?;
            }
        }
        Ok(())
    }
}

/// Moving average with a triangular kernel of half-width `radius` bins.
pub fn smooth(values: &[f64], radius: usize) -> Vec<f64> {
    let n = values.len() as isize;
    let r = radius as isize;
    (0..n)
        .map(|i| {
            let (mut s, mut w) = (0.0, 0.0);
            for d in -r..=r {
                let j = i + d;
                if (0..n).contains(&j) {
                    let k = (r + 1 - d.abs()) as f64;
                    s += k * values[j as usize];
                    w += k;
                }
            }
            s / w
        })
        .collect()
}

/// Counts local maxima whose height and topographic prominence both reach
/// `fraction` of the global peak.
pub fn count_maxima(values: &[f64], fraction: f64) -> usize {
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return 0;
    }
    let floor = fraction * peak;
    let n = values.len();
    let mut count = 0;
    let mut i = 0;
    while i < n {
        // collapse plateaus to a single candidate
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let h = values[i];
        let left_ok = i == 0 || values[i - 1] < h;
        let right_ok = j + 1 == n || values[j + 1] < h;
        if left_ok && right_ok && h >= floor {
            let base = |range: &mut dyn Iterator<Item = usize>| {
                let mut lowest = h;
                for k in range {
                    if values[k] > h {
                        return lowest;
                    }
                    lowest = lowest.min(values[k]);
                }
                // no higher ground on this side: the edge counts as a drop to zero
                0.0
            };
            let left = base(&mut (0..i).rev());
            let right = base(&mut (j + 1..n));
            if h - left.max(right) >= floor {
                count += 1;
            }
        }
        i = j + 1;
    }
    count
}

/// Histogram counts of `samples` on `bins` equal cells over `[lo, hi)`; samples outside are dropped.
pub fn bin_counts(samples: impl Iterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    let w = (hi - lo) / bins as f64;
    for x in samples {
        if x >= lo && x < hi {
            counts[(((x - lo) / w) as usize).min(bins - 1)] += 1.0;
        }
    }
    counts
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxima_respect_prominence() {
        assert_eq!(count_maxima(&[0.0, 1.0, 0.0], 0.05), 1);
        assert_eq!(count_maxima(&[0.0, 1.0, 0.5, 0.8, 0.0], 0.05), 2);
        // a 2% ripple on a shoulder is not a fringe
        assert_eq!(count_maxima(&[0.0, 1.0, 0.5, 0.51, 0.5, 0.0], 0.05), 1);
        // below 5% of the peak
        assert_eq!(count_maxima(&[0.0, 1.0, 0.0, 0.04, 0.0], 0.05), 1);
        assert_eq!(count_maxima(&[0.0, 1.0, 1.0, 0.0], 0.05), 1);
        assert_eq!(count_maxima(&[0.0; 4], 0.05), 0);
    }

    #[test]
    fn smoothing_preserves_constants() {
        assert!(smooth(&[2.0; 7], 2).iter().all(|v| (v - 2.0).abs() < 1e-15));
    }
}

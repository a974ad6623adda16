//! Distribution comparisons: grid CDFs, the one-sample KS distance and fixed-bin histograms.

use serde::{Deserialize, Serialize};

/// Bins used for every report histogram.
pub const HISTOGRAM_BINS: usize = 200;

/// One-sided 1% critical coefficient of the KS statistic (`D_crit ~ 1.63 / sqrt(n)`).
pub const KS_CRITICAL_1PCT: f64 = 1.63;

/// Piecewise-linear CDF from cumulative trapezoid integration of a density
/// tabulated on increasing abscissae.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(xs: Vec<f64>, density: &[f64]) -> Self {
        assert_eq!(xs.len(), density.len());
        let mut cdf = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..xs.len() {
            acc += 0.5 * (density[i] + density[i - 1]) * (xs[i] - xs[i - 1]);
            cdf.push(acc);
        }
        let total = acc.max(f64::MIN_POSITIVE);
        for c in &mut cdf {
            *c /= total;
        }
        Self { xs, cdf }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return 1.0;
        }
        let hi = self.xs.partition_point(|&v| v <= x);
        let lo = hi - 1;
        let w = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.cdf[lo] + w * (self.cdf[hi] - self.cdf[lo])
    }

    /// Smallest tabulated abscissa with CDF >= q.
    pub fn quantile(&self, q: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < q).min(self.xs.len() - 1);
        self.xs[i]
    }
}

/// Kolmogorov-Smirnov distance between the empirical distribution of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Pass threshold for an `n`-sample KS comparison with an absolute floor.
pub fn ks_threshold(n: usize, floor: f64) -> f64 {
    (KS_CRITICAL_1PCT / (n as f64).sqrt()).max(floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Mean target density per bin.
    pub target_density: Vec<f64>,
}

impl Histogram {
    /// `HISTOGRAM_BINS` equal bins on `[lo, hi]`; samples outside are dropped.
    pub fn build(samples: &[f64], lo: f64, hi: f64, cdf: &TabulatedCdf) -> Self {
        let bins = HISTOGRAM_BINS;
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &x in samples {
            if x >= lo && x < hi {
                counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
            }
        }
        let target_density = edges
            .windows(2)
            .map(|e| (cdf.eval(e[1]) - cdf.eval(e[0])) / width)
            .collect();
        Self {
            edges,
            counts,
            target_density,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("left,right,count,target_density\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!(
                "{:e},{:e},{},{:e}\n",
                self.edges[i],
                self.edges[i + 1],
                c,
                self.target_density[i]
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_perfect_uniform_grid() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn tabulated_cdf_of_uniform_density() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let cdf = TabulatedCdf::new(xs, &[1.0; 11]);
        assert!((cdf.eval(2.5) - 0.25).abs() < 1e-12);
        assert_eq!(cdf.eval(-1.0), 0.0);
        assert_eq!(cdf.eval(11.0), 1.0);
        assert_eq!(cdf.quantile(0.5), 5.0);
    }
}

use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;

use crate::error::{Error, Result};
use crate::numerics::{Grid, Point, WaveFunction};
use crate::rng::{rng_for, stream};

/// Draws positions from the grid-discretized `|psi|^2`.
///
/// A node is chosen with probability proportional to its density (inverse
/// CDF on 1D grids, an alias table on 2D grids), then the point is jittered
/// uniformly inside the cell centred on that node.
#[derive(Debug)]
pub struct BornSampler {
    grid: Grid,
    seed: u64,
    method: Method,
}

#[derive(Debug)]
enum Method {
    InverseCdf(Vec<f64>),
    Alias(WeightedAliasIndex<f64>),
}

impl BornSampler {
    pub fn new(psi: &WaveFunction, seed: u64) -> Result<Self> {
        let rho = psi.density();
        let total: f64 = rho.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroDensity);
        }
        let method = if psi.grid().dims() == 1 {
            let mut acc = 0.0;
            let cdf = rho
                .iter()
                .map(|r| {
                    acc += r / total;
                    acc
                })
                .collect();
            Method::InverseCdf(cdf)
        } else {
            Method::Alias(WeightedAliasIndex::new(rho).map_err(|_| Error::ZeroDensity)?)
        };
        Ok(Self {
            grid: psi.grid().clone(),
            seed,
            method,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The first `n` draws of this sampler's stream.
    pub fn sample(&self, n: usize) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be >= 1".into()));
        }
        let mut rng = rng_for(self.seed, stream::SAMPLING);
        let dims = self.grid.dims();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let node = match &self.method {
                Method::InverseCdf(cdf) => {
                    let u: f64 = rng.random();
                    cdf.partition_point(|&c| c < u).min(cdf.len() - 1)
                }
                Method::Alias(alias) => alias.sample(&mut rng),
            };
            let centre = self.grid.node(node);
            let mut p = [0.0; 2];
            for a in 0..dims {
                let axis = self.grid.axis(a);
                let jitter: f64 = rng.random::<f64>() - 0.5;
                let mut x = centre[a] + jitter * axis.spacing();
                // periodic wrap of the half cells at the grid ends
                if x < axis.lo {
                    x += axis.length();
                } else if x >= axis.hi {
                    x -= axis.length();
                }
                p[a] = x;
            }
            out.push(p);
        }
        Ok(out)
    }
}

/// `n` i.i.d. draws from `|psi|^2`, reproducible from `seed`.
pub fn sample_born(psi: &WaveFunction, n: usize, seed: u64) -> Result<Vec<Point>> {
    BornSampler::new(psi, seed)?.sample(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Initializer;

    #[test]
    fn same_seed_same_point() {
        let g = Grid::new_1d(-10.0, 10.0, 256).unwrap();
        let psi = WaveFunction::new(g, &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(
            sample_born(&psi, 1, 42).unwrap(),
            sample_born(&psi, 1, 42).unwrap()
        );
        assert_ne!(
            sample_born(&psi, 1, 42).unwrap(),
            sample_born(&psi, 1, 43).unwrap()
        );
        assert!(sample_born(&psi, 0, 1).is_err());
    }

    #[test]
    fn two_dimensional_samples_stay_inside() {
        let g = Grid::new_2d((-8.0, 8.0, 32), (-8.0, 8.0, 32)).unwrap();
        let psi = WaveFunction::new(
            g.clone(),
            &Initializer::Gaussian {
                center: [1.0, -1.0],
                width: 1.0,
                momentum: [0.0, 0.0],
            },
        )
        .unwrap();
        let pts = sample_born(&psi, 5000, 3).unwrap();
        assert!(pts.iter().all(|p| g.contains(*p)));
        let my = pts.iter().map(|p| p[1]).sum::<f64>() / 5000.0;
        assert!((my + 1.0).abs() < 0.1);
    }
}

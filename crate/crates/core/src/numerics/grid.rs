use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest number of nodes accepted per axis.
pub const MIN_POINTS: usize = 8;

/// A point in the 1D or 2D configuration space. The second coordinate is
/// ignored (and kept at zero) on 1D grids.
pub type Point = [f64; 2];

/// One periodic axis: nodes at `lo + i * dx` for `i in 0..points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidGrid(format!(
                "axis extent [{lo}, {hi}] must satisfy hi > lo"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "axis needs at least {MIN_POINTS} points, got {points}"
            )));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.points as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// Largest resolvable wavenumber, `pi / dx`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points;
        let dk = 2.0 * PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j <= n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                m * dk
            })
            .collect()
    }

    /// Membership in the periodic cell `[lo, hi)`.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }
}

/// Uniform 1D or 2D grid. Node `(ix, iy)` is stored at flat index `iy * nx + ix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new_1d(lo: f64, hi: f64, points: usize) -> Result<Self> {
        Ok(Self {
            axes: vec![Axis::new(lo, hi, points)?],
        })
    }

    pub fn new_2d(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        Ok(Self {
            axes: vec![Axis::new(x.0, x.1, x.2)?, Axis::new(y.0, y.1, y.2)?],
        })
    }

    pub fn from_axes(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "grids have 1 or 2 axes, got {}",
                axes.len()
            )));
        }
        let axes = axes
            .into_iter()
            .map(|a| Axis::new(a.lo, a.hi, a.points))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes })
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `dx` (1D) or `dx * dy` (2D).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn nx(&self) -> usize {
        self.axes[0].points
    }

    pub fn ny(&self) -> usize {
        self.axes.get(1).map_or(1, |a| a.points)
    }

    pub fn split_index(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx(), idx / self.nx())
    }

    pub fn node(&self, idx: usize) -> Point {
        let (ix, iy) = self.split_index(idx);
        let x = self.axes[0].coord(ix);
        let y = self.axes.get(1).map_or(0.0, |a| a.coord(iy));
        [x, y]
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Squared wavenumber |k|^2 for every node of the reciprocal grid, in FFT order.
    pub fn k_squared(&self) -> Vec<f64> {
        let kx = self.axes[0].wavenumbers();
        match self.axes.get(1) {
            None => kx.iter().map(|k| k * k).collect(),
            Some(ay) => {
                let ky = ay.wavenumbers();
                let mut out = Vec::with_capacity(self.len());
                for kyv in &ky {
                    for kxv in &kx {
                        out.push(kxv * kxv + kyv * kyv);
                    }
                }
                out
            }
        }
    }

    /// Maximum kinetic energy `|k_max|^2 / 2` representable on the grid.
    pub fn max_kinetic(&self) -> f64 {
        self.axes.iter().map(|a| a.nyquist().powi(2)).sum::<f64>() / 2.0
    }

    /// True when the point lies inside the grid extent.
    pub fn contains(&self, p: Point) -> bool {
        self.axes
            .iter()
            .enumerate()
            .all(|(a, axis)| axis.contains(p[a]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Axis::new(1.0, 1.0, 64).is_err());
        assert!(Axis::new(0.0, 1.0, 4).is_err());
        assert!(Grid::from_axes(vec![]).is_err());
    }

    #[test]
    fn wavenumbers_are_in_fft_order() {
        let a = Axis::new(0.0, 2.0 * PI, 8).unwrap();
        assert_eq!(
            a.wavenumbers(),
            vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]
        );
        assert!((a.nyquist() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn flat_index_is_x_fastest() {
        let g = Grid::new_2d((0.0, 8.0, 8), (0.0, 16.0, 16)).unwrap();
        assert_eq!(g.len(), 128);
        assert_eq!(g.node(9), [1.0, 1.0]);
        assert_eq!(g.split_index(17), (1, 2));
    }
}

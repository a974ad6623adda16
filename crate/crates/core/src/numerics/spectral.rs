//! FFT plumbing over 1D/2D grids.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::grid::Grid;

/// Forward/inverse plans for every axis of one grid. Plans are immutable and
/// `Send + Sync`; scratch buffers live on the caller's stack per call.
#[derive(Clone)]
pub struct Spectral {
    nx: usize,
    ny: usize,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = grid
            .axes()
            .iter()
            .map(|a| planner.plan_fft_forward(a.points))
            .collect();
        let inv = grid
            .axes()
            .iter()
            .map(|a| planner.plan_fft_inverse(a.points))
            .collect();
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            fwd,
            inv,
            wavenumbers: grid.axes().iter().map(|a| a.wavenumbers()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.fwd);
    }

    /// Inverse transform in place, normalized so that `inverse(forward(f)) == f`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inv);
        let scale = 1.0 / self.len() as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        debug_assert_eq!(buf.len(), self.len());
        for row in buf.chunks_exact_mut(self.nx) {
            plans[0].process(row);
        }
        if plans.len() == 2 {
            let mut column = vec![Complex64::new(0.0, 0.0); self.ny];
            for ix in 0..self.nx {
                for (iy, c) in column.iter_mut().enumerate() {
                    *c = buf[iy * self.nx + ix];
                }
                plans[1].process(&mut column);
                for (iy, c) in column.iter().enumerate() {
                    buf[iy * self.nx + ix] = *c;
                }
            }
        }
    }

    /// Spectral derivative along `axis` of a complex field. The Nyquist mode
    /// is dropped so that real input yields (numerically) real output.
    pub fn derivative(&self, field: &[Complex64], axis: usize) -> Vec<Complex64> {
        let mut buf = field.to_vec();
        self.forward(&mut buf);
        self.apply_ik(&mut buf, axis);
        self.inverse(&mut buf);
        buf
    }

    /// Spectral derivative of a real field; the imaginary round-off of the
    /// inverse transform is discarded, so a zero input maps to an exact zero.
    pub fn derivative_real(&self, field: &[f64], axis: usize) -> Vec<f64> {
        let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        self.apply_ik(&mut buf, axis);
        self.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    fn apply_ik(&self, buf: &mut [Complex64], axis: usize) {
        let ks = &self.wavenumbers[axis];
        let n_axis = ks.len();
        let nyq = if n_axis % 2 == 0 {
            Some(n_axis / 2)
        } else {
            None
        };
        for (idx, z) in buf.iter_mut().enumerate() {
            let j = if axis == 0 {
                idx % self.nx
            } else {
                idx / self.nx
            };
            if Some(j) == nyq {
                *z = Complex64::new(0.0, 0.0);
            } else {
                *z *= Complex64::new(0.0, ks[j]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let g = Grid::new_2d((0.0, 1.0, 8), (0.0, 2.0, 16)).unwrap();
        let s = Spectral::new(&g);
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut buf = orig.clone();
        s.forward(&mut buf);
        s.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_zero_is_exact() {
        let g = Grid::new_1d(-5.0, 5.0, 64).unwrap();
        let s = Spectral::new(&g);
        assert!(s
            .derivative_real(&vec![0.0; 64], 0)
            .iter()
            .all(|&v| v == 0.0));
    }
}

use crate::error::{Error, Result};
use crate::numerics::{Grid, Point, Spectral, WaveFunction};

/// Nodes whose density is at most this fraction of the grid maximum are masked.
pub const NODE_FLOOR_FRACTION: f64 = 1e-12;

/// Guidance velocity `Im(psi^H grad psi) / (psi^H psi)` sampled on the grid.
///
/// Masked nodes keep whatever value the formula produced (zero where the
/// density vanishes exactly), so they can still be read in non-strict mode.
#[derive(Debug, Clone)]
pub struct VelocityField {
    grid: Grid,
    /// `values[axis][node]`
    values: Vec<Vec<f64>>,
    masked: Vec<bool>,
    time: f64,
}

impl VelocityField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn axis_values(&self, axis: usize) -> &[f64] {
        &self.values[axis]
    }

    pub fn is_masked(&self, node: usize) -> bool {
        self.masked[node]
    }

    pub fn masked_count(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }

    /// Value at a node, `None` if masked.
    pub fn at_node(&self, node: usize) -> Option<Point> {
        if self.masked[node] {
            return None;
        }
        let mut v = [0.0; 2];
        for (a, vals) in self.values.iter().enumerate() {
            v[a] = vals[node];
        }
        Some(v)
    }

    /// Largest `|v|` over unmasked nodes.
    pub fn max_unmasked_speed(&self) -> f64 {
        (0..self.masked.len())
            .filter_map(|i| self.at_node(i))
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }

    /// Interpolated velocity: cubic Lagrange in 1D, bilinear in 2D. Returns
    /// `None` when `strict` and any stencil node is masked.
    pub fn interpolate(&self, p: Point, strict: bool) -> Option<Point> {
        match self.grid.dims() {
            1 => self.interp_1d(p[0], strict),
            _ => self.interp_2d(p, strict),
        }
    }

    fn locate(&self, axis: usize, x: f64) -> (isize, f64) {
        let a = self.grid.axis(axis);
        let u = (x - a.lo) / a.spacing();
        let i = u.floor();
        (i as isize, u - i)
    }

    fn wrap(n: usize, i: isize) -> usize {
        i.rem_euclid(n as isize) as usize
    }

    fn interp_1d(&self, x: f64, strict: bool) -> Option<Point> {
        let n = self.grid.nx();
        let (i, s) = self.locate(0, x);
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        let mut v = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let node = Self::wrap(n, i - 1 + k as isize);
            if strict && self.masked[node] {
                return None;
            }
            v += wk * self.values[0][node];
        }
        Some([v, 0.0])
    }

    fn interp_2d(&self, p: Point, strict: bool) -> Option<Point> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let (ix, sx) = self.locate(0, p[0]);
        let (iy, sy) = self.locate(1, p[1]);
        let mut v = [0.0; 2];
        for (dy, wy) in [(0, 1.0 - sy), (1, sy)] {
            for (dx, wx) in [(0, 1.0 - sx), (1, sx)] {
                let node = Self::wrap(ny, iy + dy) * nx + Self::wrap(nx, ix + dx);
                if strict && self.masked[node] {
                    return None;
                }
                let w = wx * wy;
                v[0] += w * self.values[0][node];
                v[1] += w * self.values[1][node];
            }
        }
        Some(v)
    }
}

/// Computes the guidance velocity of `psi`.
pub fn velocity_field(psi: &WaveFunction) -> Result<VelocityField> {
    velocity_field_with(&Spectral::new(psi.grid()), psi)
}

pub(crate) fn velocity_field_with(
    spectral: &Spectral,
    psi: &WaveFunction,
) -> Result<VelocityField> {
    let grid = psi.grid();
    let n = grid.len();
    let dims = grid.dims();
    let rho = psi.density();
    let rho_max = rho.iter().copied().fold(0.0, f64::max);
    if rho_max <= 0.0 {
        return Err(Error::AllNodesMasked);
    }
    let floor = NODE_FLOOR_FRACTION * rho_max;
    let masked: Vec<bool> = rho.iter().map(|&r| r <= floor).collect();

    // current j = sum_c (Re psi_c d Im psi_c - Im psi_c d Re psi_c); derivatives of
    // the real and imaginary parts are taken separately so a real psi yields j == 0 exactly.
    let mut current = vec![vec![0.0; n]; dims];
    for c in 0..psi.components() {
        let comp = psi.component(c);
        let re: Vec<f64> = comp.iter().map(|z| z.re).collect();
        let im: Vec<f64> = comp.iter().map(|z| z.im).collect();
        let im_is_zero = im.iter().all(|&v| v == 0.0);
        let re_is_zero = re.iter().all(|&v| v == 0.0);
        for (a, j) in current.iter_mut().enumerate() {
            if !im_is_zero {
                let d_im = spectral.derivative_real(&im, a);
                for i in 0..n {
                    j[i] += re[i] * d_im[i];
                }
            }
            if !re_is_zero {
                let d_re = spectral.derivative_real(&re, a);
                for i in 0..n {
                    j[i] -= im[i] * d_re[i];
                }
            }
        }
    }
    let values = current
        .into_iter()
        .map(|j| {
            j.iter()
                .zip(&rho)
                .map(|(j, r)| if *r > 0.0 { j / r } else { 0.0 })
                .map(|v| if v.is_finite() { v } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(VelocityField {
        grid: grid.clone(),
        values,
        masked,
        time: psi.time(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Initializer;

    #[test]
    fn real_wave_function_has_zero_velocity() {
        let g = Grid::new_1d(-1.0, 3.0, 256).unwrap();
        let psi = WaveFunction::new(
            g,
            &Initializer::BoxEigenstate {
                n: 2,
                a: 0.0,
                b: 2.0,
            },
        )
        .unwrap();
        let v = velocity_field(&psi).unwrap();
        assert_eq!(v.max_unmasked_speed(), 0.0);
        assert!(v.masked_count() > 0);
    }

    #[test]
    fn vanishing_field_is_rejected() {
        let g = Grid::new_1d(-1.0, 1.0, 16).unwrap();
        let psi = WaveFunction::from_amplitudes(
            g,
            1,
            vec![num_complex::Complex64::new(0.0, 0.0); 16],
            0.0,
        )
        .unwrap();
        assert!(matches!(velocity_field(&psi), Err(Error::AllNodesMasked)));
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let g = Grid::new_1d(0.0, 16.0, 16).unwrap();
        let values = vec![g.nodes().map(|p| 0.5 * p[0].powi(3) - p[0]).collect()];
        let f = VelocityField {
            grid: g,
            values,
            masked: vec![false; 16],
            time: 0.0,
        };
        for x in [3.25, 7.5, 10.9] {
            let v = f.interpolate([x, 0.0], true).unwrap()[0];
            assert!((v - (0.5 * x * x * x - x)).abs() < 1e-9);
        }
    }
}

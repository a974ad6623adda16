use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::grid::{Grid, Point};
use super::spectral::Spectral;
use crate::error::{Error, Result};

/// Gaussian support margin (in widths) that must fit inside the grid.
pub const SUPPORT_SIGMAS: f64 = 6.0;

/// Analytic families a wave function can be sampled from.
///
/// `width` is always the position standard deviation of the packet's density,
/// so a Gaussian amplitude reads `exp(-(x - c)^2 / (4 width^2) + i k x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Initializer {
    Gaussian {
        center: Point,
        width: f64,
        momentum: Point,
    },
    /// Two coherent packets at `+-half_separation` on the last axis. On a 2D
    /// grid the first axis carries a single packet at the origin with
    /// `momentum` along it; on a 1D grid `momentum` multiplies both packets.
    TwoGaussian {
        half_separation: f64,
        width: f64,
        momentum: f64,
    },
    /// Hard-wall eigenstate `sin(n pi (x - a) / (b - a))` on `[a, b]`, zero outside.
    BoxEigenstate { n: usize, a: f64, b: f64 },
    /// Two-component packet `(c_up g, c_down g)` along the first axis.
    SpinorGaussian {
        c_up: Complex64,
        c_down: Complex64,
        center: f64,
        width: f64,
    },
}

impl Initializer {
    /// Ground state of `omega^2 x^2 / 2`.
    pub fn harmonic_ground(omega: f64) -> Self {
        Initializer::Gaussian {
            center: [0.0, 0.0],
            width: (0.5 / omega).sqrt(),
            momentum: [0.0, 0.0],
        }
    }

    pub fn gaussian_1d(center: f64, width: f64, momentum: f64) -> Self {
        Initializer::Gaussian {
            center: [center, 0.0],
            width,
            momentum: [momentum, 0.0],
        }
    }

    /// Parses `name(key=value, ...)`, e.g. `gaussian(center=0, width=1, k=0)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(open) if text.ends_with(')') => (&text[..open], &text[open + 1..text.len() - 1]),
            _ => (text, ""),
        };
        let mut kv = std::collections::BTreeMap::new();
        for item in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("expected key=value, got `{item}`"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("`{v}` is not a number")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |k: &str, default: f64| kv.get(k).copied().unwrap_or(default);
        let known: &[&str] = match name.trim() {
            "gaussian" => &["center", "center_y", "width", "k", "k_y"],
            "two_gaussian_superposition" | "two_gaussian" => &["d", "width", "k"],
            "box_eigenstate" => &["n", "a", "b"],
            "spinor_gaussian" => &["c_up", "c_down", "phase", "center", "width"],
            other => return Err(Error::UnknownInitializer(other.to_string())),
        };
        if let Some(bad) = kv.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "unknown parameter `{bad}` for initializer `{name}`"
            )));
        }
        Ok(match name.trim() {
            "gaussian" => Initializer::Gaussian {
                center: [get("center", 0.0), get("center_y", 0.0)],
                width: get("width", 1.0),
                momentum: [get("k", 0.0), get("k_y", 0.0)],
            },
            "box_eigenstate" => Initializer::BoxEigenstate {
                n: get("n", 1.0) as usize,
                a: get("a", 0.0),
                b: get("b", 1.0),
            },
            "spinor_gaussian" => Initializer::SpinorGaussian {
                c_up: Complex64::new(get("c_up", std::f64::consts::FRAC_1_SQRT_2), 0.0),
                c_down: Complex64::from_polar(
                    get("c_down", std::f64::consts::FRAC_1_SQRT_2),
                    get("phase", 0.0),
                ),
                center: get("center", 0.0),
                width: get("width", 1.0),
            },
            _ => Initializer::TwoGaussian {
                half_separation: get("d", 2.0),
                width: get("width", 0.5),
                momentum: get("k", 0.0),
            },
        })
    }

    fn components(&self) -> usize {
        match self {
            Initializer::SpinorGaussian { .. } => 2,
            _ => 1,
        }
    }

    fn check_support(&self, grid: &Grid) -> Result<()> {
        let need = |axis: usize, lo: f64, hi: f64| -> Result<()> {
            let a = grid.axis(axis);
            if lo < a.lo || hi > a.hi {
                Err(Error::SupportEscapesGrid {
                    axis,
                    need_lo: lo,
                    need_hi: hi,
                    lo: a.lo,
                    hi: a.hi,
                })
            } else {
                Ok(())
            }
        };
        let positive = |w: f64| {
            if w.is_finite() && w > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "width must be positive, got {w}"
                )))
            }
        };
        let m = SUPPORT_SIGMAS;
        match self {
            Initializer::Gaussian { center, width, .. } => {
                positive(*width)?;
                for axis in 0..grid.dims() {
                    need(axis, center[axis] - m * width, center[axis] + m * width)?;
                }
            }
            Initializer::TwoGaussian {
                half_separation,
                width,
                ..
            } => {
                positive(*width)?;
                let last = grid.dims() - 1;
                let reach = half_separation.abs() + m * width;
                need(last, -reach, reach)?;
                if grid.dims() == 2 {
                    need(0, -m * width, m * width)?;
                }
            }
            Initializer::BoxEigenstate { n, a, b } => {
                if *n == 0 || b <= a {
                    return Err(Error::InvalidArgument(format!(
                        "box eigenstate needs n >= 1 and b > a (n = {n}, [{a}, {b}])"
                    )));
                }
                if grid.dims() != 1 {
                    return Err(Error::InvalidArgument(
                        "box eigenstates are defined on 1D grids".into(),
                    ));
                }
                need(0, *a, *b)?;
            }
            Initializer::SpinorGaussian { center, width, .. } => {
                positive(*width)?;
                need(0, center - m * width, center + m * width)?;
            }
        }
        Ok(())
    }

    fn amplitude(&self, p: Point, dims: usize, component: usize) -> Complex64 {
        let gauss = |x: f64, c: f64, w: f64| (-(x - c).powi(2) / (4.0 * w * w)).exp();
        match self {
            Initializer::Gaussian {
                center,
                width,
                momentum,
            } => {
                let mut mag = 1.0;
                let mut phase = 0.0;
                for a in 0..dims {
                    mag *= gauss(p[a], center[a], *width);
                    phase += momentum[a] * p[a];
                }
                Complex64::from_polar(mag, phase)
            }
            Initializer::TwoGaussian {
                half_separation: d,
                width,
                momentum,
            } => {
                let last = dims - 1;
                let pair = gauss(p[last], *d, *width) + gauss(p[last], -d, *width);
                let forward = if dims == 2 {
                    gauss(p[0], 0.0, *width)
                } else {
                    1.0
                };
                Complex64::from_polar(pair * forward, momentum * p[0])
            }
            Initializer::BoxEigenstate { n, a, b } => {
                let x = p[0];
                if x <= *a || x >= *b {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((*n as f64 * PI * (x - a) / (b - a)).sin(), 0.0)
                }
            }
            Initializer::SpinorGaussian {
                c_up,
                c_down,
                center,
                width,
            } => {
                let g = gauss(p[0], *center, *width);
                if component == 0 {
                    c_up * g
                } else {
                    c_down * g
                }
            }
        }
    }
}

/// Complex amplitudes on a grid, one block of `grid.len()` values per component.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    components: usize,
    amps: Vec<Complex64>,
    time: f64,
}

/// Spectral gradient: `axes[a][c * n + i]` is the derivative along axis `a` of
/// component `c` at node `i`.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub axes: Vec<Vec<Complex64>>,
}

impl WaveFunction {
    /// Samples `init` on `grid` and normalizes.
    pub fn new(grid: Grid, init: &Initializer) -> Result<Self> {
        init.check_support(&grid)?;
        let components = init.components();
        let dims = grid.dims();
        let mut amps = Vec::with_capacity(components * grid.len());
        for c in 0..components {
            amps.extend(grid.nodes().map(|p| init.amplitude(p, dims, c)));
        }
        let mut psi = Self {
            grid,
            components,
            amps,
            time: 0.0,
        };
        psi.normalize()?;
        Ok(psi)
    }

    pub fn from_amplitudes(
        grid: Grid,
        components: usize,
        amps: Vec<Complex64>,
        time: f64,
    ) -> Result<Self> {
        if components == 0 || components > 2 {
            return Err(Error::InvalidArgument(format!(
                "wave functions have 1 or 2 components, got {components}"
            )));
        }
        if amps.len() != components * grid.len() {
            return Err(Error::DimensionMismatch {
                expected: components * grid.len(),
                found: amps.len(),
            });
        }
        if amps.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite { step: 0 });
        }
        Ok(Self {
            grid,
            components,
            amps,
            time,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.amps[c * n..(c + 1) * n]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// L2 norm on the grid.
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() || n <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n;
        for z in &mut self.amps {
            *z *= s;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.is_finite())
    }

    /// Total density `sum_c |psi_c|^2` per node.
    pub fn density(&self) -> Vec<f64> {
        let n = self.grid.len();
        let mut rho = vec![0.0; n];
        for c in 0..self.components {
            for (r, z) in rho.iter_mut().zip(self.component(c)) {
                *r += z.norm_sqr();
            }
        }
        rho
    }

    pub fn component_density(&self, c: usize) -> Vec<f64> {
        self.component(c).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Weight `int |psi_c|^2` of one component.
    pub fn component_weight(&self, c: usize) -> f64 {
        self.component(c).iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Density marginal along `axis` (integrated over the other axis).
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let rho = self.density();
        if self.grid.dims() == 1 {
            return rho;
        }
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let other = self.grid.axis(1 - axis).spacing();
        let mut out = vec![0.0; if axis == 0 { nx } else { ny }];
        for (idx, r) in rho.iter().enumerate() {
            let (ix, iy) = (idx % nx, idx / nx);
            out[if axis == 0 { ix } else { iy }] += r * other;
        }
        out
    }

    /// `<x_axis>` under the density.
    pub fn mean_position(&self, axis: usize) -> f64 {
        let rho = self.density();
        let dv = self.grid.cell_volume();
        let total: f64 = rho.iter().sum::<f64>() * dv;
        self.grid
            .nodes()
            .zip(&rho)
            .map(|(p, r)| p[axis] * r)
            .sum::<f64>()
            * dv
            / total
    }

    pub fn std_position(&self, axis: usize) -> f64 {
        let mean = self.mean_position(axis);
        let rho = self.density();
        let total: f64 = rho.iter().sum();
        let var = self
            .grid
            .nodes()
            .zip(&rho)
            .map(|(p, r)| (p[axis] - mean).powi(2) * r)
            .sum::<f64>()
            / total;
        var.sqrt()
    }

    /// Spectral derivative along every axis for every component.
    pub fn gradient(&self) -> Gradient {
        let spectral = Spectral::new(&self.grid);
        self.gradient_with(&spectral)
    }

    pub(crate) fn gradient_with(&self, spectral: &Spectral) -> Gradient {
        let axes = (0..self.grid.dims())
            .map(|a| {
                (0..self.components)
                    .flat_map(|c| spectral.derivative(self.component(c), a))
                    .collect()
            })
            .collect();
        Gradient { axes }
    }

    /// Complex conjugate (time reversal of the state).
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for z in &mut out.amps {
            *z = z.conj();
        }
        out
    }

    /// `<psi|phi>` including the volume element.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.cell_volume()
    }
}

/// Convenience constructor mirroring [`WaveFunction::new`].
pub fn make_wavefunction(grid: Grid, init: &Initializer) -> Result<WaveFunction> {
    WaveFunction::new(grid, init)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new_1d(-10.0, 10.0, 512).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_and_centered() {
        let psi = WaveFunction::new(grid(), &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(psi.mean_position(0).abs() < 1e-12);
    }

    #[test]
    fn box_ground_state_is_real_sine() {
        let g = Grid::new_1d(-1.0, 3.0, 256).unwrap();
        let psi = WaveFunction::new(
            g.clone(),
            &Initializer::BoxEigenstate {
                n: 1,
                a: 0.0,
                b: 2.0,
            },
        )
        .unwrap();
        let scale = (2.0f64 / 2.0).sqrt();
        for (p, z) in g.nodes().zip(psi.amplitudes()) {
            assert_eq!(z.im, 0.0);
            let x = p[0];
            let expect = if x > 0.0 && x < 2.0 {
                scale * (PI * x / 2.0).sin()
            } else {
                0.0
            };
            assert!((z.re - expect).abs() < 1e-3, "x={x}");
        }
    }

    #[test]
    fn two_gaussian_density_has_two_maxima() {
        let psi = WaveFunction::new(
            grid(),
            &Initializer::TwoGaussian {
                half_separation: 2.0,
                width: 0.5,
                momentum: 0.0,
            },
        )
        .unwrap();
        let rho = psi.density();
        let maxima = (1..rho.len() - 1)
            .filter(|&i| rho[i] > rho[i - 1] && rho[i] >= rho[i + 1])
            .count();
        assert_eq!(maxima, 2);
    }

    #[test]
    fn support_and_name_errors() {
        let e = WaveFunction::new(grid(), &Initializer::gaussian_1d(8.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::SupportEscapesGrid { .. }));
        assert!(matches!(
            Initializer::parse("lorentzian(width=1)").unwrap_err(),
            Error::UnknownInitializer(_)
        ));
        let zero = Initializer::SpinorGaussian {
            c_up: Complex64::new(0.0, 0.0),
            c_down: Complex64::new(0.0, 0.0),
            center: 0.0,
            width: 1.0,
        };
        assert!(matches!(
            WaveFunction::new(grid(), &zero).unwrap_err(),
            Error::ZeroNorm
        ));
    }

    #[test]
    fn parse_round_trip() {
        let init = Initializer::parse("gaussian(center=1.5, width=0.5, k=2)").unwrap();
        assert_eq!(init, Initializer::gaussian_1d(1.5, 0.5, 2.0));
        assert!(Initializer::parse("gaussian(sigma=1)").is_err());
    }
}

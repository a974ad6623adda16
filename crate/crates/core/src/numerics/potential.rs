use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Wall height used for the finite-box realization of hard walls.
pub const BOX_WALL_HEIGHT: f64 = 1e6;

/// Orientation of the Stern-Gerlach field gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Normal,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Normal => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Orientation::Normal),
            "reversed" => Ok(Orientation::Reversed),
            other => Err(Error::InvalidArgument(format!(
                "orientation must be `normal` or `reversed`, got `{other}`"
            ))),
        }
    }
}

/// External potential. Spinor couplings are diagonal in the spin basis, so the
/// 2 x 2 potential matrix is real diagonal (hence Hermitian) at every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Free,
    /// `omega^2 |r|^2 / 2`.
    Harmonic {
        omega: f64,
    },
    /// Zero on `[a, b]` along the first axis, `height` outside.
    Box {
        a: f64,
        b: f64,
        height: f64,
    },
    /// `V = -sign * coupling * z * sigma_z` for `0 <= t <= tau`, zero afterwards.
    SternGerlach {
        coupling: f64,
        tau: f64,
        orientation: Orientation,
    },
    /// Tabulated values, one table shared by every component or one per component.
    Custom {
        values: Vec<Vec<f64>>,
    },
}

impl Potential {
    pub fn hard_box(a: f64, b: f64) -> Self {
        Potential::Box {
            a,
            b,
            height: BOX_WALL_HEIGHT,
        }
    }

    pub fn validate(&self, grid: &Grid, components: usize) -> Result<()> {
        match self {
            Potential::Free => Ok(()),
            Potential::Harmonic { omega } if omega.is_finite() && *omega > 0.0 => Ok(()),
            Potential::Harmonic { omega } => Err(Error::InvalidArgument(format!(
                "harmonic frequency must be positive, got {omega}"
            ))),
            Potential::Box { a, b, height } => {
                if b > a && height.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "box [{a}, {b}] with height {height} is invalid"
                    )))
                }
            }
            Potential::SternGerlach { coupling, tau, .. } => {
                if coupling.is_finite() && tau.is_finite() && *tau >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(
                        "Stern-Gerlach coupling and window must be finite".into(),
                    ))
                }
            }
            Potential::Custom { values } => {
                if values.len() != 1 && values.len() != components {
                    return Err(Error::DimensionMismatch {
                        expected: components,
                        found: values.len(),
                    });
                }
                for table in values {
                    if table.len() != grid.len() {
                        return Err(Error::DimensionMismatch {
                            expected: grid.len(),
                            found: table.len(),
                        });
                    }
                    if table.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidArgument(
                            "custom potential has non-finite values".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Potential::SternGerlach { .. })
    }

    /// Spin eigenvalue of `sigma_z` for a component index.
    fn spin_sign(component: usize) -> f64 {
        if component == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Values on every node of `component` at time `t`.
    pub fn values(&self, grid: &Grid, component: usize, t: f64) -> Vec<f64> {
        match self {
            Potential::Free => vec![0.0; grid.len()],
            Potential::Harmonic { omega } => grid
                .nodes()
                .map(|p| {
                    let r2: f64 = p[..grid.dims()].iter().map(|c| c * c).sum();
                    0.5 * omega * omega * r2
                })
                .collect(),
            Potential::Box { a, b, height } => grid
                .nodes()
                .map(|p| {
                    if p[0] >= *a && p[0] <= *b {
                        0.0
                    } else {
                        *height
                    }
                })
                .collect(),
            Potential::SternGerlach {
                coupling,
                tau,
                orientation,
            } => {
                if t < 0.0 || t > *tau {
                    return vec![0.0; grid.len()];
                }
                let s = -orientation.sign() * coupling * Self::spin_sign(component);
                grid.nodes().map(|p| s * p[0]).collect()
            }
            Potential::Custom { values } => {
                let table = if values.len() == 1 {
                    &values[0]
                } else {
                    &values[component]
                };
                table.clone()
            }
        }
    }

    /// Largest `|V|` attained on the grid over the whole run.
    pub fn max_abs(&self, grid: &Grid, components: usize) -> f64 {
        let t_probe = match self {
            Potential::SternGerlach { tau, .. } => 0.5 * tau,
            _ => 0.0,
        };
        (0..components)
            .flat_map(|c| self.values(grid, c, t_probe))
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stern_gerlach_window_and_sign() {
        let g = Grid::new_1d(-4.0, 4.0, 8).unwrap();
        let v = Potential::SternGerlach {
            coupling: 2.0,
            tau: 1.0,
            orientation: Orientation::Normal,
        };
        // up component is pushed towards +z: V decreases with z
        let up = v.values(&g, 0, 0.5);
        assert!(up[0] > up[7]);
        let down = v.values(&g, 1, 0.5);
        assert!(down[0] < down[7]);
        assert!(v.values(&g, 0, 1.5).iter().all(|&x| x == 0.0));
        let r = Potential::SternGerlach {
            coupling: 2.0,
            tau: 1.0,
            orientation: Orientation::Reversed,
        };
        assert_eq!(r.values(&g, 0, 0.5), down);
    }

    #[test]
    fn custom_table_shape_is_checked() {
        let g = Grid::new_1d(0.0, 1.0, 8).unwrap();
        let v = Potential::Custom {
            values: vec![vec![0.0; 7]],
        };
        assert!(v.validate(&g, 1).is_err());
    }
}

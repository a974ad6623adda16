//! Text snapshots: CSV body (`x[, y], re_c0, im_c0[, re_c1, im_c1]`) plus a JSON header.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use super::grid::Grid;
use super::wavefunction::WaveFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub grid: Grid,
    pub components: usize,
    pub time: f64,
    pub norm: f64,
}

pub fn header(psi: &WaveFunction) -> SnapshotHeader {
    SnapshotHeader {
        grid: psi.grid().clone(),
        components: psi.components(),
        time: psi.time(),
        norm: psi.norm(),
    }
}

pub fn to_csv(psi: &WaveFunction) -> String {
    let grid = psi.grid();
    let mut out = String::new();
    out.push('x');
    if grid.dims() == 2 {
        out.push_str(",y");
    }
    for c in 0..psi.components() {
        let _ = write!(out, ",re_c{c},im_c{c}");
    }
    out.push('\n');
    for (i, p) in grid.nodes().enumerate() {
        let _ = write!(out, "{:e}", p[0]);
        if grid.dims() == 2 {
            let _ = write!(out, ",{:e}", p[1]);
        }
        for c in 0..psi.components() {
            let z = psi.component(c)[i];
            let _ = write!(out, ",{:e},{:e}", z.re, z.im);
        }
        out.push('\n');
    }
    out
}

pub fn from_csv(header: &SnapshotHeader, csv: &str) -> Result<WaveFunction> {
    let grid = &header.grid;
    let n = grid.len();
    let coord_cols = grid.dims();
    let want_cols = coord_cols + 2 * header.components;
    let mut amps = vec![Complex64::new(0.0, 0.0); n * header.components];
    let mut rows = 0;
    for (lineno, line) in csv.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != want_cols {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected {want_cols} columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("`{s}` is not a number"),
            })
        };
        if rows >= n {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "more rows than grid nodes".into(),
            });
        }
        for c in 0..header.components {
            let re = parse(fields[coord_cols + 2 * c])?;
            let im = parse(fields[coord_cols + 2 * c + 1])?;
            amps[c * n + rows] = Complex64::new(re, im);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            line: rows + 1,
            msg: format!("expected {n} rows, found {rows}"),
        });
    }
    WaveFunction::from_amplitudes(grid.clone(), header.components, amps, header.time)
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_snapshot(psi: &WaveFunction, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.csv")), to_csv(psi))?;
    std::fs::write(
        dir.join(format!("{stem}.json")),
        serde_json::to_string_pretty(&header(psi))?,
    )?;
    Ok(())
}

pub fn read_snapshot(dir: &Path, stem: &str) -> Result<WaveFunction> {
    let header: SnapshotHeader =
        serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    from_csv(
        &header,
        &std::fs::read_to_string(dir.join(format!("{stem}.csv")))?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::wavefunction::Initializer;

    #[test]
    fn spinor_snapshot_round_trips() {
        let g = Grid::new_1d(-10.0, 10.0, 64).unwrap();
        let psi = WaveFunction::new(
            g,
            &Initializer::SpinorGaussian {
                c_up: Complex64::new(0.6, 0.0),
                c_down: Complex64::new(0.0, 0.8),
                center: 0.3,
                width: 1.0,
            },
        )
        .unwrap();
        let back = from_csv(&header(&psi), &to_csv(&psi)).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn short_csv_is_rejected() {
        let g = Grid::new_1d(-10.0, 10.0, 64).unwrap();
        let psi = WaveFunction::new(g, &Initializer::gaussian_1d(0.0, 1.0, 0.0)).unwrap();
        let csv: String = to_csv(&psi).lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(from_csv(&header(&psi), &csv).is_err());
    }
}

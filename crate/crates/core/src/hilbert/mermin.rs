//! The Mermin square: nine two-qubit observables whose rows multiply to `+I`
//! and whose columns multiply to `-I`.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::operator::{pauli_x, pauli_y, pauli_z, HermitianOperator};
use crate::error::Result;

pub const IDENTITY_TOL: f64 = 1e-12;

/// `square[r][c]`, row-major.
pub fn mermin_operators() -> [[HermitianOperator; 3]; 3] {
    let (i, x, y, z) = (HermitianOperator::identity(2), pauli_x(), pauli_y(), pauli_z());
    [
        [i.kron(&z), z.kron(&i), z.kron(&z)],
        [x.kron(&i), i.kron(&x), x.kron(&x)],
        [x.kron(&z).neg(), z.kron(&x).neg(), y.kron(&y)],
    ]
}

/// A row or column: three cells and the sign `s` with product `s I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub name: String,
    pub cells: [usize; 3],
    pub sign: i8,
}

/// The six lines with their product signs, for cells indexed `3 r + c`.
pub fn mermin_lines() -> Vec<Line> {
    let mut out = Vec::new();
    for r in 0..3 {
        out.push(Line {
            name: format!("row{r}"),
            cells: [3 * r, 3 * r + 1, 3 * r + 2],
            sign: 1,
        });
    }
    for c in 0..3 {
        out.push(Line {
            name: format!("col{c}"),
            cells: [c, 3 + c, 6 + c],
            sign: -1,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineCheck {
    pub line: String,
    pub sign: i8,
    /// Largest pairwise commutator entry.
    pub commutator: f64,
    /// `max |ABC - sign I|`.
    pub product_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContradictionReport {
    pub operators_valid: bool,
    pub lines: Vec<LineCheck>,
    /// Max deviation of any cell's square from `I` (eigenvalues +-1).
    pub square_residual: f64,
    pub assignments: usize,
    pub satisfying_all: usize,
    /// For each dropped line, how many assignments satisfy the other five, and one of them.
    pub five_of_six: Vec<(String, usize, Option<[i8; 9]>)>,
    pub relabelings_checked: usize,
    pub relabelings_contradictory: usize,
    pub elapsed_ms: f64,
}

impl ContradictionReport {
    pub fn pass(&self) -> bool {
        self.operators_valid
            && self.satisfying_all == 0
            && self.five_of_six.iter().all(|(_, n, w)| *n > 0 && w.is_some())
            && self.relabelings_checked == self.relabelings_contradictory
    }
}

fn assignment(bits: u32) -> [i8; 9] {
    std::array::from_fn(|k| if (bits >> k) & 1 == 1 { -1 } else { 1 })
}

fn satisfies(v: &[i8; 9], line: &Line) -> bool {
    line.cells.iter().map(|&c| v[c]).product::<i8>() == line.sign
}

/// Number of the 512 sign assignments satisfying every given line.
pub fn count_satisfying(lines: &[Line]) -> (usize, Option<[i8; 9]>) {
    let mut n = 0;
    let mut first = None;
    for bits in 0..512u32 {
        let v = assignment(bits);
        if lines.iter().all(|l| satisfies(&v, l)) {
            n += 1;
            first.get_or_insert(v);
        }
    }
    (n, first)
}

fn permute(lines: &[Line], rows: [usize; 3], cols: [usize; 3], transpose: bool) -> Vec<Line> {
    let map = |cell: usize| {
        let (r, c) = (cell / 3, cell % 3);
        let (r, c) = (rows[r], cols[c]);
        if transpose {
            3 * c + r
        } else {
            3 * r + c
        }
    };
    lines
        .iter()
        .map(|l| Line {
            name: l.name.clone(),
            cells: l.cells.map(map),
            sign: l.sign,
        })
        .collect()
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Verifies the operator identities, then enumerates all `2^9` value maps.
pub fn mermin_square_check() -> Result<ContradictionReport> {
    let start = Instant::now();
    let ops = mermin_operators();
    let flat: Vec<&HermitianOperator> = ops.iter().flatten().collect();
    let id = HermitianOperator::identity(4);
    let square_residual = flat
        .iter()
        .map(|o| o.product(o).map(|sq| sq.distance(&id)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let lines = mermin_lines();
    let mut checks = Vec::new();
    for l in &lines {
        let [a, b, c] = l.cells.map(|k| flat[k]);
        let commutator = a.commutator_norm(b).max(a.commutator_norm(c)).max(b.commutator_norm(c));
        let prod = a.matrix() * b.matrix() * c.matrix();
        let target = id.scale(l.sign as f64);
        let product_residual = super::operator::max_abs(&(prod - target.matrix()));
        checks.push(LineCheck {
            line: l.name.clone(),
            sign: l.sign,
            commutator,
            product_residual,
        });
    }
    let operators_valid = square_residual < IDENTITY_TOL
        && checks
            .iter()
            .all(|c| c.commutator < IDENTITY_TOL && c.product_residual < IDENTITY_TOL);

    let (satisfying_all, _) = count_satisfying(&lines);
    let five_of_six = (0..lines.len())
        .map(|drop| {
            let rest: Vec<Line> = lines.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, l)| l.clone()).collect();
            let (n, w) = count_satisfying(&rest);
            (lines[drop].name.clone(), n, w)
        })
        .collect();

    let mut checked = 0;
    let mut contradictory = 0;
    for rows in PERMS {
        for cols in PERMS {
            for transpose in [false, true] {
                checked += 1;
                if count_satisfying(&permute(&lines, rows, cols, transpose)).0 == 0 {
                    contradictory += 1;
                }
            }
        }
    }

    Ok(ContradictionReport {
        operators_valid,
        lines: checks,
        square_residual,
        assignments: 512,
        satisfying_all,
        five_of_six,
        relabelings_checked: checked,
        relabelings_contradictory: contradictory,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

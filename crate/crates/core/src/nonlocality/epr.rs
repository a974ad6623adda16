use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::state::{correspond, CorrespondencePair, MaxEntangledState, Side};
use crate::error::{Error, Result};
use crate::hilbert::{c, CMatrix, CVector, HermitianOperator};
use crate::rng::{rng_for, stream};

/// Eigenvalues closer than this are treated as one outcome.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub trial: usize,
    pub first: Side,
    /// Outcome of `O` on factor 1.
    pub outcome_1: f64,
    /// Outcome of `O~` on factor 2.
    pub outcome_2: f64,
    /// Index of the eigenspace the first measurement collapsed onto.
    pub post_state: usize,
}

/// One outcome of `O` (and of `O~`): the eigenvalue and the projectors on both factors.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub value: f64,
    pub projector_1: CMatrix,
    pub projector_2: CMatrix,
}

/// Spectral projectors of the correspondence pair, degenerate eigenvalues grouped.
pub fn outcomes(pair: &CorrespondencePair) -> Vec<Outcome> {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &v) in pair.eigenvalues.iter().enumerate() {
        match groups.last_mut() {
            Some((w, idx)) if (v - *w).abs() <= DEGENERACY_TOL => idx.push(k),
            _ => groups.push((v, vec![k])),
        }
    }
    let projector = |basis: &CMatrix, idx: &[usize]| {
        let n = basis.nrows();
        idx.iter().fold(CMatrix::zeros(n, n), |acc, &k| {
            let v = basis.column(k);
            acc + v * v.adjoint()
        })
    };
    groups
        .into_iter()
        .map(|(value, idx)| Outcome {
            value,
            projector_1: projector(&pair.psi, &idx),
            projector_2: projector(&pair.phi, &idx),
        })
        .collect()
}

/// `P (x) I` or `I (x) P` on the product space.
fn lift(p: &CMatrix, side: Side) -> CMatrix {
    let id = CMatrix::identity(p.nrows(), p.ncols());
    match side {
        Side::One => p.kronecker(&id),
        Side::Two => id.kronecker(p),
    }
}

fn projector_on(o: &Outcome, side: Side) -> &CMatrix {
    match side {
        Side::One => &o.projector_1,
        Side::Two => &o.projector_2,
    }
}

/// Normalized state after outcome `k` on `side`, and the Born probability of that outcome.
pub fn collapse(psi: &CVector, outcomes: &[Outcome], side: Side, k: usize) -> (CVector, f64) {
    let projected = lift(projector_on(&outcomes[k], side), side) * psi;
    let p = projected.norm_squared();
    let post = if p > 0.0 { projected * c(1.0 / p.sqrt(), 0.0) } else { projected };
    (post, p)
}

/// Exact joint distribution `P[i][j]` of (outcome `i` of `O`, outcome `j` of `O~`)
/// when `first` is measured first and the other side on the collapsed state.
pub fn joint_distribution(state: &MaxEntangledState, pair: &CorrespondencePair, first: Side) -> Vec<Vec<f64>> {
    let outs = outcomes(pair);
    let psi = state.vector();
    let m = outs.len();
    let mut joint = vec![vec![0.0; m]; m];
    for a in 0..m {
        let (post, pa) = collapse(&psi, &outs, first, a);
        if pa <= 0.0 {
            continue;
        }
        for b in 0..m {
            let (_, pb) = collapse(&post, &outs, first.other(), b);
            let (i, j) = match first {
                Side::One => (a, b),
                Side::Two => (b, a),
            };
            joint[i][j] = pa * pb;
        }
    }
    joint
}

fn draw(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p / total;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// Sequential projective measurements of `O` on factor 1 and `O~` on factor 2.
///
/// Each trial draws the first side's outcome from the Born rule, collapses the
/// state and draws the second side's outcome from the collapsed state.
pub fn sample_epr(
    state: &MaxEntangledState,
    o: &HermitianOperator,
    trials: usize,
    seed: u64,
    first: Side,
) -> Result<Vec<MeasurementRecord>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let pair = correspond(o, state)?;
    let outs = outcomes(&pair);
    let psi = state.vector();
    let second = first.other();

    // The per-trial distributions only depend on the outcome index, so they are built once.
    let mut first_probs = Vec::with_capacity(outs.len());
    let mut second_probs = Vec::with_capacity(outs.len());
    for k in 0..outs.len() {
        let (post, p) = collapse(&psi, &outs, first, k);
        first_probs.push(p);
        second_probs.push(
            (0..outs.len())
                .map(|j| if p > 0.0 { collapse(&post, &outs, second, j).1 } else { 0.0 })
                .collect::<Vec<f64>>(),
        );
    }

    let mut rng = rng_for(seed, stream::EPR);
    Ok((0..trials)
        .map(|trial| {
            let a = draw(&first_probs, rng.random());
            let b = draw(&second_probs[a], rng.random());
            let (i, j) = match first {
                Side::One => (a, b),
                Side::Two => (b, a),
            };
            MeasurementRecord {
                trial,
                first,
                outcome_1: outs[i].value,
                outcome_2: outs[j].value,
                post_state: a,
            }
        })
        .collect())
}

/// Fraction of records whose two outcomes agree.
pub fn agreement(records: &[MeasurementRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.outcome_1 == r.outcome_2).count() as f64 / records.len() as f64
}

pub fn records_csv(records: &[MeasurementRecord]) -> String {
    let mut out = String::from("trial,first,outcome_1,outcome_2,post_state\n");
    for r in records {
        let side = match r.first {
            Side::One => 1,
            Side::Two => 2,
        };
        let _ = writeln!(out, "{},{},{},{},{}", r.trial, side, r.outcome_1, r.outcome_2, r.post_state);
    }
    out
}

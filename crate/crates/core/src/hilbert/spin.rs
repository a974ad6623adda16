use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

use super::operator::{c, CMatrix, HermitianOperator};
use crate::error::{Error, Result};

/// Orthonormality tolerance for frames.
pub const FRAME_TOL: f64 = 1e-10;

pub type Frame = [[f64; 3]; 3];

/// Spin-1 generators `(S_x, S_y, S_z)` in the `S_z` eigenbasis `(+1, 0, -1)`.
pub fn spin1_generators() -> [HermitianOperator; 3] {
    let h = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let sx = CMatrix::from_row_slice(3, 3, &[z, c(h, 0.0), z, c(h, 0.0), z, c(h, 0.0), z, c(h, 0.0), z]);
    let sy = CMatrix::from_row_slice(3, 3, &[z, c(0.0, -h), z, c(0.0, h), z, c(0.0, -h), z, c(0.0, h), z]);
    [
        HermitianOperator::new(sx).expect("S_x is Hermitian"),
        HermitianOperator::new(sy).expect("S_y is Hermitian"),
        HermitianOperator::from_real_diagonal(&[1.0, 0.0, -1.0]),
    ]
}

/// Spin component `u . S` along a direction.
pub fn spin1_component(u: [f64; 3]) -> HermitianOperator {
    let [sx, sy, sz] = spin1_generators();
    let m = sx.matrix() * c(u[0], 0.0) + sy.matrix() * c(u[1], 0.0) + sz.matrix() * c(u[2], 0.0);
    HermitianOperator::new(m).expect("real combination of Hermitian matrices")
}

/// Largest deviation of `F F^T` from the identity.
pub fn frame_deviation(frame: &Frame) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| frame[i][k] * frame[j][k]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).abs());
        }
    }
    worst
}

/// `(S_u^2, S_v^2, S_w^2)` for the orthonormal frame `(u, v, w)`.
pub fn spin1_squares(frame: &Frame) -> Result<[HermitianOperator; 3]> {
    let dev = frame_deviation(frame);
    if !(dev < FRAME_TOL) {
        return Err(Error::NonOrthonormal(dev));
    }
    let sq = |u: [f64; 3]| {
        let s = spin1_component(u);
        HermitianOperator::hermitize(s.matrix() * s.matrix()).expect("square of a Hermitian matrix")
    };
    Ok([sq(frame[0]), sq(frame[1]), sq(frame[2])])
}

/// Uniformly random rotation, from a normalized Gaussian quaternion.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> Frame {
    let mut q = [0.0f64; 4];
    for x in q.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_frame_gives_textbook_square() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let [_, _, sz2] = spin1_squares(&id).unwrap();
        assert!(sz2.distance(&HermitianOperator::from_real_diagonal(&[1.0, 0.0, 1.0])) < 1e-15);
        assert_eq!(
            sz2.eigendecompose().values.iter().map(|v| v.round()).collect::<Vec<_>>(),
            vec![0.0, 1.0, 1.0]
        );
    }

    #[test]
    fn skewed_frame_is_rejected() {
        let bad = [[1.0, 0.0, 0.0], [0.1, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(spin1_squares(&bad), Err(Error::NonOrthonormal(_))));
    }
}

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::state::MaxEntangledState;
use crate::error::{Error, Result};
use crate::hilbert::{c, pauli_x, pauli_z, CMatrix, CVector, HermitianOperator};
use crate::rng::{rng_for, stream};

/// Analyzer settings in the order `[a, b, a', b']`.
pub type Angles = [f64; 4];

/// The setting pairs entering `S`, with their signs: `(a,b) - (a,b') + (a',b) + (a',b')`.
pub const TERMS: [(usize, usize, f64); 4] = [(0, 1, 1.0), (0, 3, -1.0), (2, 1, 1.0), (2, 3, 1.0)];

/// `cos(theta) Z + sin(theta) X`.
pub fn spin_projection(theta: f64) -> HermitianOperator {
    pauli_z().scale(theta.cos()).sum(&pauli_x().scale(theta.sin())).expect("same dimension")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshReport {
    pub angles: Angles,
    /// `E(a,b), E(a,b'), E(a',b), E(a',b')`.
    pub correlations: [f64; 4],
    pub s_exact: f64,
    pub trials: usize,
    pub seed: u64,
    pub sampled_correlations: [f64; 4],
    pub s_sampled: f64,
    /// Binomial standard error of `s_sampled`.
    pub sigma: f64,
    pub within_3_sigma: bool,
}

fn expect(psi: &CVector, op: &CMatrix) -> f64 {
    (psi.adjoint() * op * psi)[(0, 0)].re
}

/// Probabilities of `(+,+), (+,-), (-,+), (-,-)` for analyzers `ta` and `tb`.
fn joint_probs(psi: &CVector, ta: f64, tb: f64) -> [f64; 4] {
    let id = CMatrix::identity(2, 2);
    let half = c(0.5, 0.0);
    let proj = |t: f64, s: f64| (&id + spin_projection(t).matrix() * c(s, 0.0)) * half;
    let mut out = [0.0; 4];
    for (k, (sa, sb)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
        out[k] = expect(psi, &proj(ta, sa).kronecker(&proj(tb, sb))).max(0.0);
    }
    out
}

/// Exact correlation `<sigma_a (x) sigma_b>` in a two-qubit state.
pub fn correlation(state: &MaxEntangledState, ta: f64, tb: f64) -> Result<f64> {
    if state.dim() != 2 {
        return Err(Error::NonQubitState(state.dim()));
    }
    let op = spin_projection(ta).kron(&spin_projection(tb));
    Ok(expect(&state.vector(), op.matrix()))
}

pub fn s_value(e: &[f64; 4]) -> f64 {
    TERMS.iter().zip(e).map(|(t, e)| t.2 * e).sum()
}

/// Exact `S` from Born-rule expectations plus a sampled estimate from `trials` runs per setting pair.
pub fn chsh_quantum(state: &MaxEntangledState, angles: Angles, trials: usize, seed: u64) -> Result<ChshReport> {
    if state.dim() != 2 {
        return Err(Error::NonQubitState(state.dim()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("angles must be finite".into()));
    }
    let psi = state.vector();
    let mut correlations = [0.0; 4];
    let mut sampled = [0.0; 4];
    let mut rng = rng_for(seed, stream::CHSH);
    for (k, &(i, j, _)) in TERMS.iter().enumerate() {
        correlations[k] = correlation(state, angles[i], angles[j])?;
        let probs = joint_probs(&psi, angles[i], angles[j]);
        let total: f64 = probs.iter().sum();
        let mut sum = 0i64;
        for _ in 0..trials {
            let u: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut cell = 3;
            for (m, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    cell = m;
                    break;
                }
            }
            sum += if cell == 0 || cell == 3 { 1 } else { -1 };
        }
        sampled[k] = sum as f64 / trials as f64;
    }
    let s_exact = s_value(&correlations);
    let s_sampled = s_value(&sampled);
    let sigma = (correlations.iter().map(|e| 1.0 - e * e).sum::<f64>() / trials as f64).sqrt();
    Ok(ChshReport {
        angles,
        correlations,
        s_exact,
        trials,
        seed,
        sampled_correlations: sampled,
        s_sampled,
        sigma,
        within_3_sigma: (s_sampled - s_exact).abs() <= 3.0 * sigma.max(1e-300),
    })
}

/// Predetermined outcomes `A(a), A(a'), B(b), B(b')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStrategy {
    pub alice: [i8; 2],
    pub bob: [i8; 2],
}

impl LocalStrategy {
    pub fn s(&self) -> i32 {
        let [a, a2] = self.alice.map(i32::from);
        let [b, b2] = self.bob.map(i32::from);
        a * b - a * b2 + a2 * b + a2 * b2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBound {
    pub strategies: Vec<(LocalStrategy, i32)>,
    pub max_abs_s: i32,
    pub witness: LocalStrategy,
}

/// All 16 deterministic local response pairs and the largest `|S|` among them.
pub fn enumerate_local_strategies() -> LocalBound {
    let pm = [1i8, -1];
    let mut strategies = Vec::with_capacity(16);
    for a in pm {
        for a2 in pm {
            for b in pm {
                for b2 in pm {
                    let s = LocalStrategy {
                        alice: [a, a2],
                        bob: [b, b2],
                    };
                    strategies.push((s, s.s()));
                }
            }
        }
    }
    let (witness, max) = strategies
        .iter()
        .copied()
        .max_by_key(|(_, s)| s.abs())
        .expect("sixteen strategies");
    LocalBound {
        strategies,
        max_abs_s: max.abs(),
        witness,
    }
}

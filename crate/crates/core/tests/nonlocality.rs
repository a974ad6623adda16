use pilotwave::hilbert::*;
use pilotwave::nonlocality::*;
use pilotwave::rng::rng_for;
use pilotwave::Error;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

fn random_state(n: usize, seed: u64) -> MaxEntangledState {
    let mut rng = rng_for(seed, 100);
    MaxEntangledState::new(random_unitary(n, &mut rng), random_unitary(n, &mut rng)).unwrap()
}

/// Partial trace of `|Psi><Psi|` computed entry by entry.
fn partial_trace(psi: &CVector, n: usize, keep_first: bool) -> CMatrix {
    CMatrix::from_fn(n, n, |a, b| {
        (0..n)
            .map(|k| {
                let (i, j) = if keep_first { (a * n + k, b * n + k) } else { (k * n + a, k * n + b) };
                psi[i] * psi[j].conj()
            })
            .sum()
    })
}

#[test]
fn singlet_matches_spin_form() {
    let v = MaxEntangledState::singlet().vector();
    let s = 1.0 / SQRT_2;
    let want = [0.0, s, -s, 0.0];
    for (z, w) in v.iter().zip(want) {
        assert!((z - c(w, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn reduced_densities_are_maximally_mixed() {
    let st = random_state(4, 3);
    let psi = st.vector();
    let target = CMatrix::identity(4, 4) * c(0.25, 0.0);
    for (side, first) in [(Side::One, true), (Side::Two, false)] {
        let oracle = partial_trace(&psi, 4, first);
        assert!(max_abs(&(&oracle - &target)) < 1e-10);
        assert!(max_abs(&(st.reduced_density(side) - &oracle)) < 1e-12);
    }
}

#[test]
fn invalid_bases_are_rejected() {
    let bad = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    assert!(matches!(
        MaxEntangledState::new(bad, CMatrix::identity(2, 2)),
        Err(Error::NonOrthonormal(_))
    ));
    assert!(matches!(
        MaxEntangledState::new(CMatrix::identity(2, 2), CMatrix::identity(3, 3)),
        Err(Error::DimensionMismatch { .. })
    ));
    let st = MaxEntangledState::singlet();
    assert!(matches!(
        correspond(&HermitianOperator::identity(3), &st),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn singlet_correspondent_of_sz_is_minus_sz() {
    let st = MaxEntangledState::singlet();
    let z = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
    let pair = correspond(&z, &st).unwrap();
    assert_eq!(pair.o_tilde, z.neg());
    assert!(pair.aligned_to_basis_1);

    let id = correspond(&HermitianOperator::identity(2), &st).unwrap();
    assert_eq!(id.o_tilde, HermitianOperator::identity(2));
}

#[test]
fn pair_invariants_and_inverse() {
    for (n, seed) in [(2, 1), (3, 2), (4, 3), (6, 4)] {
        let st = random_state(n, seed);
        let o = HermitianOperator::random(n, &mut rng_for(seed, 7));
        let pair = correspond(&o, &st).unwrap();
        for k in 0..n {
            let l = c(pair.eigenvalues[k], 0.0);
            let p = pair.psi.column(k);
            let f = pair.phi.column(k);
            assert!(max_abs(&(o.matrix() * p - p * l)) < 1e-10);
            assert!(max_abs(&(pair.o_tilde.matrix() * f - f * l)) < 1e-10);
        }
        // the eigenbases rebuild the same state
        let mut rebuilt = CVector::zeros(n * n);
        for k in 0..n {
            rebuilt += pair.psi.column(k).kronecker(&pair.phi.column(k)) * c(1.0 / (n as f64).sqrt(), 0.0);
        }
        assert!(max_abs(&(rebuilt - st.vector())) < 1e-10);
        // (O (x) I) Psi = (I (x) O~) Psi
        let id = CMatrix::identity(n, n);
        let lhs = o.matrix().kronecker(&id) * st.vector();
        let rhs = id.kronecker(pair.o_tilde.matrix()) * st.vector();
        assert!(max_abs(&(lhs - rhs)) < 1e-10);
        assert!(inverse_correspond(&pair.o_tilde, &st).unwrap().distance(&o) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correspondence_is_an_involution_on_the_singlet(seed in any::<u64>()) {
        let st = MaxEntangledState::singlet();
        let o = HermitianOperator::random(2, &mut rng_for(seed, 0));
        let once = correspond(&o, &st).unwrap().o_tilde;
        let twice = correspond(&once, &st.swapped()).unwrap().o_tilde;
        prop_assert!(twice.distance(&o) < 1e-10);
    }

    #[test]
    fn random_states_are_normalized(seed in any::<u64>(), n in 1usize..8) {
        prop_assert!((random_state(n, seed).vector().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn perfect_correlation_and_uniform_marginals() {
    let trials = 10_000;
    for (n, seed) in [(2usize, 11u64), (4, 12)] {
        let st = random_state(n, seed);
        let o = HermitianOperator::random(n, &mut rng_for(seed, 9));
        let values = o.eigendecompose().values;
        for first in [Side::Two, Side::One] {
            let records = sample_epr(&st, &o, trials, seed, first).unwrap();
            assert_eq!(records.len(), trials);
            assert!(records.iter().all(|r| r.outcome_1 == r.outcome_2));
            assert!(records.iter().all(|r| values.contains(&r.outcome_1)));
            let p = 1.0 / n as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            for v in &values {
                let freq = records.iter().filter(|r| r.outcome_1 == *v).count() as f64 / trials as f64;
                assert!((freq - p).abs() < 3.0 * sigma, "n={n} freq {freq}");
            }
        }
    }
    // the singlet with S_z: equal operator outcomes mean opposite spins
    let z = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
    let st = MaxEntangledState::singlet();
    let records = sample_epr(&st, &z, trials, 5, Side::Two).unwrap();
    assert_eq!(agreement(&records), 1.0);
    let bob = correspond(&z, &st).unwrap().o_tilde;
    assert!(bob.distance(&z.neg()) < 1e-15);
}

#[test]
fn degenerate_operator_still_correlates() {
    let st = random_state(4, 21);
    let o = HermitianOperator::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]);
    let records = sample_epr(&st, &o, 10_000, 2, Side::Two).unwrap();
    assert_eq!(agreement(&records), 1.0);
    let ups = records.iter().filter(|r| r.outcome_1 == 1.0).count() as f64 / 1e4;
    assert!((ups - 0.5).abs() < 3.0 * (0.25f64 / 1e4).sqrt());
}

#[test]
fn both_orders_give_the_same_joint_distribution() {
    // exact: both orders against a direct Born-rule oracle
    let st = random_state(2, 31);
    let o = HermitianOperator::random(2, &mut rng_for(31, 1));
    let pair = correspond(&o, &st).unwrap();
    let psi = st.vector();
    for first in [Side::One, Side::Two] {
        let joint = joint_distribution(&st, &pair, first);
        for i in 0..2 {
            for j in 0..2 {
                let p = pair.psi.column(i);
                let f = pair.phi.column(j);
                let proj = (p * p.adjoint()).kronecker(&(f * f.adjoint()));
                let oracle = (psi.adjoint() * proj * &psi)[(0, 0)].re;
                assert!((joint[i][j] - oracle).abs() < 1e-12);
            }
        }
    }

    // sampled: chi-square homogeneity over the N outcome cells at 1%
    let st = random_state(4, 32);
    let o = HermitianOperator::random(4, &mut rng_for(32, 1));
    let values = o.eigendecompose().values;
    let count = |first| {
        let rec = sample_epr(&st, &o, 10_000, 77, first).unwrap();
        values.iter().map(|v| rec.iter().filter(|r| r.outcome_1 == *v).count() as f64).collect::<Vec<_>>()
    };
    let (a, b) = (count(Side::One), count(Side::Two));
    let chi2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2) / (x + y)).sum();
    let crit = ChiSquared::new((values.len() - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(chi2 < crit, "chi2 {chi2} >= {crit}");
}

#[test]
fn collapse_yields_product_of_paired_eigenvectors() {
    let st = random_state(4, 41);
    let o = HermitianOperator::random(4, &mut rng_for(41, 2));
    let pair = correspond(&o, &st).unwrap();
    let outs = outcomes(&pair);
    let psi = st.vector();
    for side in [Side::One, Side::Two] {
        for k in 0..4 {
            let (post, p) = collapse(&psi, &outs, side, k);
            assert!((p - 0.25).abs() < 1e-12);
            let expected = pair.psi.column(k).kronecker(&pair.phi.column(k));
            let overlap = (expected.adjoint() * &post)[(0, 0)];
            assert!((overlap.norm() - 1.0).abs() < 1e-10);
            assert!(max_abs(&(post - expected * overlap)) < 1e-10);
        }
    }
}

#[test]
fn records_csv_has_one_row_per_trial() {
    let st = MaxEntangledState::singlet();
    let rec = sample_epr(&st, &pauli_x(), 5, 0, Side::Two).unwrap();
    let csv = records_csv(&rec);
    assert_eq!(csv.lines().next().unwrap(), "trial,first,outcome_1,outcome_2,post_state");
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("2")));
}

/// `<psi| A (x) B |psi>` for real 2x2 matrices, with plain loops.
fn real_expectation(psi: [f64; 4], a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    let mut e = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            e += psi[i] * a[i / 2][j / 2] * b[i % 2][j % 2] * psi[j];
        }
    }
    e
}

fn analyzer(t: f64) -> [[f64; 2]; 2] {
    [[t.cos(), t.sin()], [t.sin(), -t.cos()]]
}

#[test]
fn chsh_singlet_reaches_tsirelson_bound() {
    let st = MaxEntangledState::singlet();
    let angles = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
    let r = chsh_quantum(&st, angles, 100_000, 4).unwrap();
    assert!((r.s_exact + 2.0 * SQRT_2).abs() < 1e-12);
    let s = 1.0 / SQRT_2;
    for (k, &(i, j, _)) in TERMS.iter().enumerate() {
        let oracle = real_expectation([0.0, s, -s, 0.0], analyzer(angles[i]), analyzer(angles[j]));
        assert!((r.correlations[k] - oracle).abs() < 1e-12);
        assert!((oracle + (angles[i] - angles[j]).cos()).abs() < 1e-12);
    }
    assert!(r.within_3_sigma, "sampled {} exact {} sigma {}", r.s_sampled, r.s_exact, r.sigma);
}

#[test]
fn chsh_parallel_analyzers_anticorrelate() {
    let r = chsh_quantum(&MaxEntangledState::singlet(), [0.3; 4], 1000, 0).unwrap();
    assert!(r.correlations.iter().all(|e| (e + 1.0).abs() < 1e-12));
    assert!((r.s_exact.abs() - 2.0).abs() < 1e-12);
    assert!(r.sampled_correlations.iter().all(|e| *e == -1.0));
}

#[test]
fn chsh_rejects_non_qubit_states() {
    let st = random_state(3, 0);
    assert!(matches!(chsh_quantum(&st, [0.0; 4], 10, 0), Err(Error::NonQubitState(3))));
}

#[test]
fn local_strategies_obey_the_bell_bound() {
    let bound = enumerate_local_strategies();
    assert_eq!(bound.strategies.len(), 16);
    assert_eq!(bound.max_abs_s, 2);
    assert_eq!(bound.witness.s().abs(), 2);
    assert!(bound.strategies.iter().all(|(st, s)| s.abs() <= 2 && st.s() == *s));
    // independent enumeration over four bits
    let max = (0u8..16)
        .map(|bits| {
            let v = |k: u8| if bits >> k & 1 == 1 { 1i32 } else { -1 };
            (v(0) * v(2) - v(0) * v(3) + v(1) * v(2) + v(1) * v(3)).abs()
        })
        .max()
        .unwrap();
    assert_eq!(max, 2);
}

#[test]
fn schroedinger_demo_refutes_locality() {
    let r = schroedinger_theorem_demo(4, 1, DEFAULT_TRIALS).unwrap();
    assert!(r.pass());
    assert_eq!((r.operators_perfectly_correlated, r.operators_total), (9, 9));
    assert_eq!((r.value_maps_satisfying, r.value_maps_total), (0, 512));
    assert_eq!(r.conclusion, LOCALITY_REFUTED);
    let ids: Vec<&str> = r.steps.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(
        ids,
        ["entangled_state", "perfect_correlations", "value_map_from_locality", "no_value_map", "conclusion"]
    );
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["steps"][4]["evidence"]["verdict"], LOCALITY_REFUTED);

    let other = schroedinger_theorem_demo(4, 2, DEFAULT_TRIALS).unwrap();
    assert_eq!(other.conclusion, r.conclusion);
    assert_eq!(other.value_maps_satisfying, 0);
    assert_ne!(other.steps[0].evidence, r.steps[0].evidence);

    let big = schroedinger_theorem_demo(8, 1, 200).unwrap();
    assert!(big.pass());
}

#[test]
fn schroedinger_demo_needs_four_dimensions() {
    assert!(matches!(schroedinger_theorem_demo(2, 0, 10), Err(Error::Dimension { dim: 2, .. })));
    assert!(matches!(schroedinger_theorem_demo(6, 0, 10), Err(Error::Dimension { dim: 6, .. })));
}

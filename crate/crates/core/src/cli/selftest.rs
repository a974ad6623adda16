//! A quick pass over the built-in examples at reduced sizes.

use std::path::Path;

use super::commands::Output;
use super::config::Params;
use crate::equilibrium::{equivariance_check, TransportSettings};
use crate::error::Result;
use crate::experiments::{
    contextuality_witness, run_double_slit, run_stern_gerlach, DoubleSlitConfig, Slits, SternGerlachConfig, Starts,
};
use crate::guidance::{integrate_trajectory, IntegratorSettings, Provenance, SnapshotSource};
use crate::hilbert::{
    ks_search, max_abs, mermin_square_check, peres33, random_frame, spin1_squares, CMatrix, HermitianOperator,
    KsOutcome,
};
use crate::nonlocality::{
    agreement, chsh_quantum, correspond, enumerate_local_strategies, sample_epr, schroedinger_theorem_demo,
    MaxEntangledState, Side, LOCALITY_REFUTED,
};
use crate::numerics::{evolve, Grid, Initializer, Potential, WaveFunction};
use crate::rng::rng_for;

type Case = (&'static str, fn(u64) -> Result<(bool, String)>);

fn free_gaussian() -> Result<WaveFunction> {
    WaveFunction::new(Grid::new_1d(-20.0, 20.0, 512)?, &Initializer::gaussian_1d(0.0, 1.0, 0.0))
}

const CASES: &[Case] = &[
    ("solver_free_spreading", |_| {
        let psi = evolve(&free_gaussian()?, &Potential::Free, 1e-3, 1000)?;
        let w = psi.std_position(0);
        Ok(((w - 1.25f64.sqrt()).abs() < 1e-3 && (psi.norm() - 1.0).abs() < 1e-9, format!("width {w:.6}")))
    }),
    ("guidance_free_gaussian", |_| {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let src = SnapshotSource::free_flight(&free_gaussian()?, &times)?;
        let prov = Provenance {
            seed: 0,
            initial: [1.0, 0.0],
            experiment: "selftest".into(),
        };
        let x = integrate_trajectory([1.0, 0.0], &src, 2.0, &IntegratorSettings::default(), prov)?.final_position()[0];
        Ok(((x - 2f64.sqrt()).abs() < 1e-3, format!("X(2) = {x:.6}")))
    }),
    ("equivariance_free", |seed| {
        let r = equivariance_check("selftest", &free_gaussian()?, &Potential::Free, 2.0, 5000, seed, &TransportSettings::default())?;
        Ok((r.pass, format!("KS {:.3e} < {:.3e}", r.ks, r.threshold)))
    }),
    ("double_slit_small", |seed| {
        let cfg = DoubleSlitConfig {
            members: 1000,
            seed,
            keep_trajectories: 0,
            ..DoubleSlitConfig::default()
        };
        let both = run_double_slit(&cfg)?;
        let one = run_double_slit(&DoubleSlitConfig { slits: Slits::Upper, ..cfg })?;
        let maxima = |o: &crate::experiments::ExperimentOutcome| o.summary.get("maxima").copied().unwrap_or(0.0);
        Ok((
            both.passed() && one.passed() && maxima(&one) == 1.0,
            format!("maxima both={} one={}", maxima(&both), maxima(&one)),
        ))
    }),
    ("stern_gerlach_single_shot", |_| {
        let run = |orientation| {
            run_stern_gerlach(&SternGerlachConfig {
                orientation,
                starts: Starts::Explicit { z0: vec![0.7, -0.7] },
                keep_trajectories: 0,
                ..SternGerlachConfig::default()
            })
        };
        let (n, r) = (run(crate::numerics::Orientation::Normal)?, run(crate::numerics::Orientation::Reversed)?);
        let ok = n.labels == ["up", "down"] && r.labels == ["down", "up"];
        Ok((ok, format!("normal {:?}, reversed {:?}", n.labels, r.labels)))
    }),
    ("contextuality_small", |seed| {
        let r = contextuality_witness(&SternGerlachConfig { seed, ..SternGerlachConfig::default() }, 10)?;
        Ok((r.pass, format!("{}/10 same deflection, {}/10 label negated", r.same_deflection, r.label_negated)))
    }),
    ("spin1_frames", |seed| {
        let mut rng = rng_for(seed, 0x53);
        let id = CMatrix::identity(3, 3);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let [a, b, c] = spin1_squares(&random_frame(&mut rng))?;
            let sum = a.sum(&b)?.sum(&c)?;
            worst = worst
                .max(max_abs(&(sum.matrix() - &id * crate::hilbert::c(2.0, 0.0))))
                .max(a.commutator_norm(&b))
                .max(b.commutator_norm(&c))
                .max(a.commutator_norm(&c));
        }
        Ok((worst < 1e-10, format!("largest residual {worst:.1e}")))
    }),
    ("peres33_unsatisfiable", |_| {
        let r = ks_search(&peres33());
        Ok((matches!(r.outcome, KsOutcome::Unsatisfiable) && r.stats.complete, format!("verdict {}", r.verdict())))
    }),
    ("mermin_square", |_| {
        let r = mermin_square_check()?;
        Ok((r.pass(), format!("{}/{} satisfying", r.satisfying_all, r.assignments)))
    }),
    ("epr_singlet", |seed| {
        let st = MaxEntangledState::singlet();
        let z = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        let flipped = correspond(&z, &st)?.o_tilde.distance(&z.neg()) < 1e-12;
        let a = agreement(&sample_epr(&st, &z, 1000, seed, Side::Two)?);
        Ok((flipped && a == 1.0, format!("O~ = -O: {flipped}, agreement {a}")))
    }),
    ("chsh", |seed| {
        let r = chsh_quantum(&MaxEntangledState::singlet(), [0.0, 0.25, 0.5, 0.75].map(|f| f * std::f64::consts::PI), 10_000, seed)?;
        let local = enumerate_local_strategies().max_abs_s;
        let ok = local == 2 && (r.s_exact + 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12 && r.within_3_sigma;
        Ok((ok, format!("local max {local}, quantum S {:.6}", r.s_exact)))
    }),
    ("schroedinger_demo", |seed| {
        let r = schroedinger_theorem_demo(4, seed, 200)?;
        let rejects = schroedinger_theorem_demo(2, seed, 10).is_err();
        Ok((r.pass() && r.conclusion == LOCALITY_REFUTED && rejects, r.conclusion))
    }),
];

pub fn selftest(p: &Params, out: &Path) -> Result<Output> {
    let seed = p.seed()?;
    let mut o = Output::default();
    for (name, case) in CASES {
        let start = std::time::Instant::now();
        let (pass, detail) = match case(seed) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        o.timings_ms.insert((*name).to_string(), start.elapsed().as_secs_f64() * 1e3);
        o.checks.push(crate::experiments::Check::new(name, pass, detail));
    }
    let json = serde_json::json!({ "seed": seed, "checks": o.checks });
    std::fs::write(out.join("selftest.json"), serde_json::to_string_pretty(&json)? + "\n")?;
    o.files.push("selftest.json".into());
    Ok(o)
}

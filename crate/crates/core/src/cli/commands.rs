//! One function per subcommand: read resolved parameters, run, write result files, return claims.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

use super::config::Params;
use crate::equilibrium::{equivariance_check, TransportSettings};
use crate::error::{Error, Result};
use crate::experiments::{
    contextuality_witness, run_box_experiment, run_double_slit, run_stern_gerlach, BoxExperimentConfig, Check,
    DoubleSlitConfig, ExperimentOutcome, SternGerlachConfig, Starts,
};
use crate::guidance::IntegratorSettings;
use crate::hilbert::{
    ks_search, ks_search_parallel, load_ray_file, mermin_square_check, peres33, random_unitary,
    ContextHypergraph, HermitianOperator, MatrixJson,
};
use crate::nonlocality::{
    agreement, chsh_quantum, correspond, enumerate_local_strategies, records_csv, sample_epr,
    schroedinger_theorem_demo, MaxEntangledState, Side,
};
use crate::numerics::{Grid, Initializer, Potential, WaveFunction};
use crate::rng::{rng_for, stream};

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Output {
    pub checks: Vec<Check>,
    pub files: Vec<String>,
    /// Wall-clock timings, kept out of the result files so reruns are byte-identical.
    pub timings_ms: BTreeMap<String, f64>,
}

impl Output {
    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, pass, detail));
    }

    fn write_text(&mut self, out: &Path, name: &str, text: &str) -> Result<()> {
        std::fs::write(out.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Pretty JSON with every `elapsed_ms` entry moved into the timings.
    fn write_json(&mut self, out: &Path, name: &str, value: &impl Serialize) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        strip_timings(&mut v, name, &mut self.timings_ms);
        self.write_text(out, name, &(serde_json::to_string_pretty(&v)? + "\n"))
    }

    fn experiment(&mut self, out: &Path, outcome: &ExperimentOutcome, emit: usize) -> Result<()> {
        outcome.write(out, emit)?;
        let name = &outcome.experiment;
        self.files.push(format!("{name}_outcome.csv"));
        self.files.push(format!("{name}_summary.json"));
        let kept = emit.min(outcome.trajectories.len()).min(crate::experiments::MAX_EMITTED_TRAJECTORIES);
        if kept > 0 {
            self.files.push(format!("trajectories/{name}_NNNN.csv ({kept} files)"));
        }
        self.checks.extend(outcome.checks.iter().cloned());
        Ok(())
    }
}

fn strip_timings(v: &mut serde_json::Value, path: &str, into: &mut BTreeMap<String, f64>) {
    match v {
        serde_json::Value::Object(map) => {
            if let Some(t) = map.remove("elapsed_ms").and_then(|t| t.as_f64()) {
                into.insert(path.to_string(), t);
            }
            for (k, child) in map.iter_mut() {
                strip_timings(child, &format!("{path}/{k}"), into);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, child) in items.iter_mut().enumerate() {
                strip_timings(child, &format!("{path}/{i}"), into);
            }
        }
        _ => {}
    }
}

fn grid_1d(axis: (f64, f64, usize)) -> Result<Grid> {
    Grid::new_1d(axis.0, axis.1, axis.2)
}

pub fn double_slit(p: &Params, out: &Path) -> Result<Output> {
    let cfg = DoubleSlitConfig {
        separation: p.f64("separation")?,
        width: p.f64("width")?,
        momentum: p.f64("momentum")?,
        t_screen: p.f64("t-screen")?,
        slits: p.parse("slits")?,
        members: p.usize("members")?,
        seed: p.seed()?,
        tol: p.f64("tol")?,
        snapshot_interval: p.f64("snapshot-interval")?,
        grid_x: p.axis("grid-x")?,
        grid_y: p.axis("grid-y")?,
        ..DoubleSlitConfig::default()
    };
    let outcome = run_double_slit(&cfg)?;
    let mut o = Output::default();
    o.experiment(out, &outcome, p.usize("emit-trajectories")?)?;
    Ok(o)
}

pub fn stern_gerlach(p: &Params, out: &Path) -> Result<Output> {
    let starts = if p.is_empty("z0") {
        Starts::Sampled { n: p.usize("members")? }
    } else {
        Starts::Explicit { z0: p.list("z0")? }
    };
    let cfg = SternGerlachConfig {
        c_up: Complex64::new(p.f64("c-up")?, 0.0),
        c_down: Complex64::from_polar(p.f64("c-down")?, p.f64("phase")?),
        center: p.f64("center")?,
        width: p.f64("width")?,
        coupling: p.f64("coupling")?,
        tau: p.f64("tau")?,
        flight: p.f64("flight")?,
        orientation: p.parse("orientation")?,
        starts,
        seed: p.seed()?,
        grid: p.axis("grid")?,
        dt: p.f64("dt")?,
        tol: p.f64("tol")?,
        ..SternGerlachConfig::default()
    };
    let outcome = run_stern_gerlach(&cfg)?;
    let mut o = Output::default();
    o.experiment(out, &outcome, p.usize("emit-trajectories")?)?;
    let inputs = p.usize("contextuality-inputs")?;
    if inputs > 0 {
        let report = contextuality_witness(&cfg, inputs)?;
        o.write_json(out, "stern_gerlach_contextuality.json", &report)?;
        o.check(
            "contextuality",
            report.pass,
            format!(
                "same deflection {}/{}, label negated {}/{}",
                report.same_deflection, inputs, report.label_negated, inputs
            ),
        );
    }
    Ok(o)
}

pub fn box_experiment(p: &Params, out: &Path) -> Result<Output> {
    let cfg = BoxExperimentConfig {
        length: p.f64("length")?,
        n: p.usize("n")?,
        flight: p.f64("flight")?,
        members: p.usize("members")?,
        seed: p.seed()?,
        tol: p.f64("tol")?,
        points_per_unit: p.f64("points-per-unit")?,
        speed_cutoff: p.f64("speed-cutoff")?,
        rest_members: p.usize("rest-members")?,
        rest_time: p.f64("rest-time")?,
        ..BoxExperimentConfig::default()
    };
    let outcome = run_box_experiment(&cfg)?;
    let mut o = Output::default();
    o.experiment(out, &outcome, p.usize("emit-trajectories")?)?;
    Ok(o)
}

/// `name(key=value, ...)` with numeric values.
fn call_args(text: &str) -> Result<(String, BTreeMap<String, f64>)> {
    let text = text.trim();
    let (name, args) = match text.find('(') {
        Some(open) if text.ends_with(')') => (&text[..open], &text[open + 1..text.len() - 1]),
        _ => (text, ""),
    };
    let mut kv = BTreeMap::new();
    for item in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{item}`")))?;
        let v = v.trim().parse().map_err(|_| Error::Config(format!("`{v}` is not a number")))?;
        kv.insert(k.trim().to_string(), v);
    }
    Ok((name.trim().to_string(), kv))
}

/// `free`, `harmonic(omega=..)` or `box(a=.., b=.., height=..)`.
pub fn parse_potential(text: &str) -> Result<Potential> {
    let (name, kv) = call_args(text)?;
    let known: &[&str] = match name.as_str() {
        "free" => &[],
        "harmonic" => &["omega"],
        "box" => &["a", "b", "height"],
        other => return Err(Error::Config(format!("unknown potential `{other}`"))),
    };
    if let Some(bad) = kv.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown parameter `{bad}` for potential `{name}`")));
    }
    let get = |k: &str, d: f64| kv.get(k).copied().unwrap_or(d);
    Ok(match name.as_str() {
        "free" => Potential::Free,
        "harmonic" => Potential::Harmonic { omega: get("omega", 1.0) },
        _ => Potential::Box {
            a: get("a", 0.0),
            b: get("b", 1.0),
            height: get("height", crate::numerics::BOX_WALL_HEIGHT),
        },
    })
}

pub fn equivariance(p: &Params, out: &Path) -> Result<Output> {
    let case = p.str("case");
    let (init, potential, t, grid) = match case {
        "free-gaussian" => (Initializer::gaussian_1d(0.0, 1.0, 0.0), Potential::Free, 2.0, (-20.0, 20.0, 512)),
        "two-gaussian" => (
            Initializer::TwoGaussian {
                half_separation: 2.0,
                width: 0.5,
                momentum: 0.0,
            },
            Potential::Free,
            3.0,
            (-30.0, 30.0, 1024),
        ),
        "harmonic" => (
            Initializer::harmonic_ground(1.0),
            Potential::Harmonic { omega: 1.0 },
            1.0,
            (-10.0, 10.0, 256),
        ),
        other => return Err(Error::Config(format!("case: unknown `{other}`"))),
    };
    let init = if p.is_empty("initializer") {
        init
    } else {
        Initializer::parse(p.str("initializer"))?
    };
    let potential = if p.is_empty("potential") {
        potential
    } else {
        parse_potential(p.str("potential"))?
    };
    let t = if p.is_empty("t") { t } else { p.f64("t")? };
    let grid = if p.is_empty("grid") { grid } else { p.axis("grid")? };
    let settings = TransportSettings {
        dt: p.f64("dt")?,
        snapshot_interval: p.f64("snapshot-interval")?,
        integrator: IntegratorSettings {
            tol: p.f64("tol")?,
            outputs: 2,
            ..IntegratorSettings::default()
        },
    };
    let psi0 = WaveFunction::new(grid_1d(grid)?, &init)?;
    let report = equivariance_check(case, &psi0, &potential, t, p.usize("n")?, p.seed()?, &settings)?;
    let mut o = Output::default();
    o.write_json(out, "equivariance_report.json", &report)?;
    o.write_text(out, "equivariance_histogram.csv", &report.histogram.to_csv())?;
    o.check(
        "equivariance",
        report.pass,
        format!("KS={:.4e} threshold={:.4e} t={t} n={}", report.ks, report.threshold, report.n),
    );
    Ok(o)
}

pub fn ks_check(p: &Params, out: &Path) -> Result<Output> {
    let source = p.str("rays");
    let hg = if source == "peres33" {
        peres33()
    } else {
        load_ray_file(Path::new(source))?
    };
    let hg = match p.str("contexts") {
        "auto" => hg,
        "triads" => ContextHypergraph::triads_only(hg.rays().to_vec())?,
        other => return Err(Error::Config(format!("contexts: unknown `{other}`"))),
    };
    let report = if p.bool("parallel")? {
        ks_search_parallel(&hg)
    } else {
        ks_search(&hg)
    };
    let mut o = Output::default();
    o.write_json(out, "ks_report.json", &report)?;
    o.check(
        "search_complete",
        report.stats.complete || report.verdict() == "Satisfiable",
        format!(
            "verdict={} rays={} contexts={} nodes={} backtracks={}",
            report.verdict(),
            report.rays,
            report.contexts,
            report.stats.nodes,
            report.stats.backtracks
        ),
    );
    Ok(o)
}

pub fn mermin(_: &Params, out: &Path) -> Result<Output> {
    let report = mermin_square_check()?;
    let mut o = Output::default();
    o.write_json(out, "mermin_report.json", &report)?;
    let worst = report
        .lines
        .iter()
        .map(|l| l.commutator.max(l.product_residual))
        .fold(0.0, f64::max);
    o.check("operators", report.operators_valid && worst < 1e-12, format!("max line residual {worst:.1e}"));
    o.check(
        "no_value_map",
        report.satisfying_all == 0,
        format!("{}/{} assignments satisfy all lines", report.satisfying_all, report.assignments),
    );
    o.check(
        "relabelings",
        report.relabelings_contradictory == report.relabelings_checked,
        format!("{}/{} contradictory", report.relabelings_contradictory, report.relabelings_checked),
    );
    Ok(o)
}

#[derive(Serialize)]
struct EprReport {
    dim: usize,
    state: String,
    trials: usize,
    seed: u64,
    first: Side,
    eigenvalues: Vec<f64>,
    aligned_to_basis_1: bool,
    operator: MatrixJson,
    correspondent: MatrixJson,
    agreement: f64,
    frequencies: Vec<(f64, f64)>,
}

fn epr_operator(text: &str, n: usize, seed: u64) -> Result<HermitianOperator> {
    let text = text.trim();
    if text == "sz" {
        if n != 2 {
            return Err(Error::Config("operator sz needs dim = 2".into()));
        }
        return Ok(HermitianOperator::from_real_diagonal(&[1.0, -1.0]));
    }
    if text == "random" {
        return Ok(HermitianOperator::random(n, &mut rng_for(seed, stream::OPERATORS)));
    }
    let inner = text
        .strip_prefix("diag(")
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::Config(format!("operator: unknown `{text}`")))?;
    let values: Vec<f64> = inner
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| Error::Config(format!("operator: bad value `{v}`"))))
        .collect::<Result<_>>()?;
    if values.len() != n {
        return Err(Error::Config(format!("operator: {} values for dim {n}", values.len())));
    }
    Ok(HermitianOperator::from_real_diagonal(&values))
}

pub fn epr(p: &Params, out: &Path) -> Result<Output> {
    let seed = p.seed()?;
    let state_name = p.str("state");
    let state = match state_name {
        "singlet" => MaxEntangledState::singlet(),
        "standard" => MaxEntangledState::standard(p.usize("dim")?)?,
        "random" => {
            let n = p.usize("dim")?;
            let mut rng = rng_for(seed, stream::BASES);
            let b1 = random_unitary(n, &mut rng);
            MaxEntangledState::new(b1, random_unitary(n, &mut rng))?
        }
        other => return Err(Error::Config(format!("state: unknown `{other}`"))),
    };
    let n = state.dim();
    let op = epr_operator(p.str("operator"), n, seed)?;
    let first = match p.str("first") {
        "1" => Side::One,
        "2" => Side::Two,
        other => return Err(Error::Config(format!("first: expected 1 or 2, got `{other}`"))),
    };
    let trials = p.usize("trials")?;
    let pair = correspond(&op, &state)?;
    let records = sample_epr(&state, &op, trials, seed, first)?;

    let mut values = pair.eigenvalues.clone();
    values.dedup_by(|a, b| (*a - *b).abs() <= crate::nonlocality::DEGENERACY_TOL);
    let frequencies: Vec<(f64, f64)> = values
        .iter()
        .map(|v| (*v, records.iter().filter(|r| r.outcome_1 == *v).count() as f64 / trials as f64))
        .collect();
    let agree = agreement(&records);

    let mut o = Output::default();
    o.write_text(out, "epr_records.csv", &records_csv(&records))?;
    o.write_json(
        out,
        "epr_report.json",
        &EprReport {
            dim: n,
            state: state_name.to_string(),
            trials,
            seed,
            first,
            eigenvalues: pair.eigenvalues.clone(),
            aligned_to_basis_1: pair.aligned_to_basis_1,
            operator: MatrixJson::from(op.matrix()),
            correspondent: MatrixJson::from(pair.o_tilde.matrix()),
            agreement: agree,
            frequencies: frequencies.clone(),
        },
    )?;
    let agreeing = records.iter().filter(|r| r.outcome_1 == r.outcome_2).count();
    o.check("perfect_correlation", agree == 1.0, format!("{agreeing}/{trials} trials agree"));
    let on_spectrum = records
        .iter()
        .all(|r| values.contains(&r.outcome_1) && values.contains(&r.outcome_2));
    o.check("outcomes_are_eigenvalues", on_spectrum, format!("{} distinct outcomes", values.len()));
    let mut worst = 0.0f64;
    let mut ok = true;
    for (v, f) in &frequencies {
        let mult = pair.eigenvalues.iter().filter(|l| (*l - v).abs() <= crate::nonlocality::DEGENERACY_TOL).count();
        let prob = mult as f64 / n as f64;
        let sigma = (prob * (1.0 - prob) / trials as f64).sqrt();
        let z = if sigma > 0.0 { (f - prob).abs() / sigma } else { 0.0 };
        worst = worst.max(z);
        ok &= z <= 3.0;
    }
    o.check("marginals_uniform", ok, format!("largest deviation {worst:.2} sigma"));
    if state_name == "singlet" && p.str("operator") == "sz" {
        let d = pair.o_tilde.distance(&op.neg());
        o.check("correspondent_is_minus_o", d < 1e-12, format!("|O~ + O| = {d:.1e}"));
    }
    Ok(o)
}

#[derive(Serialize)]
struct ChshFile {
    quantum: crate::nonlocality::ChshReport,
    local: crate::nonlocality::LocalBound,
}

pub fn chsh(p: &Params, out: &Path) -> Result<Output> {
    let angles: [f64; 4] = p
        .list("angles")?
        .try_into()
        .map_err(|_| Error::Config("angles: expected four values a,b,a',b'".into()))?;
    let quantum = chsh_quantum(&MaxEntangledState::singlet(), angles, p.usize("trials")?, p.seed()?)?;
    let local = enumerate_local_strategies();
    let mut o = Output::default();
    o.check(
        "local_bound",
        local.max_abs_s == 2 && local.witness.s().abs() == 2,
        format!("max |S| over 16 deterministic strategies = {}", local.max_abs_s),
    );
    let tsirelson = 2.0 * std::f64::consts::SQRT_2;
    let violates = quantum.s_exact.abs() > 2.0 + 1e-12;
    o.check(
        "quantum_value",
        quantum.s_exact.abs() <= tsirelson + 1e-12,
        format!(
            "S = {:.6} (|S| {} 2, Tsirelson bound {:.6})",
            quantum.s_exact,
            if violates { ">" } else { "<=" },
            tsirelson
        ),
    );
    o.check(
        "sampled_within_3_sigma",
        quantum.within_3_sigma,
        format!("S_sampled = {:.5} +- {:.5}", quantum.s_sampled, quantum.sigma),
    );
    o.write_json(out, "chsh_report.json", &ChshFile { quantum, local })?;
    Ok(o)
}

pub fn schroedinger_demo(p: &Params, out: &Path) -> Result<Output> {
    let report = schroedinger_theorem_demo(p.usize("dim")?, p.seed()?, p.usize("trials")?)?;
    let mut o = Output::default();
    for s in &report.steps {
        o.check(&s.id, s.pass, s.statement.clone());
    }
    o.write_json(out, "schroedinger_report.json", &report)?;
    Ok(o)
}


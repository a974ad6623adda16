//! Kochen-Specker colourings of spin-1 rays.
//!
//! A ray `u` stands for the observable `S_u^2` (eigenvalues 0 and 1). For an
//! orthogonal triad the three squares commute and sum to 2, so a value map
//! must give each triad exactly one 0. An orthogonal pair whose completing ray
//! is not in the set still forbids two zeros.

use rayon::join;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::Instant;

use super::operator::HermitianOperator;
use crate::error::{Error, Result};

pub type Ray = [f64; 3];

/// Orthogonality and ray-identity tolerance.
pub const RAY_TOL: f64 = 1e-10;

fn dot(a: &Ray, b: &Ray) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(r: Ray) -> Result<Ray> {
    let n = dot(&r, &r).sqrt();
    if !(n > RAY_TOL) || !n.is_finite() {
        return Err(Error::InvalidArgument(format!("ray {r:?} has zero or non-finite length")));
    }
    Ok(r.map(|x| x / n))
}

/// Rays `r` and `-r` are the same measurement.
fn same_ray(a: &Ray, b: &Ray) -> bool {
    (dot(a, b).abs() - 1.0).abs() < RAY_TOL
}

/// Rays plus the contexts (orthogonal triads or pairs) that tie them together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextHypergraph {
    rays: Vec<Ray>,
    contexts: Vec<Vec<usize>>,
}

impl ContextHypergraph {
    /// Normalizes the rays and validates every context.
    pub fn new(rays: Vec<Ray>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        let rays = rays.into_iter().map(normalize).collect::<Result<Vec<_>>>()?;
        for i in 0..rays.len() {
            for j in 0..i {
                if same_ray(&rays[i], &rays[j]) {
                    return Err(Error::InvalidArgument(format!("rays {j} and {i} coincide up to sign")));
                }
            }
        }
        for (k, ctx) in contexts.iter().enumerate() {
            if !(2..=3).contains(&ctx.len()) {
                return Err(Error::InvalidArgument(format!("context {k} must hold 2 or 3 rays")));
            }
            for (a, &i) in ctx.iter().enumerate() {
                if i >= rays.len() {
                    return Err(Error::InvalidArgument(format!("context {k} names missing ray {i}")));
                }
                for &j in &ctx[..a] {
                    let d = dot(&rays[i], &rays[j]).abs();
                    if i == j || d > RAY_TOL {
                        return Err(Error::NonOrthonormal(d));
                    }
                }
            }
        }
        Ok(Self { rays, contexts })
    }

    /// Contexts are all mutually orthogonal triples of the given rays, plus
    /// the orthogonal pairs that no triad covers.
    pub fn from_rays(rays: Vec<Ray>) -> Result<Self> {
        Ok(Self::triads_only(rays)?.with_orthogonal_pairs())
    }

    /// Contexts are the mutually orthogonal triples only.
    pub fn triads_only(rays: Vec<Ray>) -> Result<Self> {
        let hg = Self::new(rays, Vec::new())?;
        let contexts = hg.orthogonal_triads();
        Self::new(hg.rays, contexts)
    }

    fn orthogonal(&self, i: usize, j: usize) -> bool {
        dot(&self.rays[i], &self.rays[j]).abs() < RAY_TOL
    }

    fn orthogonal_triads(&self) -> Vec<Vec<usize>> {
        let n = self.rays.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !self.orthogonal(i, j) {
                    continue;
                }
                for k in j + 1..n {
                    if self.orthogonal(i, k) && self.orthogonal(j, k) {
                        out.push(vec![i, j, k]);
                    }
                }
            }
        }
        out
    }

    /// Adds every orthogonal pair not already inside a context.
    pub fn with_orthogonal_pairs(mut self) -> Self {
        let n = self.rays.len();
        for i in 0..n {
            for j in i + 1..n {
                let covered = self.contexts.iter().any(|c| c.contains(&i) && c.contains(&j));
                if self.orthogonal(i, j) && !covered {
                    self.contexts.push(vec![i, j]);
                }
            }
        }
        self
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn triads(&self) -> usize {
        self.contexts.iter().filter(|c| c.len() == 3).count()
    }

    /// The text format read by [`parse_ray_file`].
    pub fn to_ray_file(&self) -> String {
        let mut out = String::new();
        for r in &self.rays {
            let _ = writeln!(out, "{:.17} {:.17} {:.17}", r[0], r[1], r[2]);
        }
        out.push_str("[contexts]\n");
        for ctx in &self.contexts {
            let line: Vec<String> = ctx.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

fn parse_component(tok: &str) -> Option<f64> {
    let (sign, body) = match tok.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, tok.strip_prefix('+').unwrap_or(tok)),
    };
    match body {
        "sqrt2" | "sqrt(2)" => Some(sign * std::f64::consts::SQRT_2),
        _ => body.parse::<f64>().ok().map(|v| sign * v),
    }
}

/// Reads rays (three reals per line; `sqrt2` allowed) and an optional
/// `[contexts]` section of ray indices. `#` starts a comment. Without a
/// contexts section the contexts are derived as in [`ContextHypergraph::from_rays`].
pub fn parse_ray_file(text: &str) -> Result<ContextHypergraph> {
    let mut rays = Vec::new();
    let mut contexts: Option<Vec<Vec<usize>>> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: n + 1, msg };
        if line.eq_ignore_ascii_case("[contexts]") {
            if contexts.is_some() {
                return Err(err("duplicate [contexts] section".into()));
            }
            contexts = Some(Vec::new());
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match contexts.as_mut() {
            None => {
                if toks.len() != 3 {
                    return Err(err(format!("expected 3 components, found {}", toks.len())));
                }
                let mut r = [0.0; 3];
                for (x, t) in r.iter_mut().zip(&toks) {
                    *x = parse_component(t).ok_or_else(|| err(format!("`{t}` is not a number")))?;
                }
                rays.push(r);
            }
            Some(ctxs) => {
                let idx = toks
                    .iter()
                    .map(|t| t.parse::<usize>().map_err(|_| err(format!("`{t}` is not a ray index"))))
                    .collect::<Result<Vec<_>>>()?;
                ctxs.push(idx);
            }
        }
    }
    if rays.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no rays".into(),
        });
    }
    match contexts {
        Some(c) => ContextHypergraph::new(rays, c),
        None => ContextHypergraph::from_rays(rays),
    }
}

pub fn load_ray_file(path: &std::path::Path) -> Result<ContextHypergraph> {
    parse_ray_file(&std::fs::read_to_string(path)?)
}

/// Peres' 33 rays: components in `{0, +-1, +-sqrt2}` (at most one `sqrt2`,
/// not all three of modulus one), identified up to sign, with their 16
/// orthogonal triads and 24 further orthogonal pairs.
pub fn peres33() -> ContextHypergraph {
    let vals = [0.0, 1.0, -1.0, std::f64::consts::SQRT_2, -std::f64::consts::SQRT_2];
    let mut rays: Vec<Ray> = Vec::new();
    for a in vals {
        for b in vals {
            for c in vals {
                let v = [a, b, c];
                let roots = v.iter().filter(|x| x.abs() > 1.2).count();
                let ones = v.iter().filter(|x| (x.abs() - 1.0).abs() < 1e-12).count();
                if v.iter().all(|x| *x == 0.0) || roots > 1 || ones == 3 {
                    continue;
                }
                let r = normalize(v).expect("non-zero");
                if !rays.iter().any(|s| same_ray(s, &r)) {
                    rays.push(r);
                }
            }
        }
    }
    ContextHypergraph::from_rays(rays).expect("generated rays are distinct")
}

/// `ray -> {0, 1}`; `None` where unassigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueAssignment(pub Vec<Option<u8>>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub context: usize,
    pub values: Vec<u8>,
    pub reason: String,
}

/// Violations of the per-context rules: triads must be a permutation of
/// `(1, 1, 0)`, pairs must not be `(0, 0)`, and values must be 0 or 1.
pub fn check_value_map(assignment: &ValueAssignment, hg: &ContextHypergraph) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for (k, ctx) in hg.contexts.iter().enumerate() {
        let values = ctx
            .iter()
            .map(|&i| {
                assignment
                    .0
                    .get(i)
                    .copied()
                    .flatten()
                    .ok_or_else(|| Error::IncompleteAssignment(format!("ray {i} has no value")))
            })
            .collect::<Result<Vec<u8>>>()?;
        let reason = if values.iter().any(|&v| v > 1) {
            Some("values must be eigenvalues of S^2 (0 or 1)".to_string())
        } else {
            let sum: u8 = values.iter().sum();
            match ctx.len() {
                3 if sum != 2 => Some(format!("triad sums to {sum}, the squares sum to 2")),
                2 if sum == 0 => Some("orthogonal pair cannot both be 0".to_string()),
                _ => None,
            }
        };
        if let Some(reason) = reason {
            out.push(Violation {
                context: k,
                values,
                reason,
            });
        }
    }
    Ok(out)
}

/// Functional relation between operators that a value map must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `ops[result] = ops[a] + ops[b]`.
    Sum { a: usize, b: usize, result: usize },
    /// `ops[result] = ops[a] ops[b]`.
    Product { a: usize, b: usize, result: usize },
}

/// Checks `v(A)` is an eigenvalue of `A` for each operator, and the sum and
/// product rules on the supplied commuting relations.
pub fn check_operator_map(
    ops: &[HermitianOperator],
    values: &[Option<f64>],
    relations: &[Relation],
) -> Result<Vec<String>> {
    if values.len() != ops.len() {
        return Err(Error::DimensionMismatch {
            expected: ops.len(),
            found: values.len(),
        });
    }
    let get = |i: usize| -> Result<f64> {
        values
            .get(i)
            .copied()
            .flatten()
            .ok_or_else(|| Error::IncompleteAssignment(format!("operator {i} has no value")))
    };
    let mut out = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let v = get(i)?;
        if !op.eigendecompose().values.iter().any(|l| (l - v).abs() < 1e-9) {
            out.push(format!("v(op {i}) = {v} is not an eigenvalue"));
        }
    }
    for rel in relations {
        let (a, b, r, is_sum) = match *rel {
            Relation::Sum { a, b, result } => (a, b, result, true),
            Relation::Product { a, b, result } => (a, b, result, false),
        };
        if [a, b, r].iter().any(|&i| i >= ops.len()) {
            return Err(Error::InvalidArgument(format!("relation {rel:?} names a missing operator")));
        }
        if ops[a].commutator_norm(&ops[b]) > 1e-12 {
            return Err(Error::InvalidArgument(format!("relation {rel:?} joins non-commuting operators")));
        }
        let (va, vb, vr) = (get(a)?, get(b)?, get(r)?);
        let want = if is_sum { va + vb } else { va * vb };
        if (want - vr).abs() > 1e-9 {
            out.push(format!("{rel:?}: expected {want}, assigned {vr}"));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Branching decisions taken.
    pub nodes: u64,
    pub backtracks: u64,
    pub max_depth: usize,
    /// True when the whole tree was explored (always, for an Unsatisfiable verdict).
    pub complete: bool,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum KsOutcome {
    Satisfiable { witness: ValueAssignment },
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub rays: usize,
    pub contexts: usize,
    pub triads: usize,
    #[serde(flatten)]
    pub outcome: KsOutcome,
    pub stats: SearchStats,
}

impl KsReport {
    pub fn verdict(&self) -> &'static str {
        match self.outcome {
            KsOutcome::Satisfiable { .. } => "Satisfiable",
            KsOutcome::Unsatisfiable => "Unsatisfiable",
        }
    }
}

#[derive(Clone)]
struct Solver<'a> {
    hg: &'a ContextHypergraph,
    ray_contexts: Vec<Vec<usize>>,
    values: Vec<i8>,
    trail: Vec<usize>,
    stats: SearchStats,
}

enum Mode {
    First,
    Count(u64),
}

impl<'a> Solver<'a> {
    fn new(hg: &'a ContextHypergraph) -> Self {
        let mut ray_contexts = vec![Vec::new(); hg.rays.len()];
        for (k, c) in hg.contexts.iter().enumerate() {
            for &i in c {
                ray_contexts[i].push(k);
            }
        }
        Self {
            hg,
            ray_contexts,
            values: vec![-1; hg.rays.len()],
            trail: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    fn tally(&self, k: usize) -> (usize, usize, usize) {
        let (mut zeros, mut ones, mut free) = (0, 0, 0);
        for &i in &self.hg.contexts[k] {
            match self.values[i] {
                0 => zeros += 1,
                1 => ones += 1,
                _ => free += 1,
            }
        }
        (zeros, ones, free)
    }

    fn context_ok(&self, k: usize) -> bool {
        let (zeros, ones, free) = self.tally(k);
        match self.hg.contexts[k].len() {
            3 => zeros <= 1 && ones <= 2 && (free > 0 || zeros == 1),
            _ => zeros <= 1,
        }
    }

    fn assign(&mut self, i: usize, v: i8) {
        self.values[i] = v;
        self.trail.push(i);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let i = self.trail.pop().unwrap();
            self.values[i] = -1;
        }
    }

    /// Sets `i = v` and applies forced consequences; false on conflict.
    fn propagate(&mut self, i: usize, v: i8) -> bool {
        let mut queue = vec![(i, v)];
        while let Some((i, v)) = queue.pop() {
            match self.values[i] {
                -1 => self.assign(i, v),
                cur if cur == v => continue,
                _ => return false,
            }
            for &k in &self.ray_contexts[i] {
                if !self.context_ok(k) {
                    return false;
                }
                let (zeros, ones, free) = self.tally(k);
                if free == 0 {
                    continue;
                }
                let ctx = &self.hg.contexts[k];
                let forced = if zeros == 1 {
                    Some(1)
                } else if ctx.len() == 3 && ones == 2 {
                    Some(0)
                } else {
                    None
                };
                if let Some(f) = forced {
                    for &j in ctx {
                        if self.values[j] == -1 {
                            queue.push((j, f));
                        }
                    }
                }
            }
        }
        true
    }

    /// Most-constrained branching ray: in the context with the fewest free rays.
    fn pick(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for k in 0..self.hg.contexts.len() {
            let (_, _, free) = self.tally(k);
            if free > 0 && best.map_or(true, |(f, _)| free < f) {
                best = Some((free, k));
            }
        }
        best.map(|(_, k)| *self.hg.contexts[k].iter().find(|&&i| self.values[i] == -1).unwrap())
    }

    fn free_rays(&self) -> u32 {
        self.values.iter().filter(|&&v| v == -1).count() as u32
    }

    /// Returns true to stop (a witness was found in `First` mode).
    fn search(&mut self, depth: usize, mode: &mut Mode) -> bool {
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let Some(i) = self.pick() else {
            // rays outside every context are unconstrained
            return match mode {
                Mode::First => {
                    for v in self.values.iter_mut().filter(|v| **v == -1) {
                        *v = 1;
                    }
                    true
                }
                Mode::Count(n) => {
                    *n += 1u64 << self.free_rays();
                    false
                }
            };
        };
        for v in [1, 0] {
            self.stats.nodes += 1;
            let mark = self.trail.len();
            if self.propagate(i, v) && self.search(depth + 1, mode) {
                return true;
            }
            self.undo_to(mark);
            self.stats.backtracks += 1;
        }
        false
    }

    fn witness(&self) -> ValueAssignment {
        ValueAssignment(self.values.iter().map(|&v| if v < 0 { None } else { Some(v as u8) }).collect())
    }
}

fn report(hg: &ContextHypergraph, outcome: KsOutcome, mut stats: SearchStats, start: Instant) -> KsReport {
    stats.complete = matches!(outcome, KsOutcome::Unsatisfiable) || stats.complete;
    stats.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    KsReport {
        rays: hg.rays.len(),
        contexts: hg.contexts.len(),
        triads: hg.triads(),
        outcome,
        stats,
    }
}

/// Complete backtracking search for a `{0, 1}` colouring.
pub fn ks_search(hg: &ContextHypergraph) -> KsReport {
    let start = Instant::now();
    let mut s = Solver::new(hg);
    let found = s.search(0, &mut Mode::First);
    let outcome = if found {
        KsOutcome::Satisfiable { witness: s.witness() }
    } else {
        KsOutcome::Unsatisfiable
    };
    report(hg, outcome, s.stats, start)
}

/// Number of valid colourings, by exhausting the tree.
pub fn ks_count(hg: &ContextHypergraph) -> (u64, SearchStats) {
    let start = Instant::now();
    let mut s = Solver::new(hg);
    let mut mode = Mode::Count(0);
    s.search(0, &mut mode);
    s.stats.complete = true;
    s.stats.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let Mode::Count(n) = mode else { unreachable!() };
    (n, s.stats)
}

/// Same verdict as [`ks_search`], with the two root subtrees explored in parallel.
pub fn ks_search_parallel(hg: &ContextHypergraph) -> KsReport {
    let start = Instant::now();
    let root = Solver::new(hg);
    let Some(i) = root.pick() else {
        return ks_search(hg);
    };
    let branch = |v: i8| {
        let mut s = root.clone();
        s.stats.nodes += 1;
        let ok = s.propagate(i, v) && s.search(1, &mut Mode::First);
        (ok, s)
    };
    let ((ok1, s1), (ok0, s0)) = join(|| branch(1), || branch(0));
    let mut stats = SearchStats {
        nodes: s1.stats.nodes + s0.stats.nodes,
        backtracks: s1.stats.backtracks + s0.stats.backtracks,
        max_depth: s1.stats.max_depth.max(s0.stats.max_depth),
        complete: false,
        elapsed_ms: 0.0,
    };
    let outcome = if ok1 {
        KsOutcome::Satisfiable { witness: s1.witness() }
    } else if ok0 {
        KsOutcome::Satisfiable { witness: s0.witness() }
    } else {
        stats.complete = true;
        KsOutcome::Unsatisfiable
    };
    report(hg, outcome, stats, start)
}

/// Exhaustive `2^rays` enumeration; only for small sets.
pub fn brute_force_count(hg: &ContextHypergraph) -> Result<u64> {
    let n = hg.rays.len();
    if n > 24 {
        return Err(Error::InvalidArgument(format!("{n} rays is too many to enumerate")));
    }
    let mut count = 0;
    for bits in 0u64..(1 << n) {
        let a = ValueAssignment((0..n).map(|i| Some(((bits >> i) & 1) as u8)).collect());
        if check_value_map(&a, hg)?.is_empty() {
            count += 1;
        }
    }
    Ok(count)
}

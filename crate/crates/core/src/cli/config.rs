//! Parameter tables, the `key = value` config file and flag/config/default resolution.

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// One tunable of a subcommand. The same key names the flag, the config entry
/// and the manifest entry.
#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn p(key: &'static str, default: &'static str, help: &'static str) -> Param {
    Param { key, default, help }
}

pub const SEED: Param = p("seed", "0", "64-bit seed all random streams derive from");

pub const SUBCOMMANDS: &[(&str, &str)] = &[
    ("double-slit", "Two-slit interference with Bohmian trajectories"),
    ("stern-gerlach", "Spin measurement by a field gradient, with the orientation-reversal test"),
    ("box", "Particle at rest in a box, released and measured by time of flight"),
    ("equivariance", "Transport |psi_0|^2 samples and compare with |psi_t|^2"),
    ("ks-check", "Exhaustive 0/1 value-map search over a ray set"),
    ("mermin", "Mermin-square value-map contradiction"),
    ("epr", "Perfect correlations on a maximally entangled state"),
    ("chsh", "CHSH combination: local bound versus the quantum singlet"),
    ("schroedinger-demo", "Perfect correlations + locality => value map => contradiction"),
    ("selftest", "Quick run of the built-in example suite"),
];

pub fn params(subcommand: &str) -> &'static [Param] {
    match subcommand {
        "double-slit" => {
            const T: &[Param] = &[
                p("separation", "6.4", "distance between slit centres"),
                p("width", "0.8", "Gaussian spread of each slit packet"),
                p("momentum", "8", "forward momentum"),
                p("t-screen", "3", "time of arrival at the screen"),
                p("slits", "both", "both | upper | lower"),
                p("members", "10000", "ensemble size"),
                p("tol", "1e-6", "integrator tolerance"),
                p("snapshot-interval", "0.02", "spacing of stored wave-function snapshots"),
                p("grid-x", "-16,16,64", "forward (co-moving) axis lo,hi,points"),
                p("grid-y", "-24,24,256", "transverse axis lo,hi,points"),
                p("emit-trajectories", "200", "number of trajectory files written (max 200)"),
            ];
            T
        }
        "stern-gerlach" => {
            const T: &[Param] = &[
                p("c-up", "0.7071067811865476", "spin-up amplitude"),
                p("c-down", "0.7071067811865476", "spin-down amplitude"),
                p("phase", "0", "relative phase of the spin-down amplitude"),
                p("center", "0", "initial packet centre"),
                p("width", "1", "initial packet spread"),
                p("coupling", "5", "field-gradient coupling"),
                p("tau", "0.5", "pulse duration"),
                p("flight", "5", "free flight after the pulse"),
                p("orientation", "normal", "normal | reversed"),
                p("members", "10000", "sampled starts (ignored when z0 is given)"),
                p("z0", "", "explicit comma-separated starting positions"),
                p("contextuality-inputs", "100", "single-shot inputs for the orientation test (0 disables)"),
                p("grid", "-40,40,1024", "lo,hi,points"),
                p("dt", "1e-3", "split-step time step during the pulse"),
                p("tol", "1e-6", "integrator tolerance"),
                p("emit-trajectories", "200", "number of trajectory files written (max 200)"),
            ];
            T
        }
        "box" => {
            const T: &[Param] = &[
                p("length", "1", "box length L"),
                p("n", "1", "eigenstate index"),
                p("flight", "5", "time of flight T"),
                p("members", "100000", "ensemble size"),
                p("tol", "1e-4", "integrator tolerance"),
                p("points-per-unit", "64", "flight-grid resolution"),
                p("speed-cutoff", "4", "flight grid holds speeds up to this many n pi / L"),
                p("rest-members", "200", "trajectories integrated inside the box"),
                p("rest-time", "10", "duration of the in-box integration"),
                p("emit-trajectories", "200", "number of trajectory files written (max 200)"),
            ];
            T
        }
        "equivariance" => {
            const T: &[Param] = &[
                p("case", "free-gaussian", "free-gaussian | two-gaussian | harmonic"),
                p("initializer", "", "override, e.g. gaussian(center=0, width=1, k=0)"),
                p("potential", "", "override: free | harmonic(omega=1) | box(a=0, b=1, height=1e4)"),
                p("t", "", "transport time (case default if empty)"),
                p("grid", "", "lo,hi,points (case default if empty)"),
                p("n", "100000", "sample count"),
                p("dt", "1e-3", "split-step time step"),
                p("snapshot-interval", "0.01", "spacing of stored snapshots"),
                p("tol", "1e-6", "integrator tolerance"),
            ];
            T
        }
        "ks-check" => {
            const T: &[Param] = &[
                p("rays", "peres33", "peres33 or a path to a ray file"),
                p("contexts", "auto", "auto (triads + orthogonal pairs) | triads"),
                p("parallel", "false", "split the search at the root"),
            ];
            T
        }
        "mermin" => &[],
        "epr" => {
            const T: &[Param] = &[
                p("state", "singlet", "singlet | standard | random"),
                p("dim", "2", "factor dimension (standard and random states)"),
                p("operator", "sz", "sz | random | diag(v1, v2, ...)"),
                p("trials", "10000", "number of measurement trials"),
                p("first", "2", "side measured first: 1 | 2"),
            ];
            T
        }
        "chsh" => {
            const T: &[Param] = &[
                p("angles", "0,pi/4,pi/2,3pi/4", "analyzer angles a,b,a',b' in radians"),
                p("trials", "100000", "trials per setting pair"),
            ];
            T
        }
        "schroedinger-demo" => {
            const T: &[Param] = &[
                p("dim", "4", "factor dimension (a multiple of 4)"),
                p("trials", "1000", "EPR trials per operator"),
            ];
            T
        }
        _ => &[],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Default,
    Config,
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub value: String,
    pub source: Source,
}

/// Parsed config file: top-level entries plus one table per `[section]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

const TOP: &str = "";

impl ConfigFile {
    /// Parses `key = value` lines with optional `[subcommand]` sections and `#` comments.
    /// Every key is checked against the table of its section.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = TOP.to_string();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config(format!("line {}: {msg}", i + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SUBCOMMANDS.iter().any(|(s, _)| *s == name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                current = name.to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let (k, v) = (k.trim().replace('_', "-"), v.trim().trim_matches('"').to_string());
            let known = k == SEED.key || (current != TOP && params(&current).iter().any(|p| p.key == k));
            if !known {
                let place = if current == TOP { "top level".to_string() } else { format!("[{current}]") };
                return Err(err(format!("unknown key `{k}` at {place}")));
            }
            if sections.entry(current.clone()).or_default().insert(k.clone(), v).is_some() {
                return Err(err(format!("duplicate key `{k}`")));
            }
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn lookup(&self, subcommand: &str, key: &str) -> Option<&String> {
        self.sections
            .get(subcommand)
            .and_then(|s| s.get(key))
            .or_else(|| self.sections.get(TOP).and_then(|s| s.get(key)))
    }
}

/// Resolved parameters of one run: flags beat the config file, which beats the defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    #[serde(flatten)]
    values: BTreeMap<String, Resolved>,
}

impl Params {
    pub fn resolve(subcommand: &str, config: Option<&ConfigFile>, flags: &BTreeMap<String, String>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for param in std::iter::once(&SEED).chain(params(subcommand)) {
            let resolved = if let Some(v) = flags.get(param.key) {
                Resolved { value: v.clone(), source: Source::Flag }
            } else if let Some(v) = config.and_then(|c| c.lookup(subcommand, param.key)) {
                Resolved { value: v.clone(), source: Source::Config }
            } else {
                Resolved { value: param.default.to_string(), source: Source::Default }
            };
            values.insert(param.key.to_string(), resolved);
        }
        if let Some(bad) = flags.keys().find(|k| !values.contains_key(*k)) {
            return Err(Error::Config(format!("unknown parameter `{bad}` for {subcommand}")));
        }
        Ok(Self { values })
    }

    pub fn str(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(|r| r.value.as_str())
            .unwrap_or_else(|| panic!("parameter `{key}` is not declared"))
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.values.get(key).map(|r| r.source)
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.str(key);
        v.trim()
            .parse()
            .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parse(key)?;
        if !v.is_finite() {
            return Err(Error::Config(format!("{key}: must be finite")));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parse(key)
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.parse(key)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        self.parse(key)
    }

    pub fn seed(&self) -> Result<u64> {
        self.u64(SEED.key)
    }

    /// `lo,hi,points`.
    pub fn axis(&self, key: &str) -> Result<(f64, f64, usize)> {
        let v = self.str(key);
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("{key}: expected lo,hi,points, got `{v}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok((
            parts[0].parse().map_err(|_| bad())?,
            parts[1].parse().map_err(|_| bad())?,
            parts[2].parse().map_err(|_| bad())?,
        ))
    }

    /// Comma-separated numbers; `pi`, `k pi`, `pi/d` and `k pi/d` are accepted.
    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.str(key);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_number(s).ok_or_else(|| Error::Config(format!("{key}: cannot parse `{s}`"))))
            .collect()
    }

    pub fn is_empty(&self, key: &str) -> bool {
        self.str(key).trim().is_empty()
    }
}

fn parse_number(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let s = s.replace(' ', "");
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().ok()?),
        None => (s.clone(), 1.0),
    };
    let (sign, body) = match num.strip_prefix('-') {
        Some(rest) => (-1.0, rest.to_string()),
        None => (1.0, num),
    };
    let k = body.strip_suffix("pi")?.trim_end_matches('*');
    let k = if k.is_empty() { 1.0 } else { k.parse::<f64>().ok()? };
    Some(sign * k * std::f64::consts::PI / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("0.5"), Some(0.5));
        assert_eq!(parse_number("pi"), Some(PI));
        assert_eq!(parse_number("3pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_number("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_number("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_number("tau"), None);
    }

    #[test]
    fn flags_beat_config_beat_defaults() {
        let cfg = ConfigFile::parse("seed = 5\n[chsh]\ntrials = 10\n[epr]\ntrials = 3\n").unwrap();
        let flags = BTreeMap::from([("angles".to_string(), "0,0,0,0".to_string())]);
        let p = Params::resolve("chsh", Some(&cfg), &flags).unwrap();
        assert_eq!(p.seed().unwrap(), 5);
        assert_eq!(p.source("seed"), Some(Source::Config));
        assert_eq!(p.usize("trials").unwrap(), 10);
        assert_eq!(p.source("angles"), Some(Source::Flag));
        assert_eq!(p.list("angles").unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::parse("[chsh]\nbogus = 1\n").is_err());
        assert!(ConfigFile::parse("trials = 1\n").is_err());
        assert!(ConfigFile::parse("[nope]\n").is_err());
        assert!(ConfigFile::parse("[chsh]\ntrials = 1\ntrials = 2\n").is_err());
        assert!(ConfigFile::parse("[chsh]\njust text\n").is_err());
        let flags = BTreeMap::from([("bogus".to_string(), "1".to_string())]);
        assert!(Params::resolve("chsh", None, &flags).is_err());
    }
}

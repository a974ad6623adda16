//! Command-line front end: `pilotwave <subcommand> [--seed N] [--out DIR] [--config FILE] [--key value ...]`.
//!
//! Exit status: 0 all checks passed, 1 a check failed, 2 usage or config error,
//! 3 numerical failure.

mod commands;
pub mod config;
mod selftest;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use config::{params, ConfigFile, Params, SEED, SUBCOMMANDS};

pub use commands::parse_potential;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_OUT: &str = "pilotwave-out";

fn command() -> Command {
    let mut cmd = Command::new("pilotwave")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Pilot-wave simulations and finite-dimensional no-hidden-variables checks")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in SUBCOMMANDS {
        let mut sub = Command::new(*name)
            .about(*about)
            .arg(
                Arg::new(SEED.key)
                    .long(SEED.key)
                    .value_name("N")
                    .help(SEED.help)
                    .action(ArgAction::Set),
            )
            .arg(
                Arg::new("out")
                    .long("out")
                    .value_name("DIR")
                    .help("output directory")
                    .default_value(DEFAULT_OUT),
            )
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .help("key = value file with [subcommand] sections; flags take precedence"),
            );
        for p in params(name) {
            let help = if p.default.is_empty() {
                p.help.to_string()
            } else {
                format!("{} [default: {}]", p.help, p.default)
            };
            sub = sub.arg(
                Arg::new(p.key)
                    .long(p.key)
                    .value_name("VALUE")
                    .help(help)
                    .allow_hyphen_values(true)
                    .action(ArgAction::Set),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn flag_values(name: &str, m: &ArgMatches) -> BTreeMap<String, String> {
    std::iter::once(&SEED)
        .chain(params(name))
        .filter_map(|p| m.get_one::<String>(p.key).map(|v| (p.key.to_string(), v.clone())))
        .collect()
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_numerical() => EXIT_NUMERICAL,
        Error::Assertion(_) => EXIT_CHECK_FAILED,
        Error::Step { source, .. } => exit_code(source),
        _ => EXIT_USAGE,
    }
}

fn dispatch(name: &str, p: &Params, out: &Path) -> Result<commands::Output> {
    match name {
        "double-slit" => commands::double_slit(p, out),
        "stern-gerlach" => commands::stern_gerlach(p, out),
        "box" => commands::box_experiment(p, out),
        "equivariance" => commands::equivariance(p, out),
        "ks-check" => commands::ks_check(p, out),
        "mermin" => commands::mermin(p, out),
        "epr" => commands::epr(p, out),
        "chsh" => commands::chsh(p, out),
        "schroedinger-demo" => commands::schroedinger_demo(p, out),
        "selftest" => selftest::selftest(p, out),
        other => Err(Error::Config(format!("unknown subcommand `{other}`"))),
    }
}

fn write_manifest(
    out: &Path,
    name: &str,
    p: &Params,
    config: Option<&PathBuf>,
    result: std::result::Result<&commands::Output, &Error>,
) -> Result<()> {
    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let (status, files, timings, pass) = match result {
        Ok(o) => (
            "completed".to_string(),
            o.files.clone(),
            o.timings_ms.clone(),
            o.checks.iter().all(|c| c.pass),
        ),
        Err(e) => (format!("error: {e}"), Vec::new(), BTreeMap::new(), false),
    };
    let manifest = json!({
        "tool": "pilotwave",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "seed": p.seed().ok(),
        "parameters": p,
        "config_file": config.map(|c| c.display().to_string()),
        "status": status,
        "pass": pass,
        "outputs": files,
        "timings_ms": timings,
        "timestamp_unix": started,
    });
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let config_path = sub.get_one::<String>("config").map(PathBuf::from);
    let out = PathBuf::from(sub.get_one::<String>("out").expect("has default"));

    let resolved = config_path
        .as_ref()
        .map(|p| ConfigFile::load(p))
        .transpose()
        .and_then(|cfg| Params::resolve(name, cfg.as_ref(), &flag_values(name, sub)));
    let p = match resolved.and_then(|p| p.seed().map(|_| p)) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_USAGE;
    }

    let result = dispatch(name, &p, &out);
    if let Err(e) = write_manifest(&out, name, &p, config_path.as_ref(), result.as_ref()) {
        eprintln!("warning: manifest not written: {e}");
    }
    match result {
        Ok(o) => {
            for c in &o.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if o.checks.iter().all(|c| c.pass) {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            if let Error::Step { step, .. } = &e {
                println!("FAIL {step}: {e}");
            }
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

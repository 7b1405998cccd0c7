use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};
use serde::Serialize;

use crate::{OvalError, Result};

pub const SEED_ENV: &str = "OVAL_LAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Constants,
    CurveEig,
    Bridge,
    LtRatio,
    Optimize,
    Scan,
    Sweep,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Constants,
        Subcommand::CurveEig,
        Subcommand::Bridge,
        Subcommand::LtRatio,
        Subcommand::Optimize,
        Subcommand::Scan,
        Subcommand::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Constants => "constants",
            Subcommand::CurveEig => "curve-eig",
            Subcommand::Bridge => "bridge",
            Subcommand::LtRatio => "lt-ratio",
            Subcommand::Optimize => "optimize",
            Subcommand::Scan => "scan",
            Subcommand::Sweep => "sweep",
        }
    }

    fn about(self) -> &'static str {
        match self {
            Subcommand::Constants => {
                "Lieb–Thirring constants on a γ grid, or the table of known bounds"
            }
            Subcommand::CurveEig => "Lowest eigenvalues of -d²/ds² + gκ² on a closed curve",
            Subcommand::Bridge => {
                "Map line eigenfunctions to the circle and compare both functionals"
            }
            Subcommand::LtRatio => "Lieb–Thirring ratio of a potential's bound states",
            Subcommand::Optimize => "Minimize or maximize λ₁ over ovals",
            Subcommand::Scan => "λ₁, λ₂ along a perturbation ray from the circle",
            Subcommand::Sweep => "Parallel sweep over seeds, an ε grid, or a γ grid",
        }
    }

    fn default_format(self) -> &'static str {
        match self {
            Subcommand::Bridge | Subcommand::Optimize => "json",
            _ => "csv",
        }
    }

    /// `(key, default, help)`; an empty default means "unset".
    fn keys(self) -> &'static [(&'static str, &'static str, &'static str)] {
        const LINE: [(&str, &str, &str); 2] = [
            (
                "half-width",
                "20",
                "half-width L of the truncated line [-L, L]",
            ),
            ("points", "4001", "odd number of line grid points"),
        ];
        match self {
            Subcommand::Constants => &[
                (
                    "gamma-grid",
                    "0.6:1.5:0.1",
                    "γ values: start:end:step, list, or single value",
                ),
                (
                    "table",
                    "false",
                    "print the table of known numerical bounds instead",
                ),
            ],
            Subcommand::CurveEig => &[
                (
                    "curve",
                    "circle",
                    "circle | harm:n=..,a=..,b=..;... | file:path",
                ),
                ("g", "1", "coupling in front of κ²"),
                ("k", "3", "number of eigenvalues"),
                (
                    "resolution",
                    "64",
                    "Fourier modes per side (galerkin) or grid points (fd)",
                ),
                ("method", "galerkin", "galerkin | fd"),
                (
                    "certificate",
                    "false",
                    "attach the Fourier certificate for λ₁ ≥ 1/2 (g = 1)",
                ),
                (
                    "allow-nonconvex",
                    "false",
                    "accept curves whose curvature changes sign",
                ),
            ],
            Subcommand::Bridge => &[
                ("potential", "poschl_teller:a=6", "potential mini-language"),
                ("mode", "pair", "pair | single"),
                LINE[0],
                LINE[1],
            ],
            Subcommand::LtRatio => &[
                ("potential", "poschl_teller:a=6", "potential mini-language"),
                ("gamma", "1", "moment exponent γ > 1/2"),
                ("states", "2", "number of bound states used (1 or 2)"),
                LINE[0],
                LINE[1],
            ],
            Subcommand::Optimize => &[
                ("g", "1", "coupling in front of κ²"),
                ("sense", "minimize", "minimize | maximize"),
                ("family", "even", "even | general"),
                ("max-harmonic", "6", "highest turning-angle harmonic"),
                ("resolution", "32", "Fourier modes per side"),
                ("barrier", "0.01", "strength of the curvature barrier"),
                ("restarts", "10", "number of seeded restarts"),
                ("max-evals", "5000", "evaluation budget per restart"),
                (
                    "history",
                    "",
                    "also write the history as CSV `eval,value` to this path",
                ),
            ],
            Subcommand::Scan => &[
                ("g", "1", "coupling in front of κ²"),
                (
                    "direction",
                    "harm:n=2,a=0,b=0.5",
                    "even-harmonic direction, scaled by ε",
                ),
                ("eps-grid", "0:0.4:0.05", "ε values"),
                ("resolution", "48", "Fourier modes per side"),
            ],
            Subcommand::Sweep => &[
                ("axis", "seeds", "seeds | eps | gamma"),
                (
                    "target",
                    "ovals",
                    "seeds: ovals | pairs; gamma: constants | lt-ratio",
                ),
                ("count", "500", "number of seeds (seed, seed+1, …)"),
                ("g", "1", "coupling in front of κ²"),
                ("max-harmonic", "6", "highest harmonic of random ovals"),
                ("amplitude", "0.5", "random oval amplitude in [0, 1)"),
                ("resolution", "48", "Fourier modes per side"),
                ("eps-grid", "0:0.8:0.05", "ε values (eps axis)"),
                (
                    "direction",
                    "harm:n=2,a=0,b=0.5",
                    "even-harmonic direction (eps axis)",
                ),
                ("gamma-grid", "0.6:1.5:0.1", "γ values (gamma axis)"),
                (
                    "potential",
                    "poschl_teller:a=6",
                    "potential (gamma axis, lt-ratio target)",
                ),
                ("states", "2", "bound states (gamma axis, lt-ratio target)"),
                LINE[0],
                LINE[1],
            ],
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keys every subcommand accepts.
const COMMON_KEYS: [(&str, &str); 4] = [
    ("seed", "base seed (default: $OVAL_LAB_SEED, else 0)"),
    ("parallelism", "worker threads; 0 = one per core"),
    ("format", "csv | json"),
    ("dump-dir", "directory for counterexample dumps"),
];
/// Keys that do not influence results and are left out of output metadata.
const UNECHOED_KEYS: [&str; 2] = ["parallelism", "output"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    /// Fully resolved subcommand keys (defaults, then file, then flags).
    pub parameters: BTreeMap<String, String>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub seed: u64,
    pub parallelism: usize,
    pub dump_dir: PathBuf,
}

impl RunConfig {
    pub fn get(&self, key: &str) -> &str {
        self.parameters.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key);
        raw.trim()
            .parse()
            .map_err(|_| OvalError::Parse(format!("invalid value `{raw}` for `{key}`")))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key).trim() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(OvalError::Parse(format!(
                "invalid value `{other}` for `{key}` (expected true or false)"
            ))),
        }
    }

    /// Every key that determines the result, for output headers.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = self
            .parameters
            .iter()
            .filter(|(k, _)| !UNECHOED_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        out.insert("seed".into(), self.seed.to_string());
        out.insert(
            "format".into(),
            match self.output_format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            }
            .into(),
        );
        out.insert("dump-dir".into(), self.dump_dir.display().to_string());
        out
    }
}

pub fn command() -> Command {
    let mut cmd = Command::new("oval-lab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Curvature Schrödinger operators on ovals and two-state Lieb–Thirring bounds")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in Subcommand::ALL {
        let mut c = Command::new(sub.name())
            .about(sub.about())
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("PATH")
                    .help("file of `key = value` lines; flags override it"),
            )
            .arg(
                Arg::new("output")
                    .long("output")
                    .short('o')
                    .value_name("PATH")
                    .help("write the report here instead of stdout"),
            );
        for (key, help) in COMMON_KEYS {
            c = c.arg(Arg::new(key).long(key).action(ArgAction::Set).help(help));
        }
        for &(key, default, help) in sub.keys() {
            let help = if default.is_empty() {
                help.to_string()
            } else {
                format!("{help} [default: {default}]")
            };
            c = c.arg(
                Arg::new(key)
                    .long(key)
                    .action(ArgAction::Set)
                    .allow_hyphen_values(true)
                    .help(help),
            );
        }
        cmd = cmd.subcommand(c);
    }
    cmd
}

/// `key = value` lines; `#` starts a comment. Underscores in keys are read
/// as dashes.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            OvalError::Parse(format!("config line {}: expected `key = value`", i + 1))
        })?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        OvalError::Io(std::io::Error::new(
            e.kind(),
            format!("config file {}: {e}", path.display()),
        ))
    })?;
    parse_config_file(&text)
}

fn known(sub: Subcommand, key: &str) -> bool {
    key == "output"
        || COMMON_KEYS.iter().any(|(k, _)| *k == key)
        || sub.keys().iter().any(|(k, _, _)| *k == key)
}

/// Defaults, then the config file, then explicit flags.
pub fn resolve(sub: Subcommand, m: &ArgMatches) -> Result<RunConfig> {
    let mut params: BTreeMap<String, String> = sub
        .keys()
        .iter()
        .filter(|(_, d, _)| !d.is_empty())
        .map(|(k, d, _)| (k.to_string(), d.to_string()))
        .collect();
    params.insert("format".into(), sub.default_format().into());
    params.insert("parallelism".into(), "0".into());
    params.insert("dump-dir".into(), ".".into());
    params.insert(
        "seed".into(),
        std::env::var(SEED_ENV).unwrap_or_else(|_| "0".into()),
    );

    if let Some(path) = m.get_one::<String>("config") {
        for (k, v) in read_config_file(Path::new(path))? {
            if !known(sub, &k) {
                return Err(OvalError::Parse(format!(
                    "unknown key `{k}` in config file for `{sub}`"
                )));
            }
            params.insert(k, v);
        }
    }
    let flag_keys = sub
        .keys()
        .iter()
        .map(|(k, _, _)| *k)
        .chain(COMMON_KEYS.iter().map(|(k, _)| *k))
        .chain(["output"]);
    for key in flag_keys {
        if m.value_source(key) == Some(ValueSource::CommandLine) {
            if let Some(v) = m.get_one::<String>(key) {
                params.insert(key.to_string(), v.clone());
            }
        }
    }

    let seed_raw = params.remove("seed").unwrap_or_default();
    let seed: u64 = seed_raw
        .trim()
        .parse()
        .map_err(|_| OvalError::Parse(format!("invalid seed `{seed_raw}`")))?;
    let par_raw = params.get("parallelism").cloned().unwrap_or_default();
    let parallelism: usize = par_raw
        .trim()
        .parse()
        .map_err(|_| OvalError::Parse(format!("invalid parallelism `{par_raw}`")))?;
    let output_format = match params.remove("format").as_deref().map(str::trim) {
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        other => {
            return Err(OvalError::Parse(format!(
                "invalid format `{}` (expected csv or json)",
                other.unwrap_or("")
            )))
        }
    };
    let dump_dir = PathBuf::from(params.remove("dump-dir").unwrap_or_else(|| ".".into()));
    let output_path = params
        .get("output")
        .filter(|s| !s.is_empty())
        .map(PathBuf::from);
    Ok(RunConfig {
        subcommand: sub,
        parameters: params,
        output_path,
        output_format,
        seed,
        parallelism,
        dump_dir,
    })
}

pub fn subcommand_by_name(name: &str) -> Option<Subcommand> {
    Subcommand::ALL.into_iter().find(|s| s.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_args(args: &[&str]) -> Result<RunConfig> {
        let m = command().try_get_matches_from(args).expect("clap accepts");
        let (name, sub_m) = m.subcommand().unwrap();
        resolve(subcommand_by_name(name).unwrap(), sub_m)
    }

    #[test]
    fn defaults_and_flags() {
        let c = resolve_args(&["oval-lab", "curve-eig", "--g", "-1", "--seed", "7"]).unwrap();
        assert_eq!(c.get("g"), "-1");
        assert_eq!(c.get("curve"), "circle");
        assert_eq!(c.seed, 7);
        assert_eq!(c.output_format, OutputFormat::Csv);
        assert_eq!(c.parse::<usize>("k").unwrap(), 3);
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\ng = 2\nk=5\nformat = json\n").unwrap();
        let p = path.to_str().unwrap();
        let c = resolve_args(&["oval-lab", "curve-eig", "--config", p, "--k", "4"]).unwrap();
        assert_eq!(c.get("g"), "2");
        assert_eq!(c.get("k"), "4");
        assert_eq!(c.output_format, OutputFormat::Json);

        std::fs::write(&path, "gee = 2\n").unwrap();
        let e = resolve_args(&["oval-lab", "curve-eig", "--config", p]).unwrap_err();
        assert!(e.to_string().contains("gee") && e.is_input_error());
    }

    #[test]
    fn echo_omits_scheduling_keys() {
        let c = resolve_args(&["oval-lab", "constants", "--parallelism", "8"]).unwrap();
        assert_eq!(c.parallelism, 8);
        let e = c.echo();
        assert!(!e.contains_key("parallelism"));
        assert_eq!(e["gamma-grid"], "0.6:1.5:0.1");
    }

    #[test]
    fn config_syntax_errors() {
        assert!(parse_config_file("just words").is_err());
        assert_eq!(
            parse_config_file("max_evals = 3 # inline").unwrap(),
            vec![("max-evals".to_string(), "3".to_string())]
        );
    }
}

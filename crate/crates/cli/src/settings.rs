//! Dotted configuration keys shared by the config file and the command line.
//!
//! Every key is accepted as `--<dotted.key> VALUE`; common ones also have a
//! short alias (`--lr` for `train.lr`). Precedence: flag, then config file,
//! then the built-in default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Seed,
    Float,
    /// Real in (0, 1].
    Ratio,
    Str,
    IntList,
    StrList,
    Path,
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub alias: Option<&'static str>,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(
    name: &'static str,
    kind: Kind,
    alias: Option<&'static str>,
    default: Option<&'static str>,
    help: &'static str,
) -> Key {
    Key { name, kind, alias, default, help }
}

use Kind::*;

pub const OUTPUT_KEYS: &[Key] = &[key("output.dir", Path, Some("out"), None, "Output directory [env: SPARSECOMM_OUT]")];

pub const BOUND_KEYS: &[Key] = &[
    key("bound.d", Int, Some("d"), Some("100000"), "Vector dimension"),
    key("bound.dist", Str, Some("dist"), Some("gaussian"), "gaussian|laplace|uniform|constant"),
    key("bound.ks", IntList, Some("ks"), Some("10,100,1000,10000"), "Comma-separated k values"),
    key("bound.seed", Seed, Some("seed"), None, "RNG seed (required)"),
];

pub const RANDK_KEYS: &[Key] = &[
    key("randk.d", Int, Some("d"), Some("10000"), "Vector dimension"),
    key("randk.k", Int, Some("k"), Some("100"), "Coordinates kept per trial"),
    key("randk.trials", Int, Some("trials"), Some("1000"), "Monte Carlo trials"),
    key("randk.seed", Seed, Some("seed"), None, "RNG seed (required)"),
];

pub const BENCH_KEYS: &[Key] = &[
    key("bench.dims", IntList, Some("dims"), Some("1e6"), "Comma-separated dimensions, e.g. 1e6,1e7"),
    key("bench.k_ratio", Ratio, Some("k-ratio"), Some("0.001"), "k as a fraction of d"),
    key(
        "bench.kinds",
        StrList,
        Some("kinds"),
        Some("topk,topk-sort,gaussiank,dgck"),
        "Comma-separated operators; topk-sort is the full-sort baseline",
    ),
    key("bench.repeats", Int, Some("repeats"), Some("5"), "Timed repeats per operator (>= 3)"),
    key("bench.max_bytes", Int, Some("max-bytes"), None, "Refuse dimensions whose working set exceeds this"),
    key("bench.seed", Seed, Some("seed"), None, "RNG seed (required)"),
];

pub const TRAIN_KEYS: &[Key] = &[
    key("train.workers", Int, Some("workers"), Some("4"), "Simulated workers P"),
    key("train.lr", Float, Some("lr"), Some("0.0025"), "Learning rate"),
    key("train.momentum", Float, Some("momentum"), Some("0.9"), "Heavy-ball momentum in [0, 1)"),
    key("train.epochs", Int, Some("epochs"), Some("5"), "Epochs"),
    key("train.batch_size", Int, Some("batch-size"), Some("16"), "Per-worker minibatch size"),
    key("train.layers", IntList, Some("layers"), None, "Layer widths, default <m>,100,<classes>"),
    key("train.activation", Str, Some("activation"), Some("relu"), "relu|tanh"),
    key("train.lr_decay_every", Int, None, None, "Step decay period in epochs"),
    key("train.lr_decay_factor", Float, None, None, "Step decay multiplier"),
    key("train.max_iters", Int, Some("max-iters"), None, "Stop after this many iterations"),
    key("train.seed", Seed, Some("seed"), None, "Global seed (required)"),
];

pub const COMPRESSOR_KEYS: &[Key] = &[
    key("compressor.kind", Str, Some("compressor"), None, "topk|randk|gaussiank|dgck|trimmedk|dense"),
    key("compressor.k_ratio", Ratio, Some("k-ratio"), Some("0.001"), "k as a fraction of d"),
    key("compressor.k", Int, Some("k"), None, "Absolute k; overrides k_ratio"),
    key("compressor.sample_ratio", Ratio, Some("sample-ratio"), Some("0.01"), "dgck sample fraction"),
    key("compressor.refine_iters", Int, Some("refine-iters"), Some("4"), "gaussiank threshold refinements"),
    key("compressor.seed", Seed, None, None, "Compressor seed, default train.seed"),
];

pub const DATA_KEYS: &[Key] = &[
    key("data.images", Path, Some("images"), None, "IDX image file; synthetic data when absent"),
    key("data.labels", Path, Some("labels"), None, "IDX label file"),
    key("data.limit", Int, Some("limit"), None, "Use only the first N samples"),
    key("data.synth.seed", Seed, None, Some("1"), "Synthetic data seed"),
    key("data.synth.n", Int, None, Some("10000"), "Synthetic samples"),
    key("data.synth.m", Int, None, Some("784"), "Synthetic features"),
    key("data.synth.c", Int, None, Some("10"), "Synthetic classes"),
    key("data.synth.separation", Float, None, Some("4.0"), "Synthetic class-mean scale"),
];

pub const HIST_KEYS: &[Key] = &[
    key("hist.iters", IntList, Some("iters"), Some("0,50,150"), "Iterations at which u is captured"),
    key("hist.bins", Int, Some("bins"), Some("100"), "Histogram bins"),
];

pub fn subcommand_keys(name: &str) -> Vec<&'static Key> {
    let groups: &[&[Key]] = match name {
        "bound" => &[BOUND_KEYS, OUTPUT_KEYS],
        "randk-check" => &[RANDK_KEYS, OUTPUT_KEYS],
        "bench" => &[BENCH_KEYS, OUTPUT_KEYS],
        "train" => &[TRAIN_KEYS, COMPRESSOR_KEYS, DATA_KEYS, OUTPUT_KEYS],
        "hist" => &[HIST_KEYS, TRAIN_KEYS, COMPRESSOR_KEYS, DATA_KEYS, OUTPUT_KEYS],
        _ => &[],
    };
    groups.iter().flat_map(|g| g.iter()).collect()
}

fn all_keys() -> impl Iterator<Item = &'static Key> {
    [BOUND_KEYS, RANDK_KEYS, BENCH_KEYS, TRAIN_KEYS, COMPRESSOR_KEYS, DATA_KEYS, HIST_KEYS, OUTPUT_KEYS]
        .into_iter()
        .flat_map(|g| g.iter())
}

fn lookup(name: &str) -> Option<&'static Key> {
    all_keys().find(|k| k.name == name)
}

const SUBCOMMANDS: &[(&str, &str)] = &[
    ("bound", "Top-k error ratio against (1-k/d) and (1-k/d)^2; pi^2 shape check"),
    ("hist", "Histograms/CDFs of a worker's accumulated gradient during a short training run"),
    ("train", "Simulated data-parallel SGD with error-feedback sparsification"),
    ("bench", "Wall-clock and pass-count comparison of the selection operators"),
    ("randk-check", "Monte Carlo check of the Rand_k expected error"),
];

pub fn command() -> Command {
    let mut cmd = Command::new("sparsecomm")
        .about("Gradient sparsification experiments")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in SUBCOMMANDS {
        let mut sub = Command::new(*name)
            .about(*about)
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .help("Sectioned key = value config file"),
            )
            .arg(
                Arg::new("quiet")
                    .long("quiet")
                    .short('q')
                    .action(ArgAction::SetTrue)
                    .help("Only write files; print nothing on success"),
            );
        for k in subcommand_keys(name) {
            let mut arg = Arg::new(k.name).long(k.name).value_name("VALUE").help(k.help);
            if let Some(a) = k.alias {
                arg = arg.visible_alias(a);
            }
            if let Some(d) = k.default {
                arg = arg.help(format!("{} [default: {d}]", k.help));
            }
            sub = sub.arg(arg);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

#[derive(Debug, Clone)]
enum Origin {
    Default,
    File { path: PathBuf, line: usize },
    Flag,
    Env,
}

/// Resolved key values for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<&'static str, (String, Origin)>,
    pub quiet: bool,
}

impl Settings {
    /// Merges defaults, the `--config` file and flags for subcommand `name`.
    pub fn resolve(name: &str, m: &ArgMatches) -> CliResult<Self> {
        Self::resolve_with_env(name, m, std::env::var_os("SPARSECOMM_OUT").map(PathBuf::from))
    }

    pub fn resolve_with_env(name: &str, m: &ArgMatches, out_env: Option<PathBuf>) -> CliResult<Self> {
        let keys = subcommand_keys(name);
        let mut values = BTreeMap::new();
        for k in &keys {
            if let Some(d) = k.default {
                values.insert(k.name, (d.to_string(), Origin::Default));
            }
        }
        if let Some(out) = out_env {
            values.insert("output.dir", (out.to_string_lossy().into_owned(), Origin::Env));
        }
        if let Some(path) = m.get_one::<String>("config") {
            let path = PathBuf::from(path);
            for (name, value, line) in load_config(&path)? {
                // keys for other subcommands may share one file
                if let Some(k) = keys.iter().find(|k| k.name == name) {
                    values.insert(
                        k.name,
                        (
                            value,
                            Origin::File {
                                path: path.clone(),
                                line,
                            },
                        ),
                    );
                }
            }
        }
        for k in &keys {
            if let Some(v) = m.get_one::<String>(k.name) {
                values.insert(k.name, (v.clone(), Origin::Flag));
            }
        }
        let s = Settings {
            values,
            quiet: m.get_flag("quiet"),
        };
        for k in keys {
            if let Some((v, origin)) = s.values.get(k.name) {
                check_value(k, v).map_err(|msg| CliError::Usage(s.describe(k.name, origin, &msg)))?;
            }
        }
        Ok(s)
    }

    fn describe(&self, name: &str, origin: &Origin, msg: &str) -> String {
        match origin {
            Origin::File { path, line } => format!("{}:{line}: {name}: {msg}", path.display()),
            Origin::Flag => format!("--{name}: {msg}"),
            Origin::Env => format!("SPARSECOMM_OUT: {msg}"),
            Origin::Default => format!("{name}: {msg}"),
        }
    }

    pub fn raw(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|(v, _)| v.as_str())
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    fn required(&self, name: &str) -> CliResult<&str> {
        self.raw(name).ok_or_else(|| {
            let hint = lookup(name)
                .and_then(|k| k.alias)
                .map(|a| format!(" (--{a})"))
                .unwrap_or_default();
            CliError::Usage(format!("missing required setting {name}{hint}"))
        })
    }

    pub fn usize(&self, name: &str) -> CliResult<usize> {
        Ok(parse_count(self.required(name)?).expect("validated"))
    }

    pub fn opt_usize(&self, name: &str) -> Option<usize> {
        self.raw(name).map(|v| parse_count(v).expect("validated"))
    }

    pub fn seed(&self, name: &str) -> CliResult<u64> {
        Ok(self.required(name)?.parse().expect("validated"))
    }

    pub fn f64(&self, name: &str) -> CliResult<f64> {
        Ok(self.required(name)?.parse().expect("validated"))
    }

    pub fn opt_f64(&self, name: &str) -> Option<f64> {
        self.raw(name).map(|v| v.parse().expect("validated"))
    }

    pub fn str(&self, name: &str) -> CliResult<&str> {
        self.required(name)
    }

    pub fn usize_list(&self, name: &str) -> CliResult<Vec<usize>> {
        Ok(split_list(self.required(name)?)
            .map(|v| parse_count(v).expect("validated"))
            .collect())
    }

    pub fn str_list(&self, name: &str) -> CliResult<Vec<String>> {
        Ok(split_list(self.required(name)?).map(str::to_string).collect())
    }

    /// Typed parse of a string setting, reporting failures as usage errors.
    pub fn parse<T>(&self, name: &str, v: &str) -> CliResult<T>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        v.parse().map_err(|e: T::Err| {
            let origin = self.values.get(name).map(|(_, o)| o.clone()).unwrap_or(Origin::Default);
            CliError::Usage(self.describe(name, &origin, &e.to_string()))
        })
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Non-negative integer, also in `1e6` notation when the value is integral.
pub fn parse_count(v: &str) -> Result<usize, String> {
    let v = v.trim().replace('_', "");
    if let Ok(n) = v.parse::<usize>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= usize::MAX as f64 => Ok(x as usize),
        _ => Err(format!("expected a non-negative integer, got {v:?}")),
    }
}

fn check_value(k: &Key, v: &str) -> Result<(), String> {
    match k.kind {
        Int => parse_count(v).map(|_| ()),
        Seed => v
            .parse::<u64>()
            .map(|_| ())
            .map_err(|_| format!("expected an unsigned 64-bit integer, got {v:?}")),
        Float => match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(()),
            _ => Err(format!("expected a finite number, got {v:?}")),
        },
        Ratio => match v.parse::<f64>() {
            Ok(x) if x > 0.0 && x <= 1.0 => Ok(()),
            _ => Err(format!("expected a ratio in (0, 1], got {v:?}")),
        },
        IntList => {
            let items: Vec<&str> = split_list(v).collect();
            if items.is_empty() {
                return Err("expected a comma-separated list of integers".into());
            }
            items.into_iter().try_for_each(|s| parse_count(s).map(|_| ()))
        }
        StrList => {
            if split_list(v).next().is_none() {
                Err("expected a comma-separated list".into())
            } else {
                Ok(())
            }
        }
        Str | Path => {
            if v.is_empty() {
                Err("empty value".into())
            } else {
                Ok(())
            }
        }
    }
}

/// Reads a sectioned TOML file into `(dotted key, value text, line)`.
/// Unknown keys and nested tables beyond the known ones are errors.
pub fn load_config(path: &Path) -> CliResult<Vec<(String, String, usize)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, path: &Path) -> CliResult<Vec<(String, String, usize)>> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        CliError::Usage(format!("{}:{line}: {}", path.display(), e.message()))
    })?;
    let lines = key_lines(text);
    let mut flat = Vec::new();
    flatten("", &table, &mut flat);
    let mut out = Vec::with_capacity(flat.len());
    for (name, value) in flat {
        let line = lines.get(&name).copied().unwrap_or(1);
        let at = |msg: String| CliError::Usage(format!("{}:{line}: {msg}", path.display()));
        if lookup(&name).is_none() {
            return Err(at(format!("unknown key {name}")));
        }
        let v = match value {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Array(items) => {
                let parts: Option<Vec<String>> = items
                    .into_iter()
                    .map(|v| match v {
                        toml::Value::String(s) => Some(s),
                        toml::Value::Integer(i) => Some(i.to_string()),
                        toml::Value::Float(f) => Some(f.to_string()),
                        _ => None,
                    })
                    .collect();
                parts.ok_or_else(|| at(format!("{name}: arrays may hold only strings and numbers")))?.join(",")
            }
            other => return Err(at(format!("{name}: unsupported value type {}", other.type_str()))),
        };
        out.push((name, v, line));
    }
    Ok(out)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&name, t, out),
            v => out.push((name, v.clone())),
        }
    }
}

/// Best-effort line numbers for `key = value` entries under `[section]` headers.
fn key_lines(text: &str) -> BTreeMap<String, usize> {
    let mut section = String::new();
    let mut lines = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            section = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        } else if let Some((k, _)) = line.split_once('=') {
            let k = k.trim().trim_matches('"');
            if k.is_empty() || k.starts_with('#') {
                continue;
            }
            let name = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            lines.entry(name).or_insert(i + 1);
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matches(args: &[&str]) -> (String, ArgMatches) {
        let m = command().try_get_matches_from(args).unwrap();
        let (name, sub) = m.subcommand().unwrap();
        (name.to_string(), sub.clone())
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("100000"), Ok(100_000));
        assert_eq!(parse_count("1_000"), Ok(1_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "[train]\nlr = 0.5\nworkers = 2\n").unwrap();
        let (name, m) = matches(&["x", "train", "--config", cfg.to_str().unwrap(), "--lr", "0.25"]);
        let s = Settings::resolve_with_env(&name, &m, None).unwrap();
        assert_eq!(s.f64("train.lr").unwrap(), 0.25);
        assert_eq!(s.usize("train.workers").unwrap(), 2);
        assert_eq!(s.usize("train.epochs").unwrap(), 5);
    }

    #[test]
    fn dotted_flag_names() {
        let (name, m) = matches(&["x", "train", "--data.synth.n", "500", "--compressor.k_ratio", "0.1"]);
        let s = Settings::resolve_with_env(&name, &m, None).unwrap();
        assert_eq!(s.usize("data.synth.n").unwrap(), 500);
        assert_eq!(s.f64("compressor.k_ratio").unwrap(), 0.1);
    }

    #[test]
    fn env_out_is_overridden_by_flag() {
        let (name, m) = matches(&["x", "bound", "--seed", "1"]);
        let s = Settings::resolve_with_env(&name, &m, Some("envdir".into())).unwrap();
        assert_eq!(s.str("output.dir").unwrap(), "envdir");
        let (name, m) = matches(&["x", "bound", "--seed", "1", "--out", "flagdir"]);
        let s = Settings::resolve_with_env(&name, &m, Some("envdir".into())).unwrap();
        assert_eq!(s.str("output.dir").unwrap(), "flagdir");
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let p = Path::new("c.toml");
        let err = parse_config("[train]\nlr = 0.1\nbogus = 3\n", p).unwrap_err();
        assert_eq!(err.to_string(), "c.toml:3: unknown key train.bogus");
        let err = parse_config("[train]\nlr = = 0.1\n", p).unwrap_err();
        assert!(err.to_string().starts_with("c.toml:2:"), "{err}");
        let ok = parse_config("[data.synth]\nn = 100\n[compressor]\nkind = \"topk\"\n", p).unwrap();
        assert_eq!(ok[0], ("compressor.kind".into(), "topk".into(), 4));
        assert_eq!(ok[1], ("data.synth.n".into(), "100".into(), 2));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let (name, m) = matches(&["x", "train", "--k-ratio", "1.5"]);
        let e = Settings::resolve_with_env(&name, &m, None).unwrap_err();
        assert_eq!(e.code(), 2);
        assert!(e.to_string().contains("compressor.k_ratio"), "{e}");
    }

    #[test]
    fn missing_seed_names_the_flag() {
        let (name, m) = matches(&["x", "randk-check"]);
        let s = Settings::resolve_with_env(&name, &m, None).unwrap();
        let e = s.seed("randk.seed").unwrap_err();
        assert_eq!(e.to_string(), "missing required setting randk.seed (--seed)");
    }

    #[test]
    fn lists_from_toml_arrays() {
        let v = parse_config("[bound]\nks = [10, 100]\n", Path::new("c")).unwrap();
        assert_eq!(v[0].1, "10,100");
    }
}

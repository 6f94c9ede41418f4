//! Run configuration: a flat `key = value` file (or a saved manifest),
//! overridden by command-line flags, resolved into typed values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{CliError, Command};
use crate::bodies::{sample_sphere, BodySpec, Direction};

pub(crate) const SEED_ENV: &str = "ORLICZ_POLYTOPE_SEED";

/// Every key a configuration may set.
pub(crate) const KEYS: &[&str] = &[
    "p", "n", "N", "dir", "trials", "dirs", "mc_dirs", "samples", "seed", "threads", "out", "alpha", "r", "rel_tol",
    "plot", "grid_p", "grid_n", "t_min", "t_max", "points", "perturb",
];

/// Keys that never influence numeric output, left out of report echoes.
const NON_NUMERIC: &[&str] = &["threads", "out", "plot"];

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment.
pub(crate) fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(config_err(format!("config line {}: expected `key = value`", i + 1)));
        };
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(format!("config line {}: unknown key `{}`", i + 1, key)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Reads a config file: a manifest when it is a JSON object, a flat file
/// otherwise. A manifest must belong to `command`.
pub(crate) fn load_config_file(path: &Path, command: Command) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("config: cannot read {}: {e}", path.display())))?;
    if !text.trim_start().starts_with('{') {
        return parse_flat(&text);
    }
    let v: Value = serde_json::from_str(&text).map_err(|e| config_err(format!("config: invalid manifest: {e}")))?;
    let recorded = v.get("command").and_then(Value::as_str).unwrap_or("");
    if recorded != command.name() {
        return Err(config_err(format!("config: manifest is for `{recorded}`, not `{}`", command.name())));
    }
    let Some(obj) = v.get("config").and_then(Value::as_object) else {
        return Err(config_err("config: manifest has no `config` object"));
    };
    let mut out = BTreeMap::new();
    for (k, val) in obj {
        if !KEYS.contains(&k.as_str()) {
            return Err(config_err(format!("config: unknown key `{k}` in manifest")));
        }
        let s = match val {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.insert(k.clone(), s);
    }
    Ok(out)
}

/// `p ∈ [1, ∞]`, with `inf` as the only spelling of infinity.
pub(crate) fn parse_p(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    let p: f64 = s.parse().map_err(|_| config_err(format!("p: cannot parse `{s}` (use a number >= 1 or `inf`)")))?;
    if !p.is_finite() {
        return Err(config_err(format!("p: `{s}` is not accepted; write `inf`")));
    }
    if p < 1.0 {
        return Err(config_err(format!("p: must be at least 1, got {p}")));
    }
    Ok(p)
}

pub(crate) fn format_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| config_err(format!("{key}: cannot parse `{s}`")))
}

fn parse_positive(key: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = parse_num(key, s)?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(config_err(format!("{key}: must be finite and positive, got {s}")));
    }
    Ok(v)
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(config_err(format!("{key}: expected true or false, got `{s}`"))),
    }
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

/// A direction request.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum DirSpec {
    /// `e<j>`, stored zero-based.
    Canonical(usize),
    /// `random` or `random:<count>`.
    Random(usize),
    Explicit(Vec<f64>),
}

impl DirSpec {
    fn parse(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if let Some(j) = s.strip_prefix('e') {
            let j: usize = j.parse().map_err(|_| config_err(format!("dir: cannot parse `{s}`")))?;
            if j == 0 {
                return Err(config_err("dir: basis vectors are numbered from e1"));
            }
            return Ok(Self::Canonical(j - 1));
        }
        if s == "random" {
            return Ok(Self::Random(1));
        }
        if let Some(k) = s.strip_prefix("random:") {
            let k: usize = k.parse().map_err(|_| config_err(format!("dir: cannot parse count in `{s}`")))?;
            if k == 0 {
                return Err(config_err("dir: random direction count must be at least 1"));
            }
            return Ok(Self::Random(k));
        }
        let v: Vec<f64> = split_list(s).iter().map(|x| parse_num("dir", x)).collect::<Result<_, _>>()?;
        if v.is_empty() {
            return Err(config_err("dir: empty direction"));
        }
        Ok(Self::Explicit(v))
    }

    /// The labelled directions, checked against the dimension.
    pub(crate) fn resolve(&self, n: usize, seed: u64) -> Result<Vec<(String, Direction)>, CliError> {
        match self {
            Self::Canonical(j) => {
                if *j >= n {
                    return Err(config_err(format!("dir: e{} does not exist in dimension {n}", j + 1)));
                }
                Ok(vec![(format!("e{}", j + 1), Direction::canonical(n, *j).map_err(CliError::numeric)?)])
            }
            Self::Random(k) => {
                let dirs = sample_sphere(n, *k, seed).map_err(CliError::numeric)?;
                Ok(dirs.into_iter().enumerate().map(|(i, d)| (format!("random{i}"), d)).collect())
            }
            Self::Explicit(v) => {
                if v.len() != n {
                    return Err(config_err(format!("dir: vector has {} entries, dimension is {n}", v.len())));
                }
                let d = Direction::new(v.clone()).map_err(|e| config_err(format!("dir: {e}")))?;
                Ok(vec![("explicit".into(), d)])
            }
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub(crate) struct RunConfig {
    pub command: Command,
    pub p: Option<f64>,
    pub n: Option<usize>,
    pub n_grid: Vec<u64>,
    pub dir: DirSpec,
    pub trials: usize,
    pub dirs: usize,
    pub mc_dirs: usize,
    pub samples: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub alpha: f64,
    pub r: f64,
    pub rel_tol: f64,
    pub plot: bool,
    pub grid_p: Vec<f64>,
    pub grid_n: Vec<usize>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: usize,
    pub perturb: bool,
    /// The resolved values as strings, keyed like the config file.
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    /// Merges `file` (lower precedence) with `flags` and resolves defaults.
    /// The seed falls back to `env_seed`, then 0.
    pub(crate) fn resolve(
        command: Command,
        file: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
        env_seed: Option<String>,
    ) -> Result<Self, CliError> {
        let mut raw = file;
        raw.extend(flags);
        if !raw.contains_key("seed") {
            if let Some(s) = env_seed {
                raw.insert("seed".into(), s);
            }
        }
        let get = |k: &str| raw.get(k).map(String::as_str);

        let p = get("p").map(parse_p).transpose()?;
        let n = get("n")
            .map(|s| {
                let n: usize = parse_num("n", s)?;
                if n == 0 {
                    return Err(config_err("n: must be at least 1"));
                }
                Ok(n)
            })
            .transpose()?;
        let n_grid: Vec<u64> = match get("N") {
            Some(s) => split_list(s).iter().map(|x| parse_num::<u64>("N", x)).collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        if n_grid.contains(&0) {
            return Err(config_err("N: values must be at least 1"));
        }
        if n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("N: grid must be strictly increasing"));
        }
        let dir = DirSpec::parse(get("dir").unwrap_or("e1"))?;
        let trials: usize = parse_num("trials", get("trials").unwrap_or("200"))?;
        let default_dirs = if command == Command::Directions { "1000" } else { "100" };
        let dirs: usize = parse_num("dirs", get("dirs").unwrap_or(default_dirs))?;
        let mc_dirs: usize = parse_num("mc_dirs", get("mc_dirs").unwrap_or("32"))?;
        let default_samples = if command == Command::Estimate { "1000000" } else { "200000" };
        let samples: usize = parse_num("samples", get("samples").unwrap_or(default_samples))?;
        let seed: u64 = parse_num("seed", get("seed").unwrap_or("0"))?;
        let threads = get("threads")
            .map(|s| {
                let t: usize = parse_num("threads", s)?;
                if t == 0 {
                    return Err(config_err("threads: must be at least 1"));
                }
                Ok(t)
            })
            .transpose()?;
        let out = PathBuf::from(get("out").unwrap_or("out"));
        let alpha = parse_positive("alpha", get("alpha").unwrap_or("4"))?;
        let r = parse_positive("r", get("r").unwrap_or("1"))?;
        let rel_tol = parse_positive("rel_tol", get("rel_tol").unwrap_or("1e-11"))?;
        if rel_tol >= 0.1 {
            return Err(config_err(format!("rel_tol: {rel_tol} is too loose")));
        }
        let plot = parse_bool("plot", get("plot").unwrap_or("false"))?;
        let grid_p: Vec<f64> =
            split_list(get("grid_p").unwrap_or("1,1.5,2,3,6")).iter().map(|s| parse_p(s)).collect::<Result<_, _>>()?;
        let grid_n: Vec<usize> =
            split_list(get("grid_n").unwrap_or("2,10,50")).iter().map(|s| parse_num("grid_n", s)).collect::<Result<_, _>>()?;
        let t_min = get("t_min").map(|s| parse_positive("t_min", s)).transpose()?;
        let t_max = get("t_max").map(|s| parse_positive("t_max", s)).transpose()?;
        let points: usize = parse_num("points", get("points").unwrap_or("200"))?;
        let perturb = parse_bool("perturb", get("perturb").unwrap_or("false"))?;

        let mut echo = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            echo.insert(k.to_string(), v);
        };
        if let Some(p) = p {
            put("p", format_p(p));
        }
        if let Some(n) = n {
            put("n", n.to_string());
        }
        if !n_grid.is_empty() {
            put("N", n_grid.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        }
        put("dir", get("dir").unwrap_or("e1").trim().to_string());
        put("trials", trials.to_string());
        put("dirs", dirs.to_string());
        put("mc_dirs", mc_dirs.to_string());
        put("samples", samples.to_string());
        put("seed", seed.to_string());
        if let Some(t) = threads {
            put("threads", t.to_string());
        }
        put("out", out.display().to_string());
        put("alpha", format!("{alpha}"));
        put("r", format!("{r}"));
        put("rel_tol", format!("{rel_tol:e}"));
        put("plot", plot.to_string());
        put("grid_p", grid_p.iter().map(|&p| format_p(p)).collect::<Vec<_>>().join(","));
        put("grid_n", grid_n.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        if let Some(t) = t_min {
            put("t_min", format!("{t:e}"));
        }
        if let Some(t) = t_max {
            put("t_max", format!("{t:e}"));
        }
        put("points", points.to_string());
        if perturb {
            put("perturb", "true".into());
        }

        Ok(Self {
            command,
            p,
            n,
            n_grid,
            dir,
            trials,
            dirs,
            mc_dirs,
            samples,
            seed,
            threads,
            out,
            alpha,
            r,
            rel_tol,
            plot,
            grid_p,
            grid_n,
            t_min,
            t_max,
            points,
            perturb,
            echo,
        })
    }

    /// The echo without settings that cannot change numeric output.
    pub(crate) fn numeric_echo(&self) -> BTreeMap<String, String> {
        self.echo.iter().filter(|(k, _)| !NON_NUMERIC.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    pub(crate) fn body(&self) -> Result<BodySpec, CliError> {
        let p = self.p.ok_or_else(|| config_err("p: required"))?;
        let n = self.n.ok_or_else(|| config_err("n: required"))?;
        BodySpec::normalized(p, n).map_err(|e| config_err(format!("body: {e}")))
    }

    pub(crate) fn grid(&self) -> Result<&[u64], CliError> {
        if self.n_grid.is_empty() {
            return Err(config_err("N: at least one value is required"));
        }
        Ok(&self.n_grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(pairs: &[(&str, &str)]) -> Result<RunConfig, CliError> {
        let flags = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        RunConfig::resolve(Command::Estimate, BTreeMap::new(), flags, None)
    }

    #[test]
    fn p_spellings() {
        assert_eq!(parse_p("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_p("2.5").unwrap(), 2.5);
        for bad in ["Inf", "infinity", "∞", "0.5", "abc", "NaN"] {
            assert!(matches!(parse_p(bad), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn flat_file_parsing() {
        let m = parse_flat("# grid\np = inf\nn=10\nN = 10, 100,1000\nrel-tol = 1e-9\n").unwrap();
        assert_eq!(m["p"], "inf");
        assert_eq!(m["N"], "10, 100,1000");
        assert_eq!(m["rel_tol"], "1e-9");
        assert!(parse_flat("bogus = 1").is_err());
        assert!(parse_flat("p 2").is_err());
    }

    #[test]
    fn flags_override_file_and_env_is_a_fallback() {
        let file: BTreeMap<String, String> = [("p", "2"), ("n", "5")].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let flags = [("p".to_string(), "3".to_string())].into_iter().collect();
        let c = RunConfig::resolve(Command::Scan, file.clone(), flags, Some("77".into())).unwrap();
        assert_eq!(c.p, Some(3.0));
        assert_eq!(c.seed, 77);
        let flags = [("seed".to_string(), "5".to_string())].into_iter().collect();
        let c = RunConfig::resolve(Command::Scan, file, flags, Some("77".into())).unwrap();
        assert_eq!(c.seed, 5);
    }

    #[test]
    fn grid_must_increase() {
        assert!(resolve(&[("N", "10,10")]).is_err());
        assert!(resolve(&[("N", "100,10")]).is_err());
        assert!(resolve(&[("N", "0")]).is_err());
        assert_eq!(resolve(&[("N", "1,2,3")]).unwrap().n_grid, vec![1, 2, 3]);
    }

    #[test]
    fn directions() {
        assert_eq!(DirSpec::parse("e3").unwrap(), DirSpec::Canonical(2));
        assert_eq!(DirSpec::parse("random:4").unwrap(), DirSpec::Random(4));
        assert_eq!(DirSpec::parse("1, -1").unwrap(), DirSpec::Explicit(vec![1.0, -1.0]));
        assert!(DirSpec::parse("e0").is_err());
        assert!(DirSpec::Canonical(5).resolve(3, 0).is_err());
        assert!(DirSpec::Explicit(vec![1.0]).resolve(3, 0).is_err());
        assert_eq!(DirSpec::Random(3).resolve(4, 1).unwrap().len(), 3);
    }

    #[test]
    fn echo_round_trips() {
        let c = resolve(&[("p", "inf"), ("n", "4"), ("N", "2,20"), ("threads", "2")]).unwrap();
        let again = RunConfig::resolve(Command::Estimate, c.echo.clone(), BTreeMap::new(), None).unwrap();
        assert_eq!(again.echo, c.echo);
        assert!(!c.numeric_echo().contains_key("threads"));
        assert!(!c.numeric_echo().contains_key("out"));
    }
}

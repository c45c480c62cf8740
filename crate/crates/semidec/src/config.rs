//! Run configuration: defaults, a flat `key = value` file and command-line
//! flags, merged with flags taking precedence over file keys.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use semidec_core::approx::MAX_MONOMIAL_DEGREE;
use semidec_core::contour::MAX_NODES;
use semidec_core::harness::ExampleId;

use crate::error::{CliError, CliResult};

/// Keys accepted in a config file; flags use the same names with `--`.
pub const KEYS: &[&str] = &[
    "example", "degree", "degrees", "M", "R", "R1", "R2", "mesh", "T", "steps", "out", "jobs",
    "seed", "stamp", "curve", "spatial",
];

/// Raw values with the place each one came from, for diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer {
    values: BTreeMap<String, (String, String)>,
}

impl Layer {
    pub fn set(
        &mut self,
        key: &str,
        value: impl Into<String>,
        origin: impl Into<String>,
    ) -> CliResult<()> {
        let origin = origin.into();
        if !KEYS.contains(&key) {
            return Err(CliError::config(origin, format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), (value.into(), origin));
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let mut layer = Layer::default();
        for (i, raw) in text.lines().enumerate() {
            let origin = format!("{source}:{}", i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(&origin, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(CliError::config(
                    &origin,
                    format!("empty value for '{key}'"),
                ));
            }
            if layer.values.contains_key(key) {
                return Err(CliError::config(&origin, format!("duplicate key '{key}'")));
            }
            layer.set(key, value, origin)?;
        }
        Ok(layer)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `self` overridden by every key present in `top`.
    pub fn overlay(mut self, top: Layer) -> Layer {
        self.values.extend(top.values);
        self
    }

    fn get(&self, key: &str) -> Option<(&str, &str)> {
        self.values.get(key).map(|(v, o)| (v.as_str(), o.as_str()))
    }
}

/// Degree pair `(N^N, N^D)`; a bare `N` means `(N, 0)`.
pub type Degrees = (usize, usize);

/// Validated configuration. `None` fields fall back to per-command defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub example: Option<ExampleId>,
    pub degree: Option<usize>,
    pub degrees: Option<Vec<Degrees>>,
    pub m: Option<Vec<usize>>,
    pub r: Option<Vec<f64>>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub mesh: Option<Vec<usize>>,
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub seed: u64,
    pub stamp: Option<String>,
    pub curve: Option<String>,
    pub spatial: bool,
}

impl RunConfig {
    pub fn from_layer(layer: &Layer) -> CliResult<Self> {
        let mut cfg = RunConfig {
            out: PathBuf::from("."),
            ..Default::default()
        };
        if let Some((v, o)) = layer.get("example") {
            cfg.example =
                Some(ExampleId::parse(v).map_err(|e| CliError::config(o, e.to_string()))?);
        }
        if let Some((v, o)) = layer.get("degree") {
            cfg.degree = Some(check_degree(parse_positive_int(v, o)?, o)?);
        }
        if let Some((v, o)) = layer.get("degrees") {
            cfg.degrees = Some(parse_degrees(v, o)?);
        }
        if let Some((v, o)) = layer.get("M") {
            let ms = parse_int_list(v, o)?;
            if let Some(m) = ms.iter().find(|m| **m > MAX_NODES) {
                return Err(CliError::config(o, format!("M = {m} exceeds {MAX_NODES}")));
            }
            cfg.m = Some(ms);
        }
        if let Some((v, o)) = layer.get("R") {
            cfg.r = Some(
                v.split(',')
                    .map(|s| parse_positive_float(s.trim(), o))
                    .collect::<CliResult<_>>()?,
            );
        }
        if let Some((v, o)) = layer.get("R1") {
            cfg.r1 = Some(parse_positive_float(v, o)?);
        }
        if let Some((v, o)) = layer.get("R2") {
            cfg.r2 = Some(parse_positive_float(v, o)?);
        }
        if let Some((v, o)) = layer.get("mesh") {
            cfg.mesh = Some(parse_int_list(v, o)?);
        }
        if let Some((v, o)) = layer.get("T") {
            cfg.t_end = Some(parse_positive_float(v, o)?);
        }
        if let Some((v, o)) = layer.get("steps") {
            cfg.steps = Some(parse_positive_int(v, o)?);
        }
        if let Some((v, _)) = layer.get("out") {
            cfg.out = PathBuf::from(v);
        }
        if let Some((v, o)) = layer.get("jobs") {
            cfg.jobs = Some(parse_positive_int(v, o)?);
        }
        if let Some((v, o)) = layer.get("seed") {
            cfg.seed = v.parse().map_err(|_| {
                CliError::config(o, format!("seed '{v}' is not an unsigned integer"))
            })?;
        }
        if let Some((v, o)) = layer.get("stamp") {
            if !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
                return Err(CliError::config(
                    o,
                    "stamp may only contain letters, digits and '-'",
                ));
            }
            cfg.stamp = Some(v.to_string());
        }
        if let Some((v, _)) = layer.get("curve") {
            cfg.curve = Some(v.to_string());
        }
        if let Some((v, o)) = layer.get("spatial") {
            cfg.spatial = match v {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => return Err(CliError::config(o, format!("'{v}' is not a boolean"))),
            };
        }
        Ok(cfg)
    }

    pub fn require_example(&self) -> CliResult<ExampleId> {
        self.example
            .ok_or_else(|| CliError::Usage("--example is required".into()))
    }

    /// File-name timestamp: the configured stamp, else the current UTC time.
    pub fn stamp(&self) -> String {
        self.stamp
            .clone()
            .unwrap_or_else(|| chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string())
    }
}

fn parse_positive_int(v: &str, origin: &str) -> CliResult<usize> {
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::config(
            origin,
            format!("'{v}' is not a positive integer"),
        )),
    }
}

fn parse_positive_float(v: &str, origin: &str) -> CliResult<f64> {
    match v.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(CliError::config(
            origin,
            format!("'{v}' is not a positive number"),
        )),
    }
}

fn check_degree(n: usize, origin: &str) -> CliResult<usize> {
    if n > MAX_MONOMIAL_DEGREE {
        return Err(CliError::config(
            origin,
            format!("degree {n} exceeds {MAX_MONOMIAL_DEGREE}"),
        ));
    }
    Ok(n)
}

/// `n`, `a,b,c` or a range `a:b` / `a:b:step` (inclusive).
pub fn parse_int_list(v: &str, origin: &str) -> CliResult<Vec<usize>> {
    if v.contains(':') {
        let parts: Vec<usize> = v
            .split(':')
            .map(|p| parse_positive_int(p.trim(), origin))
            .collect::<CliResult<_>>()?;
        let (lo, hi, step) = match parts[..] {
            [a, b] => (a, b, 1),
            [a, b, s] => (a, b, s),
            _ => {
                return Err(CliError::config(
                    origin,
                    format!("range '{v}' must be a:b or a:b:step"),
                ))
            }
        };
        if hi < lo {
            return Err(CliError::config(origin, format!("range '{v}' is empty")));
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    v.split(',')
        .map(|p| parse_positive_int(p.trim(), origin))
        .collect()
}

/// Comma-separated `N` or `NN/ND` entries.
pub fn parse_degrees(v: &str, origin: &str) -> CliResult<Vec<Degrees>> {
    v.split(',')
        .map(|item| {
            let item = item.trim();
            let (n, d) = match item.split_once('/') {
                Some((n, d)) => (n.trim(), d.trim()),
                None => (item, "0"),
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| {
                        CliError::config(origin, format!("'{item}' is not a degree or degree pair"))
                    })
                    .and_then(|x| check_degree(x, origin))
            };
            Ok((parse(n)?, parse(d)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file =
            Layer::parse("# demo\nexample = beam\nM = 5:9:2\nR = 2, 5\n", "run.cfg").unwrap();
        let mut flags = Layer::default();
        flags.set("M", "11", "--M").unwrap();
        let cfg = RunConfig::from_layer(&file.overlay(flags)).unwrap();
        assert_eq!(cfg.example, Some(ExampleId::Beam1D));
        assert_eq!(cfg.m, Some(vec![11]));
        assert_eq!(cfg.r, Some(vec![2.0, 5.0]));
    }

    #[test]
    fn diagnostics_name_the_line() {
        let err = Layer::parse("example = heat1d\nbogus = 1\n", "run.cfg").unwrap_err();
        assert_eq!(err.to_string(), "run.cfg:2: unknown key 'bogus'");
        let layer = Layer::parse("M = 0\n", "run.cfg").unwrap();
        let err = RunConfig::from_layer(&layer).unwrap_err();
        assert!(err.to_string().starts_with("run.cfg:1:"), "{err}");
    }

    #[test]
    fn lists_and_pairs() {
        assert_eq!(parse_int_list("10:30:10", "x").unwrap(), vec![10, 20, 30]);
        assert_eq!(
            parse_degrees("19/3, 17/1,4", "x").unwrap(),
            vec![(19, 3), (17, 1), (4, 0)]
        );
        assert!(parse_degrees("31/1", "x").is_err());
        assert!(parse_int_list("5:2", "x").is_err());
    }
}

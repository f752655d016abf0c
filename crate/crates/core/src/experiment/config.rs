//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # calibration ensemble
//! source = uniform
//! seed = 1
//! n = 1048576
//! rules = identity, transient:1, random:seeds=1-10:states=8, file:rules/my.rule
//! estimator = lz78
//! c = calibrate
//! replicates = 20
//! output = results.csv
//! format = csv
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bitstream::{parse_probability, SourceSpec, MAX_LEN};
use crate::complexity::Estimator;
use crate::error::{Error, Result};
use crate::rulevm::{
    constant_skip_rule, crystal_rule, every_k_rule, identity_rule, parse_rule, random_rule,
    transient_response_rule, SelectionRule,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CSetting {
    Fixed(f64),
    /// Use the envelope constant measured on the run itself.
    Calibrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format {other:?} (expected csv or json)"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// `-` means stdout.
    pub path: PathBuf,
    pub format: OutputFormat,
}

/// A reference to a rule, as written in configs and on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleRef {
    Identity,
    Crystal,
    EveryK(u32),
    ConstantSkip(u32),
    Transient(u32),
    Random {
        seed: u64,
        states: usize,
    },
    /// A DSL file; `label` is the path as written, `path` the resolved one.
    File {
        label: String,
        path: PathBuf,
    },
}

impl RuleRef {
    /// Parses one named rule reference. `base` anchors relative `file:` paths.
    /// Ensemble references (`random:seeds=a-b:...`) expand to several rules.
    pub fn parse_many(text: &str, base: &Path) -> Result<Vec<RuleRef>> {
        let text = text.trim();
        let bad = |why: &str| Error::Config(format!("bad rule reference {text:?}: {why}"));
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (text, None),
        };
        let int = |s: Option<&str>| -> Result<u32> {
            s.ok_or_else(|| bad("missing parameter"))?
                .trim()
                .parse()
                .map_err(|_| bad("parameter must be a positive integer"))
        };
        let one = match head {
            "identity" if rest.is_none() => RuleRef::Identity,
            "crystal" if rest.is_none() => RuleRef::Crystal,
            "every" => RuleRef::EveryK(int(rest)?),
            "skip" => RuleRef::ConstantSkip(int(rest)?),
            "transient" => RuleRef::Transient(int(rest)?),
            "file" => {
                let label = rest.ok_or_else(|| bad("missing path"))?.trim().to_string();
                if label.is_empty() {
                    return Err(bad("missing path"));
                }
                let path = base.join(&label);
                RuleRef::File { label, path }
            }
            "random" => {
                return parse_random(rest.ok_or_else(|| bad("missing parameters"))?)
                    .map_err(|e| bad(&e))
            }
            _ => return Err(bad("unknown rule name")),
        };
        Ok(vec![one])
    }

    /// Stable identifier used in output records.
    pub fn id(&self) -> String {
        match self {
            RuleRef::Identity => "identity".into(),
            RuleRef::Crystal => "crystal".into(),
            RuleRef::EveryK(k) => format!("every:{k}"),
            RuleRef::ConstantSkip(k) => format!("skip:{k}"),
            RuleRef::Transient(d) => format!("transient:{d}"),
            RuleRef::Random { seed, states } => format!("random:seed={seed}:states={states}"),
            RuleRef::File { label, .. } => format!("file:{label}"),
        }
    }

    pub fn resolve(&self) -> Result<SelectionRule> {
        let rule = match self {
            RuleRef::Identity => identity_rule(),
            RuleRef::Crystal => crystal_rule(),
            RuleRef::EveryK(k) => every_k_rule(*k)?,
            RuleRef::ConstantSkip(k) => constant_skip_rule(*k)?,
            RuleRef::Transient(d) => transient_response_rule(*d)?,
            RuleRef::Random { seed, states } => random_rule(*seed, *states)?,
            RuleRef::File { path, .. } => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_rule(&text)?
            }
        };
        Ok(rule.with_name(self.id()))
    }
}

fn parse_random(params: &str) -> std::result::Result<Vec<RuleRef>, String> {
    let mut seeds: Option<(u64, u64)> = None;
    let mut states: Option<usize> = None;
    for part in params.split(':') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found {part:?}"))?;
        let value = value.trim();
        let num = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad number {s:?}"))
        };
        match key.trim() {
            "seed" if seeds.is_none() => {
                let s = num(value)?;
                seeds = Some((s, s));
            }
            "seeds" if seeds.is_none() => {
                let (a, b) = value
                    .split_once("..")
                    .or_else(|| value.split_once('-'))
                    .ok_or_else(|| format!("seed range {value:?} must look like a-b"))?;
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty seed range {value:?}"));
                }
                seeds = Some((a, b));
            }
            "states" if states.is_none() => states = Some(num(value)? as usize),
            other => return Err(format!("unexpected or repeated key {other:?}")),
        }
    }
    let (first, last) = seeds.ok_or("missing seed")?;
    let states = states.ok_or("missing states")?;
    Ok((first..=last)
        .map(|seed| RuleRef::Random { seed, states })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    pub n: usize,
    pub rules: Vec<RuleRef>,
    pub estimator: Estimator,
    pub c: CSetting,
    pub replicates: u32,
    pub output: Option<OutputSpec>,
}

const KEYS: &[&str] = &[
    "source",
    "seed",
    "p",
    "pattern",
    "path",
    "n",
    "rules",
    "estimator",
    "c",
    "replicates",
    "output",
    "format",
];

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {key:?}",
                    idx + 1
                )));
            }
            if map.insert(key, value.trim()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?}",
                    idx + 1
                )));
            }
        }
        let get = |k: &str| map.get(k).copied();
        let require = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing key {k:?}")));
        let number = |k: &str, v: &str| -> Result<u64> {
            v.parse().map_err(|_| {
                Error::Config(format!("{k} must be a non-negative integer, got {v:?}"))
            })
        };

        let seed = get("seed")
            .map(|v| number("seed", v))
            .transpose()?
            .unwrap_or(0);
        let source = match require("source")? {
            "uniform" => SourceSpec::Uniform { seed },
            "bernoulli" => SourceSpec::Bernoulli {
                seed,
                p: parse_probability(require("p")?)?,
            },
            "periodic" => SourceSpec::Periodic {
                pattern: require("pattern")?.parse()?,
            },
            "file" => SourceSpec::File {
                path: base.join(require("path")?),
            },
            other => return Err(Error::Config(format!("unknown source {other:?}"))),
        };
        source.validate()?;

        let n = number("n", require("n")?)?;
        if n > MAX_LEN as u64 {
            return Err(Error::Config(format!("n = {n} exceeds {MAX_LEN}")));
        }

        let mut rules = Vec::new();
        for item in require("rules")?.split(',') {
            if item.trim().is_empty() {
                continue;
            }
            rules.extend(RuleRef::parse_many(item, base)?);
        }
        if rules.is_empty() {
            return Err(Error::Config("at least one rule is required".into()));
        }

        let estimator = match get("estimator") {
            Some(e) => e.parse()?,
            None => Estimator::Lz78,
        };

        let c = match get("c") {
            None | Some("calibrate") => CSetting::Calibrate,
            Some(v) => {
                let c: f64 = v.parse().map_err(|_| {
                    Error::Config(format!("c must be a number or calibrate, got {v:?}"))
                })?;
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("c must be positive, got {v}")));
                }
                CSetting::Fixed(c)
            }
        };

        let replicates = number("replicates", get("replicates").unwrap_or("1"))?;
        if replicates == 0 || replicates > u32::MAX as u64 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }

        let output = match get("output") {
            None => None,
            Some(p) => {
                let format = match get("format") {
                    Some(f) => f.parse()?,
                    None if p.ends_with(".json") => OutputFormat::Json,
                    None => OutputFormat::Csv,
                };
                let path = if p == "-" {
                    PathBuf::from("-")
                } else {
                    base.join(p)
                };
                Some(OutputSpec { path, format })
            }
        };

        Ok(ExperimentConfig {
            source,
            n: n as usize,
            rules,
            estimator,
            c,
            replicates: replicates as u32,
            output,
        })
    }

    /// Resolves every rule reference, in config order.
    pub fn resolve_rules(&self) -> Result<Vec<(String, SelectionRule)>> {
        self.rules
            .iter()
            .map(|r| {
                let rule = r.resolve().map_err(|e| match e {
                    Error::Io { path, source } => {
                        Error::Config(format!("cannot read rule {}: {source}", path.display()))
                    }
                    other => other,
                })?;
                Ok((r.id(), rule))
            })
            .collect()
    }
}

//! The `selstab` command line.
//!
//! Numeric results go to stdout as `key=value` lines. Payloads written with
//! `--out -` take stdout instead, and the key lines move to stderr. Exit code
//! 0 means success, 1 a validation error, 2 an I/O error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bitstream::{
    generate, parse_probability, write_bits, BitFormat, BitSequence, SourceSpec,
};
use crate::complexity::{ml_prefix_curve, Estimator};
use crate::error::{Error, Result};
use crate::experiment::{
    calibrate_c, emit, run_experiment_with_c, ExperimentConfig, OutputFormat, RuleRef,
};
use crate::metrics::{bias, bound_report, CALIBRATED_C};
use crate::rulevm::{parse_rule, rule_complexity, run_rule, SelectionRule};

#[derive(Debug, Parser)]
#[command(
    name = "selstab",
    version,
    about = "Selection-rule stability experiments on binary sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a sequence from a source.
    Generate(GenerateArgs),
    /// Run a rule over a sequence and write the selected subsequence.
    Select {
        /// Built-in rule (identity, crystal, every:K, skip:K, transient:D,
        /// random:seed=S:states=N) or a rule file.
        #[arg(long)]
        rule: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "ascii01")]
        format: String,
    },
    /// Estimate the complexity of a sequence.
    Complexity(EstimateArgs),
    /// Estimate the randomness deficiency of a sequence.
    Deficiency(EstimateArgs),
    /// Deviation of the frequency of ones from 1/2.
    Bias {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Measured bias against the bound for one rule.
    Bound {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long, default_value = "lz78")]
        estimator: String,
        #[arg(long, default_value_t = CALIBRATED_C)]
        c: f64,
    },
    /// Complexity excess k_hat - n over prefixes.
    Curve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "lz78")]
        estimator: String,
        #[arg(long)]
        stride: usize,
    },
    /// Run an experiment config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Measure the envelope constant on an experiment config.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parse and validate a rule file.
    ValidateRule {
        #[arg(long)]
        rule: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// uniform, bernoulli, periodic or file
    #[arg(long)]
    source: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of a one, as `1/4` or `0.25` (bernoulli).
    #[arg(long)]
    p: Option<String>,
    /// Repeated pattern of 0/1 (periodic).
    #[arg(long)]
    pattern: Option<String>,
    /// Input file (file source).
    #[arg(long)]
    path: Option<PathBuf>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "ascii01")]
    format: String,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "lz78")]
    estimator: String,
}

/// Runs the CLI with `args` (including the program name) and returns the
/// exit code.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn read_input(path: &Path) -> Result<BitSequence> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(io_err(path))?;
        buf
    } else {
        fs::read(path).map_err(io_err(path))?
    };
    BitFormat::detect(&bytes).decode(&bytes)
}

fn write_payload(
    seq: &BitSequence,
    path: &Path,
    format: BitFormat,
    stdout: &mut dyn Write,
) -> Result<()> {
    if path == Path::new("-") {
        stdout
            .write_all(&format.encode(seq))
            .and_then(|_| stdout.flush())
            .map_err(io_err(path))
    } else {
        write_bits(seq, path, format)
    }
}

/// Resolves a built-in rule name, falling back to reading a rule file.
pub fn resolve_rule_arg(text: &str) -> Result<SelectionRule> {
    if let Ok(refs) = RuleRef::parse_many(text, Path::new("")) {
        if let [one] = refs.as_slice() {
            if !matches!(one, RuleRef::File { .. }) {
                return one.resolve();
            }
        } else {
            return Err(Error::validation(format!(
                "{text:?} names {} rules, expected one",
                refs.len()
            )));
        }
    }
    let path = Path::new(text.strip_prefix("file:").unwrap_or(text));
    let source = fs::read_to_string(path).map_err(io_err(path))?;
    let name = path.display().to_string();
    Ok(parse_rule(&source)?.with_name(name))
}

struct Lines<'a> {
    out: &'a mut dyn Write,
}

impl Lines<'_> {
    fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> Result<()> {
        writeln!(self.out, "{key}={value}").map_err(|e| Error::io("<stdout>", e))
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Generate(a) => {
            let source = match a.source.as_str() {
                "uniform" => SourceSpec::Uniform { seed: a.seed },
                "bernoulli" => {
                    let p =
                        a.p.as_deref()
                            .ok_or_else(|| Error::validation("bernoulli source needs --p"))?;
                    SourceSpec::Bernoulli {
                        seed: a.seed,
                        p: parse_probability(p)?,
                    }
                }
                "periodic" => {
                    let pattern = a
                        .pattern
                        .as_deref()
                        .ok_or_else(|| Error::validation("periodic source needs --pattern"))?;
                    SourceSpec::Periodic {
                        pattern: pattern.parse()?,
                    }
                }
                "file" => SourceSpec::File {
                    path: a
                        .path
                        .clone()
                        .ok_or_else(|| Error::validation("file source needs --path"))?,
                },
                other => return Err(Error::validation(format!("unknown source {other:?}"))),
            };
            let format: BitFormat = a.format.parse()?;
            let seq = generate(&source, a.n)?;
            write_payload(&seq, &a.out, format, stdout)?;
            let diag: &mut dyn Write = if a.out == Path::new("-") {
                stderr
            } else {
                stdout
            };
            let mut lines = Lines { out: diag };
            lines.kv("n", seq.len())?;
            lines.kv("ones", seq.count_ones())
        }
        Command::Select {
            rule,
            input,
            out,
            format,
        } => {
            let format: BitFormat = format.parse()?;
            let rule = resolve_rule_arg(&rule)?;
            let x = read_input(&input)?;
            let result = run_rule(&rule, &x);
            let to_stdout = out.as_deref() == Some(Path::new("-"));
            if let Some(out) = &out {
                write_payload(&result.selected, out, format, stdout)?;
            }
            let diag: &mut dyn Write = if to_stdout { stderr } else { stdout };
            let mut lines = Lines { out: diag };
            lines.kv("sub_len", result.sub_len())?;
            lines.kv("halt_reason", result.halt_reason)?;
            lines.kv("examined", result.examined_count)?;
            lines.kv("k_rule_bits", rule_complexity(&rule))
        }
        Command::Complexity(a) => {
            let estimator: Estimator = a.estimator.parse()?;
            let est = estimator.estimate(&read_input(&a.input)?)?;
            let mut lines = Lines { out: stdout };
            lines.kv("estimator", est.estimator)?;
            lines.kv("n", est.n)?;
            lines.kv("k_hat_bits", est.k_hat)?;
            lines.kv("deficiency_bits", est.deficiency)
        }
        Command::Deficiency(a) => {
            let estimator: Estimator = a.estimator.parse()?;
            let est = estimator.estimate(&read_input(&a.input)?)?;
            let mut lines = Lines { out: stdout };
            lines.kv("estimator", est.estimator)?;
            lines.kv("n", est.n)?;
            lines.kv("deficiency_bits", est.deficiency)
        }
        Command::Bias { input } => {
            let b = bias(&read_input(&input)?)?;
            Lines { out: stdout }.kv("bias", b)
        }
        Command::Bound {
            input,
            rule,
            estimator,
            c,
        } => {
            let estimator: Estimator = estimator.parse()?;
            let rule = resolve_rule_arg(&rule)?;
            let x = read_input(&input)?;
            let r = bound_report(&x, &rule, estimator, c)?;
            let mut lines = Lines { out: stdout };
            lines.kv("bias", r.bias)?;
            lines.kv("bound", r.bound)?;
            lines.kv("c", r.c_used)?;
            lines.kv("delta_hat_bits", r.delta_hat)?;
            lines.kv("k_rule_bits", r.k_rule)?;
            lines.kv("sub_len", r.sub_len)?;
            lines.kv("satisfied", r.satisfied)
        }
        Command::Curve {
            input,
            estimator,
            stride,
        } => {
            let estimator: Estimator = estimator.parse()?;
            let curve = ml_prefix_curve(&read_input(&input)?, estimator, stride)?;
            let mut lines = Lines { out: stdout };
            lines.kv("points", curve.len())?;
            for (n, v) in curve {
                lines.kv(&format!("curve.{n}"), v)?;
            }
            Ok(())
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let (records, c) = run_experiment_with_c(&cfg)?;
            let (path, format) = match &cfg.output {
                Some(o) => (o.path.clone(), o.format),
                None => (PathBuf::from("-"), OutputFormat::Csv),
            };
            emit(&records, &path, format)?;
            let diag: &mut dyn Write = if path == Path::new("-") {
                stderr
            } else {
                stdout
            };
            let mut lines = Lines { out: diag };
            let empty = records.iter().filter(|r| r.bias.is_none()).count();
            let violated = records
                .iter()
                .filter(|r| r.satisfied == Some(false))
                .count();
            lines.kv("records", records.len())?;
            lines.kv("c", c)?;
            lines.kv("empty", empty)?;
            lines.kv("violated", violated)?;
            lines.kv("output", path.display())
        }
        Command::Calibrate { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let c_hat = calibrate_c(&cfg)?;
            Lines { out: stdout }.kv("c_hat", c_hat)
        }
        Command::ValidateRule { rule } => {
            let text = fs::read_to_string(&rule).map_err(io_err(&rule))?;
            let parsed = parse_rule(&text)?;
            let mut lines = Lines { out: stdout };
            lines.kv("valid", true)?;
            lines.kv("states", parsed.num_states())?;
            lines.kv("k_rule_bits", rule_complexity(&parsed))
        }
    }
}

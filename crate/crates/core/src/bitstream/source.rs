use std::fs;
use std::path::PathBuf;

use num_rational::Ratio;

use super::rng::Xoshiro256StarStar;
use super::{BitFormat, BitSequence, MAX_LEN};
use crate::error::{Error, Result};

/// Where an input sequence comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    /// Fair coin flips: successive xoshiro256** outputs, MSB first.
    Uniform { seed: u64 },
    /// One xoshiro256** output per bit; the bit is 1 iff the output is
    /// below `floor(p * 2^64)`.
    Bernoulli { seed: u64, p: Ratio<u64> },
    /// The pattern repeated and truncated.
    Periodic { pattern: BitSequence },
    /// Bits read from a file (ascii01 or packed, detected by magic).
    File { path: PathBuf },
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::Bernoulli { p, .. } => {
                if *p.numer() == 0 || p.numer() >= p.denom() {
                    return Err(Error::validation(format!(
                        "bernoulli p must lie strictly between 0 and 1, got {p}"
                    )));
                }
            }
            SourceSpec::Periodic { pattern } if pattern.is_empty() => {
                return Err(Error::validation("periodic pattern must be non-empty"));
            }
            _ => {}
        }
        Ok(())
    }

    /// The same source with its seed replaced; seedless sources are unchanged.
    pub fn with_seed(&self, seed: u64) -> SourceSpec {
        match self {
            SourceSpec::Uniform { .. } => SourceSpec::Uniform { seed },
            SourceSpec::Bernoulli { p, .. } => SourceSpec::Bernoulli { seed, p: *p },
            other => other.clone(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            SourceSpec::Uniform { seed } | SourceSpec::Bernoulli { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Parses `1/4` or a plain decimal such as `0.25` into an exact ratio.
pub fn parse_probability(text: &str) -> Result<Ratio<u64>> {
    let text = text.trim();
    let bad = || Error::validation(format!("cannot parse probability {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
        || frac.len() > 18
    {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    let num = int
        .checked_mul(den)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Ratio::new(num, den))
}

/// Produces exactly `n` bits from `spec`.
///
/// Outputs are pure functions of the spec, and `generate(spec, n)` is a
/// prefix of `generate(spec, m)` whenever `n <= m`.
pub fn generate(spec: &SourceSpec, n: usize) -> Result<BitSequence> {
    spec.validate()?;
    if n > MAX_LEN {
        return Err(Error::validation(format!(
            "length {n} exceeds maximum {MAX_LEN}"
        )));
    }
    match spec {
        SourceSpec::Uniform { seed } => Ok(uniform(*seed, n)),
        SourceSpec::Bernoulli { seed, p } => Ok(bernoulli(*seed, *p, n)),
        SourceSpec::Periodic { pattern } => Ok(pattern.iter().cycle().take(n).collect()),
        SourceSpec::File { path } => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let seq = BitFormat::detect(&bytes).decode(&bytes)?;
            if seq.len() < n {
                return Err(Error::validation(format!(
                    "{} holds {} bits, {n} requested",
                    path.display(),
                    seq.len()
                )));
            }
            Ok(seq.prefix(n))
        }
    }
}

fn uniform(seed: u64, n: usize) -> BitSequence {
    let mut rng = Xoshiro256StarStar::from_seed(seed);
    let words = n.div_ceil(64);
    let mut bytes = Vec::with_capacity(words * 8);
    for _ in 0..words {
        bytes.extend_from_slice(&rng.next_u64().to_be_bytes());
    }
    BitSequence::from_packed_bytes(bytes, n)
}

fn bernoulli(seed: u64, p: Ratio<u64>, n: usize) -> BitSequence {
    let threshold = bernoulli_threshold(p);
    let mut rng = Xoshiro256StarStar::from_seed(seed);
    (0..n).map(|_| rng.chance(threshold)).collect()
}

/// `floor(p * 2^64)` for `0 < p < 1`.
pub(crate) fn bernoulli_threshold(p: Ratio<u64>) -> u64 {
    (((*p.numer() as u128) << 64) / *p.denom() as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_repeats_and_truncates() {
        let spec = SourceSpec::Periodic {
            pattern: "01".parse().unwrap(),
        };
        assert_eq!(generate(&spec, 6).unwrap().to_string(), "010101");
        assert_eq!(generate(&spec, 0).unwrap().len(), 0);
        let spec = SourceSpec::Periodic {
            pattern: "110".parse().unwrap(),
        };
        assert_eq!(generate(&spec, 7).unwrap().to_string(), "1101101");
    }

    #[test]
    fn invalid_specs_rejected() {
        for p in [Ratio::new(0, 1), Ratio::new(1, 1), Ratio::new(3, 2)] {
            let spec = SourceSpec::Bernoulli { seed: 1, p };
            assert!(matches!(generate(&spec, 4), Err(Error::Validation(_))));
        }
        let spec = SourceSpec::Periodic {
            pattern: BitSequence::new(),
        };
        assert!(matches!(generate(&spec, 4), Err(Error::Validation(_))));
    }

    #[test]
    fn thresholds() {
        assert_eq!(bernoulli_threshold(Ratio::new(1, 2)), 1u64 << 63);
        assert_eq!(bernoulli_threshold(Ratio::new(1, 4)), 1u64 << 62);
        assert_eq!(bernoulli_threshold(Ratio::new(1, 3)), u64::MAX / 3);
    }

    #[test]
    fn probability_parsing() {
        assert_eq!(parse_probability("1/4").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_probability("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_probability(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_probability("abc").is_err());
        assert!(parse_probability("1/0").is_err());
        assert!(parse_probability("-0.5").is_err());
    }

    #[test]
    fn uniform_is_deterministic_and_prefix_closed() {
        let spec = SourceSpec::Uniform { seed: 99 };
        let long = generate(&spec, 1000).unwrap();
        assert_eq!(long, generate(&spec, 1000).unwrap());
        for n in [0, 1, 7, 8, 63, 64, 65, 999] {
            assert_eq!(generate(&spec, n).unwrap(), long.prefix(n));
        }
    }
}

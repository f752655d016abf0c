//! Computable upper-bound estimates of the complexity of a sequence given its
//! length, and the randomness deficiency `n - K(x|n)` derived from them.
//!
//! The length is treated as known for free: no estimator charges bits for
//! encoding `n`. Everything is measured in bits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bitstream::BitSequence;
use crate::error::{Error, Result};

pub const MAX_BLOCK: u32 = 16;
pub const DEFAULT_BLOCK: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    /// LZ78 phrase count, `c * (ceil(log2(c+1)) + 1)` bits.
    Lz78,
    /// Empirical entropy of non-overlapping blocks plus an explicit count
    /// table.
    BlockEntropy { block: u32 },
}

impl Estimator {
    pub fn estimate(self, x: &BitSequence) -> Result<ComplexityEstimate> {
        match self {
            Estimator::Lz78 => lz78_estimate(x),
            Estimator::BlockEntropy { block } => block_entropy_estimate(x, block),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Lz78 => f.write_str("lz78"),
            Estimator::BlockEntropy { block } => write!(f, "block_entropy:{block}"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    /// `lz78`, `block_entropy`, or `block_entropy:<b>` (`block:<b>` also works).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((name, arg)) => (name, Some(arg)),
            None => (s, None),
        };
        match (name, arg) {
            ("lz78", None) => Ok(Estimator::Lz78),
            ("block_entropy" | "block", None) => Ok(Estimator::BlockEntropy {
                block: DEFAULT_BLOCK,
            }),
            ("block_entropy" | "block", Some(b)) => {
                let block = b
                    .parse()
                    .map_err(|_| Error::validation(format!("bad block size {b:?}")))?;
                check_block(block)?;
                Ok(Estimator::BlockEntropy { block })
            }
            _ => Err(Error::validation(format!(
                "unknown estimator {s:?} (expected lz78 or block_entropy:<b>)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEstimate {
    pub estimator: Estimator,
    /// Estimated complexity in bits.
    pub k_hat: f64,
    /// `max(0, n - k_hat)`.
    pub deficiency: f64,
    pub n: usize,
}

impl ComplexityEstimate {
    fn new(estimator: Estimator, k_hat: f64, n: usize) -> Self {
        Self {
            estimator,
            k_hat,
            deficiency: (n as f64 - k_hat).max(0.0),
            n,
        }
    }
}

/// `ceil(log2(m))` for `m >= 1`.
pub(crate) fn ceil_log2(m: u64) -> u32 {
    debug_assert!(m >= 1);
    64 - (m - 1).leading_zeros()
}

/// Number of phrases in the LZ78 incremental parse of `x`, counting a
/// trailing partial phrase as one.
pub fn lz78_phrase_count(x: &BitSequence) -> u64 {
    // trie node -> children; 0 means absent (the root is never a child)
    let mut trie: Vec<[u32; 2]> = vec![[0, 0]];
    let mut node = 0usize;
    let mut phrases = 0u64;
    for bit in x.iter() {
        let b = bit as usize;
        let child = trie[node][b];
        if child != 0 {
            node = child as usize;
        } else {
            trie[node][b] = trie.len() as u32;
            trie.push([0, 0]);
            phrases += 1;
            node = 0;
        }
    }
    if node != 0 {
        phrases += 1;
    }
    phrases
}

/// LZ78 cost of a parse with `phrases` phrases.
pub fn lz78_cost(phrases: u64) -> f64 {
    if phrases == 0 {
        return 0.0;
    }
    (phrases * (ceil_log2(phrases + 1) as u64 + 1)) as f64
}

pub fn lz78_estimate(x: &BitSequence) -> Result<ComplexityEstimate> {
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    let k_hat = lz78_cost(lz78_phrase_count(x));
    Ok(ComplexityEstimate::new(Estimator::Lz78, k_hat, x.len()))
}

fn check_block(block: u32) -> Result<()> {
    if !(1..=MAX_BLOCK).contains(&block) {
        return Err(Error::validation(format!(
            "block size must be in 1..={MAX_BLOCK}, got {block}"
        )));
    }
    Ok(())
}

/// Counts of each `block`-bit value over the non-overlapping blocks of `x`.
pub fn block_counts(x: &BitSequence, block: u32) -> Vec<u64> {
    let b = block as usize;
    let mut counts = vec![0u64; 1 << b];
    let mut bits = x.iter();
    for _ in 0..x.len() / b {
        let mut v = 0usize;
        for bit in bits.by_ref().take(b) {
            v = (v << 1) | bit as usize;
        }
        counts[v] += 1;
    }
    counts
}

/// Empirical Shannon entropy in bits per block.
pub fn block_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let sum_c_log_c: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64).log2())
        .sum();
    (t.log2() - sum_c_log_c / t).max(0.0)
}

pub fn block_entropy_estimate(x: &BitSequence, block: u32) -> Result<ComplexityEstimate> {
    check_block(block)?;
    let n = x.len();
    if n < block as usize {
        return Err(Error::validation(format!(
            "sequence of length {n} is shorter than block size {block}"
        )));
    }
    let counts = block_counts(x, block);
    let blocks = (n / block as usize) as f64;
    let model_cost = (1u64 << block) as f64 * ceil_log2(n as u64 + 1) as f64;
    let k_hat = blocks * block_entropy(&counts) + model_cost;
    Ok(ComplexityEstimate::new(
        Estimator::BlockEntropy { block },
        k_hat,
        n,
    ))
}

/// Estimated randomness deficiency of `x`, in `[0, n]`.
pub fn deficiency(x: &BitSequence, estimator: Estimator) -> Result<f64> {
    Ok(estimator.estimate(x)?.deficiency)
}

/// `(n_i, k_hat(x_1..x_{n_i}) - n_i)` for `n_i = stride, 2*stride, ...` up to
/// `x.len()`. Bounded below for incompressible sources, falling without bound
/// for regular ones.
pub fn ml_prefix_curve(
    x: &BitSequence,
    estimator: Estimator,
    stride: usize,
) -> Result<Vec<(usize, f64)>> {
    if stride == 0 {
        return Err(Error::validation("stride must be at least 1"));
    }
    let lengths: Vec<usize> = (1..=x.len() / stride).map(|k| k * stride).collect();
    lengths
        .into_par_iter()
        .map(|len| {
            let est = estimator.estimate(&x.prefix(len))?;
            Ok((len, est.k_hat - len as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::{generate, SourceSpec};

    fn bits(s: &str) -> BitSequence {
        s.parse().unwrap()
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(ceil_log2(1 << 40), 40);
    }

    #[test]
    fn single_bit() {
        let e = lz78_estimate(&bits("0")).unwrap();
        assert_eq!(e.k_hat, 2.0);
        assert_eq!(e.deficiency, 0.0);
        assert_eq!(e.n, 1);
    }

    #[test]
    fn parse_counts() {
        // 0 | 1 | 01 | 010, then a partial 0
        assert_eq!(lz78_phrase_count(&bits("0101010")), 4);
        assert_eq!(lz78_phrase_count(&bits("01010100")), 5);
        assert_eq!(lz78_phrase_count(&bits("0000000000")), 4);
        assert!(lz78_estimate(&BitSequence::new()).is_err());
    }

    #[test]
    fn block_entropy_of_constant() {
        let e = block_entropy_estimate(&bits("0000000000000000"), 1).unwrap();
        assert_eq!(e.k_hat, 10.0);
        assert_eq!(e.deficiency, 6.0);
    }

    #[test]
    fn block_entropy_of_single_block_value() {
        let x = generate(
            &SourceSpec::Periodic {
                pattern: bits("01"),
            },
            64,
        )
        .unwrap();
        let counts = block_counts(&x, 2);
        assert_eq!(counts, vec![0, 32, 0, 0]);
        assert_eq!(block_entropy(&counts), 0.0);
    }

    #[test]
    fn block_entropy_errors() {
        let x = bits("0101");
        assert!(block_entropy_estimate(&x, 0).is_err());
        assert!(block_entropy_estimate(&x, 17).is_err());
        assert!(block_entropy_estimate(&x, 5).is_err());
    }

    #[test]
    fn estimator_names() {
        assert_eq!("lz78".parse::<Estimator>().unwrap(), Estimator::Lz78);
        assert_eq!(
            "block_entropy:4".parse::<Estimator>().unwrap(),
            Estimator::BlockEntropy { block: 4 }
        );
        assert_eq!(
            "block".parse::<Estimator>().unwrap(),
            Estimator::BlockEntropy { block: 8 }
        );
        assert!("block:0".parse::<Estimator>().is_err());
        assert!("gzip".parse::<Estimator>().is_err());
        let e = Estimator::BlockEntropy { block: 3 };
        assert_eq!(e.to_string().parse::<Estimator>().unwrap(), e);
    }

    #[test]
    fn deficiency_clamps_at_zero() {
        // "01" parses as two phrases costing 6 bits > n
        assert_eq!(deficiency(&bits("01"), Estimator::Lz78).unwrap(), 0.0);
    }

    #[test]
    fn curve_points() {
        let x = generate(&SourceSpec::Uniform { seed: 4 }, 1000).unwrap();
        let curve = ml_prefix_curve(&x, Estimator::Lz78, 300).unwrap();
        assert_eq!(
            curve.iter().map(|p| p.0).collect::<Vec<_>>(),
            vec![300, 600, 900]
        );
        assert!(ml_prefix_curve(&x, Estimator::Lz78, 0).is_err());
        assert!(ml_prefix_curve(&x, Estimator::Lz78, 2000)
            .unwrap()
            .is_empty());

        let single = ml_prefix_curve(&x, Estimator::Lz78, 1000).unwrap();
        let full = lz78_estimate(&x).unwrap();
        assert_eq!(single, vec![(1000, full.k_hat - 1000.0)]);
    }
}

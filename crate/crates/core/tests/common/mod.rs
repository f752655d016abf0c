//! Reference implementations used as oracles by the integration tests.
//!
//! These are deliberately naive: plain vectors, linear scans, hash sets.
//! They share no code with the crate beyond its public data types.

#![allow(dead_code)]

use std::collections::HashSet;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use selstab_core::rulevm::RuleState;
use selstab_core::{BitSequence, HaltReason, SelectionRule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefRun {
    pub indices: Vec<u32>,
    pub bits: Vec<bool>,
    pub examined: u64,
    pub halt: HaltReason,
}

/// Straight-line interpreter: walks one index at a time past selected
/// positions, counting examinations against a `4n` budget.
pub fn reference_run(states: &[RuleState], x: &[bool]) -> RefRun {
    let n = x.len() as i64;
    let mut taken = vec![false; x.len() + 1];
    let mut out = RefRun {
        indices: vec![],
        bits: vec![],
        examined: 0,
        halt: HaltReason::HaltFlag,
    };
    let mut pos: i64 = 0;
    let mut q = 1usize;
    loop {
        let s = states[q - 1];
        if s.halt {
            out.halt = HaltReason::HaltFlag;
            return out;
        }
        let dir: i64 = if s.move_by > 0 { 1 } else { -1 };
        let mut i = pos + s.move_by as i64;
        while i >= 1 && i <= n && taken[i as usize] {
            i += dir;
        }
        if i < 1 || i > n {
            out.halt = HaltReason::IndexOutOfRange;
            return out;
        }
        if out.examined >= 4 * x.len() as u64 {
            out.halt = HaltReason::StepBudgetExhausted;
            return out;
        }
        out.examined += 1;
        pos = i;
        if s.select {
            let b = x[i as usize - 1];
            taken[i as usize] = true;
            out.indices.push(i as u32);
            out.bits.push(b);
            q = if b { s.next_on_1 } else { s.next_on_0 } as usize;
        } else {
            q = s.next_skip as usize;
        }
    }
}

/// Phrase count of the LZ78 incremental parse, using a set of strings.
pub fn naive_lz78_phrases(x: &[bool]) -> u64 {
    let mut dict: HashSet<Vec<bool>> = HashSet::new();
    let mut cur = Vec::new();
    let mut count = 0;
    for &b in x {
        cur.push(b);
        if !dict.contains(&cur) {
            dict.insert(std::mem::take(&mut cur));
            count += 1;
        }
    }
    if !cur.is_empty() {
        count += 1;
    }
    count
}

pub fn bits_of(n: usize, word: u64) -> Vec<bool> {
    (0..n).map(|i| (word >> (n - 1 - i)) & 1 == 1).collect()
}

pub fn seq(bits: &[bool]) -> BitSequence {
    bits.iter().copied().collect()
}

/// Test-side sampler, independent of the crate's generator.
pub struct Sampler(Xoshiro256StarStar);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn coin(&mut self) -> bool {
        self.0.next_u64() >> 63 == 1
    }

    pub fn bits(&mut self, n: usize) -> Vec<bool> {
        (0..n).map(|_| self.coin()).collect()
    }

    /// A nonzero move; mostly small, occasionally anywhere in `i16`.
    pub fn move_by(&mut self, small: i64) -> i16 {
        loop {
            let m = if self.below(8) == 0 {
                self.range(i16::MIN as i64, i16::MAX as i64)
            } else {
                self.range(-small, small)
            };
            if m != 0 {
                return m as i16;
            }
        }
    }

    /// A valid rule with `states` states. Halting is rare so runs are long.
    pub fn rule(&mut self, states: usize, small_move: i64) -> SelectionRule {
        let target = |s: &mut Self| 1 + s.below(states as u64) as u16;
        let v = (0..states)
            .map(|_| RuleState {
                move_by: self.move_by(small_move),
                select: self.below(4) != 0,
                halt: self.below(16) == 0,
                next_on_0: target(self),
                next_on_1: target(self),
                next_skip: target(self),
            })
            .collect();
        SelectionRule::new(v).expect("sampled rule is valid")
    }
}

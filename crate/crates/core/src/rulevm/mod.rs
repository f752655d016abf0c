//! Admissible selection rules as finite-state programs, and the VM that runs
//! them.
//!
//! A rule walks over `x` one examination at a time. Each state carries a
//! displacement (which index to look at next), a select flag (whether to take
//! the examined bit into the subsequence) and a halt flag. Transitions depend
//! only on the values of bits that were actually selected; an unselected bit
//! is never shown to the rule.
//!
//! Already-selected indices are never examined again: if a displacement lands
//! on one, the VM keeps stepping in the same direction until it finds an
//! unselected index or leaves `1..=n`.

mod builtins;
mod dsl;
mod encoding;

use std::fmt;
use std::str::FromStr;

use crate::bitstream::BitSequence;
use crate::error::{Error, Result};

pub use builtins::{
    constant_skip_rule, crystal_rule, every_k_rule, identity_rule, random_rule,
    transient_response_rule, MAX_DEAD_TIME, MAX_RANDOM_STATES,
};
pub use dsl::{parse_rule, serialize_text};
pub use encoding::{deserialize_rule, rule_complexity, serialize_rule, RULE_MAGIC};

/// Largest number of states a rule may have; ids must fit in 16 bits.
pub const MAX_STATES: usize = u16::MAX as usize;

/// One state of a selection rule. State ids are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleState {
    /// Displacement from the previously examined index. Never zero.
    pub move_by: i16,
    pub select: bool,
    pub halt: bool,
    /// Next state after selecting a 0.
    pub next_on_0: u16,
    /// Next state after selecting a 1.
    pub next_on_1: u16,
    /// Next state after examining without selecting.
    pub next_skip: u16,
}

impl RuleState {
    /// A state whose three transitions all go to `next`.
    pub fn uniform(move_by: i16, select: bool, halt: bool, next: u16) -> Self {
        Self {
            move_by,
            select,
            halt,
            next_on_0: next,
            next_on_1: next,
            next_skip: next,
        }
    }
}

/// A validated selection rule. State 1 is the start state.
///
/// Equality and hashing are structural; the optional name is only a label.
#[derive(Debug, Clone)]
pub struct SelectionRule {
    states: Vec<RuleState>,
    name: Option<String>,
}

impl SelectionRule {
    pub fn new(states: Vec<RuleState>) -> Result<Self> {
        validate_states(&states)?;
        Ok(Self { states, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn states(&self) -> &[RuleState] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// State by 1-based id.
    pub fn state(&self, id: u16) -> &RuleState {
        &self.states[id as usize - 1]
    }
}

impl PartialEq for SelectionRule {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
    }
}

impl Eq for SelectionRule {}

impl std::hash::Hash for SelectionRule {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.states.hash(state);
    }
}

fn validate_states(states: &[RuleState]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::validation("a rule needs at least one state"));
    }
    if states.len() > MAX_STATES {
        return Err(Error::validation(format!(
            "a rule may have at most {MAX_STATES} states, got {}",
            states.len()
        )));
    }
    let count = states.len();
    for (i, s) in states.iter().enumerate() {
        let id = i as u32 + 1;
        if s.move_by == 0 {
            return Err(Error::Semantic {
                state: id,
                message: format!("state {id}: move must be nonzero"),
            });
        }
        for target in [s.next_on_0, s.next_on_1, s.next_skip] {
            if target == 0 || target as usize > count {
                return Err(Error::Semantic {
                    state: target as u32,
                    message: format!("undefined state {target} (referenced from state {id})"),
                });
            }
        }
    }
    Ok(())
}

/// Why a run stopped. Every stop is a normal outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaltReason {
    /// The current state has its halt flag set.
    HaltFlag,
    /// The next candidate index fell below 1 or above `n`.
    IndexOutOfRange,
    /// `4 * n` examinations were used up.
    StepBudgetExhausted,
}

impl HaltReason {
    pub fn as_str(self) -> &'static str {
        match self {
            HaltReason::HaltFlag => "halt_flag",
            HaltReason::IndexOutOfRange => "index_out_of_range",
            HaltReason::StepBudgetExhausted => "step_budget_exhausted",
        }
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HaltReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "halt_flag" => Ok(HaltReason::HaltFlag),
            "index_out_of_range" => Ok(HaltReason::IndexOutOfRange),
            "step_budget_exhausted" => Ok(HaltReason::StepBudgetExhausted),
            other => Err(Error::validation(format!("unknown halt reason {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionResult {
    /// `R(x)` in selection order.
    pub selected: BitSequence,
    /// 1-based indices into `x`, parallel to `selected`.
    pub selected_indices: Vec<u32>,
    pub examined_count: u64,
    pub halt_reason: HaltReason,
}

impl SelectionResult {
    pub fn sub_len(&self) -> usize {
        self.selected.len()
    }
}

/// Examination budget for a sequence of length `n`.
pub fn step_budget(n: usize) -> u64 {
    4 * n as u64
}

/// Runs `rule` over `x`. Pure and total.
pub fn run_rule(rule: &SelectionRule, x: &BitSequence) -> SelectionResult {
    let n = x.len();
    let budget = step_budget(n);
    let mut free = FreeIndices::new(n);
    let mut selected = BitSequence::new();
    let mut selected_indices = Vec::new();
    let mut examined: u64 = 0;
    let mut prev: i64 = 0;
    let mut q: u16 = 1;

    let halt_reason = loop {
        let state = rule.state(q);
        if state.halt {
            break HaltReason::HaltFlag;
        }
        let candidate = prev + state.move_by as i64;
        if candidate < 1 || candidate > n as i64 {
            break HaltReason::IndexOutOfRange;
        }
        let i = if state.move_by > 0 {
            free.next_at_or_after(candidate as usize)
        } else {
            free.next_at_or_before(candidate as usize)
        };
        if i == 0 || i > n {
            break HaltReason::IndexOutOfRange;
        }
        if examined == budget {
            break HaltReason::StepBudgetExhausted;
        }
        examined += 1;
        prev = i as i64;
        if state.select {
            let bit = x.bit0(i - 1);
            selected.push(bit);
            selected_indices.push(i as u32);
            free.take(i);
            q = if bit {
                state.next_on_1
            } else {
                state.next_on_0
            };
        } else {
            q = state.next_skip;
        }
    };

    SelectionResult {
        selected,
        selected_indices,
        examined_count: examined,
        halt_reason,
    }
}

/// Tracks unselected indices in `1..=n` with two union-find "next free"
/// forests, one per direction. Positions 0 and `n+1` are permanent sentinels.
struct FreeIndices {
    right: Vec<u32>,
    left: Vec<u32>,
}

impl FreeIndices {
    fn new(n: usize) -> Self {
        let ids: Vec<u32> = (0..=n as u32 + 1).collect();
        Self {
            right: ids.clone(),
            left: ids,
        }
    }

    fn next_at_or_after(&mut self, i: usize) -> usize {
        find(&mut self.right, i)
    }

    fn next_at_or_before(&mut self, i: usize) -> usize {
        find(&mut self.left, i)
    }

    fn take(&mut self, i: usize) {
        self.right[i] = i as u32 + 1;
        self.left[i] = i as u32 - 1;
    }
}

fn find(parent: &mut [u32], mut i: usize) -> usize {
    while parent[i] as usize != i {
        let up = parent[i] as usize;
        parent[i] = parent[up];
        i = up;
    }
    i
}

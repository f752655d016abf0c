use super::{RuleState, SelectionRule};
use crate::bitstream::rng::Xoshiro256StarStar;
use crate::error::{Error, Result};

pub const MAX_DEAD_TIME: u32 = 64;
pub const MAX_RANDOM_STATES: usize = 256;

const RANDOM_MOVES: [i16; 6] = [-3, -2, -1, 1, 2, 3];
/// Probability `1/32` that a non-start state of a random rule halts.
const RANDOM_HALT_THRESHOLD: u64 = 1 << 59;

fn stride(k: u32) -> Result<i16> {
    if k == 0 || k > i16::MAX as u32 {
        return Err(Error::validation(format!(
            "stride must be in 1..={}, got {k}",
            i16::MAX
        )));
    }
    Ok(k as i16)
}

/// Selects every bit in order.
pub fn identity_rule() -> SelectionRule {
    SelectionRule {
        states: vec![RuleState::uniform(1, true, false, 1)],
        name: Some("identity".into()),
    }
}

/// The minimal-complexity rule; structurally the identity.
pub fn crystal_rule() -> SelectionRule {
    identity_rule().with_name("crystal")
}

/// Selects `x_k, x_2k, ...`.
pub fn every_k_rule(k: u32) -> Result<SelectionRule> {
    let move_by = stride(k)?;
    Ok(SelectionRule {
        states: vec![RuleState::uniform(move_by, true, false, 1)],
        name: Some(format!("every:{k}")),
    })
}

/// Alternates a selecting state (step 1) with a skipping state (step `k`),
/// so it selects `x_1, x_{k+2}, x_{2k+3}, ...`.
pub fn constant_skip_rule(k: u32) -> Result<SelectionRule> {
    let move_by = stride(k)?;
    Ok(SelectionRule {
        states: vec![
            RuleState::uniform(1, true, false, 2),
            RuleState::uniform(move_by, false, false, 1),
        ],
        name: Some(format!("skip:{k}")),
    })
}

/// A device with recovery time `dead_time`: it selects bits in order, and
/// every selected 1 sends it through `dead_time` states that examine the
/// following indices without passing them through.
pub fn transient_response_rule(dead_time: u32) -> Result<SelectionRule> {
    if dead_time == 0 || dead_time > MAX_DEAD_TIME {
        return Err(Error::validation(format!(
            "dead time must be in 1..={MAX_DEAD_TIME}, got {dead_time}"
        )));
    }
    let d = dead_time as u16;
    let mut states = Vec::with_capacity(d as usize + 1);
    states.push(RuleState {
        move_by: 1,
        select: true,
        halt: false,
        next_on_0: 1,
        next_on_1: 2,
        next_skip: 1,
    });
    for id in 2..=d + 1 {
        let next = if id == d + 1 { 1 } else { id + 1 };
        states.push(RuleState::uniform(1, false, false, next));
    }
    Ok(SelectionRule {
        states,
        name: Some(format!("transient:{dead_time}")),
    })
}

/// A pseudorandom rule drawn from the crate's fixed generator.
///
/// Per state, in order: move uniform over `{-3..-1, 1..3}`, select with
/// probability 1/2, halt with probability 1/32 (never for the start state),
/// then the three transitions uniform over all states.
pub fn random_rule(seed: u64, num_states: usize) -> Result<SelectionRule> {
    if num_states == 0 || num_states > MAX_RANDOM_STATES {
        return Err(Error::validation(format!(
            "random rules take 1..={MAX_RANDOM_STATES} states, got {num_states}"
        )));
    }
    let mut rng = Xoshiro256StarStar::from_seed(seed);
    let count = num_states as u64;
    let states = (0..num_states)
        .map(|i| {
            let move_by = RANDOM_MOVES[rng.below(RANDOM_MOVES.len() as u64) as usize];
            let select = rng.next_u64() >> 63 == 1;
            let halt = rng.chance(RANDOM_HALT_THRESHOLD) && i != 0;
            RuleState {
                move_by,
                select,
                halt,
                next_on_0: rng.below(count) as u16 + 1,
                next_on_1: rng.below(count) as u16 + 1,
                next_skip: rng.below(count) as u16 + 1,
            }
        })
        .collect();
    Ok(SelectionRule {
        states,
        name: Some(format!("random:seed={seed}:states={num_states}")),
    })
}

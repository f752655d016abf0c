//! Canonical binary form of a rule.
//!
//! ```text
//! "RULE"            4 bytes
//! state count       u16 little-endian
//! per state, 9 bytes:
//!   move            i16 little-endian, two's complement
//!   flags           u8, bit0 = select, bit1 = halt
//!   next_on_0       u16 little-endian
//!   next_on_1       u16 little-endian
//!   next_skip       u16 little-endian
//! ```
//!
//! The rule name is not encoded, so structurally equal rules share bytes.

use super::{validate_states, RuleState, SelectionRule};
use crate::error::{Error, Result};

pub const RULE_MAGIC: &[u8; 4] = b"RULE";
const HEADER_LEN: usize = 6;
const RECORD_LEN: usize = 9;
const FLAG_SELECT: u8 = 0b01;
const FLAG_HALT: u8 = 0b10;

pub fn serialize_rule(rule: &SelectionRule) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * rule.num_states());
    out.extend_from_slice(RULE_MAGIC);
    out.extend_from_slice(&(rule.num_states() as u16).to_le_bytes());
    for s in rule.states() {
        out.extend_from_slice(&s.move_by.to_le_bytes());
        let mut flags = 0;
        if s.select {
            flags |= FLAG_SELECT;
        }
        if s.halt {
            flags |= FLAG_HALT;
        }
        out.push(flags);
        out.extend_from_slice(&s.next_on_0.to_le_bytes());
        out.extend_from_slice(&s.next_on_1.to_le_bytes());
        out.extend_from_slice(&s.next_skip.to_le_bytes());
    }
    out
}

pub fn deserialize_rule(bytes: &[u8]) -> Result<SelectionRule> {
    let fmt_err = |offset: usize, message: String| Error::Format {
        offset: offset as u64,
        message,
    };
    if bytes.len() < 4 || &bytes[..4] != RULE_MAGIC {
        return Err(fmt_err(0, "bad magic, expected \"RULE\"".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(fmt_err(bytes.len(), "truncated header".into()));
    }
    let count = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
    let expected = HEADER_LEN + RECORD_LEN * count;
    if bytes.len() != expected {
        let offset = bytes.len().min(expected);
        return Err(fmt_err(
            offset,
            format!(
                "expected {expected} bytes for {count} states, found {}",
                bytes.len()
            ),
        ));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let mut states = Vec::with_capacity(count);
    for k in 0..count {
        let base = HEADER_LEN + RECORD_LEN * k;
        let flags = bytes[base + 2];
        if flags & !(FLAG_SELECT | FLAG_HALT) != 0 {
            return Err(fmt_err(base + 2, format!("unknown flag bits {flags:#04x}")));
        }
        states.push(RuleState {
            move_by: i16::from_le_bytes([bytes[base], bytes[base + 1]]),
            select: flags & FLAG_SELECT != 0,
            halt: flags & FLAG_HALT != 0,
            next_on_0: u16_at(base + 3),
            next_on_1: u16_at(base + 5),
            next_skip: u16_at(base + 7),
        });
    }
    validate_states(&states)?;
    Ok(SelectionRule { states, name: None })
}

/// Complexity proxy for a rule: bit length of its canonical encoding.
pub fn rule_complexity(rule: &SelectionRule) -> u64 {
    8 * (HEADER_LEN + RECORD_LEN * rule.num_states()) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulevm::{crystal_rule, identity_rule, random_rule};

    #[test]
    fn identity_encoding() {
        let bytes = serialize_rule(&identity_rule());
        assert_eq!(
            bytes,
            [b'R', b'U', b'L', b'E', 1, 0, 1, 0, 0b01, 1, 0, 1, 0, 1, 0]
        );
        assert_eq!(bytes.len(), 15);
        assert_eq!(rule_complexity(&identity_rule()), 120);
        assert_eq!(
            rule_complexity(&crystal_rule()),
            rule_complexity(&identity_rule())
        );
    }

    #[test]
    fn negative_move_and_flags() {
        let rule = SelectionRule::new(vec![
            RuleState {
                move_by: -2,
                select: false,
                halt: true,
                next_on_0: 2,
                next_on_1: 1,
                next_skip: 2,
            },
            RuleState::uniform(i16::MIN, true, true, 1),
        ])
        .unwrap();
        let bytes = serialize_rule(&rule);
        assert_eq!(&bytes[6..15], &[0xFE, 0xFF, 0b10, 2, 0, 1, 0, 2, 0]);
        assert_eq!(&bytes[15..17], &[0x00, 0x80]);
        assert_eq!(bytes[17], 0b11);
        assert_eq!(deserialize_rule(&bytes).unwrap(), rule);
    }

    #[test]
    fn each_state_adds_nine_bytes() {
        let one = rule_complexity(&random_rule(4, 1).unwrap());
        let two = rule_complexity(&random_rule(4, 2).unwrap());
        assert_eq!(two, one + 72);
    }

    #[test]
    fn name_is_not_encoded() {
        assert_eq!(
            serialize_rule(&identity_rule().with_name("a")),
            serialize_rule(&identity_rule().with_name("b"))
        );
    }

    #[test]
    fn malformed_inputs() {
        let good = serialize_rule(&identity_rule());
        assert!(matches!(
            deserialize_rule(b"RUL"),
            Err(Error::Format { offset: 0, .. })
        ));
        assert!(matches!(
            deserialize_rule(&good[..10]),
            Err(Error::Format { offset: 10, .. })
        ));
        let mut bad_flags = good.clone();
        bad_flags[8] = 0x04;
        assert!(matches!(
            deserialize_rule(&bad_flags),
            Err(Error::Format { offset: 8, .. })
        ));
        let mut bad_target = good.clone();
        bad_target[9] = 2;
        assert!(matches!(
            deserialize_rule(&bad_target),
            Err(Error::Semantic { .. })
        ));
        let mut zero_move = good;
        zero_move[6] = 0;
        assert!(matches!(
            deserialize_rule(&zero_move),
            Err(Error::Semantic { .. })
        ));
    }
}

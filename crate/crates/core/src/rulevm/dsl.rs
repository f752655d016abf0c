//! Text form of a rule, one state per line:
//!
//! ```text
//! # comments run to end of line
//! state 1: move +1 select halt=no -> 1,2,1
//! state 2: move +1 skip halt=no -> 1,1,1
//! ```
//!
//! The transition triple is `on0,on1,skip`. Ids must be exactly `1..=N` in
//! any order; state 1 starts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{validate_states, RuleState, SelectionRule, MAX_STATES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Kind<'a> {
    Word(&'a str),
    Int(&'a str),
    Colon,
    Comma,
    Equals,
    Arrow,
}

impl Kind<'_> {
    fn describe(&self) -> String {
        match self {
            Kind::Word(w) => format!("{w:?}"),
            Kind::Int(i) => format!("integer {i}"),
            Kind::Colon => "':'".into(),
            Kind::Comma => "','".into(),
            Kind::Equals => "'='".into(),
            Kind::Arrow => "'->'".into(),
        }
    }
}

#[derive(Debug)]
struct Token<'a> {
    kind: Kind<'a>,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Token<'_>>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    // columns count characters, 1-based
    let column = |byte: usize| text[..byte].chars().count() + 1;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let kind = match b {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                continue;
            }
            b'#' => break,
            b':' => {
                i += 1;
                Kind::Colon
            }
            b',' => {
                i += 1;
                Kind::Comma
            }
            b'=' => {
                i += 1;
                Kind::Equals
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                Kind::Arrow
            }
            b'+' | b'-' | b'0'..=b'9' => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if !text[start..i].bytes().any(|c| c.is_ascii_digit()) {
                    return Err(syntax(line_no, column(start), "sign without digits"));
                }
                Kind::Int(&text[start..i])
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Kind::Word(&text[start..i])
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(
                    line_no,
                    column(start),
                    format!("unexpected character {ch:?}"),
                ));
            }
        };
        tokens.push(Token {
            kind,
            column: column(start),
        });
    }
    Ok(tokens)
}

struct LineParser<'a> {
    line: usize,
    end_column: usize,
    tokens: std::vec::IntoIter<Token<'a>>,
}

impl<'a> LineParser<'a> {
    fn next(&mut self, what: &str) -> Result<Token<'a>> {
        self.tokens.next().ok_or_else(|| {
            syntax(
                self.line,
                self.end_column,
                format!("expected {what}, found end of line"),
            )
        })
    }

    fn unexpected(&self, tok: &Token<'_>, what: &str) -> Error {
        syntax(
            self.line,
            tok.column,
            format!("expected {what}, found {}", tok.kind.describe()),
        )
    }

    fn expect(&mut self, kind: Kind<'_>, what: &str) -> Result<()> {
        let tok = self.next(what)?;
        if tok.kind == kind {
            Ok(())
        } else {
            Err(self.unexpected(&tok, what))
        }
    }

    fn word(&mut self, choices: &[&str], what: &str) -> Result<(usize, Token<'a>)> {
        let tok = self.next(what)?;
        if let Kind::Word(w) = tok.kind {
            if let Some(pos) = choices.iter().position(|c| *c == w) {
                return Ok((pos, tok));
            }
        }
        Err(self.unexpected(&tok, what))
    }

    fn int(&mut self, what: &str) -> Result<(&'a str, usize)> {
        let tok = self.next(what)?;
        match tok.kind {
            Kind::Int(s) => Ok((s, tok.column)),
            _ => Err(self.unexpected(&tok, what)),
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.tokens.next() {
            None => Ok(()),
            Some(tok) => Err(self.unexpected(&tok, "end of line")),
        }
    }
}

fn state_id(text: &str, line: usize, column: usize) -> Result<u16> {
    if text.starts_with(['+', '-']) {
        return Err(syntax(
            line,
            column,
            format!("state id {text} must be unsigned"),
        ));
    }
    match text.parse::<u32>() {
        Ok(v) if (1..=MAX_STATES as u32).contains(&v) => Ok(v as u16),
        _ => Err(syntax(
            line,
            column,
            format!("state id {text} out of range 1..={MAX_STATES}"),
        )),
    }
}

fn parse_line(line: usize, text: &str) -> Result<Option<(u16, RuleState)>> {
    let tokens = lex(line, text)?;
    if tokens.is_empty() {
        return Ok(None);
    }
    let mut p = LineParser {
        line,
        end_column: text.chars().count() + 1,
        tokens: tokens.into_iter(),
    };
    p.word(&["state"], "\"state\"")?;
    let (id_text, id_col) = p.int("state id")?;
    let id = state_id(id_text, line, id_col)?;
    p.expect(Kind::Colon, "':'")?;
    p.word(&["move"], "\"move\"")?;
    let (move_text, _) = p.int("move displacement")?;
    let move_by = match move_text.parse::<i64>() {
        Ok(0) => {
            return Err(Error::Semantic {
                state: id as u32,
                message: format!("state {id}: move must be nonzero (line {line})"),
            })
        }
        Ok(v) if (i16::MIN as i64..=i16::MAX as i64).contains(&v) => v as i16,
        _ => {
            return Err(Error::Semantic {
                state: id as u32,
                message: format!(
                    "state {id}: move {move_text} outside {}..={} (line {line})",
                    i16::MIN,
                    i16::MAX
                ),
            })
        }
    };
    let (action, _) = p.word(&["select", "skip"], "\"select\" or \"skip\"")?;
    p.word(&["halt"], "\"halt\"")?;
    p.expect(Kind::Equals, "'='")?;
    let (halt, _) = p.word(&["no", "yes"], "\"yes\" or \"no\"")?;
    p.expect(Kind::Arrow, "'->'")?;
    let mut targets = [0u16; 3];
    for (k, slot) in targets.iter_mut().enumerate() {
        if k > 0 {
            p.expect(Kind::Comma, "','")?;
        }
        let (t, col) = p.int("target state id")?;
        *slot = state_id(t, line, col)?;
    }
    p.finish()?;
    Ok(Some((
        id,
        RuleState {
            move_by,
            select: action == 0,
            halt: halt == 1,
            next_on_0: targets[0],
            next_on_1: targets[1],
            next_skip: targets[2],
        },
    )))
}

pub fn parse_rule(text: &str) -> Result<SelectionRule> {
    let mut defined: BTreeMap<u16, (RuleState, usize)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if let Some((id, state)) = parse_line(line, raw)? {
            if let Some((_, first)) = defined.get(&id) {
                return Err(Error::Semantic {
                    state: id as u32,
                    message: format!(
                        "duplicate state id {id} on line {line} (first defined on line {first})"
                    ),
                });
            }
            defined.insert(id, (state, line));
        }
    }
    if defined.is_empty() {
        return Err(Error::validation("rule text defines no states"));
    }
    for (expected, &id) in (1u16..).zip(defined.keys()) {
        if id != expected {
            return Err(Error::Semantic {
                state: expected as u32,
                message: format!(
                    "state ids must be contiguous from 1, state {expected} is missing"
                ),
            });
        }
    }
    let states: Vec<RuleState> = defined.into_values().map(|(s, _)| s).collect();
    validate_states(&states)?;
    Ok(SelectionRule { states, name: None })
}

/// Renders `rule` in the text form accepted by [`parse_rule`]. The name, if
/// any, becomes a leading comment.
pub fn serialize_text(rule: &SelectionRule) -> String {
    let mut out = String::new();
    if let Some(name) = rule.name() {
        let _ = writeln!(out, "# {}", name.replace(['\n', '\r'], " "));
    }
    for (i, s) in rule.states().iter().enumerate() {
        let _ = writeln!(
            out,
            "state {}: move {:+} {} halt={} -> {},{},{}",
            i + 1,
            s.move_by,
            if s.select { "select" } else { "skip" },
            if s.halt { "yes" } else { "no" },
            s.next_on_0,
            s.next_on_1,
            s.next_skip
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulevm::{identity_rule, transient_response_rule};

    #[test]
    fn single_state_identity() {
        let rule = parse_rule("state 1: move +1 select halt=no -> 1,1,1").unwrap();
        assert_eq!(rule, identity_rule());
    }

    #[test]
    fn comments_blank_lines_and_order() {
        let text = "\
# a two-state rule
state 2: move -1 skip halt=yes -> 1,1,1   # trailing

state 1 : move 3 select halt = no -> 2,1,2
";
        let rule = parse_rule(text).unwrap();
        assert_eq!(rule.num_states(), 2);
        assert_eq!(rule.states()[0].move_by, 3);
        assert_eq!(rule.states()[0].next_on_0, 2);
        assert!(rule.states()[1].halt);
        assert!(!rule.states()[1].select);
    }

    #[test]
    fn undefined_target() {
        let text =
            "state 1: move +1 select halt=no -> 1,3,1\nstate 2: move +1 select halt=no -> 1,1,1";
        let err = parse_rule(text).unwrap_err();
        assert!(matches!(err, Error::Semantic { state: 3, .. }));
        assert!(err.to_string().contains("undefined state 3"), "{err}");
    }

    #[test]
    fn semantic_errors() {
        let dup =
            "state 1: move +1 select halt=no -> 1,1,1\nstate 1: move +2 select halt=no -> 1,1,1";
        assert!(matches!(
            parse_rule(dup),
            Err(Error::Semantic { state: 1, .. })
        ));
        let gap =
            "state 1: move +1 select halt=no -> 1,1,1\nstate 3: move +2 select halt=no -> 1,1,1";
        assert!(matches!(
            parse_rule(gap),
            Err(Error::Semantic { state: 2, .. })
        ));
        let zero = "state 1: move 0 select halt=no -> 1,1,1";
        assert!(matches!(
            parse_rule(zero),
            Err(Error::Semantic { state: 1, .. })
        ));
        let big = "state 1: move +40000 select halt=no -> 1,1,1";
        assert!(matches!(
            parse_rule(big),
            Err(Error::Semantic { state: 1, .. })
        ));
        assert!(parse_rule("# nothing here\n").is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let pos = |text: &str| match parse_rule(text) {
            Err(Error::Syntax { line, column, .. }) => (line, column),
            other => panic!("expected syntax error, got {other:?}"),
        };
        assert_eq!(pos("state 1: move +1 pick halt=no -> 1,1,1"), (1, 18));
        assert_eq!(pos("\nstate 1 move +1 select halt=no -> 1,1,1"), (2, 9));
        assert_eq!(pos("state 1: move +1 select halt=no -> 1,1"), (1, 39));
        assert_eq!(
            pos("state 1: move +1 select halt=no -> 1,1,1 extra"),
            (1, 42)
        );
        assert_eq!(pos("state 1: move +1 select halt=no => 1,1,1"), (1, 34));
        assert_eq!(pos("state -1: move +1 select halt=no -> 1,1,1"), (1, 7));
        assert_eq!(pos("state 1: move + select halt=no -> 1,1,1"), (1, 15));
    }

    #[test]
    fn text_round_trip_keeps_structure() {
        let rule = transient_response_rule(3).unwrap();
        let text = serialize_text(&rule);
        assert!(text.starts_with("# transient:3\nstate 1: move +1 select halt=no -> 1,2,1\n"));
        assert_eq!(parse_rule(&text).unwrap(), rule);
    }
}

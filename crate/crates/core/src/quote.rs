//! Self-description: encode a machine as a string over a fixed 16-symbol
//! alphabet, so machines can read and manipulate other machines on tape.
//!
//! Layout: `#<alphabet>:<vocabulary>:<instructions>.` where the alphabet is
//! the sorted list of symbol character codes (comma-separated), the
//! vocabulary is the sorted identifier list (each one comma-separated
//! character codes, entries `;`-separated), and each instruction is a
//! `|`-separated record starting with a numeric tag (0 print, 1 move right,
//! 2 move left, 3 oracle branch, 4 action, 5 reading action) followed by its
//! operands. Identifiers are referenced by vocabulary index. Names are
//! metadata and are not encoded.
//!
//! Decoding is strict: the decoded machine must validate and must re-encode
//! to exactly the consumed text, so every accepted quote is the one canonical
//! spelling of its machine.

use thiserror::Error;

use crate::machine::{Instruction, Machine, StateId, ValidationReport};

/// Every character a quote can contain, in character-code order.
pub const QUOTE_ALPHABET: [char; 16] = [
    '#', ',', '.', '0', '1', '2', '3', '4', '5', '6', '7', '8', '9', ':', ';', '|',
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed quote: {0}")]
    Malformed(String),
    #[error("quoted machine invalid: {0}")]
    InvalidMachine(ValidationReport),
    #[error("quote is not in canonical form")]
    NonCanonical,
    #[error("trailing input after quote")]
    TrailingInput,
}

fn malformed(message: impl Into<String>) -> DecodeError {
    DecodeError::Malformed(message.into())
}

/// Encode a machine. The machine is canonicalized first, so structurally
/// equal machines quote identically. Instructions must reference declared
/// identifiers, which holds for any machine that validates.
pub fn quote(m: &Machine) -> String {
    let m = m.canonicalize();
    let alphabet = m
        .alphabet
        .iter()
        .map(|c| (*c as u32).to_string())
        .collect::<Vec<_>>()
        .join(",");
    let vocab: Vec<&String> = m.vocabulary.iter().collect();
    let vocab_text = vocab
        .iter()
        .map(|id| {
            id.chars()
                .map(|c| (c as u32).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";");
    let index_of = |id: &str| {
        vocab
            .iter()
            .position(|v| v.as_str() == id)
            .expect("instruction references an undeclared identifier")
            .to_string()
    };
    let instructions = m
        .instructions
        .iter()
        .map(|i| {
            let fields: Vec<String> = match i {
                Instruction::Print {
                    state,
                    read,
                    write,
                    next,
                } => vec![
                    "0".into(),
                    state.0.to_string(),
                    (*read as u32).to_string(),
                    (*write as u32).to_string(),
                    next.0.to_string(),
                ],
                Instruction::MoveRight { state, read, next } => vec![
                    "1".into(),
                    state.0.to_string(),
                    (*read as u32).to_string(),
                    next.0.to_string(),
                ],
                Instruction::MoveLeft { state, read, next } => vec![
                    "2".into(),
                    state.0.to_string(),
                    (*read as u32).to_string(),
                    next.0.to_string(),
                ],
                Instruction::OracleBranch {
                    state,
                    read,
                    yes,
                    no,
                } => vec![
                    "3".into(),
                    state.0.to_string(),
                    (*read as u32).to_string(),
                    yes.0.to_string(),
                    no.0.to_string(),
                ],
                Instruction::Act {
                    state,
                    read,
                    action,
                    ok,
                    fail,
                } => vec![
                    "4".into(),
                    state.0.to_string(),
                    (*read as u32).to_string(),
                    index_of(action),
                    ok.0.to_string(),
                    fail.0.to_string(),
                ],
                Instruction::ReadAct {
                    state,
                    read,
                    reading,
                    yes,
                    no,
                    fail,
                } => vec![
                    "5".into(),
                    state.0.to_string(),
                    (*read as u32).to_string(),
                    index_of(reading),
                    yes.0.to_string(),
                    no.0.to_string(),
                    fail.0.to_string(),
                ],
            };
            fields.join("|")
        })
        .collect::<Vec<_>>()
        .join(";");
    format!("#{alphabet}:{vocab_text}:{instructions}.")
}

fn parse_u32(s: &str) -> Result<u32, DecodeError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(format!("expected a number, found '{s}'")));
    }
    s.parse()
        .map_err(|_| malformed(format!("number out of range: '{s}'")))
}

fn parse_char(s: &str) -> Result<char, DecodeError> {
    let code = parse_u32(s)?;
    char::from_u32(code).ok_or_else(|| malformed(format!("invalid character code {code}")))
}

fn split_section(section: &str, sep: char) -> Vec<&str> {
    if section.is_empty() {
        Vec::new()
    } else {
        section.split(sep).collect()
    }
}

fn decode_instruction(record: &str, vocab: &[String]) -> Result<Instruction, DecodeError> {
    let fields: Vec<&str> = record.split('|').collect();
    let tag = fields[0];
    let ops = &fields[1..];
    let expect = |n: usize| -> Result<(), DecodeError> {
        if ops.len() == n {
            Ok(())
        } else {
            Err(malformed(format!(
                "instruction tag {tag} takes {n} operands, found {}",
                ops.len()
            )))
        }
    };
    let state = |s: &str| parse_u32(s).map(StateId);
    let ident = |s: &str| -> Result<String, DecodeError> {
        let idx = parse_u32(s)? as usize;
        vocab
            .get(idx)
            .cloned()
            .ok_or_else(|| malformed(format!("vocabulary index {idx} out of range")))
    };
    match tag {
        "0" => {
            expect(4)?;
            Ok(Instruction::Print {
                state: state(ops[0])?,
                read: parse_char(ops[1])?,
                write: parse_char(ops[2])?,
                next: state(ops[3])?,
            })
        }
        "1" => {
            expect(3)?;
            Ok(Instruction::MoveRight {
                state: state(ops[0])?,
                read: parse_char(ops[1])?,
                next: state(ops[2])?,
            })
        }
        "2" => {
            expect(3)?;
            Ok(Instruction::MoveLeft {
                state: state(ops[0])?,
                read: parse_char(ops[1])?,
                next: state(ops[2])?,
            })
        }
        "3" => {
            expect(4)?;
            Ok(Instruction::OracleBranch {
                state: state(ops[0])?,
                read: parse_char(ops[1])?,
                yes: state(ops[2])?,
                no: state(ops[3])?,
            })
        }
        "4" => {
            expect(5)?;
            Ok(Instruction::Act {
                state: state(ops[0])?,
                read: parse_char(ops[1])?,
                action: ident(ops[2])?,
                ok: state(ops[3])?,
                fail: state(ops[4])?,
            })
        }
        "5" => {
            expect(6)?;
            Ok(Instruction::ReadAct {
                state: state(ops[0])?,
                read: parse_char(ops[1])?,
                reading: ident(ops[2])?,
                yes: state(ops[3])?,
                no: state(ops[4])?,
                fail: state(ops[5])?,
            })
        }
        other => Err(malformed(format!("unknown instruction tag '{other}'"))),
    }
}

/// Decode one quote from the front of `s`. Returns the machine and the text
/// after the terminating `.`.
pub fn decode_prefix(s: &str) -> Result<(Machine, &str), DecodeError> {
    let Some(body) = s.strip_prefix('#') else {
        return Err(malformed("a quote starts with '#'"));
    };
    let Some(dot) = body.find('.') else {
        return Err(malformed("unterminated quote"));
    };
    let content = &body[..dot];
    let rest = &body[dot + 1..];
    let consumed = &s[..dot + 2];
    if let Some(bad) = content
        .chars()
        .find(|c| !matches!(c, '0'..='9' | ',' | ';' | ':' | '|'))
    {
        return Err(malformed(format!("unexpected character '{bad}'")));
    }
    let sections: Vec<&str> = content.split(':').collect();
    if sections.len() != 3 {
        return Err(malformed(format!(
            "expected 3 sections, found {}",
            sections.len()
        )));
    }

    let mut alphabet = Vec::new();
    for code in split_section(sections[0], ',') {
        alphabet.push(parse_char(code)?);
    }
    let mut vocab: Vec<String> = Vec::new();
    for entry in split_section(sections[1], ';') {
        if entry.is_empty() {
            return Err(malformed("empty identifier in vocabulary"));
        }
        let mut id = String::new();
        for code in entry.split(',') {
            id.push(parse_char(code)?);
        }
        vocab.push(id);
    }
    let mut instructions = Vec::new();
    for record in split_section(sections[2], ';') {
        instructions.push(decode_instruction(record, &vocab)?);
    }

    let machine = Machine::new("", alphabet, vocab, instructions);
    let report = machine.validate();
    if !report.is_valid() {
        return Err(DecodeError::InvalidMachine(report));
    }
    if quote(&machine) != consumed {
        return Err(DecodeError::NonCanonical);
    }
    Ok((machine, rest))
}

/// Decode a string that must be exactly one quote.
pub fn unquote(s: &str) -> Result<Machine, DecodeError> {
    let (machine, rest) = decode_prefix(s)?;
    if !rest.is_empty() {
        return Err(DecodeError::TrailingInput);
    }
    Ok(machine)
}

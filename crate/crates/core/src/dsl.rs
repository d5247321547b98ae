//! Text format for machines.
//!
//! One instruction per line, tokens separated by whitespace:
//!
//! ```text
//! q0 _ h q1              # print h, stay put, go to q1
//! q1 h R q2              # move right
//! q1 i L q2              # move left
//! q2 _ ? q3 q4           # oracle branch: yes -> q3, no -> q4
//! q2 _ !roll q3 q4       # perform action roll: ok -> q3, cannot -> q4
//! q2 _ ?shows_6 q3 q4 q5 # reading action: true/false/cannot
//! ```
//!
//! Optional headers before the instructions: `name:`, `alphabet:` (symbols,
//! blank `_` implied), `actions:` (identifiers). Missing headers are inferred
//! from the instructions. `#` starts a comment. A backslash escapes the next
//! character, for symbols that would otherwise read as syntax: `\R` `\L` `\?`
//! `\!` `\#` `\\`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::machine::{Instruction, Machine, StateId, Symbol, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("machine invalid: {0}")]
    Invalid(ValidationReport),
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> DslError {
    DslError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

#[derive(Debug)]
struct Token {
    text: String,
    first_escaped: bool,
    col: usize,
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>, DslError> {
    let mut tokens: Vec<Token> = Vec::new();
    let mut cur: Option<Token> = None;
    let mut chars = line.chars().enumerate();
    while let Some((i, c)) = chars.next() {
        let (ch, escaped) = if c == '\\' {
            match chars.next() {
                Some((_, esc)) => (esc, true),
                None => return Err(syntax(line_no, i + 1, "dangling escape at end of line")),
            }
        } else {
            (c, false)
        };
        if !escaped && ch == '#' {
            break;
        }
        if !escaped && ch.is_whitespace() {
            if let Some(t) = cur.take() {
                tokens.push(t);
            }
            continue;
        }
        let t = cur.get_or_insert(Token {
            text: String::new(),
            first_escaped: escaped,
            col: i + 1,
        });
        t.text.push(ch);
    }
    if let Some(t) = cur.take() {
        tokens.push(t);
    }
    Ok(tokens)
}

fn parse_state(tok: &Token, line: usize) -> Result<StateId, DslError> {
    if !tok.first_escaped {
        if let Some(digits) = tok.text.strip_prefix('q') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(n) = digits.parse() {
                    return Ok(StateId(n));
                }
            }
        }
    }
    Err(syntax(
        line,
        tok.col,
        format!("expected a state like q0, found '{}'", tok.text),
    ))
}

fn parse_symbol(tok: &Token, line: usize) -> Result<Symbol, DslError> {
    let mut cs = tok.text.chars();
    match (cs.next(), cs.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(syntax(
            line,
            tok.col,
            format!("expected a single symbol, found '{}'", tok.text),
        )),
    }
}

fn expect_len(tokens: &[Token], want: usize, form: &str, line: usize) -> Result<(), DslError> {
    if tokens.len() == want {
        return Ok(());
    }
    let col = tokens.get(want).or_else(|| tokens.last()).map_or(1, |t| t.col);
    Err(syntax(
        line,
        col,
        format!("{form} takes {want} tokens, found {}", tokens.len()),
    ))
}

fn parse_instruction(tokens: &[Token], line: usize) -> Result<Instruction, DslError> {
    if tokens.len() < 3 {
        return Err(syntax(line, tokens[0].col, "incomplete instruction"));
    }
    let state = parse_state(&tokens[0], line)?;
    let read = parse_symbol(&tokens[1], line)?;
    let op = &tokens[2];
    if !op.first_escaped && op.text == "R" {
        expect_len(tokens, 4, "a move-right instruction", line)?;
        return Ok(Instruction::MoveRight {
            state,
            read,
            next: parse_state(&tokens[3], line)?,
        });
    }
    if !op.first_escaped && op.text == "L" {
        expect_len(tokens, 4, "a move-left instruction", line)?;
        return Ok(Instruction::MoveLeft {
            state,
            read,
            next: parse_state(&tokens[3], line)?,
        });
    }
    if !op.first_escaped && op.text == "?" {
        expect_len(tokens, 5, "an oracle branch", line)?;
        return Ok(Instruction::OracleBranch {
            state,
            read,
            yes: parse_state(&tokens[3], line)?,
            no: parse_state(&tokens[4], line)?,
        });
    }
    if !op.first_escaped && op.text.starts_with('?') {
        expect_len(tokens, 6, "a reading-action instruction", line)?;
        return Ok(Instruction::ReadAct {
            state,
            read,
            reading: op.text[1..].to_string(),
            yes: parse_state(&tokens[3], line)?,
            no: parse_state(&tokens[4], line)?,
            fail: parse_state(&tokens[5], line)?,
        });
    }
    if !op.first_escaped && op.text.starts_with('!') {
        expect_len(tokens, 5, "an action instruction", line)?;
        return Ok(Instruction::Act {
            state,
            read,
            action: op.text[1..].to_string(),
            ok: parse_state(&tokens[3], line)?,
            fail: parse_state(&tokens[4], line)?,
        });
    }
    expect_len(tokens, 4, "a print instruction", line)?;
    Ok(Instruction::Print {
        state,
        read,
        write: parse_symbol(op, line)?,
        next: parse_state(&tokens[3], line)?,
    })
}

/// Parse DSL text into a validated machine. Duplicate dispatch keys, symbols
/// outside a declared alphabet, and identifiers outside a declared action list
/// are rejected as [`DslError::Invalid`].
pub fn parse_dsl(text: &str) -> Result<Machine, DslError> {
    let mut name = None;
    let mut alphabet: Option<Vec<Symbol>> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut instructions = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(raw, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let first = &tokens[0];
        let header = if first.first_escaped { None } else { Some(first.text.as_str()) };
        match header {
            Some("name:") => {
                if name.is_some() {
                    return Err(syntax(line_no, first.col, "duplicate name header"));
                }
                name = Some(
                    tokens[1..]
                        .iter()
                        .map(|t| t.text.as_str())
                        .collect::<Vec<_>>()
                        .join(" "),
                );
            }
            Some("alphabet:") => {
                if alphabet.is_some() {
                    return Err(syntax(line_no, first.col, "duplicate alphabet header"));
                }
                let mut syms = Vec::new();
                for t in &tokens[1..] {
                    syms.push(parse_symbol(t, line_no)?);
                }
                alphabet = Some(syms);
            }
            Some("actions:") => {
                if actions.is_some() {
                    return Err(syntax(line_no, first.col, "duplicate actions header"));
                }
                actions = Some(tokens[1..].iter().map(|t| t.text.clone()).collect());
            }
            _ => instructions.push(parse_instruction(&tokens, line_no)?),
        }
    }

    let alphabet = alphabet.unwrap_or_else(|| {
        instructions.iter().flat_map(|i| i.symbols()).collect()
    });
    let actions = actions.unwrap_or_else(|| {
        instructions
            .iter()
            .filter_map(|i| i.action_id())
            .map(|(_, id)| id.to_string())
            .collect()
    });
    let machine = Machine::new(name.unwrap_or_default(), alphabet, actions, instructions);
    let report = machine.validate();
    if !report.is_valid() {
        return Err(DslError::Invalid(report));
    }
    Ok(machine)
}

const NEEDS_ESCAPE: [char; 6] = ['R', 'L', '?', '!', '\\', '#'];

fn render_symbol(s: Symbol) -> String {
    if NEEDS_ESCAPE.contains(&s) {
        format!("\\{s}")
    } else {
        s.to_string()
    }
}

fn render_id(id: &str) -> String {
    let mut out = String::new();
    for c in id.chars() {
        if c == '\\' || c == '#' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// One instruction as a DSL line, without a trailing newline.
pub fn render_instruction(i: &Instruction) -> String {
    match i {
        Instruction::Print {
            state,
            read,
            write,
            next,
        } => format!(
            "{state} {} {} {next}",
            render_symbol(*read),
            render_symbol(*write)
        ),
        Instruction::MoveRight { state, read, next } => {
            format!("{state} {} R {next}", render_symbol(*read))
        }
        Instruction::MoveLeft { state, read, next } => {
            format!("{state} {} L {next}", render_symbol(*read))
        }
        Instruction::OracleBranch {
            state,
            read,
            yes,
            no,
        } => format!("{state} {} ? {yes} {no}", render_symbol(*read)),
        Instruction::Act {
            state,
            read,
            action,
            ok,
            fail,
        } => format!(
            "{state} {} !{} {ok} {fail}",
            render_symbol(*read),
            render_id(action)
        ),
        Instruction::ReadAct {
            state,
            read,
            reading,
            yes,
            no,
            fail,
        } => format!(
            "{state} {} ?{} {yes} {no} {fail}",
            render_symbol(*read),
            render_id(reading)
        ),
    }
}

/// Render a machine as DSL text in canonical form: explicit headers, states
/// renumbered in discovery order, instructions sorted by dispatch key.
/// `parse_dsl(render_dsl(m))` reproduces the canonicalized machine exactly.
pub fn render_dsl(m: &Machine) -> String {
    let m = m.canonicalize();
    let mut out = String::new();
    if !m.name.is_empty() {
        let _ = writeln!(out, "name: {}", m.name);
    }
    let alphabet = m
        .alphabet
        .iter()
        .map(|s| render_symbol(*s))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "alphabet: {alphabet}");
    if !m.vocabulary.is_empty() {
        let actions = m
            .vocabulary
            .iter()
            .map(|id| render_id(id))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "actions: {actions}");
    }
    if !m.instructions.is_empty() {
        out.push('\n');
        for i in &m.instructions {
            let _ = writeln!(out, "{}", render_instruction(i));
        }
    }
    out
}

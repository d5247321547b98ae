//! Machine composition: subroutine inlining and baking an input into a
//! machine so it runs argument-free.

use std::collections::HashMap;

use thiserror::Error;

use crate::machine::{Instruction, Machine, MachineBuilder, StateId, Symbol, ValidationReport, BLANK};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("host machine invalid: {0}")]
    InvalidHost(ValidationReport),
    #[error("subroutine machine invalid: {0}")]
    InvalidSub(ValidationReport),
    #[error("subroutine symbol '{0}' missing from the host alphabet")]
    AlphabetNotContained(Symbol),
    #[error("host already dispatches from {state} on '{read}'")]
    HookCollision { state: StateId, read: Symbol },
    #[error("input symbol '{0}' outside the machine alphabet")]
    InputOutsideAlphabet(Symbol),
}

/// Graft `sub` into `host` so that control reaching `hook` continues as `sub`
/// from its q0. Every `sub` state except q0 is renamed to a fresh id; q0
/// becomes `hook`. Rejected if the host already dispatches from `hook` on a
/// symbol `sub` also dispatches on from q0 (the graft would be ambiguous).
pub fn inline_subroutine(
    host: &Machine,
    hook: StateId,
    sub: &Machine,
) -> Result<Machine, ComposeError> {
    let host_report = host.validate();
    if !host_report.is_valid() {
        return Err(ComposeError::InvalidHost(host_report));
    }
    let sub_report = sub.validate();
    if !sub_report.is_valid() {
        return Err(ComposeError::InvalidSub(sub_report));
    }
    if let Some(missing) = sub.alphabet.difference(&host.alphabet).next() {
        return Err(ComposeError::AlphabetNotContained(*missing));
    }
    for i in &sub.instructions {
        if i.state() == StateId(0) {
            let read = i.read();
            if host
                .instructions
                .iter()
                .any(|h| h.state() == hook && h.read() == read)
            {
                return Err(ComposeError::HookCollision { state: hook, read });
            }
        }
    }

    let fresh_base = host.max_state().0.max(hook.0) + 1;
    let mut rename: HashMap<StateId, StateId> = HashMap::new();
    rename.insert(StateId(0), hook);
    for (offset, s) in sub
        .states()
        .into_iter()
        .filter(|s| *s != StateId(0))
        .enumerate()
    {
        rename.insert(s, StateId(fresh_base + offset as u32));
    }

    let mut instructions = host.instructions.clone();
    instructions.extend(
        sub.instructions
            .iter()
            .map(|i| i.map_states(|s| rename[&s])),
    );

    let mut vocabulary = host.vocabulary.clone();
    vocabulary.extend(sub.vocabulary.iter().cloned());

    Ok(Machine::new(
        host.name.clone(),
        host.alphabet.iter().copied(),
        vocabulary,
        instructions,
    ))
}

/// Steps the writer prefix of [`bake_input`] takes before the wrapped machine
/// starts: one print per symbol plus the walk right and back.
pub fn bake_overhead(input_len: usize) -> u64 {
    if input_len == 0 {
        0
    } else {
        3 * input_len as u64 - 2
    }
}

/// Turn `m` into an argument-free machine: the result, run on a blank tape,
/// first writes `input` on cells 0..len-1, returns the head to cell 0, and
/// then behaves exactly as `m` on `input`. With deterministic providers the
/// two runs agree in status and result, given `bake_overhead` extra budget.
pub fn bake_input(m: &Machine, input: &str) -> Result<Machine, ComposeError> {
    let report = m.validate();
    if !report.is_valid() {
        return Err(ComposeError::InvalidHost(report));
    }
    for ch in input.chars() {
        if !m.alphabet.contains(&ch) {
            return Err(ComposeError::InputOutsideAlphabet(ch));
        }
    }

    let symbols: Vec<Symbol> = input.chars().collect();
    let mut writer = MachineBuilder::new(m.name.clone());
    writer.symbols(m.alphabet.iter().copied());

    // Write left to right, then walk back; the hook state is where the
    // wrapped machine takes over, head on cell 0.
    let mut state = writer.fresh_state();
    let n = symbols.len();
    for (i, &sym) in symbols.iter().enumerate() {
        let after_print = writer.fresh_state();
        writer.push(Instruction::Print {
            state,
            read: BLANK,
            write: sym,
            next: after_print,
        });
        state = after_print;
        if i + 1 < n {
            let next = writer.fresh_state();
            writer.push(Instruction::MoveRight {
                state,
                read: sym,
                next,
            });
            state = next;
        }
    }
    for i in (1..n).rev() {
        let next = writer.fresh_state();
        writer.push(Instruction::MoveLeft {
            state,
            read: symbols[i],
            next,
        });
        state = next;
    }
    let hook = state;

    inline_subroutine(&writer.finish(), hook, m)
}

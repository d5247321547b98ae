//! Deterministic random machines for tests. Everything draws from a caller
//! supplied ChaCha8 stream, so any failure reproduces from the seed alone.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::machine::{Instruction, Machine, StateId, Symbol, BLANK};

const SYMBOL_POOL: [Symbol; 8] = ['a', 'b', 'c', 'd', '0', '1', 'x', 'y'];

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn below(rng: &mut ChaCha8Rng, n: u32) -> u32 {
    rng.next_u32() % n
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[below(rng, items.len() as u32) as usize]
}

fn alphabet(rng: &mut ChaCha8Rng) -> Vec<Symbol> {
    let count = 2 + below(rng, 4) as usize;
    let mut symbols = vec![BLANK];
    for &s in &SYMBOL_POOL {
        if symbols.len() < count + 1 && below(rng, 2) == 0 {
            symbols.push(s);
        }
    }
    if symbols.len() == 1 {
        symbols.push(SYMBOL_POOL[0]);
    }
    symbols
}

/// A valid machine using only print and move instructions, so it runs
/// without any worlds attached. Dispatch keys are unique by construction:
/// one pass over the (state, symbol) grid, each cell included or not.
pub fn random_tape_machine(rng: &mut ChaCha8Rng) -> Machine {
    let symbols = alphabet(rng);
    let states = 1 + below(rng, 7);
    let mut instructions = Vec::new();
    for state in 0..states {
        for &read in &symbols {
            if below(rng, 10) < 6 {
                // Targets may point past the dispatching states; those are
                // halting states.
                let next = StateId(below(rng, states + 2));
                let state = StateId(state);
                instructions.push(match below(rng, 4) {
                    0 => Instruction::MoveRight { state, read, next },
                    1 => Instruction::MoveLeft { state, read, next },
                    _ => Instruction::Print {
                        state,
                        read,
                        write: pick(rng, &symbols),
                        next,
                    },
                });
            }
        }
    }
    Machine::new("random", symbols, [], instructions)
}

/// A valid machine that may also use action, reading, and oracle
/// instructions, for structural tests that never run it.
pub fn random_machine(rng: &mut ChaCha8Rng) -> Machine {
    let symbols = alphabet(rng);
    let actions = ["probe", "poke"];
    let readings = ["sees_a", "sees_b"];
    let states = 1 + below(rng, 7);
    let mut vocabulary: Vec<String> = Vec::new();
    let mut instructions = Vec::new();
    let declare = |vocabulary: &mut Vec<String>, id: &str| {
        if !vocabulary.iter().any(|v| v == id) {
            vocabulary.push(id.to_string());
        }
        id.to_string()
    };
    for state in 0..states {
        for &read in &symbols {
            if below(rng, 10) < 6 {
                let target = |rng: &mut ChaCha8Rng| StateId(below(rng, states + 2));
                let next = target(rng);
                let state = StateId(state);
                instructions.push(match below(rng, 7) {
                    0 => Instruction::MoveRight { state, read, next },
                    1 => Instruction::MoveLeft { state, read, next },
                    2 => Instruction::OracleBranch {
                        state,
                        read,
                        yes: next,
                        no: target(rng),
                    },
                    3 => Instruction::Act {
                        state,
                        read,
                        action: declare(&mut vocabulary, pick(rng, &actions)),
                        ok: next,
                        fail: target(rng),
                    },
                    4 => Instruction::ReadAct {
                        state,
                        read,
                        reading: declare(&mut vocabulary, pick(rng, &readings)),
                        yes: next,
                        no: target(rng),
                        fail: target(rng),
                    },
                    _ => Instruction::Print {
                        state,
                        read,
                        write: pick(rng, &symbols),
                        next,
                    },
                });
            }
        }
    }
    Machine::new("random", symbols, vocabulary, instructions)
}

/// A short input over the machine's own alphabet, blanks excluded.
pub fn random_input(rng: &mut ChaCha8Rng, m: &Machine, max_len: usize) -> String {
    let symbols: Vec<Symbol> = m.alphabet.iter().copied().filter(|&s| s != BLANK).collect();
    if symbols.is_empty() {
        return String::new();
    }
    let len = below(rng, max_len as u32 + 1) as usize;
    (0..len).map(|_| pick(rng, &symbols)).collect()
}

/// A copy of the machine with one instruction's dispatch key duplicated, so
/// validation must reject it. None if the machine has no instructions.
pub fn with_duplicate_key(rng: &mut ChaCha8Rng, m: &Machine) -> Option<Machine> {
    if m.instructions.is_empty() {
        return None;
    }
    let mut out = m.clone();
    let idx = below(rng, m.instructions.len() as u32) as usize;
    let victim = &m.instructions[idx];
    let (state, read) = victim.key();
    out.instructions.push(Instruction::Print {
        state,
        read,
        write: BLANK,
        next: StateId(0),
    });
    Some(out)
}

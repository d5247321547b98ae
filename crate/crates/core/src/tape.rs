//! The two-way infinite tape and run configurations.

use std::collections::BTreeMap;

use crate::machine::{StateId, Symbol, BLANK};

/// Sparse tape: only non-blank cells are stored, so a tape always has finitely
/// many non-blank cells by construction. Writing blank erases a cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tape {
    cells: BTreeMap<i64, Symbol>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    /// Tape with `input` written on cells 0..len-1.
    pub fn from_input(input: &str) -> Tape {
        let mut t = Tape::new();
        for (i, c) in input.chars().enumerate() {
            t.write(i as i64, c);
        }
        t
    }

    pub fn read(&self, cell: i64) -> Symbol {
        self.cells.get(&cell).copied().unwrap_or(BLANK)
    }

    pub fn write(&mut self, cell: i64, sym: Symbol) {
        if sym == BLANK {
            self.cells.remove(&cell);
        } else {
            self.cells.insert(cell, sym);
        }
    }

    pub fn non_blank_cells(&self) -> usize {
        self.cells.len()
    }

    /// Leftmost and rightmost non-blank cell, if any.
    pub fn span(&self) -> Option<(i64, i64)> {
        let first = *self.cells.keys().next()?;
        let last = *self.cells.keys().next_back()?;
        Some((first, last))
    }

    /// The symbols from the leftmost to the rightmost non-blank cell, with
    /// interior blank cells rendered as the blank symbol. Empty if the whole
    /// tape is blank.
    pub fn content(&self) -> String {
        match self.span() {
            None => String::new(),
            Some((lo, hi)) => (lo..=hi).map(|i| self.read(i)).collect(),
        }
    }
}

/// The result a machine leaves behind: the non-blank span of its tape.
pub fn result_of(tape: &Tape) -> String {
    tape.content()
}

/// A machine mid-run: tape, head position, current state, steps taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub tape: Tape,
    pub head: i64,
    pub state: StateId,
    pub steps: u64,
}

impl Configuration {
    /// Start configuration: input on cells 0..len-1, head at 0, state q0.
    pub fn start(input: &str) -> Configuration {
        Configuration {
            tape: Tape::from_input(input),
            head: 0,
            state: StateId(0),
            steps: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_spans_non_blank_cells() {
        let mut t = Tape::new();
        t.write(-1, 'a');
        t.write(1, 'b');
        assert_eq!(result_of(&t), "a_b");
    }

    #[test]
    fn all_blank_tape_has_empty_content() {
        let mut t = Tape::from_input("xy");
        assert_eq!(t.content(), "xy");
        t.write(0, BLANK);
        t.write(1, BLANK);
        assert_eq!(result_of(&t), "");
        assert_eq!(t.non_blank_cells(), 0);
    }

    #[test]
    fn input_lands_on_leading_cells() {
        let c = Configuration::start("10km");
        assert_eq!(c.tape.content(), "10km");
        assert_eq!(c.head, 0);
        assert_eq!(c.state, StateId(0));
    }
}

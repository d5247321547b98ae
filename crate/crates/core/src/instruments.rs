//! Generated machines that operate the simulated instruments: a thermometer
//! reader that transcribes the display onto the tape digit by digit, a
//! two-digit reference thermometer, and a dice reporter. Digits are
//! recovered through `digit_{pos}_ge_{d}` comparisons with a binary search,
//! so every numeral on the tape was printed by the machine itself.

use crate::machine::{Instruction, Machine, MachineBuilder, StateId, BLANK};

const DIGITS: [char; 10] = ['0', '1', '2', '3', '4', '5', '6', '7', '8', '9'];

/// Prints "ERR" rightwards from the current cell and halts. Shared target
/// for every branch where the world could not answer.
fn error_printer(b: &mut MachineBuilder, halt: StateId) -> StateId {
    let states: Vec<StateId> = (0..5).map(|_| b.fresh_state()).collect();
    b.push(Instruction::Print {
        state: states[0],
        read: BLANK,
        write: 'E',
        next: states[1],
    });
    b.push(Instruction::MoveRight {
        state: states[1],
        read: 'E',
        next: states[2],
    });
    b.push(Instruction::Print {
        state: states[2],
        read: BLANK,
        write: 'R',
        next: states[3],
    });
    b.push(Instruction::MoveRight {
        state: states[3],
        read: 'R',
        next: states[4],
    });
    b.push(Instruction::Print {
        state: states[4],
        read: BLANK,
        write: 'R',
        next: halt,
    });
    states[0]
}

/// One print state per digit value, each writing its digit at the current
/// (blank) cell and continuing at `next`.
fn print_leaves(b: &mut MachineBuilder, next: StateId) -> [StateId; 10] {
    std::array::from_fn(|d| {
        let entry = b.fresh_state();
        b.push(Instruction::Print {
            state: entry,
            read: BLANK,
            write: DIGITS[d],
            next,
        });
        entry
    })
}

/// A state that steps right over whichever digit was just printed.
fn advance_over_digit(b: &mut MachineBuilder, next: StateId) -> StateId {
    let entry = b.fresh_state();
    for d in DIGITS {
        b.push(Instruction::MoveRight {
            state: entry,
            read: d,
            next,
        });
    }
    entry
}

/// Binary search over display position `pos` using `digit_{pos}_ge_{d}`
/// readings: at most four questions route to `leaves[digit]`. Any
/// CannotPerform goes to `fail`.
fn reading_tree(
    b: &mut MachineBuilder,
    pos: usize,
    fail: StateId,
    leaves: &[StateId; 10],
) -> StateId {
    fn range(
        b: &mut MachineBuilder,
        pos: usize,
        fail: StateId,
        leaves: &[StateId; 10],
        lo: u8,
        hi: u8,
    ) -> StateId {
        if lo == hi {
            return leaves[lo as usize];
        }
        let mid = (lo + hi).div_ceil(2);
        let reading = format!("digit_{pos}_ge_{mid}");
        b.declare(reading.clone());
        let yes = range(b, pos, fail, leaves, mid, hi);
        let no = range(b, pos, fail, leaves, lo, mid - 1);
        let entry = b.fresh_state();
        b.push(Instruction::ReadAct {
            state: entry,
            read: BLANK,
            reading,
            yes,
            no,
            fail,
        });
        entry
    }
    range(b, pos, fail, leaves, 0, 9)
}

/// Samples the thermometer and transcribes the whole display, "DD.ddd", onto
/// the tape. Prints "ERR" if the instrument cannot be operated.
pub fn make_digit_reader() -> Machine {
    let mut b = MachineBuilder::new("thermo-reader");
    b.symbols(DIGITS).symbols(['.', 'E', 'R']);
    let q0 = b.fresh_state();
    let halt = b.fresh_state();
    let err = error_printer(&mut b, halt);
    b.declare("sample");

    let thousandths_leaves = print_leaves(&mut b, halt);
    let thousandths = reading_tree(&mut b, 4, err, &thousandths_leaves);
    let to_thousandths = advance_over_digit(&mut b, thousandths);
    let hundredths_leaves = print_leaves(&mut b, to_thousandths);
    let hundredths = reading_tree(&mut b, 3, err, &hundredths_leaves);
    let to_hundredths = advance_over_digit(&mut b, hundredths);
    let tenths_leaves = print_leaves(&mut b, to_hundredths);
    let tenths = reading_tree(&mut b, 2, err, &tenths_leaves);
    let over_dot = b.fresh_state();
    b.push(Instruction::MoveRight {
        state: over_dot,
        read: '.',
        next: tenths,
    });
    let dot = b.fresh_state();
    b.push(Instruction::Print {
        state: dot,
        read: BLANK,
        write: '.',
        next: over_dot,
    });
    let to_dot = advance_over_digit(&mut b, dot);
    let ones_leaves = print_leaves(&mut b, to_dot);
    let ones = reading_tree(&mut b, 1, err, &ones_leaves);
    let to_ones = advance_over_digit(&mut b, ones);
    let tens_leaves = print_leaves(&mut b, to_ones);
    let tens = reading_tree(&mut b, 0, err, &tens_leaves);
    b.push(Instruction::Act {
        state: q0,
        read: BLANK,
        action: "sample".into(),
        ok: tens,
        fail: err,
    });
    b.finish()
}

/// Samples the thermometer and reports whole degrees as the two integer
/// digits of the display. Prints "ERR" if the instrument cannot be operated.
pub fn make_reference_thermometer() -> Machine {
    let mut b = MachineBuilder::new("red");
    b.symbols(DIGITS).symbols(['E', 'R']);
    let q0 = b.fresh_state();
    let halt = b.fresh_state();
    let err = error_printer(&mut b, halt);
    b.declare("sample");

    let ones_leaves = print_leaves(&mut b, halt);
    let ones = reading_tree(&mut b, 1, err, &ones_leaves);
    let to_ones = advance_over_digit(&mut b, ones);
    let tens_leaves = print_leaves(&mut b, to_ones);
    let tens = reading_tree(&mut b, 0, err, &tens_leaves);
    b.push(Instruction::Act {
        state: q0,
        read: BLANK,
        action: "sample".into(),
        ok: tens,
        fail: err,
    });
    b.finish()
}

/// Rolls the die once and prints the face it shows.
pub fn make_dice_reporter() -> Machine {
    let mut b = MachineBuilder::new("dice-reporter");
    b.symbols(['1', '2', '3', '4', '5', '6', 'E', 'R']);
    let q0 = b.fresh_state();
    let halt = b.fresh_state();
    let err = error_printer(&mut b, halt);
    b.declare("roll");

    let faces: Vec<StateId> = (1..=6)
        .map(|f| {
            let entry = b.fresh_state();
            b.push(Instruction::Print {
                state: entry,
                read: BLANK,
                write: char::from_digit(f, 10).unwrap(),
                next: halt,
            });
            entry
        })
        .collect();
    // shows_6 answering no after a roll would mean no face is showing at
    // all, so the last chain link treats it as an instrument fault.
    let mut next_check = err;
    for f in (1..=6u32).rev() {
        let reading = format!("shows_{f}");
        b.declare(reading.clone());
        let entry = b.fresh_state();
        b.push(Instruction::ReadAct {
            state: entry,
            read: BLANK,
            reading,
            yes: faces[f as usize - 1],
            no: next_check,
            fail: err,
        });
        next_check = entry;
    }
    b.push(Instruction::Act {
        state: q0,
        read: BLANK,
        action: "roll".into(),
        ok: next_check,
        fail: err,
    });
    b.finish()
}

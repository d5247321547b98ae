//! Stepping and budgeted execution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{Instruction, Machine, Symbol, ValidationReport};
use crate::providers::{PerformResponse, ProviderError, ProviderSet, VerifyResponse};
use crate::tape::Configuration;

/// Optional predicate over tape content, consulted by oracle-branch
/// instructions. Disabled unless explicitly configured; executing an oracle
/// branch while disabled is an execution error.
#[derive(Debug, Clone, Default)]
pub struct OracleSet {
    members: Option<BTreeSet<String>>,
}

impl OracleSet {
    pub fn disabled() -> OracleSet {
        OracleSet::default()
    }

    /// Accept exactly the given tape contents.
    pub fn membership(members: impl IntoIterator<Item = String>) -> OracleSet {
        OracleSet {
            members: Some(members.into_iter().collect()),
        }
    }

    pub fn accepts(&self, tape_content: &str) -> Option<bool> {
        self.members.as_ref().map(|m| m.contains(tape_content))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("oracle branch executed with no oracle configured")]
    OracleNotConfigured,
}

/// Why a run call could not start.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("invalid machine: {0}")]
    InvalidMachine(ValidationReport),
    #[error("input symbol '{0}' outside the machine alphabet")]
    InputOutsideAlphabet(Symbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepResult {
    /// One instruction executed; the configuration advanced.
    Advanced,
    /// No instruction matched (state, read symbol): the machine halted.
    Halted,
}

/// How a budgeted run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Halted,
    BudgetExhausted,
    ExecutionError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: u64,
    pub state: String,
    pub head: i64,
    pub read: char,
    pub instruction: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceLevel {
    Off,
    Steps,
}

/// Everything a finished run reports. `result` is present exactly when the
/// run halted; `error` exactly when it ended in an execution error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub result: Option<String>,
    pub steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

impl RunOutcome {
    pub fn halted_with(&self, result: &str) -> bool {
        self.status == RunStatus::Halted && self.result.as_deref() == Some(result)
    }
}

fn apply(
    instr: &Instruction,
    c: &mut Configuration,
    providers: &mut ProviderSet,
    oracle: &OracleSet,
) -> Result<(), ExecError> {
    match instr {
        Instruction::Print { write, next, .. } => {
            c.tape.write(c.head, *write);
            c.state = *next;
        }
        Instruction::MoveRight { next, .. } => {
            c.head += 1;
            c.state = *next;
        }
        Instruction::MoveLeft { next, .. } => {
            c.head -= 1;
            c.state = *next;
        }
        Instruction::OracleBranch { yes, no, .. } => {
            let content = c.tape.content();
            match oracle.accepts(&content) {
                None => return Err(ExecError::OracleNotConfigured),
                Some(true) => c.state = *yes,
                Some(false) => c.state = *no,
            }
        }
        Instruction::Act { action, ok, fail, .. } => {
            let content = c.tape.content();
            c.state = match providers.perform(action, &content)? {
                PerformResponse::Performed => *ok,
                PerformResponse::CannotPerform => *fail,
            };
        }
        Instruction::ReadAct {
            reading,
            yes,
            no,
            fail,
            ..
        } => {
            let content = c.tape.content();
            c.state = match providers.verify(reading, &content)? {
                VerifyResponse::True => *yes,
                VerifyResponse::False => *no,
                VerifyResponse::CannotPerform => *fail,
            };
        }
    }
    c.steps += 1;
    Ok(())
}

/// Execute one instruction of `m` in configuration `c`, or halt if no
/// instruction matches the current (state, read symbol).
pub fn step(
    c: &mut Configuration,
    m: &Machine,
    providers: &mut ProviderSet,
    oracle: &OracleSet,
) -> Result<StepResult, ExecError> {
    let key = (c.state, c.tape.read(c.head));
    let Some(instr) = m.instructions.iter().find(|i| i.key() == key) else {
        return Ok(StepResult::Halted);
    };
    apply(&instr.clone(), c, providers, oracle)?;
    Ok(StepResult::Advanced)
}

/// Run `m` on `input` until it halts, the budget runs out, or an execution
/// error occurs. The machine and input are checked up front; a run never
/// starts from an invalid machine or an out-of-alphabet input.
///
/// Halting is free: a run that halts reports only the instructions it
/// executed, and a run reports `BudgetExhausted` exactly when `steps` equals
/// the budget with a matching instruction still pending.
pub fn run(
    m: &Machine,
    input: &str,
    providers: &mut ProviderSet,
    oracle: &OracleSet,
    budget: u64,
    trace: TraceLevel,
) -> Result<RunOutcome, RunError> {
    let report = m.validate();
    if !report.is_valid() {
        return Err(RunError::InvalidMachine(report));
    }
    for ch in input.chars() {
        if !m.alphabet.contains(&ch) {
            return Err(RunError::InputOutsideAlphabet(ch));
        }
    }

    let index = m.dispatch_index();
    let mut c = Configuration::start(input);
    let mut entries = Vec::new();

    let outcome = loop {
        let read = c.tape.read(c.head);
        let Some(instr) = index.get(&(c.state, read)) else {
            break RunOutcome {
                status: RunStatus::Halted,
                result: Some(c.tape.content()),
                steps: c.steps,
                error: None,
                trace: None,
            };
        };
        if c.steps == budget {
            break RunOutcome {
                status: RunStatus::BudgetExhausted,
                result: None,
                steps: c.steps,
                error: None,
                trace: None,
            };
        }
        if trace == TraceLevel::Steps {
            entries.push(TraceEntry {
                step: c.steps,
                state: c.state.to_string(),
                head: c.head,
                read,
                instruction: crate::dsl::render_instruction(instr),
            });
        }
        if let Err(e) = apply(&(*instr).clone(), &mut c, providers, oracle) {
            break RunOutcome {
                status: RunStatus::ExecutionError,
                result: None,
                steps: c.steps,
                error: Some(e.to_string()),
                trace: None,
            };
        }
    };

    Ok(RunOutcome {
        trace: (trace == TraceLevel::Steps).then_some(entries),
        ..outcome
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Instruction, Machine, StateId, BLANK};

    fn q(n: u32) -> StateId {
        StateId(n)
    }

    pub(crate) fn hello_machine() -> Machine {
        Machine::new(
            "hello",
            ['h', 'i'],
            [],
            vec![
                Instruction::Print {
                    state: q(0),
                    read: BLANK,
                    write: 'h',
                    next: q(1),
                },
                Instruction::MoveRight {
                    state: q(1),
                    read: 'h',
                    next: q(2),
                },
                Instruction::Print {
                    state: q(2),
                    read: BLANK,
                    write: 'i',
                    next: q(3),
                },
            ],
        )
    }

    #[test]
    fn hello_halts_with_hi_in_three_steps() {
        let mut p = ProviderSet::empty();
        let out = run(&hello_machine(), "", &mut p, &OracleSet::disabled(), 100, TraceLevel::Off)
            .unwrap();
        assert_eq!(out.status, RunStatus::Halted);
        assert_eq!(out.result.as_deref(), Some("hi"));
        assert_eq!(out.steps, 3);
    }

    #[test]
    fn empty_machine_halts_immediately_leaving_input() {
        let m = Machine::new("idle", ['1', '0', 'k', 'm'], [], vec![]);
        let mut p = ProviderSet::empty();
        let out = run(&m, "10km", &mut p, &OracleSet::disabled(), 10, TraceLevel::Off).unwrap();
        assert_eq!(out.status, RunStatus::Halted);
        assert_eq!(out.result.as_deref(), Some("10km"));
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn right_mover_exhausts_exactly_its_budget() {
        let m = Machine::new(
            "mover",
            [],
            [],
            vec![Instruction::MoveRight {
                state: q(0),
                read: BLANK,
                next: q(0),
            }],
        );
        let mut p = ProviderSet::empty();
        let out = run(&m, "", &mut p, &OracleSet::disabled(), 50, TraceLevel::Off).unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert_eq!(out.steps, 50);
        assert_eq!(out.result, None);
    }

    #[test]
    fn invalid_machine_is_rejected_before_starting() {
        let m = Machine::new(
            "dup",
            [],
            [],
            vec![
                Instruction::MoveRight {
                    state: q(0),
                    read: BLANK,
                    next: q(0),
                },
                Instruction::MoveLeft {
                    state: q(0),
                    read: BLANK,
                    next: q(0),
                },
            ],
        );
        let mut p = ProviderSet::empty();
        let err = run(&m, "", &mut p, &OracleSet::disabled(), 10, TraceLevel::Off).unwrap_err();
        assert!(matches!(err, RunError::InvalidMachine(_)));
    }

    #[test]
    fn out_of_alphabet_input_is_rejected() {
        let m = Machine::new("idle", ['a'], [], vec![]);
        let mut p = ProviderSet::empty();
        let err = run(&m, "ab", &mut p, &OracleSet::disabled(), 10, TraceLevel::Off).unwrap_err();
        assert_eq!(err, RunError::InputOutsideAlphabet('b'));
    }

    #[test]
    fn oracle_branch_follows_membership() {
        let m = Machine::new(
            "asker",
            ['y', 'n', 'a', 'b'],
            [],
            vec![
                Instruction::OracleBranch {
                    state: q(0),
                    read: 'a',
                    yes: q(1),
                    no: q(2),
                },
                Instruction::Print {
                    state: q(1),
                    read: 'a',
                    write: 'y',
                    next: q(3),
                },
                Instruction::Print {
                    state: q(2),
                    read: 'a',
                    write: 'n',
                    next: q(3),
                },
            ],
        );
        let oracle = OracleSet::membership(["ab".to_string()]);
        let mut p = ProviderSet::empty();
        let yes = run(&m, "ab", &mut p, &oracle, 10, TraceLevel::Off).unwrap();
        assert_eq!(yes.result.as_deref(), Some("yb"));
        let no = run(&m, "aa", &mut p, &oracle, 10, TraceLevel::Off).unwrap();
        assert_eq!(no.result.as_deref(), Some("na"));
    }

    #[test]
    fn oracle_branch_without_oracle_is_an_execution_error() {
        let m = Machine::new(
            "asker",
            [],
            [],
            vec![Instruction::OracleBranch {
                state: q(0),
                read: BLANK,
                yes: q(1),
                no: q(2),
            }],
        );
        let mut p = ProviderSet::empty();
        let out = run(&m, "", &mut p, &OracleSet::disabled(), 10, TraceLevel::Off).unwrap();
        assert_eq!(out.status, RunStatus::ExecutionError);
        assert!(out.error.unwrap().contains("no oracle"));
        assert_eq!(out.result, None);
    }

    #[test]
    fn unregistered_action_is_an_execution_error() {
        let m = Machine::new(
            "roller",
            [],
            ["roll".to_string()],
            vec![Instruction::Act {
                state: q(0),
                read: BLANK,
                action: "roll".into(),
                ok: q(1),
                fail: q(2),
            }],
        );
        let mut p = ProviderSet::empty();
        let out = run(&m, "", &mut p, &OracleSet::disabled(), 10, TraceLevel::Off).unwrap();
        assert_eq!(out.status, RunStatus::ExecutionError);
        assert!(out.error.unwrap().contains("roll"));
    }

    #[test]
    fn step_halts_when_no_instruction_matches() {
        let m = Machine::new("idle", [], [], vec![]);
        let mut c = Configuration::start("");
        let mut p = ProviderSet::empty();
        assert_eq!(
            step(&mut c, &m, &mut p, &OracleSet::disabled()).unwrap(),
            StepResult::Halted
        );
        assert_eq!(c.steps, 0);
    }

    #[test]
    fn trace_records_each_executed_instruction() {
        let mut p = ProviderSet::empty();
        let out = run(
            &hello_machine(),
            "",
            &mut p,
            &OracleSet::disabled(),
            100,
            TraceLevel::Steps,
        )
        .unwrap();
        let trace = out.trace.unwrap();
        assert_eq!(trace.len(), 3);
        assert_eq!(trace[0].state, "q0");
        assert_eq!(trace[1].head, 0);
        assert_eq!(trace[2].step, 2);
    }
}

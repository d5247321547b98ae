//! Machines, instructions, validation, and canonical form.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

/// One tape symbol. Symbols are single printable, non-whitespace characters.
pub type Symbol = char;

/// The blank symbol. Every alphabet contains it; unwritten cells read as blank.
pub const BLANK: Symbol = '_';

/// A machine state, rendered `q<id>`. Execution always starts in `q0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Whether an identifier names an action or a reading action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Action,
    Reading,
}

/// One instruction. The pair (state, read) is the dispatch key: the machine
/// executes the instruction whose key matches the current state and the symbol
/// under the head. No key may be claimed twice; a configuration with no
/// matching instruction halts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Instruction {
    /// Write `write` at the head. The head does not move.
    Print {
        state: StateId,
        read: Symbol,
        write: Symbol,
        next: StateId,
    },
    /// Move the head one cell right.
    MoveRight {
        state: StateId,
        read: Symbol,
        next: StateId,
    },
    /// Move the head one cell left.
    MoveLeft {
        state: StateId,
        read: Symbol,
        next: StateId,
    },
    /// Branch on the configured oracle predicate applied to the tape content.
    /// Executing this with no oracle configured is an execution error.
    OracleBranch {
        state: StateId,
        read: Symbol,
        yes: StateId,
        no: StateId,
    },
    /// Ask the world to perform `action`: `ok` if it was performed, `fail` if
    /// the world cannot perform it.
    Act {
        state: StateId,
        read: Symbol,
        action: String,
        ok: StateId,
        fail: StateId,
    },
    /// Ask the world whether `reading` holds: `yes`/`no` on a definite answer,
    /// `fail` if the reading cannot be performed.
    ReadAct {
        state: StateId,
        read: Symbol,
        reading: String,
        yes: StateId,
        no: StateId,
        fail: StateId,
    },
}

impl Instruction {
    pub fn state(&self) -> StateId {
        match *self {
            Instruction::Print { state, .. }
            | Instruction::MoveRight { state, .. }
            | Instruction::MoveLeft { state, .. }
            | Instruction::OracleBranch { state, .. }
            | Instruction::Act { state, .. }
            | Instruction::ReadAct { state, .. } => state,
        }
    }

    pub fn read(&self) -> Symbol {
        match *self {
            Instruction::Print { read, .. }
            | Instruction::MoveRight { read, .. }
            | Instruction::MoveLeft { read, .. }
            | Instruction::OracleBranch { read, .. }
            | Instruction::Act { read, .. }
            | Instruction::ReadAct { read, .. } => read,
        }
    }

    /// The dispatch key (state, read symbol).
    pub fn key(&self) -> (StateId, Symbol) {
        (self.state(), self.read())
    }

    /// States this instruction can transfer control to, in operand order.
    pub fn targets(&self) -> Vec<StateId> {
        match *self {
            Instruction::Print { next, .. }
            | Instruction::MoveRight { next, .. }
            | Instruction::MoveLeft { next, .. } => vec![next],
            Instruction::OracleBranch { yes, no, .. } => vec![yes, no],
            Instruction::Act { ok, fail, .. } => vec![ok, fail],
            Instruction::ReadAct { yes, no, fail, .. } => vec![yes, no, fail],
        }
    }

    /// The action or reading identifier this instruction invokes, if any.
    pub fn action_id(&self) -> Option<(ActionKind, &str)> {
        match self {
            Instruction::Act { action, .. } => Some((ActionKind::Action, action)),
            Instruction::ReadAct { reading, .. } => Some((ActionKind::Reading, reading)),
            _ => None,
        }
    }

    /// Symbols this instruction mentions (read, and written symbol if any).
    pub fn symbols(&self) -> Vec<Symbol> {
        match *self {
            Instruction::Print { read, write, .. } => vec![read, write],
            _ => vec![self.read()],
        }
    }

    /// Rebuild the instruction with every state operand mapped through `f`.
    pub fn map_states(&self, f: impl Fn(StateId) -> StateId) -> Instruction {
        match self.clone() {
            Instruction::Print {
                state,
                read,
                write,
                next,
            } => Instruction::Print {
                state: f(state),
                read,
                write,
                next: f(next),
            },
            Instruction::MoveRight { state, read, next } => Instruction::MoveRight {
                state: f(state),
                read,
                next: f(next),
            },
            Instruction::MoveLeft { state, read, next } => Instruction::MoveLeft {
                state: f(state),
                read,
                next: f(next),
            },
            Instruction::OracleBranch {
                state,
                read,
                yes,
                no,
            } => Instruction::OracleBranch {
                state: f(state),
                read,
                yes: f(yes),
                no: f(no),
            },
            Instruction::Act {
                state,
                read,
                action,
                ok,
                fail,
            } => Instruction::Act {
                state: f(state),
                read,
                action,
                ok: f(ok),
                fail: f(fail),
            },
            Instruction::ReadAct {
                state,
                read,
                reading,
                yes,
                no,
                fail,
            } => Instruction::ReadAct {
                state: f(state),
                read,
                reading,
                yes: f(yes),
                no: f(no),
                fail: f(fail),
            },
        }
    }
}

/// A complete machine. The name is metadata: it never affects behavior,
/// equality, or the quoted form.
#[derive(Debug, Clone)]
pub struct Machine {
    pub name: String,
    pub alphabet: BTreeSet<Symbol>,
    /// Action and reading identifiers the machine declares it may invoke.
    pub vocabulary: BTreeSet<String>,
    pub instructions: Vec<Instruction>,
}

impl Machine {
    pub fn new(
        name: impl Into<String>,
        alphabet: impl IntoIterator<Item = Symbol>,
        vocabulary: impl IntoIterator<Item = String>,
        instructions: Vec<Instruction>,
    ) -> Machine {
        let mut alphabet: BTreeSet<Symbol> = alphabet.into_iter().collect();
        alphabet.insert(BLANK);
        Machine {
            name: name.into(),
            alphabet,
            vocabulary: vocabulary.into_iter().collect(),
            instructions,
        }
    }

    /// Every state mentioned anywhere, plus q0.
    pub fn states(&self) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        out.insert(StateId(0));
        for i in &self.instructions {
            out.insert(i.state());
            out.extend(i.targets());
        }
        out
    }

    pub fn max_state(&self) -> StateId {
        self.states().into_iter().next_back().unwrap_or(StateId(0))
    }

    /// Dispatch lookup table. Later duplicates are ignored; validation reports
    /// them, so run entry points reject such machines before stepping.
    pub(crate) fn dispatch_index(&self) -> HashMap<(StateId, Symbol), &Instruction> {
        let mut index = HashMap::with_capacity(self.instructions.len());
        for i in &self.instructions {
            index.entry(i.key()).or_insert(i);
        }
        index
    }

    /// States whose instructions can execute in some run started in q0.
    fn reachable_states(&self) -> BTreeSet<StateId> {
        let mut by_state: BTreeMap<StateId, Vec<&Instruction>> = BTreeMap::new();
        for i in &self.instructions {
            by_state.entry(i.state()).or_default().push(i);
        }
        let mut seen = BTreeSet::from([StateId(0)]);
        let mut queue = VecDeque::from([StateId(0)]);
        while let Some(s) = queue.pop_front() {
            for i in by_state.get(&s).into_iter().flatten() {
                for t in i.targets() {
                    if seen.insert(t) {
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let mut keys: BTreeMap<(StateId, Symbol), u32> = BTreeMap::new();
        for i in &self.instructions {
            *keys.entry(i.key()).or_insert(0) += 1;
        }
        for ((state, sym), count) in &keys {
            if *count > 1 {
                violations.push(Violation {
                    kind: ViolationKind::DuplicateDispatch,
                    message: format!("duplicate dispatch key ({state},{sym})"),
                });
            }
        }

        for i in &self.instructions {
            for sym in i.symbols() {
                if !self.alphabet.contains(&sym) {
                    violations.push(Violation {
                        kind: ViolationKind::SymbolOutsideAlphabet,
                        message: format!(
                            "symbol '{sym}' outside alphabet at ({},{})",
                            i.state(),
                            i.read()
                        ),
                    });
                }
            }
            if let Some((_, id)) = i.action_id() {
                if !self.vocabulary.contains(id) {
                    violations.push(Violation {
                        kind: ViolationKind::UndeclaredAction,
                        message: format!(
                            "undeclared action '{id}' at ({},{})",
                            i.state(),
                            i.read()
                        ),
                    });
                }
            }
        }

        let reachable = self.reachable_states();
        let mut flagged = BTreeSet::new();
        for i in &self.instructions {
            let s = i.state();
            if !reachable.contains(&s) && flagged.insert(s) {
                violations.push(Violation {
                    kind: ViolationKind::UnreachableState,
                    message: format!("unreachable state {s}"),
                });
            }
        }

        ValidationReport { violations }
    }

    /// Renumber states into canonical order and sort instructions by dispatch
    /// key. Canonical order is breadth-first from q0, visiting each state's
    /// instructions by read symbol and their target operands left to right;
    /// clusters not reachable from q0 follow, in order of their smallest
    /// pre-existing state id. Idempotent.
    pub fn canonicalize(&self) -> Machine {
        let mut by_state: BTreeMap<StateId, Vec<&Instruction>> = BTreeMap::new();
        for i in &self.instructions {
            by_state.entry(i.state()).or_default().push(i);
        }
        for list in by_state.values_mut() {
            list.sort_by_key(|i| i.read());
        }

        let mut map: HashMap<StateId, StateId> = HashMap::new();
        let mut next = 0u32;
        let mut queue: VecDeque<StateId> = VecDeque::new();
        let mut expanded: BTreeSet<StateId> = BTreeSet::new();

        let assign = |s: StateId, map: &mut HashMap<StateId, StateId>, next: &mut u32| {
            if let std::collections::hash_map::Entry::Vacant(slot) = map.entry(s) {
                slot.insert(StateId(*next));
                *next += 1;
                true
            } else {
                false
            }
        };

        assign(StateId(0), &mut map, &mut next);
        queue.push_back(StateId(0));
        loop {
            while let Some(s) = queue.pop_front() {
                if !expanded.insert(s) {
                    continue;
                }
                for i in by_state.get(&s).into_iter().flatten() {
                    for t in i.targets() {
                        if assign(t, &mut map, &mut next) {
                            queue.push_back(t);
                        }
                    }
                }
            }
            // Instructions whose dispatch state was never reached: start a new
            // cluster at the smallest remaining state id.
            match by_state.keys().find(|s| !map.contains_key(s)) {
                Some(&s) => {
                    assign(s, &mut map, &mut next);
                    queue.push_back(s);
                }
                None => break,
            }
        }

        let mut instructions: Vec<Instruction> = self
            .instructions
            .iter()
            .map(|i| i.map_states(|s| *map.get(&s).expect("state numbered")))
            .collect();
        instructions.sort_by_key(|i| i.key());

        Machine {
            name: self.name.clone(),
            alphabet: self.alphabet.clone(),
            vocabulary: self.vocabulary.clone(),
            instructions,
        }
    }
}

/// Equality is structural and ignores the name: same alphabet, vocabulary,
/// and instruction set (order-insensitive).
impl PartialEq for Machine {
    fn eq(&self, other: &Machine) -> bool {
        self.alphabet == other.alphabet
            && self.vocabulary == other.vocabulary
            && self.instructions.iter().collect::<BTreeSet<_>>()
                == other.instructions.iter().collect::<BTreeSet<_>>()
    }
}

impl Eq for Machine {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateDispatch,
    SymbolOutsideAlphabet,
    UndeclaredAction,
    /// Informational: does not make the machine invalid.
    UnreachableState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// Valid means no duplicate keys, no out-of-alphabet symbols, and no
    /// undeclared actions. Unreachable states are reported but allowed.
    pub fn is_valid(&self) -> bool {
        self.violations
            .iter()
            .all(|v| v.kind == ViolationKind::UnreachableState)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for (n, v) in self.violations.iter().enumerate() {
                if n > 0 {
                    writeln!(f)?;
                }
                write!(f, "{}", v.message)?;
            }
            Ok(())
        }
    }
}

/// Incremental machine construction with fresh-state allocation. Used by the
/// generated machines; nothing here validates, callers do.
#[derive(Debug, Default)]
pub struct MachineBuilder {
    pub name: String,
    pub alphabet: BTreeSet<Symbol>,
    pub vocabulary: BTreeSet<String>,
    pub instructions: Vec<Instruction>,
    next_state: u32,
}

impl MachineBuilder {
    pub fn new(name: impl Into<String>) -> MachineBuilder {
        MachineBuilder {
            name: name.into(),
            alphabet: BTreeSet::from([BLANK]),
            ..MachineBuilder::default()
        }
    }

    pub fn fresh_state(&mut self) -> StateId {
        let s = StateId(self.next_state);
        self.next_state += 1;
        s
    }

    pub fn symbols(&mut self, syms: impl IntoIterator<Item = Symbol>) -> &mut Self {
        self.alphabet.extend(syms);
        self
    }

    pub fn declare(&mut self, id: impl Into<String>) -> &mut Self {
        self.vocabulary.insert(id.into());
        self
    }

    pub fn push(&mut self, i: Instruction) -> &mut Self {
        self.instructions.push(i);
        self
    }

    pub fn finish(self) -> Machine {
        let mut m = Machine::new(self.name, self.alphabet, self.vocabulary, self.instructions);
        m.alphabet.insert(BLANK);
        m
    }
}

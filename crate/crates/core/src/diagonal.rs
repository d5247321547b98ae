//! The refutation harness. Given a candidate that claims to decide whether
//! any machine measures temperature, build a machine that asks the candidate
//! about itself and then does the opposite: if the candidate says yes, it
//! erases the tape and prints "NOTEMP"; if the candidate says no, it runs the
//! reference thermometer procedure. Whatever the candidate answers about the
//! self-applied machine is therefore wrong. The same construction refutes
//! candidate halting deciders.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::compose::{bake_input, inline_subroutine};
use crate::exec::{run, OracleSet, RunOutcome, RunStatus, TraceLevel};
use crate::instruments::make_reference_thermometer;
use crate::machine::{Instruction, Machine, MachineBuilder, StateId, Symbol, BLANK};
use crate::providers::{
    fixed_point_millis, make_thermometer_world, Observation, PerformResponse, ProviderSet,
    ThermometerParams, VerifyResponse, World, WorldError,
};
use crate::quote::{decode_prefix, quote, unquote, QUOTE_ALPHABET};

/// A candidate answer to "does M(e) measure temperature?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "1")]
    MeasuresTemperature,
    #[serde(rename = "0")]
    DoesNotMeasure,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::MeasuresTemperature => write!(f, "1"),
            Verdict::DoesNotMeasure => write!(f, "0"),
        }
    }
}

/// A candidate measurement verifier: a host-side process claiming to decide,
/// for any quoted machine and input, whether running it measures
/// temperature. `None` means the candidate failed to answer within its own
/// budget, which itself refutes the candidate.
pub trait Verifier {
    fn id(&self) -> String;
    fn budget(&self) -> u64;
    fn decide(&self, machine_quote: &str, input: &str) -> Option<Verdict>;
}

/// A candidate answer to "does M(e) halt?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HaltVerdict {
    #[serde(rename = "H")]
    Halts,
    #[serde(rename = "N")]
    DoesNotHalt,
}

impl fmt::Display for HaltVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltVerdict::Halts => write!(f, "H"),
            HaltVerdict::DoesNotHalt => write!(f, "N"),
        }
    }
}

/// A candidate halting decider, same contract as [`Verifier`].
pub trait HaltingDecider {
    fn id(&self) -> String;
    fn budget(&self) -> u64;
    fn decide(&self, machine_quote: &str, input: &str) -> Option<HaltVerdict>;
}

struct ConstVerifier {
    answer: Verdict,
}

impl Verifier for ConstVerifier {
    fn id(&self) -> String {
        match self.answer {
            Verdict::MeasuresTemperature => "const-yes".into(),
            Verdict::DoesNotMeasure => "const-no".into(),
        }
    }

    fn budget(&self) -> u64 {
        10
    }

    fn decide(&self, _machine_quote: &str, _input: &str) -> Option<Verdict> {
        Some(self.answer)
    }
}

/// Answers by bounded simulation: decode the machine, run it on the given
/// input against a fresh seed-0 thermometer world, and say it measures
/// temperature iff it halts with the reference reading. Anything else,
/// including undecodable quotes and runs that error or outlive the budget,
/// is a no.
struct SimVerifier {
    budget: u64,
    params: ThermometerParams,
}

impl Verifier for SimVerifier {
    fn id(&self) -> String {
        format!("sim:{}", self.budget)
    }

    fn budget(&self) -> u64 {
        self.budget
    }

    fn decide(&self, machine_quote: &str, input: &str) -> Option<Verdict> {
        let Ok(m) = unquote(machine_quote) else {
            return Some(Verdict::DoesNotMeasure);
        };
        let Ok(world) = make_thermometer_world(self.params, 0) else {
            return Some(Verdict::DoesNotMeasure);
        };
        let mut providers = ProviderSet::empty().with(world);
        let measured = match run(
            &m,
            input,
            &mut providers,
            &OracleSet::disabled(),
            self.budget,
            TraceLevel::Off,
        ) {
            Ok(outcome) => outcome.halted_with(&reference_degrees(self.params)),
            Err(_) => false,
        };
        Some(if measured {
            Verdict::MeasuresTemperature
        } else {
            Verdict::DoesNotMeasure
        })
    }
}

struct ConstDecider {
    answer: HaltVerdict,
}

impl HaltingDecider for ConstDecider {
    fn id(&self) -> String {
        match self.answer {
            HaltVerdict::Halts => "const-H".into(),
            HaltVerdict::DoesNotHalt => "const-N".into(),
        }
    }

    fn budget(&self) -> u64 {
        10
    }

    fn decide(&self, _machine_quote: &str, _input: &str) -> Option<HaltVerdict> {
        Some(self.answer)
    }
}

/// Answers by bounded simulation with no worlds attached: halts iff the run
/// halts within the budget.
struct SimDecider {
    budget: u64,
}

impl HaltingDecider for SimDecider {
    fn id(&self) -> String {
        format!("bounded-sim:{}", self.budget)
    }

    fn budget(&self) -> u64 {
        self.budget
    }

    fn decide(&self, machine_quote: &str, input: &str) -> Option<HaltVerdict> {
        let Ok(m) = unquote(machine_quote) else {
            return Some(HaltVerdict::DoesNotHalt);
        };
        let mut providers = ProviderSet::empty();
        let halted = match run(
            &m,
            input,
            &mut providers,
            &OracleSet::disabled(),
            self.budget,
            TraceLevel::Off,
        ) {
            Ok(outcome) => outcome.status == RunStatus::Halted,
            Err(_) => false,
        };
        Some(if halted {
            HaltVerdict::Halts
        } else {
            HaltVerdict::DoesNotHalt
        })
    }
}

/// Look up a built-in verifier: `const-yes`, `const-no`, or `sim:<budget>`.
pub fn builtin_verifier(id: &str, params: ThermometerParams) -> Option<Arc<dyn Verifier>> {
    match id {
        "const-yes" => Some(Arc::new(ConstVerifier {
            answer: Verdict::MeasuresTemperature,
        })),
        "const-no" => Some(Arc::new(ConstVerifier {
            answer: Verdict::DoesNotMeasure,
        })),
        _ => {
            let budget = id.strip_prefix("sim:")?.parse().ok()?;
            Some(Arc::new(SimVerifier { budget, params }))
        }
    }
}

/// Look up a built-in halting decider: `const-H`, `const-N`, or
/// `bounded-sim:<budget>`.
pub fn builtin_decider(id: &str) -> Option<Arc<dyn HaltingDecider>> {
    match id {
        "const-H" => Some(Arc::new(ConstDecider {
            answer: HaltVerdict::Halts,
        })),
        "const-N" => Some(Arc::new(ConstDecider {
            answer: HaltVerdict::DoesNotHalt,
        })),
        _ => {
            let budget = id.strip_prefix("bounded-sim:")?.parse().ok()?;
            Some(Arc::new(SimDecider { budget }))
        }
    }
}

/// Reading action `blue_says_yes`: decodes the tape as a quoted machine
/// optionally followed by an input (a lone quote stands for the pair of the
/// machine with itself) and passes the question to the wrapped candidate.
/// Undecodable tapes and unanswering candidates are CannotPerform.
pub struct VerifierWorld {
    candidate: Arc<dyn Verifier>,
}

impl VerifierWorld {
    pub fn new(candidate: Arc<dyn Verifier>) -> VerifierWorld {
        VerifierWorld { candidate }
    }
}

impl World for VerifierWorld {
    fn provides_action(&self, _id: &str) -> bool {
        false
    }

    fn provides_reading(&self, id: &str) -> bool {
        id == "blue_says_yes"
    }

    fn perform(&mut self, _id: &str, _obs: &Observation) -> PerformResponse {
        PerformResponse::CannotPerform
    }

    fn verify(&self, _id: &str, obs: &Observation) -> VerifyResponse {
        let tape = obs.tape_content;
        let Ok((_, rest)) = decode_prefix(tape) else {
            return VerifyResponse::CannotPerform;
        };
        let machine_quote = &tape[..tape.len() - rest.len()];
        let input = if rest.is_empty() { machine_quote } else { rest };
        match self.candidate.decide(machine_quote, input) {
            Some(Verdict::MeasuresTemperature) => VerifyResponse::True,
            Some(Verdict::DoesNotMeasure) => VerifyResponse::False,
            None => VerifyResponse::CannotPerform,
        }
    }
}

/// Reading action `h_says_halt`, primed at construction with the question it
/// answers; the tape is ignored, the candidate is asked about the fixed
/// (machine, input) pair.
pub struct PrimedDeciderWorld {
    decider: Arc<dyn HaltingDecider>,
    machine_quote: String,
    input: String,
}

impl PrimedDeciderWorld {
    pub fn new(
        decider: Arc<dyn HaltingDecider>,
        machine_quote: String,
        input: String,
    ) -> PrimedDeciderWorld {
        PrimedDeciderWorld {
            decider,
            machine_quote,
            input,
        }
    }
}

impl World for PrimedDeciderWorld {
    fn provides_action(&self, _id: &str) -> bool {
        false
    }

    fn provides_reading(&self, id: &str) -> bool {
        id == "h_says_halt"
    }

    fn perform(&mut self, _id: &str, _obs: &Observation) -> PerformResponse {
        PerformResponse::CannotPerform
    }

    fn verify(&self, _id: &str, _obs: &Observation) -> VerifyResponse {
        match self.decider.decide(&self.machine_quote, &self.input) {
            Some(HaltVerdict::Halts) => VerifyResponse::True,
            Some(HaltVerdict::DoesNotHalt) => VerifyResponse::False,
            None => VerifyResponse::CannotPerform,
        }
    }
}

/// A chain that prints `word` left to right from the current cell, then
/// halts.
fn print_word(b: &mut MachineBuilder, word: &str, halt: StateId) -> StateId {
    let mut entry = halt;
    for (i, c) in word.chars().rev().enumerate() {
        let print = b.fresh_state();
        if i == 0 {
            b.push(Instruction::Print {
                state: print,
                read: BLANK,
                write: c,
                next: halt,
            });
        } else {
            let mover = b.fresh_state();
            b.push(Instruction::MoveRight {
                state: mover,
                read: c,
                next: entry,
            });
            b.push(Instruction::Print {
                state: print,
                read: BLANK,
                write: c,
                next: mover,
            });
        }
        entry = print;
    }
    entry
}

/// A loop that blanks cells rightwards until it reaches a blank, leaving the
/// head there, then continues at `target`.
fn erase_then(b: &mut MachineBuilder, symbols: &[Symbol], target: StateId) -> StateId {
    let erase = b.fresh_state();
    let step = b.fresh_state();
    for &s in symbols {
        if s != BLANK {
            b.push(Instruction::Print {
                state: erase,
                read: s,
                write: BLANK,
                next: step,
            });
        }
    }
    b.push(Instruction::MoveRight {
        state: step,
        read: BLANK,
        next: erase,
    });
    b.push(Instruction::Print {
        state: erase,
        read: BLANK,
        write: BLANK,
        next: target,
    });
    erase
}

/// Build the contrarian machine around `red`, the accepted reference
/// procedure. It reads the quoted machine on its tape, asks the
/// `blue_says_yes` reading about it, and then does the opposite: yes ->
/// erase and print "NOTEMP"; no -> erase and run `red`; cannot -> erase and
/// print "ERR". All three branches erase the tape first so the result is
/// exactly the branch's output.
pub fn make_green(red: &Machine) -> Machine {
    let mut alphabet: std::collections::BTreeSet<Symbol> = QUOTE_ALPHABET.into_iter().collect();
    alphabet.extend("NOTEMPR".chars());
    alphabet.extend(red.alphabet.iter().copied());
    alphabet.insert(BLANK);
    let symbols: Vec<Symbol> = alphabet.iter().copied().collect();

    let mut b = MachineBuilder::new("green");
    b.symbols(symbols.iter().copied());
    b.declare("blue_says_yes");
    let q0 = b.fresh_state();
    let halt = b.fresh_state();
    let notemp = print_word(&mut b, "NOTEMP", halt);
    let err = print_word(&mut b, "ERR", halt);
    let hook = b.fresh_state();
    let yes = erase_then(&mut b, &symbols, notemp);
    let no = erase_then(&mut b, &symbols, hook);
    let fail = erase_then(&mut b, &symbols, err);
    for &s in &symbols {
        b.push(Instruction::ReadAct {
            state: q0,
            read: s,
            reading: "blue_says_yes".into(),
            yes,
            no,
            fail,
        });
    }
    let host = b.finish();
    inline_subroutine(&host, hook, red).expect("grafting the reference procedure cannot collide")
}

/// Self-application: bake the machine's own quote onto its tape, so the
/// result runs from an empty tape and asks the candidate about exactly the
/// machine it was built from. Returns the baked machine, named "G", and its
/// quote.
pub fn self_apply(green: &Machine) -> (Machine, String) {
    let baked = bake_input(green, &quote(green)).expect("a machine's quote fits its alphabet");
    let mut g = baked.canonicalize();
    g.name = "G".into();
    let gq = quote(&g);
    (g, gq)
}

/// The reference procedure's output: whole degrees, two digits, truncated
/// toward zero.
pub fn reference_degrees(params: ThermometerParams) -> String {
    format!("{:02}", fixed_point_millis(params.true_temp) / 1000)
}

/// The operational measurement test: the run halted with exactly the
/// reference reading for this world.
pub fn measures_temperature(outcome: &RunOutcome, params: ThermometerParams) -> bool {
    outcome.status == RunStatus::Halted
        && outcome.result.as_deref() == Some(reference_degrees(params).as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActualBehavior {
    MeasuredTemperature,
    DidNotMeasure,
    NonEffective,
    Undetermined,
}

impl fmt::Display for ActualBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            ActualBehavior::MeasuredTemperature => "measured the temperature",
            ActualBehavior::DidNotMeasure => "did not measure the temperature",
            ActualBehavior::NonEffective => "did not finish within the budget",
            ActualBehavior::Undetermined => "undetermined",
        };
        write!(f, "{text}")
    }
}

/// Which of the contrarian machine's branches the run took, read off the
/// result string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenBranch {
    Yes,
    No,
    CannotPerform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefutationReport {
    pub candidate_id: String,
    pub verdict: Option<Verdict>,
    pub actual_behavior: ActualBehavior,
    pub contradiction: bool,
    pub branch: Option<GreenBranch>,
    pub status: RunStatus,
    pub steps: u64,
    pub result: Option<String>,
    pub reference_degrees: String,
    pub world: ThermometerParams,
    pub seed: u64,
    pub budget: u64,
    pub core_quote: String,
    pub green_quote: String,
    pub transcript: Vec<String>,
}

fn classify_branch(outcome: &RunOutcome) -> Option<GreenBranch> {
    match outcome.result.as_deref() {
        Some("NOTEMP") => Some(GreenBranch::Yes),
        Some("ERR") => Some(GreenBranch::CannotPerform),
        Some(r) if r.len() == 2 && r.bytes().all(|b| b.is_ascii_digit()) => Some(GreenBranch::No),
        _ => None,
    }
}

/// Ask the candidate about the self-applied contrarian machine, run that
/// machine for real, and compare. For every candidate that answers
/// consistently, the report shows a contradiction; a candidate that fails to
/// answer has already broken its own contract.
pub fn refute_verifier(
    candidate: Arc<dyn Verifier>,
    params: ThermometerParams,
    seed: u64,
    budget: u64,
) -> Result<RefutationReport, WorldError> {
    let red = make_reference_thermometer();
    let green = make_green(&red);
    let core_quote = quote(&green);
    let (g, green_quote) = self_apply(&green);

    // The tape carries the core's quote as a self-pair, so the candidate is
    // asked the very question the in-run reading will ask.
    let verdict = candidate.decide(&core_quote, &core_quote);

    let mut providers = ProviderSet::empty().with(VerifierWorld::new(candidate.clone()));
    providers.add(make_thermometer_world(params, seed)?);
    let outcome = run(
        &g,
        "",
        &mut providers,
        &OracleSet::disabled(),
        budget,
        TraceLevel::Off,
    )
    .expect("the generated machine is valid and takes no input");

    let degrees = reference_degrees(params);
    let measured = measures_temperature(&outcome, params);
    let actual_behavior = match verdict {
        None => ActualBehavior::Undetermined,
        Some(_) if outcome.status != RunStatus::Halted => ActualBehavior::NonEffective,
        Some(_) if measured => ActualBehavior::MeasuredTemperature,
        Some(_) => ActualBehavior::DidNotMeasure,
    };
    let contradiction = match verdict {
        Some(Verdict::MeasuresTemperature) => !measured,
        Some(Verdict::DoesNotMeasure) => measured,
        None => true,
    };

    let candidate_id = candidate.id();
    let mut transcript = vec![
        format!(
            "built the contrarian machine around the reference procedure; its quote is {} symbols",
            core_quote.len()
        ),
        format!(
            "baked the quote into the machine itself; the self-applied machine has {} instructions",
            g.instructions.len()
        ),
        format!("asked candidate {candidate_id} about the self-applied machine"),
        match verdict {
            Some(v) => format!("candidate answered '{v}'"),
            None => "candidate gave no answer within its budget".into(),
        },
        format!("ran the self-applied machine on an empty tape with budget {budget}"),
        match outcome.status {
            RunStatus::Halted => format!(
                "run halted after {} steps with result \"{}\"",
                outcome.steps,
                outcome.result.as_deref().unwrap_or_default()
            ),
            RunStatus::BudgetExhausted => {
                format!("run exhausted the budget after {} steps", outcome.steps)
            }
            RunStatus::ExecutionError => format!(
                "run failed after {} steps: {}",
                outcome.steps,
                outcome.error.as_deref().unwrap_or_default()
            ),
        },
        format!("reference reading for this world is \"{degrees}\""),
        format!("actual behavior: the machine {actual_behavior}"),
    ];
    transcript.push(match (verdict, contradiction) {
        (Some(v), true) => format!("contradiction: the candidate said '{v}' and the machine did the opposite"),
        (None, true) => format!("contradiction: {candidate_id} broke its totality contract by not answering"),
        (_, false) => "no contradiction observed".into(),
    });

    Ok(RefutationReport {
        candidate_id,
        verdict,
        actual_behavior,
        contradiction,
        branch: classify_branch(&outcome),
        status: outcome.status,
        steps: outcome.steps,
        result: outcome.result,
        reference_degrees: degrees,
        world: params,
        seed,
        budget,
        core_quote,
        green_quote,
        transcript,
    })
}

/// The halting-side contrarian: asks `h_says_halt` about itself, loops
/// forever on "halts", prints "0" and halts on "does not halt". Returns the
/// machine and its quote; the asking world is primed with that quote by
/// [`refute_halting_decider`].
pub fn make_halting_diagonal() -> (Machine, String) {
    let mut b = MachineBuilder::new("D");
    b.symbols(['0', 'E', 'R']);
    b.declare("h_says_halt");
    let q0 = b.fresh_state();
    let halt = b.fresh_state();
    let err = print_word(&mut b, "ERR", halt);
    let zero = print_word(&mut b, "0", halt);
    let loop_a = b.fresh_state();
    let loop_b = b.fresh_state();
    b.push(Instruction::MoveRight {
        state: loop_a,
        read: BLANK,
        next: loop_b,
    });
    b.push(Instruction::MoveLeft {
        state: loop_b,
        read: BLANK,
        next: loop_a,
    });
    b.push(Instruction::ReadAct {
        state: q0,
        read: BLANK,
        reading: "h_says_halt".into(),
        yes: loop_a,
        no: zero,
        fail: err,
    });
    let mut d = b.finish().canonicalize();
    d.name = "D".into();
    let dq = quote(&d);
    (d, dq)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaltingRefutationReport {
    pub candidate_id: String,
    pub verdict: Option<HaltVerdict>,
    pub contradiction: bool,
    pub status: RunStatus,
    pub steps: u64,
    pub result: Option<String>,
    pub budget: u64,
    pub diagonal_quote: String,
    pub transcript: Vec<String>,
}

/// Ask the candidate whether the halting-side contrarian halts, run it, and
/// compare.
pub fn refute_halting_decider(
    candidate: Arc<dyn HaltingDecider>,
    budget: u64,
) -> HaltingRefutationReport {
    let (d, dq) = make_halting_diagonal();
    let verdict = candidate.decide(&dq, "");
    let mut providers = ProviderSet::empty().with(PrimedDeciderWorld::new(
        candidate.clone(),
        dq.clone(),
        String::new(),
    ));
    let outcome = run(
        &d,
        "",
        &mut providers,
        &OracleSet::disabled(),
        budget,
        TraceLevel::Off,
    )
    .expect("the generated machine is valid and takes no input");

    let halted = outcome.status == RunStatus::Halted;
    let contradiction = match verdict {
        Some(HaltVerdict::Halts) => !halted,
        Some(HaltVerdict::DoesNotHalt) => halted,
        None => true,
    };
    let candidate_id = candidate.id();
    let transcript = vec![
        format!("asked candidate {candidate_id} whether the contrarian machine halts on itself"),
        match verdict {
            Some(v) => format!("candidate answered '{v}'"),
            None => "candidate gave no answer within its budget".into(),
        },
        format!("ran the contrarian machine with budget {budget}"),
        if halted {
            format!(
                "run halted after {} steps with result \"{}\"",
                outcome.steps,
                outcome.result.as_deref().unwrap_or_default()
            )
        } else {
            format!("run did not halt within the budget ({} steps)", outcome.steps)
        },
        match (verdict, contradiction) {
            (Some(v), true) => {
                format!("contradiction: the candidate said '{v}' and the machine did the opposite")
            }
            (None, true) => {
                format!("contradiction: {candidate_id} broke its totality contract by not answering")
            }
            (_, false) => "no contradiction observed".into(),
        },
    ];

    HaltingRefutationReport {
        candidate_id,
        verdict,
        contradiction,
        status: outcome.status,
        steps: outcome.steps,
        result: outcome.result,
        budget,
        diagonal_quote: dq,
        transcript,
    }
}

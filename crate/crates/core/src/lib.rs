//! Measurement procedures as machines. This crate models an experiment as a
//! tape machine whose extra instructions act on a simulated world: `!action`
//! asks the world to do something, `?reading` asks it a yes/no question
//! about the apparatus. On top of that sit a text format for machines, a
//! canonical single-string encoding so machines can appear on each other's
//! tapes, repeatability analysis over seeded worlds, and a harness that
//! refutes any claimed decider for "does this machine measure temperature?"
//! (or "does this machine halt?") by self-application.

pub mod compose;
pub mod diagonal;
pub mod dsl;
pub mod exec;
pub mod instruments;
pub mod machine;
pub mod providers;
pub mod quote;
pub mod repeat;
pub mod tape;
pub mod testgen;
pub mod worldcfg;

pub use compose::{bake_input, bake_overhead, inline_subroutine, ComposeError};
pub use diagonal::{
    builtin_decider, builtin_verifier, make_green, make_halting_diagonal, measures_temperature,
    refute_halting_decider, refute_verifier, reference_degrees, self_apply, ActualBehavior,
    GreenBranch, HaltVerdict, HaltingDecider, HaltingRefutationReport, PrimedDeciderWorld,
    RefutationReport, Verdict, Verifier, VerifierWorld,
};
pub use dsl::{parse_dsl, render_dsl, render_instruction, DslError};
pub use exec::{
    run, ExecError, OracleSet, RunError, RunOutcome, RunStatus, TraceEntry, TraceLevel,
};
pub use instruments::{make_dice_reporter, make_digit_reader, make_reference_thermometer};
pub use machine::{
    ActionKind, Instruction, Machine, MachineBuilder, StateId, Symbol, ValidationReport,
    Violation, ViolationKind, BLANK,
};
pub use providers::{
    fixed_point_millis, make_broken_world, make_dice_world, make_thermometer_world,
    make_voltage_supply_world, render_fixed, Observation, PerformResponse, ProviderSet,
    ThermometerParams, VerifyResponse, World, WorldError,
};
pub use quote::{decode_prefix, quote, unquote, DecodeError, QUOTE_ALPHABET};
pub use repeat::{
    is_repeatable, repeatable_after_truncation, run_trials, truncate_significant, Trial, TrialSet,
    TruncateError,
};
pub use tape::{result_of, Configuration, Tape};
pub use worldcfg::{build_provider_set, parse_world_config, WorldConfig, WorldSpec};

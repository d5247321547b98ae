//! Repeatability: run a machine many times over freshly seeded worlds and ask
//! whether it produces the same result string every time, optionally after
//! truncating numeric results to a number of significant figures.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::exec::{run, OracleSet, RunOutcome, RunStatus, TraceLevel};
use crate::machine::Machine;
use crate::providers::{ProviderSet, WorldError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub seed: u64,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSet {
    pub input: String,
    pub budget: u64,
    pub trials: Vec<Trial>,
}

impl TrialSet {
    pub fn all_halted(&self) -> bool {
        self.trials
            .iter()
            .all(|t| t.outcome.status == RunStatus::Halted)
    }

    /// The distinct result strings over halted trials.
    pub fn distinct_results(&self) -> BTreeSet<&str> {
        self.trials
            .iter()
            .filter_map(|t| t.outcome.result.as_deref())
            .collect()
    }
}

fn error_trial(seed: u64, message: String) -> Trial {
    Trial {
        seed,
        outcome: RunOutcome {
            status: RunStatus::ExecutionError,
            result: None,
            steps: 0,
            error: Some(message),
            trace: None,
        },
    }
}

/// Run `m` on `input` once per seed, each trial against a world set freshly
/// built by `factory`. Per-trial failures (world construction, invalid
/// machine, execution errors) are folded into that trial's outcome; the set
/// itself always completes.
pub fn run_trials(
    m: &Machine,
    input: &str,
    factory: impl Fn(u64) -> Result<ProviderSet, WorldError>,
    seeds: &[u64],
    budget: u64,
) -> TrialSet {
    let trials = seeds
        .iter()
        .map(|&seed| match factory(seed) {
            Ok(mut providers) => {
                match run(
                    m,
                    input,
                    &mut providers,
                    &OracleSet::disabled(),
                    budget,
                    TraceLevel::Off,
                ) {
                    Ok(outcome) => Trial { seed, outcome },
                    Err(e) => error_trial(seed, e.to_string()),
                }
            }
            Err(e) => error_trial(seed, e.to_string()),
        })
        .collect();
    TrialSet {
        input: input.to_string(),
        budget,
        trials,
    }
}

/// True iff every trial halted and all results are exactly equal. Zero or one
/// trials are vacuously repeatable.
pub fn is_repeatable(t: &TrialSet) -> bool {
    t.all_halted() && t.distinct_results().len() <= 1
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TruncateError {
    #[error("not a numeric quantity value")]
    NotNumeric,
    #[error("significant figure count {0} outside 1..=5")]
    BadCount(usize),
}

fn parse_fixed(result: &str) -> Result<i64, TruncateError> {
    let b = result.as_bytes();
    let well_formed = b.len() == 6
        && b[2] == b'.'
        && [0, 1, 3, 4, 5].iter().all(|&i| b[i].is_ascii_digit());
    if !well_formed {
        return Err(TruncateError::NotNumeric);
    }
    let digit = |i: usize| (b[i] - b'0') as i64;
    Ok(digit(0) * 10_000 + digit(1) * 1_000 + digit(3) * 100 + digit(4) * 10 + digit(5))
}

/// Millis per unit of the last kept place when keeping `n` significant
/// figures of `millis`, never finer than a milli.
fn last_place_unit(millis: i64, n: usize) -> i64 {
    let mut pow = 1;
    while pow * 10 <= millis {
        pow *= 10;
    }
    let mut unit = pow;
    for _ in 1..n {
        unit /= 10;
    }
    unit.max(1)
}

/// Round a fixed-point result ("DD.ddd") to `n` significant figures,
/// half-up, and render it without trailing noise digits: "23.712" at 2
/// figures is "24", "05.200" at 2 figures is "5.2".
pub fn truncate_significant(result: &str, n: usize) -> Result<String, TruncateError> {
    if !(1..=5).contains(&n) {
        return Err(TruncateError::BadCount(n));
    }
    let millis = parse_fixed(result)?;
    if millis == 0 {
        return Ok("0".to_string());
    }
    let mut unit = last_place_unit(millis, n);
    let mut rounded = (millis + unit / 2) / unit * unit;
    // Rounding can carry into a new leading place (99.95 at 3 figures is
    // 100); re-derive the kept places from the rounded value.
    let wider = last_place_unit(rounded, n);
    if wider > unit {
        unit = wider;
        rounded = (rounded + unit / 2) / unit * unit;
    }
    let decimals = match unit {
        1 => 3,
        10 => 2,
        100 => 1,
        _ => 0,
    };
    let whole = rounded / 1000;
    if decimals == 0 {
        Ok(whole.to_string())
    } else {
        let frac = format!("{:03}", rounded % 1000);
        Ok(format!("{whole}.{}", &frac[..decimals]))
    }
}

/// True iff every trial halted and all results agree once rounded to `n`
/// significant figures.
pub fn repeatable_after_truncation(t: &TrialSet, n: usize) -> Result<bool, TruncateError> {
    if !t.all_halted() {
        return Ok(false);
    }
    let mut truncated = BTreeSet::new();
    for trial in &t.trials {
        let result = trial.outcome.result.as_deref().unwrap_or_default();
        truncated.insert(truncate_significant(result, n)?);
    }
    Ok(truncated.len() <= 1)
}

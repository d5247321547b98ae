//! Worlds: the pluggable providers behind actions and reading actions.
//!
//! A machine never touches a world directly. Its `Act`/`ReadAct` instructions
//! name identifiers, and a [`ProviderSet`] routes each identifier to the first
//! registered world that serves it. Worlds see only an [`Observation`] (the
//! tape content and the invocation counter); they can never write the tape,
//! and reading actions take `&self`, so observing cannot mutate a world.
//!
//! All randomness is deterministic and reproducible from a seed:
//!
//! * Stream: ChaCha8 keyed with the 64-bit seed (`ChaCha8Rng::seed_from_u64`),
//!   consumed as a sequence of `next_u64` draws.
//! * Die roll: one draw `x`; face = `x % 6 + 1`.
//! * Gaussian: Box-Muller on two draws `x1`, `x2` per variate:
//!   `u1 = ((x1 >> 11) + 1) * 2^-53` (in (0,1]), `u2 = (x2 >> 11) * 2^-53`
//!   (in [0,1)), `z = sqrt(-2 ln u1) * cos(2*pi*u2)`.
//!
//! Tests reproduce expected values from this recipe without calling the world
//! implementations.

use std::collections::BTreeSet;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What a world is allowed to see when serving one invocation.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    /// The non-blank span of the tape at the moment of the invocation.
    pub tape_content: &'a str,
    /// How many provider invocations this run completed before this one.
    pub invocation_index: u64,
}

/// Outcome of an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerformResponse {
    Performed,
    CannotPerform,
}

/// Outcome of a reading action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyResponse {
    True,
    False,
    CannotPerform,
}

/// A bundle of experimental possibilities: some actions, some readings.
pub trait World {
    fn provides_action(&self, id: &str) -> bool;
    fn provides_reading(&self, id: &str) -> bool;
    fn perform(&mut self, id: &str, obs: &Observation) -> PerformResponse;
    /// Readings observe the world; they must not change it, hence `&self`.
    fn verify(&self, id: &str, obs: &Observation) -> VerifyResponse;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("no provider registered for action '{0}'")]
    UnregisteredAction(String),
    #[error("no provider registered for reading action '{0}'")]
    UnregisteredReading(String),
}

/// The registry a run executes against. Identifiers are routed to the first
/// world (in registration order) that serves them; an identifier no world
/// serves is an execution error, which is not the same as a world answering
/// that it cannot perform.
#[derive(Default)]
pub struct ProviderSet {
    worlds: Vec<Box<dyn World>>,
    invocations: u64,
}

impl ProviderSet {
    pub fn empty() -> ProviderSet {
        ProviderSet::default()
    }

    pub fn add(&mut self, world: impl World + 'static) -> &mut Self {
        self.worlds.push(Box::new(world));
        self
    }

    pub fn with(mut self, world: impl World + 'static) -> Self {
        self.add(world);
        self
    }

    /// Completed provider invocations so far.
    pub fn invocations(&self) -> u64 {
        self.invocations
    }

    pub fn provides_action(&self, id: &str) -> bool {
        self.worlds.iter().any(|w| w.provides_action(id))
    }

    pub fn provides_reading(&self, id: &str) -> bool {
        self.worlds.iter().any(|w| w.provides_reading(id))
    }

    pub fn perform(&mut self, id: &str, tape_content: &str) -> Result<PerformResponse, ProviderError> {
        let Some(at) = self.worlds.iter().position(|w| w.provides_action(id)) else {
            return Err(ProviderError::UnregisteredAction(id.to_owned()));
        };
        let obs = Observation {
            tape_content,
            invocation_index: self.invocations,
        };
        self.invocations += 1;
        Ok(self.worlds[at].perform(id, &obs))
    }

    pub fn verify(&mut self, id: &str, tape_content: &str) -> Result<VerifyResponse, ProviderError> {
        let Some(at) = self.worlds.iter().position(|w| w.provides_reading(id)) else {
            return Err(ProviderError::UnregisteredReading(id.to_owned()));
        };
        let obs = Observation {
            tape_content,
            invocation_index: self.invocations,
        };
        self.invocations += 1;
        Ok(self.worlds[at].verify(id, &obs))
    }
}

impl std::fmt::Debug for ProviderSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProviderSet")
            .field("worlds", &self.worlds.len())
            .field("invocations", &self.invocations)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum WorldError {
    #[error("temperature {0} outside the representable range [0, 100)")]
    TemperatureOutOfRange(f64),
    #[error("negative noise sigma {0}")]
    NegativeNoise(f64),
}

/// One Gaussian variate by the documented Box-Muller recipe (two draws).
pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / 9007199254740992.0; // 2^-53
    let x1 = rng.next_u64();
    let x2 = rng.next_u64();
    let u1 = ((x1 >> 11) + 1) as f64 * SCALE;
    let u2 = (x2 >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// ---------------------------------------------------------------------------
// Dice

/// A six-sided die. Action `roll`; readings `shows_k` (face equals k) and
/// `shows_ge_k` (face at least k) for k in 1..=6. Readings before the first
/// roll cannot be performed: the die shows nothing until it is cast.
pub struct DiceWorld {
    rng: ChaCha8Rng,
    face: Option<u8>,
}

pub fn make_dice_world(seed: u64) -> DiceWorld {
    DiceWorld {
        rng: ChaCha8Rng::seed_from_u64(seed),
        face: None,
    }
}

fn dice_reading(id: &str) -> Option<(bool, u8)> {
    let (ge, digit) = match id.strip_prefix("shows_ge_") {
        Some(rest) => (true, rest),
        None => (false, id.strip_prefix("shows_")?),
    };
    match digit.parse::<u8>() {
        Ok(k) if (1..=6).contains(&k) => Some((ge, k)),
        _ => None,
    }
}

impl World for DiceWorld {
    fn provides_action(&self, id: &str) -> bool {
        id == "roll"
    }

    fn provides_reading(&self, id: &str) -> bool {
        dice_reading(id).is_some()
    }

    fn perform(&mut self, _id: &str, _obs: &Observation) -> PerformResponse {
        self.face = Some((self.rng.next_u64() % 6 + 1) as u8);
        PerformResponse::Performed
    }

    fn verify(&self, id: &str, _obs: &Observation) -> VerifyResponse {
        let (ge, k) = dice_reading(id).expect("routed reading");
        match self.face {
            None => VerifyResponse::CannotPerform,
            Some(f) => {
                let holds = if ge { f >= k } else { f == k };
                if holds {
                    VerifyResponse::True
                } else {
                    VerifyResponse::False
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Thermometer

/// Parameters of a simulated thermometer: the real temperature and the
/// standard deviation of its sampling noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermometerParams {
    pub true_temp: f64,
    pub noise_sigma: f64,
}

/// Fixed-point thousandths of a displayable value, clamped to the "DD.ddd"
/// range. Rounding is f64 `round`, i.e. half away from zero.
pub fn fixed_point_millis(value: f64) -> i64 {
    ((value * 1000.0).round() as i64).clamp(0, 99_999)
}

/// Render thousandths as the fixed display format "DD.ddd".
pub fn render_fixed(millis: i64) -> String {
    format!("{:02}.{:03}", millis / 1000, millis % 1000)
}

/// Digit of a "DD.ddd" display at position `pos`: 0 tens, 1 ones, 2 tenths,
/// 3 hundredths, 4 thousandths.
pub fn display_digit(millis: i64, pos: usize) -> u8 {
    let div = [10_000, 1000, 100, 10, 1][pos];
    ((millis / div) % 10) as u8
}

/// A thermometer with a five-digit display, laid out "DD.ddd". Action
/// `sample` draws true_temp + sigma * gaussian and latches the display;
/// readings `digit_{pos}_ge_{d}` (positions 0..=4, digits 0..=9) compare one
/// display digit against `d`. Position aliases `tens`, `ones`, `tenths`,
/// `hundredths`, `thousandths` are accepted, as in `tens_digit_ge_3`.
/// Readings before the first sample cannot be performed.
pub struct ThermometerWorld {
    params: ThermometerParams,
    rng: ChaCha8Rng,
    display: Option<i64>,
}

pub fn make_thermometer_world(
    params: ThermometerParams,
    seed: u64,
) -> Result<ThermometerWorld, WorldError> {
    if !(0.0..100.0).contains(&params.true_temp) {
        return Err(WorldError::TemperatureOutOfRange(params.true_temp));
    }
    if params.noise_sigma < 0.0 {
        return Err(WorldError::NegativeNoise(params.noise_sigma));
    }
    Ok(ThermometerWorld {
        params,
        rng: ChaCha8Rng::seed_from_u64(seed),
        display: None,
    })
}

fn digit_reading(id: &str) -> Option<(usize, u8)> {
    let rest = id;
    let (pos, tail) = if let Some(t) = rest.strip_prefix("digit_") {
        let (p, t) = t.split_once('_')?;
        (p.parse::<usize>().ok()?, t)
    } else {
        let names = [
            ("tens_digit_", 0),
            ("ones_digit_", 1),
            ("tenths_digit_", 2),
            ("hundredths_digit_", 3),
            ("thousandths_digit_", 4),
        ];
        let (prefix, p) = names.iter().find(|(n, _)| rest.starts_with(n))?;
        (*p, &rest[prefix.len()..])
    };
    if pos > 4 {
        return None;
    }
    let d = tail.strip_prefix("ge_")?.parse::<u8>().ok()?;
    (d <= 9).then_some((pos, d))
}

impl World for ThermometerWorld {
    fn provides_action(&self, id: &str) -> bool {
        id == "sample"
    }

    fn provides_reading(&self, id: &str) -> bool {
        digit_reading(id).is_some()
    }

    fn perform(&mut self, _id: &str, _obs: &Observation) -> PerformResponse {
        let value = self.params.true_temp + self.params.noise_sigma * gaussian(&mut self.rng);
        self.display = Some(fixed_point_millis(value));
        PerformResponse::Performed
    }

    fn verify(&self, id: &str, _obs: &Observation) -> VerifyResponse {
        let (pos, d) = digit_reading(id).expect("routed reading");
        match self.display {
            None => VerifyResponse::CannotPerform,
            Some(millis) => {
                if display_digit(millis, pos) >= d {
                    VerifyResponse::True
                } else {
                    VerifyResponse::False
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Voltage supply and broken instruments

/// A voltage supply that may have been carted off. Action `set_voltage_10`
/// succeeds while the supply is present and cannot be performed once it is
/// gone: removing equipment turns a working procedure into one that fails at
/// this step without being wrong about anything.
pub struct VoltageSupplyWorld {
    present: bool,
}

pub fn make_voltage_supply_world(present: bool) -> VoltageSupplyWorld {
    VoltageSupplyWorld { present }
}

impl World for VoltageSupplyWorld {
    fn provides_action(&self, id: &str) -> bool {
        id == "set_voltage_10"
    }

    fn provides_reading(&self, _id: &str) -> bool {
        false
    }

    fn perform(&mut self, _id: &str, _obs: &Observation) -> PerformResponse {
        if self.present {
            PerformResponse::Performed
        } else {
            PerformResponse::CannotPerform
        }
    }

    fn verify(&self, _id: &str, _obs: &Observation) -> VerifyResponse {
        VerifyResponse::CannotPerform
    }
}

/// An instrument that is registered but out of order: every listed action and
/// reading answers CannotPerform. Distinct from an unregistered identifier,
/// which is an execution error.
pub struct BrokenWorld {
    actions: BTreeSet<String>,
    readings: BTreeSet<String>,
}

pub fn make_broken_world(
    actions: impl IntoIterator<Item = String>,
    readings: impl IntoIterator<Item = String>,
) -> BrokenWorld {
    BrokenWorld {
        actions: actions.into_iter().collect(),
        readings: readings.into_iter().collect(),
    }
}

impl World for BrokenWorld {
    fn provides_action(&self, id: &str) -> bool {
        self.actions.contains(id)
    }

    fn provides_reading(&self, id: &str) -> bool {
        self.readings.contains(id)
    }

    fn perform(&mut self, _id: &str, _obs: &Observation) -> PerformResponse {
        PerformResponse::CannotPerform
    }

    fn verify(&self, _id: &str, _obs: &Observation) -> VerifyResponse {
        VerifyResponse::CannotPerform
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference die faces straight from the documented recipe, bypassing
    /// DiceWorld.
    fn reference_faces(seed: u64, n: usize) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (rng.next_u64() % 6 + 1) as u8).collect()
    }

    /// Reference thermometer display, same recipe as the world.
    fn reference_display(params: ThermometerParams, seed: u64, nth: usize) -> i64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut value = 0.0;
        for _ in 0..=nth {
            value = params.true_temp + params.noise_sigma * gaussian(&mut rng);
        }
        fixed_point_millis(value)
    }

    #[test]
    fn dice_reading_before_first_roll_cannot_be_performed() {
        let mut p = ProviderSet::empty().with(make_dice_world(42));
        assert_eq!(p.verify("shows_3", "").unwrap(), VerifyResponse::CannotPerform);
    }

    #[test]
    fn dice_rolls_follow_the_documented_generator() {
        let seed = 42;
        let faces = reference_faces(seed, 20);
        let mut p = ProviderSet::empty().with(make_dice_world(seed));
        for face in faces {
            assert_eq!(p.perform("roll", "").unwrap(), PerformResponse::Performed);
            for k in 1..=6u8 {
                let expect_eq = if face == k { VerifyResponse::True } else { VerifyResponse::False };
                let expect_ge = if face >= k { VerifyResponse::True } else { VerifyResponse::False };
                assert_eq!(p.verify(&format!("shows_{k}"), "").unwrap(), expect_eq);
                assert_eq!(p.verify(&format!("shows_ge_{k}"), "").unwrap(), expect_ge);
            }
        }
    }

    #[test]
    fn exactly_one_face_shows_after_each_roll() {
        let mut p = ProviderSet::empty().with(make_dice_world(7));
        for _ in 0..50 {
            p.perform("roll", "").unwrap();
            let trues = (1..=6)
                .filter(|k| p.verify(&format!("shows_{k}"), "").unwrap() == VerifyResponse::True)
                .count();
            assert_eq!(trues, 1);
        }
    }

    #[test]
    fn noiseless_thermometer_displays_the_true_temperature() {
        let params = ThermometerParams { true_temp: 23.7, noise_sigma: 0.0 };
        let mut p = ProviderSet::empty().with(make_thermometer_world(params, 0).unwrap());
        p.perform("sample", "").unwrap();
        // Display is 23.700: tens digit 2, so "at least 3" is false.
        assert_eq!(p.verify("tens_digit_ge_3", "").unwrap(), VerifyResponse::False);
        assert_eq!(p.verify("tens_digit_ge_2", "").unwrap(), VerifyResponse::True);
        assert_eq!(p.verify("digit_1_ge_3", "").unwrap(), VerifyResponse::True);
        assert_eq!(p.verify("digit_2_ge_7", "").unwrap(), VerifyResponse::True);
        assert_eq!(p.verify("digit_2_ge_8", "").unwrap(), VerifyResponse::False);
        assert_eq!(p.verify("digit_4_ge_1", "").unwrap(), VerifyResponse::False);
    }

    #[test]
    fn thermometer_reading_before_first_sample_cannot_be_performed() {
        let params = ThermometerParams { true_temp: 23.7, noise_sigma: 0.0 };
        let mut p = ProviderSet::empty().with(make_thermometer_world(params, 0).unwrap());
        assert_eq!(p.verify("digit_0_ge_1", "").unwrap(), VerifyResponse::CannotPerform);
    }

    #[test]
    fn thermometer_rejects_out_of_range_construction() {
        let bad = ThermometerParams { true_temp: 123.4, noise_sigma: 0.0 };
        assert_eq!(
            make_thermometer_world(bad, 0).err(),
            Some(WorldError::TemperatureOutOfRange(123.4))
        );
        let neg = ThermometerParams { true_temp: 20.0, noise_sigma: -1.0 };
        assert!(make_thermometer_world(neg, 0).is_err());
    }

    #[test]
    fn distinct_seeds_sample_distinct_noise() {
        let params = ThermometerParams { true_temp: 23.7, noise_sigma: 0.05 };
        let a = reference_display(params, 1, 0);
        let b = reference_display(params, 2, 0);
        assert_ne!(a, b);
        for (seed, expected) in [(1, a), (2, b)] {
            let mut p = ProviderSet::empty().with(make_thermometer_world(params, seed).unwrap());
            p.perform("sample", "").unwrap();
            for pos in 0..5 {
                let d = display_digit(expected, pos);
                assert_eq!(
                    p.verify(&format!("digit_{pos}_ge_{d}"), "").unwrap(),
                    VerifyResponse::True
                );
                if d < 9 {
                    assert_eq!(
                        p.verify(&format!("digit_{pos}_ge_{}", d + 1), "").unwrap(),
                        VerifyResponse::False
                    );
                }
            }
        }
    }

    #[test]
    fn removed_voltage_supply_cannot_perform() {
        let mut p = ProviderSet::empty().with(make_voltage_supply_world(false));
        assert_eq!(
            p.perform("set_voltage_10", "").unwrap(),
            PerformResponse::CannotPerform
        );
        let mut ok = ProviderSet::empty().with(make_voltage_supply_world(true));
        assert_eq!(ok.perform("set_voltage_10", "").unwrap(), PerformResponse::Performed);
    }

    #[test]
    fn unregistered_identifier_is_an_error_not_cannot_perform() {
        let mut p = ProviderSet::empty().with(make_dice_world(0));
        assert_eq!(
            p.perform("sample", "").unwrap_err(),
            ProviderError::UnregisteredAction("sample".into())
        );
        assert_eq!(
            p.verify("blue_says_yes", "").unwrap_err(),
            ProviderError::UnregisteredReading("blue_says_yes".into())
        );
    }

    #[test]
    fn identical_seeds_give_identical_thousand_call_sequences() {
        let build = |seed| {
            ProviderSet::empty()
                .with(make_dice_world(seed))
                .with(make_thermometer_world(
                    ThermometerParams { true_temp: 55.5, noise_sigma: 1.0 },
                    seed,
                ).unwrap())
        };
        let mut a = build(99);
        let mut b = build(99);
        for i in 0..1000u64 {
            match i % 4 {
                0 => assert_eq!(a.perform("roll", "").unwrap(), b.perform("roll", "").unwrap()),
                1 => assert_eq!(a.perform("sample", "").unwrap(), b.perform("sample", "").unwrap()),
                2 => assert_eq!(
                    a.verify(&format!("shows_{}", i % 6 + 1), "").unwrap(),
                    b.verify(&format!("shows_{}", i % 6 + 1), "").unwrap()
                ),
                _ => assert_eq!(
                    a.verify(&format!("digit_{}_ge_{}", i % 5, i % 10), "").unwrap(),
                    b.verify(&format!("digit_{}_ge_{}", i % 5, i % 10), "").unwrap()
                ),
            }
        }
        assert_eq!(a.invocations(), 1000);
        assert_eq!(b.invocations(), 1000);
    }

    #[test]
    fn invocation_index_counts_prior_calls() {
        struct Probe;
        impl World for Probe {
            fn provides_action(&self, id: &str) -> bool {
                id == "probe"
            }
            fn provides_reading(&self, _id: &str) -> bool {
                false
            }
            fn perform(&mut self, _id: &str, obs: &Observation) -> PerformResponse {
                // First call sees index 0, second 1, and so on.
                if obs.invocation_index.is_multiple_of(2) {
                    PerformResponse::Performed
                } else {
                    PerformResponse::CannotPerform
                }
            }
            fn verify(&self, _id: &str, _obs: &Observation) -> VerifyResponse {
                VerifyResponse::CannotPerform
            }
        }
        let mut p = ProviderSet::empty().with(Probe);
        assert_eq!(p.perform("probe", "").unwrap(), PerformResponse::Performed);
        assert_eq!(p.perform("probe", "").unwrap(), PerformResponse::CannotPerform);
        assert_eq!(p.perform("probe", "").unwrap(), PerformResponse::Performed);
    }
}

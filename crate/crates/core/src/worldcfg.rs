//! World configuration files: a JSON description of which simulated worlds a
//! run talks to, so the same machine can face different worlds.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "worlds": [
//!     { "kind": "dice" },
//!     { "kind": "thermometer", "true_temp": 23.7, "noise_sigma": 0.05 },
//!     { "kind": "voltage_supply", "present": false },
//!     { "kind": "broken", "actions": ["sample"] }
//!   ]
//! }
//! ```
//!
//! `seed` is an optional default; callers that have their own seed pass it to
//! [`build_provider_set`] directly. Worlds are registered in listed order and
//! the first world claiming an identifier serves it. Each world is seeded
//! with the run seed plus its position, so co-resident stochastic worlds do
//! not share a stream.

use serde::{Deserialize, Serialize};

use crate::providers::{
    make_broken_world, make_dice_world, make_thermometer_world, make_voltage_supply_world,
    ProviderSet, ThermometerParams, WorldError,
};

fn default_present() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorldSpec {
    Dice,
    Thermometer(ThermometerParams),
    VoltageSupply {
        #[serde(default = "default_present")]
        present: bool,
    },
    Broken {
        #[serde(default)]
        actions: Vec<String>,
        #[serde(default)]
        readings: Vec<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub worlds: Vec<WorldSpec>,
}

impl WorldConfig {
    /// The thermometer parameters of the first thermometer entry, if any.
    pub fn thermometer_params(&self) -> Option<ThermometerParams> {
        self.worlds.iter().find_map(|w| match w {
            WorldSpec::Thermometer(params) => Some(*params),
            _ => None,
        })
    }
}

pub fn parse_world_config(text: &str) -> Result<WorldConfig, serde_json::Error> {
    serde_json::from_str(text)
}

/// Instantiate the configured worlds with `seed`. Any `seed` inside the
/// config is a caller-level default and is not consulted here.
pub fn build_provider_set(config: &WorldConfig, seed: u64) -> Result<ProviderSet, WorldError> {
    let mut set = ProviderSet::empty();
    for (index, spec) in config.worlds.iter().enumerate() {
        let world_seed = seed.wrapping_add(index as u64);
        match spec {
            WorldSpec::Dice => {
                set.add(make_dice_world(world_seed));
            }
            WorldSpec::Thermometer(params) => {
                set.add(make_thermometer_world(*params, world_seed)?);
            }
            WorldSpec::VoltageSupply { present } => {
                set.add(make_voltage_supply_world(*present));
            }
            WorldSpec::Broken { actions, readings } => {
                set.add(make_broken_world(actions.clone(), readings.clone()));
            }
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_world_kinds() {
        let text = r#"{
            "seed": 7,
            "worlds": [
                { "kind": "dice" },
                { "kind": "thermometer", "true_temp": 23.7, "noise_sigma": 0.05 },
                { "kind": "voltage_supply", "present": false },
                { "kind": "broken", "actions": ["sample"] }
            ]
        }"#;
        let config = parse_world_config(text).unwrap();
        assert_eq!(config.seed, Some(7));
        assert_eq!(config.worlds.len(), 4);
        assert_eq!(
            config.thermometer_params(),
            Some(ThermometerParams {
                true_temp: 23.7,
                noise_sigma: 0.05
            })
        );
        let set = build_provider_set(&config, 0).unwrap();
        assert!(set.provides_action("roll"));
        assert!(set.provides_action("sample"));
        assert!(set.provides_action("set_voltage_10"));
        assert!(set.provides_reading("shows_1"));
    }

    #[test]
    fn omitted_fields_take_defaults() {
        let config = parse_world_config(r#"{ "worlds": [ { "kind": "voltage_supply" } ] }"#).unwrap();
        assert_eq!(config.seed, None);
        assert_eq!(
            config.worlds,
            vec![WorldSpec::VoltageSupply { present: true }]
        );
        assert_eq!(parse_world_config("{}").unwrap(), WorldConfig::default());
    }

    #[test]
    fn bad_parameters_surface_as_world_errors() {
        let config = parse_world_config(
            r#"{ "worlds": [ { "kind": "thermometer", "true_temp": 250.0, "noise_sigma": 0 } ] }"#,
        )
        .unwrap();
        assert!(matches!(
            build_provider_set(&config, 0),
            Err(WorldError::TemperatureOutOfRange(_))
        ));
    }

    #[test]
    fn unknown_kinds_are_parse_errors() {
        assert!(parse_world_config(r#"{ "worlds": [ { "kind": "barometer" } ] }"#).is_err());
    }

    #[test]
    fn listed_order_decides_routing() {
        // A broken world listed first claims `sample` before the thermometer.
        let text = r#"{ "worlds": [
            { "kind": "broken", "actions": ["sample"] },
            { "kind": "thermometer", "true_temp": 23.7, "noise_sigma": 0.0 }
        ] }"#;
        let config = parse_world_config(text).unwrap();
        let mut set = build_provider_set(&config, 0).unwrap();
        assert_eq!(
            set.perform("sample", "").unwrap(),
            crate::providers::PerformResponse::CannotPerform
        );
    }
}

//! TOML scenario files.

use std::path::Path;

use aerocast_core::sim::{
    DEFAULT_CHANNEL_RATE_BPS, DEFAULT_DURATION_S, DEFAULT_PACKET_SIZE_BITS, DEFAULT_PER_HOP_LATENCY_S,
    DEFAULT_QUEUE_CAPACITY, DEFAULT_RADIUS_M, DEFAULT_TIMESTEP_S,
};
use aerocast_core::{DroneNode, MobileSpec, Policy, Scenario};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk form of a [`Scenario`]: the same fields plus an id and a schema
/// version. Channel parameters may be omitted and take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub scenario_id: String,
    #[serde(default = "defaults::radius")]
    pub radius: f64,
    pub traffic_rate: f64,
    #[serde(default = "defaults::packet_size")]
    pub packet_size: u64,
    #[serde(default = "defaults::duration")]
    pub duration: f64,
    #[serde(default = "defaults::timestep")]
    pub timestep: f64,
    #[serde(default = "defaults::channel_rate")]
    pub channel_rate: f64,
    #[serde(default = "defaults::per_hop_latency")]
    pub per_hop_latency: f64,
    #[serde(default = "defaults::queue_capacity")]
    pub queue_capacity: usize,
    #[serde(default = "defaults::policy")]
    pub policy: Policy,
    #[serde(default)]
    pub seed: u64,
    pub drones: Vec<DroneNode>,
    #[serde(default)]
    pub mobiles: Vec<MobileSpec>,
}

mod defaults {
    use super::*;

    pub fn radius() -> f64 {
        DEFAULT_RADIUS_M
    }
    pub fn packet_size() -> u64 {
        DEFAULT_PACKET_SIZE_BITS
    }
    pub fn duration() -> f64 {
        DEFAULT_DURATION_S
    }
    pub fn timestep() -> f64 {
        DEFAULT_TIMESTEP_S
    }
    pub fn channel_rate() -> f64 {
        DEFAULT_CHANNEL_RATE_BPS
    }
    pub fn per_hop_latency() -> f64 {
        DEFAULT_PER_HOP_LATENCY_S
    }
    pub fn queue_capacity() -> usize {
        DEFAULT_QUEUE_CAPACITY
    }
    pub fn policy() -> Policy {
        Policy::Etta
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.message().to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    pub fn from_scenario(scenario_id: impl Into<String>, s: &Scenario) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario_id: scenario_id.into(),
            radius: s.radius,
            traffic_rate: s.traffic_rate,
            packet_size: s.packet_size,
            duration: s.duration,
            timestep: s.timestep,
            channel_rate: s.channel_rate,
            per_hop_latency: s.per_hop_latency,
            queue_capacity: s.queue_capacity,
            policy: s.policy,
            seed: s.seed,
            drones: s.drones.clone(),
            mobiles: s.mobiles.clone(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            drones: self.drones.clone(),
            radius: self.radius,
            traffic_rate: self.traffic_rate,
            packet_size: self.packet_size,
            duration: self.duration,
            timestep: self.timestep,
            channel_rate: self.channel_rate,
            per_hop_latency: self.per_hop_latency,
            queue_capacity: self.queue_capacity,
            mobiles: self.mobiles.clone(),
            policy: self.policy,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aerocast_core::scenarios::small_group;

    #[test]
    fn round_trip() {
        let s = small_group(Policy::NoHandover, 768_000.0);
        let file = ScenarioFile::from_scenario("small", &s);
        let back = ScenarioFile::parse(&file.to_toml()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.scenario(), s);
    }

    #[test]
    fn defaults_fill_channel_parameters() {
        let text = r#"
schema_version = 1
scenario_id = "pair"
traffic_rate = 1e6

[[drones]]
id = 0
position = [0.0, 0.0, 0.0]
is_source = true

[[drones]]
id = 1
position = [100.0, 0.0, 0.0]
"#;
        let s = ScenarioFile::parse(text).unwrap().scenario();
        assert_eq!(s.radius, DEFAULT_RADIUS_M);
        assert_eq!(s.queue_capacity, DEFAULT_QUEUE_CAPACITY);
        assert_eq!(s.policy, Policy::Etta);
        assert!(s.mobiles.is_empty());
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let base = "schema_version = 1\nscenario_id = \"x\"\ntraffic_rate = 1.0\ndrones = []\n";
        assert!(ScenarioFile::parse(base).is_ok());
        assert!(matches!(ScenarioFile::parse(&format!("{base}colour = 3\n")), Err(CliError::Parse(_))));
        let v2 = base.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(ScenarioFile::parse(&v2), Err(CliError::Parse(m)) if m.contains("schema_version")));
        let bad_drone = format!("{base}\n[[drones]]\nid = 0\nposition = [0.0, 0.0, 0.0]\nheading = 1\n")
            .replace("drones = []\n", "");
        assert!(matches!(ScenarioFile::parse(&bad_drone), Err(CliError::Parse(_))));
    }
}

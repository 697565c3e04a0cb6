use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;
use crate::lcrt::{compute_levels_with_leaves, DroneId, DroneNode};

pub const DEFAULT_RADIUS_M: f64 = 560.0;
pub const DEFAULT_CHANNEL_RATE_BPS: f64 = 54e6;
pub const DEFAULT_TIMESTEP_S: f64 = 1e-3;
pub const DEFAULT_PER_HOP_LATENCY_S: f64 = 2e-3;
pub const DEFAULT_QUEUE_CAPACITY: usize = 64;
pub const DEFAULT_DURATION_S: f64 = 200.0;
pub const DEFAULT_PACKET_SIZE_BITS: u64 = 4096;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Range at which free-space path loss consumes the whole link budget.
pub fn free_space_range(tx_power_dbm: f64, rx_threshold_dbm: f64, frequency_hz: f64) -> f64 {
    let budget_db = tx_power_dbm - rx_threshold_dbm;
    let wavelength_term_db = 20.0 * (4.0 * PI * frequency_hz / SPEED_OF_LIGHT).log10();
    10f64.powf((budget_db - wavelength_term_db) / 20.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// The mobile keeps its original parent for the whole transit and
    /// rejoins the tree at its destination.
    NoHandover,
    /// The mobile follows a planned seamless trajectory and is served by the
    /// transmitters annotated on its current leg.
    Etta,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::NoHandover => "nohandover",
            Policy::Etta => "etta",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nohandover" => Ok(Policy::NoHandover),
            "etta" => Ok(Policy::Etta),
            other => Err(format!("unknown policy '{other}' (expected nohandover or etta)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobileSpec {
    pub drone: DroneId,
    pub origin: Point3,
    pub destination: Point3,
    /// m/s
    pub speed: f64,
    /// seconds
    pub start_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub drones: Vec<DroneNode>,
    /// Transmission range, meters.
    pub radius: f64,
    /// Offered multicast load at the source, bits/s.
    pub traffic_rate: f64,
    pub packet_size: u64,
    pub duration: f64,
    pub timestep: f64,
    pub channel_rate: f64,
    pub per_hop_latency: f64,
    pub queue_capacity: usize,
    pub mobiles: Vec<MobileSpec>,
    pub policy: Policy,
    pub seed: u64,
}

impl Scenario {
    /// A scenario with default channel parameters and no mobiles.
    pub fn new(drones: Vec<DroneNode>, radius: f64, traffic_rate: f64) -> Self {
        Self {
            drones,
            radius,
            traffic_rate,
            packet_size: DEFAULT_PACKET_SIZE_BITS,
            duration: DEFAULT_DURATION_S,
            timestep: DEFAULT_TIMESTEP_S,
            channel_rate: DEFAULT_CHANNEL_RATE_BPS,
            per_hop_latency: DEFAULT_PER_HOP_LATENCY_S,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            mobiles: Vec::new(),
            policy: Policy::Etta,
            seed: 0,
        }
    }

    /// Seconds between consecutive packets at the source.
    pub fn packet_interval(&self) -> f64 {
        self.packet_size as f64 / self.traffic_rate
    }

    /// Seconds to put one packet on the air.
    pub fn transmission_time(&self) -> f64 {
        self.packet_size as f64 / self.channel_rate
    }

    pub fn mobile_ids(&self) -> BTreeSet<DroneId> {
        self.mobiles.iter().map(|m| m.drone).collect()
    }

    /// Every invariant check, in a fixed order, with a diagnostic on failure.
    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let mut check = |name: &'static str, result: Result<(), String>| out.push(Check { name, result });

        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} must be positive and finite, got {v}"))
            }
        };
        check("radius", positive(self.radius, "radius"));
        check("timestep", positive(self.timestep, "timestep"));
        check("duration", positive(self.duration, "duration"));
        check("channel_rate", positive(self.channel_rate, "channel_rate"));
        check(
            "traffic_rate",
            positive(self.traffic_rate, "traffic_rate").and_then(|_| {
                if self.traffic_rate <= self.channel_rate {
                    Ok(())
                } else {
                    Err(format!(
                        "traffic_rate {} exceeds channel_rate {}",
                        self.traffic_rate, self.channel_rate
                    ))
                }
            }),
        );
        check(
            "packet_size",
            if self.packet_size > 0 { Ok(()) } else { Err("packet_size must be positive".into()) },
        );
        check(
            "per_hop_latency",
            if self.per_hop_latency >= 0.0 && self.per_hop_latency.is_finite() {
                Ok(())
            } else {
                Err(format!("per_hop_latency must be non-negative, got {}", self.per_hop_latency))
            },
        );
        check(
            "queue_capacity",
            if self.queue_capacity > 0 { Ok(()) } else { Err("queue_capacity must be positive".into()) },
        );
        check(
            "positions",
            match self.drones.iter().find(|d| !d.position.is_finite()) {
                Some(d) => Err(format!("drone {} has a non-finite position", d.id)),
                None => Ok(()),
            },
        );
        check("mobiles", self.check_mobiles());
        check(
            "connectivity",
            compute_levels_with_leaves(&self.drones, self.radius, &self.mobile_ids())
                .map(|_| ())
                .map_err(|e| e.to_string()),
        );
        out
    }

    fn check_mobiles(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for m in &self.mobiles {
            if !seen.insert(m.drone) {
                return Err(format!("drone {} is listed as mobile twice", m.drone));
            }
            let node = self
                .drones
                .iter()
                .find(|d| d.id == m.drone)
                .ok_or_else(|| format!("mobile drone {} is not in the drone list", m.drone))?;
            if node.is_source {
                return Err(format!("the source drone {} cannot be mobile", m.drone));
            }
            if node.position != m.origin {
                return Err(format!("mobile drone {} must start at its listed position", m.drone));
            }
            if !(m.speed > 0.0 && m.speed.is_finite()) {
                return Err(format!("mobile drone {} needs a positive speed", m.drone));
            }
            if !(m.start_time >= 0.0 && m.start_time.is_finite()) {
                return Err(format!("mobile drone {} needs a non-negative start time", m.drone));
            }
            if m.origin == m.destination || !m.destination.is_finite() {
                return Err(format!("mobile drone {} needs a distinct finite destination", m.drone));
            }
        }
        Ok(())
    }

    /// First failing check, as an error message.
    pub fn validate(&self) -> Result<(), String> {
        match self.checks().into_iter().find(|c| c.result.is_err()) {
            Some(Check { name, result: Err(e) }) => Err(format!("{name}: {e}")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub result: Result<(), String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friis_range_near_default_radius() {
        // 15 dBm transmit, -80 dBm receive threshold, 2.4 GHz
        let r = free_space_range(15.0, -80.0, 2.4e9);
        assert!((r - 559.0).abs() < 0.5, "{r}");
        assert!((r - DEFAULT_RADIUS_M).abs() < 1.5);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("ETTA".parse::<Policy>(), Ok(Policy::Etta));
        assert_eq!("nohandover".parse::<Policy>(), Ok(Policy::NoHandover));
        assert!("egmp".parse::<Policy>().is_err());
    }

    #[test]
    fn checks_report_bad_fields() {
        let drones = vec![DroneNode::source(0, Point3::ORIGIN), DroneNode::new(1, Point3::new(10.0, 0.0, 0.0))];
        let mut s = Scenario::new(drones, 20.0, 1e6);
        assert!(s.validate().is_ok());
        s.timestep = 0.0;
        assert!(s.validate().unwrap_err().starts_with("timestep"));
        s.timestep = 1e-3;
        s.drones.push(DroneNode::new(9, Point3::new(500.0, 0.0, 0.0)));
        let err = s.validate().unwrap_err();
        assert!(err.starts_with("connectivity") && err.contains('9'), "{err}");
    }
}

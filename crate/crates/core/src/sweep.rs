//! Parameter sweeps over traffic load and handover policy.
//!
//! Every sweep point is an independent simulation. With the `parallel`
//! feature the points run on the rayon pool; rows always come back in sweep
//! order.

use std::fmt::Write as _;

use thiserror::Error;

use crate::sim::{run, Metrics, Policy, Scenario, SimError};

pub const CSV_HEADER: &str =
    "scenario_id,policy,traffic_rate,amd_s,amt_bps,mobile_delivery_ratio,mobile_extra_distance_m";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RangeError {
    #[error("expected lo:hi:step, got '{0}'")]
    Syntax(String),
    #[error("rate sweep needs lo <= hi and step > 0")]
    Bounds,
}

/// Inclusive arithmetic progression `lo, lo + step, ..` up to `hi`.
pub fn rate_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, RangeError> {
    if !(lo <= hi && step > 0.0 && lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(RangeError::Bounds);
    }
    // tolerate rounding in (hi - lo) / step
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

/// Parses `lo:hi:step`.
pub fn parse_rate_sweep(spec: &str) -> Result<Vec<f64>, RangeError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(RangeError::Syntax(spec.to_string()));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| RangeError::Syntax(spec.to_string()));
    rate_range(num(lo)?, num(hi)?, num(step)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub policy: Policy,
    pub traffic_rate: f64,
}

/// Policy-major ordering: all rates for the first policy, then the next.
pub fn sweep_points(policies: &[Policy], rates: &[f64]) -> Vec<SweepPoint> {
    policies
        .iter()
        .flat_map(|&policy| rates.iter().map(move |&traffic_rate| SweepPoint { policy, traffic_rate }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario_id: String,
    pub point: SweepPoint,
    pub outcome: Result<Metrics, SimError>,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let SweepPoint { policy, traffic_rate } = self.point;
        match &self.outcome {
            Ok(m) => format!(
                "{},{},{},{},{},{},{}",
                self.scenario_id,
                policy,
                traffic_rate,
                m.amd,
                m.amt,
                m.mobile_delivery_ratio,
                m.mobile_extra_distance
            ),
            Err(_) => format!("{},{},{},FAILED,FAILED,FAILED,FAILED", self.scenario_id, policy, traffic_rate),
        }
    }
}

fn run_point(base: &Scenario, point: SweepPoint) -> Result<Metrics, SimError> {
    let mut s = base.clone();
    s.policy = point.policy;
    s.traffic_rate = point.traffic_rate;
    run(&s)
}

fn collect(scenario_id: &str, points: &[SweepPoint], outcomes: Vec<Result<Metrics, SimError>>) -> Result<Vec<SweepRow>, SimError> {
    let mut rows = Vec::with_capacity(points.len());
    for (&point, outcome) in points.iter().zip(outcomes) {
        if let Err(e @ SimError::InvalidScenario(_)) = outcome {
            return Err(e);
        }
        rows.push(SweepRow { scenario_id: scenario_id.to_string(), point, outcome });
    }
    Ok(rows)
}

/// Runs every point one after another. An invalid scenario aborts the
/// sweep; planning failures become FAILED rows.
pub fn run_sweep_sequential(scenario_id: &str, base: &Scenario, points: &[SweepPoint]) -> Result<Vec<SweepRow>, SimError> {
    let outcomes = points.iter().map(|&p| run_point(base, p)).collect();
    collect(scenario_id, points, outcomes)
}

#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(scenario_id: &str, base: &Scenario, points: &[SweepPoint]) -> Result<Vec<SweepRow>, SimError> {
    use rayon::prelude::*;
    let outcomes = points.par_iter().map(|&p| run_point(base, p)).collect();
    collect(scenario_id, points, outcomes)
}

pub fn run_sweep(scenario_id: &str, base: &Scenario, points: &[SweepPoint]) -> Result<Vec<SweepRow>, SimError> {
    #[cfg(feature = "parallel")]
    {
        run_sweep_parallel(scenario_id, base, points)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_sequential(scenario_id, base, points)
    }
}

/// Header plus one LF-terminated line per row.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.csv_line());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_load_range_has_seven_points() {
        let rates = parse_rate_sweep("512000:2176000:256000").unwrap();
        assert_eq!(rates.len(), 7);
        assert_eq!(rates[0], 512_000.0);
        assert_eq!(rates[6], 2_048_000.0);
        assert_eq!(parse_rate_sweep("1000:1000:1").unwrap(), vec![1000.0]);
        assert_eq!(parse_rate_sweep("0.1:0.3:0.1").unwrap().len(), 3);
    }

    #[test]
    fn bad_ranges() {
        assert!(matches!(parse_rate_sweep("1:2"), Err(RangeError::Syntax(_))));
        assert!(matches!(parse_rate_sweep("a:2:1"), Err(RangeError::Syntax(_))));
        assert_eq!(parse_rate_sweep("5:2:1"), Err(RangeError::Bounds));
        assert_eq!(parse_rate_sweep("1:2:0"), Err(RangeError::Bounds));
    }

    #[test]
    fn policy_major_order() {
        let pts = sweep_points(&[Policy::Etta, Policy::NoHandover], &[1.0, 2.0]);
        let got: Vec<_> = pts.iter().map(|p| (p.policy, p.traffic_rate)).collect();
        assert_eq!(
            got,
            vec![(Policy::Etta, 1.0), (Policy::Etta, 2.0), (Policy::NoHandover, 1.0), (Policy::NoHandover, 2.0)]
        );
    }
}

//! Batch evaluation of attack schedules over parameter grids.

use crate::consensus::{validate_schedule, ConsensusParams};
use crate::error::Result;
use crate::parallel::{map_ordered, Execution};
use crate::quantum::MinerSpeed;
use crate::schedule::{Aggregates, AttackVariant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub speed: MinerSpeed,
    pub variant: AttackVariant,
    pub params: ConsensusParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub point: SweepPoint,
    pub epochs: usize,
    pub aggregates: Aggregates,
    /// The generated schedule passed validation under its own parameters.
    pub valid: bool,
}

/// Generates and validates the schedule for every point.
pub fn run(points: &[SweepPoint], exec: Execution) -> Vec<Result<SweepResult>> {
    map_ordered(points, exec, |point| {
        let schedule = point.variant.generate(point.speed, &point.params)?;
        let report = validate_schedule(&schedule, &point.params)?;
        Ok(SweepResult {
            point: *point,
            epochs: schedule.len(),
            aggregates: *schedule.aggregates(),
            valid: report.is_valid(),
        })
    })
}

/// Cartesian product of speeds and variants under one parameter set.
pub fn grid(speeds: &[f64], variants: &[AttackVariant], params: ConsensusParams) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::with_capacity(speeds.len() * variants.len());
    for &r in speeds {
        let speed = MinerSpeed::new(r)?;
        for &variant in variants {
            points.push(SweepPoint { speed, variant, params });
        }
    }
    Ok(points)
}

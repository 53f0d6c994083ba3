//! Back-of-envelope hardware estimate: from network hash rate and quantum
//! hardware figures to the speed ratio `r` and the wall-clock attack length.
//!
//! The estimate is optimistic. It counts one hash evaluation per Grover
//! iteration and ignores error correction, the second SHA-256 pass, multi-block
//! headers, uncomputation and the diffusion step. `overhead_factor` multiplies
//! the circuit depth for anyone who wants to account for those.

use crate::consensus::ConsensusParams;
use crate::error::{ensure_positive, Error, Result};
use crate::parallel::{map_ordered, Execution};
use crate::quantum::MinerSpeed;
use crate::schedule::AttackVariant;

pub const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareProfile {
    /// Hashes per second of the whole network.
    pub network_hashrate: f64,
    pub block_time_seconds: f64,
    /// Gate layers per hash evaluation.
    pub hash_circuit_depth: u64,
    pub quantum_clock_hz: f64,
    pub machine_count: u64,
    pub overhead_factor: f64,
}

impl Default for HardwareProfile {
    fn default() -> Self {
        HardwareProfile {
            network_hashrate: 5e20,
            block_time_seconds: 600.0,
            hash_circuit_depth: 1600,
            quantum_clock_hz: 1e10,
            machine_count: 1,
            overhead_factor: 1.0,
        }
    }
}

impl HardwareProfile {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("network hash rate", self.network_hashrate)?;
        ensure_positive("block time", self.block_time_seconds)?;
        ensure_positive("quantum clock", self.quantum_clock_hz)?;
        ensure_positive("overhead factor", self.overhead_factor)?;
        if self.hash_circuit_depth == 0 {
            return Err(Error::domain("hash circuit depth must be positive"));
        }
        if self.machine_count == 0 {
            return Err(Error::domain("machine count must be positive"));
        }
        Ok(())
    }
}

/// Chance that a single hash wins the next block.
pub fn per_hash_success_probability(profile: &HardwareProfile) -> f64 {
    1.0 / (profile.block_time_seconds * profile.network_hashrate)
}

/// Grover iterations to find one of a `p` fraction of marked items.
pub fn grover_iterations(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("success probability must be in (0, 1), got {p}")));
    }
    Ok(p.recip().sqrt())
}

/// Seconds for the quantum hardware to find one block.
pub fn quantum_block_seconds(profile: &HardwareProfile) -> f64 {
    let iterations = per_hash_success_probability(profile).recip().sqrt();
    let layers = profile.hash_circuit_depth as f64 * profile.overhead_factor * iterations;
    layers / (profile.quantum_clock_hz * (profile.machine_count as f64).sqrt())
}

pub fn speed_ratio(profile: &HardwareProfile) -> Result<MinerSpeed> {
    profile.validate()?;
    MinerSpeed::new((profile.block_time_seconds / quantum_block_seconds(profile)).min(1.0))
}

/// Wall-clock length of the attack in years.
pub fn attack_duration_estimate(r: MinerSpeed, params: &ConsensusParams, variant: &AttackVariant) -> Result<f64> {
    let schedule = variant.generate(r, params)?;
    let minutes = schedule.aggregates().total_real_time * params.epoch_time_minutes();
    Ok(minutes / (60.0 * 24.0 * DAYS_PER_YEAR))
}

/// The `1/r²` epoch-time scale shared by all variants, in years.
pub fn leading_order_years(r: MinerSpeed, params: &ConsensusParams) -> f64 {
    let epochs = r.ratio().powi(-2);
    epochs * params.epoch_time_minutes() / (60.0 * 24.0 * DAYS_PER_YEAR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub success_probability: f64,
    pub grover_iterations: f64,
    pub quantum_block_seconds: f64,
    pub speed: MinerSpeed,
    pub leading_order_years: f64,
    pub durations: Vec<(AttackVariant, Result<f64>)>,
}

/// Evaluates the profile and the duration of each variant, generating the
/// variant schedules concurrently.
pub fn evaluate(
    profile: &HardwareProfile,
    params: &ConsensusParams,
    variants: &[AttackVariant],
    exec: Execution,
) -> Result<FeasibilityReport> {
    let speed = speed_ratio(profile)?;
    let p = per_hash_success_probability(profile);
    let durations = map_ordered(variants, exec, |v| (*v, attack_duration_estimate(speed, params, v)));
    Ok(FeasibilityReport {
        success_probability: p,
        grover_iterations: p.recip().sqrt(),
        quantum_block_seconds: quantum_block_seconds(profile),
        speed,
        leading_order_years: leading_order_years(speed, params),
        durations,
    })
}

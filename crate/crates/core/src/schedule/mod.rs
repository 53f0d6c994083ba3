//! Attacker epoch schedules.
//!
//! Every schedule starts at the fork point with difficulty 1. The timestamps
//! written into epoch `i` determine the difficulty of epoch `i + 1`, so the
//! epoch before each difficulty change carries the triggering delta.
//!
//! The generators cover four shapes:
//!
//! * a single jump to `4/r²` followed by one epoch at that difficulty;
//! * the jump, a geometric reduction down to a tiny difficulty, and an easy
//!   tail that closes the gap between written timestamps and real time;
//! * the same with several epochs at the top difficulty, trading time for
//!   block subsidy;
//! * a stepped ramp up and down that stays inside a retarget clamp.

mod csv;

use crate::consensus::{validate_schedule, ConsensusParams, RELATIVE_TOLERANCE};
use crate::error::{ensure_positive, Error, Result};
use crate::quantum::{quantum_epoch_time, MinerSpeed};

pub use self::csv::{emit_schedule_csv, format_number, parse_schedule_csv, CSV_HEADER};

/// Upper bound on generated schedule length.
pub const MAX_EPOCHS: usize = 20_000_000;

/// Largest number of top-difficulty epochs tried by [`generate_revenue_target`].
pub const MAX_REVENUE_SEARCH: u32 = 5_000;

/// Constant `C` in the bound `total_real_time ≤ C / (ε r²)` for revenue-target
/// schedules. Calibrated at `r = 1/4` over ε in {0.5, 0.34, 0.2, 0.1, 0.05,
/// 0.02, 0.01}, where the largest observed value is 3.31.
pub const REVENUE_TIME_CONSTANT: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochPlan {
    /// 1-based epoch number.
    pub index: usize,
    pub difficulty: f64,
    /// Apparent duration written into this epoch's timestamps.
    pub timestamp_delta: f64,
    pub mining_time: f64,
    pub cpow: f64,
    /// Real time at which the epoch is complete.
    pub real_time: f64,
    /// Timestamp of the epoch's last block.
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub total_cpow: f64,
    pub total_real_time: f64,
    pub final_timestamp: f64,
    /// `total_real_time - final_timestamp`.
    pub lag: f64,
    /// Epochs mined per epoch-time of attack.
    pub revenue_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSchedule {
    params: ConsensusParams,
    speed: MinerSpeed,
    epochs: Vec<EpochPlan>,
    aggregates: Aggregates,
}

impl AttackSchedule {
    /// Builds a schedule from `(difficulty, timestamp_delta)` pairs, filling in
    /// mining times and running sums.
    pub fn from_steps(params: ConsensusParams, speed: MinerSpeed, steps: &[(f64, f64)]) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::domain("a schedule needs at least one epoch"));
        }
        let mut epochs = Vec::with_capacity(steps.len());
        let (mut cpow, mut real, mut ts) = (0.0, 0.0, 0.0);
        for (i, &(difficulty, timestamp_delta)) in steps.iter().enumerate() {
            ensure_positive("timestamp delta", timestamp_delta)?;
            let mining_time = quantum_epoch_time(difficulty, speed)?;
            cpow += difficulty;
            real += mining_time;
            ts += timestamp_delta;
            epochs.push(EpochPlan {
                index: i + 1,
                difficulty,
                timestamp_delta,
                mining_time,
                cpow,
                real_time: real,
                timestamp: ts,
            });
        }
        Self::from_plans(params, speed, epochs)
    }

    /// Wraps already-computed epoch rows, e.g. parsed from CSV. The rows are
    /// taken as recorded; run validation to check them.
    pub fn from_plans(params: ConsensusParams, speed: MinerSpeed, epochs: Vec<EpochPlan>) -> Result<Self> {
        let aggregates = metrics_of(&epochs)?;
        Ok(AttackSchedule {
            params,
            speed,
            epochs,
            aggregates,
        })
    }

    pub fn params(&self) -> &ConsensusParams {
        &self.params
    }

    pub fn speed(&self) -> MinerSpeed {
        self.speed
    }

    pub fn epochs(&self) -> &[EpochPlan] {
        &self.epochs
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn aggregates(&self) -> &Aggregates {
        &self.aggregates
    }

    pub fn peak_difficulty(&self) -> f64 {
        self.epochs.iter().map(|e| e.difficulty).fold(0.0, f64::max)
    }

    pub fn bottom_difficulty(&self) -> f64 {
        self.epochs.iter().map(|e| e.difficulty).fold(f64::INFINITY, f64::min)
    }

    /// Number of epochs mined at the peak difficulty.
    pub fn peak_epochs(&self) -> usize {
        let peak = self.peak_difficulty();
        self.epochs
            .iter()
            .filter(|e| (e.difficulty - peak).abs() <= RELATIVE_TOLERANCE * peak)
            .count()
    }
}

fn metrics_of(epochs: &[EpochPlan]) -> Result<Aggregates> {
    if epochs.is_empty() {
        return Err(Error::domain("schedule has no epochs"));
    }
    let total_cpow = epochs.iter().map(|e| e.difficulty).sum();
    let total_real_time: f64 = epochs.iter().map(|e| e.mining_time).sum();
    let final_timestamp: f64 = epochs.iter().map(|e| e.timestamp_delta).sum();
    Ok(Aggregates {
        total_cpow,
        total_real_time,
        final_timestamp,
        lag: total_real_time - final_timestamp,
        revenue_fraction: epochs.len() as f64 / total_real_time,
    })
}

/// Recomputes the aggregates from the epoch list.
pub fn schedule_metrics(schedule: &AttackSchedule) -> Result<Aggregates> {
    metrics_of(&schedule.epochs)
}

/// Shape of a multi-phase attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantConfig {
    /// Defaults to `4/r²` with a single jump, `16/r²` with a stepped ramp.
    pub top_difficulty: Option<f64>,
    pub n_top_epochs: u32,
    /// Per-epoch difficulty decrease while descending.
    pub reduction_factor: f64,
    /// Per-epoch increase while ramping up; `None` jumps in one epoch.
    pub increase_factor: Option<f64>,
    /// Defaults to `r⁶`.
    pub bottom_difficulty: Option<f64>,
    /// The easy tail stops once the lag is at most this many epoch-times.
    pub lag_threshold: f64,
}

impl Default for VariantConfig {
    fn default() -> Self {
        VariantConfig {
            top_difficulty: None,
            n_top_epochs: 1,
            reduction_factor: 8.0,
            increase_factor: None,
            bottom_difficulty: None,
            lag_threshold: 1.0,
        }
    }
}

/// Parameters of the stepped, clamp-compatible attack. Step counts left as
/// `None` are derived from the sizing speed: the peak is the first power of
/// the step at or above `16/r²` and the descent takes enough steps to reach
/// `4r⁶` (8 up and 18 down at `r = 1/4` with step 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variant4Config {
    pub step_factor: f64,
    pub n_top: u32,
    pub n_up_steps: Option<u32>,
    pub n_down_steps: Option<u32>,
    pub lag_threshold: f64,
}

impl Default for Variant4Config {
    fn default() -> Self {
        Variant4Config {
            step_factor: 2.0,
            n_top: 3,
            n_up_steps: None,
            n_down_steps: None,
            lag_threshold: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackVariant {
    Variant1,
    Variant2,
    Variant3 { n_top: u32 },
    Variant4(Variant4Config),
    RevenueTarget { epsilon: f64 },
}

impl AttackVariant {
    pub fn generate(&self, speed: MinerSpeed, params: &ConsensusParams) -> Result<AttackSchedule> {
        match *self {
            AttackVariant::Variant1 => generate_variant1(speed, params),
            AttackVariant::Variant2 => generate_variant2(speed, params),
            AttackVariant::Variant3 { n_top } => generate_variant3(speed, params, n_top),
            AttackVariant::Variant4(cfg) => generate_variant4(speed, params, &cfg),
            AttackVariant::RevenueTarget { epsilon } => generate_revenue_target(speed, params, epsilon),
        }
    }

    pub fn label(&self) -> String {
        match self {
            AttackVariant::Variant1 => "variant 1".into(),
            AttackVariant::Variant2 => "variant 2".into(),
            AttackVariant::Variant3 { n_top } => format!("variant 3 (n_top={n_top})"),
            AttackVariant::Variant4(cfg) => format!("variant 4 (step={})", cfg.step_factor),
            AttackVariant::RevenueTarget { epsilon } => format!("revenue target (epsilon={epsilon})"),
        }
    }
}

/// Rejects schedules that the retarget rule of `params` would not produce.
fn checked(schedule: AttackSchedule, params: &ConsensusParams) -> Result<AttackSchedule> {
    let report = validate_schedule(&schedule, params)?;
    match report.violations.first() {
        None => Ok(schedule),
        Some(v) => Err(Error::Incompatible(match params.clamp_factor() {
            Some(c) => format!("clamp factor {c} rejects the schedule ({v})"),
            None => v.to_string(),
        })),
    }
}

/// Jump the difficulty to `4/r²` with one epoch of compressed timestamps,
/// then mine one epoch at that difficulty with on-pace timestamps.
pub fn generate_variant1(speed: MinerSpeed, params: &ConsensusParams) -> Result<AttackSchedule> {
    let r = speed.ratio();
    let top = 4.0 / (r * r);
    let schedule = AttackSchedule::from_steps(*params, speed, &[(1.0, top.recip()), (top, 1.0)])?;
    checked(schedule, params)
}

/// Jump, descend by factors of 8 to `r⁶`, then mine easy epochs until the
/// written timestamps catch up with real time.
pub fn generate_variant2(speed: MinerSpeed, params: &ConsensusParams) -> Result<AttackSchedule> {
    generate_with(speed, params, &VariantConfig::default())
}

/// As [`generate_variant2`] with `n_top` epochs at the top difficulty.
pub fn generate_variant3(speed: MinerSpeed, params: &ConsensusParams, n_top: u32) -> Result<AttackSchedule> {
    generate_with(
        speed,
        params,
        &VariantConfig {
            n_top_epochs: n_top,
            ..VariantConfig::default()
        },
    )
}

/// Smallest [`generate_variant3`] schedule whose revenue fraction reaches
/// `1 - epsilon`.
pub fn generate_revenue_target(speed: MinerSpeed, params: &ConsensusParams, epsilon: f64) -> Result<AttackSchedule> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must be in (0, 1), got {epsilon}")));
    }
    for n_top in 1..=MAX_REVENUE_SEARCH {
        let cfg = VariantConfig {
            n_top_epochs: n_top,
            ..VariantConfig::default()
        };
        let candidate = plan(speed, &cfg)?;
        if candidate.revenue_fraction(speed)? >= 1.0 - epsilon {
            return candidate.materialize(speed, params);
        }
    }
    Err(Error::Capacity(format!(
        "no schedule with at most {MAX_REVENUE_SEARCH} top epochs reaches revenue {}",
        1.0 - epsilon
    )))
}

/// Ramp up and down by `step_factor` per epoch so every retarget stays inside
/// the clamp.
pub fn generate_variant4(speed: MinerSpeed, params: &ConsensusParams, cfg: &Variant4Config) -> Result<AttackSchedule> {
    let step = cfg.step_factor;
    if !(step.is_finite() && step > 1.0) {
        return Err(Error::domain(format!("step factor must be greater than 1, got {step}")));
    }
    if let Some(c) = params.clamp_factor() {
        if step > c {
            return Err(Error::Incompatible(format!(
                "step factor {step} exceeds clamp factor {c}"
            )));
        }
    }
    let sizing = speed.sizing().ratio();
    let n_up = match cfg.n_up_steps {
        Some(n) => n,
        None => steps_to_cover(16.0 / (sizing * sizing), step),
    };
    if n_up == 0 {
        return Err(Error::domain("stepped attack needs at least one ramp-up step"));
    }
    let peak = step.powi(n_up as i32);
    let n_down = match cfg.n_down_steps {
        Some(n) => n,
        None => steps_to_cover(peak / (4.0 * sizing.powi(6)), step),
    };
    let bottom = peak / step.powi(n_down as i32);
    generate_with(
        speed,
        params,
        &VariantConfig {
            top_difficulty: Some(peak),
            n_top_epochs: cfg.n_top,
            reduction_factor: step,
            increase_factor: Some(step),
            bottom_difficulty: Some(bottom),
            lag_threshold: cfg.lag_threshold,
        },
    )
}

/// Smallest `n` with `factor^n ≥ ratio`.
fn steps_to_cover(ratio: f64, factor: f64) -> u32 {
    let n = (ratio.ln() / factor.ln() - 1e-9).ceil();
    n.max(0.0) as u32
}

/// General multi-phase generator behind variants 2, 3, 4 and the revenue
/// target.
pub fn generate_with(speed: MinerSpeed, params: &ConsensusParams, cfg: &VariantConfig) -> Result<AttackSchedule> {
    plan(speed, cfg)?.materialize(speed, params)
}

/// Run-length form of a schedule: `(difficulty, timestamp_delta, count)`.
#[derive(Debug, Clone, PartialEq)]
struct Plan {
    runs: Vec<(f64, f64, usize)>,
}

impl Plan {
    fn epochs(&self) -> usize {
        self.runs.iter().map(|r| r.2).sum()
    }

    fn revenue_fraction(&self, speed: MinerSpeed) -> Result<f64> {
        let mut real = 0.0;
        for &(d, _, count) in &self.runs {
            real += quantum_epoch_time(d, speed)? * count as f64;
        }
        Ok(self.epochs() as f64 / real)
    }

    fn materialize(&self, speed: MinerSpeed, params: &ConsensusParams) -> Result<AttackSchedule> {
        let steps: Vec<(f64, f64)> = self
            .runs
            .iter()
            .flat_map(|&(d, delta, count)| std::iter::repeat_n((d, delta), count))
            .collect();
        let schedule = AttackSchedule::from_steps(*params, speed, &steps)?;
        checked(schedule, params)
    }
}

fn plan(speed: MinerSpeed, cfg: &VariantConfig) -> Result<Plan> {
    let sizing = speed.sizing().ratio();
    let top = cfg.top_difficulty.unwrap_or_else(|| match cfg.increase_factor {
        None => 4.0 / (sizing * sizing),
        Some(_) => 16.0 / (sizing * sizing),
    });
    let bottom = cfg.bottom_difficulty.unwrap_or_else(|| sizing.powi(6));
    ensure_positive("top difficulty", top)?;
    ensure_positive("bottom difficulty", bottom)?;
    if !(bottom < 1.0 && 1.0 < top) {
        return Err(Error::domain(format!(
            "need bottom < 1 < top difficulty, got bottom {bottom} and top {top}"
        )));
    }
    if cfg.n_top_epochs == 0 {
        return Err(Error::domain("at least one epoch at the top difficulty is required"));
    }
    if !(cfg.reduction_factor.is_finite() && cfg.reduction_factor > 1.0) {
        return Err(Error::domain(format!(
            "reduction factor must be greater than 1, got {}",
            cfg.reduction_factor
        )));
    }
    if !(cfg.lag_threshold >= 0.0 && cfg.lag_threshold.is_finite()) {
        return Err(Error::domain(format!(
            "lag threshold must be nonnegative, got {}",
            cfg.lag_threshold
        )));
    }

    let mut runs: Vec<(f64, f64, usize)> = Vec::new();

    // Phase 1: push the difficulty up to `top`.
    match cfg.increase_factor {
        None => runs.push((1.0, top.recip(), 1)),
        Some(f) => {
            if !(f.is_finite() && f > 1.0) {
                return Err(Error::domain(format!("increase factor must be greater than 1, got {f}")));
            }
            let mut d = 1.0;
            while d * f < top * (1.0 - RELATIVE_TOLERANCE) {
                runs.push((d, f.recip(), 1));
                d *= f;
            }
            runs.push((d, d / top, 1));
        }
    }

    // Phase 2: mine at the top, then walk down to `bottom`. The last epoch at
    // each level carries the delta that triggers the next level, and the last
    // step lands exactly on `bottom`.
    let n_top = cfg.n_top_epochs as usize;
    if n_top > 1 {
        runs.push((top, 1.0, n_top - 1));
    }
    runs.push((top, 1.0, 1));
    let n_down = steps_to_cover(top / bottom, cfg.reduction_factor);
    let mut d = top;
    for k in 0..n_down {
        let next = if k + 1 == n_down { bottom } else { d / cfg.reduction_factor };
        if let Some(last) = runs.last_mut() {
            last.1 = d / next;
        }
        runs.push((next, 1.0, 1));
        d = next;
    }

    // Phase 3: easy epochs with on-pace timestamps shrink the lag.
    let mut lag = 0.0;
    for &(d, delta, count) in &runs {
        lag += (quantum_epoch_time(d, speed)? - delta) * count as f64;
    }
    if lag > cfg.lag_threshold {
        let gain = 1.0 - quantum_epoch_time(bottom, speed)?;
        if gain <= 0.0 {
            return Err(Error::Incompatible(format!(
                "epochs at difficulty {bottom} take at least an epoch-time, so the lag never closes"
            )));
        }
        let tail = ((lag - cfg.lag_threshold) / gain - 1e-9).ceil();
        let total = tail + runs.iter().map(|r| r.2 as f64).sum::<f64>();
        if total > MAX_EPOCHS as f64 {
            return Err(Error::Capacity(format!(
                "closing a lag of {lag} epoch-times needs {tail} easy epochs"
            )));
        }
        runs.push((bottom, 1.0, tail as usize));
    }
    Ok(Plan { runs })
}

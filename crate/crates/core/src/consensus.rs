//! Idealized difficulty-adjusted proof-of-work chain.
//!
//! Time is measured in epoch-times and an epoch is atomic: each epoch carries
//! one difficulty and one timestamp (that of its last block). The retarget
//! uses the full apparent duration of the epoch. Median-time-past and the
//! 2015-interval off-by-one of Bitcoin are not modeled.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{ensure_positive, Error, Result};
use crate::quantum::quantum_epoch_time;
use crate::schedule::AttackSchedule;

/// Relative tolerance for comparing difficulties and times.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusParams {
    epoch_length: u64,
    target_block_time: f64,
    clamp_factor: Option<f64>,
}

impl ConsensusParams {
    pub fn new(epoch_length: u64, target_block_time: f64, clamp_factor: Option<f64>) -> Result<Self> {
        if epoch_length == 0 {
            return Err(Error::domain("epoch length must be at least one block"));
        }
        ensure_positive("target block time", target_block_time)?;
        if let Some(c) = clamp_factor {
            if !(c.is_finite() && c > 1.0) {
                return Err(Error::domain(format!("clamp factor must be greater than 1, got {c}")));
            }
        }
        Ok(ConsensusParams {
            epoch_length,
            target_block_time,
            clamp_factor,
        })
    }

    /// 2016 blocks of 10 minutes, unclamped.
    pub fn bitcoin_unclamped() -> Self {
        ConsensusParams {
            epoch_length: 2016,
            target_block_time: 10.0,
            clamp_factor: None,
        }
    }

    /// 2016 blocks of 10 minutes with Bitcoin's ×4 retarget limit.
    pub fn bitcoin() -> Self {
        ConsensusParams {
            clamp_factor: Some(4.0),
            ..Self::bitcoin_unclamped()
        }
    }

    pub fn with_clamp(self, clamp_factor: Option<f64>) -> Result<Self> {
        Self::new(self.epoch_length, self.target_block_time, clamp_factor)
    }

    pub fn epoch_length(&self) -> u64 {
        self.epoch_length
    }

    /// Minutes per block.
    pub fn target_block_time(&self) -> f64 {
        self.target_block_time
    }

    pub fn clamp_factor(&self) -> Option<f64> {
        self.clamp_factor
    }

    /// Length of one epoch-time in minutes.
    pub fn epoch_time_minutes(&self) -> f64 {
        self.epoch_length as f64 * self.target_block_time
    }
}

impl Default for ConsensusParams {
    fn default() -> Self {
        Self::bitcoin_unclamped()
    }
}

/// Difficulty of the next epoch given the previous difficulty and the
/// observed duration of the epoch in epoch-times.
pub fn adjust_difficulty(d_old: f64, observed_epoch_duration: f64, params: &ConsensusParams) -> Result<f64> {
    ensure_positive("difficulty", d_old)?;
    ensure_positive("observed epoch duration", observed_epoch_duration)?;
    let mut ratio = observed_epoch_duration.recip();
    if let Some(c) = params.clamp_factor {
        ratio = ratio.clamp(c.recip(), c);
    }
    Ok(d_old * ratio)
}

/// One epoch of a chain as seen by fork choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEpoch {
    pub difficulty: f64,
    /// Epoch-times since the fork point.
    pub end_timestamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    epochs: Vec<ChainEpoch>,
    block_count: u64,
}

impl ChainSummary {
    /// Builds a chain of full epochs of `epoch_length` blocks each.
    pub fn new(epochs: Vec<ChainEpoch>, epoch_length: u64) -> Result<Self> {
        let block_count = epochs.len() as u64 * epoch_length;
        Self::with_block_count(epochs, block_count)
    }

    pub fn with_block_count(epochs: Vec<ChainEpoch>, block_count: u64) -> Result<Self> {
        for (i, e) in epochs.iter().enumerate() {
            ensure_positive("chain difficulty", e.difficulty)?;
            if !e.end_timestamp.is_finite() {
                return Err(Error::domain(format!("epoch {} has a non-finite timestamp", i + 1)));
            }
        }
        if let Some(i) = epochs.windows(2).position(|w| w[1].end_timestamp <= w[0].end_timestamp) {
            return Err(Error::domain(format!(
                "chain timestamps must strictly increase (epoch {} to {})",
                i + 1,
                i + 2
            )));
        }
        Ok(ChainSummary { epochs, block_count })
    }

    pub fn from_schedule(schedule: &AttackSchedule) -> Result<Self> {
        let epochs = schedule
            .epochs()
            .iter()
            .map(|e| ChainEpoch {
                difficulty: e.difficulty,
                end_timestamp: e.timestamp,
            })
            .collect();
        Self::new(epochs, schedule.params().epoch_length())
    }

    pub fn epochs(&self) -> &[ChainEpoch] {
        &self.epochs
    }

    pub fn block_count(&self) -> u64 {
        self.block_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForkChoiceRule {
    /// Most accumulated proof-of-work wins (Bitcoin).
    CumulativeWork,
    /// Most blocks wins, ignoring difficulty.
    LongestChain,
}

impl fmt::Display for ForkChoiceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForkChoiceRule::CumulativeWork => f.write_str("CumulativeWork"),
            ForkChoiceRule::LongestChain => f.write_str("LongestChain"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForkWinner {
    A,
    B,
    Tie,
}

impl ForkWinner {
    pub fn swapped(self) -> Self {
        match self {
            ForkWinner::A => ForkWinner::B,
            ForkWinner::B => ForkWinner::A,
            ForkWinner::Tie => ForkWinner::Tie,
        }
    }
}

/// Accumulated work in epochs-worth of the original difficulty.
pub fn cumulative_work(chain: &ChainSummary) -> f64 {
    chain.epochs.iter().map(|e| e.difficulty).sum()
}

pub fn fork_choice(a: &ChainSummary, b: &ChainSummary, rule: ForkChoiceRule) -> ForkWinner {
    let ord = match rule {
        ForkChoiceRule::CumulativeWork => cumulative_work(a)
            .partial_cmp(&cumulative_work(b))
            .unwrap_or(Ordering::Equal),
        ForkChoiceRule::LongestChain => a.block_count.cmp(&b.block_count),
    };
    match ord {
        Ordering::Greater => ForkWinner::A,
        Ordering::Less => ForkWinner::B,
        Ordering::Equal => ForkWinner::Tie,
    }
}

/// How strictly [`validate_schedule_with`] compares recorded values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationTolerance {
    pub relative: f64,
    /// Significant digits the values were rendered with, if they went through
    /// a lossy text form. Each value is then allowed half a unit in its last
    /// place, and timestamp deltas inherit the slack of both endpoints.
    pub rendered_digits: Option<u32>,
}

impl ValidationTolerance {
    pub const EXACT: ValidationTolerance = ValidationTolerance {
        relative: RELATIVE_TOLERANCE,
        rendered_digits: None,
    };

    pub fn rendered(digits: u32) -> Self {
        ValidationTolerance {
            // five half-ulps: two difficulties, the time, and an inferred speed
            relative: 2.5 * 10f64.powi(1 - digits as i32),
            rendered_digits: Some(digits),
        }
    }

    fn slack(&self, v: f64) -> f64 {
        match self.rendered_digits {
            Some(digits) if v != 0.0 => {
                let exp = v.abs().log10().floor() as i32;
                0.5 * 10f64.powi(exp - (digits as i32 - 1))
            }
            _ => 0.0,
        }
    }
}

impl Default for ValidationTolerance {
    fn default() -> Self {
        Self::EXACT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    InitialDifficulty { found: f64 },
    /// `from` is the 1-based epoch whose timestamps triggered the retarget.
    DifficultyTransition { from: usize, previous: f64, expected: f64, found: f64 },
    NonIncreasingTimestamp { epoch: usize },
    MiningTime { epoch: usize, expected: f64, found: f64 },
    PrefixSum { epoch: usize, column: &'static str, expected: f64, found: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InitialDifficulty { found } => {
                write!(f, "epoch 1: difficulty {found} but the fork starts from difficulty 1")
            }
            Violation::DifficultyTransition {
                from,
                previous,
                expected,
                found,
            } => write!(
                f,
                "transition {} -> {}: difficulty {previous} -> {found}, retarget gives {expected}",
                from,
                from + 1
            ),
            Violation::NonIncreasingTimestamp { epoch } => {
                write!(f, "epoch {epoch}: timestamp does not increase")
            }
            Violation::MiningTime { epoch, expected, found } => {
                write!(f, "epoch {epoch}: mining time {found}, quantum model gives {expected}")
            }
            Violation::PrefixSum {
                epoch,
                column,
                expected,
                found,
            } => write!(f, "epoch {epoch}: {column} is {found}, running sum gives {expected}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The written timestamp is ahead of the real time the epoch was mined.
    FutureTimestamp { epoch: usize, timestamp: f64, real_time: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::FutureTimestamp {
                epoch,
                timestamp,
                real_time,
            } => write!(
                f,
                "epoch {epoch}: timestamp {timestamp} is ahead of real time {real_time}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            f.write_str("valid")?;
        } else {
            write!(f, "{} violation(s)", self.violations.len())?;
        }
        for v in &self.violations {
            write!(f, "; {v}")?;
        }
        for w in &self.warnings {
            write!(f, "; warning: {w}")?;
        }
        Ok(())
    }
}

/// Checks that a schedule is consistent with the retarget rule of `params`
/// and with the quantum timing model at the schedule's own speed.
pub fn validate_schedule(schedule: &AttackSchedule, params: &ConsensusParams) -> Result<ValidationReport> {
    validate_schedule_with(schedule, params, &ValidationTolerance::EXACT)
}

pub fn validate_schedule_with(
    schedule: &AttackSchedule,
    params: &ConsensusParams,
    tol: &ValidationTolerance,
) -> Result<ValidationReport> {
    let epochs = schedule.epochs();
    if epochs.is_empty() {
        return Err(Error::domain("cannot validate an empty schedule"));
    }
    let rel = tol.relative;
    let close = |expected: f64, found: f64, extra: f64| {
        (found - expected).abs() <= rel * expected.abs().max(found.abs()) + extra
    };
    let mut report = ValidationReport::default();

    if !close(1.0, epochs[0].difficulty, tol.slack(epochs[0].difficulty)) {
        report.violations.push(Violation::InitialDifficulty {
            found: epochs[0].difficulty,
        });
    }

    let (mut cpow, mut real, mut ts) = (0.0, 0.0, 0.0);
    let (mut prev_cpow, mut prev_real, mut prev_ts) = (0.0, 0.0, 0.0);
    for (i, e) in epochs.iter().enumerate() {
        let n = i + 1;
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN counts as non-increasing
        if !(e.timestamp_delta > 0.0) {
            report.violations.push(Violation::NonIncreasingTimestamp { epoch: n });
        }

        let expected = quantum_epoch_time(e.difficulty, schedule.speed())?;
        let extra = tol.slack(e.mining_time) + 0.5 * expected * tol.slack(e.difficulty) / e.difficulty;
        if !close(expected, e.mining_time, extra) {
            report.violations.push(Violation::MiningTime {
                epoch: n,
                expected,
                found: e.mining_time,
            });
        }

        cpow += e.difficulty;
        real += e.mining_time;
        ts += e.timestamp_delta;
        for (column, expected, found, slack) in [
            ("CPoW", cpow, e.cpow, tol.slack(prev_cpow) + tol.slack(e.difficulty)),
            ("realTimeWhenCreated", real, e.real_time, tol.slack(prev_real) + tol.slack(e.mining_time)),
            ("timestamp", ts, e.timestamp, tol.slack(prev_ts)),
        ] {
            if !close(expected, found, slack + tol.slack(found)) {
                report.violations.push(Violation::PrefixSum {
                    epoch: n,
                    column,
                    expected,
                    found,
                });
            }
        }
        // Re-anchor on recorded values so one bad row reports once.
        cpow = e.cpow;
        real = e.real_time;
        ts = e.timestamp;

        if e.timestamp > e.real_time + tol.slack(e.timestamp) + tol.slack(e.real_time) {
            report.warnings.push(Warning::FutureTimestamp {
                epoch: n,
                timestamp: e.timestamp,
                real_time: e.real_time,
            });
        }

        if let Some(next) = epochs.get(i + 1) {
            if e.timestamp_delta > 0.0 {
                let s = tol.slack(e.timestamp) + tol.slack(prev_ts);
                let expected = adjust_difficulty(e.difficulty, e.timestamp_delta, params)?;
                let lo = adjust_difficulty(e.difficulty, e.timestamp_delta + s, params)?;
                let hi = adjust_difficulty(e.difficulty, (e.timestamp_delta - s).max(f64::MIN_POSITIVE), params)?;
                let found = next.difficulty;
                if found < lo * (1.0 - rel) || found > hi * (1.0 + rel) {
                    report.violations.push(Violation::DifficultyTransition {
                        from: n,
                        previous: e.difficulty,
                        expected,
                        found,
                    });
                }
            }
        }
        prev_cpow = e.cpow;
        prev_real = e.real_time;
        prev_ts = e.timestamp;
    }
    Ok(report)
}

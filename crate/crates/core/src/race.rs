//! Racing an attack schedule against the honest network.
//!
//! The honest network is held at difficulty 1 by its own retargeting, so it
//! produces one epoch-worth of work per epoch-time in expectation. A fraction
//! of that work may be lost to stale blocks; the attacker mines privately and
//! loses nothing.
//!
//! Monte Carlo trials draw the honest block count from a Poisson distribution.
//! Each trial owns a ChaCha8 stream selected by its index under the run seed,
//! so results are identical whether trials run sequentially or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::consensus::{
    cumulative_work, fork_choice, validate_schedule_with, ChainEpoch, ChainSummary, ConsensusParams, ForkChoiceRule,
    ForkWinner, ValidationTolerance,
};
use crate::error::{Error, Result};
use crate::parallel::{count_matching, Execution};
use crate::schedule::AttackSchedule;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HonestMode {
    Deterministic,
    PoissonMc { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HonestModel {
    pub mode: HonestMode,
    /// Fraction of honest work that ends up on the main chain.
    pub efficiency: f64,
}

impl HonestModel {
    pub fn deterministic() -> Self {
        HonestModel {
            mode: HonestMode::Deterministic,
            efficiency: 1.0,
        }
    }

    pub fn poisson_mc(trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::domain("Monte Carlo needs at least one trial"));
        }
        Ok(HonestModel {
            mode: HonestMode::PoissonMc { trials, seed },
            efficiency: 1.0,
        })
    }

    pub fn with_efficiency(self, efficiency: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::domain(format!("efficiency must be in (0, 1], got {efficiency}")));
        }
        Ok(HonestModel { efficiency, ..self })
    }
}

impl Default for HonestModel {
    fn default() -> Self {
        Self::deterministic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceOutcome {
    pub attacker_cpow: f64,
    pub honest_cpow_expected: f64,
    pub win_probability: f64,
    /// `attacker_cpow - honest_cpow_expected`.
    pub margin: f64,
    /// Wilson 95% interval for Monte Carlo estimates.
    pub confidence_interval: Option<(f64, f64)>,
    pub trials: Option<u64>,
}

impl RaceOutcome {
    pub fn standard_error(&self) -> Option<f64> {
        let n = self.trials? as f64;
        let p = self.win_probability;
        Some((p * (1.0 - p) / n).sqrt())
    }
}

/// Expected honest work, in epochs-worth, after `t` epoch-times.
pub fn expected_honest_cpow(t: f64, model: &HonestModel) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("elapsed time must be nonnegative, got {t}")));
    }
    Ok(model.efficiency * t)
}

pub fn race_win_probability(
    schedule: &AttackSchedule,
    model: &HonestModel,
    params: &ConsensusParams,
) -> Result<RaceOutcome> {
    race_win_probability_with(schedule, model, params, Execution::default())
}

pub fn race_win_probability_with(
    schedule: &AttackSchedule,
    model: &HonestModel,
    params: &ConsensusParams,
    exec: Execution,
) -> Result<RaceOutcome> {
    race_win_probability_within(schedule, model, params, &ValidationTolerance::EXACT, exec)
}

/// Like [`race_win_probability_with`], validating the schedule at `tolerance`.
/// Schedules read back from a table need [`ValidationTolerance::rendered`].
pub fn race_win_probability_within(
    schedule: &AttackSchedule,
    model: &HonestModel,
    params: &ConsensusParams,
    tolerance: &ValidationTolerance,
    exec: Execution,
) -> Result<RaceOutcome> {
    let report = validate_schedule_with(schedule, params, tolerance)?;
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let agg = schedule.aggregates();
    let attacker_cpow = agg.total_cpow;
    let honest = expected_honest_cpow(agg.total_real_time, model)?;
    let margin = attacker_cpow - honest;

    let outcome = match model.mode {
        HonestMode::Deterministic => RaceOutcome {
            attacker_cpow,
            honest_cpow_expected: honest,
            win_probability: if margin > 0.0 {
                1.0
            } else if margin < 0.0 {
                0.0
            } else {
                0.5
            },
            margin,
            confidence_interval: None,
            trials: None,
        },
        HonestMode::PoissonMc { trials, seed } => {
            let blocks_per_epoch = params.epoch_length() as f64;
            let wins = poisson_wins(
                honest * blocks_per_epoch,
                attacker_cpow,
                blocks_per_epoch,
                trials,
                seed,
                exec,
            )?;
            let p = wins as f64 / trials as f64;
            RaceOutcome {
                attacker_cpow,
                honest_cpow_expected: honest,
                win_probability: p,
                margin,
                confidence_interval: Some(wilson_interval(wins, trials)),
                trials: Some(trials),
            }
        }
    };
    Ok(outcome)
}

/// Number of trials in which the honest chain ends with less work than
/// `attacker_cpow`, the honest block count being Poisson with mean
/// `mean_blocks`.
pub fn poisson_wins(
    mean_blocks: f64,
    attacker_cpow: f64,
    blocks_per_epoch: f64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<u64> {
    if mean_blocks == 0.0 {
        // no honest blocks at all
        return Ok(if attacker_cpow > 0.0 { trials } else { 0 });
    }
    let dist = Poisson::new(mean_blocks)
        .map_err(|e| Error::domain(format!("honest block rate {mean_blocks}: {e}")))?;
    Ok(count_matching(trials, exec, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let blocks: f64 = dist.sample(&mut rng);
        attacker_cpow > blocks / blocks_per_epoch
    }))
}

fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z_95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainSide {
    Honest,
    Attacker,
    Tie,
}

/// A small miner beating the longest-chain rule while losing under
/// cumulative work.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub honest: ChainSummary,
    pub attacker: ChainSummary,
    pub longest_chain: ChainSide,
    pub cumulative_work: ChainSide,
}

impl Counterexample {
    pub fn winner(&self, rule: ForkChoiceRule) -> ChainSide {
        match rule {
            ForkChoiceRule::LongestChain => self.longest_chain,
            ForkChoiceRule::CumulativeWork => self.cumulative_work,
        }
    }

    pub fn honest_cpow(&self) -> f64 {
        cumulative_work(&self.honest)
    }

    pub fn attacker_cpow(&self) -> f64 {
        cumulative_work(&self.attacker)
    }
}

/// Both chains share a first epoch at difficulty 1. The honest network then
/// retargets to `hard_difficulty` and mines `n` epochs, one per epoch-time.
/// The attacker, holding `attacker_power` of the honest hash power, keeps
/// difficulty 1 and mines `attacker_power × hard_difficulty` epochs per
/// epoch-time over the same `n` epoch-times, keeping whole epochs only.
pub fn counterexample_longest_chain(
    n: u64,
    attacker_power: f64,
    hard_difficulty: f64,
    params: &ConsensusParams,
) -> Result<Counterexample> {
    if n == 0 {
        return Err(Error::domain("the honest chain needs at least one hard epoch"));
    }
    if !(attacker_power > 0.0 && attacker_power < 1.0) {
        return Err(Error::domain(format!("attacker power must be in (0, 1), got {attacker_power}")));
    }
    if !(hard_difficulty.is_finite() && hard_difficulty > 0.0) {
        return Err(Error::domain(format!("hard difficulty must be positive, got {hard_difficulty}")));
    }
    let rate = attacker_power * hard_difficulty;
    if rate <= 1.0 {
        return Err(Error::domain(format!(
            "attacker mines {rate} difficulty-1 epochs per epoch-time; it must exceed the honest rate of 1"
        )));
    }
    let attacker_epochs = (rate * n as f64).floor() as u64;
    if attacker_epochs <= n {
        return Err(Error::domain(format!(
            "attacker completes only {attacker_epochs} whole epochs in {n} epoch-times, not more than the honest {n}"
        )));
    }

    let genesis = ChainEpoch {
        difficulty: 1.0,
        end_timestamp: 1.0,
    };
    let honest_epochs = std::iter::once(genesis)
        .chain((1..=n).map(|i| ChainEpoch {
            difficulty: hard_difficulty,
            end_timestamp: 1.0 + i as f64,
        }))
        .collect();
    let attacker_epochs = std::iter::once(genesis)
        .chain((1..=attacker_epochs).map(|j| ChainEpoch {
            difficulty: 1.0,
            end_timestamp: 1.0 + j as f64 / rate,
        }))
        .collect();
    let honest = ChainSummary::new(honest_epochs, params.epoch_length())?;
    let attacker = ChainSummary::new(attacker_epochs, params.epoch_length())?;

    let side = |rule| match fork_choice(&attacker, &honest, rule) {
        ForkWinner::A => ChainSide::Attacker,
        ForkWinner::B => ChainSide::Honest,
        ForkWinner::Tie => ChainSide::Tie,
    };
    Ok(Counterexample {
        longest_chain: side(ForkChoiceRule::LongestChain),
        cumulative_work: side(ForkChoiceRule::CumulativeWork),
        honest,
        attacker,
    })
}

//! Simulator for the difficulty-increase attack a Grover-accelerated miner can
//! mount on difficulty-adjusted proof-of-work.
//!
//! A quantum miner needs only `√d` times longer to mine at difficulty `d`,
//! while cumulative work grows linearly in `d`. By faking timestamps to raise
//! its private chain's difficulty, a miner with a fraction `r` of the honest
//! network's speed accumulates more work than the honest chain in `O(1/r²)`
//! epoch-times.
//!
//! Modules:
//!
//! * [`consensus`]: retarget rule, cumulative work, fork choice, validation.
//! * [`quantum`]: Grover-scaled mining times.
//! * [`schedule`]: attack schedule generators and their table format.
//! * [`race`]: attacker versus honest network, deterministic or Monte Carlo.
//! * [`feasibility`]: hardware figures to speed ratio and attack length.
//! * [`sweep`]: batch evaluation over parameter grids.

pub mod consensus;
pub mod error;
pub mod feasibility;
pub mod parallel;
pub mod quantum;
pub mod race;
pub mod schedule;
pub mod sweep;

pub use consensus::{
    adjust_difficulty, cumulative_work, fork_choice, validate_schedule, validate_schedule_with, ChainEpoch,
    ChainSummary, ConsensusParams, ForkChoiceRule, ForkWinner, ValidationReport, ValidationTolerance, Violation,
    Warning,
};
pub use error::{Error, Result};
pub use feasibility::HardwareProfile;
pub use parallel::Execution;
pub use quantum::{parallel_speed, quantum_block_time, quantum_epoch_time, MinerSpeed};
pub use race::{
    counterexample_longest_chain, expected_honest_cpow, race_win_probability, race_win_probability_within, ChainSide, HonestModel, RaceOutcome,
};
pub use schedule::{
    emit_schedule_csv, generate_revenue_target, generate_variant1, generate_variant2, generate_variant3,
    generate_variant4, parse_schedule_csv, schedule_metrics, Aggregates, AttackSchedule, AttackVariant, EpochPlan,
    Variant4Config, VariantConfig,
};

//! Timing model for a miner running Grover search.
//!
//! A classical miner needs `d` times the work to produce a block at relative
//! difficulty `d`; a Grover miner needs only `√d` times the iterations. All
//! constants and the success probability are folded into the speed ratio `r`,
//! so mining is treated as deterministic.

use std::fmt;

use crate::error::{ensure_positive, Error, Result};

/// Block-production speed of the quantum miner at the original difficulty,
/// as a fraction of the honest network's speed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MinerSpeed(f64);

impl MinerSpeed {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && r > 0.0 && r <= 1.0 {
            Ok(MinerSpeed(r))
        } else {
            Err(Error::domain(format!("speed ratio r must be in (0, 1], got {r}")))
        }
    }

    pub fn ratio(self) -> f64 {
        self.0
    }

    /// The speed used to size attack phases. Faster attackers run the
    /// schedule as if `r = 1/4` so that the difficulty is lowered enough.
    pub fn sizing(self) -> MinerSpeed {
        MinerSpeed(self.0.min(0.25))
    }
}

impl fmt::Display for MinerSpeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Time to mine one block at difficulty `d`, in honest block-times.
pub fn quantum_block_time(d: f64, speed: MinerSpeed) -> Result<f64> {
    ensure_positive("difficulty", d)?;
    Ok(d.sqrt() / speed.0)
}

/// Time to mine a full epoch at difficulty `d`, in epoch-times.
///
/// Every block in the epoch takes `√d / r` block-times, so the epoch takes the
/// same multiple of one epoch-time.
pub fn quantum_epoch_time(d: f64, speed: MinerSpeed) -> Result<f64> {
    quantum_block_time(d, speed)
}

/// Speed of `k` machines searching in parallel. Grover search only gains a
/// `√k` factor from parallelism. The result is capped at parity with the
/// honest network.
pub fn parallel_speed(base: MinerSpeed, k: u64) -> Result<MinerSpeed> {
    if k == 0 {
        return Err(Error::domain("machine count must be at least 1"));
    }
    Ok(MinerSpeed((base.0 * (k as f64).sqrt()).min(1.0)))
}

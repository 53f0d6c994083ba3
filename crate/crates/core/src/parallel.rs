//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature disabled every [`Execution`] runs
//! sequentially. Results never depend on the execution mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Counts the indices in `0..n` for which `pred` holds.
pub fn count_matching<F>(n: u64, exec: Execution, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().filter(|&i| pred(i)).count() as u64,
        _ => (0..n).filter(|&i| pred(i)).count() as u64,
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<I, T, F>(items: &[I], exec: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let pred = |i: u64| i.is_multiple_of(3) || i.is_multiple_of(7);
        assert_eq!(
            count_matching(10_000, Execution::Sequential, pred),
            count_matching(10_000, Execution::Parallel, pred)
        );
        let xs: Vec<u32> = (0..1000).collect();
        assert_eq!(
            map_ordered(&xs, Execution::Sequential, |x| x * 2),
            map_ordered(&xs, Execution::Parallel, |x| x * 2)
        );
    }
}

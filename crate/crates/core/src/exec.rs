//! Trial scheduling. Trials are cut into fixed-size blocks; blocks may run
//! on a rayon pool but their results always come back in block order, so
//! any reduction over them is independent of the worker count.

use std::ops::Range;

/// How Monte Carlo trials are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon data-parallel over trial blocks. Falls back to sequential
    /// when the `parallel` feature is off.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Trials per scheduling block.
pub const BLOCK_TRIALS: usize = 16;

pub(crate) fn blocks(total: usize) -> Vec<Range<usize>> {
    (0..total)
        .step_by(BLOCK_TRIALS)
        .map(|start| start..(start + BLOCK_TRIALS).min(total))
        .collect()
}

/// Applies `f` to every block of `0..total` and returns the results in
/// block order, stopping at the first error.
pub(crate) fn map_blocks<T, E, F>(execution: Execution, total: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(Range<usize>) -> Result<T, E> + Sync + Send,
{
    let ranges = blocks(total);
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            ranges.into_par_iter().map(f).collect()
        }
        _ => ranges.into_iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_range() {
        let b = blocks(40);
        assert_eq!(b.first(), Some(&(0..16)));
        assert_eq!(b.last(), Some(&(32..40)));
        assert_eq!(b.iter().map(|r| r.len()).sum::<usize>(), 40);
        assert!(blocks(0).is_empty());
    }

    #[test]
    fn order_is_stable() {
        let seq: Result<Vec<usize>, ()> = map_blocks(Execution::Sequential, 100, |r| Ok(r.start));
        let par: Result<Vec<usize>, ()> = map_blocks(Execution::Parallel, 100, |r| Ok(r.start));
        assert_eq!(seq, par);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Vec<usize>, String> = map_blocks(Execution::Parallel, 100, |r| {
            if r.start == 48 {
                Err("boom".to_string())
            } else {
                Ok(r.start)
            }
        });
        assert_eq!(r, Err("boom".to_string()));
    }
}

//! Sequential or data-parallel evaluation of independent enumeration cells.

/// How enumeration loops are scheduled.
///
/// `Parallel` needs the `parallel` cargo feature; without it the request is
/// honoured sequentially so results never depend on the build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if Self::parallel_available() {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `0..len` through `map` and folds the results with the associative
/// `reduce`. Combination order follows index order in both modes.
pub(crate) fn map_reduce<R, M, I, F>(mode: Execution, len: usize, map: M, identity: I, reduce: F) -> R
where
    R: Send,
    M: Fn(usize) -> R + Sync + Send,
    I: Fn() -> R + Sync + Send,
    F: Fn(R, R) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(map).reduce(identity, reduce)
        }
        _ => (0..len).map(map).fold(identity(), reduce),
    }
}

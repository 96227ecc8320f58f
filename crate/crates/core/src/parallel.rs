//! Thread-count configuration.
//!
//! Parallel work in this crate is split over independent columns or walks
//! and reduced in a fixed order, so results do not depend on the thread
//! count. Dense factorizations always run single-threaded inside faer for
//! the same reason.

use crate::error::{Error, Result};

/// Environment variable consulted when no explicit count is given.
pub const THREADS_ENV: &str = "HPMETRIC_THREADS";

/// Resolves the thread count: explicit value, then `HPMETRIC_THREADS`, then
/// the number of available cores.
pub fn resolve_threads(explicit: Option<usize>) -> Result<usize> {
    if let Some(t) = explicit {
        return positive(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let t = v
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
            positive(t)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn positive(t: usize) -> Result<usize> {
    if t == 0 {
        Err(Error::Usage("thread count must be at least 1".into()))
    } else {
        Ok(t)
    }
}

/// Sets up the global rayon pool and pins faer to sequential kernels.
/// Returns the thread count actually in effect; if the pool was already
/// built, its size wins.
pub fn configure_threads(explicit: Option<usize>) -> Result<usize> {
    let t = resolve_threads(explicit)?;
    faer::set_global_parallelism(faer::Par::Seq);
    let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    Ok(rayon::current_num_threads())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_count_wins() {
        assert_eq!(resolve_threads(Some(3)).unwrap(), 3);
        assert!(resolve_threads(Some(0)).is_err());
    }
}

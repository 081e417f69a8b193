//! Library surface of the `adamant` command-line tool; the binary in
//! `main.rs` is a thin wrapper so integration tests can drive commands
//! in-process.

pub mod commands;
pub mod io;
pub mod report;
pub mod tokens;

use anyhow::Result;

/// Applies the `ADAMANT_THREADS` cap (0 or unset = automatic) to the global
/// rayon pool. Call once at startup.
pub fn init_thread_pool() -> Result<()> {
    if let Ok(value) = std::env::var("ADAMANT_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("ADAMANT_THREADS must be a nonnegative integer"))?;
        if threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| anyhow::anyhow!("cannot configure thread pool: {e}"))?;
        }
    }
    Ok(())
}

//! Path-level parallelism. Paths carry their own seeds, so the result does
//! not depend on the schedule.

use ijd_core::sim::{PathEnsemble, Simulator};
use rayon::prelude::*;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "IJD_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn simulate(sim: &Simulator) -> PathEnsemble {
    let n = sim.config().n_paths as u64;
    let run = || (0..n).into_par_iter().map(|i| sim.simulate_path(i)).collect::<Vec<_>>();
    let paths = match rayon::ThreadPoolBuilder::new().num_threads(thread_count()).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    sim.assemble(paths)
}

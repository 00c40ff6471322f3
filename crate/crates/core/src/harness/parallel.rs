use crate::error::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials folded sequentially inside one work item.
pub const CHUNK: u64 = 1024;

/// Purpose tags so that independent uses of one master seed never share keys.
pub mod stream {
    pub const SLOTS: u64 = 0x51_07;
    pub const DETECTION: u64 = 0xDE_7E;
    pub const PHY: u64 = 0xB1_75;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream of trial `trial`: the key comes from `(seed, purpose)`, the
/// ChaCha stream id is the trial index.
pub fn trial_rng(seed: u64, purpose: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(purpose)));
    rng.set_stream(trial);
    rng
}

/// Runs `step` for trials `0..trials` and merges the per-chunk accumulators
/// in trial order. `workers = 0` uses the global rayon pool.
pub fn fold_trials<A, I, S, M>(trials: u64, workers: usize, init: I, step: S, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let chunks = trials.div_ceil(CHUNK);
    let run = || -> Result<Vec<A>> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    step(&mut acc, t)?;
                }
                Ok(acc)
            })
            .collect()
    };
    let parts = if workers == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(run)?
    };
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    Ok(total)
}

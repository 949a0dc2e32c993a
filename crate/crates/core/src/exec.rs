//! Execution mode and deterministic random streams.
//!
//! Every parallel loop in the crate goes through [`Exec`], so the sequential
//! fallback (crate built without the `parallel` feature, or `Exec::Sequential`
//! requested at runtime) produces bit-identical results. Randomness is never
//! shared across work items: each item draws from its own ChaCha stream keyed by
//! `(seed, domain, index)`, which makes output independent of thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `0..n`, preserving index order in the output.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent random stream for work item `index` within `domain`.
pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}

/// Stream domains used inside the crate. Callers composing their own domains
/// should stay clear of the low 8 bits, which hold these tags.
pub mod domain {
    pub const SELECTION: u64 = 1;
    pub const MONTE_CARLO: u64 = 2;
    pub const INIT: u64 = 3;
    pub const VARIATION: u64 = 4;
    pub const SURVIVAL: u64 = 5;
    pub const INJECT: u64 = 6;
    pub const PAIRING: u64 = 7;

    /// Domain tag scoped to one generation.
    pub fn per_generation(tag: u64, generation: u64) -> u64 {
        (generation << 8) | tag
    }
}

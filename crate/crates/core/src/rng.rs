//! Reproducible random streams.
//!
//! Every draw comes from a ChaCha8 generator keyed by `(seed, domain)` and
//! positioned on stream `index` (typically the round number), so the value a
//! round sees never depends on how many draws other rounds or components made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent consumers of randomness within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Reward,
    Context,
    Concentration,
    Instance,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Reward => 0x5265_7761_7264_0001,
            Domain::Context => 0x436f_6e74_6578_0002,
            Domain::Concentration => 0x436f_6e63_656e_0003,
            Domain::Instance => 0x496e_7374_616e_0004,
        }
    }
}

/// Generator for draw group `index` of `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.tag());
    rng.set_stream(index);
    rng
}

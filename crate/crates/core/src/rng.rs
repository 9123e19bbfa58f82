//! Deterministic random substreams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by the root
//! seed, with the 64-bit stream id derived from `(purpose, index, driver)`.
//! ChaCha streams are independent by construction, so work can be split
//! across threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for; part of the stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Haar = 1,
    Coefficients = 2,
    PeterWeyl = 3,
    Oracle = 4,
    Drivers = 5,
    Effective = 6,
    Split = 7,
    Centring = 8,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id for `(purpose, index, driver)`.
pub fn stream_id(purpose: Purpose, index: u64, driver: u64) -> u64 {
    splitmix(
        splitmix(splitmix(purpose as u64) ^ index) ^ driver.wrapping_mul(0x2545_f491_4f6c_dd1d),
    )
}

/// Independent generator for one `(purpose, index, driver)` triple.
pub fn substream(root: u64, purpose: Purpose, index: u64, driver: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream_id(purpose, index, driver));
    rng
}

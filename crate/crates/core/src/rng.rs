//! Counter-based stream splitting.
//!
//! Every random quantity in a drop is drawn from a stream keyed by
//! `(drop seed, subsystem, ue)`. Streams never share state, so the order in
//! which UEs, drops or procedures are evaluated has no effect on the values a
//! given stream produces. Two procedures run with the same drop seed therefore
//! see exactly the same trajectories and radio channel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent consumers of randomness inside a drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Subsystem {
    Placement = 1,
    Shadowing = 2,
    LineOfSight = 3,
    Fading = 4,
    MeasurementError = 5,
}

/// UE index reserved for draws shared by every UE of a drop.
pub const DROP_WIDE: u32 = u32::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the 64-bit key of one stream.
pub fn stream_key(drop_seed: u64, subsystem: Subsystem, ue: u32) -> u64 {
    let a = splitmix64(drop_seed);
    let b = splitmix64(a ^ (subsystem as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(b ^ u64::from(ue).wrapping_mul(0xA076_1D64_78BD_642F))
}

pub fn stream(drop_seed: u64, subsystem: Subsystem, ue: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(drop_seed, subsystem, ue))
}

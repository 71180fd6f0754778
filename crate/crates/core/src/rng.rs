//! Seed splitting.
//!
//! Every random consumer gets its own ChaCha8 stream keyed by the master
//! seed. The 64-bit stream id is laid out as
//!
//! ```text
//! bits 62..64  stream kind (1 = arrivals, 2 = transmission outcomes)
//! bits 40..62  cell index
//! bits  8..40  UE index
//! bit   0      direction (0 = DL, 1 = UL)
//! ```
//!
//! so adding cells or UEs never shifts the draws of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    Arrivals = 1,
    Outcomes = 2,
}

pub fn stream_id(kind: StreamKind, cell: u32, ue: u32, dir: Direction) -> u64 {
    ((kind as u64) << 62)
        | ((u64::from(cell) & 0x3f_ffff) << 40)
        | (u64::from(ue) << 8)
        | match dir {
            Direction::Dl => 0,
            Direction::Ul => 1,
        }
}

pub fn substream(master: u64, kind: StreamKind, cell: u32, ue: u32, dir: Direction) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(kind, cell, ue, dir));
    rng
}

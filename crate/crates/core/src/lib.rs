//! Discrete-event model of URLLC radio latency under 5G NR duplexing schemes.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It contains
//!
//! * [`numerology`]: the integer symbol time base,
//! * [`traffic`]: Poisson per-UE packet arrivals,
//! * [`duplexing`]: slot formats, buffer-driven format selection, PRB splits,
//! * [`latency`]: closed-form single-packet latency timelines,
//! * [`engine`]: the multi-cell discrete-event simulator,
//! * [`metrics`]: outage quantiles, CCDF/ECDF construction and merging.
//!
//! File formats, experiment sweeps and the command line live in the
//! companion `urllc-sim` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod duplexing;
pub mod engine;
mod error;
pub mod latency;
pub mod metrics;
pub mod numerology;
pub mod rng;
pub mod traffic;

pub use error::ConfigError;

/// Link direction of a packet or transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Dl,
    Ul,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Dl, Direction::Ul];

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Dl => "DL",
            Direction::Ul => "UL",
        }
    }
}

impl core::fmt::Display for Direction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Direction {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "DL" | "dl" => Ok(Direction::Dl),
            "UL" | "ul" => Ok(Direction::Ul),
            _ => Err(ConfigError::Parse(alloc::format!("unknown direction {s:?}"))),
        }
    }
}

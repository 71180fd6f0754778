//! Symbol-indexed time base.
//!
//! Every timestamp inside the simulator is an integer OFDM-symbol index.
//! Microseconds only appear at the edges (reports, exports) and are derived
//! from the sub-carrier spacing through [`Numerology`].

use core::fmt;

use crate::ConfigError;

/// OFDM symbols in one NR slot (normal cyclic prefix).
pub const SYMBOLS_PER_SLOT: u32 = 14;

/// Sub-carrier spacing supported below 6 GHz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scs {
    Khz15,
    Khz30,
    Khz60,
}

impl Scs {
    pub fn from_khz(khz: u32) -> Result<Self, ConfigError> {
        match khz {
            15 => Ok(Scs::Khz15),
            30 => Ok(Scs::Khz30),
            60 => Ok(Scs::Khz60),
            other => Err(ConfigError::UnsupportedScs(other)),
        }
    }

    pub fn khz(self) -> u32 {
        match self {
            Scs::Khz15 => 15,
            Scs::Khz30 => 30,
            Scs::Khz60 => 60,
        }
    }

    /// NR numerology index `m` with `scs = 15 * 2^m` kHz.
    pub fn index(self) -> u32 {
        match self {
            Scs::Khz15 => 0,
            Scs::Khz30 => 1,
            Scs::Khz60 => 2,
        }
    }
}

impl fmt::Display for Scs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}kHz", self.khz())
    }
}

/// Time base derived from the sub-carrier spacing.
///
/// Symbols are treated as uniform (`slot / 14`); the longer first symbol of
/// each half-subframe is not modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerology {
    pub scs: Scs,
    pub symbols_per_slot: u32,
    pub slot_duration_us: f64,
    pub symbol_duration_us: f64,
}

impl Numerology {
    pub fn new(scs: Scs) -> Self {
        let slot_duration_us = 1000.0 / f64::from(1u32 << scs.index());
        Numerology {
            scs,
            symbols_per_slot: SYMBOLS_PER_SLOT,
            slot_duration_us,
            symbol_duration_us: slot_duration_us / f64::from(SYMBOLS_PER_SLOT),
        }
    }

    /// Symbols per second, exact: `14 * 1000 * 2^m`.
    pub fn symbols_per_second(&self) -> u64 {
        u64::from(SYMBOLS_PER_SLOT) * 1000 * (1u64 << self.scs.index())
    }

    pub fn slots_per_frame(&self) -> u64 {
        10 * (1u64 << self.scs.index())
    }

    pub fn symbols_to_us(&self, n: u64) -> f64 {
        n as f64 * self.symbol_duration_us
    }

    /// Index of the symbol that contains the instant `seconds` after t = 0.
    pub fn symbol_at(&self, seconds: f64) -> u64 {
        libm::floor(seconds * self.symbols_per_second() as f64) as u64
    }
}

/// Build the numerology for a sub-carrier spacing given in kHz.
pub fn make_numerology(scs_khz: u32) -> Result<Numerology, ConfigError> {
    Scs::from_khz(scs_khz).map(Numerology::new)
}

pub fn symbols_to_us(n: u64, num: &Numerology) -> f64 {
    num.symbols_to_us(n)
}

/// Scheduling granularity within a slot.
///
/// TTIs start at slot-local offsets `0, µ, 2µ, ...`. When `µ` does not divide
/// 14 the last TTI of each slot is shortened so TTIs never straddle slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TtiGrid {
    symbols: u32,
}

impl TtiGrid {
    pub const ALLOWED: [u32; 4] = [2, 4, 7, 14];

    pub fn new(tti_symbols: u32) -> Result<Self, ConfigError> {
        if Self::ALLOWED.contains(&tti_symbols) {
            Ok(TtiGrid { symbols: tti_symbols })
        } else {
            Err(ConfigError::UnsupportedTti(tti_symbols))
        }
    }

    pub fn symbols(&self) -> u32 {
        self.symbols
    }

    pub fn per_slot(&self) -> u64 {
        u64::from(SYMBOLS_PER_SLOT.div_ceil(self.symbols))
    }

    pub fn is_boundary(&self, symbol: u64) -> bool {
        (symbol % u64::from(SYMBOLS_PER_SLOT)).is_multiple_of(u64::from(self.symbols))
    }

    /// Global TTI index of the window containing `symbol`.
    pub fn index_of(&self, symbol: u64) -> u64 {
        let slot = symbol / u64::from(SYMBOLS_PER_SLOT);
        let local = symbol % u64::from(SYMBOLS_PER_SLOT);
        slot * self.per_slot() + local / u64::from(self.symbols)
    }

    pub fn start_of_index(&self, index: u64) -> u64 {
        let slot = index / self.per_slot();
        let local = index % self.per_slot();
        slot * u64::from(SYMBOLS_PER_SLOT) + local * u64::from(self.symbols)
    }

    /// `(start, len)` of the TTI window containing `symbol`.
    pub fn window(&self, symbol: u64) -> (u64, u32) {
        let start = self.start_of_index(self.index_of(symbol));
        (start, self.len_at(start))
    }

    /// Length of the TTI starting at boundary `start`.
    pub fn len_at(&self, start: u64) -> u32 {
        let local = (start % u64::from(SYMBOLS_PER_SLOT)) as u32;
        self.symbols.min(SYMBOLS_PER_SLOT - local)
    }

    /// First TTI boundary at or after `symbol`.
    pub fn next_boundary(&self, symbol: u64) -> u64 {
        if self.is_boundary(symbol) {
            symbol
        } else {
            self.start_of_index(self.index_of(symbol) + 1)
        }
    }
}

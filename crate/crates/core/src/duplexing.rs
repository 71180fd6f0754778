//! Slot formats, buffer-driven link selection and PRB partitioning.
//!
//! Also hosts the schedule lookups shared by the closed-form timelines and
//! the engine: link availability per symbol, TTI usability and control
//! channel opportunities.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::numerology::{TtiGrid, SYMBOLS_PER_SLOT};
use crate::{ConfigError, Direction};

const SLOT: usize = SYMBOLS_PER_SLOT as usize;

/// One OFDM symbol of a slot format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotSymbol {
    D,
    U,
    F,
}

impl SlotSymbol {
    pub fn as_char(self) -> char {
        match self {
            SlotSymbol::D => 'D',
            SlotSymbol::U => 'U',
            SlotSymbol::F => 'F',
        }
    }
}

/// Placement of DL, UL and flexible symbols over a 14-symbol slot.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotFormat([SlotSymbol; SLOT]);

impl SlotFormat {
    /// Build a format, checking the guard rule: no D immediately followed
    /// by U, including the wrap-around into the next slot.
    pub fn new(symbols: [SlotSymbol; SLOT]) -> Result<Self, ConfigError> {
        let f = SlotFormat(symbols);
        if let Some(i) = f.guard_violation() {
            return Err(ConfigError::Parse(alloc::format!(
                "slot format {f}: DL symbol {i} is followed by UL without a guard"
            )));
        }
        Ok(f)
    }

    pub fn symbols(&self) -> &[SlotSymbol; SLOT] {
        &self.0
    }

    pub fn at(&self, local: usize) -> SlotSymbol {
        self.0[local]
    }

    pub fn count(&self, sym: SlotSymbol) -> usize {
        self.0.iter().filter(|&&s| s == sym).count()
    }

    fn guard_violation(&self) -> Option<usize> {
        (0..SLOT).find(|&i| self.0[i] == SlotSymbol::D && self.0[(i + 1) % SLOT] == SlotSymbol::U)
    }

    pub fn satisfies_guard_rule(&self) -> bool {
        self.guard_violation().is_none()
    }
}

impl fmt::Display for SlotFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            fmt::Write::write_char(f, s.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for SlotFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SlotFormat({self})")
    }
}

impl FromStr for SlotFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut symbols = [SlotSymbol::F; SLOT];
        let mut n = 0;
        for c in s.chars() {
            if n == SLOT {
                return Err(ConfigError::Parse(alloc::format!("slot format {s:?} is longer than 14 symbols")));
            }
            symbols[n] = match c {
                'D' => SlotSymbol::D,
                'U' => SlotSymbol::U,
                'F' => SlotSymbol::F,
                other => {
                    return Err(ConfigError::Parse(alloc::format!("slot format {s:?}: unexpected symbol {other:?}")))
                }
            };
            n += 1;
        }
        if n != SLOT {
            return Err(ConfigError::Parse(alloc::format!("slot format {s:?} has {n} symbols, expected 14")));
        }
        SlotFormat::new(symbols)
    }
}

/// Aggregated buffered traffic of one cell, in bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellBuffers {
    pub z_dl_bits: u64,
    pub z_ul_bits: u64,
}

/// Buffered traffic ratio `Z_dl / (Z_dl + Z_ul)`; `None` when both buffers
/// are empty.
pub fn buffered_ratio(b: CellBuffers) -> Option<f64> {
    let total = b.z_dl_bits + b.z_ul_bits;
    (total > 0).then(|| b.z_dl_bits as f64 / total as f64)
}

// Data blocks of the 4-symbol template; F sits at local symbols 4 and 13.
const BLOCKS: [usize; 3] = [0, 5, 9];
const TEMPLATE_GUARDS: [usize; 2] = [4, 13];

/// Number of DL blocks selected for a ratio: `clamp(round(3 * ratio), 0, 3)`.
pub fn dl_blocks(ratio: f64) -> usize {
    (libm::round(3.0 * ratio.clamp(0.0, 1.0)) as usize).min(3)
}

/// Pick the slot format for a buffered traffic ratio.
///
/// Three 4-symbol data blocks at local symbols 0-3, 5-8 and 9-12 with F at
/// 4 and 13. Block directions by number of DL blocks:
///
/// | DL blocks | order   | format           |
/// |-----------|---------|------------------|
/// | 0         | U, U, U | `UUUUFUUUUUUUUF` |
/// | 1         | U, U, D | `UUUUFUUUUDDDDF` |
/// | 2         | D, U, D | `DDDDFUUUUDDDDF` |
/// | 3         | D, D, D | `DDDDFDDDDDDDDF` |
///
/// The second and third blocks are adjacent, so a DL block may not precede
/// an UL block there; with a single DL block it therefore goes last.
/// An undefined ratio yields [`default_slot_format`].
pub fn select_slot_format(ratio: Option<f64>) -> SlotFormat {
    let Some(ratio) = ratio else {
        return default_slot_format();
    };
    use SlotSymbol::{D, U};
    let order = match dl_blocks(ratio) {
        0 => [U, U, U],
        1 => [U, U, D],
        2 => [D, U, D],
        _ => [D, D, D],
    };
    let mut symbols = [SlotSymbol::F; SLOT];
    for (&start, dir) in BLOCKS.iter().zip(order) {
        symbols[start..start + 4].fill(dir);
    }
    debug_assert!(TEMPLATE_GUARDS.iter().all(|&g| symbols[g] == SlotSymbol::F));
    SlotFormat(symbols)
}

/// Fallback format with an equal DL and UL share: `DDDDDDFUUUUUUF`.
pub fn default_slot_format() -> SlotFormat {
    use SlotSymbol::{D, F, U};
    SlotFormat([D, D, D, D, D, D, F, U, U, U, U, U, U, F])
}

/// Duplexing scheme of the whole network.
#[derive(Debug, Clone, PartialEq)]
pub enum DuplexMode {
    /// Paired spectrum: DL and UL bands available at every symbol.
    Fdd { dl_bandwidth_fraction: f64 },
    /// Unpaired carrier; each cell re-selects its slot format from its
    /// buffered traffic ratio every `gamma_slots` slots.
    DynamicTdd { gamma_slots: u32 },
    /// Unpaired carrier with a fixed, cyclically repeated list of formats.
    StaticTdd { pattern: Vec<SlotFormat> },
    /// Unpaired carrier split in frequency into DL, UL and guard PRBs,
    /// re-partitioned every `gamma_slots` slots.
    FlexibleFdd { guard_prb_fraction: f64, gamma_slots: u32 },
}

impl DuplexMode {
    /// Both link directions available at every symbol.
    pub fn is_paired(&self) -> bool {
        matches!(self, DuplexMode::Fdd { .. } | DuplexMode::FlexibleFdd { .. })
    }

    /// Slots between pattern or partition updates, for adaptive modes.
    pub fn update_period_slots(&self) -> Option<u32> {
        match self {
            DuplexMode::DynamicTdd { gamma_slots } | DuplexMode::FlexibleFdd { gamma_slots, .. } => Some(*gamma_slots),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DuplexMode::Fdd { .. } => "fdd",
            DuplexMode::DynamicTdd { .. } => "tdd",
            DuplexMode::StaticTdd { .. } => "static_tdd",
            DuplexMode::FlexibleFdd { .. } => "flex_fdd",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fraction = |field, v: f64, max: f64| {
            if (0.0..=max).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::invalid(field, alloc::format!("{v} outside [0, {max}]")))
            }
        };
        match self {
            DuplexMode::Fdd { dl_bandwidth_fraction } => fraction("duplex.dl_bandwidth_fraction", *dl_bandwidth_fraction, 1.0),
            DuplexMode::DynamicTdd { gamma_slots } => gamma_ok(*gamma_slots),
            DuplexMode::StaticTdd { pattern } => {
                if pattern.is_empty() {
                    Err(ConfigError::invalid("duplex.pattern", "at least one slot format required"))
                } else {
                    Ok(())
                }
            }
            DuplexMode::FlexibleFdd { guard_prb_fraction, gamma_slots } => {
                fraction("duplex.guard_prb_fraction", *guard_prb_fraction, 0.5)?;
                gamma_ok(*gamma_slots)
            }
        }
    }
}

fn gamma_ok(gamma: u32) -> Result<(), ConfigError> {
    if gamma >= 1 {
        Ok(())
    } else {
        Err(ConfigError::invalid("duplex.gamma_slots", "pattern update periodicity must be >= 1 slot"))
    }
}

/// Frequency split of a carrier into DL, UL and guard PRBs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrbPartition {
    pub n_dl_prb: u32,
    pub n_ul_prb: u32,
    pub n_guard_prb: u32,
}

impl PrbPartition {
    pub fn total(&self) -> u32 {
        self.n_dl_prb + self.n_ul_prb + self.n_guard_prb
    }

    pub fn for_direction(&self, dir: Direction) -> u32 {
        match dir {
            Direction::Dl => self.n_dl_prb,
            Direction::Ul => self.n_ul_prb,
        }
    }
}

/// Split `total_prb` into a guard band of `round(guard_fraction * total)`
/// PRBs and DL/UL parts proportional to `ratio` (largest remainder; a tie
/// goes to DL).
pub fn flexfdd_partition(ratio: f64, total_prb: u32, guard_fraction: f64) -> Result<PrbPartition, ConfigError> {
    if total_prb == 0 {
        return Err(ConfigError::NoPrbs);
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(ConfigError::invalid("ratio", alloc::format!("{ratio} outside [0, 1]")));
    }
    if !(0.0..=0.5).contains(&guard_fraction) {
        return Err(ConfigError::invalid("guard_fraction", alloc::format!("{guard_fraction} outside [0, 0.5]")));
    }
    let n_guard_prb = (libm::round(guard_fraction * f64::from(total_prb)) as u32).min(total_prb);
    let rest = total_prb - n_guard_prb;
    // With two parts the largest-remainder rule reduces to rounding the DL
    // quota half-up.
    let n_dl_prb = (libm::floor(ratio * f64::from(rest) + 0.5) as u32).min(rest);
    Ok(PrbPartition { n_dl_prb, n_ul_prb: rest - n_dl_prb, n_guard_prb })
}

/// Static FDD split of `total_prb` with a DL share of `dl_fraction`.
pub fn fdd_partition(dl_fraction: f64, total_prb: u32) -> Result<PrbPartition, ConfigError> {
    flexfdd_partition(dl_fraction, total_prb, 0.0)
}

/// What a cell may do at one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkAvailability {
    DlOnly,
    UlOnly,
    Guard,
    Both,
}

impl LinkAvailability {
    pub fn supports(self, dir: Direction) -> bool {
        matches!(
            (self, dir),
            (LinkAvailability::Both, _) | (LinkAvailability::DlOnly, Direction::Dl) | (LinkAvailability::UlOnly, Direction::Ul)
        )
    }

    pub fn of_symbol(sym: SlotSymbol) -> Self {
        match sym {
            SlotSymbol::D => LinkAvailability::DlOnly,
            SlotSymbol::U => LinkAvailability::UlOnly,
            SlotSymbol::F => LinkAvailability::Guard,
        }
    }
}

/// Time-domain view of one cell's link directions.
pub trait LinkSchedule {
    fn tti(&self) -> TtiGrid;
    fn availability(&self, symbol: u64) -> LinkAvailability;
}

#[derive(Debug, Clone, PartialEq)]
enum Layout {
    Paired,
    Repeating(Vec<SlotFormat>),
    Finite(Vec<SlotFormat>),
}

/// A cell's frame schedule: TTI grid plus per-slot formats (or paired
/// spectrum, where every symbol carries both directions).
#[derive(Debug, Clone, PartialEq)]
pub struct CellSchedule {
    tti: TtiGrid,
    layout: Layout,
}

impl CellSchedule {
    pub fn paired(tti: TtiGrid) -> Self {
        CellSchedule { tti, layout: Layout::Paired }
    }

    /// Formats applied to slots `0, 1, 2, ...`, repeating cyclically.
    pub fn repeating(tti: TtiGrid, formats: Vec<SlotFormat>) -> Self {
        assert!(!formats.is_empty(), "a repeating schedule needs at least one format");
        CellSchedule { tti, layout: Layout::Repeating(formats) }
    }

    /// Formats for slots `0..formats.len()`; nothing can be sent afterwards.
    pub fn finite(tti: TtiGrid, formats: Vec<SlotFormat>) -> Self {
        CellSchedule { tti, layout: Layout::Finite(formats) }
    }

    /// First symbol past the end of a finite schedule.
    pub fn end(&self) -> Option<u64> {
        match &self.layout {
            Layout::Finite(f) => Some(f.len() as u64 * u64::from(SYMBOLS_PER_SLOT)),
            _ => None,
        }
    }

    pub fn format_of_slot(&self, slot: u64) -> Option<SlotFormat> {
        match &self.layout {
            Layout::Paired => None,
            Layout::Repeating(f) => Some(f[(slot % f.len() as u64) as usize]),
            Layout::Finite(f) => f.get(slot as usize).copied(),
        }
    }
}

impl LinkSchedule for CellSchedule {
    fn tti(&self) -> TtiGrid {
        self.tti
    }

    fn availability(&self, symbol: u64) -> LinkAvailability {
        if self.layout == Layout::Paired {
            return LinkAvailability::Both;
        }
        let slot = symbol / u64::from(SYMBOLS_PER_SLOT);
        match self.format_of_slot(slot) {
            Some(f) => LinkAvailability::of_symbol(f.at((symbol % u64::from(SYMBOLS_PER_SLOT)) as usize)),
            None => LinkAvailability::Guard,
        }
    }
}

/// Link direction of `symbol` under `mode`: paired modes carry both
/// directions everywhere, TDD modes follow the active slot format.
pub fn link_direction_at<S: LinkSchedule + ?Sized>(mode: &DuplexMode, sched: &S, symbol: u64) -> LinkAvailability {
    if mode.is_paired() {
        LinkAvailability::Both
    } else {
        sched.availability(symbol)
    }
}

/// Symbols of the window `[start, start + len)` usable in direction `dir`.
pub fn data_symbols<S: LinkSchedule + ?Sized>(sched: &S, start: u64, len: u32, dir: Direction) -> u32 {
    (start..start + u64::from(len)).filter(|&s| sched.availability(s).supports(dir)).count() as u32
}

/// Start of the first TTI at or after `from` (and before `limit`) that has
/// at least one symbol usable in `dir`.
pub fn first_usable_tti<S: LinkSchedule + ?Sized>(sched: &S, from: u64, dir: Direction, limit: u64) -> Option<u64> {
    let grid = sched.tti();
    let mut start = grid.next_boundary(from);
    while start < limit {
        let len = grid.len_at(start);
        if data_symbols(sched, start, len, dir) > 0 {
            return Some(start);
        }
        start += u64::from(len);
    }
    None
}

/// First control-channel opportunity in direction `dir` at or after `from`
/// (and before `limit`): any symbol that can carry `dir`.
pub fn next_ctrl_opportunity<S: LinkSchedule + ?Sized>(sched: &S, from: u64, dir: Direction, limit: u64) -> Option<u64> {
    (from..limit).find(|&s| sched.availability(s).supports(dir))
}

/// First scheduling-request opportunity for a request raised at `from`.
///
/// Nominal SR instants fall every `period_ttis` TTIs (TTI index multiple of
/// the period). The first nominal instant at or after `from` is served at
/// the first UL control opportunity at or after it.
pub fn next_sr_opportunity<S: LinkSchedule + ?Sized>(
    sched: &S,
    from: u64,
    period_ttis: u32,
    limit: u64,
) -> Option<u64> {
    let grid = sched.tti();
    let period = u64::from(period_ttis.max(1));
    let mut k = grid.index_of(from).div_ceil(period);
    let mut nominal = grid.start_of_index(k * period);
    if nominal < from {
        k += 1;
        nominal = grid.start_of_index(k * period);
    }
    if nominal >= limit {
        return None;
    }
    next_ctrl_opportunity(sched, nominal, Direction::Ul, limit)
}

/// Render a sequence of formats as `"DDDDFUUUUDDDDF,UUUUF..."`.
pub fn formats_to_string(formats: &[SlotFormat]) -> String {
    let mut out = String::new();
    for (i, f) in formats.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        fmt::Write::write_fmt(&mut out, format_args!("{f}")).expect("write to String");
    }
    out
}

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::duplexing::{DuplexMode, SlotSymbol};
use crate::latency::{DelayConfig, UlScheme};
use crate::numerology::{Numerology, Scs, TtiGrid, SYMBOLS_PER_SLOT};
use crate::traffic::TrafficConfig;
use crate::{ConfigError, Direction};

/// Fixed-spectral-efficiency capacity model.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityConfig {
    /// PRBs of the carrier. TDD cells use all of them in either direction;
    /// FDD splits them between the DL and UL bands.
    pub n_prb: u32,
    pub bits_per_prb_per_symbol: u32,
    /// Split packets larger than a TTI's remaining capacity across TTIs.
    pub segmentation: bool,
}

impl Default for CapacityConfig {
    /// 51 PRBs (20 MHz at 30 kHz) at 4 bits per PRB and symbol: a 400-bit
    /// payload fits one 4-symbol TTI even on half the band.
    fn default() -> Self {
        CapacityConfig { n_prb: 51, bits_per_prb_per_symbol: 4, segmentation: true }
    }
}

/// BS-to-BS cross-link interference coupling.
///
/// `chi[i][j]` is the UL BLER penalty at victim cell `i` when aggressor `j`
/// transmits DL in every symbol of the victim's UL transport block; partial
/// overlap scales it linearly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CliCoupling {
    pub chi: Vec<Vec<f64>>,
}

impl CliCoupling {
    pub fn none(n_cells: u32) -> Self {
        CliCoupling { chi: vec![vec![0.0; n_cells as usize]; n_cells as usize] }
    }

    /// Same coupling `value` between every pair of distinct cells.
    pub fn symmetric(n_cells: u32, value: f64) -> Self {
        let n = n_cells as usize;
        let chi = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { value }).collect()).collect();
        CliCoupling { chi }
    }

    pub fn is_zero(&self) -> bool {
        self.chi.iter().flatten().all(|&x| x == 0.0)
    }

    pub fn get(&self, victim: u32, aggressor: u32) -> f64 {
        self.chi.get(victim as usize).and_then(|r| r.get(aggressor as usize)).copied().unwrap_or(0.0)
    }

    /// An empty matrix stands for "no coupling" at any cell count.
    pub fn validate(&self, n_cells: u32) -> Result<(), ConfigError> {
        if self.chi.is_empty() {
            return Ok(());
        }
        let n = n_cells as usize;
        if self.chi.len() != n || self.chi.iter().any(|r| r.len() != n) {
            return Err(ConfigError::invalid("cli.chi", format!("must be a {n}x{n} matrix")));
        }
        for (i, row) in self.chi.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    return Err(ConfigError::invalid("cli.chi", format!("entry [{i}][{j}] = {x} outside [0, 1]")));
                }
                if i == j && x != 0.0 {
                    return Err(ConfigError::invalid("cli.chi", format!("diagonal entry [{i}][{i}] must be 0")));
                }
            }
        }
        Ok(())
    }
}

/// How transmission attempts succeed or fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomeModel {
    /// Independent Bernoulli draws with the configured BLERs (plus CLI).
    Bernoulli,
    /// The first `failures` attempts of every packet fail, the next one
    /// succeeds. Deterministic; used for timeline checks.
    Forced { failures: u32 },
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_cells: u32,
    pub scs: Scs,
    pub tti_symbols: u32,
    pub duplex: DuplexMode,
    pub traffic: TrafficConfig,
    pub delays: DelayConfig,
    pub ul_scheme: UlScheme,
    pub capacity: CapacityConfig,
    pub bler_base: f64,
    pub bler_retx: f64,
    pub outcome: OutcomeModel,
    /// Retransmissions allowed after the first attempt.
    pub max_harq: u32,
    pub cli: CliCoupling,
    /// Arrivals are generated in `[0, horizon_symbols)`; the run continues
    /// until every packet is delivered or dropped.
    pub horizon_symbols: u64,
    pub seed: u64,
    /// Check conservation and buffer bookkeeping at every event.
    pub audit: bool,
}

impl Default for SimConfig {
    /// Default deployment: 21 cells, 30 kHz, 4-symbol TTIs, dynamic TDD
    /// re-selecting its pattern once per 10 ms frame, grant-free UL and
    /// 400-bit packets at 100 packets/s per UE. One second of traffic.
    fn default() -> Self {
        SimConfig {
            n_cells: 21,
            scs: Scs::Khz30,
            tti_symbols: 4,
            duplex: DuplexMode::DynamicTdd { gamma_slots: 20 },
            traffic: TrafficConfig::default(),
            delays: DelayConfig::fast(),
            ul_scheme: UlScheme::GrantFree,
            capacity: CapacityConfig::default(),
            bler_base: 0.01,
            bler_retx: 0.001,
            outcome: OutcomeModel::Bernoulli,
            max_harq: 6,
            cli: CliCoupling::default(),
            horizon_symbols: 28_000,
            seed: 1,
            audit: false,
        }
    }
}

impl SimConfig {
    pub fn numerology(&self) -> Numerology {
        Numerology::new(self.scs)
    }

    pub fn tti(&self) -> TtiGrid {
        TtiGrid::new(self.tti_symbols).expect("validated TTI")
    }

    /// Slots per 10 ms radio frame at this sub-carrier spacing.
    pub fn frame_slots(&self) -> u32 {
        self.numerology().slots_per_frame() as u32
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_cells == 0 {
            return Err(ConfigError::invalid("n_cells", "at least one cell required"));
        }
        if self.horizon_symbols == 0 {
            return Err(ConfigError::invalid("horizon_symbols", "must be > 0"));
        }
        TtiGrid::new(self.tti_symbols)?;
        self.duplex.validate()?;
        if let DuplexMode::StaticTdd { pattern } = &self.duplex {
            for (sym, dir) in [(SlotSymbol::D, "DL"), (SlotSymbol::U, "UL")] {
                if pattern.iter().all(|f| f.count(sym) == 0) {
                    return Err(ConfigError::invalid("duplex.pattern", format!("pattern has no {dir} symbol")));
                }
            }
        }
        self.traffic.validate()?;
        self.delays.validate()?;
        for (field, v) in [
            ("delays.nack_tx_dl", self.delays.nack_tx_dl),
            ("delays.nack_tx_ul", self.delays.nack_tx_ul),
            ("delays.sr_tx", self.delays.sr_tx),
            ("delays.sg_tx", self.delays.sg_tx),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(field, "control transmissions take at least one symbol"));
            }
        }
        if self.capacity.n_prb == 0 {
            return Err(ConfigError::NoPrbs);
        }
        if self.capacity.bits_per_prb_per_symbol == 0 {
            return Err(ConfigError::invalid("capacity.bits_per_prb_per_symbol", "must be > 0"));
        }
        for (field, v) in [("bler_base", self.bler_base), ("bler_retx", self.bler_retx)] {
            if !(0.0..1.0).contains(&v) {
                return Err(ConfigError::invalid(field, format!("{v} outside [0, 1)")));
            }
        }
        self.cli.validate(self.n_cells)?;
        for dir in Direction::BOTH {
            let (k, bits, lambda) = match dir {
                Direction::Dl => (self.traffic.k_dl, self.traffic.f_dl_bits, self.traffic.lambda_dl),
                Direction::Ul => (self.traffic.k_ul, self.traffic.f_ul_bits, self.traffic.lambda_ul),
            };
            if k > 0 && lambda > 0.0 && !self.fits_unsegmented(dir, bits) {
                return Err(ConfigError::invalid(
                    "capacity.segmentation",
                    format!("{dir} packets of {bits} bits never fit one TTI without segmentation"),
                ));
            }
        }
        Ok(())
    }

    /// Whether a packet of `bits` can be sent whole in some TTI. Always
    /// true with segmentation enabled.
    pub fn fits_unsegmented(&self, dir: Direction, bits: u32) -> bool {
        self.capacity.segmentation
            || u64::from(bits)
                <= u64::from(self.max_prbs(dir))
                    * u64::from(self.capacity.bits_per_prb_per_symbol)
                    * u64::from(self.tti_symbols.min(SYMBOLS_PER_SLOT))
    }

    /// Most PRBs a direction can ever get.
    fn max_prbs(&self, dir: Direction) -> u32 {
        match &self.duplex {
            DuplexMode::Fdd { dl_bandwidth_fraction } => {
                crate::duplexing::fdd_partition(*dl_bandwidth_fraction, self.capacity.n_prb)
                    .map(|p| p.for_direction(dir))
                    .unwrap_or(0)
            }
            DuplexMode::FlexibleFdd { guard_prb_fraction, .. } => {
                crate::duplexing::flexfdd_partition(1.0, self.capacity.n_prb, *guard_prb_fraction)
                    .map(|p| p.n_dl_prb)
                    .unwrap_or(0)
            }
            _ => self.capacity.n_prb,
        }
    }
}

//! Closed-form single-packet latency timelines.
//!
//! Given a cell's frame schedule and processing/control delays, walk the
//! timeline of one packet in an otherwise empty system and attribute every
//! symbol between arrival and delivery to exactly one latency component.
//!
//! Attribution rules:
//!
//! * waiting for a transmission opportunity counts as `tdd_switch` while the
//!   current symbol cannot carry the packet's direction (opposite direction
//!   or guard), and as `frame_align` while it can but no usable TTI has
//!   started yet;
//! * everything between the end of the first transmission attempt and the
//!   end of the last one is `harq`;
//! * for dynamic-grant UL, everything from arrival until the packet becomes
//!   eligible for scheduling is `dg`.
//!
//! The engine produces the same breakdown from emergent event timing, so
//! these functions double as its oracle.

use alloc::vec::Vec;
use core::fmt;

use crate::duplexing::{
    first_usable_tti, next_ctrl_opportunity, next_sr_opportunity, LinkSchedule,
};
use crate::numerology::SYMBOLS_PER_SLOT;
use crate::{ConfigError, Direction};

/// How far ahead a timeline may search for an opportunity before giving up.
pub const SEARCH_LIMIT_SLOTS: u64 = 4096;

/// Processing and control-signalling delays, in symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayConfig {
    /// BS processing of a received packet or control message.
    pub bs_proc: u32,
    /// UE processing of a DL transport block or control message.
    pub ue_proc_dl: u32,
    /// UE processing of a grant plus preparation of the UL transport block.
    pub ue_proc_ul_prep: u32,
    /// NACK sent by the BS on the DL control channel (UL HARQ).
    pub nack_tx_dl: u32,
    /// NACK sent by the UE on the UL control channel (DL HARQ).
    pub nack_tx_ul: u32,
    pub sr_tx: u32,
    pub sg_tx: u32,
    pub sr_periodicity_ttis: u32,
    /// Minimum gap between a scheduling request and its grant, in TTIs.
    pub sg_delay_ttis: u32,
    /// Target first-transmission BLER used for expected latencies.
    pub target_bler: f64,
}

impl DelayConfig {
    /// Fast UE capability: DL 4.5 and UL 5.5 symbols, rounded half-to-even
    /// to whole symbols. SR every 16 TTIs, grant 4 TTIs later.
    pub fn fast() -> Self {
        DelayConfig {
            bs_proc: 2,
            ue_proc_dl: 4,
            ue_proc_ul_prep: 6,
            nack_tx_dl: 1,
            nack_tx_ul: 1,
            sr_tx: 1,
            sg_tx: 1,
            sr_periodicity_ttis: 16,
            sg_delay_ttis: 4,
            target_bler: 0.01,
        }
    }

    /// Slow UE capability: DL 9 and UL 11 symbols.
    pub fn slow() -> Self {
        DelayConfig { bs_proc: 4, ue_proc_dl: 9, ue_proc_ul_prep: 11, ..Self::fast() }
    }

    /// Fast capability with an SR opportunity every TTI and no extra grant
    /// delay. On [`reference_schedule`] with arrival at
    /// [`REFERENCE_ARRIVAL`], a DL packet with one retransmission takes 22
    /// symbols and a dynamic-grant UL packet with one retransmission 30.
    pub fn reference() -> Self {
        DelayConfig { sr_periodicity_ttis: 1, sg_delay_ttis: 0, ..Self::fast() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ue_proc_ul_prep < self.ue_proc_dl {
            return Err(ConfigError::invalid(
                "delays.ue_proc_ul_prep",
                "UL transport-block preparation cannot be faster than DL processing",
            ));
        }
        if self.sr_periodicity_ttis == 0 {
            return Err(ConfigError::invalid("delays.sr_periodicity_ttis", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.target_bler) {
            return Err(ConfigError::invalid("delays.target_bler", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

impl Default for DelayConfig {
    fn default() -> Self {
        Self::fast()
    }
}

/// Arrival symbol used with [`reference_schedule`].
pub const REFERENCE_ARRIVAL: u64 = 8;

/// Reference frame for single-packet timelines: 2-symbol TTIs over the
/// repeating slot pair `DDDDDDFUUUUUUF`, `DDDDFUUUUDDDDF`.
pub fn reference_schedule() -> crate::duplexing::CellSchedule {
    use crate::duplexing::{CellSchedule, SlotFormat};
    use crate::numerology::TtiGrid;
    let formats: Vec<SlotFormat> =
        ["DDDDDDFUUUUUUF", "DDDDFUUUUDDDDF"].iter().map(|f| f.parse().expect("valid format")).collect();
    CellSchedule::repeating(TtiGrid::new(2).expect("valid TTI"), formats)
}

/// UL access scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UlScheme {
    /// Grant-free: eligible for scheduling once the transport block is ready.
    GrantFree,
    /// Dynamic grant: scheduling request / grant handshake first.
    DynamicGrant,
}

impl UlScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            UlScheme::GrantFree => "gf",
            UlScheme::DynamicGrant => "dg",
        }
    }
}

/// Per-component one-way latency of a packet, in symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatencyBreakdown {
    pub direction: Direction,
    pub bs_proc: u64,
    pub queue: u64,
    pub tdd_switch: u64,
    pub frame_align: u64,
    pub tx: u64,
    pub harq: u64,
    pub dg: u64,
    pub ue_proc: u64,
    pub total_symbols: u64,
}

impl LatencyBreakdown {
    pub fn zero(direction: Direction) -> Self {
        LatencyBreakdown {
            direction,
            bs_proc: 0,
            queue: 0,
            tdd_switch: 0,
            frame_align: 0,
            tx: 0,
            harq: 0,
            dg: 0,
            ue_proc: 0,
            total_symbols: 0,
        }
    }

    pub fn component_sum(&self) -> u64 {
        self.bs_proc + self.queue + self.tdd_switch + self.frame_align + self.tx + self.harq + self.dg + self.ue_proc
    }

    /// Buffering before the first transmission, processing excluded.
    pub fn scheduling_delay(&self) -> u64 {
        self.queue + self.tdd_switch + self.frame_align
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatencyError {
    #[error("no usable {direction} opportunity after symbol {from}")]
    ScheduleStarvation { direction: Direction, from: u64 },
}

/// Named stretch of a timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    BsProc,
    UeProc,
    UeUlPrep,
    TddSwitch,
    FrameAlign,
    Tx,
    CtrlAlign,
    GrantDelay,
    Nack,
    Sr,
    Sg,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::BsProc => "bs_proc",
            Stage::UeProc => "ue_proc",
            Stage::UeUlPrep => "ue_ul_prep",
            Stage::TddSwitch => "tdd_switch",
            Stage::FrameAlign => "frame_align",
            Stage::Tx => "tx",
            Stage::CtrlAlign => "ctrl_align",
            Stage::GrantDelay => "grant_delay",
            Stage::Nack => "nack",
            Stage::Sr => "sr",
            Stage::Sg => "sg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initial,
    DynamicGrant,
    Retransmission(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub stage: Stage,
    pub phase: Phase,
    pub start: u64,
    pub end: u64,
}

/// A walked timeline: breakdown plus the spans that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub arrival: u64,
    pub breakdown: LatencyBreakdown,
    pub spans: Vec<Span>,
}

struct Walker<'a, S: ?Sized> {
    sched: &'a S,
    t: u64,
    phase: Phase,
    bd: LatencyBreakdown,
    spans: Vec<Span>,
    arrival: u64,
}

impl<'a, S: LinkSchedule + ?Sized> Walker<'a, S> {
    fn new(sched: &'a S, arrival: u64, direction: Direction) -> Self {
        Walker { sched, t: arrival, phase: Phase::Initial, bd: LatencyBreakdown::zero(direction), spans: Vec::new(), arrival }
    }

    fn limit(&self) -> u64 {
        self.t.saturating_add(SEARCH_LIMIT_SLOTS * u64::from(SYMBOLS_PER_SLOT))
    }

    fn advance(&mut self, stage: Stage, dur: u64) {
        if dur == 0 {
            return;
        }
        self.spans.push(Span { stage, phase: self.phase, start: self.t, end: self.t + dur });
        self.t += dur;
        let bd = &mut self.bd;
        let slot = match self.phase {
            Phase::DynamicGrant => &mut bd.dg,
            Phase::Retransmission(_) => &mut bd.harq,
            Phase::Initial => match stage {
                Stage::BsProc => &mut bd.bs_proc,
                Stage::UeProc | Stage::UeUlPrep => &mut bd.ue_proc,
                Stage::TddSwitch => &mut bd.tdd_switch,
                Stage::FrameAlign => &mut bd.frame_align,
                Stage::Tx => &mut bd.tx,
                Stage::CtrlAlign | Stage::GrantDelay | Stage::Nack | Stage::Sr | Stage::Sg => {
                    unreachable!("control stages only occur in grant or HARQ phases")
                }
            },
        };
        *slot += dur;
    }

    fn wait_until(&mut self, stage: Stage, target: u64) {
        let dur = target.saturating_sub(self.t);
        self.advance(stage, dur);
    }

    fn align_ctrl(&mut self, dir: Direction) -> Result<(), LatencyError> {
        let at = next_ctrl_opportunity(self.sched, self.t, dir, self.limit())
            .ok_or(LatencyError::ScheduleStarvation { direction: dir, from: self.t })?;
        self.wait_until(Stage::CtrlAlign, at);
        Ok(())
    }

    /// Wait for the first usable TTI and send the packet in it.
    fn transmit(&mut self, dir: Direction) -> Result<(), LatencyError> {
        let start = first_usable_tti(self.sched, self.t, dir, self.limit())
            .ok_or(LatencyError::ScheduleStarvation { direction: dir, from: self.t })?;
        // Split the wait symbol by symbol; merge runs into spans.
        while self.t < start {
            let stage = if self.sched.availability(self.t).supports(dir) { Stage::FrameAlign } else { Stage::TddSwitch };
            let mut end = self.t + 1;
            while end < start && (self.sched.availability(end).supports(dir)) == (stage == Stage::FrameAlign) {
                end += 1;
            }
            self.wait_until(stage, end);
        }
        let len = self.sched.tti().len_at(start);
        self.advance(Stage::Tx, u64::from(len));
        Ok(())
    }

    fn finish(mut self) -> Timeline {
        self.bd.total_symbols = self.t - self.arrival;
        debug_assert_eq!(self.bd.total_symbols, self.bd.component_sum());
        Timeline { arrival: self.arrival, breakdown: self.bd, spans: self.spans }
    }
}

/// DL timeline of a single packet arriving at the BS at `arrival`, with
/// `n_harq` failed attempts before the successful one.
pub fn dl_timeline<S: LinkSchedule + ?Sized>(
    delays: &DelayConfig,
    sched: &S,
    arrival: u64,
    n_harq: u32,
) -> Result<Timeline, LatencyError> {
    let mut w = Walker::new(sched, arrival, Direction::Dl);
    w.advance(Stage::BsProc, delays.bs_proc.into());
    w.transmit(Direction::Dl)?;
    for k in 1..=n_harq {
        w.phase = Phase::Retransmission(k);
        w.advance(Stage::UeProc, delays.ue_proc_dl.into());
        w.align_ctrl(Direction::Ul)?;
        w.advance(Stage::Nack, delays.nack_tx_ul.into());
        w.advance(Stage::BsProc, delays.bs_proc.into());
        w.transmit(Direction::Dl)?;
    }
    w.phase = Phase::Initial;
    w.advance(Stage::UeProc, delays.ue_proc_dl.into());
    Ok(w.finish())
}

/// UL timeline of a single packet arriving in a UE buffer at `arrival`.
pub fn ul_timeline<S: LinkSchedule + ?Sized>(
    delays: &DelayConfig,
    sched: &S,
    arrival: u64,
    n_harq: u32,
    scheme: UlScheme,
) -> Result<Timeline, LatencyError> {
    let mut w = Walker::new(sched, arrival, Direction::Ul);
    match scheme {
        UlScheme::GrantFree => w.advance(Stage::UeUlPrep, delays.ue_proc_ul_prep.into()),
        UlScheme::DynamicGrant => {
            w.phase = Phase::DynamicGrant;
            w.advance(Stage::UeProc, delays.ue_proc_dl.into());
            let sr_at = next_sr_opportunity(sched, w.t, delays.sr_periodicity_ttis, w.limit())
                .ok_or(LatencyError::ScheduleStarvation { direction: Direction::Ul, from: w.t })?;
            w.wait_until(Stage::CtrlAlign, sr_at);
            w.advance(Stage::Sr, delays.sr_tx.into());
            w.advance(Stage::BsProc, delays.bs_proc.into());
            let grid = sched.tti();
            w.wait_until(Stage::GrantDelay, grid.start_of_index(grid.index_of(sr_at) + u64::from(delays.sg_delay_ttis)));
            w.align_ctrl(Direction::Dl)?;
            w.advance(Stage::Sg, delays.sg_tx.into());
            w.advance(Stage::UeUlPrep, delays.ue_proc_ul_prep.into());
            w.phase = Phase::Initial;
        }
    }
    w.transmit(Direction::Ul)?;
    for k in 1..=n_harq {
        w.phase = Phase::Retransmission(k);
        w.advance(Stage::BsProc, delays.bs_proc.into());
        w.align_ctrl(Direction::Dl)?;
        w.advance(Stage::Nack, delays.nack_tx_dl.into());
        w.advance(Stage::UeProc, delays.ue_proc_dl.into());
        w.transmit(Direction::Ul)?;
    }
    w.phase = Phase::Initial;
    w.advance(Stage::BsProc, delays.bs_proc.into());
    Ok(w.finish())
}

pub fn dl_latency<S: LinkSchedule + ?Sized>(
    delays: &DelayConfig,
    sched: &S,
    arrival: u64,
    n_harq: u32,
) -> Result<LatencyBreakdown, LatencyError> {
    dl_timeline(delays, sched, arrival, n_harq).map(|t| t.breakdown)
}

pub fn ul_latency<S: LinkSchedule + ?Sized>(
    delays: &DelayConfig,
    sched: &S,
    arrival: u64,
    n_harq: u32,
    scheme: UlScheme,
) -> Result<LatencyBreakdown, LatencyError> {
    ul_timeline(delays, sched, arrival, n_harq, scheme).map(|t| t.breakdown)
}

/// One-retransmission expectation: first-attempt latency plus `alpha` times
/// the duration of the HARQ chain in `with_retx`.
pub fn expected_latency(first_tx: &LatencyBreakdown, with_retx: &LatencyBreakdown, alpha: f64) -> f64 {
    first_tx.total_symbols as f64 + alpha * with_retx.harq as f64
}

impl fmt::Display for Timeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const BAR_MAX: u64 = 96;
        let bd = &self.breakdown;
        let total = bd.total_symbols;
        writeln!(f, "{} packet, arrival at symbol {}, total {} symbols", bd.direction, self.arrival, total)?;
        writeln!(f, "{:<6} {:<12} {:>6} {:>6} {:>5}", "phase", "stage", "start", "end", "len")?;
        for s in &self.spans {
            let phase = match s.phase {
                Phase::Initial => alloc::string::String::from("-"),
                Phase::DynamicGrant => alloc::string::String::from("grant"),
                Phase::Retransmission(k) => alloc::format!("harq{k}"),
            };
            write!(f, "{:<6} {:<12} {:>6} {:>6} {:>5} ", phase, s.stage.name(), s.start - self.arrival, s.end - self.arrival, s.end - s.start)?;
            if total <= BAR_MAX {
                for x in 0..total {
                    let c = if x >= s.start - self.arrival && x < s.end - self.arrival { '#' } else { '.' };
                    fmt::Write::write_char(f, c)?;
                }
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "bs_proc={} queue={} tdd_switch={} frame_align={} tx={} harq={} dg={} ue_proc={}",
            bd.bs_proc, bd.queue, bd.tdd_switch, bd.frame_align, bd.tx, bd.harq, bd.dg, bd.ue_proc
        )
    }
}

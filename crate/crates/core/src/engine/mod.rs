//! Multi-cell discrete-event simulator.
//!
//! Time advances in integer symbols. Events at the same symbol run in a
//! fixed order (pattern updates, arrivals, processing completions, TTI
//! scheduling, TTI completions) and then in insertion order, so a run is a
//! pure function of its configuration.
//!
//! Per cell and direction the BS serves HARQ retransmissions first and then
//! new packets, both oldest arrival first. A packet's first eligibility for
//! scheduling follows the same processing and control chains as the
//! closed-form timelines in [`crate::latency`], and its latency breakdown
//! is attributed with the same rules.

mod chain;
mod config;
mod plan;

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use config::{CapacityConfig, CliCoupling, OutcomeModel, SimConfig};
pub use plan::{ScheduleLog, SlotEntry};

use crate::duplexing::{
    buffered_ratio, data_symbols, fdd_partition, first_usable_tti, flexfdd_partition, select_slot_format,
    CellBuffers, DuplexMode, LinkSchedule, PrbPartition,
};
use crate::latency::{LatencyBreakdown, UlScheme};
use crate::numerology::SYMBOLS_PER_SLOT;
use crate::rng::{substream, StreamKind};
use crate::traffic::{generate_arrivals, Packet};
use crate::{ConfigError, Direction};
use chain::Chain;
use plan::CellPlan;

const SLOT: u64 = SYMBOLS_PER_SLOT as u64;

/// Final state of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Delivered,
    DroppedMaxHarq,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Delivered => "delivered",
            Outcome::DroppedMaxHarq => "dropped_max_harq",
        }
    }
}

/// Why a transmission attempt failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureCause {
    Channel,
    /// The cross-link interference penalty exceeded the base BLER.
    Cli,
}

/// Everything recorded about one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub packet: Packet,
    /// For dropped packets the breakdown stops at the end of the last
    /// attempt.
    pub breakdown: LatencyBreakdown,
    pub outcome: Outcome,
    pub delivery_symbol: Option<u64>,
    pub n_transmissions: u32,
    pub failures: Vec<FailureCause>,
}

impl PacketRecord {
    pub fn is_delivered(&self) -> bool {
        self.outcome == Outcome::Delivered
    }

    pub fn failures_by(&self, cause: FailureCause) -> usize {
        self.failures.iter().filter(|&&c| c == cause).count()
    }
}

/// Bookkeeping checks collected in audit mode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub checks: u64,
    pub violations: u64,
    /// The first few violations, verbatim.
    pub messages: Vec<String>,
}

impl AuditReport {
    fn fail(&mut self, msg: String) {
        self.violations += 1;
        if self.messages.len() < 16 {
            self.messages.push(msg);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// One record per generated packet, in id order.
    pub records: Vec<PacketRecord>,
    pub schedule_log: ScheduleLog,
    pub event_count: u64,
    /// Resource allocations (segments) handed out.
    pub grants_issued: u64,
    pub pattern_updates: u64,
    /// Symbol of the last processed event.
    pub end_symbol: u64,
    pub audit: Option<AuditReport>,
}

/// Generate traffic from `cfg` and simulate it to completion.
pub fn run(cfg: &SimConfig) -> Result<RunOutput, ConfigError> {
    cfg.validate()?;
    let arrivals = generate_arrivals(&cfg.traffic, cfg.n_cells, &cfg.numerology(), cfg.horizon_symbols, cfg.seed);
    Ok(Engine::new(cfg, arrivals).run())
}

/// Simulate an explicit arrival list. Packets must be sorted by arrival
/// symbol and carry ids `0, 1, 2, ...` in that order.
pub fn run_with_arrivals(cfg: &SimConfig, arrivals: Vec<Packet>) -> Result<RunOutput, ConfigError> {
    cfg.validate()?;
    for (i, p) in arrivals.iter().enumerate() {
        if p.id != i as u64 {
            return Err(ConfigError::invalid("arrivals", format!("packet at position {i} has id {}", p.id)));
        }
        if p.cell >= cfg.n_cells {
            return Err(ConfigError::invalid("arrivals", format!("packet {i} targets cell {}", p.cell)));
        }
        if p.size_bits == 0 {
            return Err(ConfigError::invalid("arrivals", format!("packet {i} is empty")));
        }
        if !cfg.fits_unsegmented(p.direction, p.size_bits) {
            return Err(ConfigError::invalid("arrivals", format!("packet {i} never fits one TTI without segmentation")));
        }
        if i > 0 && arrivals[i - 1].arrival_symbol > p.arrival_symbol {
            return Err(ConfigError::invalid("arrivals", "not sorted by arrival symbol"));
        }
    }
    Ok(Engine::new(cfg, arrivals).run())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    PatternUpdate(u32),
    Arrival(usize),
    Ready(usize),
    Deliver(usize),
    TtiStart(u32),
    TtiEnd(usize),
}

impl Event {
    fn priority(self) -> u8 {
        match self {
            Event::PatternUpdate(_) => 0,
            Event::Arrival(_) => 1,
            Event::Ready(_) | Event::Deliver(_) => 2,
            Event::TtiStart(_) => 3,
            Event::TtiEnd(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Pending,
    /// Processing or grant handshake before eligibility.
    Preparing,
    Queued,
    /// Fully allocated, waiting for the end of its last TTI.
    Awaiting,
    /// NACK round trip after a failed attempt.
    Feedback,
    Delivering,
    Delivered,
    Dropped,
}

struct PacketState {
    pkt: Packet,
    phase: Phase,
    attempt: u32,
    remaining: u32,
    ready: u64,
    first_start: u64,
    first_tx: u64,
    first_end: u64,
    last_end: u64,
    /// TTI windows of the current attempt.
    windows: Vec<(u64, u32)>,
    failures: Vec<FailureCause>,
}

#[derive(Default)]
struct DirQueue {
    /// `(arrival symbol, id)` for oldest-first service.
    retx: BTreeSet<(u64, usize)>,
    fresh: BTreeSet<(u64, usize)>,
}

impl DirQueue {
    fn len(&self) -> usize {
        self.retx.len() + self.fresh.len()
    }
}

struct Cell {
    plan: CellPlan,
    queues: [DirQueue; 2],
    z: [u64; 2],
    parked: Vec<Chain>,
    next_tti: Option<u64>,
    /// Bitset over TTI indices in which the cell sent DL data.
    dl_ttis: Vec<u64>,
    rng: [ChaCha8Rng; 2],
    suppressed: bool,
    in_flight: BTreeSet<usize>,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    cells: Vec<Cell>,
    packets: Vec<PacketState>,
    records: Vec<Option<PacketRecord>>,
    heap: BinaryHeap<Reverse<(u64, u8, u64, Event)>>,
    seq: u64,
    now: u64,
    next_arrival: usize,
    track_cli: bool,
    arrived: u64,
    delivered: u64,
    dropped: u64,
    pending_ready: u64,
    pending_end: u64,
    pending_deliver: u64,
    events: u64,
    grants: u64,
    updates: u64,
    audit: Option<AuditReport>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig, arrivals: Vec<Packet>) -> Self {
        let tti = cfg.tti();
        let n_prb = cfg.capacity.n_prb;
        let cells = (0..cfg.n_cells)
            .map(|c| {
                let plan = match &cfg.duplex {
                    DuplexMode::Fdd { dl_bandwidth_fraction } => {
                        CellPlan::paired(tti, fdd_partition(*dl_bandwidth_fraction, n_prb).expect("validated"))
                    }
                    DuplexMode::StaticTdd { pattern } => CellPlan::fixed_tdd(tti, pattern.clone(), n_prb),
                    DuplexMode::DynamicTdd { .. } => CellPlan::adaptive(tti, false),
                    DuplexMode::FlexibleFdd { .. } => CellPlan::adaptive(tti, true),
                };
                Cell {
                    plan,
                    queues: Default::default(),
                    z: [0; 2],
                    parked: Vec::new(),
                    next_tti: None,
                    dl_ttis: Vec::new(),
                    rng: Direction::BOTH.map(|d| substream(cfg.seed, StreamKind::Outcomes, c, 0, d)),
                    suppressed: false,
                    in_flight: BTreeSet::new(),
                }
            })
            .collect();
        let packets: Vec<PacketState> = arrivals
            .into_iter()
            .map(|pkt| PacketState {
                pkt,
                phase: Phase::Pending,
                attempt: 0,
                remaining: 0,
                ready: 0,
                first_start: 0,
                first_tx: 0,
                first_end: 0,
                last_end: 0,
                windows: Vec::new(),
                failures: Vec::new(),
            })
            .collect();
        let n = packets.len();
        Engine {
            cfg,
            cells,
            packets,
            records: (0..n).map(|_| None).collect(),
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0,
            next_arrival: 0,
            track_cli: !cfg.duplex.is_paired() && !cfg.cli.is_zero(),
            arrived: 0,
            delivered: 0,
            dropped: 0,
            pending_ready: 0,
            pending_end: 0,
            pending_deliver: 0,
            events: 0,
            grants: 0,
            updates: 0,
            audit: cfg.audit.then(AuditReport::default),
        }
    }

    fn push(&mut self, t: u64, ev: Event) {
        debug_assert!(t >= self.now);
        self.heap.push(Reverse((t, ev.priority(), self.seq, ev)));
        self.seq += 1;
    }

    fn push_next_arrival(&mut self) {
        if let Some(p) = self.packets.get(self.next_arrival) {
            let t = p.pkt.arrival_symbol;
            self.push(t, Event::Arrival(self.next_arrival));
            self.next_arrival += 1;
        }
    }

    fn run(mut self) -> RunOutput {
        if self.cfg.duplex.update_period_slots().is_some() {
            for c in 0..self.cfg.n_cells {
                self.push(0, Event::PatternUpdate(c));
            }
        }
        self.push_next_arrival();
        while let Some(Reverse((t, _, _, ev))) = self.heap.pop() {
            debug_assert!(t >= self.now, "event order went back in time");
            self.now = t;
            self.events += 1;
            match ev {
                Event::PatternUpdate(c) => self.on_pattern_update(c),
                Event::Arrival(i) => self.on_arrival(i),
                Event::Ready(i) => self.on_ready(i),
                Event::Deliver(i) => self.on_deliver(i),
                Event::TtiStart(c) => self.on_tti_start(c),
                Event::TtiEnd(i) => self.on_tti_end(i),
            }
            if self.audit.is_some() {
                self.audit_conservation();
            }
        }
        let unresolved = self.records.iter().filter(|r| r.is_none()).count();
        assert_eq!(unresolved, 0, "simulation ended with unresolved packets");
        let end_slot = self.now / SLOT + 1;
        RunOutput {
            records: self.records.into_iter().map(|r| r.expect("resolved")).collect(),
            schedule_log: ScheduleLog::new(self.cells.into_iter().map(|c| c.plan).collect(), end_slot),
            event_count: self.events,
            grants_issued: self.grants,
            pattern_updates: self.updates,
            end_symbol: self.now,
            audit: self.audit,
        }
    }

    fn outstanding(&self) -> u64 {
        self.packets.len() as u64 - self.delivered - self.dropped
    }

    fn on_pattern_update(&mut self, c: u32) {
        let period = self.cfg.duplex.update_period_slots().expect("adaptive mode");
        let slot = self.now / SLOT;
        if self.audit.is_some() {
            self.audit_buffers(c);
        }
        let cell = &mut self.cells[c as usize];
        let z = CellBuffers { z_dl_bits: cell.z[0], z_ul_bits: cell.z[1] };
        let ratio = buffered_ratio(z);
        cell.suppressed = ratio.is_none();
        let n_prb = self.cfg.capacity.n_prb;
        let entry = match &self.cfg.duplex {
            DuplexMode::FlexibleFdd { guard_prb_fraction, .. } => SlotEntry {
                format: None,
                partition: flex_partition(ratio, z, n_prb, *guard_prb_fraction),
                idle: ratio.is_none(),
            },
            _ => SlotEntry {
                format: Some(select_slot_format(ratio)),
                partition: PrbPartition { n_dl_prb: n_prb, n_ul_prb: n_prb, n_guard_prb: 0 },
                idle: ratio.is_none(),
            },
        };
        cell.plan.decide(slot, period, entry);
        self.updates += 1;
        let parked = core::mem::take(&mut self.cells[c as usize].parked);
        for chain in parked {
            self.start_chain(c, chain);
        }
        let next = self.now + u64::from(period) * SLOT;
        if next < self.cfg.horizon_symbols || self.outstanding() > 0 {
            self.push(next, Event::PatternUpdate(c));
        }
    }

    fn on_arrival(&mut self, i: usize) {
        let cfg = self.cfg;
        let d = &cfg.delays;
        let p = &mut self.packets[i];
        debug_assert_eq!(p.phase, Phase::Pending);
        p.phase = Phase::Preparing;
        p.attempt = 1;
        p.remaining = p.pkt.size_bits;
        let (c, dir, t) = (p.pkt.cell, p.pkt.direction, self.now);
        let chain = match (dir, cfg.ul_scheme) {
            (Direction::Dl, _) => Chain::dl_initial(i, t, d),
            (Direction::Ul, UlScheme::GrantFree) => Chain::ul_grant_free(i, t, d),
            (Direction::Ul, UlScheme::DynamicGrant) => Chain::ul_dynamic_grant(i, t, d),
        };
        let cell = &mut self.cells[c as usize];
        // A dynamic-grant packet is only known to the BS once granted.
        if !(dir == Direction::Ul && cfg.ul_scheme == UlScheme::DynamicGrant) {
            cell.z[dir.index()] += u64::from(p.pkt.size_bits);
            cell.suppressed = false;
        }
        cell.in_flight.insert(i);
        self.arrived += 1;
        self.start_chain(c, chain);
        self.push_next_arrival();
    }

    fn start_chain(&mut self, c: u32, mut chain: Chain) {
        let cell = &mut self.cells[c as usize];
        let limit = cell.plan.limit(chain.t);
        if chain.advance(&cell.plan, limit, &self.cfg.delays) {
            self.pending_ready += 1;
            self.push(chain.t, Event::Ready(chain.pkt));
        } else {
            cell.parked.push(chain);
        }
    }

    fn on_ready(&mut self, i: usize) {
        self.pending_ready -= 1;
        let now = self.now;
        let p = &mut self.packets[i];
        let key = (p.pkt.arrival_symbol, i);
        let dir = p.pkt.direction.index();
        let cell = &mut self.cells[p.pkt.cell as usize];
        let granted = p.pkt.direction == Direction::Ul && self.cfg.ul_scheme == UlScheme::DynamicGrant;
        if p.attempt == 1 {
            debug_assert_eq!(p.phase, Phase::Preparing);
            p.ready = now;
            cell.queues[dir].fresh.insert(key);
        } else {
            debug_assert_eq!(p.phase, Phase::Feedback);
            cell.queues[dir].retx.insert(key);
        }
        if p.attempt > 1 || granted {
            cell.z[dir] += u64::from(p.remaining);
            cell.suppressed = false;
        }
        p.phase = Phase::Queued;
        let c = p.pkt.cell;
        self.ensure_tti(c);
    }

    fn ensure_tti(&mut self, c: u32) {
        let cell = &mut self.cells[c as usize];
        if cell.next_tti.is_none() {
            let b = cell.plan.tti().next_boundary(self.now);
            cell.next_tti = Some(b);
            self.push(b, Event::TtiStart(c));
        }
    }

    fn on_tti_start(&mut self, c: u32) {
        let s = self.now;
        let seg = self.cfg.capacity.segmentation;
        let bits = u64::from(self.cfg.capacity.bits_per_prb_per_symbol);
        let cell = &mut self.cells[c as usize];
        cell.next_tti = None;
        let len = cell.plan.tti().len_at(s);
        let mut finished = Vec::new();
        for dir in Direction::BOTH {
            let di = dir.index();
            if cell.queues[di].len() == 0 {
                continue;
            }
            let ds = data_symbols(&cell.plan, s, len, dir);
            let mut cap = u64::from(cell.plan.prbs(s, dir)) * bits * u64::from(ds);
            if cap == 0 {
                continue;
            }
            let mut served = Vec::new();
            let q = &cell.queues[di];
            for &(_, i) in q.retx.iter().chain(q.fresh.iter()) {
                if cap == 0 {
                    break;
                }
                let rem = u64::from(self.packets[i].remaining);
                if !seg && rem > cap {
                    break;
                }
                let take = rem.min(cap);
                cap -= take;
                served.push((i, take as u32));
            }
            if served.is_empty() {
                continue;
            }
            if dir == Direction::Dl && self.track_cli {
                let idx = cell.plan.tti().index_of(s) as usize;
                if cell.dl_ttis.len() <= idx / 64 {
                    cell.dl_ttis.resize(idx / 64 + 1, 0);
                }
                cell.dl_ttis[idx / 64] |= 1 << (idx % 64);
            }
            for (i, take) in served {
                let p = &mut self.packets[i];
                if p.attempt == 1 && p.windows.is_empty() {
                    p.first_start = s;
                }
                p.windows.push((s, len));
                p.remaining -= take;
                cell.z[di] -= u64::from(take);
                self.grants += 1;
                if p.remaining == 0 {
                    let key = (p.pkt.arrival_symbol, i);
                    if !cell.queues[di].retx.remove(&key) {
                        cell.queues[di].fresh.remove(&key);
                    }
                    p.phase = Phase::Awaiting;
                    finished.push(i);
                }
            }
        }
        let more = cell.queues.iter().any(|q| q.len() > 0);
        let end = s + u64::from(len);
        if more {
            cell.next_tti = Some(end);
            self.push(end, Event::TtiStart(c));
        }
        for i in finished {
            self.pending_end += 1;
            self.push(end, Event::TtiEnd(i));
        }
    }

    fn on_tti_end(&mut self, i: usize) {
        self.pending_end -= 1;
        let e = self.now;
        let fail = self.attempt_fails(i);
        let cfg = self.cfg;
        let d = &cfg.delays;
        let p = &mut self.packets[i];
        p.last_end = e;
        if p.attempt == 1 {
            p.first_end = e;
            p.first_tx = p.windows.iter().map(|w| u64::from(w.1)).sum();
        }
        p.windows.clear();
        let c = p.pkt.cell;
        let dir = p.pkt.direction;
        match fail {
            Some(cause) => {
                p.failures.push(cause);
                if p.attempt > cfg.max_harq {
                    p.phase = Phase::Dropped;
                    self.dropped += 1;
                    self.cells[c as usize].in_flight.remove(&i);
                    self.resolve(i, None);
                } else {
                    p.attempt += 1;
                    p.remaining = p.pkt.size_bits;
                    p.phase = Phase::Feedback;
                    let chain = match dir {
                        Direction::Dl => Chain::dl_nack(i, e, d),
                        Direction::Ul => Chain::ul_nack(i, e, d),
                    };
                    self.start_chain(c, chain);
                }
            }
            None => {
                p.phase = Phase::Delivering;
                let tail = match dir {
                    Direction::Dl => d.ue_proc_dl,
                    Direction::Ul => d.bs_proc,
                };
                self.pending_deliver += 1;
                self.push(e + u64::from(tail), Event::Deliver(i));
            }
        }
    }

    fn on_deliver(&mut self, i: usize) {
        self.pending_deliver -= 1;
        self.delivered += 1;
        let p = &mut self.packets[i];
        p.phase = Phase::Delivered;
        self.cells[p.pkt.cell as usize].in_flight.remove(&i);
        self.resolve(i, Some(self.now));
    }

    /// Draw the outcome of the attempt that just ended; `Some(cause)` on
    /// failure.
    fn attempt_fails(&mut self, i: usize) -> Option<FailureCause> {
        let p = &self.packets[i];
        let base = if p.attempt == 1 { self.cfg.bler_base } else { self.cfg.bler_retx };
        match self.cfg.outcome {
            OutcomeModel::Forced { failures } => (p.attempt <= failures).then_some(FailureCause::Channel),
            OutcomeModel::Bernoulli => {
                let penalty = if p.pkt.direction == Direction::Ul && self.track_cli { self.cli_penalty(i) } else { 0.0 };
                let p_eff = (base + penalty).min(1.0);
                let c = p.pkt.cell as usize;
                let u: f64 = self.cells[c].rng[p.pkt.direction.index()].random();
                (u < p_eff).then_some(if penalty > base { FailureCause::Cli } else { FailureCause::Channel })
            }
        }
    }

    /// Sum over aggressors of `chi * (victim UL data symbols during which
    /// the aggressor sent DL data) / (victim UL data symbols)`.
    fn cli_penalty(&self, i: usize) -> f64 {
        let p = &self.packets[i];
        let victim = p.pkt.cell;
        let vplan = &self.cells[victim as usize].plan;
        let grid = vplan.tti();
        let aggressors: Vec<(usize, f64)> = (0..self.cfg.n_cells)
            .filter(|&j| j != victim)
            .map(|j| (j as usize, self.cfg.cli.get(victim, j)))
            .filter(|&(_, chi)| chi > 0.0)
            .collect();
        let mut overlap = vec![0u32; aggressors.len()];
        let mut data = 0u32;
        for &(s, len) in &p.windows {
            let idx = grid.index_of(s) as usize;
            for sym in s..s + u64::from(len) {
                if !vplan.availability(sym).supports(Direction::Ul) {
                    continue;
                }
                data += 1;
                for (k, &(j, _)) in aggressors.iter().enumerate() {
                    let agg = &self.cells[j];
                    let sent = agg.dl_ttis.get(idx / 64).is_some_and(|w| w & (1 << (idx % 64)) != 0);
                    if sent && agg.plan.availability(sym).supports(Direction::Dl) {
                        overlap[k] += 1;
                    }
                }
            }
        }
        if data == 0 {
            return 0.0;
        }
        aggressors.iter().zip(&overlap).map(|(&(_, chi), &o)| chi * f64::from(o) / f64::from(data)).sum()
    }

    fn resolve(&mut self, i: usize, delivery: Option<u64>) {
        let p = &self.packets[i];
        let d = &self.cfg.delays;
        let dir = p.pkt.direction;
        let plan = &self.cells[p.pkt.cell as usize].plan;
        let mut bd = LatencyBreakdown::zero(dir);
        let pre = p.ready - p.pkt.arrival_symbol;
        match (dir, self.cfg.ul_scheme) {
            (Direction::Dl, _) => bd.bs_proc += pre,
            (Direction::Ul, UlScheme::GrantFree) => bd.ue_proc += pre,
            (Direction::Ul, UlScheme::DynamicGrant) => bd.dg += pre,
        }
        let s0 = first_usable_tti(plan, p.ready, dir, p.first_start + 1).expect("first attempt used a usable TTI");
        for sym in p.ready..s0 {
            if plan.availability(sym).supports(dir) {
                bd.frame_align += 1;
            } else {
                bd.tdd_switch += 1;
            }
        }
        bd.queue = (p.first_start - s0) + (p.first_end - p.first_start - p.first_tx);
        bd.tx = p.first_tx;
        bd.harq = p.last_end - p.first_end;
        let end = match delivery {
            Some(t) => {
                match dir {
                    Direction::Dl => bd.ue_proc += u64::from(d.ue_proc_dl),
                    Direction::Ul => bd.bs_proc += u64::from(d.bs_proc),
                }
                t
            }
            None => p.last_end,
        };
        bd.total_symbols = end - p.pkt.arrival_symbol;
        debug_assert_eq!(bd.total_symbols, bd.component_sum());
        self.records[i] = Some(PacketRecord {
            packet: p.pkt,
            breakdown: bd,
            outcome: if delivery.is_some() { Outcome::Delivered } else { Outcome::DroppedMaxHarq },
            delivery_symbol: delivery,
            n_transmissions: p.attempt,
            failures: p.failures.clone(),
        });
    }

    fn audit_conservation(&mut self) {
        let queued: u64 = self.cells.iter().map(|c| c.queues.iter().map(|q| q.len() as u64).sum::<u64>()).sum();
        let parked: u64 = self.cells.iter().map(|c| c.parked.len() as u64).sum();
        let in_flight = queued + parked + self.pending_ready + self.pending_end + self.pending_deliver;
        let tracked: u64 = self.cells.iter().map(|c| c.in_flight.len() as u64).sum();
        let (now, arrived, delivered, dropped) = (self.now, self.arrived, self.delivered, self.dropped);
        let audit = self.audit.as_mut().expect("audit mode");
        audit.checks += 1;
        if arrived != delivered + dropped + in_flight || tracked != in_flight {
            audit.fail(format!(
                "symbol {now}: arrived {arrived} != delivered {delivered} + dropped {dropped} + in flight {in_flight} (tracked {tracked})"
            ));
        }
    }

    fn audit_buffers(&mut self, c: u32) {
        let cell = &self.cells[c as usize];
        let mut z = [0u64; 2];
        for &i in &cell.in_flight {
            let p = &self.packets[i];
            let granted = p.pkt.direction == Direction::Ul && self.cfg.ul_scheme == UlScheme::DynamicGrant;
            if p.phase == Phase::Queued || (p.phase == Phase::Preparing && !granted) {
                z[p.pkt.direction.index()] += u64::from(p.remaining);
            }
        }
        let (now, actual) = (self.now, cell.z);
        let audit = self.audit.as_mut().expect("audit mode");
        audit.checks += 1;
        if z != actual {
            audit.fail(format!("symbol {now}, cell {c}: buffer view {actual:?} != queued bits {z:?}"));
        }
    }
}

/// Flexible-FDD split for a buffered ratio; an empty system splits evenly.
/// A direction with buffered bits keeps at least one PRB.
fn flex_partition(ratio: Option<f64>, z: CellBuffers, n_prb: u32, guard: f64) -> PrbPartition {
    let mut p = flexfdd_partition(ratio.unwrap_or(0.5), n_prb, guard).expect("validated");
    if z.z_ul_bits > 0 && p.n_ul_prb == 0 && p.n_dl_prb > 1 {
        p.n_dl_prb -= 1;
        p.n_ul_prb += 1;
    }
    if z.z_dl_bits > 0 && p.n_dl_prb == 0 && p.n_ul_prb > 1 {
        p.n_ul_prb -= 1;
        p.n_dl_prb += 1;
    }
    p
}

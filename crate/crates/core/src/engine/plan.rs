//! Per-cell realized schedule: what each slot looked like (or will look
//! like, as far as it has been decided).

use alloc::vec::Vec;
use core::fmt;

use crate::duplexing::{LinkAvailability, LinkSchedule, PrbPartition, SlotFormat};
use crate::latency::SEARCH_LIMIT_SLOTS;
use crate::numerology::{TtiGrid, SYMBOLS_PER_SLOT};
use crate::Direction;

const SLOT: u64 = SYMBOLS_PER_SLOT as u64;

/// State of one cell during one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotEntry {
    /// Slot format under TDD; `None` on paired spectrum.
    pub format: Option<SlotFormat>,
    /// DL/UL/guard PRBs. Under TDD every PRB serves the slot's directions.
    pub partition: PrbPartition,
    /// The last pattern update saw empty buffers, so nothing was scheduled
    /// on the strength of it.
    pub idle: bool,
}

impl fmt::Display for SlotEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.format {
            Some(fmt_) => write!(f, "{fmt_}"),
            None => write!(f, "paired"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Link {
    Paired,
    Static(Vec<SlotFormat>),
    /// Decided at pattern updates; `(first slot, entry)` runs.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CellPlan {
    tti: TtiGrid,
    link: Link,
    /// Run-length encoded entries, sorted by first slot.
    runs: Vec<(u64, SlotEntry)>,
    /// First symbol whose schedule is not decided yet.
    known_until: u64,
}

impl CellPlan {
    pub(crate) fn paired(tti: TtiGrid, partition: PrbPartition) -> Self {
        CellPlan {
            tti,
            link: Link::Paired,
            runs: alloc::vec![(0, SlotEntry { format: None, partition, idle: false })],
            known_until: u64::MAX,
        }
    }

    pub(crate) fn fixed_tdd(tti: TtiGrid, pattern: Vec<SlotFormat>, n_prb: u32) -> Self {
        let partition = PrbPartition { n_dl_prb: n_prb, n_ul_prb: n_prb, n_guard_prb: 0 };
        CellPlan {
            tti,
            link: Link::Static(pattern),
            runs: alloc::vec![(0, SlotEntry { format: None, partition, idle: false })],
            known_until: u64::MAX,
        }
    }

    /// Nothing decided until the first update.
    pub(crate) fn adaptive(tti: TtiGrid, paired: bool) -> Self {
        CellPlan { tti, link: if paired { Link::Paired } else { Link::Adaptive }, runs: Vec::new(), known_until: 0 }
    }

    /// Search bound for opportunities starting at `from`.
    pub(crate) fn limit(&self, from: u64) -> u64 {
        self.known_until.min(from.saturating_add(SEARCH_LIMIT_SLOTS * SLOT))
    }

    /// Record the decision taken at `slot` for the next `period` slots.
    pub(crate) fn decide(&mut self, slot: u64, period: u32, entry: SlotEntry) {
        debug_assert_eq!(slot * SLOT, self.known_until);
        if self.runs.last().map(|r| r.1) != Some(entry) {
            self.runs.push((slot, entry));
        }
        self.known_until = (slot + u64::from(period)) * SLOT;
    }

    fn run_at(&self, slot: u64) -> &SlotEntry {
        let i = self.runs.partition_point(|r| r.0 <= slot);
        &self.runs[i.checked_sub(1).expect("slot before first decision")].1
    }

    pub(crate) fn entry(&self, slot: u64) -> SlotEntry {
        let mut e = *self.run_at(slot);
        if let Link::Static(p) = &self.link {
            e.format = Some(p[(slot % p.len() as u64) as usize]);
        }
        e
    }

    pub(crate) fn prbs(&self, symbol: u64, dir: Direction) -> u32 {
        self.run_at(symbol / SLOT).partition.for_direction(dir)
    }

    /// Slots covered by decisions so far, clipped to `end_slot`.
    pub(crate) fn decided_slots(&self, end_slot: u64) -> u64 {
        if self.known_until == u64::MAX {
            end_slot
        } else {
            (self.known_until / SLOT).min(end_slot)
        }
    }
}

impl LinkSchedule for CellPlan {
    fn tti(&self) -> TtiGrid {
        self.tti
    }

    fn availability(&self, symbol: u64) -> LinkAvailability {
        debug_assert!(symbol < self.known_until, "schedule queried beyond the decided horizon");
        let slot = symbol / SLOT;
        let local = (symbol % SLOT) as usize;
        match &self.link {
            Link::Paired => LinkAvailability::Both,
            Link::Static(p) => LinkAvailability::of_symbol(p[(slot % p.len() as u64) as usize].at(local)),
            Link::Adaptive => match self.run_at(slot).format {
                Some(f) => LinkAvailability::of_symbol(f.at(local)),
                None => LinkAvailability::Guard,
            },
        }
    }
}

/// Realized schedules of every cell, one entry per `(cell, slot)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleLog {
    plans: Vec<CellPlan>,
    n_slots: u64,
}

impl ScheduleLog {
    pub(crate) fn new(plans: Vec<CellPlan>, n_slots: u64) -> Self {
        ScheduleLog { plans, n_slots }
    }

    pub fn n_cells(&self) -> u32 {
        self.plans.len() as u32
    }

    /// Slots logged per cell (up to the end of the run).
    pub fn n_slots(&self) -> u64 {
        self.n_slots
    }

    pub fn entry(&self, cell: u32, slot: u64) -> Option<SlotEntry> {
        let plan = self.plans.get(cell as usize)?;
        (slot < plan.decided_slots(self.n_slots)).then(|| plan.entry(slot))
    }

    /// `(cell, slot, entry)` in cell-major order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u64, SlotEntry)> + '_ {
        self.plans.iter().enumerate().flat_map(move |(c, plan)| {
            (0..plan.decided_slots(self.n_slots)).map(move |s| (c as u32, s, plan.entry(s)))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duplexing::default_slot_format;
    use alloc::string::ToString;

    fn part(n: u32) -> PrbPartition {
        PrbPartition { n_dl_prb: n, n_ul_prb: n, n_guard_prb: 0 }
    }

    #[test]
    fn adaptive_runs() {
        let tti = TtiGrid::new(4).unwrap();
        let mut p = CellPlan::adaptive(tti, false);
        let a = SlotEntry { format: Some(default_slot_format()), partition: part(51), idle: true };
        let b = SlotEntry { format: Some("DDDDFUUUUDDDDF".parse().unwrap()), partition: part(51), idle: false };
        p.decide(0, 2, a);
        p.decide(2, 2, a);
        p.decide(4, 2, b);
        assert_eq!(p.runs.len(), 2);
        assert_eq!(p.known_until, 6 * 14);
        assert_eq!(p.entry(3), a);
        assert_eq!(p.entry(5), b);
        assert_eq!(p.availability(4 * 14 + 5), LinkAvailability::UlOnly);
        assert_eq!(p.availability(0), LinkAvailability::DlOnly);
        assert_eq!(p.limit(10), 84);
    }

    #[test]
    fn log_expands_runs() {
        let tti = TtiGrid::new(2).unwrap();
        let fdd = CellPlan::paired(tti, PrbPartition { n_dl_prb: 26, n_ul_prb: 25, n_guard_prb: 0 });
        let stat = CellPlan::fixed_tdd(tti, alloc::vec![default_slot_format(), "UUUUFUUUUDDDDF".parse().unwrap()], 51);
        assert_eq!(fdd.prbs(1000, Direction::Ul), 25);
        let log = ScheduleLog::new(alloc::vec![fdd, stat], 3);
        let all: Vec<_> = log.entries().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].2.to_string(), "paired");
        assert_eq!(all[4].2.to_string(), "UUUUFUUUUDDDDF");
        assert_eq!(all[5].2.to_string(), "DDDDDDFUUUUUUF");
        assert_eq!(log.entry(1, 3), None);
    }
}

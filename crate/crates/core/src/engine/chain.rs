//! Processing and control-signalling chains a packet walks through before
//! it becomes eligible for scheduling.
//!
//! A chain only depends on the cell's schedule, so it is advanced eagerly
//! as far as the schedule has been decided and parked when it needs a
//! symbol beyond that.

use crate::duplexing::{next_ctrl_opportunity, next_sr_opportunity, LinkSchedule};
use crate::latency::DelayConfig;
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    Wait(u32),
    /// Next symbol able to carry control in this direction.
    Ctrl(Direction),
    /// Next scheduling-request opportunity.
    SrOpp,
    /// Earliest grant instant: `sg_delay_ttis` TTIs after the SR's TTI.
    GrantGate,
}

const MAX_STEPS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Chain {
    pub(crate) pkt: usize,
    pub(crate) t: u64,
    steps: [Step; MAX_STEPS],
    len: u8,
    pos: u8,
    sr_at: u64,
}

impl Chain {
    fn new(pkt: usize, t: u64, steps: &[Step]) -> Self {
        let mut arr = [Step::Wait(0); MAX_STEPS];
        arr[..steps.len()].copy_from_slice(steps);
        Chain { pkt, t, steps: arr, len: steps.len() as u8, pos: 0, sr_at: 0 }
    }

    /// BS processing of a DL packet.
    pub(crate) fn dl_initial(pkt: usize, t: u64, d: &DelayConfig) -> Self {
        Chain::new(pkt, t, &[Step::Wait(d.bs_proc)])
    }

    /// Grant-free UL: transport-block preparation only.
    pub(crate) fn ul_grant_free(pkt: usize, t: u64, d: &DelayConfig) -> Self {
        Chain::new(pkt, t, &[Step::Wait(d.ue_proc_ul_prep)])
    }

    /// Dynamic-grant UL: SR, grant and preparation.
    pub(crate) fn ul_dynamic_grant(pkt: usize, t: u64, d: &DelayConfig) -> Self {
        Chain::new(
            pkt,
            t,
            &[
                Step::Wait(d.ue_proc_dl),
                Step::SrOpp,
                Step::Wait(d.sr_tx),
                Step::Wait(d.bs_proc),
                Step::GrantGate,
                Step::Ctrl(Direction::Dl),
                Step::Wait(d.sg_tx),
                Step::Wait(d.ue_proc_ul_prep),
            ],
        )
    }

    /// Failed DL attempt: UE decodes, NACKs on UL control, BS processes.
    pub(crate) fn dl_nack(pkt: usize, t: u64, d: &DelayConfig) -> Self {
        Chain::new(
            pkt,
            t,
            &[Step::Wait(d.ue_proc_dl), Step::Ctrl(Direction::Ul), Step::Wait(d.nack_tx_ul), Step::Wait(d.bs_proc)],
        )
    }

    /// Failed UL attempt: BS decodes, NACKs on DL control, UE processes.
    pub(crate) fn ul_nack(pkt: usize, t: u64, d: &DelayConfig) -> Self {
        Chain::new(
            pkt,
            t,
            &[Step::Wait(d.bs_proc), Step::Ctrl(Direction::Dl), Step::Wait(d.nack_tx_dl), Step::Wait(d.ue_proc_dl)],
        )
    }

    /// Advance as far as `limit` allows. `true` once the chain is complete,
    /// with `self.t` the eligibility instant.
    pub(crate) fn advance<S: LinkSchedule + ?Sized>(&mut self, sched: &S, limit: u64, d: &DelayConfig) -> bool {
        while self.pos < self.len {
            match self.steps[self.pos as usize] {
                Step::Wait(n) => self.t += u64::from(n),
                Step::Ctrl(dir) => match next_ctrl_opportunity(sched, self.t, dir, limit) {
                    Some(at) => self.t = at,
                    None => return false,
                },
                Step::SrOpp => match next_sr_opportunity(sched, self.t, d.sr_periodicity_ttis, limit) {
                    Some(at) => {
                        self.t = at;
                        self.sr_at = at;
                    }
                    None => return false,
                },
                Step::GrantGate => {
                    let grid = sched.tti();
                    let gate = grid.start_of_index(grid.index_of(self.sr_at) + u64::from(d.sg_delay_ttis));
                    self.t = self.t.max(gate);
                }
            }
            self.pos += 1;
        }
        true
    }
}

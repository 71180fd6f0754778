//! File formats: per-packet records, schedule logs, distribution curves,
//! key-value summaries and arrival traces.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use urllc_core::engine::{PacketRecord, ScheduleLog};
use urllc_core::metrics::{ccdf_points, BreakdownMean, Ecdf, LatencySeries};
use urllc_core::numerology::Numerology;
use urllc_core::traffic::Packet;
use urllc_core::Direction;

use crate::config::DirName;

/// Write through a temporary file in the same directory, then rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn dir_str(d: Direction) -> &'static str {
    match d {
        Direction::Dl => "dl",
        Direction::Ul => "ul",
    }
}

#[derive(Serialize)]
struct RecordRow {
    id: u64,
    cell: u32,
    ue: u32,
    dir: &'static str,
    arrival_symbol: u64,
    delivery_symbol: Option<u64>,
    outcome: &'static str,
    n_tx: u32,
    bs_proc: u64,
    queue: u64,
    tdd_switch: u64,
    frame_align: u64,
    tx: u64,
    dg: u64,
    harq: u64,
    ue_proc: u64,
    total_symbols: u64,
    total_us: f64,
}

/// One row per packet; `delivery_symbol` is empty for dropped packets.
pub fn records_csv(records: &[PacketRecord], num: &Numerology) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        let b = &r.breakdown;
        w.serialize(RecordRow {
            id: r.packet.id,
            cell: r.packet.cell,
            ue: r.packet.ue,
            dir: dir_str(r.packet.direction),
            arrival_symbol: r.packet.arrival_symbol,
            delivery_symbol: r.delivery_symbol,
            outcome: r.outcome.as_str(),
            n_tx: r.n_transmissions,
            bs_proc: b.bs_proc,
            queue: b.queue,
            tdd_switch: b.tdd_switch,
            frame_align: b.frame_align,
            tx: b.tx,
            dg: b.dg,
            harq: b.harq,
            ue_proc: b.ue_proc,
            total_symbols: b.total_symbols,
            total_us: num.symbols_to_us(b.total_symbols),
        })
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// One row per `(cell, slot)`: format string (`paired` on paired
/// spectrum), PRB split and the idle flag.
pub fn schedule_csv(log: &ScheduleLog) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cell", "slot", "format", "dl_prb", "ul_prb", "guard_prb", "idle"]).expect("in-memory write");
    for (cell, slot, e) in log.entries() {
        w.write_record([
            cell.to_string(),
            slot.to_string(),
            e.to_string(),
            e.partition.n_dl_prb.to_string(),
            e.partition.n_ul_prb.to_string(),
            e.partition.n_guard_prb.to_string(),
            e.idle.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `latency_us,exceedance` at every distinct sample. Header only when the
/// series is empty.
pub fn ccdf_csv(series: &LatencySeries) -> Vec<u8> {
    let mut out = String::from("latency_us,exceedance\n");
    if let Ok(points) = ccdf_points(series) {
        for (x, p) in points {
            writeln!(out, "{},{p}", series.to_us(x)).expect("string write");
        }
    }
    out.into_bytes()
}

/// `delay_us,cdf` at every distinct sample.
pub fn ecdf_csv(ecdf: Option<&Ecdf>, num: &Numerology) -> Vec<u8> {
    let mut out = String::from("delay_us,cdf\n");
    for (x, p) in ecdf.map(Ecdf::points).unwrap_or_default() {
        writeln!(out, "{},{p}", num.symbols_to_us(x)).expect("string write");
    }
    out.into_bytes()
}

/// `key=value` lines in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary(pub Vec<(String, String)>);

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push_breakdown(&mut self, prefix: &str, m: &BreakdownMean) {
        self.push(format!("{prefix}.packets"), m.count);
        for (name, v) in m.means() {
            self.push(format!("{prefix}.mean_{name}_symbols"), v);
        }
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Summary {
        Summary(
            text.lines()
                .filter_map(|l| l.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        )
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    id: u64,
    cell: u32,
    ue: u32,
    dir: DirName,
    bits: u32,
    symbol: u64,
}

/// Arrival trace: `id,cell,ue,dir,bits,symbol`.
pub fn trace_csv(arrivals: &[Packet]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in arrivals {
        w.serialize(TraceRow {
            id: p.id,
            cell: p.cell,
            ue: p.ue,
            dir: match p.direction {
                Direction::Dl => DirName::Dl,
                Direction::Ul => DirName::Ul,
            },
            bits: p.size_bits,
            symbol: p.arrival_symbol,
        })
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn read_trace(path: &Path) -> Result<Vec<Packet>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    r.deserialize::<TraceRow>()
        .map(|row| {
            let row = row.map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Packet {
                id: row.id,
                cell: row.cell,
                ue: row.ue,
                direction: row.dir.into(),
                size_bits: row.bits,
                arrival_symbol: row.symbol,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use urllc_core::metrics::SeriesTag;
    use urllc_core::numerology::Scs;

    #[test]
    fn trace_round_trips() {
        let pkts = vec![
            Packet { id: 0, cell: 0, ue: 1, direction: Direction::Dl, size_bits: 400, arrival_symbol: 3 },
            Packet { id: 1, cell: 2, ue: 0, direction: Direction::Ul, size_bits: 200, arrival_symbol: 9 },
        ];
        let bytes = trace_csv(&pkts);
        assert!(std::str::from_utf8(&bytes).unwrap().starts_with("id,cell,ue,dir,bits,symbol\n0,0,1,dl,400,3\n"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_atomic(&p, &bytes).unwrap();
        assert_eq!(read_trace(&p).unwrap(), pkts);
    }

    #[test]
    fn ccdf_file_layout() {
        let s = LatencySeries::new(SeriesTag { direction: None, scs: Scs::Khz30 }, vec![28, 28, 56]);
        let text = String::from_utf8(ccdf_csv(&s)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "latency_us,exceedance");
        assert!(lines[1].starts_with("1000,0.333"));
        assert_eq!(lines[2], "2000,0");
    }

    #[test]
    fn summary_text_round_trips() {
        let mut s = Summary::default();
        s.push("mode", "tdd");
        s.push("outage_1e-3.ul_symbols", 42);
        assert_eq!(Summary::parse(&s.to_text()), s);
        assert_eq!(s.get("mode"), Some("tdd"));
    }
}

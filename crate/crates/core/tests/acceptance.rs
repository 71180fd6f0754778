//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use urllc_core::duplexing::{default_slot_format, select_slot_format, CellSchedule, DuplexMode, SlotFormat, SlotSymbol};
use urllc_core::engine::{run, run_with_arrivals, CliCoupling, OutcomeModel, PacketRecord, RunOutput, SimConfig};
use urllc_core::latency::{dl_latency, reference_schedule, ul_latency, DelayConfig, UlScheme, REFERENCE_ARRIVAL};
use urllc_core::metrics::{outage_latency, scheduling_delay_ecdf, LatencySeries, SeriesTag};
use urllc_core::numerology::{Numerology, Scs, TtiGrid};
use urllc_core::traffic::{offered_load, Packet, TrafficConfig};
use urllc_core::Direction;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Table-I traffic scaled to `omega_mbps` per cell: 400-bit packets at
/// 125 packets/s, equal UE counts in both directions.
fn scaled_traffic(omega_mbps: f64) -> TrafficConfig {
    let k = (omega_mbps * 1e6 / (2.0 * 400.0 * 125.0)).round() as u32;
    let t = TrafficConfig { k_dl: k, k_ul: k, f_dl_bits: 400, f_ul_bits: 400, lambda_dl: 125.0, lambda_ul: 125.0 };
    assert!((offered_load(&t).total_bps - omega_mbps * 1e6).abs() < 1.0);
    t
}

fn seconds(scs: Scs, s: f64) -> u64 {
    (Numerology::new(scs).symbols_per_second() as f64 * s) as u64
}

fn fdd() -> DuplexMode {
    DuplexMode::Fdd { dl_bandwidth_fraction: 0.5 }
}

fn run_ok(cfg: &SimConfig) -> RunOutput {
    run(cfg).expect("valid config")
}

fn series(out: &RunOutput, dir: Option<Direction>, scs: Scs) -> LatencySeries {
    LatencySeries::from_records(&out.records, dir, scs)
}

fn outage(out: &RunOutput, dir: Option<Direction>, scs: Scs, eps: f64) -> u64 {
    outage_latency(&series(out, dir, scs), eps).expect("non-empty").symbols
}

fn mean_of(records: &[PacketRecord], dir: Direction, f: impl Fn(&PacketRecord) -> f64) -> f64 {
    let v: Vec<f64> = records.iter().filter(|r| r.is_delivered() && r.packet.direction == dir).map(f).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn golden_dl() -> Check {
    let b = dl_latency(&DelayConfig::reference(), &reference_schedule(), REFERENCE_ARRIVAL, 1).map_err(|e| e.to_string())?;
    ensure(b.total_symbols == 22, format!("total {} symbols", b.total_symbols))
}

fn golden_ul() -> Check {
    let b = ul_latency(&DelayConfig::reference(), &reference_schedule(), REFERENCE_ARRIVAL, 1, UlScheme::DynamicGrant)
        .map_err(|e| e.to_string())?;
    ensure(b.total_symbols == 30, format!("total {} symbols", b.total_symbols))
}

fn random_format(rng: &mut ChaCha8Rng) -> SlotFormat {
    loop {
        let s: String = (0..14).map(|_| ['D', 'U', 'F'][rng.random_range(0..3)]).collect();
        if let Ok(f) = s.parse() {
            return f;
        }
    }
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut done = 0;
    while done < 200 {
        let tti = TtiGrid::ALLOWED[rng.random_range(0..4)];
        let duplex = if rng.random_bool(0.2) {
            fdd()
        } else {
            DuplexMode::StaticTdd { pattern: (0..rng.random_range(1..4)).map(|_| random_format(&mut rng)).collect() }
        };
        let uep = rng.random_range(0..10);
        let delays = DelayConfig {
            bs_proc: rng.random_range(0..6),
            ue_proc_dl: uep,
            ue_proc_ul_prep: uep + rng.random_range(0..6),
            nack_tx_dl: rng.random_range(1..3),
            nack_tx_ul: rng.random_range(1..3),
            sr_tx: rng.random_range(1..3),
            sg_tx: rng.random_range(1..3),
            sr_periodicity_ttis: rng.random_range(1..20),
            sg_delay_ttis: rng.random_range(0..6),
            target_bler: 0.01,
        };
        let failures = rng.random_range(0..3);
        let dir = if rng.random_bool(0.5) { Direction::Dl } else { Direction::Ul };
        let scheme = if rng.random_bool(0.5) { UlScheme::DynamicGrant } else { UlScheme::GrantFree };
        let arrival = rng.random_range(0..300);
        let cfg = SimConfig {
            n_cells: 1,
            tti_symbols: tti,
            duplex: duplex.clone(),
            traffic: TrafficConfig { k_dl: 0, k_ul: 0, ..TrafficConfig::default() },
            delays: delays.clone(),
            ul_scheme: scheme,
            outcome: OutcomeModel::Forced { failures },
            horizon_symbols: 14,
            ..SimConfig::default()
        };
        if cfg.validate().is_err() {
            continue;
        }
        let grid = TtiGrid::new(tti).unwrap();
        let sched = match &duplex {
            DuplexMode::StaticTdd { pattern } => CellSchedule::repeating(grid, pattern.clone()),
            _ => CellSchedule::paired(grid),
        };
        let pkt = Packet { id: 0, cell: 0, ue: 0, direction: dir, size_bits: 100, arrival_symbol: arrival };
        let out = run_with_arrivals(&cfg, vec![pkt]).map_err(|e| e.to_string())?;
        let expected = match dir {
            Direction::Dl => dl_latency(&delays, &sched, arrival, failures),
            Direction::Ul => ul_latency(&delays, &sched, arrival, failures, scheme),
        }
        .map_err(|e| e.to_string())?;
        let got = out.records[0].breakdown.total_symbols;
        if got != expected.total_symbols {
            return Err(format!("scenario {done}: engine {got} vs closed form {}", expected.total_symbols));
        }
        done += 1;
    }
    Ok(format!("{done} scenarios agree"))
}

fn format_mapping() -> Check {
    let two_thirds = select_slot_format(Some(2.0 / 3.0)).to_string();
    if two_thirds != "DDDDFUUUUDDDDF" {
        return Err(format!("ratio 2/3 gave {two_thirds}"));
    }
    if select_slot_format(None) != default_slot_format() {
        return Err("undefined ratio did not give the default format".into());
    }
    for i in 0..=100 {
        let f = select_slot_format(Some(f64::from(i) / 100.0));
        if f.symbols().len() != 14 || !f.satisfies_guard_rule() || f.count(SlotSymbol::F) != 2 {
            return Err(format!("ratio {i}/100 gave malformed {f}"));
        }
    }
    let idle = SimConfig {
        n_cells: 3,
        traffic: TrafficConfig { k_dl: 0, k_ul: 0, ..TrafficConfig::default() },
        horizon_symbols: seconds(Scs::Khz30, 0.05),
        ..SimConfig::default()
    };
    let out = run_ok(&idle);
    let all_default = out.schedule_log.entries().all(|(_, _, e)| e.idle && e.format == Some(default_slot_format()));
    ensure(
        out.grants_issued == 0 && all_default,
        format!("2/3 -> {two_thirds}, 101 ratios well-formed, idle run grants {}", out.grants_issued),
    )
}

fn gf_vs_dg() -> Check {
    let base = SimConfig {
        traffic: scaled_traffic(0.5),
        horizon_symbols: seconds(Scs::Khz30, 8.0),
        ..SimConfig::default()
    };
    let (gf, dg) = std::thread::scope(|s| {
        let gf = s.spawn(|| run_ok(&SimConfig { ul_scheme: UlScheme::GrantFree, ..base.clone() }));
        let dg = s.spawn(|| run_ok(&SimConfig { ul_scheme: UlScheme::DynamicGrant, ..base.clone() }));
        (gf.join().unwrap(), dg.join().unwrap())
    });
    let n_gf = series(&gf, Some(Direction::Ul), Scs::Khz30).count();
    let n_dg = series(&dg, Some(Direction::Ul), Scs::Khz30).count();
    let o_gf = outage(&gf, Some(Direction::Ul), Scs::Khz30, 1e-3);
    let o_dg = outage(&dg, Some(Direction::Ul), Scs::Khz30, 1e-3);
    let mean_dg = mean_of(&dg.records, Direction::Ul, |r| r.breakdown.dg as f64);
    let gap = o_dg as f64 - o_gf as f64;
    ensure(
        n_gf >= 100_000 && n_dg >= 100_000 && gap >= 0.8 * mean_dg,
        format!("UL outage GF {o_gf} DG {o_dg} symbols, gap {gap} vs 0.8 x mean dg {mean_dg:.2}, {n_gf}/{n_dg} packets"),
    )
}

fn gamma_trend() -> Check {
    let base = SimConfig {
        traffic: scaled_traffic(2.5),
        horizon_symbols: seconds(Scs::Khz30, 1.0),
        ..SimConfig::default()
    };
    let modes = [DuplexMode::DynamicTdd { gamma_slots: 1 }, DuplexMode::DynamicTdd { gamma_slots: 20 }, fdd()];
    let outs: Vec<RunOutput> = std::thread::scope(|s| {
        let hs: Vec<_> = modes.iter().map(|m| s.spawn(|| run_ok(&SimConfig { duplex: m.clone(), ..base.clone() }))).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let o: Vec<u64> = outs.iter().map(|r| outage(r, None, Scs::Khz30, 1e-3)).collect();
    ensure(
        o[0] < o[1] && o[2] < o[0] && o[2] < o[1],
        format!("outage TDD slot {} frame {} FDD {} symbols", o[0], o[1], o[2]),
    )
}

fn cli_trend() -> Check {
    let base = SimConfig {
        n_cells: 3,
        traffic: scaled_traffic(1.0),
        horizon_symbols: seconds(Scs::Khz30, 10.0),
        ..SimConfig::default()
    };
    let (free, cli) = std::thread::scope(|s| {
        let a = s.spawn(|| run_ok(&SimConfig { cli: CliCoupling::none(3), ..base.clone() }));
        let b = s.spawn(|| run_ok(&SimConfig { cli: CliCoupling::symmetric(3, 0.3), ..base.clone() }));
        (a.join().unwrap(), b.join().unwrap())
    });
    let (o0, o1) = (outage(&free, Some(Direction::Ul), Scs::Khz30, 1e-3), outage(&cli, Some(Direction::Ul), Scs::Khz30, 1e-3));
    let tx = |o: &RunOutput| mean_of(&o.records, Direction::Ul, |r| f64::from(r.n_transmissions));
    let (t0, t1) = (tx(&free), tx(&cli));
    ensure(o1 > o0 && t1 > t0, format!("UL outage {o0} -> {o1} symbols, mean transmissions {t0:.4} -> {t1:.4}"))
}

fn scs_trend() -> Check {
    let mk = |scs| SimConfig {
        scs,
        traffic: scaled_traffic(2.5),
        capacity: urllc_core::engine::CapacityConfig { segmentation: false, ..Default::default() },
        horizon_symbols: seconds(scs, 1.0),
        ..SimConfig::default()
    };
    let (a, b) = std::thread::scope(|s| {
        let a = s.spawn(|| run_ok(&mk(Scs::Khz30)));
        let b = s.spawn(|| run_ok(&mk(Scs::Khz60)));
        (a.join().unwrap(), b.join().unwrap())
    });
    let (n30, n60) = (Numerology::new(Scs::Khz30), Numerology::new(Scs::Khz60));
    let halves = a.records.iter().filter(|r| r.is_delivered()).all(|r| {
        let s = r.breakdown.total_symbols;
        (n60.symbols_to_us(s) * 2.0 - n30.symbols_to_us(s)).abs() < 1e-9 * n30.symbols_to_us(s).max(1.0)
    });
    let u30 = outage_latency(&series(&a, None, Scs::Khz30), 1e-3).unwrap().us;
    let u60 = outage_latency(&series(&b, None, Scs::Khz60), 1e-3).unwrap().us;
    ensure(halves && u60 < u30, format!("per-packet halving {halves}, outage {u30:.1} -> {u60:.1} us"))
}

fn tti_trend() -> Check {
    let base = SimConfig {
        traffic: scaled_traffic(1.0),
        horizon_symbols: seconds(Scs::Khz30, 5.0),
        ..SimConfig::default()
    };
    let cfgs = [
        SimConfig { tti_symbols: 4, ..base.clone() },
        SimConfig { tti_symbols: 14, ..base.clone() },
        SimConfig { tti_symbols: 4, duplex: fdd(), ..base.clone() },
    ];
    let ecdfs: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = cfgs.iter().map(|c| s.spawn(|| scheduling_delay_ecdf(&run_ok(c).records).unwrap())).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let dominated = ecdfs[1].dominates(&ecdfs[0]);
    let m: Vec<u64> = ecdfs.iter().map(|e| e.median()).collect();
    // Largest excess of the mu=14 CDF over the mu=4 CDF; positive means the
    // curves cross there.
    let (worst_x, excess) = ecdfs[0]
        .points()
        .iter()
        .chain(ecdfs[1].points().iter())
        .map(|&(x, _)| (x, ecdfs[1].at(x) - ecdfs[0].at(x)))
        .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    ensure(
        dominated && m[2] < m[0] && m[2] < m[1],
        format!(
            "mu=14 dominates mu=4: {dominated} (max CDF excess {excess:.3} at {worst_x} symbols); \
             medians TDD4 {} TDD14 {} FDD4 {}; means {:.2} {:.2} {:.2}",
            m[0],
            m[1],
            m[2],
            ecdfs[0].mean(),
            ecdfs[1].mean(),
            ecdfs[2].mean()
        ),
    )
}

fn determinism_and_conservation() -> Check {
    let cfg = SimConfig {
        ul_scheme: UlScheme::DynamicGrant,
        cli: CliCoupling::symmetric(21, 0.1),
        horizon_symbols: seconds(Scs::Khz30, 0.25),
        audit: true,
        ..SimConfig::default()
    };
    let (a, b) = std::thread::scope(|s| {
        let a = s.spawn(|| run_ok(&cfg));
        let b = s.spawn(|| run_ok(&cfg));
        (a.join().unwrap(), b.join().unwrap())
    });
    let same = format!("{:?}", a.records) == format!("{:?}", b.records)
        && format!("{:?}", a.schedule_log) == format!("{:?}", b.schedule_log)
        && a.event_count == b.event_count;
    let audit = a.audit.as_ref().expect("audit enabled");
    ensure(
        same && a.records.len() >= 10_000 && audit.violations == 0 && audit.checks > 0,
        format!(
            "{} packets, identical reruns {same}, {} audit checks, {} violations",
            a.records.len(),
            audit.checks,
            audit.violations
        ),
    )
}

fn quantile_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tag = SeriesTag { direction: None, scs: Scs::Khz30 };
    let eps = [(1u64, 5u64), (1, 100), (1, 1000)];
    for i in 0..1000 {
        let n = rng.random_range(1..=10_000usize);
        let hi = rng.random_range(1..5000u64);
        let v: Vec<u64> = (0..n).map(|_| rng.random_range(0..hi)).collect();
        let mut sorted = v.clone();
        sorted.sort();
        let s = LatencySeries::new(tag, v);
        for (num, den) in eps {
            let rank = (n as u64 * (den - num)).div_ceil(den).max(1);
            let want = sorted[rank as usize - 1];
            let got = outage_latency(&s, num as f64 / den as f64).map_err(|e| e.to_string())?.symbols;
            if got != want {
                return Err(format!("series {i}, n {n}, eps {num}/{den}: {got} vs {want}"));
            }
        }
    }
    Ok("1000 series x 3 outage levels agree".into())
}

type Criterion = (&'static str, fn() -> Check, Duration);

fn main() {
    let criteria: [Criterion; 11] = [
        ("golden DL timeline", golden_dl, Duration::from_millis(1)),
        ("golden UL dynamic-grant timeline", golden_ul, Duration::from_millis(1)),
        ("engine matches closed form", oracle_equivalence, Duration::from_secs(10)),
        ("buffered-ratio format mapping", format_mapping, Duration::from_secs(1)),
        ("grant-free beats dynamic grant", gf_vs_dg, Duration::from_secs(120)),
        ("pattern update periodicity trend", gamma_trend, Duration::from_secs(300)),
        ("cross-link interference trend", cli_trend, Duration::from_secs(300)),
        ("sub-carrier spacing trend", scs_trend, Duration::from_secs(300)),
        ("TTI length trend", tti_trend, Duration::from_secs(300)),
        ("determinism and conservation", determinism_and_conservation, Duration::from_secs(60)),
        ("outage quantile oracle", quantile_oracle, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let res = f();
        let el = t0.elapsed();
        let (ok, detail) = match res {
            Ok(d) if el <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit {limit:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!("{} {:>2} {name}: {detail} [{el:.2?}]", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

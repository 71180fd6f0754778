//! Tail-latency statistics over packet records.
//!
//! Outage latency uses the conservative order statistic: the smallest
//! sample `x` with at most `floor(n * epsilon)` samples above it, i.e. the
//! sample at 1-indexed rank `ceil(n * (1 - epsilon))`. No interpolation.

use alloc::vec::Vec;

use crate::engine::PacketRecord;
use crate::latency::LatencyBreakdown;
use crate::numerology::{Numerology, Scs};
use crate::Direction;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("empty sample set")]
    Empty,
    #[error("outage probability {0} outside (0, 1)")]
    Epsilon(f64),
    #[error("cannot merge series tagged {a:?} and {b:?}")]
    TagMismatch { a: SeriesTag, b: SeriesTag },
}

/// Which packets a series holds and how its symbols convert to time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeriesTag {
    /// `None` pools both directions.
    pub direction: Option<Direction>,
    pub scs: Scs,
}

/// Sorted one-way latencies of delivered packets, in symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencySeries {
    tag: SeriesTag,
    symbols: Vec<u64>,
}

impl LatencySeries {
    pub fn new(tag: SeriesTag, mut symbols: Vec<u64>) -> Self {
        symbols.sort_unstable();
        LatencySeries { tag, symbols }
    }

    pub fn empty(tag: SeriesTag) -> Self {
        LatencySeries { tag, symbols: Vec::new() }
    }

    /// Total latency of delivered records matching `direction`.
    pub fn from_records<'a>(
        records: impl IntoIterator<Item = &'a PacketRecord>,
        direction: Option<Direction>,
        scs: Scs,
    ) -> Self {
        let symbols = records
            .into_iter()
            .filter(|r| r.is_delivered() && direction.is_none_or(|d| r.packet.direction == d))
            .map(|r| r.breakdown.total_symbols)
            .collect();
        LatencySeries::new(SeriesTag { direction, scs }, symbols)
    }

    pub fn tag(&self) -> SeriesTag {
        self.tag
    }

    pub fn count(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Samples in ascending order.
    pub fn symbols(&self) -> &[u64] {
        &self.symbols
    }

    pub fn to_us(&self, symbols: u64) -> f64 {
        Numerology::new(self.tag.scs).symbols_to_us(symbols)
    }

    /// Samples in microseconds, ascending.
    pub fn us(&self) -> impl Iterator<Item = f64> + '_ {
        let num = Numerology::new(self.tag.scs);
        self.symbols.iter().map(move |&s| num.symbols_to_us(s))
    }

    pub fn mean_symbols(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.symbols.iter().sum::<u64>() as f64 / self.count() as f64)
    }
}

/// Result of [`outage_latency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outage {
    pub symbols: u64,
    pub us: f64,
    /// 1-indexed order statistic used.
    pub rank: usize,
    /// `n * epsilon >= 10`: enough tail samples for a stable estimate.
    pub reliable: bool,
}

/// `floor(n * epsilon)`, snapping products within rounding error of an
/// integer (`1e5 * 1e-5` must count as exactly 1).
fn tail_count(n: usize, epsilon: f64) -> usize {
    let x = n as f64 * epsilon;
    let r = libm::round(x);
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        libm::floor(x) as usize
    }
}

/// The `(1 - epsilon)`-quantile of `series`.
pub fn outage_latency(series: &LatencySeries, epsilon: f64) -> Result<Outage, MetricsError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(MetricsError::Epsilon(epsilon));
    }
    let n = series.count();
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    let tail = tail_count(n, epsilon);
    let rank = (n - tail).max(1);
    let symbols = series.symbols[rank - 1];
    Ok(Outage { symbols, us: series.to_us(symbols), rank, reliable: tail >= 10 })
}

/// `P(X > x)` at each grid point (symbols).
pub fn ccdf(series: &LatencySeries, grid: &[u64]) -> Result<Vec<(u64, f64)>, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = series.count() as f64;
    Ok(grid
        .iter()
        .map(|&x| {
            let above = series.count() - series.symbols.partition_point(|&v| v <= x);
            (x, above as f64 / n)
        })
        .collect())
}

/// The empirical CCDF at every distinct sample value.
pub fn ccdf_points(series: &LatencySeries) -> Result<Vec<(u64, f64)>, MetricsError> {
    let mut grid = series.symbols.clone();
    grid.dedup();
    ccdf(series, &grid)
}

/// Merge two series with the same tag.
pub fn merge(a: &LatencySeries, b: &LatencySeries) -> Result<LatencySeries, MetricsError> {
    if a.tag != b.tag {
        return Err(MetricsError::TagMismatch { a: a.tag, b: b.tag });
    }
    let mut out = Vec::with_capacity(a.count() + b.count());
    let (mut i, mut j) = (0, 0);
    while i < a.symbols.len() && j < b.symbols.len() {
        if a.symbols[i] <= b.symbols[j] {
            out.push(a.symbols[i]);
            i += 1;
        } else {
            out.push(b.symbols[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a.symbols[i..]);
    out.extend_from_slice(&b.symbols[j..]);
    Ok(LatencySeries { tag: a.tag, symbols: out })
}

/// Empirical CDF over integer samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    samples: Vec<u64>,
}

impl Ecdf {
    pub fn new(mut samples: Vec<u64>) -> Result<Self, MetricsError> {
        if samples.is_empty() {
            return Err(MetricsError::Empty);
        }
        samples.sort_unstable();
        Ok(Ecdf { samples })
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    /// `P(X <= x)`.
    pub fn at(&self, x: u64) -> f64 {
        self.samples.partition_point(|&v| v <= x) as f64 / self.count() as f64
    }

    /// Smallest sample `x` with `P(X <= x) >= p`, for `p` in `(0, 1]`.
    pub fn quantile(&self, p: f64) -> u64 {
        let n = self.count();
        let k = libm::ceil(p.clamp(0.0, 1.0) * n as f64) as usize;
        self.samples[k.clamp(1, n) - 1]
    }

    pub fn median(&self) -> u64 {
        self.quantile(0.5)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<u64>() as f64 / self.count() as f64
    }

    /// `(x, P(X <= x))` at every distinct sample value.
    pub fn points(&self) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = Vec::new();
        let n = self.count() as f64;
        for (i, &v) in self.samples.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = (i + 1) as f64 / n,
                _ => out.push((v, (i + 1) as f64 / n)),
            }
        }
        out
    }

    /// Whether `self` is stochastically no smaller than `other`:
    /// `F_self(x) <= F_other(x)` at every sample point of either.
    pub fn dominates(&self, other: &Ecdf) -> bool {
        self.samples.iter().chain(&other.samples).all(|&x| self.at(x) <= other.at(x))
    }
}

/// ECDF of the scheduling delay (queueing, switching and alignment, no
/// processing) over delivered records of both directions.
pub fn scheduling_delay_ecdf<'a>(records: impl IntoIterator<Item = &'a PacketRecord>) -> Result<Ecdf, MetricsError> {
    Ecdf::new(records.into_iter().filter(|r| r.is_delivered()).map(|r| r.breakdown.scheduling_delay()).collect())
}

/// Running per-component sums for mean breakdowns; merges by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BreakdownMean {
    pub count: u64,
    pub bs_proc: u64,
    pub queue: u64,
    pub tdd_switch: u64,
    pub frame_align: u64,
    pub tx: u64,
    pub harq: u64,
    pub dg: u64,
    pub ue_proc: u64,
    pub total: u64,
}

impl BreakdownMean {
    pub fn add(&mut self, b: &LatencyBreakdown) {
        self.count += 1;
        self.bs_proc += b.bs_proc;
        self.queue += b.queue;
        self.tdd_switch += b.tdd_switch;
        self.frame_align += b.frame_align;
        self.tx += b.tx;
        self.harq += b.harq;
        self.dg += b.dg;
        self.ue_proc += b.ue_proc;
        self.total += b.total_symbols;
    }

    /// Delivered records matching `direction` (`None` for both).
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a PacketRecord>, direction: Option<Direction>) -> Self {
        let mut m = BreakdownMean::default();
        for r in records {
            if r.is_delivered() && direction.is_none_or(|d| r.packet.direction == d) {
                m.add(&r.breakdown);
            }
        }
        m
    }

    pub fn merge(&self, o: &BreakdownMean) -> BreakdownMean {
        BreakdownMean {
            count: self.count + o.count,
            bs_proc: self.bs_proc + o.bs_proc,
            queue: self.queue + o.queue,
            tdd_switch: self.tdd_switch + o.tdd_switch,
            frame_align: self.frame_align + o.frame_align,
            tx: self.tx + o.tx,
            harq: self.harq + o.harq,
            dg: self.dg + o.dg,
            ue_proc: self.ue_proc + o.ue_proc,
            total: self.total + o.total,
        }
    }

    /// `(name, mean symbols)` per component; `NaN` when empty.
    pub fn means(&self) -> [(&'static str, f64); 9] {
        let n = self.count as f64;
        let m = |x: u64| if self.count == 0 { f64::NAN } else { x as f64 / n };
        [
            ("bs_proc", m(self.bs_proc)),
            ("queue", m(self.queue)),
            ("tdd_switch", m(self.tdd_switch)),
            ("frame_align", m(self.frame_align)),
            ("tx", m(self.tx)),
            ("harq", m(self.harq)),
            ("dg", m(self.dg)),
            ("ue_proc", m(self.ue_proc)),
            ("total", m(self.total)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tag() -> SeriesTag {
        SeriesTag { direction: None, scs: Scs::Khz30 }
    }

    fn series(v: Vec<u64>) -> LatencySeries {
        LatencySeries::new(tag(), v)
    }

    /// Rank oracle with exact rational arithmetic: epsilon = num / den.
    fn oracle(samples: &[u64], num: u64, den: u64) -> u64 {
        let mut s = samples.to_vec();
        s.sort();
        let n = s.len() as u64;
        // ceil(n * (den - num) / den)
        let rank = (n * (den - num)).div_ceil(den);
        s[(rank.max(1) - 1) as usize]
    }

    #[test]
    fn outage_examples() {
        let s = series((1..=10).collect());
        assert_eq!(outage_latency(&s, 0.2).unwrap().symbols, 8);
        let c = series(vec![7; 33]);
        for eps in [0.5, 0.1, 1e-3] {
            assert_eq!(outage_latency(&c, eps).unwrap().symbols, 7);
        }
        let big = series((1..=100_000).collect());
        let o = outage_latency(&big, 1e-5).unwrap();
        // ceil(1e5 * (1 - 1e-5)) = 99999 exactly.
        assert_eq!((o.rank, o.symbols, o.reliable), (99_999, 99_999, false));
        assert!(outage_latency(&big, 1e-4).unwrap().reliable);
        assert_eq!(outage_latency(&series(vec![]), 0.1), Err(MetricsError::Empty));
        assert!(outage_latency(&s, 0.0).is_err());
        assert!(outage_latency(&s, 1.0).is_err());
    }

    #[test]
    fn outage_in_microseconds() {
        let s = series(vec![22, 30]);
        let o = outage_latency(&s, 0.4).unwrap();
        assert_eq!(o.symbols, 30);
        assert!((o.us - 1071.43).abs() < 0.01);
    }

    #[test]
    fn ccdf_examples() {
        let point = series(vec![5]);
        assert_eq!(ccdf(&point, &[4, 6]).unwrap(), vec![(4, 1.0), (6, 0.0)]);
        let u = series(vec![1, 2, 3, 4]);
        assert_eq!(ccdf(&u, &[2]).unwrap(), vec![(2, 0.5)]);
        assert_eq!(ccdf(&series(vec![]), &[1]), Err(MetricsError::Empty));
        assert_eq!(ccdf_points(&u).unwrap(), vec![(1, 0.75), (2, 0.5), (3, 0.25), (4, 0.0)]);
    }

    #[test]
    fn merge_examples() {
        let x = series(vec![3, 1, 2]);
        assert_eq!(merge(&x, &LatencySeries::empty(tag())).unwrap(), x);
        let a = series((1..=5).collect());
        let b = series((6..=10).collect());
        let m = merge(&a, &b).unwrap();
        assert_eq!(m, merge(&b, &a).unwrap());
        assert_eq!(outage_latency(&m, 0.2).unwrap().symbols, 8);
        let other = LatencySeries::new(SeriesTag { direction: Some(Direction::Ul), scs: Scs::Khz30 }, vec![1]);
        assert!(matches!(merge(&a, &other), Err(MetricsError::TagMismatch { .. })));
    }

    #[test]
    fn ecdf_basics() {
        let e = Ecdf::new(vec![0; 5]).unwrap();
        assert_eq!(e.points(), vec![(0, 1.0)]);
        assert_eq!(e.median(), 0);
        let f = Ecdf::new(vec![4, 1, 3, 2]).unwrap();
        assert_eq!(f.at(2), 0.5);
        assert_eq!(f.median(), 2);
        assert_eq!(f.quantile(1.0), 4);
        assert!(f.dominates(&e));
        assert!(!e.dominates(&f));
        assert!(Ecdf::new(vec![]).is_err());
    }

    #[test]
    fn scheduling_delay_is_field_sum() {
        use crate::engine::{Outcome, PacketRecord};
        use crate::traffic::Packet;
        let mut bd = LatencyBreakdown::zero(Direction::Ul);
        bd.tdd_switch = 9;
        bd.frame_align = 1;
        bd.bs_proc = 4;
        bd.total_symbols = 14;
        let rec = PacketRecord {
            packet: Packet { id: 0, cell: 0, ue: 0, direction: Direction::Ul, size_bits: 400, arrival_symbol: 0 },
            breakdown: bd,
            outcome: Outcome::Delivered,
            delivery_symbol: Some(14),
            n_transmissions: 1,
            failures: vec![],
        };
        let e = scheduling_delay_ecdf([&rec]).unwrap();
        assert_eq!(e.points(), vec![(10, 1.0)]);
        let mut m = BreakdownMean::from_records([&rec], Some(Direction::Ul));
        assert_eq!(m.means()[2], ("tdd_switch", 9.0));
        m = m.merge(&BreakdownMean::from_records([&rec], Some(Direction::Dl)));
        assert_eq!(m.count, 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn matches_rank_oracle(
                v in prop::collection::vec(0u64..5000, 1..2000),
                eps in prop::sample::select(vec![(1u64, 5u64), (1, 100), (1, 1000), (1, 10), (3, 7)]),
            ) {
                let e = eps.0 as f64 / eps.1 as f64;
                let s = series(v.clone());
                prop_assert_eq!(outage_latency(&s, e).unwrap().symbols, oracle(&v, eps.0, eps.1));
            }

            #[test]
            fn merge_then_outage_equals_concatenation(v in prop::collection::vec(0u64..500, 1..500), cut in any::<prop::sample::Index>()) {
                let k = cut.index(v.len() + 1);
                let m = merge(&series(v[..k].to_vec()), &series(v[k..].to_vec())).unwrap();
                prop_assert_eq!(&m, &series(v.clone()));
                for e in [0.2, 0.01, 0.001] {
                    prop_assert_eq!(outage_latency(&m, e).unwrap(), outage_latency(&series(v.clone()), e).unwrap());
                }
            }

            #[test]
            fn merge_is_associative_and_commutative(
                a in prop::collection::vec(0u64..50, 0..50),
                b in prop::collection::vec(0u64..50, 0..50),
                c in prop::collection::vec(0u64..50, 0..50),
            ) {
                let (a, b, c) = (series(a), series(b), series(c));
                prop_assert_eq!(merge(&a, &b).unwrap(), merge(&b, &a).unwrap());
                prop_assert_eq!(merge(&merge(&a, &b).unwrap(), &c).unwrap(), merge(&a, &merge(&b, &c).unwrap()).unwrap());
            }

            #[test]
            fn ccdf_is_a_probability_and_consistent(v in prop::collection::vec(0u64..300, 1..400), e in 0.001f64..0.5) {
                let s = series(v);
                let pts = ccdf_points(&s).unwrap();
                for w in pts.windows(2) {
                    prop_assert!(w[0].1 >= w[1].1);
                }
                prop_assert!(pts.iter().all(|p| (0.0..=1.0).contains(&p.1)));
                let o = outage_latency(&s, e).unwrap();
                prop_assert!(ccdf(&s, &[o.symbols]).unwrap()[0].1 <= e + 1e-12);
            }
        }
    }
}

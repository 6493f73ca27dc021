//! Compact interval-intersection index over independent interval sets.
//!
//! An independent set has no containment between any two members, so
//! sorted by start it is also sorted by end. For a query `[l, r]` the hits
//! in one set are the contiguous run between
//! `first = #{ends < l}` and `last = #{starts <= r}`; both counts are rank
//! queries on the set's Elias-Fano encoded endpoints.

mod decompose;
pub(crate) mod elias_fano;

use std::io::{Read, Write};

pub use decompose::{decompose_iis, set_assignment};
pub use elias_fano::{payload_bound_bits, EfSpace, EliasFano, SAMPLE_RATE};

use crate::error::{Error, Result};
use crate::model::{IntervalRecord, ScaleConfig, Tick, TickInterval};
use crate::temporal::{check_len, discretize_records, IntervalIndex};

/// Sets smaller than this are kept as plain sorted arrays.
pub const DEFAULT_SMALL_SET_THRESHOLD: usize = 16;

#[derive(Debug, Clone, PartialEq)]
enum Endpoints {
    Compact { starts: EliasFano, ends: EliasFano },
    Plain { starts: Vec<Tick>, ends: Vec<Tick> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependentSet {
    endpoints: Endpoints,
    /// Set-local rank -> record index.
    records: Vec<u32>,
}

impl IndependentSet {
    fn new(
        starts: Vec<Tick>,
        ends: Vec<Tick>,
        records: Vec<u32>,
        universe: u64,
        threshold: usize,
    ) -> Result<Self> {
        let endpoints = if records.len() < threshold {
            Endpoints::Plain { starts, ends }
        } else {
            Endpoints::Compact {
                starts: EliasFano::new(&starts, universe)?,
                ends: EliasFano::new(&ends, universe)?,
            }
        };
        Ok(IndependentSet { endpoints, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.endpoints, Endpoints::Compact { .. })
    }

    pub fn records(&self) -> &[u32] {
        &self.records
    }

    /// Set-local range of members intersecting `[l, r]`.
    fn hit_range(&self, l: Tick, r: Tick) -> std::ops::Range<usize> {
        let (first, last) = match &self.endpoints {
            Endpoints::Compact { starts, ends } => {
                let last = starts.rank(r);
                let first = if l == 0 { 0 } else { ends.rank(l - 1) };
                (first, last)
            }
            Endpoints::Plain { starts, ends } => (
                ends.partition_point(|&e| e < l),
                starts.partition_point(|&s| s <= r),
            ),
        };
        first..last.max(first)
    }

    pub fn interval(&self, i: usize) -> TickInterval {
        match &self.endpoints {
            Endpoints::Compact { starts, ends } => TickInterval {
                start: starts.get(i),
                end: ends.get(i),
            },
            Endpoints::Plain { starts, ends } => TickInterval {
                start: starts[i],
                end: ends[i],
            },
        }
    }

    fn starts_ends(&self) -> (Vec<Tick>, Vec<Tick>) {
        match &self.endpoints {
            Endpoints::Compact { starts, ends } => (starts.iter().collect(), ends.iter().collect()),
            Endpoints::Plain { starts, ends } => (starts.clone(), ends.clone()),
        }
    }

    pub fn space(&self) -> SetSpace {
        let id_bits = self.records.len() as u64 * 32;
        match &self.endpoints {
            Endpoints::Compact { starts, ends } => {
                let (s, e) = (starts.space(), ends.space());
                SetSpace {
                    len: self.len(),
                    starts: s,
                    ends: e,
                    plain_bits: 0,
                    id_bits,
                }
            }
            Endpoints::Plain { starts, ends } => SetSpace {
                len: self.len(),
                starts: EfSpace::default(),
                ends: EfSpace::default(),
                plain_bits: (starts.len() + ends.len()) as u64 * 64,
                id_bits,
            },
        }
    }
}

/// Bit accounting for one set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetSpace {
    pub len: usize,
    pub starts: EfSpace,
    pub ends: EfSpace,
    /// Endpoint bits of a set stored as plain arrays.
    pub plain_bits: u64,
    pub id_bits: u64,
}

impl SetSpace {
    pub fn total_bits(&self) -> u64 {
        self.starts.payload_bits
            + self.starts.select_bits
            + self.ends.payload_bits
            + self.ends.select_bits
            + self.plain_bits
            + self.id_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IisSpace {
    pub sets: Vec<SetSpace>,
    pub payload_bits: u64,
    pub select_bits: u64,
    pub plain_bits: u64,
    pub id_bits: u64,
    pub total_bits: u64,
}

/// The independent-interval-set index.
#[derive(Debug, Clone, PartialEq)]
pub struct IisIndex {
    sets: Vec<IndependentSet>,
    scale: ScaleConfig,
    len: usize,
    universe: u64,
    small_set_threshold: usize,
}

impl IisIndex {
    pub fn build(records: &[IntervalRecord], scale: ScaleConfig) -> Result<Self> {
        Self::from_ticks_with(
            discretize_records(records, scale)?,
            scale,
            DEFAULT_SMALL_SET_THRESHOLD,
        )
    }

    pub fn from_ticks(intervals: Vec<TickInterval>, scale: ScaleConfig) -> Result<Self> {
        Self::from_ticks_with(intervals, scale, DEFAULT_SMALL_SET_THRESHOLD)
    }

    /// `small_set_threshold = 0` encodes every set with Elias-Fano.
    pub fn from_ticks_with(
        intervals: Vec<TickInterval>,
        scale: ScaleConfig,
        small_set_threshold: usize,
    ) -> Result<Self> {
        check_len(intervals.len())?;
        let universe = intervals.iter().map(|iv| iv.end).max().map_or(0, |e| e + 1);
        let sets = decompose_iis(&intervals)
            .into_iter()
            .map(|members| {
                let starts = members
                    .iter()
                    .map(|&i| intervals[i as usize].start)
                    .collect();
                let ends = members.iter().map(|&i| intervals[i as usize].end).collect();
                IndependentSet::new(starts, ends, members, universe, small_set_threshold)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IisIndex {
            sets,
            scale,
            len: intervals.len(),
            universe,
            small_set_threshold,
        })
    }

    /// Number of independent sets `m`.
    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[IndependentSet] {
        &self.sets
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn small_set_threshold(&self) -> usize {
        self.small_set_threshold
    }

    pub fn space_report(&self) -> IisSpace {
        let sets: Vec<SetSpace> = self.sets.iter().map(IndependentSet::space).collect();
        let sum = |f: fn(&SetSpace) -> u64| sets.iter().map(f).sum::<u64>();
        let payload_bits = sum(|s| s.starts.payload_bits + s.ends.payload_bits);
        let select_bits = sum(|s| s.starts.select_bits + s.ends.select_bits);
        let plain_bits = sum(|s| s.plain_bits);
        let id_bits = sum(|s| s.id_bits);
        IisSpace {
            total_bits: payload_bits + select_bits + plain_bits + id_bits,
            sets,
            payload_bits,
            select_bits,
            plain_bits,
            id_bits,
        }
    }

    /// Set count as little-endian u64, then per set the starts and ends
    /// sequences and the record ids (u64 count, u32 values, zero padded to
    /// 8 bytes). Plain-array sets are written Elias-Fano encoded too.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&(self.sets.len() as u64).to_le_bytes())?;
        for set in &self.sets {
            match &set.endpoints {
                Endpoints::Compact { starts, ends } => {
                    starts.write_to(w)?;
                    ends.write_to(w)?;
                }
                Endpoints::Plain { starts, ends } => {
                    EliasFano::new(starts, self.universe)?.write_to(w)?;
                    EliasFano::new(ends, self.universe)?.write_to(w)?;
                }
            }
            w.write_all(&(set.records.len() as u64).to_le_bytes())?;
            for &id in &set.records {
                w.write_all(&id.to_le_bytes())?;
            }
            if set.records.len() % 2 == 1 {
                w.write_all(&[0; 4])?;
            }
        }
        Ok(())
    }

    /// Reads the layout of [`write_to`](Self::write_to); sets below
    /// `small_set_threshold` are decoded back to plain arrays.
    pub fn read_from<R: Read>(
        r: &mut R,
        scale: ScaleConfig,
        small_set_threshold: usize,
    ) -> Result<Self> {
        let set_count = elias_fano::read_u64(r)?;
        let mut sets = Vec::new();
        let mut len = 0usize;
        let mut universe = None;
        for _ in 0..set_count {
            let starts = EliasFano::read_from(r)?;
            let ends = EliasFano::read_from(r)?;
            let count = elias_fano::read_u64(r)?;
            if count as usize != starts.len() || count as usize != ends.len() || count == 0 {
                return Err(Error::Format("independent set sizes disagree".into()));
            }
            if *universe.get_or_insert(starts.universe()) != starts.universe()
                || ends.universe() != starts.universe()
            {
                return Err(Error::Format(
                    "independent sets disagree on the universe".into(),
                ));
            }
            let mut records = Vec::with_capacity(count as usize);
            let mut buf = [0u8; 4];
            for _ in 0..count {
                r.read_exact(&mut buf).map_err(elias_fano::truncated)?;
                records.push(u32::from_le_bytes(buf));
            }
            if count % 2 == 1 {
                r.read_exact(&mut buf).map_err(elias_fano::truncated)?;
            }
            let (s, e): (Vec<Tick>, Vec<Tick>) = (starts.iter().collect(), ends.iter().collect());
            if s.iter().zip(&e).any(|(a, b)| a > b) {
                return Err(Error::Format("interval starts after it ends".into()));
            }
            len += records.len();
            let endpoints = if records.len() < small_set_threshold {
                Endpoints::Plain { starts: s, ends: e }
            } else {
                Endpoints::Compact { starts, ends }
            };
            sets.push(IndependentSet { endpoints, records });
        }
        let mut seen = vec![false; len];
        for id in sets.iter().flat_map(|s| &s.records) {
            match seen.get_mut(*id as usize) {
                Some(slot) if !*slot => *slot = true,
                _ => return Err(Error::Format("record ids are not a permutation".into())),
            }
        }
        Ok(IisIndex {
            sets,
            scale,
            len,
            universe: universe.unwrap_or(0),
            small_set_threshold,
        })
    }

    /// Every stored interval, indexed by record.
    pub fn intervals(&self) -> Vec<TickInterval> {
        let mut out = vec![TickInterval { start: 0, end: 0 }; self.len];
        for set in &self.sets {
            let (starts, ends) = set.starts_ends();
            for (j, &rec) in set.records.iter().enumerate() {
                out[rec as usize] = TickInterval {
                    start: starts[j],
                    end: ends[j],
                };
            }
        }
        out
    }
}

impl IntervalIndex for IisIndex {
    fn len(&self) -> usize {
        self.len
    }

    fn scale(&self) -> ScaleConfig {
        self.scale
    }

    fn visit(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32)) {
        for set in &self.sets {
            for &rec in &set.records[set.hit_range(l, r)] {
                f(rec);
            }
        }
    }

    fn visit_hits(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32, TickInterval)) {
        for set in &self.sets {
            for j in set.hit_range(l, r) {
                f(set.records[j], set.interval(j));
            }
        }
    }

    fn space_bytes(&self) -> usize {
        self.space_report().total_bits.div_ceil(8) as usize + self.sets.len() * 8
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::testutil::*;

    fn build(iv: &[TickInterval], threshold: usize) -> IisIndex {
        IisIndex::from_ticks_with(iv.to_vec(), ScaleConfig::default(), threshold).unwrap()
    }

    #[test]
    fn empty_index() {
        let idx = build(&[], 0);
        assert_eq!(idx.set_count(), 0);
        assert!(idx.query(0, 100).unwrap().is_empty());
        assert_eq!(idx.space_report().payload_bits, 0);
    }

    #[test]
    fn three_interval_example() {
        let iv = ticks(&[(1, 4), (2, 3), (5, 8)]);
        for threshold in [0, 16] {
            let idx = build(&iv, threshold);
            assert_eq!(idx.set_count(), 2);
            check_against_oracle(&idx, &iv, &random_queries(200, 10, 5, 1));
        }
    }

    #[test]
    fn hand_evaluated_ranks() {
        let iv = ticks(&[(0, 2), (1, 3), (2, 4)]);
        let idx = build(&iv, 0);
        assert_eq!(idx.set_count(), 1);
        assert!(idx.sets()[0].is_compact());
        // last = #starts <= 3 = 3, first = #ends <= 2 = 1.
        assert_eq!(idx.sets()[0].hit_range(3, 3), 1..3);
        let mut got = idx.query(3, 3).unwrap();
        got.sort_unstable();
        assert_eq!(got, vec![1, 2]);
        assert!(idx.query(5, 9).unwrap().is_empty());
        assert!(idx.query(2, 1).is_err());
    }

    #[test]
    fn query_left_of_everything() {
        let iv = ticks(&[(10, 12), (11, 15)]);
        let idx = build(&iv, 0);
        assert!(idx.query(0, 9).unwrap().is_empty());
    }

    #[test]
    fn space_totals_are_additive() {
        let iv = random_intervals(5000, 1_000_000, 20_000, 4);
        let idx = build(&iv, 16);
        let report = idx.space_report();
        let sum: u64 = report.sets.iter().map(SetSpace::total_bits).sum();
        assert_eq!(sum, report.total_bits);
        assert_eq!(report.sets.iter().map(|s| s.len).sum::<usize>(), 5000);
    }

    #[test]
    fn random_and_adversarial_match_oracle() {
        let iv = random_intervals(10_000, 1_000_000, 30_000, 12);
        for threshold in [0, 16] {
            check_against_oracle(
                &build(&iv, threshold),
                &iv,
                &random_queries(300, 1_000_000, 40_000, 5),
            );
        }
        let iv = adversarial(8);
        for threshold in [0, 16] {
            check_against_oracle(
                &build(&iv, threshold),
                &iv,
                &random_queries(300, 650, 60, 6),
            );
        }
    }

    #[test]
    fn serialization_round_trip() {
        let iv = adversarial(1);
        for threshold in [0, 16] {
            let idx = build(&iv, threshold);
            let mut buf = Vec::new();
            idx.write_to(&mut buf).unwrap();
            assert_eq!(buf.len() % 8, 0);
            let back = IisIndex::read_from(&mut buf.as_slice(), ScaleConfig::default(), threshold)
                .unwrap();
            assert_eq!(back, idx);
            assert_eq!(back.intervals(), iv);
            assert!(IisIndex::read_from(
                &mut &buf[..buf.len() / 2],
                ScaleConfig::default(),
                threshold
            )
            .is_err());
        }
    }
}

//! Interval-intersection indexes for the temporal level.
//!
//! Every backend answers the same closed-interval question on ticks:
//! which stored intervals `[s, e]` satisfy `s <= r && e >= l` for a query
//! `[l, r]`. Results are record indices into the build input.

pub mod interval_tree;
pub mod linear;
pub mod schmidt;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::iis::IisIndex;
use crate::model::{discretize_time, IntervalRecord, ScaleConfig, Tick, TickInterval};

pub use interval_tree::IntervalTree;
pub use linear::LinearScan;
pub use schmidt::SchmidtIndex;

/// The contract shared by every temporal backend.
pub trait IntervalIndex {
    /// Number of stored intervals.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scale the stored ticks were discretized with.
    fn scale(&self) -> ScaleConfig;

    /// Calls `f` with the index of every stored interval intersecting
    /// `[l, r]`, each exactly once. Requires `l <= r`.
    fn visit(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32));

    /// Like [`visit`](Self::visit), also passing the matched interval.
    fn visit_hits(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32, TickInterval));

    /// Accounted in-structure bytes.
    fn space_bytes(&self) -> usize;

    fn query(&self, l: Tick, r: Tick) -> Result<Vec<usize>> {
        if l > r {
            return Err(Error::invalid_query(l, r));
        }
        let mut out = Vec::new();
        self.visit(l, r, &mut |i| out.push(i as usize));
        Ok(out)
    }

    /// Discretizes `[t_start, t_end]` with the index's own scale, then queries.
    fn query_time(&self, t_start: f64, t_end: f64) -> Result<Vec<usize>> {
        if t_start > t_end {
            return Err(Error::invalid_query(t_start, t_end));
        }
        let scale = self.scale();
        self.query(
            discretize_time(t_start, scale)?,
            discretize_time(t_end, scale)?,
        )
    }
}

/// Ascending indices of the intervals intersecting `[l, r]`.
pub fn brute_force_intersect(intervals: &[TickInterval], l: Tick, r: Tick) -> Result<Vec<usize>> {
    if l > r {
        return Err(Error::invalid_query(l, r));
    }
    Ok(intervals
        .iter()
        .enumerate()
        .filter(|(_, iv)| iv.intersects(l, r))
        .map(|(i, _)| i)
        .collect())
}

pub fn discretize_records(
    records: &[IntervalRecord],
    scale: ScaleConfig,
) -> Result<Vec<TickInterval>> {
    records
        .iter()
        .map(|r| r.interval.discretize(scale))
        .collect()
}

pub(crate) fn check_len(n: usize) -> Result<()> {
    if n >= u32::MAX as usize {
        return Err(Error::InvalidInput(format!(
            "{n} intervals exceed the per-index limit"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Iis,
    IntervalTree,
    Schmidt,
    Linear,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::Iis,
        Backend::IntervalTree,
        Backend::Schmidt,
        Backend::Linear,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Iis => "iis",
            Backend::IntervalTree => "interval-tree",
            Backend::Schmidt => "schmidt",
            Backend::Linear => "linear",
        }
    }

    pub(crate) fn tag(&self) -> u8 {
        match self {
            Backend::Iis => 0,
            Backend::IntervalTree => 1,
            Backend::Schmidt => 2,
            Backend::Linear => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Backend> {
        Backend::ALL.into_iter().find(|b| b.tag() == tag)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iis" => Ok(Backend::Iis),
            "interval-tree" | "interval_tree" => Ok(Backend::IntervalTree),
            "schmidt" => Ok(Backend::Schmidt),
            "linear" => Ok(Backend::Linear),
            other => Err(Error::Config(format!(
                "unknown backend `{other}` (expected iis, interval-tree, schmidt or linear)"
            ))),
        }
    }
}

/// A built temporal index of any backend.
#[derive(Debug, Clone)]
pub enum TemporalIndex {
    Iis(IisIndex),
    IntervalTree(IntervalTree),
    Schmidt(SchmidtIndex),
    Linear(LinearScan),
}

impl TemporalIndex {
    /// Builds `backend` over already-discretized intervals. `small_threshold`
    /// is forwarded to the IIS backend as its plain-array set threshold.
    pub fn build_ticks(
        backend: Backend,
        intervals: Vec<TickInterval>,
        scale: ScaleConfig,
        small_threshold: usize,
    ) -> Result<Self> {
        Ok(match backend {
            Backend::Iis => TemporalIndex::Iis(IisIndex::from_ticks_with(
                intervals,
                scale,
                small_threshold,
            )?),
            Backend::IntervalTree => {
                TemporalIndex::IntervalTree(IntervalTree::from_ticks(intervals, scale)?)
            }
            Backend::Schmidt => TemporalIndex::Schmidt(SchmidtIndex::from_ticks(intervals, scale)?),
            Backend::Linear => TemporalIndex::Linear(LinearScan::from_ticks(intervals, scale)?),
        })
    }

    pub fn build(backend: Backend, records: &[IntervalRecord], scale: ScaleConfig) -> Result<Self> {
        let ticks = discretize_records(records, scale)?;
        Self::build_ticks(
            backend,
            ticks,
            scale,
            crate::iis::DEFAULT_SMALL_SET_THRESHOLD,
        )
    }

    pub fn backend(&self) -> Backend {
        match self {
            TemporalIndex::Iis(_) => Backend::Iis,
            TemporalIndex::IntervalTree(_) => Backend::IntervalTree,
            TemporalIndex::Schmidt(_) => Backend::Schmidt,
            TemporalIndex::Linear(_) => Backend::Linear,
        }
    }

    fn inner(&self) -> &dyn IntervalIndex {
        match self {
            TemporalIndex::Iis(i) => i,
            TemporalIndex::IntervalTree(i) => i,
            TemporalIndex::Schmidt(i) => i,
            TemporalIndex::Linear(i) => i,
        }
    }

    /// Number of independent sets, for the IIS backend.
    pub fn set_count(&self) -> Option<usize> {
        match self {
            TemporalIndex::Iis(i) => Some(i.set_count()),
            _ => None,
        }
    }
}

impl IntervalIndex for TemporalIndex {
    fn len(&self) -> usize {
        self.inner().len()
    }

    fn scale(&self) -> ScaleConfig {
        self.inner().scale()
    }

    fn visit(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32)) {
        self.inner().visit(l, r, f)
    }

    fn visit_hits(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32, TickInterval)) {
        self.inner().visit_hits(l, r, f)
    }

    fn space_bytes(&self) -> usize {
        self.inner().space_bytes()
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn brute_force_examples() {
        let iv = ticks(&[(1, 3), (2, 5), (6, 9)]);
        assert_eq!(brute_force_intersect(&iv, 4, 7).unwrap(), vec![1, 2]);
        assert!(brute_force_intersect(&iv, 10, 12).unwrap().is_empty());
        assert_eq!(brute_force_intersect(&iv, 0, 100).unwrap(), vec![0, 1, 2]);
        assert!(matches!(
            brute_force_intersect(&iv, 5, 4),
            Err(Error::InvalidQuery { .. })
        ));
    }

    #[test]
    fn backend_names_round_trip() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
            assert_eq!(Backend::from_tag(b.tag()), Some(b));
        }
        assert!("rtree".parse::<Backend>().is_err());
    }

    #[test]
    fn every_backend_agrees_on_adversarial_input() {
        let iv = adversarial(11);
        let queries = random_queries(300, 650, 80, 2);
        for b in Backend::ALL {
            for threshold in [0, 16] {
                let idx =
                    TemporalIndex::build_ticks(b, iv.clone(), ScaleConfig::default(), threshold)
                        .unwrap();
                assert_eq!(idx.backend(), b);
                assert_eq!(idx.len(), iv.len());
                check_against_oracle(&idx, &iv, &queries);
            }
        }
    }

    #[test]
    fn query_time_uses_own_scale() {
        let scale = ScaleConfig::new(2).unwrap();
        let records = vec![
            IntervalRecord::new(0, crate::model::TimeInterval::new(1.0, 2.0).unwrap()),
            IntervalRecord::new(1, crate::model::TimeInterval::new(2.5, 3.0).unwrap()),
        ];
        for b in Backend::ALL {
            let idx = TemporalIndex::build(b, &records, scale).unwrap();
            let mut got = idx.query_time(2.0, 2.49).unwrap();
            got.sort_unstable();
            assert_eq!(got, vec![0]);
            assert!(idx.query_time(3.0, 2.0).is_err());
        }
    }
}

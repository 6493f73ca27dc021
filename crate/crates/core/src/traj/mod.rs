//! The two-level trajectory index.
//!
//! A range query runs the window through the R-tree, drops candidates whose
//! segment geometry misses the window, queries each surviving segment's
//! temporal index with the discretized time range, and unions the matched
//! object ids.

mod format;

use std::collections::{BTreeMap, HashSet};

pub use format::{load_index, read_index, save_index, write_index, FORMAT_VERSION, MAGIC};

use crate::datagen::Network;
use crate::error::{Error, Result};
use crate::model::{
    discretize_time, segment_intersects_window, IntervalRecord, ObjectId, Rect, ScaleConfig,
    SegmentId, TickInterval,
};
use crate::rtree::{RTree, RTreeEntry, DEFAULT_FANOUT};
use crate::temporal::{Backend, IntervalIndex, TemporalIndex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajIndexConfig {
    pub backend: Backend,
    pub scale: ScaleConfig,
    pub fanout: usize,
    /// Segments with fewer records use a linear scan; IIS sets below it are
    /// stored as plain arrays.
    pub small_threshold: usize,
}

impl Default for TrajIndexConfig {
    fn default() -> Self {
        TrajIndexConfig {
            backend: Backend::Iis,
            scale: ScaleConfig::default(),
            fanout: DEFAULT_FANOUT,
            small_threshold: crate::iis::DEFAULT_SMALL_SET_THRESHOLD,
        }
    }
}

impl TrajIndexConfig {
    pub fn with_backend(backend: Backend) -> Self {
        TrajIndexConfig {
            backend,
            ..Default::default()
        }
    }
}

/// A spatio-temporal range query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeQuery {
    pub window: Rect,
    pub t_start: f64,
    pub t_end: f64,
}

/// One matched traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Match {
    pub object_id: ObjectId,
    pub segment_id: SegmentId,
    pub interval: TickInterval,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryResult {
    /// Ascending, without duplicates.
    pub object_ids: Vec<ObjectId>,
    /// Present for verbose queries, sorted.
    pub matches: Option<Vec<Match>>,
}

#[derive(Debug, Clone)]
pub(crate) struct SegmentTemporal {
    /// Local record index -> object.
    pub(crate) objects: Vec<ObjectId>,
    pub(crate) index: TemporalIndex,
}

#[derive(Debug, Clone)]
pub struct TrajIndex {
    network: Network,
    rtree: RTree,
    temporal: Vec<Option<SegmentTemporal>>,
    cfg: TrajIndexConfig,
    record_count: usize,
}

impl TrajIndex {
    pub fn build(
        network: Network,
        records: &[(SegmentId, IntervalRecord)],
        cfg: TrajIndexConfig,
    ) -> Result<Self> {
        let entries = network
            .segments()
            .iter()
            .map(|s| RTreeEntry {
                id: s.id,
                mbb: s.mbb(),
            })
            .collect();
        let rtree = RTree::build(entries, cfg.fanout)?;

        let mut per_segment: Vec<(Vec<ObjectId>, Vec<TickInterval>)> =
            vec![Default::default(); network.edge_count()];
        for (i, (seg, rec)) in records.iter().enumerate() {
            let slot = per_segment
                .get_mut(*seg as usize)
                .ok_or_else(|| Error::Ingestion {
                    record: i,
                    message: format!("segment {seg} is not part of the network"),
                })?;
            let ticks = rec
                .interval
                .discretize(cfg.scale)
                .map_err(|e| Error::Ingestion {
                    record: i,
                    message: e.to_string(),
                })?;
            slot.0.push(rec.object_id);
            slot.1.push(ticks);
        }
        let temporal = per_segment
            .into_iter()
            .map(|(objects, ticks)| {
                if objects.is_empty() {
                    return Ok(None);
                }
                let backend = if objects.len() < cfg.small_threshold {
                    Backend::Linear
                } else {
                    cfg.backend
                };
                let index =
                    TemporalIndex::build_ticks(backend, ticks, cfg.scale, cfg.small_threshold)?;
                Ok(Some(SegmentTemporal { objects, index }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrajIndex {
            network,
            rtree,
            temporal,
            cfg,
            record_count: records.len(),
        })
    }

    pub(crate) fn from_parts(
        network: Network,
        rtree: RTree,
        temporal: Vec<Option<SegmentTemporal>>,
        cfg: TrajIndexConfig,
    ) -> Self {
        let record_count = temporal.iter().flatten().map(|t| t.objects.len()).sum();
        TrajIndex {
            network,
            rtree,
            temporal,
            cfg,
            record_count,
        }
    }

    pub fn config(&self) -> &TrajIndexConfig {
        &self.cfg
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn rtree(&self) -> &RTree {
        &self.rtree
    }

    pub(crate) fn temporal_slots(&self) -> &[Option<SegmentTemporal>] {
        &self.temporal
    }

    pub fn record_count(&self) -> usize {
        self.record_count
    }

    /// Backend actually used for a segment, if it has records.
    pub fn segment_backend(&self, id: SegmentId) -> Option<Backend> {
        self.temporal
            .get(id as usize)?
            .as_ref()
            .map(|t| t.index.backend())
    }

    /// Temporal index of a segment, if it has records.
    pub fn temporal_index(&self, id: SegmentId) -> Option<&TemporalIndex> {
        self.temporal.get(id as usize)?.as_ref().map(|t| &t.index)
    }

    /// Segments that geometrically intersect `window`; exactly the set whose
    /// temporal indexes a query consults (when they have records).
    pub fn candidate_segments(&self, window: &Rect) -> Vec<SegmentId> {
        let mut out = Vec::new();
        self.rtree.for_each_in_window(window, |id| {
            if segment_intersects_window(&self.network.segments()[id as usize], window) {
                out.push(id);
            }
        });
        out
    }

    fn run(&self, window: &Rect, t_start: f64, t_end: f64, verbose: bool) -> Result<QueryResult> {
        if t_start > t_end {
            return Err(Error::invalid_query(t_start, t_end));
        }
        let l = discretize_time(t_start, self.cfg.scale)?;
        let r = discretize_time(t_end, self.cfg.scale)?;
        let mut objects: HashSet<ObjectId> = HashSet::new();
        let mut matches = verbose.then(Vec::new);
        for seg in self.candidate_segments(window) {
            let Some(temporal) = &self.temporal[seg as usize] else {
                continue;
            };
            match matches.as_mut() {
                Some(m) => temporal.index.visit_hits(l, r, &mut |i, interval| {
                    let object_id = temporal.objects[i as usize];
                    objects.insert(object_id);
                    m.push(Match {
                        object_id,
                        segment_id: seg,
                        interval,
                    });
                }),
                None => temporal.index.visit(l, r, &mut |i| {
                    objects.insert(temporal.objects[i as usize]);
                }),
            }
        }
        let mut object_ids: Vec<ObjectId> = objects.into_iter().collect();
        object_ids.sort_unstable();
        if let Some(m) = matches.as_mut() {
            m.sort_unstable();
        }
        Ok(QueryResult {
            object_ids,
            matches,
        })
    }

    pub fn range_query(&self, window: &Rect, t_start: f64, t_end: f64) -> Result<QueryResult> {
        self.run(window, t_start, t_end, false)
    }

    pub fn range_query_verbose(
        &self,
        window: &Rect,
        t_start: f64,
        t_end: f64,
    ) -> Result<QueryResult> {
        self.run(window, t_start, t_end, true)
    }

    pub fn time_slice_query(&self, window: &Rect, t: f64) -> Result<QueryResult> {
        self.run(window, t, t, false)
    }

    pub fn query(&self, q: &RangeQuery) -> Result<QueryResult> {
        self.range_query(&q.window, q.t_start, q.t_end)
    }

    pub fn stats(&self) -> IndexStats {
        let spatial_bytes = self.rtree.space_bytes() + self.network.space_bytes();
        let mut temporal_bytes = 0;
        let mut segment_records = Vec::new();
        let mut set_counts = BTreeMap::new();
        let mut per_object: BTreeMap<ObjectId, usize> = BTreeMap::new();
        for (seg, slot) in self.temporal.iter().enumerate() {
            let Some(t) = slot else { continue };
            temporal_bytes += t.index.space_bytes() + t.objects.len() * 4;
            segment_records.push((seg as SegmentId, t.objects.len()));
            if let Some(m) = t.index.set_count() {
                *set_counts.entry(m).or_insert(0) += 1;
            }
            for &o in &t.objects {
                *per_object.entry(o).or_insert(0) += 1;
            }
        }
        // One slot pointer plus a length word per network segment.
        let overhead_bytes = self.temporal.len() * 16;
        IndexStats {
            backend: self.cfg.backend,
            scale_digits: self.cfg.scale.digits(),
            segments: self.network.edge_count(),
            indexed_segments: segment_records.len(),
            records: self.record_count,
            objects: per_object.len(),
            spatial_bytes,
            temporal_bytes,
            overhead_bytes,
            total_bytes: spatial_bytes + temporal_bytes + overhead_bytes,
            segment_records,
            set_count_histogram: set_counts,
            records_per_object: per_object.into_values().collect(),
        }
    }
}

pub fn build_index(
    network: Network,
    records: &[(SegmentId, IntervalRecord)],
    cfg: TrajIndexConfig,
) -> Result<TrajIndex> {
    TrajIndex::build(network, records, cfg)
}

pub fn index_stats(index: &TrajIndex) -> IndexStats {
    index.stats()
}

/// Accounting of an index; `spatial + temporal + overhead = total`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub backend: Backend,
    pub scale_digits: u8,
    pub segments: usize,
    pub indexed_segments: usize,
    pub records: usize,
    pub objects: usize,
    pub spatial_bytes: usize,
    pub temporal_bytes: usize,
    pub overhead_bytes: usize,
    pub total_bytes: usize,
    /// (segment, record count) for segments with records.
    pub segment_records: Vec<(SegmentId, usize)>,
    /// IIS set count `m` -> number of segments with that count.
    pub set_count_histogram: BTreeMap<usize, usize>,
    pub records_per_object: Vec<usize>,
}

impl IndexStats {
    /// Sum of `m` over IIS-indexed segments.
    pub fn set_count_total(&self) -> usize {
        self.set_count_histogram.iter().map(|(m, c)| m * c).sum()
    }

    /// Share of records on the busiest tenth of all network segments.
    pub fn top_decile_share(&self) -> f64 {
        if self.records == 0 {
            return 0.0;
        }
        let mut counts: Vec<usize> = self.segment_records.iter().map(|&(_, c)| c).collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let top = self.segments.div_ceil(10);
        counts.iter().take(top).sum::<usize>() as f64 / self.records as f64
    }

    pub fn temporal_share(&self) -> f64 {
        if self.total_bytes == 0 {
            0.0
        } else {
            self.temporal_bytes as f64 / self.total_bytes as f64
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let mean = if self.objects == 0 {
            0.0
        } else {
            self.records as f64 / self.objects as f64
        };
        s += &format!("backend            {}\n", self.backend);
        s += &format!("scale digits       {}\n", self.scale_digits);
        s += &format!(
            "segments           {} ({} with records)\n",
            self.segments, self.indexed_segments
        );
        s += &format!("records            {}\n", self.records);
        s += &format!(
            "objects            {} ({mean:.1} records each)\n",
            self.objects
        );
        s += &format!("spatial bytes      {}\n", self.spatial_bytes);
        s += &format!(
            "temporal bytes     {} ({:.1}%)\n",
            self.temporal_bytes,
            100.0 * self.temporal_share()
        );
        s += &format!("overhead bytes     {}\n", self.overhead_bytes);
        s += &format!("total bytes        {}\n", self.total_bytes);
        s += &format!(
            "top-decile share   {:.1}%\n",
            100.0 * self.top_decile_share()
        );
        if !self.set_count_histogram.is_empty() {
            let hist: Vec<String> = self
                .set_count_histogram
                .iter()
                .map(|(m, c)| format!("{m}:{c}"))
                .collect();
            s += &format!("iis sets (m:count) {}\n", hist.join(" "));
        }
        s
    }
}

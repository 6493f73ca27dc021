//! Two-level index for network-constrained moving-object trajectories.
//!
//! The spatial level is a static R-tree over network segments. Each segment
//! with traffic carries a temporal index answering closed interval
//! intersection queries over discretized traversal times; the backend is
//! interchangeable (independent interval sets over Elias-Fano, interval
//! tree, Schmidt's structure, or a plain scan).

pub mod bench;
pub mod datagen;
pub mod error;
pub mod iis;
pub mod model;
pub mod rtree;
pub mod temporal;
pub mod traj;

pub use error::{Error, Result};
pub use iis::{decompose_iis, EliasFano, IisIndex};
pub use model::{
    discretize_time, mbb_of_segment, segment_intersects_window, IntervalRecord, ObjectId, Point,
    Rect, ScaleConfig, Segment, SegmentId, Tick, TickInterval, TimeInterval,
};
pub use rtree::{RTree, RTreeEntry};
pub use temporal::{
    brute_force_intersect, Backend, IntervalIndex, IntervalTree, LinearScan, SchmidtIndex,
    TemporalIndex,
};
pub use traj::{
    load_index, save_index, IndexStats, Match, QueryResult, RangeQuery, TrajIndex, TrajIndexConfig,
};

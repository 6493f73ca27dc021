//! Destination-biased random walks over a network.
//!
//! Each object starts at a random node at time 0 and keeps walking until
//! the configured duration. It repeatedly picks a destination (usually one
//! of a few hotspot nodes, otherwise any node) and steps along the adjacent
//! edge that brings it closest; with no edge bringing it closer it takes a
//! random adjacent edge and re-targets. Traversal time of an edge is
//! `base_traversal * length * (1 + jitter * U(-1, 1))`, so consecutive
//! records of an object abut exactly. The last record is clipped to the
//! duration. Timestamps are rounded to `time_digits` decimals.
//!
//! Randomness comes from ChaCha8 seeded with the configured seed, so output
//! is identical across platforms for a fixed configuration.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Network;
use crate::error::{Error, Result};
use crate::model::{IntervalRecord, ObjectId, SegmentId, TimeInterval};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub objects: usize,
    pub duration: f64,
    pub seed: u64,
    /// Relative speed jitter per traversal, in `[0, 1)`.
    pub jitter: f64,
    /// Time to traverse one unit of length.
    pub base_traversal: f64,
    pub hotspots: usize,
    /// Probability that a new destination is a hotspot.
    pub hotspot_bias: f64,
    pub time_digits: u8,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            objects: 100,
            duration: 100.0,
            seed: 0,
            jitter: 0.05,
            base_traversal: 1.0,
            hotspots: 3,
            hotspot_bias: 0.9,
            time_digits: 6,
        }
    }
}

impl TrajectoryConfig {
    fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::Config(format!(
                "jitter must be in [0, 1), got {}",
                self.jitter
            )));
        }
        if !(self.base_traversal.is_finite() && self.base_traversal > 0.0) {
            return Err(Error::Config("base traversal time must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.hotspot_bias) {
            return Err(Error::Config("hotspot bias must be a probability".into()));
        }
        if self.time_digits > crate::model::ScaleConfig::MAX_DIGITS {
            return Err(Error::Config("time digits must be at most 8".into()));
        }
        if self.objects > ObjectId::MAX as usize {
            return Err(Error::Config("too many objects".into()));
        }
        Ok(())
    }
}

/// One record per (object, edge traversal), grouped by object in time order.
pub fn gen_trajectories(
    net: &Network,
    cfg: &TrajectoryConfig,
) -> Result<Vec<(SegmentId, IntervalRecord)>> {
    cfg.validate()?;
    if cfg.objects == 0 {
        return Ok(Vec::new());
    }
    if net.is_empty() {
        return Err(Error::Config(
            "cannot generate trajectories on an empty network".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let connected: Vec<u32> = (0..net.node_count() as u32)
        .filter(|&n| !net.neighbours(n).is_empty())
        .collect();
    let hotspots: Vec<u32> = (0..cfg.hotspots.max(1))
        .map(|_| *connected.choose(&mut rng).expect("non-empty network"))
        .collect();
    let unit = 10f64.powi(cfg.time_digits as i32);
    let quantize = |t: f64| (t * unit).round() / unit;

    let mut out = Vec::new();
    for object in 0..cfg.objects as ObjectId {
        let mut node = *connected.choose(&mut rng).expect("non-empty network");
        let mut target = pick_target(&mut rng, &hotspots, &connected, cfg.hotspot_bias);
        let mut t = 0.0;
        while t < cfg.duration {
            if node == target {
                target = pick_target(&mut rng, &hotspots, &connected, cfg.hotspot_bias);
            }
            let here = net.nodes()[node as usize];
            let goal = net.nodes()[target as usize];
            let d = here.distance(&goal);
            let closer: Vec<(SegmentId, u32)> = net
                .neighbours(node)
                .iter()
                .copied()
                .filter(|&(_, next)| net.nodes()[next as usize].distance(&goal) < d)
                .collect();
            let &(edge, next) = if closer.is_empty() {
                target = pick_target(&mut rng, &hotspots, &connected, cfg.hotspot_bias);
                net.neighbours(node)
                    .choose(&mut rng)
                    .expect("connected node")
            } else {
                // Greedy: the neighbour nearest the goal, lowest edge id on ties.
                closer
                    .iter()
                    .min_by(|a, b| {
                        let da = net.nodes()[a.1 as usize].distance(&goal);
                        let db = net.nodes()[b.1 as usize].distance(&goal);
                        da.total_cmp(&db).then(a.0.cmp(&b.0))
                    })
                    .expect("non-empty")
            };
            let factor = if cfg.jitter > 0.0 {
                1.0 + cfg.jitter * rng.random_range(-1.0..=1.0)
            } else {
                1.0
            };
            let length = net.segments()[edge as usize].length();
            let mut exit = quantize(t + cfg.base_traversal * length * factor);
            if exit <= t {
                exit = quantize(t + 1.0 / unit);
            }
            let exit = exit.min(cfg.duration);
            out.push((
                edge,
                IntervalRecord::new(object, TimeInterval::new(t, exit)?),
            ));
            t = exit;
            node = next;
        }
    }
    Ok(out)
}

fn pick_target(rng: &mut ChaCha8Rng, hotspots: &[u32], nodes: &[u32], bias: f64) -> u32 {
    if rng.random_bool(bias) {
        *hotspots.choose(rng).expect("hotspots")
    } else {
        *nodes.choose(rng).expect("nodes")
    }
}

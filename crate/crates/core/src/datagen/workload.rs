//! Synthetic interval workloads for the temporal backends.
//!
//! Intervals are drawn on an integer grid of `10^digits` ticks per time
//! unit and converted to timestamps afterwards, so discretizing with the
//! same digits recovers the generated ticks exactly.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{IntervalRecord, ScaleConfig, Tick, TickInterval, TimeInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorkloadKind {
    /// Distinct uniform starts, one common length.
    FixedSize,
    /// Uniform starts in the horizon, uniform lengths in `[0, horizon]`.
    RandomSize,
    /// Uniform starts, lengths `length * (1 + jitter * U(-1, 1))`.
    Trajectory,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 3] = [
        WorkloadKind::FixedSize,
        WorkloadKind::RandomSize,
        WorkloadKind::Trajectory,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WorkloadKind::FixedSize => "fixed_size",
            WorkloadKind::RandomSize => "random_size",
            WorkloadKind::Trajectory => "trajectory",
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" | "fixed_size" | "fixed-size" => Ok(WorkloadKind::FixedSize),
            "random" | "random_size" | "random-size" => Ok(WorkloadKind::RandomSize),
            "trajectory" | "traj" => Ok(WorkloadKind::Trajectory),
            other => Err(Error::Config(format!(
                "unknown workload `{other}` (expected fixed, random or trajectory)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub n: usize,
    pub seed: u64,
    /// Starts are drawn from `[0, horizon)`.
    pub horizon: f64,
    /// Common length for fixed-size, mean length for trajectory.
    pub length: f64,
    pub jitter: f64,
    /// Resolution of generated timestamps.
    pub digits: u8,
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, n: usize, seed: u64) -> Self {
        WorkloadSpec {
            kind,
            n,
            seed,
            horizon: 100.0,
            length: 1.0,
            jitter: 0.05,
            digits: 6,
        }
    }

    pub fn scale(&self) -> Result<ScaleConfig> {
        ScaleConfig::new(self.digits)
    }

    fn validate(&self) -> Result<()> {
        self.scale()?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.length.is_finite() && self.length >= 0.0) {
            return Err(Error::Config(format!(
                "length must be non-negative, got {}",
                self.length
            )));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::Config(format!(
                "jitter must be in [0, 1), got {}",
                self.jitter
            )));
        }
        Ok(())
    }
}

/// The workload on the tick grid.
pub fn gen_interval_ticks(spec: &WorkloadSpec) -> Result<Vec<TickInterval>> {
    spec.validate()?;
    let unit = spec.scale()?.factor() as f64;
    let horizon = (spec.horizon * unit).round() as Tick;
    let length = (spec.length * unit).round() as Tick;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let out = match spec.kind {
        WorkloadKind::FixedSize => {
            let span = horizon.saturating_sub(length).max(1);
            if (spec.n as u64) > span {
                return Err(Error::Config(format!(
                    "{} distinct starts do not fit in {span} ticks",
                    spec.n
                )));
            }
            rand::seq::index::sample(&mut rng, span as usize, spec.n)
                .into_iter()
                .map(|s| TickInterval {
                    start: s as Tick,
                    end: s as Tick + length,
                })
                .collect()
        }
        WorkloadKind::RandomSize => (0..spec.n)
            .map(|_| {
                let s = rng.random_range(0..horizon);
                TickInterval {
                    start: s,
                    end: s + rng.random_range(0..=horizon),
                }
            })
            .collect(),
        WorkloadKind::Trajectory => (0..spec.n)
            .map(|_| {
                let s = rng.random_range(0..horizon);
                let factor = 1.0 + spec.jitter * rng.random_range(-1.0..=1.0);
                TickInterval {
                    start: s,
                    end: s + (length as f64 * factor).round() as Tick,
                }
            })
            .collect(),
    };
    Ok(out)
}

/// The workload as timestamped records; record `i` belongs to object `i`.
pub fn gen_interval_workload(spec: &WorkloadSpec) -> Result<Vec<IntervalRecord>> {
    let scale = spec.scale()?;
    gen_interval_ticks(spec)?
        .into_iter()
        .enumerate()
        .map(|(i, iv)| {
            let interval =
                TimeInterval::new(scale.tick_to_time(iv.start), scale.tick_to_time(iv.end))?;
            Ok(IntervalRecord::new(i as u32, interval))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iis::decompose_iis;
    use crate::temporal::discretize_records;

    #[test]
    fn fixed_size_lengths_are_constant() {
        let spec = WorkloadSpec {
            length: 2.5,
            ..WorkloadSpec::new(WorkloadKind::FixedSize, 1000, 1)
        };
        let recs = gen_interval_workload(&spec).unwrap();
        assert_eq!(recs.len(), 1000);
        for r in &recs {
            assert!((r.interval.end - r.interval.start - 2.5).abs() < 1e-9);
        }
        let ticks = gen_interval_ticks(&spec).unwrap();
        assert!(ticks.iter().all(|iv| iv.end - iv.start == 2_500_000));
        assert_eq!(decompose_iis(&ticks).len(), 1);
    }

    #[test]
    fn timestamps_rediscretize_to_generated_ticks() {
        for kind in WorkloadKind::ALL {
            let spec = WorkloadSpec::new(kind, 2000, 4);
            let ticks = gen_interval_ticks(&spec).unwrap();
            let recs = gen_interval_workload(&spec).unwrap();
            assert_eq!(
                discretize_records(&recs, spec.scale().unwrap()).unwrap(),
                ticks
            );
        }
    }

    #[test]
    fn deterministic() {
        for kind in WorkloadKind::ALL {
            let spec = WorkloadSpec::new(kind, 500, 77);
            assert_eq!(
                gen_interval_ticks(&spec).unwrap(),
                gen_interval_ticks(&spec).unwrap()
            );
        }
    }

    #[test]
    fn random_sizes_nest_far_more_than_trajectories() {
        let random =
            gen_interval_ticks(&WorkloadSpec::new(WorkloadKind::RandomSize, 20_000, 2)).unwrap();
        let traj =
            gen_interval_ticks(&WorkloadSpec::new(WorkloadKind::Trajectory, 20_000, 2)).unwrap();
        let (m_random, m_traj) = (decompose_iis(&random).len(), decompose_iis(&traj).len());
        assert!(
            m_random > 10 * m_traj,
            "random {m_random} vs trajectory {m_traj}"
        );
    }

    #[test]
    fn random_lengths_are_uniform() {
        let spec = WorkloadSpec::new(WorkloadKind::RandomSize, 50_000, 9);
        let ticks = gen_interval_ticks(&spec).unwrap();
        let horizon = 100_000_000u64;
        let bins = 20usize;
        let mut counts = vec![0f64; bins];
        for iv in &ticks {
            let len = iv.end - iv.start;
            counts
                [((len as u128 * bins as u128 / (horizon as u128 + 1)) as usize).min(bins - 1)] +=
                1.0;
        }
        let expected = ticks.len() as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|c| (c - expected).powi(2) / expected)
            .sum();
        // 19 degrees of freedom; 43.8 is the 0.999 quantile.
        assert!(chi2 < 43.8, "chi-square {chi2}");
    }

    #[test]
    fn fixed_size_needs_room_for_distinct_starts() {
        let spec = WorkloadSpec {
            horizon: 1.0,
            length: 0.5,
            digits: 1,
            ..WorkloadSpec::new(WorkloadKind::FixedSize, 100, 0)
        };
        assert!(gen_interval_ticks(&spec).is_err());
    }
}

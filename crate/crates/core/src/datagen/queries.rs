//! Random query sets: windows and time ranges whose sides are a fixed
//! percentage of the data extent, placed uniformly inside it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Rect, Tick};
use crate::traj::RangeQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryFamily {
    /// Same percentage in space and time.
    RangeEqual,
    /// Temporal extent ten times the spatial one, capped at the full duration.
    RangeLargerTemporal,
    /// A single instant.
    TimeSlice,
}

impl QueryFamily {
    pub const ALL: [QueryFamily; 3] = [
        QueryFamily::RangeEqual,
        QueryFamily::RangeLargerTemporal,
        QueryFamily::TimeSlice,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            QueryFamily::RangeEqual => "range_equal",
            QueryFamily::RangeLargerTemporal => "range_larger_temporal",
            QueryFamily::TimeSlice => "time_slice",
        }
    }

    /// Temporal extent (percent) paired with a spatial extent.
    pub fn temporal_pct(&self, spatial_pct: f64) -> f64 {
        match self {
            QueryFamily::RangeEqual => spatial_pct,
            QueryFamily::RangeLargerTemporal => (10.0 * spatial_pct).min(100.0),
            QueryFamily::TimeSlice => 0.0,
        }
    }
}

impl fmt::Display for QueryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "range_equal" | "range-equal" | "equal" => Ok(QueryFamily::RangeEqual),
            "range_larger_temporal" | "range-larger-temporal" | "larger" => Ok(QueryFamily::RangeLargerTemporal),
            "time_slice" | "time-slice" | "slice" => Ok(QueryFamily::TimeSlice),
            other => Err(Error::Config(format!(
                "unknown query family `{other}` (expected range_equal, range_larger_temporal or time_slice)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySetSpec {
    pub family: QueryFamily,
    /// Side of the window as a percentage of each spatial dimension.
    pub spatial_pct: f64,
    pub count: usize,
    pub seed: u64,
}

/// Times are rounded to 6 decimals so query files round-trip.
fn round6(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

pub fn gen_query_set(extent: &Rect, duration: f64, spec: &QuerySetSpec) -> Result<Vec<RangeQuery>> {
    let pct = spec.spatial_pct;
    if !(pct > 0.0 && pct <= 100.0) {
        return Err(Error::Config(format!(
            "extent percentage must be in (0, 100], got {pct}"
        )));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::Config(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (extent.width() * pct / 100.0, extent.height() * pct / 100.0);
    let span = duration * spec.family.temporal_pct(pct) / 100.0;
    let place = |rng: &mut ChaCha8Rng, lo: f64, room: f64| {
        if room > 0.0 {
            lo + rng.random_range(0.0..=room)
        } else {
            lo
        }
    };
    (0..spec.count)
        .map(|_| {
            let x = place(&mut rng, extent.xmin, extent.width() - w);
            let y = place(&mut rng, extent.ymin, extent.height() - h);
            let t_start = round6(place(&mut rng, 0.0, duration - span));
            let t_end = if spec.family == QueryFamily::TimeSlice {
                t_start
            } else {
                round6(t_start + span).max(t_start)
            };
            Ok(RangeQuery {
                window: Rect::new(x, y, x + w, y + h)?,
                t_start,
                t_end,
            })
        })
        .collect()
}

/// Tick ranges covering `pct` percent of `[0, universe)`.
pub fn gen_temporal_queries(
    universe: Tick,
    pct: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<(Tick, Tick)>> {
    if !(0.0..=100.0).contains(&pct) {
        return Err(Error::Config(format!(
            "extent percentage must be in [0, 100], got {pct}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (universe as f64 * pct / 100.0) as Tick;
    let room = universe.saturating_sub(span);
    Ok((0..count)
        .map(|_| {
            let l = rng.random_range(0..=room);
            (l, l + span)
        })
        .collect())
}

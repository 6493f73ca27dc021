//! Benchmark matrix: temporal backends over synthetic interval workloads,
//! and the full two-level index over a generated trajectory dataset.
//!
//! Timings are medians of wall-clock measurements over repetitions. Space is
//! the accounted in-structure byte count, so every column except the two
//! timings is reproducible for fixed settings.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::datagen::{
    gen_grid_network, gen_interval_ticks, gen_query_set, gen_temporal_queries, gen_trajectories,
    QueryFamily, QuerySetSpec, TrajectoryConfig, WorkloadKind, WorkloadSpec,
};
use crate::error::{Error, Result};
use crate::model::{ScaleConfig, Tick};
use crate::temporal::{Backend, IntervalIndex, TemporalIndex};
use crate::traj::{TrajIndex, TrajIndexConfig};

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "backend",
    "n",
    "scale_digits",
    "build_seconds",
    "query_seconds_total",
    "space_bytes",
    "m_total",
    "result_count_total",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub backends: Vec<Backend>,
    pub scenarios: Vec<WorkloadKind>,
    /// Interval counts for the workload scenarios.
    pub sizes: Vec<usize>,
    pub families: Vec<QueryFamily>,
    /// Window side as a percentage of each dimension, per query family.
    pub extents: Vec<f64>,
    /// Query length as a percentage of the horizon for workload scenarios.
    pub interval_extent: f64,
    pub queries: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub scale_digits: u8,
    /// Trajectory dataset: a `grid x grid` lattice, `objects` walkers.
    pub grid: usize,
    pub objects: usize,
    pub duration: f64,
    /// Run independent cells on all cores. Queries inside a cell stay
    /// sequential.
    pub parallel: bool,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            backends: Backend::ALL.to_vec(),
            scenarios: WorkloadKind::ALL.to_vec(),
            sizes: vec![1_000, 10_000, 100_000, 200_000],
            families: QueryFamily::ALL.to_vec(),
            extents: vec![1.0, 10.0, 20.0],
            interval_extent: 1.0,
            queries: 500,
            repetitions: 3,
            seed: 42,
            scale_digits: 6,
            grid: 20,
            objects: 1_000,
            duration: 100.0,
            parallel: false,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        for &e in self.extents.iter().chain([&self.interval_extent]) {
            if !(e > 0.0 && e <= 100.0) {
                return Err(Error::Config(format!(
                    "extent percentages must be in (0, 100], got {e}"
                )));
            }
        }
        if self.backends.is_empty() {
            return Err(Error::Config("no backends selected".into()));
        }
        ScaleConfig::new(self.scale_digits)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scenario: String,
    pub backend: Backend,
    pub n: usize,
    pub scale_digits: u8,
    pub build_seconds: f64,
    pub query_seconds_total: f64,
    pub space_bytes: usize,
    /// Total independent sets, IIS rows only.
    pub m_total: Option<usize>,
    pub result_count_total: u64,
}

impl BenchRow {
    fn record(&self) -> [String; 9] {
        [
            self.scenario.clone(),
            self.backend.to_string(),
            self.n.to_string(),
            self.scale_digits.to_string(),
            format!("{:.6}", self.build_seconds),
            format!("{:.6}", self.query_seconds_total),
            self.space_bytes.to_string(),
            self.m_total.map(|m| m.to_string()).unwrap_or_default(),
            self.result_count_total.to_string(),
        ]
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2.0
    }
}

/// Times `f` `reps` times and returns the median and the last output.
fn timed<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let t0 = Instant::now();
        let out = f()?;
        times.push(t0.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((median(times), last.expect("at least one repetition")))
}

enum Cell {
    Workload {
        kind: WorkloadKind,
        n: usize,
        backend: Backend,
    },
    Trajectory {
        family: QueryFamily,
        extent: f64,
        backend: Backend,
    },
}

fn workload_row(
    spec: &BenchSpec,
    kind: WorkloadKind,
    n: usize,
    backend: Backend,
) -> Result<BenchRow> {
    let wl = WorkloadSpec {
        digits: spec.scale_digits,
        ..WorkloadSpec::new(kind, n, spec.seed)
    };
    let scale = wl.scale()?;
    let ticks = gen_interval_ticks(&wl)?;
    let horizon = (wl.horizon * scale.factor() as f64).round() as Tick;
    let queries = gen_temporal_queries(
        horizon,
        spec.interval_extent,
        spec.queries,
        spec.seed ^ 0x9e37,
    )?;
    let (build_seconds, index) = timed(spec.repetitions, || {
        TemporalIndex::build_ticks(
            backend,
            ticks.clone(),
            scale,
            crate::iis::DEFAULT_SMALL_SET_THRESHOLD,
        )
    })?;
    let (query_seconds_total, result_count_total) = timed(spec.repetitions, || {
        let mut hits = 0u64;
        for &(l, r) in &queries {
            index.visit(l, r, &mut |_| hits += 1);
        }
        Ok(hits)
    })?;
    Ok(BenchRow {
        scenario: kind.name().to_string(),
        backend,
        n,
        scale_digits: spec.scale_digits,
        build_seconds,
        query_seconds_total,
        space_bytes: index.space_bytes(),
        m_total: index.set_count(),
        result_count_total,
    })
}

fn trajectory_row(
    spec: &BenchSpec,
    net: &crate::datagen::Network,
    records: &[(u32, crate::model::IntervalRecord)],
    family: QueryFamily,
    extent: f64,
    backend: Backend,
) -> Result<BenchRow> {
    let cfg = TrajIndexConfig {
        scale: ScaleConfig::new(spec.scale_digits)?,
        ..TrajIndexConfig::with_backend(backend)
    };
    let qspec = QuerySetSpec {
        family,
        spatial_pct: extent,
        count: spec.queries,
        seed: spec.seed,
    };
    let queries = gen_query_set(
        &net.extent().expect("non-empty grid"),
        spec.duration,
        &qspec,
    )?;
    let (build_seconds, index) = timed(spec.repetitions, || {
        TrajIndex::build(net.clone(), records, cfg)
    })?;
    let (query_seconds_total, result_count_total) = timed(spec.repetitions, || {
        let mut total = 0u64;
        for q in &queries {
            total += index.query(q)?.object_ids.len() as u64;
        }
        Ok(total)
    })?;
    let stats = index.stats();
    Ok(BenchRow {
        scenario: format!("{}_{}pct", family.name(), extent),
        backend,
        n: records.len(),
        scale_digits: spec.scale_digits,
        build_seconds,
        query_seconds_total,
        space_bytes: stats.total_bytes,
        m_total: (backend == Backend::Iis).then(|| stats.set_count_total()),
        result_count_total,
    })
}

/// Runs every selected cell; rows come out in a fixed order regardless of
/// `parallel`.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &kind in &spec.scenarios {
        for &n in &spec.sizes {
            for &backend in &spec.backends {
                cells.push(Cell::Workload { kind, n, backend });
            }
        }
    }
    for &family in &spec.families {
        for &extent in &spec.extents {
            for &backend in &spec.backends {
                cells.push(Cell::Trajectory {
                    family,
                    extent,
                    backend,
                });
            }
        }
    }
    let (net, records) = if spec.families.is_empty() || spec.extents.is_empty() {
        (gen_grid_network(2, 2, 1.0)?, Vec::new())
    } else {
        let net = gen_grid_network(spec.grid, spec.grid, 1.0)?;
        let tcfg = TrajectoryConfig {
            objects: spec.objects,
            duration: spec.duration,
            seed: spec.seed,
            ..Default::default()
        };
        let records = gen_trajectories(&net, &tcfg)?;
        (net, records)
    };
    let run = |cell: &Cell| match *cell {
        Cell::Workload { kind, n, backend } => workload_row(spec, kind, n, backend),
        Cell::Trajectory {
            family,
            extent,
            backend,
        } => trajectory_row(spec, &net, &records, family, extent, backend),
    };
    if spec.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        out.write_record(row.record()).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Hardware-independent properties of a bench run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchClaims {
    /// Groups (scenario, n) whose result counts differ between backends.
    pub inconsistent_groups: Vec<(String, usize)>,
    /// (n, iis bytes, interval-tree bytes) on the trajectory workload.
    pub trajectory_space: Vec<(usize, usize, usize)>,
}

impl BenchClaims {
    pub fn from_rows(rows: &[BenchRow]) -> Self {
        let mut groups: std::collections::BTreeMap<(String, usize), Vec<u64>> = Default::default();
        for r in rows {
            groups
                .entry((r.scenario.clone(), r.n))
                .or_default()
                .push(r.result_count_total);
        }
        let inconsistent_groups = groups
            .into_iter()
            .filter(|(_, counts)| counts.windows(2).any(|w| w[0] != w[1]))
            .map(|(k, _)| k)
            .collect();
        let scenario = WorkloadKind::Trajectory.name();
        let space = |b: Backend, n: usize| {
            rows.iter()
                .find(|r| r.scenario == scenario && r.backend == b && r.n == n)
                .map(|r| r.space_bytes)
        };
        let mut trajectory_space: Vec<(usize, usize, usize)> = rows
            .iter()
            .filter(|r| r.scenario == scenario && r.backend == Backend::Iis)
            .filter_map(|r| Some((r.n, r.space_bytes, space(Backend::IntervalTree, r.n)?)))
            .collect();
        trajectory_space.sort_unstable();
        BenchClaims {
            inconsistent_groups,
            trajectory_space,
        }
    }

    pub fn counts_backend_invariant(&self) -> bool {
        self.inconsistent_groups.is_empty()
    }

    /// IIS smaller than the interval tree at every trajectory size >= `min_n`;
    /// `None` when no such size was measured.
    pub fn iis_smaller_from(&self, min_n: usize) -> Option<bool> {
        let big: Vec<_> = self
            .trajectory_space
            .iter()
            .filter(|t| t.0 >= min_n)
            .collect();
        (!big.is_empty()).then(|| big.iter().all(|&&(_, iis, tree)| iis < tree))
    }
}

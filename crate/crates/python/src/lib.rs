//! Python bindings.

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use trajix::datagen::{
    self, QueryFamily, QuerySetSpec, TrajectoryConfig, WorkloadKind, WorkloadSpec,
};
use trajix::{
    Backend, IntervalIndex, IntervalRecord, Point, Rect, ScaleConfig, SegmentId, TickInterval,
    TimeInterval,
};

create_exception!(
    trajix,
    FormatError,
    PyValueError,
    "Malformed or incompatible index file."
);

fn to_py(e: trajix::Error) -> PyErr {
    match e {
        trajix::Error::Io(e) => PyIOError::new_err(e.to_string()),
        e @ (trajix::Error::Format(_) | trajix::Error::Version { .. }) => {
            FormatError::new_err(e.to_string())
        }
        e => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = trajix::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn ticks(pairs: Vec<(u64, u64)>) -> PyResult<Vec<TickInterval>> {
    pairs
        .into_iter()
        .map(|(s, e)| TickInterval::new(s, e).map_err(to_py))
        .collect()
}

fn scale(digits: u8) -> PyResult<ScaleConfig> {
    ScaleConfig::new(digits).map_err(to_py)
}

fn rect(window: (f64, f64, f64, f64)) -> PyResult<Rect> {
    Rect::new(window.0, window.1, window.2, window.3).map_err(to_py)
}

type PyRecord = (SegmentId, u32, f64, f64);
type PyQuery = (f64, f64, f64, f64, f64, f64);

fn records_from_py(records: Vec<PyRecord>) -> PyResult<Vec<(SegmentId, IntervalRecord)>> {
    records
        .into_iter()
        .map(|(seg, obj, t0, t1)| {
            Ok((
                seg,
                IntervalRecord::new(obj, TimeInterval::new(t0, t1).map_err(to_py)?),
            ))
        })
        .collect()
}

fn records_to_py(records: &[(SegmentId, IntervalRecord)]) -> Vec<PyRecord> {
    records
        .iter()
        .map(|(seg, r)| (*seg, r.object_id, r.interval.start, r.interval.end))
        .collect()
}

/// Floor of `t * 10^digits`.
#[pyfunction]
#[pyo3(signature = (t, digits = 8))]
fn discretize_time(t: f64, digits: u8) -> PyResult<u64> {
    trajix::discretize_time(t, scale(digits)?).map_err(to_py)
}

/// Fewest independent sets; returns input positions per set.
#[pyfunction]
fn decompose_iis(intervals: Vec<(u64, u64)>) -> PyResult<Vec<Vec<u32>>> {
    Ok(trajix::decompose_iis(&ticks(intervals)?))
}

#[pyfunction]
fn brute_force_intersect(intervals: Vec<(u64, u64)>, l: u64, r: u64) -> PyResult<Vec<usize>> {
    trajix::brute_force_intersect(&ticks(intervals)?, l, r).map_err(to_py)
}

#[pyclass(frozen, module = "trajix")]
struct EliasFano(trajix::EliasFano);

#[pymethods]
impl EliasFano {
    #[new]
    fn new(values: Vec<u64>, universe: u64) -> PyResult<Self> {
        trajix::EliasFano::new(&values, universe)
            .map(EliasFano)
            .map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, i: usize) -> PyResult<u64> {
        if i >= self.0.len() {
            return Err(PyIndexError::new_err("index out of range"));
        }
        Ok(self.0.get(i))
    }

    /// Number of stored values `<= x`.
    fn rank(&self, x: u64) -> usize {
        self.0.rank(x)
    }

    fn to_list(&self) -> Vec<u64> {
        self.0.iter().collect()
    }

    #[getter]
    fn universe(&self) -> u64 {
        self.0.universe()
    }

    #[getter]
    fn payload_bits(&self) -> u64 {
        self.0.space().payload_bits
    }

    #[getter]
    fn select_bits(&self) -> u64 {
        self.0.space().select_bits
    }

    fn to_bytes(&self) -> PyResult<Vec<u8>> {
        let mut buf = Vec::new();
        self.0.write_to(&mut buf).map_err(to_py)?;
        Ok(buf)
    }

    #[staticmethod]
    fn from_bytes(data: Vec<u8>) -> PyResult<Self> {
        let mut r = data.as_slice();
        let ef = trajix::EliasFano::read_from(&mut r).map_err(to_py)?;
        if !r.is_empty() {
            return Err(FormatError::new_err("trailing bytes"));
        }
        Ok(EliasFano(ef))
    }
}

/// One temporal backend over tick intervals.
#[pyclass(frozen, module = "trajix")]
struct TemporalIndex(trajix::TemporalIndex);

#[pymethods]
impl TemporalIndex {
    #[new]
    #[pyo3(signature = (intervals, backend = "iis", small_threshold = 16))]
    fn new(intervals: Vec<(u64, u64)>, backend: &str, small_threshold: usize) -> PyResult<Self> {
        let index = trajix::TemporalIndex::build_ticks(
            parse(backend)?,
            ticks(intervals)?,
            scale(0)?,
            small_threshold,
        )
        .map_err(to_py)?;
        Ok(TemporalIndex(index))
    }

    /// Sorted positions of intervals intersecting `[l, r]`.
    fn query(&self, l: u64, r: u64) -> PyResult<Vec<usize>> {
        let mut out = self.0.query(l, r).map_err(to_py)?;
        out.sort_unstable();
        Ok(out)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn backend(&self) -> &'static str {
        self.0.backend().name()
    }

    /// Independent sets, for the IIS backend.
    #[getter]
    fn set_count(&self) -> Option<usize> {
        self.0.set_count()
    }

    #[getter]
    fn space_bytes(&self) -> usize {
        self.0.space_bytes()
    }
}

#[pyclass(frozen, module = "trajix")]
struct Network(datagen::Network);

#[pymethods]
impl Network {
    #[new]
    fn new(nodes: Vec<(f64, f64)>, edges: Vec<(u32, u32)>) -> PyResult<Self> {
        let nodes = nodes
            .into_iter()
            .map(|(x, y)| Point::new(x, y).map_err(to_py))
            .collect::<PyResult<Vec<_>>>()?;
        datagen::Network::new(nodes, edges)
            .map(Network)
            .map_err(to_py)
    }

    /// A `rows x cols` lattice with spacing `cell`.
    #[staticmethod]
    #[pyo3(signature = (rows, cols, cell = 1.0))]
    fn grid(rows: usize, cols: usize, cell: f64) -> PyResult<Self> {
        datagen::gen_grid_network(rows, cols, cell)
            .map(Network)
            .map_err(to_py)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        datagen::read_network(path).map(Network).map_err(to_py)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        datagen::write_network(&self.0, path).map_err(to_py)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.0.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(u32, u32)> {
        self.0.edges().to_vec()
    }

    #[getter]
    fn nodes(&self) -> Vec<(f64, f64)> {
        self.0.nodes().iter().map(|p| (p.x, p.y)).collect()
    }

    /// `(xmin, ymin, xmax, ymax)`, or None for an empty network.
    fn extent(&self) -> Option<(f64, f64, f64, f64)> {
        self.0.extent().map(|r| (r.xmin, r.ymin, r.xmax, r.ymax))
    }

    /// Records as `(segment, object, t_entry, t_exit)`.
    #[pyo3(signature = (objects, duration = 100.0, seed = 0, jitter = 0.05))]
    fn trajectories(
        &self,
        objects: usize,
        duration: f64,
        seed: u64,
        jitter: f64,
    ) -> PyResult<Vec<PyRecord>> {
        let cfg = TrajectoryConfig {
            objects,
            duration,
            seed,
            jitter,
            ..Default::default()
        };
        Ok(records_to_py(
            &datagen::gen_trajectories(&self.0, &cfg).map_err(to_py)?,
        ))
    }

    fn read_records(&self, path: &str) -> PyResult<Vec<PyRecord>> {
        Ok(records_to_py(
            &datagen::read_records(path, &self.0).map_err(to_py)?,
        ))
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(nodes={}, edges={})",
            self.0.node_count(),
            self.0.edge_count()
        )
    }
}

/// `(t_start, t_end)` pairs; interval `i` belongs to object `i`.
#[pyfunction]
#[pyo3(signature = (kind, n, seed = 0, horizon = 100.0, length = 1.0, jitter = 0.05, digits = 6))]
fn gen_interval_workload(
    kind: &str,
    n: usize,
    seed: u64,
    horizon: f64,
    length: f64,
    jitter: f64,
    digits: u8,
) -> PyResult<Vec<(f64, f64)>> {
    let spec = WorkloadSpec {
        horizon,
        length,
        jitter,
        digits,
        ..WorkloadSpec::new(parse::<WorkloadKind>(kind)?, n, seed)
    };
    let recs = datagen::gen_interval_workload(&spec).map_err(to_py)?;
    Ok(recs
        .iter()
        .map(|r| (r.interval.start, r.interval.end))
        .collect())
}

/// Queries as `(xmin, ymin, xmax, ymax, t_start, t_end)`.
#[pyfunction]
#[pyo3(signature = (extent, family = "range_equal", spatial_pct = 10.0, count = 500, seed = 0, duration = 100.0))]
fn gen_queries(
    extent: (f64, f64, f64, f64),
    family: &str,
    spatial_pct: f64,
    count: usize,
    seed: u64,
    duration: f64,
) -> PyResult<Vec<PyQuery>> {
    let spec = QuerySetSpec {
        family: parse::<QueryFamily>(family)?,
        spatial_pct,
        count,
        seed,
    };
    let qs = datagen::gen_query_set(&rect(extent)?, duration, &spec).map_err(to_py)?;
    Ok(qs
        .iter()
        .map(|q| {
            (
                q.window.xmin,
                q.window.ymin,
                q.window.xmax,
                q.window.ymax,
                q.t_start,
                q.t_end,
            )
        })
        .collect())
}

/// The two-level index.
#[pyclass(frozen, module = "trajix")]
struct TrajIndex(trajix::TrajIndex);

#[pymethods]
impl TrajIndex {
    #[new]
    #[pyo3(signature = (network, records, backend = "iis", scale_digits = 8, fanout = 32, small_threshold = 16))]
    fn new(
        network: &Network,
        records: Vec<PyRecord>,
        backend: &str,
        scale_digits: u8,
        fanout: usize,
        small_threshold: usize,
    ) -> PyResult<Self> {
        let cfg = trajix::TrajIndexConfig {
            backend: parse(backend)?,
            scale: scale(scale_digits)?,
            fanout,
            small_threshold,
        };
        let index = trajix::TrajIndex::build(network.0.clone(), &records_from_py(records)?, cfg)
            .map_err(to_py)?;
        Ok(TrajIndex(index))
    }

    /// Sorted object ids seen in `window = (xmin, ymin, xmax, ymax)` during
    /// `[t_start, t_end]`.
    fn range_query(
        &self,
        window: (f64, f64, f64, f64),
        t_start: f64,
        t_end: f64,
    ) -> PyResult<Vec<u32>> {
        Ok(self
            .0
            .range_query(&rect(window)?, t_start, t_end)
            .map_err(to_py)?
            .object_ids)
    }

    /// Matched traversals as `(object, segment, tick_start, tick_end)`.
    fn range_query_verbose(
        &self,
        window: (f64, f64, f64, f64),
        t_start: f64,
        t_end: f64,
    ) -> PyResult<Vec<(u32, u32, u64, u64)>> {
        let res = self
            .0
            .range_query_verbose(&rect(window)?, t_start, t_end)
            .map_err(to_py)?;
        Ok(res
            .matches
            .unwrap_or_default()
            .iter()
            .map(|m| (m.object_id, m.segment_id, m.interval.start, m.interval.end))
            .collect())
    }

    fn time_slice_query(&self, window: (f64, f64, f64, f64), t: f64) -> PyResult<Vec<u32>> {
        Ok(self
            .0
            .time_slice_query(&rect(window)?, t)
            .map_err(to_py)?
            .object_ids)
    }

    fn candidate_segments(&self, window: (f64, f64, f64, f64)) -> PyResult<Vec<u32>> {
        Ok(self.0.candidate_segments(&rect(window)?))
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.0.stats();
        let d = PyDict::new(py);
        d.set_item("backend", s.backend.name())?;
        d.set_item("scale_digits", s.scale_digits)?;
        d.set_item("segments", s.segments)?;
        d.set_item("indexed_segments", s.indexed_segments)?;
        d.set_item("records", s.records)?;
        d.set_item("objects", s.objects)?;
        d.set_item("spatial_bytes", s.spatial_bytes)?;
        d.set_item("temporal_bytes", s.temporal_bytes)?;
        d.set_item("overhead_bytes", s.overhead_bytes)?;
        d.set_item("total_bytes", s.total_bytes)?;
        d.set_item("set_count_total", s.set_count_total())?;
        d.set_item("top_decile_share", s.top_decile_share())?;
        d.set_item("segment_records", s.segment_records.clone())?;
        d.set_item("set_count_histogram", s.set_count_histogram.clone())?;
        Ok(d)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        trajix::save_index(&self.0, path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        trajix::load_index(path).map(TrajIndex).map_err(to_py)
    }

    #[getter]
    fn backend(&self) -> &'static str {
        self.0.config().backend.name()
    }

    #[getter]
    fn record_count(&self) -> usize {
        self.0.record_count()
    }

    fn __repr__(&self) -> String {
        let cfg = self.0.config();
        format!(
            "TrajIndex(backend={}, segments={}, records={})",
            cfg.backend,
            self.0.network().edge_count(),
            self.0.record_count()
        )
    }
}

#[pyfunction]
fn backends() -> Vec<&'static str> {
    Backend::ALL.iter().map(|b| b.name()).collect()
}

#[pymodule]
#[pyo3(name = "trajix")]
fn trajix_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FormatError", m.py().get_type::<FormatError>())?;
    m.add_class::<EliasFano>()?;
    m.add_class::<TemporalIndex>()?;
    m.add_class::<Network>()?;
    m.add_class::<TrajIndex>()?;
    m.add_function(wrap_pyfunction!(discretize_time, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_iis, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_intersect, m)?)?;
    m.add_function(wrap_pyfunction!(gen_interval_workload, m)?)?;
    m.add_function(wrap_pyfunction!(gen_queries, m)?)?;
    m.add_function(wrap_pyfunction!(backends, m)?)?;
    Ok(())
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trajix::bench::{run_bench, write_csv, BenchClaims, BenchSpec};
use trajix::datagen::{
    gen_grid_network, gen_interval_workload, gen_query_set, gen_trajectories, read_network,
    read_queries, read_records, write_network, write_queries, write_records, Network, QueryFamily,
    QuerySetSpec, TrajectoryConfig, WorkloadKind, WorkloadSpec,
};
use trajix::{
    load_index, save_index, Backend, Error, Point, RangeQuery, Rect, ScaleConfig, TrajIndex,
    TrajIndexConfig,
};

#[derive(Parser)]
#[command(
    name = "trajix",
    version,
    about = "Two-level index for network-constrained trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a network, records and queries (`<out>.network`, `.records`, `.queries`).
    Gen(GenArgs),
    /// Build an index file from a network and records.
    Build(BuildArgs),
    /// Run queries against an index file.
    Query(QueryArgs),
    /// Run the benchmark matrix and emit CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
    /// Grid dimensions, `ROWSxCOLS`.
    #[arg(long, default_value = "20x20", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long, default_value_t = 1.0)]
    cell: f64,
    #[arg(long, default_value_t = 100)]
    objects: usize,
    #[arg(long, default_value_t = 100.0)]
    duration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    jitter: f64,
    /// Generate an interval workload on a single segment instead of trajectories.
    #[arg(long, value_parser = parse_from_str::<WorkloadKind>)]
    workload: Option<WorkloadKind>,
    /// Interval count for `--workload`.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Common (fixed) or mean (trajectory) interval length for `--workload`.
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    #[arg(long, default_value_t = QueryFamily::RangeEqual, value_parser = parse_from_str::<QueryFamily>)]
    family: QueryFamily,
    /// Query window side, percent of each dimension.
    #[arg(long, default_value_t = 10.0)]
    extent: f64,
    #[arg(long, default_value_t = 500)]
    queries: usize,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    records: PathBuf,
    /// Index file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = Backend::Iis, value_parser = parse_from_str::<Backend>)]
    backend: Backend,
    #[arg(long, default_value_t = 8)]
    scale_digits: u8,
    #[arg(long, default_value_t = 32)]
    fanout: usize,
    /// Segments with fewer records use a linear scan.
    #[arg(long, default_value_t = 16)]
    threshold: usize,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// Query file; required unless `--window` is given.
    #[arg(long, required_unless_present = "window")]
    queries: Option<PathBuf>,
    /// Single window `xmin,ymin,xmax,ymax`.
    #[arg(long, conflicts_with = "queries", value_parser = parse_window)]
    window: Option<Rect>,
    /// Time-slice at `t` (replaces the query times).
    #[arg(long, conflicts_with_all = ["from", "to"])]
    at: Option<f64>,
    #[arg(long, requires = "to")]
    from: Option<f64>,
    #[arg(long, requires = "from")]
    to: Option<f64>,
    /// Print counts only.
    #[arg(long)]
    count: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<Backend>)]
    backends: Option<Vec<Backend>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<WorkloadKind>)]
    scenarios: Option<Vec<WorkloadKind>>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<QueryFamily>)]
    families: Option<Vec<QueryFamily>>,
    #[arg(long, value_delimiter = ',')]
    extents: Option<Vec<f64>>,
    /// Skip the trajectory-index part.
    #[arg(long)]
    no_families: bool,
    /// Skip the interval workload part.
    #[arg(long)]
    no_scenarios: bool,
    #[arg(long)]
    interval_extent: Option<f64>,
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scale_digits: Option<u8>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    objects: Option<usize>,
    /// Run independent cells in parallel.
    #[arg(long)]
    parallel: bool,
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or("expected ROWSxCOLS")?;
    Ok((
        r.parse().map_err(|_| "bad row count")?,
        c.parse().map_err(|_| "bad column count")?,
    ))
}

fn parse_window(s: &str) -> Result<Rect, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad coordinate `{x}`"))
        })
        .collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c, d] => Rect::new(a, b, c, d).map_err(|e| e.to_string()),
        _ => Err("expected xmin,ymin,xmax,ymax".into()),
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_gen(a: GenArgs) -> trajix::Result<()> {
    let (net, records, extent, duration) = match a.workload {
        Some(kind) => {
            let spec = WorkloadSpec {
                length: a.length,
                jitter: a.jitter,
                ..WorkloadSpec::new(kind, a.n, a.seed)
            };
            let net = Network::new(
                vec![Point::new(0.0, 0.0)?, Point::new(a.cell, 0.0)?],
                vec![(0, 1)],
            )?;
            let records: Vec<_> = gen_interval_workload(&spec)?
                .into_iter()
                .map(|r| (0, r))
                .collect();
            let extent = Rect::new(0.0, 0.0, a.cell, a.cell)?;
            (net, records, extent, spec.horizon)
        }
        None => {
            let net = gen_grid_network(a.grid.0, a.grid.1, a.cell)?;
            let cfg = TrajectoryConfig {
                objects: a.objects,
                duration: a.duration,
                seed: a.seed,
                jitter: a.jitter,
                ..Default::default()
            };
            let records = gen_trajectories(&net, &cfg)?;
            let extent = net.extent().expect("grid is non-empty");
            (net, records, extent, a.duration)
        }
    };
    let qspec = QuerySetSpec {
        family: a.family,
        spatial_pct: a.extent,
        count: a.queries,
        seed: a.seed,
    };
    let queries = gen_query_set(&extent, duration, &qspec)?;
    write_network(&net, with_ext(&a.out, "network"))?;
    write_records(&records, with_ext(&a.out, "records"))?;
    write_queries(&queries, with_ext(&a.out, "queries"))?;
    eprintln!(
        "wrote {} nodes, {} edges, {} records, {} queries",
        net.node_count(),
        net.edge_count(),
        records.len(),
        queries.len()
    );
    Ok(())
}

fn cmd_build(a: BuildArgs) -> trajix::Result<()> {
    let net = read_network(&a.network)?;
    let records = read_records(&a.records, &net)?;
    let cfg = TrajIndexConfig {
        backend: a.backend,
        scale: ScaleConfig::new(a.scale_digits)?,
        fanout: a.fanout,
        small_threshold: a.threshold,
    };
    let index = TrajIndex::build(net, &records, cfg)?;
    save_index(&index, &a.out)?;
    print!("{}", index.stats().render());
    Ok(())
}

fn cmd_query(a: QueryArgs) -> trajix::Result<()> {
    let index = load_index(&a.index)?;
    let mut queries = match (&a.queries, a.window) {
        (Some(path), _) => read_queries(path)?,
        (None, Some(window)) => vec![RangeQuery {
            window,
            t_start: 0.0,
            t_end: f64::MAX,
        }],
        (None, None) => unreachable!("clap requires one of them"),
    };
    let times = match (a.at, a.from, a.to) {
        (Some(t), _, _) => Some((t, t)),
        (None, Some(f), Some(t)) => Some((f, t)),
        _ => None,
    };
    if let Some((t0, t1)) = times {
        for q in &mut queries {
            q.t_start = t0;
            q.t_end = t1;
        }
    } else if a.queries.is_none() {
        return Err(Error::Config("--window needs --at or --from/--to".into()));
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (i, q) in queries.iter().enumerate() {
        let res = index.query(q)?;
        write!(out, "{i} {}", res.object_ids.len())?;
        if !a.count {
            for id in &res.object_ids {
                write!(out, " {id}")?;
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> trajix::Result<()> {
    let d = BenchSpec::default();
    let spec = BenchSpec {
        backends: a.backends.unwrap_or(d.backends),
        scenarios: if a.no_scenarios {
            vec![]
        } else {
            a.scenarios.unwrap_or(d.scenarios)
        },
        sizes: a.sizes.unwrap_or(d.sizes),
        families: if a.no_families {
            vec![]
        } else {
            a.families.unwrap_or(d.families)
        },
        extents: a.extents.unwrap_or(d.extents),
        interval_extent: a.interval_extent.unwrap_or(d.interval_extent),
        queries: a.queries.unwrap_or(d.queries),
        repetitions: a.repetitions.unwrap_or(d.repetitions),
        seed: a.seed.unwrap_or(d.seed),
        scale_digits: a.scale_digits.unwrap_or(d.scale_digits),
        grid: a.grid.unwrap_or(d.grid),
        objects: a.objects.unwrap_or(d.objects),
        duration: d.duration,
        parallel: a.parallel,
    };
    let rows = run_bench(&spec)?;
    match &a.out {
        Some(path) => write_csv(&rows, BufWriter::new(File::create(path)?))?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    let claims = BenchClaims::from_rows(&rows);
    eprintln!(
        "result counts backend-invariant: {}",
        if claims.counts_backend_invariant() {
            "yes"
        } else {
            "NO"
        }
    );
    for (n, iis, tree) in &claims.trajectory_space {
        eprintln!("trajectory n={n}: iis {iis} bytes, interval-tree {tree} bytes");
    }
    if !claims.counts_backend_invariant() {
        return Err(Error::InvalidInput(format!(
            "result counts differ between backends in {:?}",
            claims.inconsistent_groups
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

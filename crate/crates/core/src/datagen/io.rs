//! Plain-text network, record and query files.
//!
//! ```text
//! nodes <N> edges <E>
//! n <id> <x> <y>                       N lines, ids 0..N
//! e <id> <node_a> <node_b>             E lines, ids 0..E
//!
//! r <object_id> <edge_id> <t_entry> <t_exit>
//!
//! q <xmin> <ymin> <xmax> <ymax> <t_start> <t_end>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Timestamps carry at
//! most 8 fractional digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::Network;
use crate::error::{Error, Result};
use crate::model::{IntervalRecord, Point, Rect, SegmentId, TimeInterval};
use crate::traj::RangeQuery;

const MAX_FRACTION_DIGITS: usize = 8;

struct Lines<R> {
    inner: R,
    path: String,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn new(inner: R, path: &str) -> Self {
        Lines {
            inner,
            path: path.to_string(),
            line: 0,
            buf: String::new(),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    /// Next meaningful line split into fields.
    fn next_fields(&mut self) -> Result<Option<Vec<String>>> {
        loop {
            self.buf.clear();
            if self.inner.read_line(&mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let trimmed = self.buf.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some(
                trimmed.split_whitespace().map(str::to_string).collect(),
            ));
        }
    }

    fn parse<T: FromStr>(&self, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.err(format!("invalid {what} `{field}`")))
    }

    fn time(&self, field: &str) -> Result<f64> {
        let t: f64 = self.parse(field, "timestamp")?;
        let fraction = field.split_once('.').map_or(0, |(_, f)| f.len());
        if fraction > MAX_FRACTION_DIGITS || field.contains(['e', 'E']) || !t.is_finite() {
            return Err(self.err(format!(
                "timestamp `{field}` must be a plain decimal with at most {MAX_FRACTION_DIGITS} fractional digits"
            )));
        }
        Ok(t)
    }

    fn expect(&self, fields: &[String], tag: &str, arity: usize) -> Result<()> {
        if fields[0] != tag || fields.len() != arity {
            return Err(self.err(format!(
                "expected `{tag}` line with {} values, found `{}`",
                arity - 1,
                fields.join(" ")
            )));
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// Shortest decimal that round-trips, capped at 8 fractional digits.
pub fn format_time(t: f64) -> String {
    let s = t.to_string();
    let fraction = s.split_once('.').map_or(0, |(_, f)| f.len());
    if fraction <= MAX_FRACTION_DIGITS && !s.contains('e') {
        return s;
    }
    let s = format!("{t:.8}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn parse_network<R: BufRead>(reader: R, name: &str) -> Result<Network> {
    let mut lines = Lines::new(reader, name);
    let header = lines
        .next_fields()?
        .ok_or_else(|| lines.err("missing `nodes <N> edges <E>` header"))?;
    if header.len() != 4 || header[0] != "nodes" || header[2] != "edges" {
        return Err(lines.err("expected `nodes <N> edges <E>` header"));
    }
    let node_count: usize = lines.parse(&header[1], "node count")?;
    let edge_count: usize = lines.parse(&header[3], "edge count")?;

    let mut nodes = vec![None; node_count];
    for _ in 0..node_count {
        let f = lines
            .next_fields()?
            .ok_or_else(|| lines.err("fewer node lines than declared"))?;
        lines.expect(&f, "n", 4)?;
        let id: usize = lines.parse(&f[1], "node id")?;
        let x: f64 = lines.parse(&f[2], "coordinate")?;
        let y: f64 = lines.parse(&f[3], "coordinate")?;
        let p = Point::new(x, y).map_err(|e| lines.err(e.to_string()))?;
        match nodes.get_mut(id) {
            Some(slot @ None) => *slot = Some(p),
            Some(Some(_)) => return Err(lines.err(format!("duplicate node id {id}"))),
            None => return Err(lines.err(format!("node id {id} outside 0..{node_count}"))),
        }
    }
    let mut edges = vec![None; edge_count];
    for _ in 0..edge_count {
        let f = lines
            .next_fields()?
            .ok_or_else(|| lines.err("fewer edge lines than declared"))?;
        lines.expect(&f, "e", 4)?;
        let id: usize = lines.parse(&f[1], "edge id")?;
        let a: u32 = lines.parse(&f[2], "node id")?;
        let b: u32 = lines.parse(&f[3], "node id")?;
        if a as usize >= node_count || b as usize >= node_count {
            return Err(lines.err(format!("edge {id} references an unknown node")));
        }
        if nodes[a as usize] == nodes[b as usize] {
            return Err(lines.err(format!("edge {id} has zero length")));
        }
        match edges.get_mut(id) {
            Some(slot @ None) => *slot = Some((a, b)),
            Some(Some(_)) => return Err(lines.err(format!("duplicate edge id {id}"))),
            None => return Err(lines.err(format!("edge id {id} outside 0..{edge_count}"))),
        }
    }
    if let Some(extra) = lines.next_fields()? {
        return Err(lines.err(format!(
            "unexpected line `{}` after the declared edges",
            extra.join(" ")
        )));
    }
    Network::new(
        nodes
            .into_iter()
            .map(|p| p.expect("all ids filled"))
            .collect(),
        edges
            .into_iter()
            .map(|e| e.expect("all ids filled"))
            .collect(),
    )
}

pub fn read_network(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    parse_network(open(path)?, &path.display().to_string())
}

pub fn write_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_network_to(net, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_network_to<W: Write>(net: &Network, w: &mut W) -> Result<()> {
    writeln!(w, "nodes {} edges {}", net.node_count(), net.edge_count())?;
    for (i, p) in net.nodes().iter().enumerate() {
        writeln!(w, "n {i} {} {}", p.x, p.y)?;
    }
    for (i, (a, b)) in net.edges().iter().enumerate() {
        writeln!(w, "e {i} {a} {b}")?;
    }
    Ok(())
}

/// Parses records, checking every edge id against `net`.
pub fn parse_records<R: BufRead>(
    reader: R,
    name: &str,
    net: &Network,
) -> Result<Vec<(SegmentId, IntervalRecord)>> {
    let mut lines = Lines::new(reader, name);
    let mut out = Vec::new();
    while let Some(f) = lines.next_fields()? {
        lines.expect(&f, "r", 5)?;
        let object: u32 = lines.parse(&f[1], "object id")?;
        let edge: SegmentId = lines.parse(&f[2], "edge id")?;
        if net.segment(edge).is_none() {
            return Err(lines.err(format!("record references unknown edge {edge}")));
        }
        let interval = TimeInterval::new(lines.time(&f[3])?, lines.time(&f[4])?)
            .map_err(|e| lines.err(e.to_string()))?;
        out.push((edge, IntervalRecord::new(object, interval)));
    }
    Ok(out)
}

pub fn read_records(
    path: impl AsRef<Path>,
    net: &Network,
) -> Result<Vec<(SegmentId, IntervalRecord)>> {
    let path = path.as_ref();
    parse_records(open(path)?, &path.display().to_string(), net)
}

pub fn write_records(
    records: &[(SegmentId, IntervalRecord)],
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_records_to(records, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_records_to<W: Write>(
    records: &[(SegmentId, IntervalRecord)],
    w: &mut W,
) -> Result<()> {
    for (edge, r) in records {
        writeln!(
            w,
            "r {} {edge} {} {}",
            r.object_id,
            format_time(r.interval.start),
            format_time(r.interval.end)
        )?;
    }
    Ok(())
}

pub fn parse_queries<R: BufRead>(reader: R, name: &str) -> Result<Vec<RangeQuery>> {
    let mut lines = Lines::new(reader, name);
    let mut out = Vec::new();
    while let Some(f) = lines.next_fields()? {
        lines.expect(&f, "q", 7)?;
        let mut c = [0f64; 4];
        for (slot, field) in c.iter_mut().zip(&f[1..5]) {
            *slot = lines.parse(field, "coordinate")?;
        }
        let window = Rect::new(c[0], c[1], c[2], c[3]).map_err(|e| lines.err(e.to_string()))?;
        let (t_start, t_end) = (lines.time(&f[5])?, lines.time(&f[6])?);
        if t_start < 0.0 || t_start > t_end {
            return Err(lines.err(format!("query time range [{t_start}, {t_end}] is invalid")));
        }
        out.push(RangeQuery {
            window,
            t_start,
            t_end,
        });
    }
    Ok(out)
}

pub fn read_queries(path: impl AsRef<Path>) -> Result<Vec<RangeQuery>> {
    let path = path.as_ref();
    parse_queries(open(path)?, &path.display().to_string())
}

pub fn write_queries(queries: &[RangeQuery], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_queries_to(queries, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_queries_to<W: Write>(queries: &[RangeQuery], w: &mut W) -> Result<()> {
    for q in queries {
        let r = q.window;
        writeln!(
            w,
            "q {} {} {} {} {} {}",
            r.xmin,
            r.ymin,
            r.xmax,
            r.ymax,
            format_time(q.t_start),
            format_time(q.t_end)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_grid_network, gen_trajectories, TrajectoryConfig};

    fn parse_err_line(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn network_round_trip() {
        let net = gen_grid_network(4, 5, 1.5).unwrap();
        let mut buf = Vec::new();
        write_network_to(&net, &mut buf).unwrap();
        assert_eq!(parse_network(buf.as_slice(), "mem").unwrap(), net);
    }

    #[test]
    fn records_round_trip() {
        let net = gen_grid_network(6, 6, 1.0).unwrap();
        let recs = gen_trajectories(
            &net,
            &TrajectoryConfig {
                objects: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_records_to(&recs, &mut buf).unwrap();
        assert_eq!(parse_records(buf.as_slice(), "mem", &net).unwrap(), recs);
    }

    #[test]
    fn queries_round_trip() {
        let qs = vec![
            RangeQuery {
                window: Rect::new(0.5, 1.0, 2.0, 3.25).unwrap(),
                t_start: 1.5,
                t_end: 2.0,
            },
            RangeQuery {
                window: Rect::new(0.0, 0.0, 0.0, 0.0).unwrap(),
                t_start: 7.0,
                t_end: 7.0,
            },
        ];
        let mut buf = Vec::new();
        write_queries_to(&qs, &mut buf).unwrap();
        assert_eq!(parse_queries(buf.as_slice(), "mem").unwrap(), qs);
    }

    #[test]
    fn malformed_lines_cite_their_number() {
        let text = "nodes 2 edges 1\nn 0 0 0\nn 1 1 zero\ne 0 0 1\n";
        assert_eq!(
            parse_err_line(parse_network(text.as_bytes(), "net").unwrap_err()),
            3
        );
        let net = gen_grid_network(2, 2, 1.0).unwrap();
        let text = "r 0 1 0.5 1.0\n\n# comment\nr 0 1 oops 2\n";
        assert_eq!(
            parse_err_line(parse_records(text.as_bytes(), "recs", &net).unwrap_err()),
            4
        );
        let text = "q 0 0 1 1 0 1\nq 0 0 1\n";
        assert_eq!(
            parse_err_line(parse_queries(text.as_bytes(), "qs").unwrap_err()),
            2
        );
    }

    #[test]
    fn unknown_edge_is_a_referential_error() {
        let net = gen_grid_network(2, 2, 1.0).unwrap();
        let err = parse_records("r 3 17 0 1\n".as_bytes(), "recs", &net).unwrap_err();
        assert_eq!(parse_err_line(err), 1);
    }

    #[test]
    fn timestamp_precision_is_limited() {
        let net = gen_grid_network(2, 2, 1.0).unwrap();
        assert!(parse_records("r 0 0 0.123456789 1\n".as_bytes(), "recs", &net).is_err());
        assert!(parse_records("r 0 0 1e2 200\n".as_bytes(), "recs", &net).is_err());
        assert!(parse_records("r 0 0 0.12345678 1\n".as_bytes(), "recs", &net).is_ok());
        assert_eq!(format_time(1.0 / 3.0), "0.33333333");
        assert_eq!(format_time(2.5), "2.5");
    }

    #[test]
    fn header_counts_must_match() {
        assert!(parse_network("nodes 3 edges 0\nn 0 0 0\n".as_bytes(), "net").is_err());
        assert!(parse_network("nodes 2 edges 0\nn 0 0 0\nn 0 1 1\n".as_bytes(), "net").is_err());
        assert!(parse_network(
            "nodes 2 edges 1\nn 0 0 0\nn 1 1 1\ne 5 0 1\n".as_bytes(),
            "net"
        )
        .is_err());
        assert!(parse_network("".as_bytes(), "net").is_err());
    }
}

//! Binary index files. Little-endian throughout, every block 8-byte aligned.
//!
//! ```text
//! header    "TJIX" | version u16 | backend u8 | digits u8 | fanout u32 | threshold u32
//! network   node count u64 | (x f64, y f64)* | edge count u64 | (a u32, b u32)*
//! rtree     entry count u64 | (id u32, 0 u32, xmin, ymin, xmax, ymax f64)*
//!           node count u64 | (xmin, ymin, xmax, ymax f64, kind u32, start u32, end u32, 0 u32)*
//!           root u64 (u64::MAX when empty)
//! temporal  block count u64, then per block in ascending segment order:
//!           segment u32 | backend u8 | 0 u8 x3 | records u32 | 0 u32
//!           object ids u32*, zero padded to 8 bytes
//!           payload: the IIS layout for iis blocks, (start u64, end u64)* otherwise
//! ```
//!
//! Non-IIS backends are rebuilt from their ticks on load.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{SegmentTemporal, TrajIndex, TrajIndexConfig};
use crate::datagen::Network;
use crate::error::{Error, Result};
use crate::iis::elias_fano::{read_u64, truncated};
use crate::iis::IisIndex;
use crate::model::{Point, Rect, ScaleConfig, TickInterval};
use crate::rtree::{Node, NodeKind, RTree, RTreeEntry};
use crate::temporal::{Backend, IntervalIndex, TemporalIndex};

pub const MAGIC: &[u8; 4] = b"TJIX";
pub const FORMAT_VERSION: u16 = 1;

const NO_ROOT: u64 = u64::MAX;

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_rect<W: Write>(w: &mut W, r: &Rect) -> Result<()> {
    for v in [r.xmin, r.ymin, r.xmax, r.ymax] {
        put_f64(w, v)?;
    }
    Ok(())
}

fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(buf)
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(get(r)?))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(get(r)?))
}

fn get_rect<R: Read>(r: &mut R) -> Result<Rect> {
    let (a, b, c, d) = (get_f64(r)?, get_f64(r)?, get_f64(r)?, get_f64(r)?);
    Rect::new(a, b, c, d).map_err(|e| bad(format!("bounding box: {e}")))
}

/// Counts are checked against the bytes left so corrupt lengths cannot
/// trigger huge allocations.
fn get_count(r: &mut &[u8], item_bytes: usize) -> Result<usize> {
    let n = read_u64(r)?;
    match usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(item_bytes))
    {
        Some(bytes) if bytes <= r.len() => Ok(n as usize),
        _ => Err(bad("unexpected end of data")),
    }
}

pub fn write_index<W: Write>(index: &TrajIndex, w: &mut W) -> Result<()> {
    let cfg = index.config();
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[cfg.backend.tag(), cfg.scale.digits()])?;
    put_u32(w, cfg.fanout as u32)?;
    put_u32(w, cfg.small_threshold as u32)?;

    let net = index.network();
    put_u64(w, net.node_count() as u64)?;
    for p in net.nodes() {
        put_f64(w, p.x)?;
        put_f64(w, p.y)?;
    }
    put_u64(w, net.edge_count() as u64)?;
    for &(a, b) in net.edges() {
        put_u32(w, a)?;
        put_u32(w, b)?;
    }

    let rtree = index.rtree();
    put_u64(w, rtree.entries().len() as u64)?;
    for e in rtree.entries() {
        put_u32(w, e.id)?;
        put_u32(w, 0)?;
        put_rect(w, &e.mbb)?;
    }
    let (nodes, root) = rtree.raw_parts();
    put_u64(w, nodes.len() as u64)?;
    for n in nodes {
        put_rect(w, &n.mbb)?;
        put_u32(w, matches!(n.kind, NodeKind::Inner) as u32)?;
        put_u32(w, n.start)?;
        put_u32(w, n.end)?;
        put_u32(w, 0)?;
    }
    put_u64(w, root.map_or(NO_ROOT, u64::from))?;

    let slots = index.temporal_slots();
    put_u64(w, slots.iter().flatten().count() as u64)?;
    for (seg, slot) in slots.iter().enumerate() {
        let Some(t) = slot else { continue };
        put_u32(w, seg as u32)?;
        w.write_all(&[t.index.backend().tag(), 0, 0, 0])?;
        put_u32(w, t.objects.len() as u32)?;
        put_u32(w, 0)?;
        for &o in &t.objects {
            put_u32(w, o)?;
        }
        if t.objects.len() % 2 == 1 {
            put_u32(w, 0)?;
        }
        match &t.index {
            TemporalIndex::Iis(iis) => iis.write_to(w)?,
            other => {
                let mut ticks = vec![TickInterval { start: 0, end: 0 }; other.len()];
                other.visit_hits(0, u64::MAX, &mut |i, iv| ticks[i as usize] = iv);
                for iv in ticks {
                    put_u64(w, iv.start)?;
                    put_u64(w, iv.end)?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_index(bytes: &[u8]) -> Result<TrajIndex> {
    let mut r = bytes;
    let r = &mut r;
    if get::<4, _>(r)? != *MAGIC {
        return Err(bad("not an index file (bad magic)"));
    }
    let version = u16::from_le_bytes(get(r)?);
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let [backend_tag, digits] = get(r)?;
    let backend = Backend::from_tag(backend_tag)
        .ok_or_else(|| bad(format!("unknown backend tag {backend_tag}")))?;
    let scale = ScaleConfig::new(digits).map_err(|e| bad(e.to_string()))?;
    let fanout = get_u32(r)? as usize;
    let small_threshold = get_u32(r)? as usize;
    let cfg = TrajIndexConfig {
        backend,
        scale,
        fanout,
        small_threshold,
    };

    let node_count = get_count(r, 16)?;
    let nodes = (0..node_count)
        .map(|_| Point::new(get_f64(r)?, get_f64(r)?).map_err(|e| bad(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let edge_count = get_count(r, 8)?;
    let edges = (0..edge_count)
        .map(|_| Ok((get_u32(r)?, get_u32(r)?)))
        .collect::<Result<Vec<_>>>()?;
    let network = Network::new(nodes, edges).map_err(|e| bad(format!("network: {e}")))?;

    let entry_count = get_count(r, 40)?;
    let mut seen = vec![false; network.edge_count()];
    let mut entries = Vec::with_capacity(entry_count);
    for _ in 0..entry_count {
        let id = get_u32(r)?;
        get_u32(r)?;
        let mbb = get_rect(r)?;
        match seen.get_mut(id as usize) {
            Some(s) if !*s => *s = true,
            _ => return Err(bad("R-tree entries do not match the network segments")),
        }
        entries.push(RTreeEntry { id, mbb });
    }
    if entries.len() != network.edge_count() {
        return Err(bad("R-tree entries do not match the network segments"));
    }
    let rnode_count = get_count(r, 48)?;
    let mut rnodes = Vec::with_capacity(rnode_count);
    for _ in 0..rnode_count {
        let mbb = get_rect(r)?;
        let kind = match get_u32(r)? {
            0 => NodeKind::Leaf,
            1 => NodeKind::Inner,
            k => return Err(bad(format!("unknown R-tree node kind {k}"))),
        };
        let (start, end) = (get_u32(r)?, get_u32(r)?);
        get_u32(r)?;
        rnodes.push(Node {
            mbb,
            kind,
            start,
            end,
        });
    }
    let root = match read_u64(r)? {
        NO_ROOT => None,
        v => Some(u32::try_from(v).map_err(|_| bad("R-tree root out of range"))?),
    };
    let rtree = RTree::from_raw_parts(fanout, entries, rnodes, root)?;

    let block_count = get_count(r, 16)?;
    let mut temporal: Vec<Option<SegmentTemporal>> = vec![None; network.edge_count()];
    let mut prev = None;
    for _ in 0..block_count {
        let seg = get_u32(r)?;
        if prev.is_some_and(|p| p >= seg) || seg as usize >= temporal.len() {
            return Err(bad(format!(
                "temporal block for segment {seg} out of order or unknown"
            )));
        }
        prev = Some(seg);
        let [tag, ..] = get::<4, _>(r)?;
        let block_backend =
            Backend::from_tag(tag).ok_or_else(|| bad(format!("unknown backend tag {tag}")))?;
        let count = get_u32(r)? as usize;
        get_u32(r)?;
        if count == 0 || count.saturating_mul(4) > r.len() {
            return Err(bad(format!("segment {seg}: bad record count")));
        }
        let objects = (0..count).map(|_| get_u32(r)).collect::<Result<Vec<_>>>()?;
        if count % 2 == 1 {
            get_u32(r)?;
        }
        let index = match block_backend {
            Backend::Iis => TemporalIndex::Iis(IisIndex::read_from(r, scale, small_threshold)?),
            other => {
                if count.saturating_mul(16) > r.len() {
                    return Err(bad("unexpected end of data"));
                }
                let ticks = (0..count)
                    .map(|_| {
                        let (s, e) = (read_u64(r)?, read_u64(r)?);
                        TickInterval::new(s, e).map_err(|e| bad(e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                TemporalIndex::build_ticks(other, ticks, scale, small_threshold)?
            }
        };
        if index.len() != count {
            return Err(bad(format!(
                "segment {seg}: record count disagrees with its temporal index"
            )));
        }
        temporal[seg as usize] = Some(SegmentTemporal { objects, index });
    }
    if !r.is_empty() {
        return Err(bad(format!("{} trailing bytes", r.len())));
    }
    Ok(TrajIndex::from_parts(network, rtree, temporal, cfg))
}

pub fn save_index(index: &TrajIndex, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_index(index, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<TrajIndex> {
    read_index(&fs::read(path)?)
}

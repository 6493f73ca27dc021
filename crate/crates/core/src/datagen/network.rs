use crate::error::{Error, Result};
use crate::model::{Point, Segment, SegmentId};

/// Road graph. Edge ids are dense (`0..edge_count`) and index `segments`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Point>,
    edges: Vec<(u32, u32)>,
    segments: Vec<Segment>,
    /// Per node: (edge id, neighbour node).
    adjacency: Vec<Vec<(SegmentId, u32)>>,
}

impl Network {
    pub fn new(nodes: Vec<Point>, edges: Vec<(u32, u32)>) -> Result<Self> {
        if edges.len() > u32::MAX as usize || nodes.len() > u32::MAX as usize {
            return Err(Error::InvalidInput("network is too large".into()));
        }
        let mut segments = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (id, &(a, b)) in edges.iter().enumerate() {
            let (pa, pb) = match (nodes.get(a as usize), nodes.get(b as usize)) {
                (Some(pa), Some(pb)) => (*pa, *pb),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "edge {id} references a node that does not exist"
                    )))
                }
            };
            segments.push(Segment::new(id as SegmentId, pa, pb)?);
            adjacency[a as usize].push((id as SegmentId, b));
            adjacency[b as usize].push((id as SegmentId, a));
        }
        Ok(Network {
            nodes,
            edges,
            segments,
            adjacency,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> Option<&Segment> {
        self.segments.get(id as usize)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn neighbours(&self, node: u32) -> &[(SegmentId, u32)] {
        &self.adjacency[node as usize]
    }

    /// Bounding box of all nodes.
    pub fn extent(&self) -> Option<crate::model::Rect> {
        self.segments
            .iter()
            .map(Segment::mbb)
            .reduce(|a, b| a.union(&b))
    }

    /// Accounted bytes for node coordinates and edge endpoints.
    pub fn space_bytes(&self) -> usize {
        self.nodes.len() * 16 + self.edges.len() * 8
    }
}

/// `rows x cols` lattice with spacing `cell`. Node `(r, c)` has id
/// `r * cols + c` and sits at `(c * cell, r * cell)`; horizontal edges are
/// numbered first, row by row, then vertical edges.
pub fn gen_grid_network(rows: usize, cols: usize, cell: f64) -> Result<Network> {
    if rows < 2 || cols < 2 {
        return Err(Error::Config(format!(
            "grid must be at least 2x2, got {rows}x{cols}"
        )));
    }
    if !(cell.is_finite() && cell > 0.0) {
        return Err(Error::Config(format!(
            "grid cell size must be positive, got {cell}"
        )));
    }
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    let mut nodes = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            nodes.push(Point::new(c as f64 * cell, r as f64 * cell)?);
        }
    }
    let mut edges = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols - 1 {
            edges.push((id(r, c), id(r, c + 1)));
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols {
            edges.push((id(r, c), id(r + 1, c)));
        }
    }
    Network::new(nodes, edges)
}

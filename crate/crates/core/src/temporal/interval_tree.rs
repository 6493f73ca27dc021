//! Centered interval tree.
//!
//! Each node splits on the lower median of its intervals' endpoints. The
//! intervals stabbed by the median stay at the node, sorted twice (by start
//! ascending, by end descending); the rest recurse left or right. Nodes with
//! at most [`BUCKET_SIZE`] intervals are kept as unsorted buckets and
//! scanned sequentially.

use crate::error::Result;
use crate::model::{IntervalRecord, ScaleConfig, Tick, TickInterval};

use super::{check_len, discretize_records, IntervalIndex};

pub const BUCKET_SIZE: usize = 16;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
struct Node {
    median: Tick,
    /// `by_start[lo..hi]` and `by_end[lo..hi]` hold this node's intervals.
    lo: u32,
    hi: u32,
    left: u32,
    right: u32,
    bucket: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalTree {
    intervals: Vec<TickInterval>,
    nodes: Vec<Node>,
    by_start: Vec<u32>,
    by_end: Vec<u32>,
    scale: ScaleConfig,
}

impl IntervalTree {
    pub fn build(records: &[IntervalRecord], scale: ScaleConfig) -> Result<Self> {
        Self::from_ticks(discretize_records(records, scale)?, scale)
    }

    pub fn from_ticks(intervals: Vec<TickInterval>, scale: ScaleConfig) -> Result<Self> {
        check_len(intervals.len())?;
        let n = intervals.len();
        let mut tree = IntervalTree {
            intervals,
            nodes: Vec::new(),
            by_start: Vec::with_capacity(n),
            by_end: Vec::with_capacity(n),
            scale,
        };
        if n > 0 {
            let all: Vec<u32> = (0..n as u32).collect();
            tree.build_node(all);
        }
        Ok(tree)
    }

    fn build_node(&mut self, members: Vec<u32>) -> u32 {
        let id = self.nodes.len() as u32;
        let lo = self.by_start.len() as u32;
        if members.len() <= BUCKET_SIZE {
            self.by_start.extend_from_slice(&members);
            self.by_end.extend_from_slice(&members);
            self.nodes.push(Node {
                median: 0,
                lo,
                hi: self.by_start.len() as u32,
                left: NONE,
                right: NONE,
                bucket: true,
            });
            return id;
        }

        let mut endpoints: Vec<Tick> = members
            .iter()
            .flat_map(|&i| {
                let iv = self.intervals[i as usize];
                [iv.start, iv.end]
            })
            .collect();
        let mid = (endpoints.len() - 1) / 2;
        let (_, &mut median, _) = endpoints.select_nth_unstable(mid);

        let mut here = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for i in members {
            let iv = self.intervals[i as usize];
            if iv.end < median {
                left.push(i);
            } else if iv.start > median {
                right.push(i);
            } else {
                here.push(i);
            }
        }

        let ivs = &self.intervals;
        here.sort_unstable_by_key(|&i| (ivs[i as usize].start, i));
        self.by_start.extend_from_slice(&here);
        here.sort_unstable_by_key(|&i| (std::cmp::Reverse(ivs[i as usize].end), i));
        self.by_end.extend_from_slice(&here);
        self.nodes.push(Node {
            median,
            lo,
            hi: self.by_start.len() as u32,
            left: NONE,
            right: NONE,
            bucket: false,
        });

        if !left.is_empty() {
            let child = self.build_node(left);
            self.nodes[id as usize].left = child;
        }
        if !right.is_empty() {
            let child = self.build_node(right);
            self.nodes[id as usize].right = child;
        }
        id
    }

    fn walk(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            let range = node.lo as usize..node.hi as usize;
            if node.bucket {
                for &i in &self.by_start[range] {
                    if self.intervals[i as usize].intersects(l, r) {
                        f(i);
                    }
                }
                continue;
            }
            let m = node.median;
            if r < m {
                // Every interval here ends at or after m > r >= l.
                for &i in &self.by_start[range] {
                    if self.intervals[i as usize].start > r {
                        break;
                    }
                    f(i);
                }
            } else if l > m {
                for &i in &self.by_end[range] {
                    if self.intervals[i as usize].end < l {
                        break;
                    }
                    f(i);
                }
            } else {
                for &i in &self.by_start[range] {
                    f(i);
                }
            }
            if l < m && node.left != NONE {
                stack.push(node.left);
            }
            if r > m && node.right != NONE {
                stack.push(node.right);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn height(&self) -> usize {
        fn depth(t: &IntervalTree, id: u32) -> usize {
            if id == NONE {
                return 0;
            }
            let n = &t.nodes[id as usize];
            1 + depth(t, n.left).max(depth(t, n.right))
        }
        if self.nodes.is_empty() {
            0
        } else {
            depth(self, 0)
        }
    }

    /// The root's split point, if the root is not a bucket.
    pub fn root_median(&self) -> Option<Tick> {
        self.nodes.first().filter(|n| !n.bucket).map(|n| n.median)
    }
}

impl IntervalIndex for IntervalTree {
    fn len(&self) -> usize {
        self.intervals.len()
    }

    fn scale(&self) -> ScaleConfig {
        self.scale
    }

    fn visit(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32)) {
        self.walk(l, r, f)
    }

    fn visit_hits(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32, TickInterval)) {
        self.walk(l, r, &mut |i| f(i, self.intervals[i as usize]))
    }

    fn space_bytes(&self) -> usize {
        self.intervals.len() * 16
            + (self.by_start.len() + self.by_end.len()) * 4
            + self.nodes.len() * 25
    }
}

//! Schmidt's interval structure extended to intersection queries.
//!
//! The *father* of an interval is the rightmost interval covering it; the
//! father relation forms a forest under a virtual root whose pre-order is
//! the sort order `(start asc, end desc, record asc)`. Children of one node
//! never contain each other, so their starts and ends both increase left to
//! right.
//!
//! Endpoints are translated to rank space over the distinct endpoint
//! values. Two arrays indexed by rank locate the rightmost interval
//! intersecting a query:
//!
//! * `start2[k]`: rightmost interval whose start rank is `<= k`;
//! * `start[k]`: rightmost interval starting strictly before rank `k` and
//!   ending at or after it.
//!
//! From that interval the query walks up the father chain, reporting every
//! left sibling (and its subtree) while the sibling's end reaches the query.

use std::collections::BinaryHeap;

use crate::error::Result;
use crate::model::{IntervalRecord, ScaleConfig, Tick, TickInterval};

use super::{check_len, discretize_records, IntervalIndex};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtIndex {
    /// Distinct endpoint values, ascending.
    points: Vec<Tick>,
    /// Per pre-order position.
    record: Vec<u32>,
    start_rank: Vec<u32>,
    end_rank: Vec<u32>,
    father: Vec<u32>,
    prev_sibling: Vec<u32>,
    last_child: Vec<u32>,
    /// Per rank.
    start: Vec<u32>,
    start2: Vec<u32>,
    scale: ScaleConfig,
}

impl SchmidtIndex {
    pub fn build(records: &[IntervalRecord], scale: ScaleConfig) -> Result<Self> {
        Self::from_ticks(discretize_records(records, scale)?, scale)
    }

    pub fn from_ticks(intervals: Vec<TickInterval>, scale: ScaleConfig) -> Result<Self> {
        check_len(intervals.len())?;
        let n = intervals.len();

        let mut points: Vec<Tick> = intervals.iter().flat_map(|iv| [iv.start, iv.end]).collect();
        points.sort_unstable();
        points.dedup();
        let rank = |t: Tick| points.binary_search(&t).expect("endpoint present") as u32;

        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by_key(|&i| {
            let iv = intervals[i as usize];
            (iv.start, std::cmp::Reverse(iv.end), i)
        });
        let start_rank: Vec<u32> = order
            .iter()
            .map(|&i| rank(intervals[i as usize].start))
            .collect();
        let end_rank: Vec<u32> = order
            .iter()
            .map(|&i| rank(intervals[i as usize].end))
            .collect();

        let mut father = vec![NONE; n];
        let mut prev_sibling = vec![NONE; n];
        let mut last_child = vec![NONE; n];
        let mut root_last = NONE;
        let mut chain: Vec<u32> = Vec::new();
        for pos in 0..n as u32 {
            let end = end_rank[pos as usize];
            while chain
                .last()
                .is_some_and(|&top| end_rank[top as usize] < end)
            {
                chain.pop();
            }
            let slot = match chain.last() {
                Some(&f) => {
                    father[pos as usize] = f;
                    &mut last_child[f as usize]
                }
                None => &mut root_last,
            };
            prev_sibling[pos as usize] = *slot;
            *slot = pos;
            chain.push(pos);
        }

        let p = points.len();
        let mut start2 = vec![NONE; p];
        let mut start = vec![NONE; p];
        let mut next = 0usize;
        let mut open = BinaryHeap::new();
        for k in 0..p {
            // Intervals starting strictly before rank k.
            while next < n && (start_rank[next] as usize) < k {
                open.push(next as u32);
                next += 1;
            }
            while open
                .peek()
                .is_some_and(|&top| (end_rank[top as usize] as usize) < k)
            {
                open.pop();
            }
            start[k] = open.peek().copied().unwrap_or(NONE);
            let mut last = next;
            while last < n && start_rank[last] as usize <= k {
                last += 1;
            }
            start2[k] = if last == 0 { NONE } else { (last - 1) as u32 };
        }

        Ok(SchmidtIndex {
            points,
            record: order,
            start_rank,
            end_rank,
            father,
            prev_sibling,
            last_child,
            start,
            start2,
            scale,
        })
    }

    /// Pre-order position of the rightmost interval intersecting the rank
    /// range, plus the rank of the first endpoint `>= l`.
    fn rightmost(&self, l: Tick, r: Tick) -> Option<(u32, u32)> {
        let upto_r = self.points.partition_point(|&x| x <= r);
        if upto_r == 0 {
            return None;
        }
        let rightmost_started = self.start2[upto_r - 1];
        if rightmost_started == NONE {
            return None;
        }
        let first = self.points.partition_point(|&x| x < l) as u32;
        if self.end_rank[rightmost_started as usize] >= first {
            return Some((rightmost_started, first));
        }
        // Nothing starts inside [l, r]; only intervals stabbing l remain.
        let stab = *self.start.get(first as usize)?;
        (stab != NONE).then_some((stab, first))
    }

    fn walk(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32)) {
        let Some((mut cur, first)) = self.rightmost(l, r) else {
            return;
        };
        let mut pending = Vec::new();
        loop {
            f(cur);
            let mut sib = self.prev_sibling[cur as usize];
            while sib != NONE && self.end_rank[sib as usize] >= first {
                pending.push(sib);
                sib = self.prev_sibling[sib as usize];
            }
            // Subtrees left of the father chain lie entirely before the
            // rightmost hit, so only the end bound matters there.
            while let Some(v) = pending.pop() {
                f(v);
                let mut c = self.last_child[v as usize];
                while c != NONE && self.end_rank[c as usize] >= first {
                    pending.push(c);
                    c = self.prev_sibling[c as usize];
                }
            }
            cur = self.father[cur as usize];
            if cur == NONE {
                break;
            }
        }
    }

    fn interval_at(&self, pos: u32) -> TickInterval {
        TickInterval {
            start: self.points[self.start_rank[pos as usize] as usize],
            end: self.points[self.end_rank[pos as usize] as usize],
        }
    }

    /// Record index of the father of `record`, `None` for the virtual root.
    pub fn father(&self, record: usize) -> Option<usize> {
        let pos = self.record.iter().position(|&r| r as usize == record)?;
        let f = self.father[pos];
        (f != NONE).then(|| self.record[f as usize] as usize)
    }

    /// Record indices in depth-first, left-to-right order.
    pub fn preorder(&self) -> impl Iterator<Item = usize> + '_ {
        self.record.iter().map(|&r| r as usize)
    }

    pub fn distinct_endpoints(&self) -> usize {
        self.points.len()
    }
}

impl IntervalIndex for SchmidtIndex {
    fn len(&self) -> usize {
        self.record.len()
    }

    fn scale(&self) -> ScaleConfig {
        self.scale
    }

    fn visit(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32)) {
        self.walk(l, r, &mut |pos| f(self.record[pos as usize]))
    }

    fn visit_hits(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32, TickInterval)) {
        self.walk(l, r, &mut |pos| {
            f(self.record[pos as usize], self.interval_at(pos))
        })
    }

    fn space_bytes(&self) -> usize {
        self.points.len() * (8 + 4 + 4) + self.record.len() * 6 * 4
    }
}

//! Static 2D R-tree bulk loaded with sort-tile-recursive packing.
//!
//! Each level is packed into `ceil(len / fanout)` nodes whose sizes differ by
//! at most one, so every non-root node holds between `fanout / 2` and
//! `fanout` children.

use crate::error::{Error, Result};
use crate::model::{Rect, SegmentId};

pub const DEFAULT_FANOUT: usize = 32;
pub const MIN_FANOUT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTreeEntry {
    pub id: SegmentId,
    pub mbb: Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NodeKind {
    /// Children are `entries[start..end]`.
    Leaf,
    /// Children are `nodes[start..end]`.
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Node {
    pub(crate) mbb: Rect,
    pub(crate) kind: NodeKind,
    pub(crate) start: u32,
    pub(crate) end: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RTree {
    fanout: usize,
    /// Entries in leaf order.
    entries: Vec<RTreeEntry>,
    nodes: Vec<Node>,
    root: Option<u32>,
    height: usize,
}

impl RTree {
    pub fn build(entries: Vec<RTreeEntry>, fanout: usize) -> Result<Self> {
        if fanout < MIN_FANOUT {
            return Err(Error::Config(format!(
                "R-tree fanout must be at least {MIN_FANOUT}, got {fanout}"
            )));
        }
        if entries.len() > u32::MAX as usize {
            return Err(Error::Config("too many R-tree entries".into()));
        }
        let mut tree = RTree {
            fanout,
            entries: Vec::new(),
            nodes: Vec::new(),
            root: None,
            height: 0,
        };
        if entries.is_empty() {
            return Ok(tree);
        }

        let mut entries = entries;
        let groups = str_partition(&mut entries, fanout, |e| e.mbb, |e| e.id as u64);
        let mut level: Vec<u32> = Vec::with_capacity(groups.len());
        for range in groups {
            let mbb = entries[range.clone()]
                .iter()
                .map(|e| e.mbb)
                .reduce(|a, b| a.union(&b))
                .expect("non-empty group");
            level.push(tree.nodes.len() as u32);
            tree.nodes.push(Node {
                mbb,
                kind: NodeKind::Leaf,
                start: range.start as u32,
                end: range.end as u32,
            });
        }
        tree.entries = entries;
        tree.height = 1;

        while level.len() > 1 {
            // Lay the children out contiguously in packing order so every
            // parent references a dense range.
            let mut children: Vec<Node> = level.iter().map(|&i| tree.nodes[i as usize]).collect();
            let groups = str_partition(&mut children, fanout, |n| n.mbb, |n| n.start as u64);
            let base = tree.nodes.len() as u32;
            tree.nodes.extend_from_slice(&children);
            let mut next = Vec::with_capacity(groups.len());
            for range in groups {
                let mbb = children[range.clone()]
                    .iter()
                    .map(|n| n.mbb)
                    .reduce(|a, b| a.union(&b))
                    .expect("non-empty group");
                next.push(tree.nodes.len() as u32);
                tree.nodes.push(Node {
                    mbb,
                    kind: NodeKind::Inner,
                    start: base + range.start as u32,
                    end: base + range.end as u32,
                });
            }
            level = next;
            tree.height += 1;
        }
        tree.root = level.first().copied();
        tree.compact();
        Ok(tree)
    }

    /// Drops the node copies orphaned by re-laying out each level.
    fn compact(&mut self) {
        let Some(root) = self.root else { return };
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut remap = vec![u32::MAX; self.nodes.len()];
        // Breadth-first keeps sibling ranges contiguous.
        order.push(root);
        remap[root as usize] = 0;
        let mut head = 0;
        while head < order.len() {
            let node = self.nodes[order[head] as usize];
            head += 1;
            if node.kind == NodeKind::Inner {
                for child in node.start..node.end {
                    remap[child as usize] = order.len() as u32;
                    order.push(child);
                }
            }
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let mut node = self.nodes[old as usize];
                if node.kind == NodeKind::Inner {
                    node.start = remap[node.start as usize];
                    node.end = remap[(node.end - 1) as usize] + 1;
                }
                node
            })
            .collect();
        self.nodes = nodes;
        self.root = Some(0);
    }

    pub fn window_query(&self, w: &Rect) -> Vec<SegmentId> {
        let mut out = Vec::new();
        self.for_each_in_window(w, |id| out.push(id));
        out
    }

    pub fn for_each_in_window<F: FnMut(SegmentId)>(&self, w: &Rect, mut f: F) {
        let Some(root) = self.root else { return };
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            if !node.mbb.overlaps(w) {
                continue;
            }
            match node.kind {
                NodeKind::Inner => stack.extend(node.start..node.end),
                NodeKind::Leaf => {
                    for e in &self.entries[node.start as usize..node.end as usize] {
                        if e.mbb.overlaps(w) {
                            f(e.id);
                        }
                    }
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn min_fill(&self) -> usize {
        self.fanout / 2
    }

    /// Number of levels; 0 for the empty tree.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn root_mbb(&self) -> Option<Rect> {
        self.root.map(|r| self.nodes[r as usize].mbb)
    }

    pub fn entries(&self) -> &[RTreeEntry] {
        &self.entries
    }

    /// Accounted in-structure bytes.
    pub fn space_bytes(&self) -> usize {
        self.entries.len() * (4 + 32) + self.nodes.len() * (32 + 1 + 8)
    }

    pub(crate) fn raw_parts(&self) -> (&[Node], Option<u32>) {
        (&self.nodes, self.root)
    }

    pub(crate) fn from_raw_parts(
        fanout: usize,
        entries: Vec<RTreeEntry>,
        nodes: Vec<Node>,
        root: Option<u32>,
    ) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("R-tree: {m}"));
        if fanout < MIN_FANOUT {
            return Err(bad("fanout too small"));
        }
        let mut tree = RTree {
            fanout,
            entries,
            nodes,
            root,
            height: 0,
        };
        match tree.root {
            None if tree.entries.is_empty() && tree.nodes.is_empty() => return Ok(tree),
            None => return Err(bad("entries without a root")),
            Some(r) if r as usize >= tree.nodes.len() => return Err(bad("root out of range")),
            Some(_) => {}
        }
        // Validate ranges and measure height; leaves must sit at one depth.
        let mut leaf_depth = None;
        let mut covered = 0usize;
        let mut stack = vec![(tree.root.unwrap(), 1usize)];
        let mut visited = 0usize;
        while let Some((i, depth)) = stack.pop() {
            visited += 1;
            if visited > tree.nodes.len() {
                return Err(bad("node graph is not a tree"));
            }
            let node = tree.nodes[i as usize];
            if node.start >= node.end {
                return Err(bad("empty node"));
            }
            match node.kind {
                NodeKind::Leaf => {
                    if node.end as usize > tree.entries.len() {
                        return Err(bad("leaf range out of bounds"));
                    }
                    covered += (node.end - node.start) as usize;
                    match leaf_depth {
                        None => leaf_depth = Some(depth),
                        Some(d) if d != depth => return Err(bad("unbalanced leaves")),
                        _ => {}
                    }
                }
                NodeKind::Inner => {
                    if node.end as usize > tree.nodes.len() || node.start <= i {
                        return Err(bad("child range out of bounds"));
                    }
                    stack.extend((node.start..node.end).map(|c| (c, depth + 1)));
                }
            }
        }
        if covered != tree.entries.len() {
            return Err(bad("leaves do not cover every entry"));
        }
        tree.height = leaf_depth.unwrap_or(0);
        Ok(tree)
    }

    #[cfg(test)]
    pub(crate) fn check_invariants(&self) {
        let Some(root) = self.root else {
            assert!(self.entries.is_empty());
            return;
        };
        let mut stack = vec![(root, 1usize)];
        let mut depths = Vec::new();
        while let Some((i, depth)) = stack.pop() {
            let node = self.nodes[i as usize];
            let count = (node.end - node.start) as usize;
            assert!(count <= self.fanout);
            if i != root {
                assert!(count >= self.min_fill(), "node {i} holds {count}");
            }
            match node.kind {
                NodeKind::Leaf => {
                    depths.push(depth);
                    for e in &self.entries[node.start as usize..node.end as usize] {
                        assert!(node.mbb.contains_rect(&e.mbb));
                    }
                }
                NodeKind::Inner => {
                    for c in node.start..node.end {
                        assert!(node.mbb.contains_rect(&self.nodes[c as usize].mbb));
                        stack.push((c, depth + 1));
                    }
                }
            }
        }
        assert!(depths.iter().all(|&d| d == self.height));
    }
}

/// Sort-tile-recursive grouping of `items` (reordered in place) into
/// consecutive ranges of balanced size.
fn str_partition<T, M, K>(
    items: &mut [T],
    fanout: usize,
    mbb: M,
    key: K,
) -> Vec<std::ops::Range<usize>>
where
    M: Fn(&T) -> Rect,
    K: Fn(&T) -> u64,
{
    let n = items.len();
    let groups = n.div_ceil(fanout);
    let slabs = (groups as f64).sqrt().ceil() as usize;
    let sizes = balanced(n, groups);

    let cmp_x = |a: &T, b: &T| {
        let (ra, rb) = (mbb(a), mbb(b));
        (ra.xmin + ra.xmax)
            .total_cmp(&(rb.xmin + rb.xmax))
            .then(ra.xmin.total_cmp(&rb.xmin))
            .then(ra.ymin.total_cmp(&rb.ymin))
            .then(key(a).cmp(&key(b)))
    };
    let cmp_y = |a: &T, b: &T| {
        let (ra, rb) = (mbb(a), mbb(b));
        (ra.ymin + ra.ymax)
            .total_cmp(&(rb.ymin + rb.ymax))
            .then(ra.xmin.total_cmp(&rb.xmin))
            .then(ra.ymin.total_cmp(&rb.ymin))
            .then(key(a).cmp(&key(b)))
    };
    items.sort_by(cmp_x);

    let mut ranges = Vec::with_capacity(groups);
    let mut group = 0;
    let mut offset = 0;
    for groups_in_slab in balanced(groups, slabs) {
        let slab_len: usize = sizes[group..group + groups_in_slab].iter().sum();
        items[offset..offset + slab_len].sort_by(cmp_y);
        for &size in &sizes[group..group + groups_in_slab] {
            ranges.push(offset..offset + size);
            offset += size;
        }
        group += groups_in_slab;
    }
    debug_assert_eq!(offset, n);
    ranges
}

/// Splits `total` into `parts` sizes differing by at most one.
fn balanced(total: usize, parts: usize) -> Vec<usize> {
    if parts == 0 {
        return Vec::new();
    }
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

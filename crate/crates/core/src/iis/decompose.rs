//! Partition of an interval multiset into the fewest independent sets.
//!
//! Intervals are sorted by `(start asc, end desc, record asc)`. In that
//! order two intervals can share a set only if the later one also ends
//! strictly later, so the problem is covering the sequence of ends with the
//! fewest strictly increasing subsequences. Patience-style greedy: each
//! interval joins the set whose tail end is the largest value below its own
//! end, or opens a new set. Tails are kept sorted descending, so the search
//! is a binary search and the whole pass is `O(n log m)`.

use crate::model::TickInterval;

/// Record indices per set; each set is listed in start order.
pub fn decompose_iis(intervals: &[TickInterval]) -> Vec<Vec<u32>> {
    let mut order: Vec<u32> = (0..intervals.len() as u32).collect();
    order.sort_unstable_by_key(|&i| {
        let iv = intervals[i as usize];
        (iv.start, std::cmp::Reverse(iv.end), i)
    });

    let mut sets: Vec<Vec<u32>> = Vec::new();
    // (tail end, set id), descending by tail end.
    let mut tails: Vec<(u64, u32)> = Vec::new();
    for i in order {
        let iv = intervals[i as usize];
        let slot = tails.partition_point(|&(end, _)| end >= iv.end);
        if slot == tails.len() {
            tails.push((iv.end, sets.len() as u32));
            sets.push(vec![i]);
        } else {
            let set = tails[slot].1 as usize;
            debug_assert!(intervals[*sets[set].last().unwrap() as usize].start < iv.start);
            tails[slot].0 = iv.end;
            sets[set].push(i);
        }
    }
    sets
}

/// Set id for every record, as produced by [`decompose_iis`].
pub fn set_assignment(intervals: &[TickInterval]) -> Vec<u32> {
    let mut out = vec![0; intervals.len()];
    for (set, members) in decompose_iis(intervals).iter().enumerate() {
        for &i in members {
            out[i as usize] = set as u32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::testutil::*;

    fn is_independent(intervals: &[TickInterval], set: &[u32]) -> bool {
        set.windows(2).all(|w| {
            let (a, b) = (intervals[w[0] as usize], intervals[w[1] as usize]);
            a.start < b.start && a.end < b.end
        })
    }

    /// Longest chain of pairwise containments, with identical intervals
    /// ordered by record index. No two members of a chain can share a set.
    fn longest_containment_chain(intervals: &[TickInterval]) -> usize {
        let n = intervals.len();
        let contains = |a: usize, b: usize| {
            let (x, y) = (intervals[a], intervals[b]);
            x.contains(&y) && (x != y || a < b)
        };
        let mut memo = vec![0usize; n];
        fn depth(
            v: usize,
            n: usize,
            memo: &mut [usize],
            contains: &dyn Fn(usize, usize) -> bool,
        ) -> usize {
            if memo[v] != 0 {
                return memo[v];
            }
            let best = (0..n)
                .filter(|&w| w != v && contains(v, w))
                .map(|w| depth(w, n, memo, contains))
                .max()
                .unwrap_or(0);
            memo[v] = best + 1;
            memo[v]
        }
        (0..n)
            .map(|v| depth(v, n, &mut memo, &contains))
            .max()
            .unwrap_or(0)
    }

    fn check(intervals: &[TickInterval]) -> usize {
        let sets = decompose_iis(intervals);
        let mut seen = vec![false; intervals.len()];
        for set in &sets {
            assert!(!set.is_empty());
            assert!(is_independent(intervals, set), "{set:?}");
            for &i in set {
                assert!(!seen[i as usize]);
                seen[i as usize] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(sets.len(), longest_containment_chain(intervals));
        sets.len()
    }

    #[test]
    fn examples() {
        assert!(decompose_iis(&[]).is_empty());
        let iv = ticks(&[(1, 4), (2, 3), (5, 8)]);
        let sets = decompose_iis(&iv);
        assert_eq!(sets, vec![vec![0, 2], vec![1]]);
        assert_eq!(check(&ticks(&[(0, 2), (1, 3), (2, 4)])), 1);
        assert_eq!(check(&ticks(&[(5, 9), (5, 9)])), 2);
    }

    #[test]
    fn shared_starts_and_ends() {
        assert_eq!(check(&ticks(&[(0, 5), (0, 3), (0, 9)])), 3);
        assert_eq!(check(&ticks(&[(1, 5), (3, 5), (4, 5)])), 3);
        assert_eq!(check(&ticks(&[(0, 0), (1, 1), (2, 2)])), 1);
        assert_eq!(check(&ticks(&[(0, 10), (1, 2), (3, 4), (5, 6)])), 2);
    }

    #[test]
    fn random_small_cases_are_minimal() {
        for seed in 0..300 {
            let iv = random_intervals(1 + (seed as usize % 12), 8, 8, seed);
            check(&iv);
        }
    }

    #[test]
    fn assignment_matches_sets() {
        let iv = adversarial(2);
        let assignment = set_assignment(&iv);
        for (set, members) in decompose_iis(&iv).iter().enumerate() {
            assert!(members
                .iter()
                .all(|&i| assignment[i as usize] == set as u32));
        }
    }
}

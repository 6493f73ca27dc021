"""Smoke test for the trajix extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`.
"""

import os
import random
import tempfile

import trajix


def brute(intervals, l, r):
    return [i for i, (s, e) in enumerate(intervals) if s <= r and e >= l]


def main():
    assert trajix.discretize_time(1.23456789, 2) == 123
    assert trajix.discretize_time(0.29, 2) == 29

    ef = trajix.EliasFano([3, 7, 42], 64)
    assert ef.to_list() == [3, 7, 42] and len(ef) == 3 and ef[2] == 42
    assert [ef.rank(x) for x in (0, 3, 6, 7, 100)] == [0, 1, 1, 2, 3]
    assert ef.payload_bits <= 2 * 3 + 3 * 5
    assert trajix.EliasFano.from_bytes(ef.to_bytes()).to_list() == ef.to_list()

    nested = [(0, 10), (1, 9), (2, 8), (5, 12)]
    assert len(trajix.decompose_iis(nested)) == 3

    rng = random.Random(1)
    intervals = []
    for _ in range(500):
        s = rng.randrange(1000)
        intervals.append((s, s + rng.randrange(60)))
    for backend in trajix.backends():
        index = trajix.TemporalIndex(intervals, backend)
        for _ in range(50):
            l = rng.randrange(1100)
            r = l + rng.randrange(30)
            assert index.query(l, r) == brute(intervals, l, r), backend

    net = trajix.Network.grid(20, 20)
    assert (net.node_count, net.edge_count) == (400, 760)
    records = net.trajectories(100, duration=100.0, seed=7)
    queries = trajix.gen_queries(net.extent(), "range_equal", 10.0, 200, seed=3)
    indexes = [trajix.TrajIndex(net, records, backend=b) for b in trajix.backends()]
    for q in queries:
        window, t0, t1 = q[:4], q[4], q[5]
        results = [ix.range_query(window, t0, t1) for ix in indexes]
        assert all(res == results[0] for res in results)
    everything = (-1.0, -1.0, 20.0, 20.0)
    assert indexes[0].range_query(everything, 0.0, 100.0) == list(range(100))
    assert indexes[0].time_slice_query(everything, 5.0) == indexes[0].range_query(everything, 5.0, 5.0)
    stats = indexes[0].stats()
    assert stats["records"] == len(records)
    assert stats["spatial_bytes"] + stats["temporal_bytes"] + stats["overhead_bytes"] == stats["total_bytes"]

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "grid.tjix")
        indexes[0].save(path)
        loaded = trajix.TrajIndex.load(path)
        for q in queries:
            assert loaded.range_query(q[:4], q[4], q[5]) == indexes[0].range_query(q[:4], q[4], q[5])
        with open(path, "r+b") as f:
            f.truncate(100)
        try:
            trajix.TrajIndex.load(path)
        except trajix.FormatError:
            pass
        else:
            raise AssertionError("truncated index loaded")

    try:
        indexes[0].range_query(everything, 5.0, 4.0)
    except ValueError:
        pass
    else:
        raise AssertionError("reversed time range accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()

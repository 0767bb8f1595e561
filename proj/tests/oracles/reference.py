#!/usr/bin/env python3
"""Independent reference for placement, tree shapes and rebalance plans.

Prints one JSON object; the values are frozen into the C++ tests.
Run: python3 tests/oracles/reference.py
"""
import bisect
import json
import math
import struct

MASK = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes, h: int = FNV_OFFSET) -> int:
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class Ring:
    def __init__(self, nodes, vnodes=1000):
        pts = sorted((splitmix64((n << 32) | i), n) for n in nodes for i in range(vnodes))
        self.keys = [p for p, _ in pts]
        self.owners = [n for _, n in pts]

    def lookup(self, h: int) -> int:
        i = bisect.bisect_left(self.keys, h)
        return self.owners[i % len(self.keys)]

    def owner(self, name: str) -> int:
        return self.lookup(fnv1a64(name.encode()))


def name_parent_hash(name: str, pid: int) -> int:
    return fnv1a64(name.encode(), fnv1a64(struct.pack("<Q", pid)))


def chunk_hash(inode: int, index: int) -> int:
    return fnv1a64(struct.pack("<QI", inode, index))


def zipf_counts(files: int, s: float):
    h = sum(r ** -s for r in range(1, files + 1))
    counts = []
    for r in range(1, files + 1):
        # C++ llround: halves away from zero.
        c = math.floor(files * r ** -s / h + 0.5)
        if c < 2:
            break
        counts.append(c)
    return counts, max(files - sum(counts), 0)


def tree_names(fanout, total_files, duplicated, file_prefix, file_suffix):
    """Directory and file names of a generated tree. Leaf choice does not
    matter for placement, only names do."""
    dirs = []
    counter = 0
    level = 1
    for f in fanout:
        level *= f
        for _ in range(level):
            dirs.append("d%d" % counter)
            counter += 1
    files = []
    for name, count in duplicated:
        files.extend([name] * count)
    unique = total_files - sum(c for _, c in duplicated)
    files.extend("%s%d%s" % (file_prefix, i, file_suffix) for i in range(unique))
    return dirs, files


def report_size(n):
    return math.ceil(n * math.log2(max(n, 2)))


def node_stats(ring, n, names):
    loads = {i: 0 for i in range(n)}
    freq = {i: {} for i in range(n)}
    for name in names:
        o = ring.owner(name)
        loads[o] += 1
        freq[o][name] = freq[o].get(name, 0) + 1
    k = report_size(n)
    top = {}
    for i in range(n):
        ranked = sorted(freq[i].items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        top[i] = ranked
    return loads, top


def plan(loads, top, epsilon):
    loads = {k: float(v) for k, v in loads.items()}
    n = len(loads)
    total = sum(loads.values())
    bound = (1.0 / n + epsilon) * total
    names = {}
    for node, ranked in top.items():
        for name, c in ranked:
            names.setdefault(name, {})[node] = float(c)
    rules = {}
    steps = []
    while max(loads.values()) > bound:
        hot = min(loads, key=lambda k: (-loads[k], k))
        cold = min(loads, key=lambda k: (loads[k], k))
        pick, f = None, 0.0
        for name in sorted(names):
            if rules.get(name) == "path-walk":
                continue
            c = names[name].get(hot, 0.0)
            if c > f:
                pick, f = name, c
        if pick is None:
            return steps, loads, "unbalanceable"
        walk_max = max(loads[hot] - (n - 1) / n * f, loads[cold] + f / n)
        over_max = max(loads[hot] - f, loads[cold] + f)
        if pick not in rules and hot != cold and over_max <= walk_max:
            rules[pick] = "override"
            loads[hot] -= f
            loads[cold] += f
            names[pick][hot] = 0.0
            names[pick][cold] = names[pick].get(cold, 0.0) + f
        else:
            rules[pick] = "path-walk"
            for node in loads:
                loads[node] += -(n - 1) / n * f if node == hot else f / n
        steps.append((pick, rules[pick]))
    return steps, loads, "ok"


def plan_summary(dirs, files, n, epsilon):
    ring = Ring(range(n))
    loads, top = node_stats(ring, n, dirs + files)
    steps, projected, status = plan(loads, top, epsilon)
    entries = {}
    for name, rule in steps:
        entries[name] = rule
    total = sum(loads.values())
    return {
        "status": status,
        "initial_max_share": max(loads.values()) / total,
        "entries": len(entries),
        "path_walk": sum(1 for r in entries.values() if r == "path-walk"),
        "override": sum(1 for r in entries.values() if r == "override"),
        "projected_max_share": max(projected.values()) / total,
    }


def main():
    out = {}
    out["fnv1a64"] = {s: "0x%016x" % fnv1a64(s.encode()) for s in ["", "a", "Makefile", "ILSVRC2012_val_00000001.JPEG"]}
    out["splitmix64"] = {str(x): "0x%016x" % splitmix64(x) for x in [0, 1, (3 << 32) | 7]}
    out["name_parent_hash"] = {"Makefile@5": "0x%016x" % name_parent_hash("Makefile", 5)}
    out["chunk_hash"] = {"42:0": "0x%016x" % chunk_hash(42, 0), "42:1": "0x%016x" % chunk_hash(42, 1)}
    names = ["ILSVRC2012_val_00000001.JPEG", "Makefile", "Kconfig", "a", "f0.dat", "f1.dat", "README"]
    for n in (4, 16):
        ring = Ring(range(n))
        out["owner_n%d" % n] = {s: ring.owner(s) for s in names}
        share = {i: 0 for i in range(n)}
        for i in range(len(ring.keys)):
            prev = ring.keys[i - 1]
            share[ring.owners[i]] += ((ring.keys[i] - prev) & MASK) / 2.0 ** 64
        out["coverage_n%d" % n] = {"min": min(share.values()), "max": max(share.values())}
    ring4 = Ring(range(4))
    out["path_walk_owner_n4"] = {"Makefile@5": ring4.lookup(name_parent_hash("Makefile", 5))}
    data3 = Ring(range(3))
    out["chunk_owner_d3"] = {"42:%d" % i: data3.lookup(chunk_hash(42, i)) for i in range(4)}

    counts, tail = zipf_counts(100_000, 1.2)
    out["zipf_100k_1.2"] = {"names": len(counts), "duplicated_total": sum(counts), "top": counts[0],
                            "second": counts[1], "tail": tail}

    out["mdtest_scaled"] = {"dirs": sum(10 ** k for k in range(1, 5)), "files": 10 ** 5,
                            "uncached_lookups": 10 ** 5 * 4}
    out["uniform_1_10_10"] = {"dirs": 10, "files": 100}

    # Rebalance plans computed from names alone.
    outer = 20
    inner = -(-counts[0] // outer)
    zdirs, zfiles = tree_names([outer, inner], 100_000, [("z%d" % (r + 1), c) for r, c in enumerate(counts)], "t", ".dat")
    out["zipf_plan"] = {str(n): plan_summary(zdirs, zfiles, n, 0.01) for n in (4, 8, 16)}
    ldirs, lfiles = tree_names([60, 60], 88936, [("Makefile", 2945), ("Kconfig", 1690)], "src", ".c")
    out["linux_plan_n16"] = plan_summary(ldirs, lfiles, 16, 0.01)
    # Step-3 arithmetic example: n=4, Nmax=1000, Nmin=600, |F|=200.
    n, nmax, nmin, f = 4, 1000, 600, 200
    out["step3_example"] = {"path_walk": [nmax - (n - 1) / n * f, nmin + f / n], "override": [nmax - f, nmin + f]}

    # Reconfiguration 4 -> 5 over the names of a 10x10 tree with 10 files per leaf.
    rdirs, rfiles = tree_names([10, 10], 1000, [], "f", ".dat")
    r4, r5 = Ring(range(4)), Ring(range(5))
    moved = sum(1 for s in rdirs + rfiles if r4.owner(s) != r5.owner(s))
    out["reconfigure_4_to_5"] = {"records": len(rdirs) + len(rfiles), "moved": moved}

    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()

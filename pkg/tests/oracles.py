"""Independent brute-force references used by several test modules."""

import itertools
import math


def per_tick_slices(notes, slice_ticks):
    """Simulate tick by tick which pitches sound and where they are struck.

    notes: iterable of (pitch, onset, duration).  Returns a list of
    (word, held) per window, tiling [0, last note end).
    """
    notes = list(notes)
    end = max((o + d for _, o, d in notes), default=0)
    sounding = [set() for _ in range(end)]
    struck = [set() for _ in range(end)]
    for p, o, d in notes:
        struck[o].add(p)
        for t in range(o, o + d):
            sounding[t].add(p)
    out = []
    for start in range(0, end, slice_ticks):
        ticks = range(start, min(start + slice_ticks, end))
        present = set().union(*(sounding[t] for t in ticks))
        hit = set().union(*(struck[t] for t in ticks))
        word = tuple(sorted(present))
        out.append((word, tuple(p not in hit for p in word)))
    return out


def brute_pairs(seq, window):
    pairs = []
    for t, center in enumerate(seq):
        for j, ctx in enumerate(seq):
            if j != t and abs(j - t) <= window:
                pairs.append((t, j - t, center, ctx))
    pairs.sort()
    return [(c, x) for _, _, c, x in pairs]


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    return dot / (math.sqrt(sum(x * x for x in a)) * math.sqrt(sum(y * y for y in b)))


def bfs_steps(p, q, moves=(3, 4, 7), low=0, high=127):
    if p == q:
        return 0
    frontier, seen, depth = {p}, {p}, 0
    while frontier:
        depth += 1
        nxt = set()
        for x in frontier:
            for m in moves:
                for y in (x + m, x - m):
                    if low <= y <= high and y not in seen:
                        if y == q:
                            return depth
                        seen.add(y)
                        nxt.add(y)
        frontier = nxt
    raise ValueError("unreachable")


def central_difference(f, x, h=1e-5):
    grad = [0.0] * len(x)
    for i in range(len(x)):
        up = list(x)
        dn = list(x)
        up[i] += h
        dn[i] -= h
        grad[i] = (f(up) - f(dn)) / (2 * h)
    return grad


def all_triads():
    """Every major/minor triad as (root, quality, pitch-class set)."""
    for root, (quality, shape) in itertools.product(range(12), [("major", (0, 4, 7)), ("minor", (0, 3, 7))]):
        yield root, quality, [(root + i) % 12 for i in shape]

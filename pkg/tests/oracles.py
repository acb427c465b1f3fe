"""Independent brute-force oracles used by the geometry and acceptance
tests.  These deliberately use different algorithms from the library
(monotone-chain hull, shoelace formulas, interval arithmetic)."""

from __future__ import annotations

from fractions import Fraction as F


def hull_oracle(points):
    """Andrew's monotone chain over exact rationals; returns ccw hull."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def shoelace_area(ccw):
    s = F(0)
    for a, b in zip(ccw, ccw[1:] + ccw[:1]):
        s += a[0] * b[1] - b[0] * a[1]
    return s / 2


def shoelace_centroid(ccw):
    a = shoelace_area(ccw)
    cx = cy = F(0)
    for p, q in zip(ccw, ccw[1:] + ccw[:1]):
        w = p[0] * q[1] - q[0] * p[1]
        cx += (p[0] + q[0]) * w
        cy += (p[1] + q[1]) * w
    return (cx / (6 * a), cy / (6 * a))


def rand_point(rng, span=4):
    return (F(rng.randint(-span, span), rng.choice([1, 2, 3])),
            F(rng.randint(-span, span), rng.choice([1, 2, 3])))


def interval_oracle(points):
    """Vertex set, length, and midpoint of a rank-1 point list."""
    xs = sorted({p[0] for p in points})
    lo, hi = xs[0], xs[-1]
    return [(lo,), (hi,)], hi - lo, ((lo + hi) / 2,)

import re
import bisect

from functools import cached_property
from fractions import Fraction

import numpy as np

from plslope import logger

Rational = Fraction

_RATIONAL_LITERAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")

class MapError(ValueError):
    def __init__(self, message, index=None):
        self.reason = message
        if index is not None:
            message = "{} (dot {})".format(message, index)
        super().__init__(message)
        self.index = index

class DomainError(ValueError):
    pass

class NotMonotoneError(ValueError):
    pass

class DiagonalSegmentError(ValueError):
    def __init__(self, segment):
        super().__init__("segment of fixed points on [{}, {}]".format(segment[0], segment[1]))
        self.segment = segment

class BudgetExceeded(Exception):
    def __init__(self, message, reached, attained, partial=None):
        super().__init__(message)
        self.reached = reached
        self.attained = attained
        self.partial = partial

def parse_rational(text):
    """Parses an integer or "p/q" literal. Decimals and floats are refused."""
    if isinstance(text, (Fraction, int)) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError("not a rational literal: {!r}".format(text))
    m = _RATIONAL_LITERAL.match(text)
    if not m:
        raise ValueError("not a rational literal: {!r}".format(text))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError("zero denominator: {!r}".format(text))
    return Fraction(int(m.group(1)), den)

def to_rational(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact input: {!r}".format(value))
    return parse_rational(value)

def as_fraction(value):
    """Like to_rational, but floats (tolerances, config values) are read through their shortest repr."""
    if isinstance(value, float):
        return Fraction(repr(value))
    return to_rational(value)

def format_rational(value):
    return str(Fraction(value))


class RationalInterval():
    """Interval with exact endpoints; each end may be open. The empty interval is a single canonical value."""

    __slots__ = ("lo", "hi", "lo_open", "hi_open", "empty")

    def __init__(self, lo, hi, lo_open=False, hi_open=False):
        lo = to_rational(lo)
        hi = to_rational(hi)
        if lo > hi or (lo == hi and (lo_open or hi_open)):
            lo, hi, lo_open, hi_open = Fraction(0), Fraction(0), True, True
            empty = True
        else:
            empty = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo_open", bool(lo_open))
        object.__setattr__(self, "hi_open", bool(hi_open))
        object.__setattr__(self, "empty", empty)

    def __setattr__(self, name, value):
        raise AttributeError("RationalInterval is immutable")

    @classmethod
    def closed(cls, lo, hi):
        return cls(lo, hi)

    @classmethod
    def open(cls, lo, hi):
        return cls(lo, hi, True, True)

    @classmethod
    def point(cls, x):
        return cls(x, x)

    @classmethod
    def nothing(cls):
        return cls(1, 0)

    @classmethod
    def unit(cls):
        return cls(0, 1)

    def is_empty(self):
        return self.empty

    def length(self):
        return Fraction(0) if self.empty else self.hi - self.lo

    def contains(self, x):
        if self.empty:
            return False
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and self.lo_open:
            return False
        if x == self.hi and self.hi_open:
            return False
        return True

    def contains_interval(self, other):
        """True iff other is a subset of self."""
        if other.empty:
            return True
        if self.empty:
            return False
        if other.lo < self.lo or (other.lo == self.lo and self.lo_open and not other.lo_open):
            return False
        if other.hi > self.hi or (other.hi == self.hi and self.hi_open and not other.hi_open):
            return False
        return True

    def intersect(self, other):
        if self.empty or other.empty:
            return RationalInterval.nothing()
        if self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif self.lo < other.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif self.hi > other.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        return RationalInterval(lo, hi, lo_open, hi_open)

    def disjoint(self, other):
        return self.intersect(other).empty

    def interiors_disjoint(self, other):
        if self.empty or other.empty:
            return True
        return self.hi <= other.lo or other.hi <= self.lo

    def hull(self, other):
        if self.empty:
            return other
        if other.empty:
            return self
        if self.lo < other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif self.lo > other.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open and other.lo_open
        if self.hi > other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif self.hi < other.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open and other.hi_open
        return RationalInterval(lo, hi, lo_open, hi_open)

    def closure(self):
        if self.empty:
            return self
        return RationalInterval(self.lo, self.hi)

    def interior(self):
        if self.empty:
            return self
        return RationalInterval(self.lo, self.hi, True, True)

    def _key(self):
        if self.empty:
            return (None,)
        return (self.lo, self.hi, self.lo_open, self.hi_open)

    def __eq__(self, other):
        if not isinstance(other, RationalInterval):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        return (self.lo, self.hi, self.lo_open, self.hi_open) < (other.lo, other.hi, other.lo_open, other.hi_open)

    def __str__(self):
        if self.empty:
            return "{}"
        return "{}{}, {}{}".format("(" if self.lo_open else "[", self.lo, self.hi, ")" if self.hi_open else "]")

    def __repr__(self):
        return "RationalInterval({})".format(self)


class CriticalData():
    __slots__ = ("points", "directions")

    def __init__(self, points, directions):
        self.points = tuple(points)
        self.directions = tuple(directions)

    @property
    def modality(self):
        return len(self.points) - 2

    @property
    def interior(self):
        return self.points[1:-1]

    def __repr__(self):
        return "CriticalData(points={}, modality={})".format([str(p) for p in self.points], self.modality)


def _canonical(xs, ys):
    cx = [xs[0]]
    cy = [ys[0]]
    for x, y in zip(xs[1:], ys[1:]):
        if len(cx) >= 2 and (cy[-1] - cy[-2]) * (x - cx[-1]) == (y - cy[-1]) * (cx[-1] - cx[-2]):
            cx[-1] = x
            cy[-1] = y
        else:
            cx.append(x)
            cy.append(y)
    return cx, cy


class PLMap():
    """Continuous piecewise-linear self-map of [0,1] given by its dots.

    Instances are canonical: the x coordinates start at 0, end at 1 and increase
    strictly, every y lies in [0,1] and no three consecutive dots are collinear.
    ``scale`` is the length of the domain the map was given on, kept for display.
    """

    def __init__(self, dots, scale=1):
        dots = [(to_rational(x), to_rational(y)) for x, y in dots]
        if len(dots) < 2:
            raise MapError("a map needs at least two dots", index=len(dots))
        xs = [d[0] for d in dots]
        ys = [d[1] for d in dots]
        if xs[0] != 0:
            raise MapError("first dot must sit at x = 0", index=0)
        for i in range(1, len(xs)):
            if xs[i] <= xs[i - 1]:
                raise MapError("x coordinates must increase strictly", index=i)
        if xs[-1] != 1:
            raise MapError("last dot must sit at x = 1", index=len(xs) - 1)
        for i, y in enumerate(ys):
            if y < 0 or y > 1:
                raise MapError("y = {} outside [0, 1]".format(y), index=i)
        xs, ys = _canonical(xs, ys)
        self._xs = tuple(xs)
        self._ys = tuple(ys)
        self._slopes = tuple((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1))
        self.scale = to_rational(scale)

    @property
    def dots(self):
        return tuple(zip(self._xs, self._ys))

    @property
    def xs(self):
        return self._xs

    @property
    def ys(self):
        return self._ys

    @property
    def slopes(self):
        return self._slopes

    def pieces(self):
        """(x0, x1, y0, y1, slope) for every affine piece."""
        xs, ys = self._xs, self._ys
        return [(xs[i], xs[i + 1], ys[i], ys[i + 1], self._slopes[i]) for i in range(len(self._slopes))]

    def __call__(self, x):
        xs = self._xs
        if x < 0 or x > 1:
            raise DomainError("x = {} outside [0, 1]".format(x))
        i = bisect.bisect_right(xs, x) - 1
        if i >= len(xs) - 1:
            return self._ys[-1]
        return self._ys[i] + self._slopes[i] * (x - xs[i])

    @cached_property
    def critical(self):
        slopes = self._slopes
        for i, s in enumerate(slopes):
            if s == 0:
                raise NotMonotoneError("not piecewise strictly monotone: flat on [{}, {}]".format(self._xs[i], self._xs[i + 1]))
        points = [self._xs[0]]
        directions = [1 if slopes[0] > 0 else -1]
        for i in range(1, len(slopes)):
            d = 1 if slopes[i] > 0 else -1
            if d != directions[-1]:
                points.append(self._xs[i])
                directions.append(d)
        points.append(self._xs[-1])
        return CriticalData(points, directions)

    @property
    def modality(self):
        return self.critical.modality

    @property
    def lap_count(self):
        return self.critical.modality + 1

    @cached_property
    def _laps(self):
        c = self.critical
        return tuple((c.points[i], c.points[i + 1], c.directions[i]) for i in range(len(c.directions)))

    def laps(self):
        """Closed laps as (a, b, direction)."""
        return list(self._laps)

    def is_homeomorphism(self):
        return all(s > 0 for s in self._slopes)

    def inverse(self):
        if not self.is_homeomorphism() or self._ys[0] != 0 or self._ys[-1] != 1:
            raise NotMonotoneError("only increasing homeomorphisms of [0,1] can be inverted")
        return PLMap(zip(self._ys, self._xs), scale=self.scale)

    def branch_preimage(self, lap_index, interval):
        """Preimage of interval under the restriction of f to one closed lap, as an interval."""
        a, b, direction = self._laps[lap_index]
        lap_image = image_interval(self, RationalInterval.closed(a, b))
        part = lap_image.intersect(interval)
        if part.empty:
            return part
        ends = [(self.branch_solve(lap_index, part.lo), part.lo_open), (self.branch_solve(lap_index, part.hi), part.hi_open)]
        if direction < 0:
            ends.reverse()
        return RationalInterval(ends[0][0], ends[1][0], ends[0][1], ends[1][1])

    def branch_solve(self, lap_index, y):
        """The unique x in the closed lap with f(x) = y; y must be attained on that lap."""
        a, b, _ = self._laps[lap_index]
        i = bisect.bisect_right(self._xs, a) - 1
        j = bisect.bisect_left(self._xs, b)
        for k in range(i, j):
            x0, x1, y0, y1, s = self._xs[k], self._xs[k + 1], self._ys[k], self._ys[k + 1], self._slopes[k]
            if min(y0, y1) <= y <= max(y0, y1):
                return x0 + (y - y0) / s
        raise DomainError("{} is not attained on lap {}".format(y, lap_index))

    def as_arrays(self):
        return np.array([float(x) for x in self._xs]), np.array([float(y) for y in self._ys])

    def _key(self):
        return (self._xs, self._ys)

    def __eq__(self, other):
        if not isinstance(other, PLMap):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "PLMap({})".format(", ".join("({}, {})".format(x, y) for x, y in self.dots))


def connect_the_dots(dots, domain=None):
    """Builds the canonical map through dots; with domain=(lo, hi) the dots are first rescaled to [0,1]."""
    dots = list(dots)
    if not dots:
        raise MapError("no dots given", index=0)
    if domain is None:
        return PLMap(dots)
    lo, hi = to_rational(domain[0]), to_rational(domain[1])
    if hi <= lo:
        raise MapError("empty domain [{}, {}]".format(lo, hi))
    width = hi - lo
    scaled = [((to_rational(x) - lo) / width, (to_rational(y) - lo) / width) for x, y in dots]
    return PLMap(scaled, scale=width)

def eval_map(f, x):
    return f(to_rational(x))

def critical_data(f):
    return f.critical

def compose(f, g):
    """Exact composition f o g."""
    points = set(g.xs)
    inner = f.xs[1:-1]
    for x0, x1, y0, y1, s in g.pieces():
        if s == 0:
            continue
        lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
        i = bisect.bisect_right(inner, lo)
        j = bisect.bisect_left(inner, hi)
        for b in inner[i:j]:
            points.add(x0 + (b - y0) / s)
    xs = sorted(points)
    return PLMap([(x, f(g(x))) for x in xs], scale=g.scale)

def iterate(f, n, lap_budget=None):
    if n < 1:
        raise ValueError("iterate needs n >= 1, got {}".format(n))
    result = f
    for k in range(2, n + 1):
        nxt = compose(f, result)
        laps = nxt.lap_count
        if lap_budget is not None and laps > lap_budget:
            logger().warning("iterate: lap budget %d exceeded at n=%d (%d laps)", lap_budget, k, laps)
            raise BudgetExceeded("lap budget {} exceeded at iterate {}".format(lap_budget, k), reached=laps, attained=k - 1, partial=result)
        result = nxt
    return result

def image_interval(f, interval):
    """Exact image of an interval; an image end is open iff it is only reached at open ends of the interval."""
    if interval.empty:
        return interval
    lo, hi = interval.lo, interval.hi
    if lo < 0 or hi > 1:
        raise DomainError("interval {} not inside [0, 1]".format(interval))
    candidates = [(f(lo), interval.lo_open), (f(hi), interval.hi_open)]
    for c in f.critical.interior:
        if lo < c < hi:
            candidates.append((f(c), False))
    vmin = min(v for v, _ in candidates)
    vmax = max(v for v, _ in candidates)
    min_open = all(op for v, op in candidates if v == vmin)
    max_open = all(op for v, op in candidates if v == vmax)
    return RationalInterval(vmin, vmax, min_open, max_open)

def preimage_point(f, y):
    y = to_rational(y)
    if y < 0 or y > 1:
        raise DomainError("y = {} outside [0, 1]".format(y))
    solutions = set()
    for x0, x1, y0, y1, s in f.pieces():
        if s == 0:
            if y == y0:
                raise NotMonotoneError("flat piece on [{}, {}] at height {}".format(x0, x1, y))
            continue
        if (y0 <= y <= y1) or (y1 <= y <= y0):
            solutions.add(x0 + (y - y0) / s)
    return tuple(sorted(solutions))


class PreimageCounts():
    __slots__ = ("counts", "truncated", "nodes")

    def __init__(self, counts, truncated, nodes):
        self.counts = list(counts)
        self.truncated = truncated
        self.nodes = nodes

    def __repr__(self):
        return "PreimageCounts({}, truncated={})".format(self.counts, self.truncated)


def preimage_counts(f, y, n_max, node_budget=None):
    """#f^-k(y) for k = 0..n_max by breadth-first exact expansion.

    Preimage sets of distinct points are disjoint, so each level is the union of
    per-point solution sets. When the running node total would pass
    node_budget the completed prefix is returned with ``truncated`` set.
    """
    y = to_rational(y)
    if y < 0 or y > 1:
        raise DomainError("y = {} outside [0, 1]".format(y))
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    branches = []
    for x0, x1, y0, y1, s in f.pieces():
        if s == 0:
            raise NotMonotoneError("flat piece on [{}, {}]".format(x0, x1))
        branches.append((min(y0, y1), max(y0, y1), x0, y0, 1 / s))
    level = [y]
    counts = [1]
    nodes = 1
    for k in range(1, n_max + 1):
        nxt = set()
        for p in level:
            for lo, hi, x0, y0, inv in branches:
                if lo <= p <= hi:
                    nxt.add(x0 + (p - y0) * inv)
        if node_budget is not None and nodes + len(nxt) > node_budget:
            logger().warning("preimage_counts: node budget %d exhausted at level %d", node_budget, k)
            return PreimageCounts(counts, True, nodes)
        nodes += len(nxt)
        counts.append(len(nxt))
        logger().debug("preimage_counts: level %d has %d points", k, len(nxt))
        level = sorted(nxt)
    return PreimageCounts(counts, False, nodes)

def sup_distance(f, g):
    xs = sorted(set(f.xs) | set(g.xs))
    return max(abs(f(x) - g(x)) for x in xs)

def fixed_points(f):
    solutions = set()
    for x0, x1, y0, y1, s in f.pieces():
        if s == 1:
            if y0 == x0:
                raise DiagonalSegmentError((x0, x1))
            continue
        # y0 + s(x - x0) = x
        x = (y0 - s * x0) / (1 - s)
        if x0 <= x <= x1:
            solutions.add(x)
    return tuple(sorted(solutions))

def is_constant_slope(f, tol=0):
    tol = to_rational(tol) if not isinstance(tol, float) else tol
    magnitudes = [abs(s) for s in f.slopes]
    if any(m == 0 for m in magnitudes):
        return None
    lam = magnitudes[0]
    if all(abs(m - lam) <= tol for m in magnitudes):
        return lam
    return None

def constant_slope_from_critical_values(lam, values, strict=True):
    """The map of constant slope lam with critical values v_0..v_k.

    With strict=False repeated values are dropped and monotone runs are
    allowed; the result is then canonicalized, which is how degenerate members
    of a family (laps of length zero) are built.
    """
    lam = to_rational(lam)
    values = [to_rational(v) for v in values]
    if len(values) < 2:
        raise MapError("need at least two critical values", index=len(values))
    if not strict:
        values = [v for i, v in enumerate(values) if i == 0 or v != values[i - 1]]
        if len(values) < 2:
            raise MapError("critical values are all equal", index=0)
    deltas = [b - a for a, b in zip(values, values[1:])]
    if strict:
        for i, d in enumerate(deltas):
            if d == 0:
                raise MapError("zero-length lap", index=i + 1)
        for i in range(1, len(deltas)):
            if deltas[i - 1] * deltas[i] > 0:
                raise MapError("critical values do not alternate", index=i)
    total = sum(abs(d) for d in deltas)
    if total != lam:
        raise MapError("sum |dv| = {} differs from lambda = {}".format(total, lam))
    c = Fraction(0)
    dots = [(c, values[0])]
    for d, v in zip(deltas[:-1], values[1:-1]):
        c += abs(d) / lam
        dots.append((c, v))
    dots.append((Fraction(1), values[-1]))
    return PLMap(dots)

def match_critical_points(f, g):
    """Order-preserving pairing of interior critical points of equal-modality maps, with the largest displacement."""
    cf = f.critical.interior
    cg = g.critical.interior
    if len(cf) != len(cg):
        raise MapError("modalities differ: {} vs {}".format(len(cf), len(cg)))
    pairs = list(zip(cf, cg))
    displacement = max((abs(a - b) for a, b in pairs), default=Fraction(0))
    return pairs, displacement

def identity_map():
    return PLMap([(0, 0), (1, 1)])

import math
import itertools

from fractions import Fraction

import numpy as np

from plslope import logger, EntropyMethod
from plslope.core_map import Rational, RationalInterval, BudgetExceeded, iterate, image_interval, is_constant_slope, as_fraction
from plslope.config import DEFAULTS
from plslope.transfer import TransferGrid, run_transfer

_ENTROPY = DEFAULTS["entropy"]

class EntropyEstimate():
    """Entropy in natural-log units with a bracket; ``lam_bracket`` holds exact bounds on exp(h) when known."""

    def __init__(self, value, lower_bound, upper_bound, method, depth, converged=True, lam_bracket=None, notes=None):
        lower_bound = min(lower_bound, value)
        upper_bound = max(upper_bound, value)
        self.value = float(value)
        self.lower_bound = float(lower_bound)
        self.upper_bound = float(upper_bound)
        self.method = method
        self.depth = depth
        self.converged = converged
        self.lam_bracket = lam_bracket
        self.notes = dict(notes or {})

    @property
    def lam(self):
        return math.exp(self.value)

    @property
    def width(self):
        return self.upper_bound - self.lower_bound

    def __repr__(self):
        return "EntropyEstimate({:.12g} in [{:.12g}, {:.12g}], {}, depth={})".format(
            self.value, self.lower_bound, self.upper_bound, self.method.name, self.depth)


class MarkovData():
    def __init__(self, partition, matrix):
        self.partition = tuple(partition)
        self.matrix = [list(row) for row in matrix]

    @property
    def size(self):
        return len(self.matrix)

    def cells(self):
        return [(self.partition[i], self.partition[i + 1]) for i in range(len(self.partition) - 1)]


def _log(x):
    return math.log(x) if x > 1 else 0.0

def _split(f, lo, hi):
    points = [lo] + [c for c in f.critical.interior if lo < c < hi] + [hi]
    for a, b in zip(points, points[1:]):
        fa, fb = f(a), f(b)
        yield (fa, fb) if fa < fb else (fb, fa)

def lap_counts(f, n_max, budget=None):
    """lap(f^k) for k = 1..n_max from the multiset of lap images.

    Each lap of f^k maps monotonically onto an interval J; the laps of f^(k+1)
    inside it correspond to the pieces of J cut at the interior critical points
    of f. Only the distinct images and their multiplicities are tracked. When
    the number of distinct images passes ``budget`` the computed prefix is
    returned.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    images = {}
    for a, b, _ in f.laps():
        key = next(_split(f, a, b))
        images[key] = images.get(key, 0) + 1
    counts = [sum(images.values())]
    for k in range(2, n_max + 1):
        nxt = {}
        for (lo, hi), mult in images.items():
            for key in _split(f, lo, hi):
                nxt[key] = nxt.get(key, 0) + mult
        if budget is not None and len(nxt) > budget:
            logger().warning("lap_counts: budget %d of distinct lap images exceeded at n=%d", budget, k)
            break
        images = nxt
        counts.append(sum(images.values()))
        logger().debug("lap_counts: n=%d laps=%d images=%d", k, counts[-1], len(images))
    return counts

def _slope_fit(counts, window):
    n = len(counts)
    if n == 1:
        return _log(counts[0])
    start = min(n - 2, int(n * (1 - window)))
    ks = np.arange(start + 1, n + 1, dtype=float)
    logs = np.array([math.log(c) for c in counts[start:]])
    return float(np.polyfit(ks, logs, 1)[0])

def entropy_lap(f, n, budget=None, window=None, horseshoe_power=None):
    window = _ENTROPY["fit_window"] if window is None else window
    horseshoe_power = _ENTROPY["horseshoe_power"] if horseshoe_power is None else horseshoe_power
    counts = lap_counts(f, n, budget)
    depth = len(counts)
    upper = min(math.log(c) / (k + 1) for k, c in enumerate(counts))
    lower = 0.0
    for power in range(1, horseshoe_power + 1):
        try:
            k, _ = largest_horseshoe(f, power)
        except BudgetExceeded:
            break
        if k >= 2:
            lower = max(lower, math.log(k) / power)
    lower = min(lower, upper)
    value = min(max(_slope_fit(counts, window), lower), upper)
    logger().info("entropy_lap: depth %d value %.12g in [%.12g, %.12g]", depth, value, lower, upper)
    return EntropyEstimate(value, lower, upper, EntropyMethod.LapCount, depth, notes={"laps": counts[-1]})

def markov_detect(f, max_steps=None):
    max_steps = _ENTROPY["markov_steps"] if max_steps is None else max_steps
    orbit = set(f.critical.points)
    frontier = set(orbit)
    for step in range(max_steps):
        frontier = {f(p) for p in frontier} - orbit
        if not frontier:
            partition = sorted(orbit)
            return MarkovData(partition, _cover_matrix(f, partition))
        orbit |= frontier
    logger().debug("markov_detect: critical orbits still open after %d steps (%d points)", max_steps, len(orbit))
    return None

def _cover_matrix(f, partition):
    cells = list(zip(partition, partition[1:]))
    matrix = []
    for a, b in cells:
        image = image_interval(f, RationalInterval.closed(a, b))
        matrix.append([1 if image.contains_interval(RationalInterval.closed(c, d)) else 0 for c, d in cells])
    return matrix

def _above_spectral_radius(matrix, x):
    """Sign data of the leading principal minors of xI - M via elimination without pivoting.

    Returns (all_positive, exact_root) where exact_root is set when every minor
    but the last is positive and the determinant vanishes, i.e. x is the root.
    """
    n = len(matrix)
    a = [[(x if i == j else 0) - Fraction(matrix[i][j]) for j in range(n)] for i in range(n)]
    for k in range(n):
        pivot = a[k][k]
        if pivot <= 0:
            return False, (pivot == 0 and k == n - 1)
        for i in range(k + 1, n):
            factor = a[i][k] / pivot
            if factor:
                row_i, row_k = a[i], a[k]
                for j in range(k + 1, n):
                    row_i[j] -= factor * row_k[j]
    return True, False

def perron_bracket(matrix, tol):
    """Exact bracket (lo, hi) of the spectral radius with hi - lo <= tol; lo == hi for integer roots."""
    tol = as_fraction(tol)
    if not any(any(row) for row in matrix):
        return Fraction(0), Fraction(0)
    lo = Fraction(0)
    hi = Fraction(max(sum(row) for row in matrix))
    above, root = _above_spectral_radius(matrix, hi)
    if root:
        return hi, hi
    # a rational eigenvalue of an integer matrix is an integer
    ilo, ihi = 0, int(hi)
    while ihi - ilo > 1:
        mid = (ilo + ihi) // 2
        above, root = _above_spectral_radius(matrix, Fraction(mid))
        if root:
            return Fraction(mid), Fraction(mid)
        if above:
            ihi = mid
        else:
            ilo = mid
    lo, hi = Fraction(ilo), Fraction(ihi)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        above, root = _above_spectral_radius(matrix, mid)
        if root:
            return mid, mid
        if above:
            hi = mid
        else:
            lo = mid
    return lo, hi

def perron_root(matrix, tol=None):
    tol = _ENTROPY["perron_tol"] if tol is None else tol
    lo, hi = perron_bracket(matrix, tol)
    value = _log(float((lo + hi) / 2))
    logger().info("perron_root: lambda in [%s, %s]", float(lo), float(hi))
    return EntropyEstimate(value, _log(float(lo)), _log(float(hi)), EntropyMethod.MarkovExact, len(matrix), lam_bracket=(lo, hi))

def entropy_transfer(f, grid_size=None, max_iter=None, tol=None, shift=None):
    grid_size = _ENTROPY["grid_size"] if grid_size is None else grid_size
    max_iter = _ENTROPY["max_iter"] if max_iter is None else max_iter
    tol = _ENTROPY["tol"] if tol is None else tol
    shift = _ENTROPY["shift"] if shift is None else shift
    grid = TransferGrid(f, grid_size)
    result = run_transfer(grid, tol, max_iter, shift=shift, stable_steps=_ENTROPY["stable_steps"])
    value = _log(result.norm)
    width = result.drift + (result.norm_drift / result.norm if result.norm > 0 else 0.0)
    return EntropyEstimate(value, value - width, value + width, EntropyMethod.Transfer, result.iterations,
            converged=result.converged, notes={"projection_error": result.projection_error, "grid": len(grid)})

def _horseshoe_candidates(F):
    points = set(F.xs) | {F(c) for c in F.critical.points}
    return sorted(points)

def _lap_images(F):
    return [(index, image_interval(F, RationalInterval.closed(a, b))) for index, (a, b, _) in enumerate(F.laps())]

def _horseshoe_branches(F, lap_images, hull):
    found = []
    for index, image in lap_images:
        if not image.contains_interval(hull):
            continue
        u = F.branch_solve(index, hull.lo)
        v = F.branch_solve(index, hull.hi)
        branch = RationalInterval.closed(min(u, v), max(u, v))
        if hull.contains_interval(branch):
            found.append(branch)
    return found

def _verify_horseshoe(F, intervals):
    union = intervals[0]
    for j in intervals[1:]:
        union = union.hull(j)
    for j, nxt in zip(intervals, intervals[1:]):
        if not j.interiors_disjoint(nxt):
            return False
    return all(image_interval(F, j).contains_interval(union) for j in intervals)

def horseshoe_search(f, power, k, lap_budget=None):
    """k closed intervals with disjoint interiors, each mapped over their union by f^power, or None.

    Candidates: every hull [p, q] with p, q among the dots of f^power and its
    critical values; the intervals are the branch preimages of the hull lying
    inside it.
    """
    if power < 1 or k < 2:
        raise ValueError("horseshoe_search needs power >= 1 and k >= 2")
    F = iterate(f, power, lap_budget)
    if F.lap_count < k:
        return None
    lap_images = _lap_images(F)
    for p, q in itertools.combinations(_horseshoe_candidates(F), 2):
        hull = RationalInterval.closed(p, q)
        branches = _horseshoe_branches(F, lap_images, hull)
        if len(branches) >= k and _verify_horseshoe(F, branches[:k]):
            logger().debug("horseshoe_search: %d-horseshoe for f^%d over %s", k, power, hull)
            return branches[:k]
    return None

def largest_horseshoe(f, power, lap_budget=None):
    """(k, intervals) for the largest k found at this power; k = 0 when nothing is found."""
    F = iterate(f, power, lap_budget)
    best = (0, None)
    if F.lap_count < 2:
        return best
    lap_images = _lap_images(F)
    for p, q in itertools.combinations(_horseshoe_candidates(F), 2):
        branches = _horseshoe_branches(F, lap_images, RationalInterval.closed(p, q))
        if len(branches) > best[0] and len(branches) >= 2 and _verify_horseshoe(F, branches):
            best = (len(branches), branches)
            if best[0] == F.lap_count:
                break
    return best

def entropy_horseshoe(f, power, lap_budget=None):
    k, intervals = largest_horseshoe(f, power, lap_budget)
    value = math.log(k) / power if k >= 2 else 0.0
    return EntropyEstimate(value, value, math.inf, EntropyMethod.Horseshoe, power, notes={"k": k})

def entropy_constant_slope(f):
    lam = is_constant_slope(f)
    if lam is None:
        return None
    value = _log(float(lam))
    return EntropyEstimate(value, value, value, EntropyMethod.MarkovExact, 0, lam_bracket=(Rational(lam), Rational(lam)))

def best_estimate(f, config=None):
    """Markov route when the critical orbits close, transfer route otherwise; the lap bracket is attached."""
    section = config.section("entropy") if config is not None else _ENTROPY
    md = markov_detect(f, section["markov_steps"])
    if md is not None:
        estimate = perron_root(md.matrix, section["perron_tol"])
    else:
        estimate = entropy_transfer(f, section["grid_size"], section["max_iter"], section["tol"], section["shift"])
    try:
        lap = entropy_lap(f, section["lap_depth"], section["lap_budget"], section["fit_window"], section["horseshoe_power"])
        estimate.notes["lap_upper"] = lap.upper_bound
        estimate.notes["horseshoe_lower"] = lap.lower_bound
    except BudgetExceeded as err:
        logger().warning("best_estimate: lap bracket skipped (%s)", err)
    return estimate

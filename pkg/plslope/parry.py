import bisect
import math

from fractions import Fraction

import numpy as np
import networkx as nx

from plslope import logger, EntropyMethod, Exactness
from plslope.core_map import PLMap, MapError, is_constant_slope, to_rational, as_fraction, sup_distance
from plslope.entropy import EntropyEstimate, perron_bracket, markov_detect, entropy_lap
from plslope.config import DEFAULTS
from plslope.transfer import TransferGrid, run_transfer

_PARRY = DEFAULTS["parry"]
_ENTROPY = DEFAULTS["entropy"]

class ConvergenceError(Exception):
    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals

class ReducibleMatrixError(ValueError):
    pass


class MonotoneCDF():
    """Nondecreasing piecewise-linear surjection of [0,1] with dots (0,0) .. (1,1).

    Exact instances keep Fraction tuples, float instances keep numpy arrays.
    """

    def __init__(self, xs, ys, exact=None):
        if exact is None:
            exact = all(isinstance(v, (Fraction, int)) for v in list(xs) + list(ys))
        if exact:
            xs = tuple(to_rational(x) for x in xs)
            ys = tuple(to_rational(y) for y in ys)
        else:
            xs = np.asarray(xs, dtype=float)
            ys = np.asarray(ys, dtype=float)
        if len(xs) < 2 or len(xs) != len(ys):
            raise MapError("a CDF needs at least two dots")
        if xs[0] != 0 or xs[-1] != 1 or ys[0] != 0 or ys[-1] != 1:
            raise MapError("a CDF must run from (0,0) to (1,1)")
        if exact:
            for i in range(1, len(xs)):
                if xs[i] <= xs[i - 1]:
                    raise MapError("x coordinates must increase strictly", index=i)
                if ys[i] < ys[i - 1]:
                    raise MapError("CDF decreases", index=i)
        else:
            bad = np.flatnonzero(np.diff(xs) <= 0)
            if len(bad):
                raise MapError("x coordinates must increase strictly", index=int(bad[0]) + 1)
            bad = np.flatnonzero(np.diff(ys) < 0)
            if len(bad):
                raise MapError("CDF decreases", index=int(bad[0]) + 1)
        self.xs = xs
        self.ys = ys
        self.exactness = Exactness.EXACT if exact else Exactness.FLOAT

    @classmethod
    def identity(cls, exact=True):
        if exact:
            return cls((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))
        return cls((0.0, 1.0), (0.0, 1.0), exact=False)

    @classmethod
    def from_map(cls, f):
        return cls(f.xs, f.ys, exact=True)

    @property
    def exact(self):
        return self.exactness == Exactness.EXACT

    @property
    def dots(self):
        return list(zip(self.xs, self.ys))

    def __len__(self):
        return len(self.xs)

    def __call__(self, x):
        if self.exact and not isinstance(x, float):
            i = bisect.bisect_right(self.xs, x) - 1
            if i >= len(self.xs) - 1:
                return self.ys[-1]
            x0, x1, y0, y1 = self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        fx, fy = self.float_arrays()
        return float(np.interp(float(x), fx, fy))

    def float_arrays(self):
        if self.exact:
            return np.array([float(x) for x in self.xs]), np.array([float(y) for y in self.ys])
        return self.xs, self.ys

    def evaluate(self, points):
        fx, fy = self.float_arrays()
        return np.interp(points, fx, fy)

    def slopes(self):
        if self.exact:
            return [(self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]) for i in range(len(self.xs) - 1)]
        return np.diff(self.ys) / np.diff(self.xs)

    def min_slope(self):
        return min(self.slopes())

    def max_slope(self):
        return max(self.slopes())

    def is_homeomorphism(self):
        return self.min_slope() > 0

    def inverse(self):
        if not self.is_homeomorphism():
            raise MapError("CDF has a flat segment and no inverse")
        return MonotoneCDF(self.ys, self.xs, exact=self.exact)

    def sup_distance(self, other):
        if self.exact and other.exact:
            points = sorted(set(self.xs) | set(other.xs))
            return max(abs(self(x) - other(x)) for x in points)
        points = np.union1d(self.float_arrays()[0], other.float_arrays()[0])
        return float(np.max(np.abs(self.evaluate(points) - other.evaluate(points))))

    def as_map(self):
        return PLMap([(Fraction(x), Fraction(y)) for x, y in zip(self.xs, self.ys)])

    def decimate(self, cap, budget):
        """Drops dots while the CDF moves by at most budget per pass; returns (cdf, accumulated error)."""
        if len(self) <= cap:
            return self, 0.0
        xs, ys = self.float_arrays()
        error = 0.0
        while len(xs) > cap:
            left, mid, right = xs[:-2], xs[1:-1], xs[2:]
            chord = ys[:-2] + (ys[2:] - ys[:-2]) * (mid - left) / (right - left)
            removable = np.abs(ys[1:-1] - chord)
            candidates = np.flatnonzero(removable <= budget) + 1
            # never drop two neighbours in one pass
            candidates = candidates[np.concatenate(([True], np.diff(candidates) > 1))] if len(candidates) else candidates
            if len(candidates) == 0:
                logger().warning("decimate: cannot reach %d dots within budget %.3g", cap, budget)
                break
            error += float(np.max(removable[candidates - 1]))
            keep = np.ones(len(xs), dtype=bool)
            keep[candidates] = False
            xs, ys = xs[keep], ys[keep]
        return MonotoneCDF(xs, ys, exact=False), error

    def __repr__(self):
        return "MonotoneCDF({} dots, {})".format(len(self), self.exactness.name)


class CSModel():
    """Constant-slope model of f: f o psi = psi o model, psi from model coordinates to f coordinates."""

    def __init__(self, model, psi, lam, entropy, cdf=None, trusted=False, notes=None):
        self.model = model
        self.psi = psi
        self.lam = lam
        self.entropy = entropy
        self.cdf = cdf
        self.trusted = trusted
        self.notes = dict(notes or {})
        self.conjugacy_residual = None
        self.slope_residual = None
        self.min_psi_slope = None

    @property
    def psi_inverse(self):
        if self.cdf is None:
            self.cdf = self.psi.inverse()
        return self.cdf

    def residuals(self):
        return {
            "conjugacy_residual": self.conjugacy_residual,
            "slope_residual": self.slope_residual,
            "min_psi_slope": self.min_psi_slope,
        }


def pullback_step(f, F):
    """One exact pullback: (TF)(y) is the variation of F o f over [0, y]; returns (TF / norm, norm)."""
    points = set(f.xs)
    inner = F.xs[1:-1]
    for x0, x1, y0, y1, s in f.pieces():
        lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
        for b in inner:
            if lo < b < hi:
                points.add(x0 + (b - y0) / s)
    xs = sorted(points)
    values = [F(f(x)) for x in xs]
    pulled = [values[0] - values[0]]
    for a, b in zip(values, values[1:]):
        pulled.append(pulled[-1] + abs(b - a))
    norm = pulled[-1]
    if norm == 0:
        raise ConvergenceError("pullback vanished", {"norm": 0})
    return MonotoneCDF(xs, [v / norm for v in pulled], exact=F.exact), norm

def _model_from_cdf(f, F):
    dots = []
    for c in f.critical.points:
        dots.append((Fraction(F(c)), Fraction(F(f(c)))))
    for i in range(1, len(dots)):
        if dots[i][0] <= dots[i - 1][0]:
            raise ConvergenceError("conjugacy collapses laps {} and {}".format(i - 1, i), {"min_psi_slope": 0.0})
    return PLMap(dots)

def _model_preimages(model, points):
    mx, my = model.as_arrays()
    out = []
    for i in range(len(mx) - 1):
        lo, hi = min(my[i], my[i + 1]), max(my[i], my[i + 1])
        inside = points[(points > lo) & (points < hi)]
        if len(inside):
            out.append(mx[i] + (inside - my[i]) * (mx[i + 1] - mx[i]) / (my[i + 1] - my[i]))
    return np.concatenate(out) if out else np.array([])

def verify_conjugacy(f, cs):
    """Recomputes the residuals of cs against f and stores them on cs."""
    psi_x, psi_y = cs.psi.float_arrays()
    fx, fy = f.as_arrays()
    mx, my = cs.model.as_arrays()
    samples = np.unique(np.concatenate((psi_x, mx, cs.psi_inverse.evaluate(fx), _model_preimages(cs.model, psi_x))))
    samples = samples[(samples >= 0.0) & (samples <= 1.0)]
    lhs = np.interp(np.interp(samples, psi_x, psi_y), fx, fy)
    rhs = np.interp(np.interp(samples, mx, my), psi_x, psi_y)
    report = {
        "conjugacy_residual": float(np.max(np.abs(lhs - rhs))),
        "slope_residual": max(abs(abs(float(s)) - cs.lam) for s in cs.model.slopes),
        "min_psi_slope": float(cs.psi.min_slope()),
    }
    cs.conjugacy_residual = report["conjugacy_residual"]
    cs.slope_residual = report["slope_residual"]
    cs.min_psi_slope = report["min_psi_slope"]
    return report

def _trusted(verdict):
    if verdict is not None and verdict.status.is_transitive:
        return True
    logger().warning("untrusted: transitivity unverified")
    return False

def _transfer_model(f, tol, max_iter, breakpoint_cap, grid_size, initial=None):
    grid = TransferGrid(f, grid_size)
    start = None if initial is None else initial.evaluate(grid.nodes)
    result = run_transfer(grid, tol, max_iter, shift=_ENTROPY["shift"], stable_steps=_ENTROPY["stable_steps"], initial=start)
    if not result.converged:
        raise ConvergenceError("pullback did not converge in {} steps".format(result.iterations),
                {"drift": result.drift, "norm": result.norm, "projection_error": result.projection_error})
    F, decimation_error = MonotoneCDF(grid.nodes, result.values, exact=False).decimate(breakpoint_cap, tol / 10)
    model = _model_from_cdf(f, F)
    if not F.is_homeomorphism():
        raise ConvergenceError("limit CDF has a flat segment; the conjugacy jumps",
                {"drift": result.drift, "min_psi_slope": 0.0})
    psi = F.inverse()
    value = float(np.log(result.norm))
    width = result.drift + result.norm_drift / result.norm
    estimate = EntropyEstimate(value, value - width, value + width, EntropyMethod.Transfer, result.iterations)
    cs = CSModel(model, psi, result.norm, estimate, cdf=F,
            notes={"route": "transfer", "iterations": result.iterations, "grid": len(grid),
                "projection_error": result.projection_error, "decimation_error": decimation_error})
    verify_conjugacy(f, cs)
    cs.conjugacy_residual += result.projection_error + decimation_error
    if cs.min_psi_slope < _PARRY["min_psi_slope"]:
        logger().warning("near-flat conjugacy: min psi slope %.3g", cs.min_psi_slope)
    return cs

def entropy_agreement(f, lam, slack=0.0, depth=None):
    """Checks log(lam) against the entropy module: the Perron bracket for Markov maps, else the lap/horseshoe bracket."""
    depth = _PARRY["check_depth"] if depth is None else depth
    value = math.log(float(lam)) if lam > 1 else 0.0
    md = markov_detect(f)
    if md is not None:
        lo, hi = perron_bracket(md.matrix, _ENTROPY["perron_tol"])
        lower = float(np.log(float(lo))) if lo > 1 else 0.0
        upper = float(np.log(float(hi))) if hi > 1 else 0.0
        method = EntropyMethod.MarkovExact
    else:
        lap = entropy_lap(f, depth, _ENTROPY["lap_budget"], horseshoe_power=1)
        lower, upper, method = lap.lower_bound, lap.upper_bound, EntropyMethod.LapCount
    agree = lower - slack <= value <= upper + slack
    if not agree:
        logger().warning("lambda %.15g disagrees with the %s entropy bracket [%.12g, %.12g]", lam, method.name,
                lower, upper)
    return {"method": method.name, "value": value, "lower": lower, "upper": upper, "slack": slack, "agree": agree}

def model_agreement(a, b, tol=None):
    """Sup distance of two computed models and their slope gap, against the sum of their residuals."""
    tol = _PARRY["tol"] if tol is None else tol
    distance = float(sup_distance(a.model, b.model))
    lam_gap = abs(a.lam - b.lam)
    tolerance = a.conjugacy_residual + b.conjugacy_residual + 10 * tol
    agree = distance < tolerance and lam_gap < tolerance
    if not agree:
        logger().warning("%s and %s models disagree: distance %.3g, lambda gap %.3g, tolerance %.3g",
                a.notes.get("route"), b.notes.get("route"), distance, lam_gap, tolerance)
    return {"route": b.notes.get("route"), "model_distance": distance, "lam_gap": lam_gap, "tolerance": tolerance,
            "agree": agree}

def constant_slope_model(f, tol=None, max_iter=None, breakpoint_cap=None, grid_size=None, verdict=None, initial=None,
        cross_check=None):
    tol = _PARRY["tol"] if tol is None else tol
    max_iter = _PARRY["max_iter"] if max_iter is None else max_iter
    breakpoint_cap = _PARRY["breakpoint_cap"] if breakpoint_cap is None else breakpoint_cap
    grid_size = _ENTROPY["grid_size"] if grid_size is None else grid_size
    cross_check = _PARRY["cross_check"] if cross_check is None else cross_check
    trusted = _trusted(verdict)

    lam = is_constant_slope(f)
    if lam is not None and lam > 1:
        value = float(np.log(float(lam)))
        estimate = EntropyEstimate(value, value, value, EntropyMethod.MarkovExact, 0, lam_bracket=(lam, lam))
        cs = CSModel(f, MonotoneCDF.identity(), float(lam), estimate, cdf=MonotoneCDF.identity(), trusted=trusted,
                notes={"route": "constant-slope"})
        verify_conjugacy(f, cs)
        return cs

    cs = _transfer_model(f, tol, max_iter, breakpoint_cap, grid_size, initial)
    cs.trusted = trusted
    if cross_check:
        cs.notes["entropy_check"] = entropy_agreement(f, cs.lam, cs.entropy.width + cs.conjugacy_residual + 10 * tol)
    logger().info("constant_slope_model: lambda %.15g after %d steps, residual %.3g", cs.lam, cs.notes["iterations"],
            cs.conjugacy_residual)
    return cs

def _perron_vector(matrix, x):
    """Right eigenvector candidate at x with last entry 1: solves the first n-1 rows of (xI - M) l = 0."""
    n = len(matrix)
    if n == 1:
        return [Fraction(1)]
    m = n - 1
    a = [[(x if i == j else 0) - matrix[i][j] for j in range(m)] + [Fraction(matrix[i][m])] for i in range(m)]
    for k in range(m):
        pivot = a[k][k]
        if pivot == 0:
            raise ReducibleMatrixError("singular principal block; restrict to a strongly connected component")
        for i in range(m):
            if i != k and a[i][k]:
                factor = a[i][k] / pivot
                a[i] = [u - factor * v for u, v in zip(a[i], a[k])]
    return [a[i][m] / a[i][i] for i in range(m)] + [Fraction(1)]

def _solve_on_cell(f, a, b, y):
    for x0, x1, y0, y1, s in f.pieces():
        u, v = max(x0, a), min(x1, b)
        if u >= v:
            continue
        fu, fv = y0 + s * (u - x0), y0 + s * (v - x0)
        if min(fu, fv) <= y <= max(fu, fv):
            return x0 + (y - y0) / s
    raise MapError("{} not attained on [{}, {}]".format(y, a, b))

def markov_constant_slope(f, md, tol=None, max_points=None, grid_size=None, cross_check=None):
    """Exact Parry-vector model; with cross_check the transfer route is run too and compared in notes."""
    tol = _ENTROPY["perron_tol"] if tol is None else tol
    max_points = _PARRY["markov_points"] if max_points is None else max_points
    grid_size = _ENTROPY["grid_size"] if grid_size is None else grid_size
    cross_check = _PARRY["cross_check"] if cross_check is None else cross_check
    graph = nx.DiGraph()
    graph.add_nodes_from(range(md.size))
    graph.add_edges_from((i, j) for i, row in enumerate(md.matrix) for j, v in enumerate(row) if v)
    if not nx.is_strongly_connected(graph):
        raise ReducibleMatrixError("Markov matrix is reducible; restrict to a strongly connected component")

    lo, hi = perron_bracket(md.matrix, tol)
    if lo == hi:
        lengths = _perron_vector(md.matrix, lo)
    else:
        low, high = _perron_vector(md.matrix, lo), _perron_vector(md.matrix, hi)
        lengths = [(u + v) / 2 for u, v in zip(low, high)]
    total = sum(lengths)
    lengths = [v / total for v in lengths]
    q = [Fraction(0)]
    for v in lengths[:-1]:
        q.append(q[-1] + v)
    q.append(Fraction(1))

    p = list(md.partition)
    index = {x: i for i, x in enumerate(p)}
    model = PLMap([(q[i], q[index[f(p[i])]]) for i in range(len(p))])
    lam = (lo + hi) / 2

    known = dict(zip(q, p))
    change = Fraction(0)
    cells = len(p) - 1
    while True:
        qs = sorted(known)
        fresh = {}
        for i in range(cells):
            ma, mb = model(q[i]), model(q[i + 1])
            slope = (mb - ma) / (q[i + 1] - q[i])
            lo_q, hi_q = min(ma, mb), max(ma, mb)
            for point in qs[bisect.bisect_right(qs, lo_q):bisect.bisect_left(qs, hi_q)]:
                x = q[i] + (point - ma) / slope
                if x not in known:
                    fresh[x] = _solve_on_cell(f, p[i], p[i + 1], known[point])
        if not fresh:
            change = Fraction(0)
            break
        current = MonotoneCDF(qs, [known[x] for x in qs])
        change = max(abs(y - current(x)) for x, y in fresh.items())
        known.update(fresh)
        logger().debug("markov_constant_slope: %d psi points, change %.3g", len(known), float(change))
        if change < as_fraction(tol) or len(known) > max_points:
            break
    qs = sorted(known)
    psi = MonotoneCDF(qs, [known[x] for x in qs])
    value = float(np.log(float(lam))) if lam > 1 else 0.0
    estimate = EntropyEstimate(value, float(np.log(float(lo))) if lo > 1 else 0.0, float(np.log(float(hi))) if hi > 1 else 0.0,
            EntropyMethod.MarkovExact, md.size, lam_bracket=(lo, hi))
    cs = CSModel(model, psi, float(lam), estimate, notes={"route": "markov", "psi_change": float(change), "lengths": lengths})
    verify_conjugacy(f, cs)
    if cross_check:
        try:
            other = _transfer_model(f, _PARRY["tol"], _PARRY["max_iter"], _PARRY["breakpoint_cap"], grid_size)
            cs.notes["cross_check"] = model_agreement(cs, other)
        except ConvergenceError as err:
            logger().warning("markov_constant_slope: transfer cross-check failed: %s", err)
            cs.notes["cross_check"] = {"route": "transfer", "agree": None, "error": str(err)}
    return cs

def flatness_diagnostics(F, eps_list):
    """(eps, delta) rows with delta = min over y - x = eps of F(y) - F(x)."""
    rows = []
    for eps in eps_list:
        if F.exact:
            e = as_fraction(eps)
            if e <= 0 or e > 1:
                raise ValueError("eps must lie in (0, 1]")
            candidates = {x for x in F.xs if x <= 1 - e} | {x - e for x in F.xs if x >= e}
            delta = min(F(x + e) - F(x) for x in candidates)
            rows.append((eps, float(delta)))
        else:
            e = float(eps)
            if e <= 0 or e > 1:
                raise ValueError("eps must lie in (0, 1]")
            xs = F.float_arrays()[0]
            candidates = np.union1d(xs[xs <= 1 - e], xs[xs >= e] - e)
            candidates = np.clip(candidates, 0.0, 1.0 - e)
            delta = float(np.min(F.evaluate(candidates + e) - F.evaluate(candidates)))
            rows.append((eps, max(delta, 0.0)))
    return rows

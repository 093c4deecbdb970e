"""Verifiable shadows of transitivity, fixed-point and covering statements.

Every "for all intervals longer than eps" statement is reduced to finitely many
grid windows, each checked with exact interval images. Statements about all
perturbations are only checked on the sample maps supplied.
"""

from fractions import Fraction

from plslope import logger, TransitivityStatus
from plslope.core_map import (RationalInterval, DiagonalSegmentError, image_interval, preimage_point,
        fixed_points, sup_distance, to_rational, as_fraction, format_rational)
from plslope.config import DEFAULTS
from plslope.hofbauer import CertificateError

_CHECKS = DEFAULTS["checks"]

class PreconditionError(ValueError):
    pass


class TransitivityVerdict():
    __slots__ = ("status", "evidence")

    def __init__(self, status, evidence=None):
        self.status = status
        self.evidence = dict(evidence or {})

    @property
    def is_transitive(self):
        return self.status.is_transitive

    def __repr__(self):
        return "TransitivityVerdict({}, {})".format(self.status.name, self.evidence)


def _windows(lo, hi, width):
    windows = []
    a = lo
    while a + width <= hi:
        windows.append(RationalInterval.closed(a, a + width))
        a += width
    return windows

def _steps_to(f, interval, target, limit):
    """Smallest m <= limit with f^m(interval) == target, else None."""
    image = interval
    for m in range(limit + 1):
        if image == target:
            return m
        image = image_interval(f, image)
    return None

def leo_constant(f, eps, k_max=None):
    """Smallest k with f^k(J) = [0,1] for every window J = [j eps/2, (j+1) eps/2]; None if k_max does not suffice."""
    k_max = _CHECKS["k_max"] if k_max is None else k_max
    eps = to_rational(eps)
    if not (0 < eps <= 2):
        raise ValueError("eps must lie in (0, 2]; got {}".format(eps))
    unit = RationalInterval.unit()
    k = 0
    for window in _windows(Fraction(0), Fraction(1), eps / 2):
        m = _steps_to(f, window, unit, k_max)
        if m is None:
            logger().debug("leo_constant: window %s not onto within %d steps", window, k_max)
            return None
        k = max(k, m)
    return k

def unique_fixed_point(f):
    points = fixed_points(f)
    return points[0] if len(points) == 1 else None

def interchanges_halves(f, e):
    return (image_interval(f, RationalInterval.closed(0, e)) == RationalInterval.closed(e, 1)
            and image_interval(f, RationalInterval.closed(e, 1)) == RationalInterval.closed(0, e))

def decomposed_leo_constant(f, eps, k_max=None):
    """(k, e) with f^(2k)(J) or f^(2k+1)(J) equal to [0,e] for every eps/4 window J on either half."""
    k_max = _CHECKS["k_max"] if k_max is None else k_max
    eps = to_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    try:
        e = unique_fixed_point(f)
    except DiagonalSegmentError:
        e = None
    if e is None or not interchanges_halves(f, e):
        raise PreconditionError("map does not interchange [0,e] and [e,1] around a unique fixed point")
    target = RationalInterval.closed(0, e)
    width = eps / 4
    left, right = _windows(Fraction(0), e, width), _windows(e, Fraction(1), width)
    if not left or not right:
        raise PreconditionError("eps = {} leaves no eps/4 window on one side of e = {}".format(eps, e))
    k = 0
    for window in left + right:
        m = _steps_to(f, window, target, 2 * k_max + 1)
        if m is None:
            logger().debug("decomposed_leo_constant: window %s does not reach [0, e]", window)
            return None
        k = max(k, m // 2)
    return k, e

def _orbit_points(f, depth, cap):
    points = set(f.critical.points)
    frontier = set(points)
    for _ in range(depth):
        frontier = {f(p) for p in frontier} - points
        if not frontier or len(points) + len(frontier) > cap:
            points |= set(sorted(frontier)[:max(0, cap - len(points))])
            break
        points |= frontier
    return sorted(points)

def invariant_interval(f, depth=None, cap=None):
    """A proper closed interval J with f(J) inside J, endpoints from the critical orbits, or None."""
    depth = _CHECKS["orbit_depth"] if depth is None else depth
    cap = _CHECKS["orbit_cap"] if cap is None else cap
    try:
        fixed_points(f)
    except DiagonalSegmentError as err:
        a, b = err.segment
        return RationalInterval.closed(a, (a + b) / 2)
    points = _orbit_points(f, depth, cap)
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            if p == 0 and q == 1:
                continue
            candidate = RationalInterval.closed(p, q)
            if candidate.contains_interval(image_interval(f, candidate)):
                return candidate
    return None

def transitivity_check(f, eps_floor=None, k_max=None):
    eps_floor = to_rational(_CHECKS["eps_floor"] if eps_floor is None else eps_floor)
    k_max = _CHECKS["k_max"] if k_max is None else k_max

    leo = {}
    eps = Fraction(1, 2)
    while eps >= eps_floor:
        k = leo_constant(f, eps, k_max)
        if k is None:
            leo = None
            break
        leo[format_rational(eps)] = k
        eps /= 2
    if leo:
        logger().info("transitivity_check: locally eventually onto down to eps=%s", eps_floor)
        return TransitivityVerdict(TransitivityStatus.TransitiveLEO, {"k": leo[min(leo, key=lambda s: Fraction(s))], "leo": leo})

    try:
        decomposed = decomposed_leo_constant(f, eps_floor, k_max)
    except PreconditionError:
        decomposed = None
    if decomposed is not None:
        k, e = decomposed
        return TransitivityVerdict(TransitivityStatus.TransitiveDecomposed, {
            "e": format_rational(e), "k": k, "eps": format_rational(eps_floor),
            "left_image": str(image_interval(f, RationalInterval.closed(0, e))),
            "right_image": str(image_interval(f, RationalInterval.closed(e, 1))),
        })

    witness = invariant_interval(f)
    if witness is not None:
        logger().info("transitivity_check: invariant interval %s", witness)
        return TransitivityVerdict(TransitivityStatus.NotTransitive, {
            "invariant_interval": [format_rational(witness.lo), format_rational(witness.hi)],
            "image": str(image_interval(f, witness)),
        })
    return TransitivityVerdict(TransitivityStatus.Unknown, {"eps_floor": format_rational(eps_floor), "k_max": k_max})


class AccessibilityWitness():
    __slots__ = ("x", "y", "trusted")

    def __init__(self, x, y, trusted):
        self.x = x
        self.y = y
        self.trusted = trusted


def _second_preimages(f, target):
    found = set()
    for z in preimage_point(f, target):
        for x in preimage_point(f, z):
            if 0 < x < 1:
                found.add(x)
    return sorted(found)

def endpoint_accessibility(f, verdict=None):
    """Smallest interior x, y with f^2(x) = 0 and f^2(y) = 1."""
    trusted = verdict is not None and verdict.is_transitive
    if not trusted:
        logger().warning("untrusted: transitivity unverified")
    xs = _second_preimages(f, Fraction(0))
    ys = _second_preimages(f, Fraction(1))
    if not xs or not ys:
        if trusted:
            raise CertificateError("no interior second preimage of {}".format("0" if not xs else "1"))
        return AccessibilityWitness(xs[0] if xs else None, ys[0] if ys else None, False)
    return AccessibilityWitness(xs[0], ys[0], trusted)

def covers_unit(intervals):
    """True iff the union of closed intervals is [0,1]."""
    reach = Fraction(0)
    started = False
    for interval in sorted((i for i in intervals if not i.is_empty()), key=lambda i: i.lo):
        if not started:
            if interval.lo != 0:
                return False
            started = True
        elif interval.lo > reach:
            return False
        reach = max(reach, interval.hi)
    return started and reach == 1

def iterate_image(f, interval, n):
    for _ in range(n):
        interval = image_interval(f, interval)
    return interval

def composite_covering(g, lo, hi, powers=(4, 5)):
    """Whether g^4([lo,hi]) and g^5([lo,hi]) together cover [0,1]; returns (ok, images)."""
    base = RationalInterval.closed(lo, hi)
    images = [iterate_image(g, base, n) for n in powers]
    return covers_unit(images), images


class AccessibilityConstants():
    def __init__(self, rho, zeta, report, composite=None):
        self.rho = rho
        self.zeta = zeta
        self.report = report
        self.composite = composite or []


def equi_accessibility_constants(f, rho_grid, zeta_grid, samples, e=None):
    """Largest rho and smallest zeta from the grids such that every sample g has g^2([rho, 1-rho]) = [0,1].

    This checks the conclusion on the given samples only. With e set, the
    g^4/g^5 covering of [rho, e - rho] is reported for the same samples.
    """
    rho_grid = sorted(as_fraction(r) for r in rho_grid)
    zeta_grid = sorted(as_fraction(z) for z in zeta_grid)
    distances = [sup_distance(f, g) for g in samples]
    worst = max(distances) if distances else Fraction(0)
    zeta = next((z for z in zeta_grid if worst < z), None)
    if zeta is None:
        raise PreconditionError("a sample lies {} from f, outside every neighbourhood of the grid".format(worst))
    unit = RationalInterval.unit()
    rho = None
    for r in rho_grid:
        if r <= 0 or r >= Fraction(1, 2):
            continue
        if all(iterate_image(g, RationalInterval.closed(r, 1 - r), 2) == unit for g in samples):
            rho = r
    report = []
    for g, dist in zip(samples, distances):
        passed = rho is not None and iterate_image(g, RationalInterval.closed(rho, 1 - rho), 2) == unit
        report.append({"distance": dist, "passed": passed})
    composite = []
    if e is not None and rho is not None:
        e = to_rational(e)
        for g in samples:
            ok, images = composite_covering(g, rho, e - rho)
            composite.append({"passed": ok, "images": [str(i) for i in images]})
    logger().info("equi_accessibility_constants: rho=%s zeta=%s over %d samples", rho, zeta, len(samples))
    return AccessibilityConstants(rho, zeta, report, composite)

def equicontinuity_modulus(family, eps_list):
    """Rows (eps, delta, argmin) with delta the smallest flatness value over the family."""
    from plslope.parry import flatness_diagnostics
    if not family:
        raise ValueError("family must be nonempty")
    tables = [flatness_diagnostics(F, eps_list) for F in family]
    rows = []
    for i, eps in enumerate(eps_list):
        values = [table[i][1] for table in tables]
        argmin = min(range(len(values)), key=lambda j: values[j])
        rows.append((eps, values[argmin], argmin))
    return rows

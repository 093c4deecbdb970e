"""Example maps and parameterized families.

Example 1 perturbs the full 3-horseshoe by conjugating constant-slope maps of
modality 8; Example 2 puts slope-3 caps on a 2-cycle of critical points of a
modality-5 map given on [0, 72].
"""

from fractions import Fraction

from plslope import logger
from plslope.core_map import (PLMap, MapError, connect_the_dots, constant_slope_from_critical_values, compose,
        to_rational, identity_map)
from plslope.parry import MonotoneCDF

def horseshoe3():
    return PLMap([(0, 0), (Fraction(1, 3), 1), (Fraction(2, 3), 0), (1, 1)])

def tent2():
    return PLMap([(0, 0), (Fraction(1, 2), 1), (1, 0)])

def golden_mean_map():
    return PLMap([(0, 1), (Fraction(1, 2), 0), (1, Fraction(1, 2))])

def interchange_map():
    """Unique fixed point 1/2; swaps [0,1/2] and [1/2,1]."""
    return PLMap([(0, Fraction(1, 2)), (Fraction(1, 4), 1), (Fraction(3, 4), 0), (1, Fraction(1, 2))])

def modality_preserving(s):
    s = to_rational(s)
    if not (0 <= s < Fraction(1, 2)):
        raise MapError("s = {} outside [0, 1/2)".format(s))
    return PLMap([(0, 0), (Fraction(1, 3), 1 - s), (Fraction(2, 3), s), (1, 1)])


EXAMPLE2_DOTS = ((0, 32), (20, 52), (24, 60), (25, 58), (32, 72), (52, 32), (58, 20), (60, 24), (72, 0))
EXAMPLE2_DOMAIN = (0, 72)

def example1_values(t):
    """Critical values of the constant-slope map of Example 1, slope 3 + 2t."""
    t = to_rational(t)
    a = Fraction(1, 2) - t
    b = Fraction(1, 2) + t
    return [a, Fraction(1, 4) - t + 2 * t * t, a + t * t, Fraction(0), b + t * t, a - t * t,
            Fraction(1), b - t * t, Fraction(3, 4) + t - 2 * t * t, b]


class Example1Bundle():
    """f, the constant-slope g_tilde, the homeomorphism psi and g = psi o g_tilde o psi^-1.

    At t = 0 only f and g_tilde are set: the conjugacy collapses the middle lap.
    """

    def __init__(self, t, f, g_tilde, psi=None, g=None):
        self.t = t
        self.f = f
        self.g_tilde = g_tilde
        self.psi = psi
        self.g = g

    @property
    def lam(self):
        return 3 + 2 * self.t

    @property
    def degenerate(self):
        return self.t == 0


def example1(t):
    t = to_rational(t)
    if not (0 <= t <= Fraction(1, 4)):
        raise MapError("example1 needs 0 <= t <= 1/4, got {}".format(t))
    f = horseshoe3()
    lam = 3 + 2 * t
    if t == 0:
        g_tilde = constant_slope_from_critical_values(lam, example1_values(t), strict=False)
        logger().debug("example1: degenerate member t=0 with %d laps", g_tilde.lap_count)
        return Example1Bundle(t, f, g_tilde)
    g_tilde = constant_slope_from_critical_values(lam, example1_values(t))
    a = Fraction(1, 2) - t
    b = Fraction(1, 2) + t
    psi_map = PLMap([(0, 0), (a, t), (b, 1 - t), (1, 1)])
    g = compose(compose(psi_map, g_tilde), psi_map.inverse())
    return Example1Bundle(t, f, g_tilde, MonotoneCDF.from_map(psi_map), g)


def example2_map():
    return connect_the_dots(EXAMPLE2_DOTS, domain=EXAMPLE2_DOMAIN)


class Example2Bundle():
    """t is in the original [0, 72] units; f and g live on [0, 1]."""

    def __init__(self, t, f, g):
        self.t = t
        self.f = f
        self.g = g

    @property
    def cap_radius(self):
        return self.t / EXAMPLE2_DOMAIN[1]

    def caps(self):
        """The two cap intervals in [0, 1] coordinates."""
        width = EXAMPLE2_DOMAIN[1]
        return [((c - self.t) / width, (c + self.t) / width) for c in (24, 60)]


def example2(t):
    t = to_rational(t)
    if not (0 < t <= 1):
        raise MapError("example2 needs 0 < t <= 1, got {}".format(t))
    dots = {Fraction(x): Fraction(y) for x, y in EXAMPLE2_DOTS}
    for c, top in ((24, 60), (60, 24)):
        del dots[Fraction(c)]
        dots[c - t] = top - 2 * t
        dots[Fraction(c)] = top + t
        dots[c + t] = top - 2 * t
    g = connect_the_dots(sorted(dots.items()), domain=EXAMPLE2_DOMAIN)
    return Example2Bundle(t, example2_map(), g)


class Family():
    """A base map and its perturbations g_t; ``worked_example`` is False for the synthetic control family."""

    name = None
    worked_example = True

    def base(self):
        raise NotImplementedError

    def member(self, t):
        raise NotImplementedError

    def base_model(self):
        """(model, psi) of the base map when known exactly, else None."""
        return None


class Example1Family(Family):
    name = "example1"

    def base(self):
        return horseshoe3()

    def member(self, t):
        bundle = example1(t)
        if bundle.degenerate:
            raise MapError("example1 member needs t > 0")
        return bundle.g

    def base_model(self):
        return horseshoe3(), MonotoneCDF.identity()


class Example2Family(Family):
    name = "example2"

    def base(self):
        return example2_map()

    def member(self, t):
        return example2(t).g


class ModalityPreservingFamily(Family):
    name = "modality-preserving"
    worked_example = False

    def base(self):
        return horseshoe3()

    def member(self, t):
        return modality_preserving(t)

    def base_model(self):
        return horseshoe3(), MonotoneCDF.identity()


FAMILIES = {family.name: family for family in (Example1Family(), Example2Family(), ModalityPreservingFamily())}

def get_family(name):
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError("unknown family {!r}; choose from {}".format(name, sorted(FAMILIES)))

__all__ = ["horseshoe3", "tent2", "golden_mean_map", "interchange_map", "modality_preserving", "identity_map",
        "example1", "example2", "example2_map", "Example1Bundle", "Example2Bundle", "Family", "get_family"]

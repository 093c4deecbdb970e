"""JSON files for maps, models, estimates and verdicts.

Exact numbers are written as reduced "p/q" strings, floats as decimal strings
with 17 significant digits so that a reread gives the same double.
"""

import json
import hashlib

from enum import Enum
from fractions import Fraction

import numpy as np

from plslope import logger
from plslope.core_map import MapError, connect_the_dots, parse_rational, format_rational, RationalInterval

FLOAT_FORMAT = "%.17g"

class MapParseError(ValueError):
    def __init__(self, message, line=None, column=None, dot=None):
        where = []
        if line is not None:
            where.append("line {} column {}".format(line, column))
        if dot is not None:
            where.append("dot {}".format(dot))
        super().__init__("{}{}".format(message, " ({})".format(", ".join(where)) if where else ""))
        self.line = line
        self.column = column
        self.dot = dot


def _literal(value, dot):
    if isinstance(value, float):
        raise MapParseError("decimal literal {!r} refused, use \"p/q\"".format(value), dot=dot)
    try:
        return parse_rational(value)
    except ValueError as err:
        raise MapParseError(str(err), dot=dot)

def parse_map(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise MapParseError(err.msg, line=err.lineno, column=err.colno)
    if not isinstance(data, dict) or "dots" not in data:
        raise MapParseError("map file needs an object with a \"dots\" list")
    dots = data["dots"]
    if not isinstance(dots, list):
        raise MapParseError("\"dots\" must be a list")
    parsed = []
    for i, dot in enumerate(dots):
        if not isinstance(dot, list) or len(dot) != 2:
            raise MapParseError("a dot is a pair [x, y]", dot=i)
        parsed.append((_literal(dot[0], i), _literal(dot[1], i)))
    domain = data.get("domain")
    if domain is not None:
        if not isinstance(domain, list) or len(domain) != 2:
            raise MapParseError("\"domain\" must be a pair [lo, hi]")
        domain = (_literal(domain[0], None), _literal(domain[1], None))
        if domain == (0, 1):
            domain = None
    try:
        return connect_the_dots(parsed, domain=domain)
    except MapError as err:
        raise MapParseError(err.reason, dot=err.index)

def read_map(path):
    with open(path, "r") as tf:
        text = tf.read()
    f = parse_map(text)
    logger().debug("map read from %s: %d dots, modality %d", path, len(f.xs), f.modality)
    return f

def map_to_dict(f):
    scale = f.scale
    return {
        "domain": ["0", format_rational(scale)],
        "dots": [[format_rational(x * scale), format_rational(y * scale)] for x, y in f.dots],
    }

def map_to_json(f):
    return json.dumps(map_to_dict(f), indent=1)

def map_digest(f):
    return hashlib.sha256(json.dumps(map_to_dict(f), sort_keys=True).encode("utf-8")).hexdigest()

def write_map(f, path):
    with open(path, "w") as tf:
        tf.write(map_to_json(f))

def jsonable(value):
    """Exact values to "p/q", floats to 17 digits, containers recursively."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    if isinstance(value, RationalInterval):
        return str(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    return str(value)

def _cdf_dots(cdf):
    if cdf.exact:
        return [[format_rational(x), format_rational(y)] for x, y in cdf.dots]
    return [[FLOAT_FORMAT % x, FLOAT_FORMAT % y] for x, y in zip(cdf.xs, cdf.ys)]

def estimate_to_dict(estimate):
    return jsonable({
        "value": estimate.value,
        "lower_bound": estimate.lower_bound,
        "upper_bound": estimate.upper_bound,
        "method": estimate.method,
        "depth": estimate.depth,
        "converged": estimate.converged,
        "lambda": estimate.lam,
        "lambda_bracket": list(estimate.lam_bracket) if estimate.lam_bracket else None,
        "notes": estimate.notes,
    })

def verdict_to_dict(verdict):
    return {"status": verdict.status.name, "transitive": verdict.is_transitive, "evidence": jsonable(verdict.evidence)}

def csmodel_to_dict(cs):
    data = {
        "model": [[format_rational(x), format_rational(y)] for x, y in cs.model.dots],
        "psi": _cdf_dots(cs.psi),
        "psi_exact": cs.psi.exact,
        "lambda": jsonable(cs.lam),
        "entropy": estimate_to_dict(cs.entropy),
        "residuals": jsonable(cs.residuals()),
        "trusted": cs.trusted,
        "notes": jsonable(cs.notes),
    }
    if not cs.trusted:
        data["flag"] = "untrusted: transitivity unverified"
    return data

def to_json(data):
    return json.dumps(data, indent=2, sort_keys=True)

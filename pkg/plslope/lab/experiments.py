"""Experiment harnesses producing ExperimentTable objects.

Rows are independent; with threads > 1 they run on a thread pool and are
collected in parameter order, so tables do not depend on scheduling.
"""

import math
import platform

from fractions import Fraction

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from deepdiff import DeepDiff

from plslope import logger
from plslope.core_map import (BudgetExceeded, MapError, NotMonotoneError, to_rational, format_rational,
        preimage_counts, sup_distance, is_constant_slope, match_critical_points)
from plslope.config import Config
from plslope.entropy import best_estimate, markov_detect
from plslope.parry import (ConvergenceError, ReducibleMatrixError, constant_slope_model,
        markov_constant_slope)
from plslope.dynamics_checks import transitivity_check, unique_fixed_point, equicontinuity_modulus
from plslope.persist.jsonpersist import map_digest
from plslope.lab.table import ExperimentTable

SOLVER_ERRORS = (ConvergenceError, ReducibleMatrixError, BudgetExceeded, MapError, NotMonotoneError)

def _config(config):
    return config if config is not None else Config()

def _metadata(table, config, **extra):
    table.add_metadata("experiment", table.name)
    table.add_metadata("config_sha256", config.digest())
    table.add_metadata("config", config.to_json())
    table.add_metadata("numpy", np.__version__)
    table.add_metadata("python", platform.python_version())
    for key, value in extra.items():
        table.add_metadata(key, value)

def _run_rows(func, params, threads):
    if threads is None or threads <= 1:
        return [func(p) for p in params]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, params))

def solve_model(f, config=None, verdict=None):
    """Constant-slope model by the cheapest applicable route: slope shortcut, Markov, then transfer."""
    config = _config(config)
    parry = config.section("parry")
    entropy = config.section("entropy")
    lam = is_constant_slope(f)
    if lam is None or lam <= 1:
        md = markov_detect(f, entropy["markov_steps"])
        if md is not None:
            try:
                cs = markov_constant_slope(f, md, entropy["perron_tol"], parry["markov_points"], entropy["grid_size"],
                        parry["cross_check"])
                cs.trusted = verdict is not None and verdict.is_transitive
                return cs
            except ReducibleMatrixError as err:
                logger().info("solve_model: Markov route refused (%s), using transfer", err)
    return constant_slope_model(f, parry["tol"], parry["max_iter"], parry["breakpoint_cap"], entropy["grid_size"],
            verdict=verdict, cross_check=parry["cross_check"])

def _model_distance(a, b):
    return float(sup_distance(a, b))


def theorem1_experiment(f, x, n_max, budget=None, config=None, verdict=None):
    """Preimage counts #f^-n(x) against lambda^n."""
    config = _config(config)
    x = to_rational(x)
    if verdict is None:
        verdict = transitivity_check(f, config.get("checks", "eps_floor"), config.get("checks", "k_max"))
    exact_lam = is_constant_slope(f)
    exact = exact_lam is not None and exact_lam > 1
    if exact:
        lam = exact_lam
        lam_source = "constant slope"
    else:
        estimate = best_estimate(f, config)
        lam = estimate.lam
        lam_source = estimate.method.name
    result = preimage_counts(f, x, n_max, budget if budget is not None else config.get("core", "node_budget"))
    table = ExperimentTable("theorem1", ["n", "count", "ratio"])
    log_lam = math.log(float(lam))
    for n, count in enumerate(result.counts):
        if exact:
            ratio = float(Fraction(count) / lam ** n)
        else:
            ratio = math.exp(math.log(count) - n * log_lam) if count else 0.0
        table.add_row(n=n, count=count, ratio=ratio)
    ratios = table.column("ratio")[1:] or table.column("ratio")
    trailing = min(ratios[len(ratios) // 2:])
    threshold = config.get("lab", "ratio_threshold")
    _metadata(table, config, map_sha256=map_digest(f), x=format_rational(x), lam=float(lam), lam_source=lam_source,
            transitivity=verdict.status.name, truncated=result.truncated, trailing_min=trailing,
            bounded=trailing > threshold)
    if not verdict.is_transitive:
        logger().warning("untrusted: transitivity unverified")
    return table


THEOREM3_COLUMNS = ["t", "d_map", "h", "h_gap", "d_model", "d_psi", "model_slope", "h_lower", "verdict", "error"]

def theorem3_experiment(family, t_values, config=None, threads=None):
    """Distances of maps, entropies, models and conjugacies of g_t against the base map."""
    config = _config(config)
    threads = config.get("lab", "threads") if threads is None else threads
    f = family.base()
    base_estimate = best_estimate(f, config)
    known = family.base_model()
    if known is not None:
        base_model, base_psi = known
    else:
        cs = solve_model(f, config)
        base_model, base_psi = cs.model, cs.psi
    checks = config.section("checks")

    def row(t):
        values = {"t": t}
        try:
            g = family.member(t)
            values["d_map"] = float(sup_distance(g, f))
            verdict = transitivity_check(g, checks["eps_floor"], checks["k_max"])
            values["verdict"] = verdict.status.name
            estimate = best_estimate(g, config)
            values["h"] = estimate.value
            values["h_gap"] = abs(estimate.value - base_estimate.value)
            values["h_lower"] = estimate.notes.get("horseshoe_lower")
            cs = solve_model(g, config, verdict)
            values["d_model"] = _model_distance(cs.model, base_model)
            values["d_psi"] = float(cs.psi.sup_distance(base_psi))
            values["model_slope"] = float(cs.lam)
        except SOLVER_ERRORS as err:
            logger().warning("theorem3: row t=%s failed: %s", t, err)
            values["error"] = "{}: {}".format(type(err).__name__, err)
        return values

    t_values = [to_rational(t) for t in t_values]
    table = ExperimentTable("theorem3_" + family.name, THEOREM3_COLUMNS)
    for values in _run_rows(row, t_values, threads):
        table.add_row(**values)
    _metadata(table, config, family=family.name, worked_example=family.worked_example, base_sha256=map_digest(f),
            base_entropy=base_estimate.value, base_entropy_lower=base_estimate.lower_bound,
            base_entropy_upper=base_estimate.upper_bound)
    return table

def theorem2_experiment(family, t_values, eps_list, config=None, threads=None):
    """Equicontinuity modulus of the inverse conjugacies F_t = psi_t^-1 over the family."""
    config = _config(config)
    threads = config.get("lab", "threads") if threads is None else threads
    t_values = [to_rational(t) for t in t_values]

    def member_cdf(t):
        try:
            cs = solve_model(family.member(t), config)
            return cs.psi_inverse, None
        except SOLVER_ERRORS as err:
            logger().warning("theorem2: member t=%s failed: %s", t, err)
            return None, "{}: {}".format(type(err).__name__, err)

    results = _run_rows(member_cdf, t_values, threads)
    kept = [(t, cdf) for t, (cdf, _) in zip(t_values, results) if cdf is not None]
    failed = [format_rational(t) for t, (cdf, _) in zip(t_values, results) if cdf is None]
    table = ExperimentTable("theorem2_" + family.name, ["eps", "delta", "argmin_t"])
    if kept:
        for eps, delta, index in equicontinuity_modulus([cdf for _, cdf in kept], eps_list):
            table.add_row(eps=eps, delta=delta, argmin_t=kept[index][0])
    _metadata(table, config, family=family.name, members=",".join(format_rational(t) for t, _ in kept),
            failed=",".join(failed))
    return table

def continuity_report(family, t_values, reference_t=None):
    """Displacement of matched critical points and of the unique fixed point against the base map (or member reference_t)."""
    base = family.base() if reference_t is None else family.member(to_rational(reference_t))
    try:
        base_fixed = unique_fixed_point(base)
    except ValueError:
        base_fixed = None
    table = ExperimentTable("continuity_" + family.name, ["t", "modality", "crit_displacement", "fixed_point_displacement", "d_map"])
    for t in (to_rational(t) for t in t_values):
        g = family.member(t)
        try:
            _, displacement = match_critical_points(base, g)
        except MapError:
            displacement = None
        try:
            fixed = unique_fixed_point(g)
        except ValueError:
            fixed = None
        moved = abs(fixed - base_fixed) if fixed is not None and base_fixed is not None else None
        table.add_row(t=t, modality=g.modality, crit_displacement=displacement, fixed_point_displacement=moved,
                d_map=sup_distance(g, base))
    table.add_metadata("family", family.name)
    table.add_metadata("reference", "base" if reference_t is None else format_rational(to_rational(reference_t)))
    return table

def compare_tables(a, b, ignore_metadata=("python", "numpy")):
    """DeepDiff of two tables; an empty result means bit-identical content."""
    left, right = a.as_dict(), b.as_dict()
    for data in (left, right):
        data["metadata"] = [m for m in data["metadata"] if m[0] not in ignore_metadata]
        data["name"] = None
    return DeepDiff(left, right)

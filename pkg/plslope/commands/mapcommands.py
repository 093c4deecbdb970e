import json
import math

from plslope import logger, TransitivityStatus
from plslope.commands import ResultType, PARAM_MAP_FILE, PARAM_LOG2, RESP_RESULT
from plslope.commands.commandbase import CommandBase
from plslope.core_map import DiagonalSegmentError, fixed_points, format_rational, as_fraction
from plslope.entropy import best_estimate, entropy_lap, entropy_transfer, markov_detect, perron_root
from plslope.hofbauer import build_diagram, export_dot, export_json, top_scc
from plslope.dynamics_checks import PreconditionError, transitivity_check, unique_fixed_point, endpoint_accessibility
from plslope.persist.jsonpersist import read_map, map_digest, estimate_to_dict, verdict_to_dict, csmodel_to_dict, jsonable
from plslope.lab.experiments import solve_model, theorem1_experiment

def _with_log2(data, enabled):
    if enabled:
        for key in ("value", "lower_bound", "upper_bound"):
            data[key + "_log2"] = jsonable(float(data[key]) / math.log(2))
    return data


class EntropyCommand(CommandBase):
    NAME = "entropy"
    METHODS = ("auto", "lap", "transfer", "markov")

    def __init__(self):
        super().__init__(self.NAME)

    def do_process(self, params, config, response):
        f = read_map(params[PARAM_MAP_FILE])
        method = params.get("method") or "auto"
        section = config.section("entropy")
        depth = params.get("depth") or section["lap_depth"]
        tol = params.get("tol")
        if method == "lap":
            estimate = entropy_lap(f, depth, section["lap_budget"], section["fit_window"], section["horseshoe_power"])
        elif method == "transfer":
            estimate = entropy_transfer(f, section["grid_size"], section["max_iter"], tol or section["tol"], section["shift"])
        elif method == "markov":
            md = markov_detect(f, section["markov_steps"])
            if md is None:
                raise PreconditionError("critical orbits do not close within {} steps; not a Markov map".format(section["markov_steps"]))
            estimate = perron_root(md.matrix, tol or section["perron_tol"])
            estimate.notes["partition"] = list(md.partition)
        elif method == "auto":
            if params.get("depth"):
                config.set("entropy", "lap_depth", depth)
            if tol:
                config.set("entropy", "tol", tol)
                config.set("entropy", "perron_tol", format_rational(as_fraction(tol)))
            estimate = best_estimate(f, config)
        else:
            raise ValueError("unknown method {!r}".format(method))
        result = _with_log2(estimate_to_dict(estimate), params.get(PARAM_LOG2))
        result["map_sha256"] = map_digest(f)
        self.emit_json(response, config, result)
        return ResultType.SUCCESS if estimate.converged else ResultType.PARTIAL


class CSModelCommand(CommandBase):
    NAME = "csmodel"

    def __init__(self):
        super().__init__(self.NAME)

    def do_process(self, params, config, response):
        for key, option in (("tol", "tol"), ("max_iter", "max_iter"), ("breakpoint_cap", "cap")):
            if params.get(option) is not None:
                config.set("parry", key, params[option])
        f = read_map(params[PARAM_MAP_FILE])
        checks = config.section("checks")
        verdict = transitivity_check(f, checks["eps_floor"], checks["k_max"])
        forced = False
        if verdict.status == TransitivityStatus.NotTransitive:
            if not params.get("force"):
                response[RESP_RESULT] = verdict_to_dict(verdict)
                raise PreconditionError("refused: map is not transitive (invariant interval {})".format(
                        verdict.evidence.get("invariant_interval")))
            logger().warning("csmodel forced on a non-transitive map")
            forced = True
        cs = solve_model(f, config, verdict)
        result = csmodel_to_dict(cs)
        result["transitivity"] = verdict_to_dict(verdict)
        result["map_sha256"] = map_digest(f)
        if forced:
            result["forced"] = True
        self.emit_json(response, config, result)
        return ResultType.SUCCESS


class DiagramCommand(CommandBase):
    NAME = "diagram"

    def __init__(self):
        super().__init__(self.NAME)

    def do_process(self, params, config, response):
        f = read_map(params[PARAM_MAP_FILE])
        section = config.section("hofbauer")
        word_cap = params.get("word_cap") or section["word_cap"]
        vertex_cap = params.get("vertex_cap") or section["vertex_cap"]
        d = build_diagram(f, word_cap, vertex_cap)
        component, h = top_scc(d)
        if params.get("format") == "json":
            result = {
                "diagram": jsonable_diagram(d),
                "vertices": d.vertex_count(),
                "arrows": d.arrow_count(),
                "exact": d.exact,
                "top_scc_size": len(component) if component else 0,
                "top_scc_entropy": jsonable(h),
            }
            self.emit_json(response, config, result)
        else:
            metadata = [("config_sha256", config.digest()), ("map_sha256", map_digest(f)),
                    ("vertices", d.vertex_count()), ("arrows", d.arrow_count()), ("top_scc_entropy", "%.12g" % h)]
            self.emit_text(response, export_dot(d, metadata) + "\n", "dot")
        return ResultType.SUCCESS


def jsonable_diagram(d):
    return json.loads(export_json(d))


class PreimagesCommand(CommandBase):
    NAME = "preimages"

    def __init__(self):
        super().__init__(self.NAME)

    def do_process(self, params, config, response):
        f = read_map(params[PARAM_MAP_FILE])
        n = params.get("n") or config.get("lab", "preimage_n")
        table = theorem1_experiment(f, params["point"], n, params.get("budget"), config)
        self.emit_text(response, table.to_csv(), "csv")
        response[RESP_RESULT] = table
        return ResultType.PARTIAL if table.meta("truncated") else ResultType.SUCCESS


class CheckCommand(CommandBase):
    NAME = "check"

    def __init__(self):
        super().__init__(self.NAME)

    def do_process(self, params, config, response):
        f = read_map(params[PARAM_MAP_FILE])
        checks = config.section("checks")
        verdict = transitivity_check(f, checks["eps_floor"], checks["k_max"])
        result = {
            "transitivity": verdict_to_dict(verdict),
            "critical_points": [format_rational(c) for c in f.critical.points],
            "modality": f.modality,
            "map_sha256": map_digest(f),
        }
        try:
            result["fixed_points"] = [format_rational(p) for p in fixed_points(f)]
            e = unique_fixed_point(f)
            result["unique_fixed_point"] = format_rational(e) if e is not None else None
        except DiagonalSegmentError as err:
            result["fixed_points"] = None
            result["diagonal_segment"] = [format_rational(p) for p in err.segment]
        if verdict.is_transitive:
            witness = endpoint_accessibility(f, verdict)
            result["endpoint_accessibility"] = {"x": format_rational(witness.x), "y": format_rational(witness.y)}
        self.emit_json(response, config, result)
        return ResultType.SUCCESS


def register_commands():
    for command_class in (EntropyCommand, CSModelCommand, DiagramCommand, PreimagesCommand, CheckCommand):
        if CommandBase.get_command(command_class.NAME) is None:
            command_class()

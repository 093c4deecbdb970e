import sys
import logging

import click

from plslope import set_logger
from plslope.config import ConfigError, load_config
from plslope.core_map import parse_rational
from plslope.commands import ResultType, RESP_OUTPUT, RESP_ERROR, PARAM_MAP_FILE, PARAM_LOG2
from plslope.commands.commandhandler import CommandHandler
from plslope.commands.experimentcommand import DEFAULT_T_VALUES
from plslope.commands.mapcommands import EntropyCommand

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

class RationalType(click.ParamType):
    name = "p/q"

    def convert(self, value, param, ctx):
        try:
            return parse_rational(value)
        except ValueError as err:
            self.fail(str(err), param, ctx)


class RationalListType(click.ParamType):
    name = "p/q,p/q,..."

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return list(value)
        try:
            return [parse_rational(v) for v in value.split(",") if v.strip()]
        except ValueError as err:
            self.fail(str(err), param, ctx)


RATIONAL = RationalType()
RATIONAL_LIST = RationalListType()

def _setup_logging(level):
    log = logging.getLogger("plslope")
    for handler in [h for h in log.handlers if getattr(h, "plslope_cli", False)]:
        log.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.plslope_cli = True
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(level)
    set_logger(log)

def _dispatch(ctx, name, /, **params):
    state = ctx.obj
    params = dict(params)
    params[PARAM_LOG2] = state["log2"]
    params.setdefault("threads", state["threads"])
    out = params.pop("out", None) or state["out"]
    result, response = CommandHandler(state["config"]).handle(name, params)
    output = response.get(RESP_OUTPUT)
    if output:
        if out:
            with open(out, "w") as tf:
                tf.write(output)
        else:
            click.echo(output, nl=False)
    if result.is_failure():
        click.echo("plslope {}: {}".format(name, response.get(RESP_ERROR, result.name)), err=True)
    ctx.exit(result.exit_code)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
        help="YAML config file (default: $PLSLOPE_CONFIG).")
@click.option("--tol", type=float, default=None, help="Solver tolerance for the transfer and model iterations.")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None)
@click.option("--threads", type=int, default=None, help="Worker threads for experiment rows; 1 is bit-reproducible.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write output here instead of stdout.")
@click.option("--log2", is_flag=True, default=False, help="Also report entropies in bits.")
@click.pass_context
def main(ctx, config_path, tol, log_level, threads, out, log2):
    """Exact piecewise-linear interval maps: entropy, constant-slope models, Markov diagrams."""
    try:
        config = load_config(config_path)
    except ConfigError as err:
        click.echo("plslope: {}".format(err), err=True)
        ctx.exit(ResultType.PARSE_ERROR.exit_code)
    if tol is not None:
        config.set("entropy", "tol", tol)
        config.set("parry", "tol", tol)
    if threads is not None:
        config.set("lab", "threads", threads)
    if log2:
        config.set("cli", "log2", True)
    if log_level is not None:
        config.set("cli", "log_level", log_level.upper())
    _setup_logging(config.get("cli", "log_level"))
    ctx.obj = {"config": config, "out": out, "log2": config.get("cli", "log2"), "threads": config.get("lab", "threads")}


@main.command()
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(EntropyCommand.METHODS), default="auto")
@click.option("--depth", type=int, default=None, help="Lap-count depth.")
@click.option("--tol", type=float, default=None)
@click.pass_context
def entropy(ctx, map_file, method, depth, tol):
    """Topological entropy with a lower/upper bracket."""
    _dispatch(ctx, "entropy", **{PARAM_MAP_FILE: map_file, "method": method, "depth": depth, "tol": tol})


@main.command()
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", type=float, default=None)
@click.option("--max-iter", type=int, default=None)
@click.option("--cap", type=int, default=None, help="Breakpoint cap of the iterated CDF.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--force", is_flag=True, default=False, help="Run even when the map is not transitive.")
@click.pass_context
def csmodel(ctx, map_file, tol, max_iter, cap, out, force):
    """Constant-slope model and conjugating homeomorphism."""
    _dispatch(ctx, "csmodel", **{PARAM_MAP_FILE: map_file, "tol": tol, "max_iter": max_iter, "cap": cap,
            "out": out, "force": force})


@main.command()
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--word-cap", type=int, default=None)
@click.option("--vertex-cap", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["dot", "json"]), default="dot")
@click.pass_context
def diagram(ctx, map_file, word_cap, vertex_cap, fmt):
    """Complete Markov diagram as DOT or JSON."""
    _dispatch(ctx, "diagram", **{PARAM_MAP_FILE: map_file, "word_cap": word_cap, "vertex_cap": vertex_cap, "format": fmt})


@main.command()
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--point", type=RATIONAL, required=True)
@click.option("--n", type=int, default=None)
@click.option("--budget", type=int, default=None, help="Node budget of the preimage expansion.")
@click.pass_context
def preimages(ctx, map_file, point, n, budget):
    """Iterated preimage counts and their ratio to lambda^n, as CSV."""
    _dispatch(ctx, "preimages", **{PARAM_MAP_FILE: map_file, "point": point, "n": n, "budget": budget})


@main.command()
@click.argument("name", type=click.Choice(sorted(DEFAULT_T_VALUES)))
@click.option("--t-values", type=RATIONAL_LIST, default=None)
@click.option("--eps", "eps_list", type=RATIONAL_LIST, default=None, help="Window lengths for the theorem2 table.")
@click.pass_context
def experiment(ctx, name, t_values, eps_list):
    """Perturbation experiments over a family, as CSV."""
    _dispatch(ctx, "experiment", name=name, t_values=t_values, eps_list=eps_list)


@main.command()
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def check(ctx, map_file):
    """Transitivity verdict, critical data and fixed points."""
    _dispatch(ctx, "check", **{PARAM_MAP_FILE: map_file})


if __name__ == "__main__":
    main()

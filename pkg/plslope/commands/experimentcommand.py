from fractions import Fraction

from plslope.commands import ResultType, RESP_RESULT
from plslope.commands.commandbase import CommandBase
from plslope.lab.families import get_family
from plslope.lab.experiments import theorem3_experiment, theorem2_experiment

DEFAULT_T_VALUES = {
    "example1": (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)),
    "example2": (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)),
    "modality-preserving": (Fraction(1, 8), Fraction(1, 16), Fraction(1, 32)),
    "theorem2": (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16), Fraction(1, 32)),
}

class ExperimentCommand(CommandBase):
    NAME = "experiment"
    EXPERIMENTS = tuple(DEFAULT_T_VALUES)

    def __init__(self):
        super().__init__(self.NAME)

    def do_process(self, params, config, response):
        name = params["name"]
        if name not in DEFAULT_T_VALUES:
            raise ValueError("unknown experiment {!r}".format(name))
        t_values = params.get("t_values") or DEFAULT_T_VALUES[name]
        threads = params.get("threads")
        if name == "theorem2":
            eps_list = params.get("eps_list") or config.get("lab", "eps_list")
            table = theorem2_experiment(get_family("example1"), t_values, eps_list, config, threads)
            failed = bool(table.meta("failed"))
        else:
            table = theorem3_experiment(get_family(name), t_values, config, threads)
            failed = any(row["error"] for row in table.rows)
        self.emit_text(response, table.to_csv(), "csv")
        response[RESP_RESULT] = table
        return ResultType.PARTIAL if failed else ResultType.SUCCESS


def register_commands():
    if CommandBase.get_command(ExperimentCommand.NAME) is None:
        ExperimentCommand()

from plslope import logger
from plslope.commands import ResultType, RESP_ERROR, RESP_OUTPUT, RESP_RESULT
from plslope.commands.commandbase import CommandBase
from plslope.commands import mapcommands, experimentcommand
from plslope.config import ConfigError
from plslope.core_map import MapError, DomainError, NotMonotoneError, BudgetExceeded
from plslope.parry import ConvergenceError, ReducibleMatrixError
from plslope.hofbauer import ForbiddenWordError, CertificateError
from plslope.dynamics_checks import PreconditionError
from plslope.persist.jsonpersist import MapParseError, to_json, jsonable, map_to_dict

PARSE_ERRORS = (MapParseError, MapError, DomainError, NotMonotoneError, ForbiddenWordError, ConfigError)
PARTIAL_ERRORS = (BudgetExceeded, ConvergenceError, CertificateError)
REFUSALS = (PreconditionError, ReducibleMatrixError)

def _partial_payload(err):
    if isinstance(err, BudgetExceeded):
        payload = {"reached": err.reached, "attained": err.attained}
        if err.partial is not None:
            payload["partial"] = map_to_dict(err.partial)
        return payload
    if isinstance(err, ConvergenceError):
        return {"residuals": jsonable(err.residuals)}
    return {}


class CommandHandler():
    def __init__(self, config):
        self.config = config
        mapcommands.register_commands()
        experimentcommand.register_commands()

    def handle(self, name, params):
        """Runs one command; returns (ResultType, response) with the text to emit under RESP_OUTPUT."""
        response = {}
        command = CommandBase.get_command(name)
        if command is None:
            response[RESP_ERROR] = "unknown command {}".format(name)
            return ResultType.PARSE_ERROR, response

        logger().debug("command: %s, params: %s", name, sorted(k for k, v in params.items() if v is not None))

        try:
            result = command.do_process(params, self.config, response)
        except PARSE_ERRORS as err:
            result = self._fail(response, ResultType.PARSE_ERROR, err)
        except PARTIAL_ERRORS as err:
            result = self._fail(response, ResultType.PARTIAL, err, _partial_payload(err))
        except REFUSALS as err:
            result = self._fail(response, ResultType.REFUSED, err)
        except ValueError as err:
            result = self._fail(response, ResultType.PARSE_ERROR, err)
        except OSError as err:
            result = self._fail(response, ResultType.PARSE_ERROR, err)
        return result, response

    def _fail(self, response, result, err, payload=None):
        logger().error("%s: %s", type(err).__name__, err)
        response[RESP_ERROR] = "{}: {}".format(type(err).__name__, err)
        if RESP_OUTPUT not in response:
            body = {"error": response[RESP_ERROR], "exit_code": result.exit_code, "config_sha256": self.config.digest(),
                    "config": self.config.as_dict()}
            if payload:
                body.update(payload)
            if isinstance(response.get(RESP_RESULT), dict):
                body["result"] = response[RESP_RESULT]
            response[RESP_OUTPUT] = to_json(body) + "\n"
        return result

from plslope.commands import ResultType, RESP_OUTPUT, RESP_FORMAT, RESP_RESULT
from plslope.persist.jsonpersist import to_json

_commands = {}

class CommandBase():
    def __init__(self, name):
        self.name = name
        _commands[name] = self

    @staticmethod
    def get_command(name):
        return _commands.get(name)

    @staticmethod
    def command_names():
        return sorted(_commands)

    def do_process(self, params, config, response):
        return ResultType.SUCCESS

    def get_commandname(self):
        return self.name

    def emit_json(self, response, config, result):
        response[RESP_RESULT] = result
        response[RESP_FORMAT] = "json"
        response[RESP_OUTPUT] = to_json({
            "command": self.name,
            "config": config.as_dict(),
            "config_sha256": config.digest(),
            "result": result,
        }) + "\n"

    def emit_text(self, response, text, fmt):
        response[RESP_FORMAT] = fmt
        response[RESP_OUTPUT] = text

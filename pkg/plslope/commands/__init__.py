from enum import Enum

__all__ = ["commandbase", "commandhandler", "mapcommands", "experimentcommand"]

PARAM_MAP_FILE = "map_file"
PARAM_OUT = "out"
PARAM_LOG2 = "log2"

RESP_OUTPUT = "output"
RESP_FORMAT = "format"
RESP_ERROR = "error"
RESP_RESULT = "result"


class ResultType(Enum):
    SUCCESS = 0
    PARSE_ERROR = 2
    PARTIAL = 3
    REFUSED = 4

    @property
    def exit_code(self):
        return self.value

    def is_failure(self):
        return self != ResultType.SUCCESS

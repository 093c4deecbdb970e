import logging

from enum import Enum

__all__ = ["core_map", "entropy", "parry", "hofbauer", "dynamics_checks", "config", "templates", "lab", "persist", "commands", "cli"]

_plslope_logger = logging.getLogger("plslope")

def set_logger(logger):
    global _plslope_logger
    _plslope_logger = logger

def logger():
    global _plslope_logger
    return _plslope_logger

class EntropyMethod(Enum):
    LapCount = 0
    Transfer = 1
    MarkovExact = 2
    Horseshoe = 3

class TransitivityStatus(Enum):
    TransitiveLEO = 0
    TransitiveDecomposed = 1
    NotTransitive = 2
    Unknown = 3

    @property
    def is_transitive(self):
        return self in (TransitivityStatus.TransitiveLEO, TransitivityStatus.TransitiveDecomposed)

class Truncation(Enum):
    EXACT = 0
    WORD_CAP = 1
    VERTEX_CAP = 2

class Exactness(Enum):
    EXACT = 0
    FLOAT = 1


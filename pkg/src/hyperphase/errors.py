"""Exception hierarchy shared by the library and the CLI.

Every class carries a short ``category`` string; the CLI prints it in its
machine-readable error line and maps it to an exit code.
"""


class HyperphaseError(Exception):
    category = "error"
    exit_code = 1


class InvalidInputError(HyperphaseError, ValueError):
    category = "invalid-input"
    exit_code = 2


class CapacityError(HyperphaseError, OverflowError):
    category = "capacity"
    exit_code = 3


class ConfigError(HyperphaseError, ValueError):
    category = "config"
    exit_code = 4


class ExhaustedError(HyperphaseError):
    category = "exhausted"
    exit_code = 5


class NumericError(HyperphaseError, ArithmeticError):
    category = "numeric"
    exit_code = 6


class UnsupportedError(HyperphaseError):
    category = "unsupported"
    exit_code = 7

"""Exception hierarchy.

Every error carries a short ``category`` string; the CLI maps categories to
exit codes.
"""


class OccDmdError(Exception):
    category = "error"
    exit_code = 1


class InputError(OccDmdError, ValueError):
    """Invalid argument: wrong dimension, bad grid, out-of-range parameter."""

    category = "input"
    exit_code = 2


class ParseError(OccDmdError, ValueError):
    category = "parse"
    exit_code = 3

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class SchemaError(OccDmdError, ValueError):
    """A file parsed but its contents are mutually inconsistent."""

    category = "schema"
    exit_code = 4


class RankError(OccDmdError, ArithmeticError):
    category = "rank"
    exit_code = 5


class DivergenceError(OccDmdError, ArithmeticError):
    """Integration produced a non-finite state.

    ``last_state`` and ``last_time`` hold the final finite sample.
    """

    category = "divergence"
    exit_code = 6

    def __init__(self, message, last_state=None, last_time=None):
        super().__init__(message)
        self.last_state = last_state
        self.last_time = last_time

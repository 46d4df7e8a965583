"""Exception hierarchy shared by the parser, solver and analysis layers."""


class QfpmemError(Exception):
    """Base class for all errors raised by this package."""


# -- netlist -----------------------------------------------------------------

class NetlistError(QfpmemError, ValueError):
    """A netlist could not be turned into a circuit.

    ``line`` is the 1-based source line when the error is positional.
    """

    def __init__(self, reason: str, line: int | None = None):
        self.reason = reason
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class NetlistSyntaxError(NetlistError):
    """Malformed card (wrong arity, bad number, bad keyword)."""


class UnknownElement(NetlistError):
    """Card starts with a letter that names no supported element."""


class DanglingNode(NetlistError):
    """A non-ground node touches only one element terminal."""


class DuplicateName(NetlistError):
    """Two elements share a name (names compare case-insensitively)."""


class InvalidParam(QfpmemError, ValueError):
    """An element or device parameter is out of its allowed range."""


# -- devices -----------------------------------------------------------------

class DomainError(QfpmemError, ValueError):
    """Argument outside the domain of a device function."""


# -- engine ------------------------------------------------------------------

class SolverError(QfpmemError):
    """Base class for failures inside the MNA engine."""


class SingularTopology(SolverError):
    """Some node has no DC-conducting path to ground."""


class SingularMatrix(SolverError):
    """LU factorization met a pivot below the singularity threshold."""


class StepUnderflow(SolverError):
    """Timestep control needed a step smaller than ``dt_min``."""


class NonFinite(SolverError):
    """The solution vector contains NaN or Inf."""


# -- analysis ----------------------------------------------------------------

class AnalysisError(QfpmemError, ValueError):
    """Base class for post-processing errors."""


class SpanMismatch(AnalysisError):
    """Two waveforms do not cover the same time interval."""


class MissingSignal(AnalysisError, KeyError):
    """Requested signal is not present in a waveform."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SpanTooShort(AnalysisError):
    """Waveform is shorter than the requested averaging window."""


class EmptyState(AnalysisError):
    """A measurement set has no records for the requested state."""


class InvalidStats(AnalysisError):
    """Statistics would produce a corner with r_on >= r_off."""


class MalformedRow(AnalysisError):
    """A measurement CSV row could not be parsed.

    ``row`` is the 1-based data row number (header excluded).
    """

    def __init__(self, reason: str, row: int):
        self.reason = reason
        self.row = row
        super().__init__(f"row {row}: {reason}")

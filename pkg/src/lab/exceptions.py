from abc import ABC
from typing import Optional


class LabException(Exception, ABC):
    """Base exception for all lab errors"""

    def __init__(self, message: str, component: Optional[str] = None):
        self.message = message
        self.component = component
        super().__init__(self.message)

    def get_log_message(self) -> str:
        prefix = f"[{self.component}] " if self.component else ""
        return f"{prefix}{self.message}"


class InvalidParameterError(LabException):
    """Raised when a model parameter or operation argument is out of range"""

    def __init__(self, name: str, value: object, requirement: str, component: Optional[str] = None):
        self.name = name
        self.value = value
        self.requirement = requirement
        super().__init__(f"Invalid {name}={value!r}: {requirement}", component)

    def get_log_message(self) -> str:
        return f"Invalid parameter - Name: {self.name}, Value: {self.value!r}, Requirement: {self.requirement}"


class ConfigValidationError(LabException):
    """Raised when an experiment configuration cannot be used"""

    def __init__(self, message: str, section: Optional[str] = None, key: Optional[str] = None):
        self.section = section
        self.key = key
        super().__init__(message, "config")

    def get_log_message(self) -> str:
        where = ".".join(x for x in (self.section, self.key) if x)
        return f"Config invalid - {where or 'file'}: {self.message}"


class InitialDataError(ConfigValidationError):
    """Raised when the initial history does not match the initial density slope"""

    def __init__(self, history_value: float, boundary_rate: float, rtol: float):
        self.history_value = history_value
        self.boundary_rate = boundary_rate
        self.rtol = rtol
        message = (
            f"N0(0)={history_value:.6g} does not match -a*d(rho0)/dv(V_F)={boundary_rate:.6g} "
            f"within relative tolerance {rtol:g}"
        )
        super().__init__(message, "history")


class GridMismatchError(LabException):
    """Raised when a profile was built on a different grid"""

    def __init__(self, expected: object, received: object, component: Optional[str] = None):
        self.expected = expected
        self.received = received
        super().__init__(f"Grid mismatch: expected {expected}, received {received}", component)


class NumericError(LabException):
    """Raised when a computation produces non-finite or inadmissible values"""

    def __init__(
        self,
        message: str,
        component: Optional[str] = None,
        time: Optional[float] = None,
        snapshot: Optional[object] = None
    ):
        self.time = time
        self.snapshot = snapshot
        super().__init__(message, component)

    def get_log_message(self) -> str:
        when = f" at t={self.time:.6g}" if self.time is not None else ""
        return f"Numeric failure{when} - {self.message}"


class CFLViolationError(NumericError):
    """Raised when the explicit drift step is unstable for the requested dt"""

    def __init__(self, dt: float, dt_max: float, time: Optional[float] = None):
        self.dt = dt
        self.dt_max = dt_max
        super().__init__(f"dt={dt:.3g} exceeds the drift stability limit {dt_max:.3g}", "fp-solver", time)


class HistoryGapError(LabException):
    """Raised when the firing-rate history does not cover a requested time"""

    def __init__(self, requested: float, start: float, end: float):
        self.requested = requested
        self.start = start
        self.end = end
        super().__init__(f"History covers [{start:.6g}, {end:.6g}], requested t={requested:.6g}", "history")


class SolverError(LabException):
    """Raised when an iterative or bracketing solver gives up"""


class ConstructionError(LabException):
    """Raised when a super-solution cannot be constructed"""


class DecouplingWindowError(LabException):
    """Raised when a continuation window exceeds the delay decoupling bound"""

    def __init__(self, window: float, bound: float):
        self.window = window
        self.bound = bound
        super().__init__(f"Window {window:.6g} exceeds the decoupling bound {bound:.6g}", "stefan")


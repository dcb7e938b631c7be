"""
Exception hierarchy for the sepflux package.

Every error raised by the simulator, the reference computations and the
harness derives from SepfluxError. The CLI maps the two top-level families
onto exit codes: ConfigError -> 2, SimulationError -> 3.
"""

from typing import Any, Dict, List, Optional


class SepfluxError(Exception):
    """Root of all sepflux errors."""

    def to_dict(self) -> dict:
        return {"error": self.__class__.__name__, "message": str(self)}


class ConfigError(SepfluxError):
    """Invalid user input: lattice, profile, regime or experiment config."""


class SimulationError(SepfluxError):
    """Failure while running the dynamics."""


class StatisticsError(SepfluxError):
    """Sample unsuitable for the requested estimator."""


class UsageError(SepfluxError):
    """A function was called with arguments of the wrong shape or kind."""


class DegenerateLattice(ConfigError):
    pass


class LatticeOverflow(ConfigError):
    pass


class ParameterExceedsOne(ConfigError):
    """A site's Bernoulli parameter is above one."""

    def __init__(self, site: int, value: float):
        super().__init__(f"Bernoulli parameter {value:.6g} > 1 at site {site}")
        self.site = site
        self.value = value

    def to_dict(self) -> dict:
        return {**super().to_dict(), "site": self.site, "value": self.value}


class InfeasibleRegime(ConfigError):
    pass


class RangeError(ConfigError):
    pass


class DuplicatePoints(ConfigError):
    pass


class StateSpaceTooLarge(ConfigError):
    def __init__(self, states: int, limit: int, reason: Optional[str] = None):
        super().__init__(
            reason
            or f"exact state space has {states} states (limit {limit}); "
            "use the Monte-Carlo estimate or a smaller lattice"
        )
        self.states = states
        self.limit = limit

    def to_dict(self) -> dict:
        return {**super().to_dict(), "states": self.states, "limit": self.limit}


class ConfigValidationError(ConfigError):
    """Aggregated list of every violation found in a raw config."""

    def __init__(self, problems: List[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)

    def to_dict(self) -> dict:
        return {**super().to_dict(), "problems": self.problems}


class EmptySystem(SimulationError):
    pass


class CounterOverflow(SimulationError):
    pass


class PathwiseIdentityError(SimulationError):
    pass


class BudgetError(SimulationError):
    """Event budget exhausted; carries what was reached before aborting."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

    def to_dict(self) -> dict:
        return {**super().to_dict(), "diagnostics": self.diagnostics}


class InsufficientSamples(StatisticsError):
    pass


class DegenerateSample(StatisticsError):
    pass

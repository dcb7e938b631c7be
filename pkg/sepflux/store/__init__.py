from .runs import ExperimentRun, RunStatus
from .summaries import ObservableSummary
from .checks import CheckResult

__all__ = [
    "ExperimentRun",
    "RunStatus",
    "ObservableSummary",
    "CheckResult",
]

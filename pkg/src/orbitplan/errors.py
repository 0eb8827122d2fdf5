"""Exception hierarchy.

Every error carries a machine-readable ``code`` and a ``kind`` that the CLI
and HTTP layers map to exit codes and status codes:

* ``input``       -- bad request data (CLI exit 1, HTTP 400)
* ``not_found``   -- unknown satellite or preset (CLI exit 1, HTTP 404)
* ``infeasible``  -- the planner could not produce a plan (CLI exit 2, HTTP 422)
* ``provider``    -- TLE provider failure (CLI exit 2, HTTP 502)
"""

from __future__ import annotations


class OrbitPlanError(Exception):
    code = "error"
    kind = "input"


# -- TLE parsing -------------------------------------------------------------


class TleError(OrbitPlanError, ValueError):
    code = "tle_invalid"


class TleLengthError(TleError):
    code = "tle_length"


class TleChecksumError(TleError):
    code = "tle_checksum"


class TleFieldError(TleError):
    code = "tle_field"


class TleCatalogMismatchError(TleError):
    code = "tle_catalog_mismatch"


# -- physics ------------------------------------------------------------------


class GeodeticConvergenceError(OrbitPlanError, ArithmeticError):
    code = "geodetic_nonconvergence"
    kind = "infeasible"


class PropagationError(OrbitPlanError):
    code = "propagation_failed"
    kind = "infeasible"


class DecayedOrbitError(PropagationError):
    code = "orbit_decayed"


class KeplerConvergenceError(PropagationError):
    code = "kepler_nonconvergence"


class PropagationRangeError(PropagationError):
    """Requested time is too far from the TLE epoch."""

    code = "tle_out_of_range"
    kind = "input"


# -- timeline -----------------------------------------------------------------


class TimelineIntegrityError(OrbitPlanError):
    code = "timeline_integrity"
    kind = "infeasible"


# -- workload -----------------------------------------------------------------


class WorkloadError(OrbitPlanError, ValueError):
    code = "workload_invalid"


class DuplicateStepError(WorkloadError):
    code = "workload_duplicate_step"


class DanglingEdgeError(WorkloadError):
    code = "workload_dangling_edge"


class CycleError(WorkloadError):
    code = "workload_cycle"

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("workload graph contains a cycle: " + " -> ".join(self.cycle))


class UnknownPresetError(WorkloadError):
    code = "unknown_preset"
    kind = "not_found"


# -- transfer / scheduling ----------------------------------------------------


class NoCapacityError(OrbitPlanError):
    code = "no_pass_capacity"
    kind = "infeasible"


class SchedulingError(OrbitPlanError):
    code = "scheduling_failed"
    kind = "infeasible"

    def __init__(self, message: str, step_id: str | None = None):
        self.step_id = step_id
        super().__init__(message)


class DeadlineExceededError(SchedulingError):
    code = "deadline_exceeded"


class NoFeasibleWindowError(SchedulingError):
    code = "no_feasible_window"


# -- gateway ------------------------------------------------------------------


class TleProviderError(OrbitPlanError):
    code = "tle_provider_failure"
    kind = "provider"


class SatelliteNotFoundError(OrbitPlanError):
    code = "satellite_not_found"
    kind = "not_found"


class RequestError(OrbitPlanError, ValueError):
    code = "bad_request"

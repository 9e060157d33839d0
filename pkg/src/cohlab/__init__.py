"""Coherence quantifiers of finite-dimensional quantum states.

Trace-distance, l1, relative-entropy, l_p and Schatten-p coherence, the
incoherent-channel monotonicity harness and reproduction experiments.
"""

from .channels import (
    IncoherentChannel,
    MonotonicityReport,
    apply,
    deterministic_apply,
    flag_check,
    flag_check_channel,
    lp_counterexample,
    monotonicity_report,
    random_incoherent_channel,
    tensor_monotonicity_violation,
    validate_channel,
)
from .exceptions import CoherenceError, NoConvergenceError
from .measures import (
    BoundReport,
    MeasureId,
    bounds_report,
    c_l1,
    c_lp,
    c_p,
    c_r,
    dephasing_twirl,
    holevo_chi,
)
from .states import (
    maximally_coherent,
    pure_to_density,
    qutrit_from_xy,
    random_density,
    random_pure,
    validate_density,
    x_state,
)
from .tracedist import Backend, SolverOptions, TraceDistResult, c_tr

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BoundReport",
    "CoherenceError",
    "IncoherentChannel",
    "MeasureId",
    "MonotonicityReport",
    "NoConvergenceError",
    "SolverOptions",
    "TraceDistResult",
    "apply",
    "bounds_report",
    "c_l1",
    "c_lp",
    "c_p",
    "c_r",
    "c_tr",
    "dephasing_twirl",
    "deterministic_apply",
    "flag_check",
    "flag_check_channel",
    "holevo_chi",
    "lp_counterexample",
    "maximally_coherent",
    "monotonicity_report",
    "pure_to_density",
    "qutrit_from_xy",
    "random_density",
    "random_incoherent_channel",
    "random_pure",
    "tensor_monotonicity_violation",
    "validate_channel",
    "validate_density",
    "x_state",
]

"""Renyi-type continued fractions, their transfer operator, and
Wirsing-type bounds on the Gauss-Kuzmin-Levy convergence rate."""

__version__ = "0.1.0"

from .cf_core import (  # noqa: E402
    INFINITE_DIGIT,
    DigitSequence,
    RenyiParams,
    apply_map,
    digit,
    evaluate,
    expand,
    invariant_cdf,
    invariant_density,
)
from .gk_lab import (  # noqa: E402
    ExperimentReport,
    InitialMeasure,
    TheoremBound,
    cdf_after_n,
    decay_rate,
    error_curve,
    monte_carlo_cdf,
    run_experiment,
    theorem_bound_check,
)
from .grid import GridFunction  # noqa: E402
from .transfer_op import (  # noqa: E402
    derivative_identity_check,
    pf_apply_grid,
    pf_apply_point,
    pf_lebesgue_apply_point,
    transported_measure,
    v_apply_grid,
    v_apply_point,
)
from .wirsing import (  # noqa: E402
    WirsingCertificate,
    certify,
    quartic_H,
    ratio,
    solve_e,
    solve_t,
)

__all__ = [
    "GridFunction",
    "INFINITE_DIGIT",
    "DigitSequence",
    "RenyiParams",
    "apply_map",
    "digit",
    "evaluate",
    "expand",
    "invariant_cdf",
    "invariant_density",
    "ExperimentReport",
    "InitialMeasure",
    "TheoremBound",
    "cdf_after_n",
    "decay_rate",
    "error_curve",
    "monte_carlo_cdf",
    "run_experiment",
    "theorem_bound_check",
    "derivative_identity_check",
    "pf_apply_grid",
    "pf_apply_point",
    "pf_lebesgue_apply_point",
    "transported_measure",
    "v_apply_grid",
    "v_apply_point",
    "WirsingCertificate",
    "certify",
    "quartic_H",
    "ratio",
    "solve_e",
    "solve_t",
]

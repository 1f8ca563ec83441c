"""Form factors of descendant operators in the breather sector.

Two independent evaluators of the J-functions (subset sums and a
free-field Fock oracle) plus the checks built on them: residues,
recurrences, reflection maps, identities at a = -1/2 and the kink
polynomial layer.
"""

from .algebra_core import (
    DescendantElement,
    ModelParams,
    Partition,
    annulus_points,
    RhoLaurent,
    enumerate_partitions,
    eval_p,
    h2_element,
    level_rank,
    parse_element,
    power_sum,
)
from .errors import (
    ConvergenceError,
    DegenerateParameterError,
    DescffError,
    DomainError,
    FitError,
    PoleError,
)
from .jfunctions import JResult, j_direct, j_rho, j_value, recur_exponential, recur_level2

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DegenerateParameterError",
    "DescendantElement",
    "DescffError",
    "DomainError",
    "FitError",
    "JResult",
    "ModelParams",
    "Partition",
    "annulus_points",
    "PoleError",
    "RhoLaurent",
    "enumerate_partitions",
    "eval_p",
    "h2_element",
    "j_direct",
    "j_rho",
    "j_value",
    "level_rank",
    "parse_element",
    "power_sum",
    "recur_exponential",
    "recur_level2",
]

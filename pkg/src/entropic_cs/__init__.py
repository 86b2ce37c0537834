"""Compressive-sensing reconstruction with Bregman row-action D-projections.

The default functional is the shifted entropy
g(v) = (|v| + 1/e) log(|v| + 1/e) + 1/e, a smooth convex surrogate for |v|.
"""
__version__ = "0.1.0"

from .functionals import (  # noqa: E402
    DomainError,
    FunctionalKind,
    bregman_distance,
    gradient,
    gradient_inverse,
    potential,
)
from .projection import (  # noqa: E402
    Hyperplane,
    ProjectionResult,
    project,
    project_euclidean,
    project_positive_entropy,
    project_shifted_entropy,
    solve_multiplier,
)
from .solver import (  # noqa: E402
    OnlineSolverState,
    SolverConfig,
    SolverTrace,
    Termination,
    online_append,
    online_init,
    online_settle,
    solve,
    solve_system,
)

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across modules.

    ``margin`` and ``margin_unary`` set how many top Fock degrees are excluded
    from the interior block on which truncated-model identities are asserted.
    """

    eig_tol: float = 1e-10
    commute_tol: float = 1e-10
    bisect_tol: float = 1e-8
    defect_cutoff: float = 1e-12
    rank_tol: float = 1e-9
    resolvent_cond: float = 1e12
    fd_step: float = 1e-5
    factor_tol: float = 1e-6
    validate_tol: float = 1e-8
    margin: int = 3
    margin_unary: int = 10
    slack_poly: float = 0.02
    slack: float = 0.05
    max_dim: int = 10**6
    sparse_threshold: int = 2000


DEFAULT = Tolerances()

METRIC_R_GRID = (0.5, 0.9, 0.99)

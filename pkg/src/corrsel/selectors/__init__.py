"""The eight correspondence selectors.

Every selector has the signature ``select_x(cs, params=None, seed=0)`` and
returns a :class:`~corrsel.model.SelectionResult`; ``seed`` only matters for
the sampling-based ones.
"""

from ..params import PARAMS_BY_METHOD
from .gms import GmsStatModel, gms_distribution, select_gms
from .gtm import gtm_payoff, gtm_payoff_matrix, replicator_dynamics, select_gtm
from .lpm import lpm_cost, lpm_costs, lpm_total_cost, select_lpm
from .nnsr import select_nnsr
from .ransac import select_ransac
from .spectral import select_st, st_affinity
from .usac import select_usac
from .vfc import select_vfc

SELECTORS = {
    "nnsr": select_nnsr,
    "ransac": select_ransac,
    "st": select_st,
    "gtm": select_gtm,
    "usac": select_usac,
    "vfc": select_vfc,
    "gms": select_gms,
    "lpm": select_lpm,
}

METHODS = tuple(SELECTORS)


def run_selector(method: str, cs, params=None, seed: int = 0):
    """Dispatch to a selector by name; ``params`` may be a dataclass, a dict or None."""
    try:
        fn = SELECTORS[method]
    except KeyError:
        raise KeyError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    if isinstance(params, dict):
        params = PARAMS_BY_METHOD[method](**params)
    return fn(cs, params, seed)


__all__ = [
    "SELECTORS", "METHODS", "run_selector",
    "select_nnsr", "select_ransac", "select_st", "select_gtm", "select_usac",
    "select_vfc", "select_gms", "select_lpm",
    "st_affinity", "gtm_payoff", "gtm_payoff_matrix", "replicator_dynamics",
    "GmsStatModel", "gms_distribution", "lpm_cost", "lpm_costs", "lpm_total_cost",
]

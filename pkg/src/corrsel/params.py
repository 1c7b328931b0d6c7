"""Per-selector parameter sets.

Defaults are the evaluated settings of each method.  A threshold of ``None``
means "adaptive": it is chosen per input by Otsu's method.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .exceptions import InvalidInput

MODEL_KINDS = ("homography", "fundamental")


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidInput(msg)


@dataclass(frozen=True)
class NnsrParams:
    t_nnsr: float | None = None

    def __post_init__(self):
        _check(self.t_nnsr is None or 0.0 <= self.t_nnsr <= 1.0, "t_nnsr must lie in [0, 1]")


@dataclass(frozen=True)
class RansacParams:
    t_ransac: float = 10.0
    n_ransac: int = 2000
    confidence: float = 0.99
    model_kind: str = "homography"

    def __post_init__(self):
        _check(self.t_ransac > 0, "t_ransac must be positive")
        _check(self.n_ransac >= 1, "n_ransac must be at least 1")
        _check(0.0 < self.confidence < 1.0, "confidence must lie in (0, 1)")
        _check(self.model_kind in MODEL_KINDS, f"model_kind must be one of {MODEL_KINDS}")


@dataclass(frozen=True)
class StParams:
    t_st: float = 0.3

    def __post_init__(self):
        _check(0.0 < self.t_st <= 1.0, "t_st must lie in (0, 1]")


@dataclass(frozen=True)
class GtmParams:
    lambda_gtm: float = 1e-4
    n_gtm: int = 100
    t_gtm: float | None = None

    def __post_init__(self):
        _check(self.lambda_gtm > 0, "lambda_gtm must be positive")
        _check(self.n_gtm >= 0, "n_gtm must be nonnegative")


@dataclass(frozen=True)
class UsacParams:
    n_usac: int = 850000
    t_H: float = 10.0
    t_F: float = 1.5
    model_kind: str = "homography"
    sprt_eps0: float = 0.2
    sprt_delta0: float = 0.05
    lo_inner_rounds: int = 10
    confidence: float = 0.99

    def __post_init__(self):
        _check(self.n_usac >= 1, "n_usac must be at least 1")
        _check(self.t_H > 0 and self.t_F > 0, "thresholds must be positive")
        _check(self.model_kind in MODEL_KINDS, f"model_kind must be one of {MODEL_KINDS}")
        for name in ("sprt_eps0", "sprt_delta0", "confidence"):
            _check(0.0 < getattr(self, name) < 1.0, f"{name} must lie in (0, 1)")
        _check(self.sprt_delta0 < self.sprt_eps0, "sprt_delta0 must be below sprt_eps0")
        _check(self.lo_inner_rounds >= 0, "lo_inner_rounds must be nonnegative")


@dataclass(frozen=True)
class VfcParams:
    """Vector-field consensus settings.

    ``max_dense`` bounds the set size solved with the exact N x N kernel
    system; larger sets use ``n_control`` kernel basis points instead.
    """

    beta: float = 0.1
    lambda_vfc: float = 3.0
    t_vfc: float = 0.75
    gamma0: float = 0.9
    max_em_iters: int = 500
    tol: float = 1e-5
    max_dense: int = 1000
    n_control: int = 100

    def __post_init__(self):
        _check(self.beta > 0, "beta must be positive")
        _check(self.lambda_vfc > 0, "lambda_vfc must be positive")
        _check(0.0 < self.t_vfc < 1.0, "t_vfc must lie in (0, 1)")
        _check(0.0 < self.gamma0 < 1.0, "gamma0 must lie in (0, 1)")
        _check(self.max_em_iters >= 1, "max_em_iters must be at least 1")
        _check(self.n_control >= 1, "n_control must be at least 1")


@dataclass(frozen=True)
class GmsParams:
    alpha: float = 4.0
    grid: int = 20

    def __post_init__(self):
        _check(self.alpha > 0, "alpha must be positive")
        _check(self.grid >= 2, "grid must have at least 2 cells per side")


@dataclass(frozen=True)
class LpmParams:
    lambda_lpm: float = 6.0
    k: int = 4
    normalize_coords: bool = True

    def __post_init__(self):
        _check(self.k >= 1, "k must be at least 1")


PARAMS_BY_METHOD = {
    "nnsr": NnsrParams,
    "ransac": RansacParams,
    "st": StParams,
    "gtm": GtmParams,
    "usac": UsacParams,
    "vfc": VfcParams,
    "gms": GmsParams,
    "lpm": LpmParams,
}


def params_to_dict(params) -> dict:
    return asdict(params)


def parse_param_value(cls, key: str, text: str):
    """Convert a ``key=value`` override string to the field's type."""
    known = {f.name: f for f in fields(cls)}
    if key not in known:
        raise InvalidInput(f"unknown parameter {key!r} for {cls.__name__}; "
                           f"known: {', '.join(known)}")
    default = getattr(cls(), key)
    t = known[key].type
    if text.lower() in ("none", "adaptive") and "None" in str(t):
        return None
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise InvalidInput(f"{key} expects a boolean, got {text!r}")
    try:
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float) or "float" in str(t):
            return float(text)
    except ValueError as exc:
        raise InvalidInput(f"bad value {text!r} for {key}") from exc
    return text

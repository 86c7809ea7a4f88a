"""The inequality catalog: case tags and their exponent relations."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from ..errors import ConfigurationError, ParameterError
from ..norms import ExperimentParams, YoungFunction


class CaseTag(str, enum.Enum):
    MZ_GRADIENT = "MZ_GRADIENT"
    LORENTZ_SOBOLEV = "LORENTZ_SOBOLEV"
    WEAK_SOBOLEV = "WEAK_SOBOLEV"
    ISOPERIMETRIC_Q = "ISOPERIMETRIC_Q"
    FS_WEAK_MAX = "FS_WEAK_MAX"
    SAWYER_WEAK_FRACMAX = "SAWYER_WEAK_FRACMAX"
    STRONG_MALM = "STRONG_MALM"
    RIESZ_RIESZ = "RIESZ_RIESZ"
    HARDY_ATOM = "HARDY_ATOM"
    BUMP_PP = "BUMP_PP"
    BUMP_PQ = "BUMP_PQ"
    AL_GT1 = "AL_GT1"
    POWER_WEIGHT = "POWER_WEIGHT"
    GNS_CLASSICAL = "GNS_CLASSICAL"
    ALVINO = "ALVINO"
    GNS_MEASURE = "GNS_MEASURE"
    FRAC_MZ = "FRAC_MZ"
    P_STAR_LOCAL_AVG = "P_STAR_LOCAL_AVG"

    @classmethod
    def parse(cls, name) -> "CaseTag":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).upper())
        except ValueError:
            raise ConfigurationError(f"unknown case tag {name!r}") from None


# What the right-hand side of each case needs besides the test function.
#   measure  -- any measure (atoms or a density on the grid)
#   density  -- a nonnegative weight sampled on the grid
#   positive -- a weight sampled on the grid and positive on it
#   region   -- a polygon and a measure
#   none     -- the case is unweighted or builds its own weight
INPUT_KIND = {
    CaseTag.MZ_GRADIENT: "measure",
    CaseTag.LORENTZ_SOBOLEV: "measure",
    CaseTag.WEAK_SOBOLEV: "measure",
    CaseTag.ISOPERIMETRIC_Q: "region",
    CaseTag.FS_WEAK_MAX: "density",
    CaseTag.SAWYER_WEAK_FRACMAX: "measure",
    CaseTag.STRONG_MALM: "measure",
    CaseTag.RIESZ_RIESZ: "measure",
    CaseTag.HARDY_ATOM: "density",
    CaseTag.BUMP_PP: "density",
    CaseTag.BUMP_PQ: "density",
    CaseTag.AL_GT1: "density",
    CaseTag.POWER_WEIGHT: "none",
    CaseTag.GNS_CLASSICAL: "none",
    CaseTag.ALVINO: "none",
    CaseTag.GNS_MEASURE: "measure",
    CaseTag.FRAC_MZ: "measure",
    CaseTag.P_STAR_LOCAL_AVG: "positive",
}

# Cases whose left-hand side is a weak-type quasi-norm.
WEAK_CASES = {CaseTag.WEAK_SOBOLEV, CaseTag.FS_WEAK_MAX, CaseTag.SAWYER_WEAK_FRACMAX}

_TOL = 1e-12


def derived_alpha(tag: CaseTag, p: ExperimentParams):
    """The value of ``alpha`` forced by the case's exponent relation, or ``None``."""
    n = p.n
    if tag is CaseTag.MZ_GRADIENT:
        return 1.0
    if tag in (CaseTag.LORENTZ_SOBOLEV, CaseTag.WEAK_SOBOLEV, CaseTag.ISOPERIMETRIC_Q):
        return n - p.q * (n - 1)
    if tag in (CaseTag.FS_WEAK_MAX, CaseTag.GNS_MEASURE, CaseTag.GNS_CLASSICAL,
               CaseTag.ALVINO, CaseTag.POWER_WEIGHT, CaseTag.P_STAR_LOCAL_AVG):
        return 0.0
    if tag is CaseTag.RIESZ_RIESZ:
        return 1.0
    if tag is CaseTag.FRAC_MZ:
        return p.s
    if tag is CaseTag.BUMP_PP:
        return p.p
    if tag is CaseTag.BUMP_PQ:
        return n - (p.q / p.p) * (n - p.p)
    return None


def bump_function(tag: CaseTag, p: ExperimentParams) -> YoungFunction:
    """Young function of the Orlicz maximal operator on the right-hand side."""
    if tag in (CaseTag.BUMP_PP, CaseTag.BUMP_PQ):
        qp = p.q / p.p_prime
        return YoungFunction(1.0, qp + p.epsilon)
    if tag is CaseTag.AL_GT1:
        return YoungFunction(1.0, 1.0 / (p.n - p.alpha) + p.epsilon)
    raise ConfigurationError(f"{tag.value} has no bump")


def validate_params(tag: CaseTag, p: ExperimentParams) -> ExperimentParams:
    """Check the exponent relations of ``tag``; messages name the offending field."""
    n = p.n
    if n not in (1, 2, 3):
        raise ConfigurationError(f"dimension must be 1, 2 or 3, got {n}")
    if not p.p >= 1:
        raise ParameterError(f"params.p = {p.p} must be >= 1")
    if not p.q >= 1:
        raise ParameterError(f"params.q = {p.q} must be >= 1")
    if tag in (CaseTag.LORENTZ_SOBOLEV, CaseTag.WEAK_SOBOLEV, CaseTag.ISOPERIMETRIC_Q):
        if n < 2 or not p.q <= n / (n - 1) + _TOL:
            raise ParameterError(f"params.q = {p.q} must lie in [1, n/(n-1)]")
    # q is checked first for cases whose alpha is derived from it
    if not 0 <= p.alpha < n:
        raise ParameterError(f"params.alpha = {p.alpha} must lie in [0, n) with n = {n}")
    if p.epsilon < 0:
        raise ParameterError(f"params.epsilon = {p.epsilon} must be >= 0")
    forced = derived_alpha(tag, p)
    if forced is not None and abs(p.alpha - forced) > _TOL:
        raise ParameterError(f"params.alpha = {p.alpha} but {tag.value} requires alpha = {forced}")

    if tag is CaseTag.RIESZ_RIESZ and n < 2:
        raise ConfigurationError("RIESZ_RIESZ needs dimension >= 2")
    if tag in (CaseTag.MZ_GRADIENT, CaseTag.GNS_MEASURE, CaseTag.ALVINO) and n < 2:
        raise ConfigurationError(f"{tag.value} needs dimension >= 2")
    if tag is CaseTag.GNS_MEASURE and abs(p.q - n / (n - 1)) > _TOL:
        raise ParameterError(f"params.q = {p.q} must equal n/(n-1) for GNS_MEASURE")
    if tag in (CaseTag.SAWYER_WEAK_FRACMAX, CaseTag.STRONG_MALM, CaseTag.HARDY_ATOM):
        if not 0 < p.alpha < n:
            raise ParameterError(f"params.alpha = {p.alpha} must lie in (0, n)")
    if tag is CaseTag.AL_GT1 and not 1 < p.alpha < n:
        raise ParameterError(f"params.alpha = {p.alpha} must lie in (1, n)")
    if tag in (CaseTag.BUMP_PP, CaseTag.BUMP_PQ):
        if not p.p > 1:
            raise ParameterError(f"params.p = {p.p} must be > 1 for {tag.value}")
        if not p.p < n:
            raise ParameterError(f"params.p = {p.p} must be < n")
    if tag is CaseTag.BUMP_PP and abs(p.q - p.p) > _TOL:
        raise ParameterError(f"params.q = {p.q} must equal params.p for BUMP_PP")
    if tag is CaseTag.BUMP_PQ and not p.p <= p.q <= p.p_star + _TOL:
        raise ParameterError(f"params.q = {p.q} must lie in [p, p*] for BUMP_PQ")
    if tag in (CaseTag.GNS_CLASSICAL, CaseTag.POWER_WEIGHT, CaseTag.P_STAR_LOCAL_AVG):
        if not p.p < n:
            raise ParameterError(f"params.p = {p.p} must be < n")
    if tag is CaseTag.ALVINO and p.p != 1:
        raise ParameterError(f"params.p = {p.p} must be 1 for ALVINO")
    if tag is CaseTag.POWER_WEIGHT:
        upper = n * p.p_star / p.p_prime if math.isfinite(p.p_prime) else 0.0
        if not -n < p.lam < upper:
            raise ParameterError(f"params.lambda = {p.lam} must lie in ({-n}, {upper})")
    if tag is CaseTag.FRAC_MZ and not 0 < p.s < 1:
        raise ParameterError(f"params.s = {p.s} must lie in (0, 1)")
    return p


def default_params(tag: CaseTag, n: int = 2, **overrides) -> ExperimentParams:
    """Representative exponents for ``tag`` with ``alpha`` filled in from its relation."""
    base = {
        CaseTag.MZ_GRADIENT: dict(q=1.0),
        CaseTag.LORENTZ_SOBOLEV: dict(q=1.5),
        CaseTag.WEAK_SOBOLEV: dict(q=1.5),
        CaseTag.ISOPERIMETRIC_Q: dict(q=n / (n - 1) if n > 1 else 1.0),
        CaseTag.FS_WEAK_MAX: dict(q=1.0),
        CaseTag.SAWYER_WEAK_FRACMAX: dict(q=1.0, alpha=1.0),
        CaseTag.STRONG_MALM: dict(alpha=1.0),
        CaseTag.RIESZ_RIESZ: dict(),
        CaseTag.HARDY_ATOM: dict(alpha=1.0 if n > 1 else 0.5),
        CaseTag.BUMP_PP: dict(p=1.5, q=1.5, epsilon=0.5),
        CaseTag.BUMP_PQ: dict(p=1.5, q=2.0, epsilon=0.5),
        CaseTag.AL_GT1: dict(alpha=1.5, epsilon=0.5),
        CaseTag.POWER_WEIGHT: dict(p=1.5, lam=0.5),
        CaseTag.GNS_CLASSICAL: dict(p=1.0),
        CaseTag.ALVINO: dict(p=1.0),
        CaseTag.GNS_MEASURE: dict(q=n / (n - 1) if n > 1 else 1.0),
        CaseTag.FRAC_MZ: dict(s=0.5),
        CaseTag.P_STAR_LOCAL_AVG: dict(p=1.5),
    }[tag]
    kw = {**base, **overrides}
    params = ExperimentParams(n=n, **kw)
    if "alpha" not in overrides:
        forced = derived_alpha(tag, params)
        if forced is not None:
            params = replace(params, alpha=forced)
    return params


@dataclass(frozen=True)
class InequalityCase:
    """A catalog entry: tag, exponents and named inputs.

    ``measure``, ``weight``, ``functions`` and ``regions`` name corpus members
    (``None`` means every compatible member). The exponent relations are
    checked at construction.
    """

    tag: CaseTag
    params: ExperimentParams = field(default_factory=ExperimentParams)
    measure: str | None = None
    functions: tuple | None = None
    regions: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", CaseTag.parse(self.tag))
        validate_params(self.tag, self.params)

    @classmethod
    def standard(cls, tag, n: int = 2, **overrides) -> "InequalityCase":
        tag = CaseTag.parse(tag)
        return cls(tag, default_params(tag, n, **overrides))

    @property
    def input_kind(self) -> str:
        return INPUT_KIND[self.tag]

    @property
    def weak(self) -> bool:
        return self.tag in WEAK_CASES

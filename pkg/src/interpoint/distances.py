"""Generalized distance functions.

A generalized distance only has to satisfy the identity of indiscernibles;
symmetry, the triangle inequality, homogeneity and translation invariance are
all optional.  Every family here is evaluated vectorised over leading axes:
``evaluate(spec, x, y)`` broadcasts ``x`` and ``y`` of shape ``(..., dim)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DimensionMismatch, DomainViolation, InvalidParameter, OutOfScale

EUCLIDEAN = "euclidean"
POSITIVE_ORTHANT = "positive_orthant"
UNIT_SPHERE = "unit_sphere"

FAMILIES = (
    "lp",
    "lp_pow_p",
    "canberra",
    "bray_curtis",
    "entropic",
    "transform",
    "sphere",
    "oscillatory",
)

SPHERE_TOL = 1e-9
OSCILLATORY_T0 = 0.1
OSCILLATORY_MAX_EPS = 0.5

_BISECT_ITERS = 100


def _bisect_increasing(func, target, lo, hi, iters=_BISECT_ITERS):
    """Vectorised bisection for ``func(s) = target`` with ``func`` increasing."""
    lo = np.array(lo, dtype=float) * np.ones_like(target, dtype=float)
    hi = np.array(hi, dtype=float) * np.ones_like(target, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = func(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MonotoneMap:
    """Continuous strictly increasing map ``gamma`` on ``[0, inf)`` with ``gamma(0) = 0``.

    ``kind`` is one of ``identity``, ``power`` (``d**q``), ``log1p`` or
    ``table_spline``.  Table splines interpolate the knots with a monotone
    piecewise cubic (PCHIP) and continue linearly past the last knot.
    """

    kind: str = "identity"
    q: float = 1.0
    knots: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("identity", "power", "log1p", "table_spline"):
            raise InvalidParameter(f"unknown monotone map kind {self.kind!r}")
        if self.kind == "power" and not self.q > 0:
            raise InvalidParameter("power map needs q > 0")
        if self.kind == "table_spline":
            knots = np.asarray(self.knots, dtype=float)
            if knots.ndim != 2 or knots.shape[1] != 2 or len(knots) < 2:
                raise InvalidParameter("table_spline needs at least two (d, gamma) knots")
            if knots[0, 0] != 0.0 or knots[0, 1] != 0.0:
                raise InvalidParameter("table_spline must start at the knot (0, 0)")
            if np.any(np.diff(knots[:, 0]) <= 0) or np.any(np.diff(knots[:, 1]) <= 0):
                raise InvalidParameter("table_spline knots must be strictly increasing")
            object.__setattr__(self, "knots", tuple(map(tuple, knots.tolist())))

    @cached_property
    def _spline(self):
        knots = np.asarray(self.knots)
        return PchipInterpolator(knots[:, 0], knots[:, 1], extrapolate=False)

    @cached_property
    def _tail(self):
        knots = np.asarray(self.knots)
        (x0, y0), (x1, y1) = knots[-2], knots[-1]
        return x1, y1, (y1 - y0) / (x1 - x0)

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        if self.kind == "identity":
            return d
        if self.kind == "power":
            return d**self.q
        if self.kind == "log1p":
            return np.log1p(d)
        x1, y1, slope = self._tail
        inside = np.minimum(d, x1)
        out = self._spline(inside)
        return np.where(d > x1, y1 + slope * (d - x1), out)

    def inverse(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "identity":
            return t
        if self.kind == "power":
            return t ** (1.0 / self.q)
        if self.kind == "log1p":
            return np.expm1(t)
        x1, y1, slope = self._tail
        inner = _bisect_increasing(self._spline, np.minimum(t, y1), 0.0, x1)
        return np.where(t > y1, x1 + (t - y1) / slope, inner)

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "power":
            out["q"] = self.q
        if self.kind == "table_spline":
            out["knots"] = [list(k) for k in self.knots]
        return out

    @classmethod
    def from_dict(cls, data):
        knots = tuple(tuple(k) for k in data.get("knots", ()))
        return cls(kind=data.get("kind", "identity"), q=float(data.get("q", 1.0)), knots=knots)


@dataclass(frozen=True)
class DistanceSpec:
    """A distance family together with its parameters and ambient dimension.

    For ``sphere`` the dimension is the ambient one, so S^2 has ``dim=3``.
    Build instances through the classmethod constructors.
    """

    family: str
    dim: int
    p: float = 2.0
    base: DistanceSpec | None = None
    gamma: MonotoneMap | None = None
    eps: float = 0.1
    amplitude_scale: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameter(f"unknown distance family {self.family!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidParameter("dim must be a positive integer")
        if self.family in ("lp", "lp_pow_p") and not self.p >= 1:
            raise InvalidParameter("p must be >= 1")
        if self.family == "lp_pow_p" and np.isinf(self.p):
            raise InvalidParameter("lp_pow_p needs a finite p")
        if self.family == "sphere" and self.dim < 2:
            raise InvalidParameter("sphere needs ambient dimension >= 2")
        if self.family == "transform":
            if self.base is None or self.base.family != "lp":
                raise InvalidParameter(
                    "transform needs a homogeneous translation-invariant base (an lp distance)"
                )
            if self.base.dim != self.dim:
                raise DimensionMismatch("transform base has a different dim")
            if self.gamma is None:
                object.__setattr__(self, "gamma", MonotoneMap())
        if self.family == "oscillatory":
            if not 0 <= self.eps <= OSCILLATORY_MAX_EPS:
                raise InvalidParameter(f"oscillatory eps must lie in [0, {OSCILLATORY_MAX_EPS}]")
            if not 0 < self.amplitude_scale < 1:
                raise InvalidParameter("amplitude_scale must lie in (0, 1)")

    # constructors -----------------------------------------------------
    @classmethod
    def lp(cls, p=2.0, dim=1):
        return cls("lp", dim, p=float(p))

    @classmethod
    def lp_pow_p(cls, p=2.0, dim=1):
        return cls("lp_pow_p", dim, p=float(p))

    @classmethod
    def canberra(cls, dim=1):
        return cls("canberra", dim)

    @classmethod
    def bray_curtis(cls, dim=2):
        return cls("bray_curtis", dim)

    @classmethod
    def entropic(cls, dim=1):
        return cls("entropic", dim)

    @classmethod
    def transform(cls, base, gamma):
        return cls("transform", base.dim, base=base, gamma=gamma)

    @classmethod
    def sphere(cls, ambient_dim=3):
        return cls("sphere", ambient_dim)

    @classmethod
    def oscillatory(cls, eps=0.1, amplitude_scale=0.5, dim=1):
        return cls("oscillatory", dim, eps=float(eps), amplitude_scale=float(amplitude_scale))

    # metadata ---------------------------------------------------------
    @property
    def domain(self):
        if self.family in ("entropic", "bray_curtis"):
            return POSITIVE_ORTHANT
        if self.family == "sphere":
            return UNIT_SPHERE
        return EUCLIDEAN

    @property
    def translation_invariant(self):
        return self.family in ("lp", "lp_pow_p", "transform")

    @property
    def radius_norm(self):
        """For translation-invariant families: the lp exponent of the underlying norm ball."""
        if self.family == "transform":
            return self.base.p
        return self.p

    def radius(self, t):
        """Norm-ball radius of the h-ball of radius ``t`` (translation-invariant families)."""
        if self.family == "lp":
            return np.asarray(t, dtype=float)
        if self.family == "lp_pow_p":
            return np.asarray(t, dtype=float) ** (1.0 / self.p)
        if self.family == "transform":
            return self.gamma.inverse(t)
        raise InvalidParameter(f"{self.family} balls are not norm balls")

    def to_dict(self):
        params = {}
        if self.family in ("lp", "lp_pow_p"):
            params["p"] = "inf" if np.isinf(self.p) else self.p
        elif self.family == "transform":
            params["base"] = self.base.to_dict()
            params["gamma"] = self.gamma.to_dict()
        elif self.family == "oscillatory":
            params["eps"] = self.eps
            params["amplitude_scale"] = self.amplitude_scale
        return {"family": self.family, "params": params, "dim": int(self.dim)}

    @classmethod
    def from_dict(cls, data):
        family = data["family"]
        params = dict(data.get("params", {}))
        dim = int(data["dim"])
        if family == "transform":
            base = cls.from_dict(params["base"])
            return cls("transform", dim, base=base, gamma=MonotoneMap.from_dict(params["gamma"]))
        if "p" in params:
            params["p"] = float(params["p"])
        return cls(family, dim, **params)


def as_points(spec, x, check_domain=True):
    """Convert to a float array of shape ``(..., dim)`` and validate the domain."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != spec.dim:
        raise DimensionMismatch(f"expected {spec.dim} coordinates, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise DomainViolation("non-finite coordinates")
    if check_domain:
        if spec.domain == POSITIVE_ORTHANT and np.any(x <= 0):
            raise DomainViolation(f"{spec.family} requires strictly positive coordinates")
        if spec.domain == UNIT_SPHERE:
            norms = np.linalg.norm(x, axis=-1)
            if np.any(np.abs(norms - 1.0) > SPHERE_TOL):
                raise DomainViolation("sphere points must have unit norm")
    return x


def amplitude(spec, x):
    """Center-dependent amplitude ``A(x) = s (1 + tanh x_1) / 2`` of the oscillatory family."""
    x = np.asarray(x, dtype=float)
    return spec.amplitude_scale * 0.5 * (1.0 + np.tanh(x[..., 0]))


def oscillation_radius(spec, x, t):
    """Forward map ``r_x(t) = t (1 + eps A(x) sin(log 1/t))``; ``r_x(0) = 0``."""
    t = np.asarray(t, dtype=float)
    a = spec.eps * amplitude(spec, x)
    safe = np.where(t > 0, t, 1.0)
    r = safe * (1.0 + a * np.sin(np.log(1.0 / safe)))
    return np.where(t > 0, r, 0.0)


def _raw(spec, x, y):
    family = spec.family
    if family == "lp":
        return np.linalg.norm(x - y, ord=spec.p, axis=-1)
    if family == "lp_pow_p":
        return np.sum(np.abs(x - y) ** spec.p, axis=-1)
    if family == "canberra":
        num = np.abs(x - y)
        den = np.abs(x) + np.abs(y)
        terms = np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)
        return np.sum(terms, axis=-1)
    if family == "bray_curtis":
        return np.sum(np.abs(x - y), axis=-1) / np.sum(x + y, axis=-1)
    if family == "entropic":
        # x (u - log1p u) with u = y/x - 1 is x log(x/y) - x + y without cancellation;
        # the x -> 0 limit of a term is y, and a term with y = 0 < x is infinite
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u = (y - x) / x
            terms = np.abs(x * (u - np.log1p(u)))
        terms = np.where(x == 0, np.abs(y), np.where((y == 0) & (x > 0), np.inf, terms))
        return np.sum(terms, axis=-1)
    if family == "transform":
        return spec.gamma(_raw(spec.base, x, y))
    if family == "sphere":
        return 2.0 * np.arctan2(
            np.linalg.norm(x - y, axis=-1), np.linalg.norm(x + y, axis=-1)
        )
    if family == "oscillatory":
        return _oscillatory(spec, x, y)
    raise AssertionError(family)


def _oscillatory(spec, x, y):
    d = np.sum(np.abs(x - y), axis=-1)
    x = np.broadcast_to(x, np.broadcast_shapes(x.shape, y.shape))
    limit = oscillation_radius(spec, x, OSCILLATORY_T0)
    if np.any(d >= limit):
        raise OutOfScale("|x - y|_1 exceeds r_x(t0); oscillatory distance undefined there")
    h = _bisect_increasing(lambda s: oscillation_radius(spec, x, s), d, 0.0, OSCILLATORY_T0)
    return np.where(d == 0, 0.0, h)


def evaluate(spec, x, y):
    """Evaluate ``h(x, y)``; returns a float for single points, else an array."""
    x = as_points(spec, x)
    y = as_points(spec, y)
    out = _raw(spec, x, y)
    return float(out) if np.ndim(out) == 0 else out


def oscillatory_eval(spec, x, y):
    if spec.family != "oscillatory":
        raise InvalidParameter("oscillatory_eval needs an oscillatory spec")
    return evaluate(spec, x, y)


def is_symmetric(spec):
    if spec.family == "transform":
        return is_symmetric(spec.base)
    return spec.family not in ("entropic", "oscillatory")


def in_ball(spec, center, points, t):
    """Boolean mask of ``points`` lying in the right-ball ``{y : h(center, y) < t}``.

    No domain validation; callers sample inside the valid domain.
    """
    if spec.family == "oscillatory":
        d = np.sum(np.abs(points - center), axis=-1)
        return d < oscillation_radius(spec, center, t)
    return _raw(spec, center, points) < t

"""Analytic density families used both as samplers and as integrands."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .distances import EUCLIDEAN, POSITIVE_ORTHANT, UNIT_SPHERE
from .errors import InvalidParameter
from .montecarlo import substream

FAMILIES = ("diag_gaussian", "product_exponential", "product_lognormal", "fisher_s2")


def _vec(v):
    return tuple(float(a) for a in np.atleast_1d(np.asarray(v, dtype=float)))


@dataclass(frozen=True)
class DensitySpec:
    """A density on R^k, the positive orthant, or the unit sphere S^2.

    ``loc``/``scale`` hold per-coordinate parameters: mean and variance for
    Gaussians, rates for exponentials (``loc`` unused), log-mean and log-sd
    for lognormals.  Fisher densities use ``kappa`` and the unit ``direction``
    and are taken with respect to surface measure.
    """

    family: str
    loc: tuple = ()
    scale: tuple = ()
    kappa: float = 0.0
    direction: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameter(f"unknown density family {self.family!r}")
        object.__setattr__(self, "loc", _vec(self.loc) if np.size(self.loc) else ())
        object.__setattr__(self, "scale", _vec(self.scale) if np.size(self.scale) else ())
        if self.family == "fisher_s2":
            mu = np.asarray(self.direction, dtype=float)
            if mu.shape != (3,) or abs(np.linalg.norm(mu) - 1.0) > 1e-9:
                raise InvalidParameter("Fisher direction must be a unit 3-vector")
            if self.kappa < 0:
                raise InvalidParameter("Fisher concentration must be >= 0")
            object.__setattr__(self, "direction", _vec(mu))
            return
        if not self.scale or any(s <= 0 for s in self.scale):
            raise InvalidParameter("scales must be positive")
        if self.family != "product_exponential" and len(self.loc) != len(self.scale):
            raise InvalidParameter("loc and scale lengths differ")

    @classmethod
    def gaussian(cls, mean, var):
        mean, var = np.atleast_1d(mean), np.atleast_1d(var)
        var = np.broadcast_to(var, mean.shape)
        return cls("diag_gaussian", loc=mean, scale=var)

    @classmethod
    def exponential(cls, rates):
        return cls("product_exponential", scale=np.atleast_1d(rates))

    @classmethod
    def lognormal(cls, mu, sigma):
        mu = np.atleast_1d(mu)
        return cls("product_lognormal", loc=mu, scale=np.broadcast_to(np.atleast_1d(sigma), mu.shape))

    @classmethod
    def fisher(cls, kappa=0.0, direction=(0.0, 0.0, 1.0)):
        return cls("fisher_s2", kappa=float(kappa), direction=direction)

    @property
    def dim(self):
        return 3 if self.family == "fisher_s2" else len(self.scale)

    @property
    def domain(self):
        return {
            "diag_gaussian": EUCLIDEAN,
            "product_exponential": POSITIVE_ORTHANT,
            "product_lognormal": POSITIVE_ORTHANT,
            "fisher_s2": UNIT_SPHERE,
        }[self.family]

    def shifted(self, offset):
        """Gaussian translated by ``offset`` (scalar: along the first axis)."""
        if self.family != "diag_gaussian":
            raise InvalidParameter("only Gaussians are shifted")
        offset = np.asarray(offset, dtype=float)
        if offset.ndim == 0:
            offset = np.eye(self.dim)[0] * offset
        return replace(self, loc=np.asarray(self.loc) + offset)

    # evaluation -------------------------------------------------------
    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        fam = self.family
        if fam == "diag_gaussian":
            m, v = np.asarray(self.loc), np.asarray(self.scale)
            z = np.sum((x - m) ** 2 / v, axis=-1)
            return np.exp(-0.5 * z) / np.sqrt(np.prod(2 * np.pi * v))
        if fam == "product_exponential":
            lam = np.asarray(self.scale)
            inside = np.all(x >= 0, axis=-1)
            return np.where(inside, np.prod(lam) * np.exp(-np.sum(lam * np.maximum(x, 0), axis=-1)), 0.0)
        if fam == "product_lognormal":
            mu, s = np.asarray(self.loc), np.asarray(self.scale)
            return np.prod(stats.lognorm.pdf(x, s, scale=np.exp(mu)), axis=-1)
        kappa = self.kappa
        if kappa == 0:
            return np.full(x.shape[:-1], 1.0 / (4 * np.pi))
        c = kappa / (2 * np.pi * -np.expm1(-2 * kappa))
        return c * np.exp(kappa * (x @ np.asarray(self.direction) - 1.0))

    __call__ = pdf

    def sup(self):
        """Maximum of the density."""
        fam = self.family
        if fam == "diag_gaussian":
            return float(1.0 / np.sqrt(np.prod(2 * np.pi * np.asarray(self.scale))))
        if fam == "product_exponential":
            return float(np.prod(self.scale))
        if fam == "product_lognormal":
            mu, s = np.asarray(self.loc), np.asarray(self.scale)
            mode = np.exp(mu - s**2)
            return float(np.prod(stats.lognorm.pdf(mode, s, scale=np.exp(mu))))
        return float(self.pdf(np.asarray(self.direction)[None, :])[0])

    def lipschitz(self):
        """Upper bound on the Euclidean Lipschitz constant (exact for isotropic Gaussians)."""
        if self.family != "diag_gaussian":
            raise InvalidParameter("Lipschitz constant only implemented for Gaussians")
        sd_min = float(np.sqrt(np.min(self.scale)))
        return self.sup() * np.exp(-0.5) / sd_min

    # tails / support ----------------------------------------------------
    def marginal_sf_outside(self, lower, upper):
        """Per-axis mass outside ``[lower_i, upper_i]``."""
        lower, upper = np.asarray(lower, float), np.asarray(upper, float)
        fam = self.family
        if fam == "diag_gaussian":
            m, sd = np.asarray(self.loc), np.sqrt(self.scale)
            return stats.norm.cdf(lower, m, sd) + stats.norm.sf(upper, m, sd)
        if fam == "product_exponential":
            lam = np.asarray(self.scale)
            return stats.expon.cdf(lower, scale=1 / lam) + stats.expon.sf(upper, scale=1 / lam)
        if fam == "product_lognormal":
            mu, s = np.asarray(self.loc), np.asarray(self.scale)
            return stats.lognorm.cdf(lower, s, scale=np.exp(mu)) + stats.lognorm.sf(upper, s, scale=np.exp(mu))
        raise InvalidParameter("sphere densities have compact support")

    def default_box(self):
        fam = self.family
        if fam == "diag_gaussian":
            m, sd = np.asarray(self.loc), np.sqrt(self.scale)
            return m - 8 * sd, m + 8 * sd
        if fam == "product_exponential":
            lam = np.asarray(self.scale)
            return np.zeros(self.dim), 20.0 / lam
        if fam == "product_lognormal":
            mu, s = np.asarray(self.loc), np.asarray(self.scale)
            # 6 log-sd leave ~1e-9 mass per axis; a wider box starves uniform panels near 0
            return np.zeros(self.dim), np.exp(mu + 6 * s)
        raise InvalidParameter("sphere densities have no box")

    # sampling -------------------------------------------------------------
    def sample(self, n, rng):
        if not isinstance(rng, np.random.Generator):
            rng = substream(rng, 0x5A)
        fam = self.family
        k = self.dim
        if fam == "diag_gaussian":
            return np.asarray(self.loc) + np.sqrt(self.scale) * rng.standard_normal((n, k))
        if fam == "product_exponential":
            return rng.exponential(1.0 / np.asarray(self.scale), size=(n, k))
        if fam == "product_lognormal":
            return np.exp(np.asarray(self.loc) + np.asarray(self.scale) * rng.standard_normal((n, k)))
        return _sample_fisher(rng, n, self.kappa, np.asarray(self.direction))

    def to_dict(self):
        if self.family == "fisher_s2":
            return {"family": self.family, "kappa": self.kappa, "direction": list(self.direction)}
        return {"family": self.family, "loc": list(self.loc), "scale": list(self.scale)}

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        fam = data.pop("family")
        if fam == "fisher_s2":
            return cls.fisher(data.get("kappa", 0.0), tuple(data.get("direction", (0, 0, 1))))
        if fam == "diag_gaussian":
            return cls.gaussian(data.get("loc", data.get("mean")), data.get("scale", data.get("var")))
        if fam == "product_exponential":
            return cls.exponential(data.get("scale", data.get("rates")))
        return cls.lognormal(data.get("loc", data.get("mu")), data.get("scale", data.get("sigma")))


def _sample_fisher(rng, n, kappa, mu):
    u = rng.random(n)
    if kappa == 0:
        w = 2.0 * u - 1.0
    else:
        w = 1.0 + np.log(u + (1.0 - u) * np.exp(-2.0 * kappa)) / kappa
    phi = 2.0 * np.pi * rng.random(n)
    # orthonormal frame around mu
    helper = np.array([1.0, 0.0, 0.0]) if abs(mu[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(mu, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(mu, e1)
    s = np.sqrt(np.clip(1.0 - w**2, 0.0, None))
    pts = w[:, None] * mu + s[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)

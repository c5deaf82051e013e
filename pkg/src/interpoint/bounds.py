"""Both sides of the L2 / Kolmogorov inequalities and the rate experiment.

Everything here works on analytic densities (:class:`DensitySpec`).  Population
interpoint-distance CDFs come from closed forms when ``f`` and ``g`` are
isotropic Gaussians under the Euclidean distance, and from large pair Monte
Carlo otherwise.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from . import ballgeom
from . import distances as dist
from . import empirics
from .densities import DensitySpec
from .errors import (
    DegenerateLadder,
    DimensionMismatch,
    InsufficientAcceptance,
    InsufficientCoverage,
    InvalidParameter,
)
from .montecarlo import map_chunks, substream, uniform_sphere
from .quadrature import composite_rule, integrate_box, integrate_sphere

COVERAGE = 1e-6
MIN_PANELS = 32
MIN_PAIR_DRAWS = 10**6
MIN_ACCEPTED = 100
BASE_TOLERANCE = 1e-9
# mean of the Kolmogorov distribution, used to scale the pair-MC error of a sup
_KOLMOGOROV_MEAN = 0.8687


@dataclass
class L2Report:
    value: float
    quadrature_error: float
    truncation_tail: float

    def to_dict(self):
        return asdict(self)


@dataclass
class ScalarEstimate:
    value: float
    stderr: float = 0.0

    def to_dict(self):
        return asdict(self)


@dataclass
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool
    slack: float
    tolerance: float
    inputs: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


@dataclass
class RateFit:
    slope: float
    intercept: float
    points: list
    theoretical_exponent: float
    c_hat: float
    consistent: bool

    def to_dict(self):
        return asdict(self)


def default_xi(spec):
    """A center for ``Phi(xi, t)``.

    The origin where ``Phi`` is center-free, the north pole on S^2, and the
    all-ones vector otherwise (Canberra balls centered on an axis are null sets).
    """
    if spec.domain == dist.UNIT_SPHERE:
        return np.eye(spec.dim)[-1]
    if spec.translation_invariant or spec.family == "oscillatory":
        return np.zeros(spec.dim)
    return np.ones(spec.dim)


def _same_dim(*densities):
    dims = {d.dim for d in densities}
    if len(dims) != 1:
        raise DimensionMismatch(f"density dimensions differ: {sorted(dims)}")


# L2 norms ----------------------------------------------------------------------


def _union_box(densities):
    lows, highs = zip(*(d.default_box() for d in densities))
    return np.min(lows, axis=0), np.max(highs, axis=0)


def _outside_mass(d, lower, upper):
    return float(min(1.0, np.sum(d.marginal_sf_outside(lower, upper))))


def _default_panels(dim):
    return 64 if dim <= 2 else MIN_PANELS


def _l2(integrand, densities, box, panels):
    if panels < MIN_PANELS:
        raise InvalidParameter(f"quadrature needs at least {MIN_PANELS} panels per axis")
    if densities[0].family == "fisher_s2":
        value = integrate_sphere(integrand, panels)
        coarse = integrate_sphere(integrand, panels // 2)
        return L2Report(max(value, 0.0), abs(value - coarse), 0.0)
    lower, upper = box if box is not None else _union_box(densities)
    lower, upper = np.atleast_1d(np.asarray(lower, float)), np.atleast_1d(np.asarray(upper, float))
    if lower.shape != (densities[0].dim,) or upper.shape != lower.shape:
        raise DimensionMismatch("box does not match the density dimension")
    tail = 0.0
    for d in densities:
        out = _outside_mass(d, lower, upper)
        if out > COVERAGE:
            raise InsufficientCoverage(f"box misses {out:.3g} of the mass of a {d.family} density")
        tail += d.sup() * out
    value = integrate_box(integrand, lower, upper, panels)
    coarse = integrate_box(integrand, lower, upper, panels // 2)
    return L2Report(max(value, 0.0), abs(value - coarse), tail)


def l2_distance_sq(f: DensitySpec, g: DensitySpec, box=None, panels=None) -> L2Report:
    """``int (f - g)^2`` by tensor Gauss-Legendre quadrature on ``box``."""
    _same_dim(f, g)
    if f.domain != g.domain:
        raise InvalidParameter("densities live on different domains")
    if f == g:
        return L2Report(0.0, 0.0, 0.0)
    panels = _default_panels(f.dim) if panels is None else panels
    return _l2(lambda p: (f(p) - g(p)) ** 2, (f, g), box, panels)


def l2_norm_sq(f: DensitySpec, box=None, panels=None) -> L2Report:
    panels = _default_panels(f.dim) if panels is None else panels
    return _l2(lambda p: f(p) ** 2, (f,), box, panels)


# population interpoint CDFs ----------------------------------------------------


def _closed_form_model(spec, f, g):
    if spec.family != "lp" or not (spec.p == 2 or spec.dim == 1):
        return None
    try:
        return empirics.GaussianPairModel.from_densities(f, g)
    except InvalidParameter:
        return None


def _pair_distances(spec, a, b, n, seed, tag):
    """Sorted distances ``h(U, V)`` for ``n`` independent pairs ``U ~ a``, ``V ~ b``."""
    parts = []
    sizes = [min(1 << 16, n - s) for s in range(0, n, 1 << 16)]
    for i, size in enumerate(sizes):
        rng = substream(seed, 0xD1, tag, i)
        u, v = a.sample(size, rng), b.sample(size, rng)
        parts.append(dist._raw(spec, u, v))
    return np.sort(np.concatenate(parts))


class _PairModel:
    """Population ``F_XX``, ``F_YY``, ``F_XY`` by closed form or pair Monte Carlo."""

    def __init__(self, spec, f, g, method="auto", mc_n=MIN_PAIR_DRAWS, seed=0):
        _same_dim(f, g)
        if f.dim != spec.dim:
            raise DimensionMismatch("density and distance dimensions differ")
        self.model = None if method == "mc" else _closed_form_model(spec, f, g)
        if method == "closed" and self.model is None:
            raise InvalidParameter("closed-form CDFs need isotropic Gaussians and Euclidean distance")
        if self.model is None:
            if mc_n < MIN_PAIR_DRAWS:
                raise InvalidParameter(f"pair Monte Carlo needs at least {MIN_PAIR_DRAWS} draws")
            self.n = int(mc_n)
            self.d = {
                "xx": _pair_distances(spec, f, f, self.n, seed, 0),
                "yy": _pair_distances(spec, g, g, self.n, seed, 1),
                "xy": _pair_distances(spec, f, g, self.n, seed, 2),
            }

    @property
    def exact(self):
        return self.model is not None

    def cdf(self, pair, t):
        if self.exact:
            return ScalarEstimate(float(self.model.cdf(pair, t)))
        p = np.searchsorted(self.d[pair], t, side="left") / self.n
        return ScalarEstimate(float(p), float(np.sqrt(p * (1 - p) / self.n)))

    def delta_k(self, t=np.inf):
        if self.exact:
            return ScalarEstimate(empirics.population_delta_k(self.model, t))
        value = empirics.delta_k_exact(self.d["xx"], self.d["yy"], self.d["xy"], t)
        return ScalarEstimate(value, 2 * _KOLMOGOROV_MEAN * np.sqrt(2.0 / self.n))


def population_delta_k(spec, f, g, t=np.inf, method="auto", mc_n=MIN_PAIR_DRAWS, seed=0):
    return _PairModel(spec, f, g, method, mc_n, seed).delta_k(t)


def _phi(spec, xi, t, mc_n, seed):
    value, err = ballgeom.volume(spec, xi, t, n=mc_n, seed=seed)
    return value, err


def small_ball_normalized(spec, f, g, t, xi=None, method="auto", mc_n=MIN_PAIR_DRAWS, seed=0):
    """``[F_XX(t) + F_YY(t) - 2 F_XY(t)] / Phi(xi, t)``."""
    xi = default_xi(spec) if xi is None else xi
    pairs = _PairModel(spec, f, g, method, mc_n, seed)
    fxx, fyy, fxy = (pairs.cdf(p, t) for p in ("xx", "yy", "xy"))
    phi, phi_err = _phi(spec, xi, t, mc_n, seed)
    num = fxx.value + fyy.value - 2 * fxy.value
    num_err = np.sqrt(fxx.stderr**2 + fyy.stderr**2 + 4 * fxy.stderr**2)
    value = num / phi
    err = np.hypot(num_err / phi, abs(value) * phi_err / phi)
    return ScalarEstimate(float(value), float(err))


# remainder -----------------------------------------------------------------------


def _sign_changes(func, a, b, n=4097):
    """Roots of ``func`` on ``[a, b]`` located on a uniform scan and polished by Brent's method."""
    x = np.linspace(a, b, n)
    v = func(x)
    sv = np.sign(v)
    roots = list(x[1:-1][(sv[1:-1] == 0) & (sv[:-2] * sv[2:] < 0)])
    idx = np.nonzero(sv[:-1] * sv[1:] < 0)[0]
    roots += [optimize.brentq(func, x[i], x[i + 1], xtol=1e-14) for i in idx]
    return sorted(roots)


def _remainder_quadrature(spec, f, g, t, panels=256, inner=32):
    """Nested Gauss-Legendre for 1-D norm balls ``[x - rho, x + rho]``.

    The outer rule is split where ``f - g`` changes sign so the kink of
    ``|f - g|`` sits on a panel boundary; the inner rule is split at ``x``.
    """
    rho = float(spec.radius(t))
    lower, upper = _union_box((f, g))

    def D(z):
        return f(np.asarray(z)[..., None]) - g(np.asarray(z)[..., None])

    edges = [lower[0], *_sign_changes(D, lower[0], upper[0]), upper[0]]
    span = upper[0] - lower[0]
    rules = [composite_rule(a, b, max(2, int(np.ceil(panels * (b - a) / span)))) for a, b in zip(edges[:-1], edges[1:])]
    xs = np.concatenate([r[0] for r in rules])
    wx = np.concatenate([r[1] for r in rules])
    s, ws = composite_rule(0.0, 1.0, inner)
    dx = D(xs)
    total = 0.0
    for side in (-1.0, 1.0):
        ys = xs[:, None] + side * rho * s[None, :]
        total += np.sum(wx * np.abs(dx) * (rho * (np.abs(D(ys) - dx[:, None]) @ ws)))
    return float(total)


def _remainder_mc(spec, f, g, t, mc_n, seed, threads=1):
    """Importance sampling from ``(f + g)/2`` outside, one box draw inside."""

    def chunk(rng, size):
        half = rng.random(size) < 0.5
        x = np.where(half[:, None], f.sample(size, rng), g.sample(size, rng))
        dx = f(x) - g(x)
        q = 0.5 * (f(x) + g(x))
        if spec.family == "sphere":
            y = uniform_sphere(rng, size, spec.dim)
            measure = ballgeom.sphere_area(spec.dim)
        else:
            box = ballgeom.bounding_box(spec, x, t)
            y = box.lower + (box.upper - box.lower) * rng.random(x.shape)
            measure = box.volume
        inside = dist._raw(spec, x, y) < t
        z = np.where(inside, np.abs(dx) / q * measure * np.abs(f(y) - g(y) - dx), 0.0)
        return [np.count_nonzero(inside), z.sum(), (z**2).sum()]

    accepted, s1, s2 = map_chunks(chunk, mc_n, seed, tag=0x4E, threads=threads)
    if accepted < MIN_ACCEPTED:
        raise InsufficientAcceptance(f"only {int(accepted)} inner points fell in the ball")
    mean = s1 / mc_n
    var = max(s2 / mc_n - mean**2, 0.0)
    return float(mean), float(np.sqrt(var / mc_n))


def remainder_r(spec, f, g, xi=None, t=0.1, mc_n=MIN_PAIR_DRAWS, seed=0, method="auto", threads=1):
    """``r(xi, t) = Phi(xi,t)^-1 int |D(x)| int_{B_t(x)} |D(y) - D(x)| dy dx`` with ``D = f - g``."""
    _same_dim(f, g)
    xi = default_xi(spec) if xi is None else xi
    phi, phi_err = _phi(spec, xi, t, mc_n, seed)
    if f == g:
        return ScalarEstimate(0.0, 0.0)
    quad_ok = spec.dim == 1 and spec.translation_invariant and f.family != "fisher_s2"
    if method == "quadrature" or (method == "auto" and quad_ok):
        if not quad_ok:
            raise InvalidParameter("nested quadrature needs a 1-D translation-invariant distance")
        fine = _remainder_quadrature(spec, f, g, t)
        coarse = _remainder_quadrature(spec, f, g, t, panels=128, inner=16)
        value, err = fine, abs(fine - coarse)
    else:
        value, err = _remainder_mc(spec, f, g, t, mc_n, seed, threads)
    est = value / phi
    return ScalarEstimate(float(est), float(np.hypot(err / phi, est * phi_err / phi)))


def lipschitz_cap(f, g, t, panels=None):
    """Mean-value bound ``(Lip f + Lip g) t int |f - g|`` for Euclidean balls."""
    lower, upper = _union_box((f, g))
    panels = _default_panels(f.dim) if panels is None else panels
    l1 = integrate_box(lambda p: np.abs(f(p) - g(p)), lower, upper, panels)
    return (f.lipschitz() + g.lipschitz()) * t * l1


# inequality checks -----------------------------------------------------------------


def _check(lhs, rhs, err, inputs):
    tol = BASE_TOLERANCE + 3.0 * err
    return BoundCheck(float(lhs), float(rhs), bool(lhs <= rhs + tol), float(rhs - lhs), float(tol), inputs)


def _inputs(t, xi, **consts):
    return {"t": float(t), "xi": [float(v) for v in np.atleast_1d(xi)], **{k: float(v) for k, v in consts.items()}}


def check_ineq_l2(spec, f, g, xi=None, t=0.1, c=1.0, delta_star=1.0, method="auto", mc_n=MIN_PAIR_DRAWS,
                  seed=0, box=None):
    """``||f-g||^2 <= (c delta_*)^-1 [Delta_K(t) / Phi(xi,t) + r(xi,t)]``."""
    if c <= 0 or delta_star <= 0:
        raise InvalidParameter("c and delta_star must be positive")
    xi = default_xi(spec) if xi is None else xi
    l2 = l2_distance_sq(f, g, box=box)
    dk = _PairModel(spec, f, g, method, mc_n, seed).delta_k(t)
    phi, phi_err = _phi(spec, xi, t, mc_n, seed)
    r = remainder_r(spec, f, g, xi, t, mc_n=mc_n, seed=seed)
    scale = 1.0 / (c * delta_star)
    rhs = scale * (dk.value / phi + r.value)
    err = scale * (dk.stderr / phi + dk.value * phi_err / phi**2 + r.stderr) + l2.quadrature_error
    return _check(l2.value, rhs, err, _inputs(t, xi, c=c, delta_star=delta_star))


def check_ineq_deltaK(spec, f, g, xi=None, t=0.1, C=1.0, delta_sup=1.0, method="auto", mc_n=MIN_PAIR_DRAWS,
                      seed=0, box=None):
    """``Delta_K(t) <= C delta^* Phi(xi,t) (||f|| + ||g||) ||f - g||``."""
    if C <= 0 or delta_sup <= 0:
        raise InvalidParameter("C and delta_sup must be positive")
    xi = default_xi(spec) if xi is None else xi
    dk = _PairModel(spec, f, g, method, mc_n, seed).delta_k(t)
    phi, phi_err = _phi(spec, xi, t, mc_n, seed)
    nf, ng = l2_norm_sq(f, box=box), l2_norm_sq(g, box=box)
    diff = l2_distance_sq(f, g, box=box)
    norms = np.sqrt(nf.value) + np.sqrt(ng.value)
    rhs = C * delta_sup * phi * norms * np.sqrt(diff.value)
    err = dk.stderr + C * delta_sup * phi_err * norms * np.sqrt(diff.value)
    return _check(dk.value, rhs, err, _inputs(t, xi, C=C, delta_sup=delta_sup))


# rate ------------------------------------------------------------------------------


def rate_experiment(spec, base: DensitySpec, ladder, alpha, beta, method="auto", mc_n=MIN_PAIR_DRAWS, seed=0):
    """Fit ``log ||f - g||^2`` against ``log Delta_K(inf)`` along a shift ladder."""
    ladder = np.asarray(ladder, dtype=float)
    if ladder.ndim != 1 or len(ladder) < 4:
        raise InvalidParameter("the perturbation ladder needs at least 4 values")
    if alpha <= 0 or beta <= 0:
        raise InvalidParameter("alpha and beta must be positive")
    if np.any(ladder <= 0):
        raise DegenerateLadder("ladder values must be positive (a zero shift gives Delta_K = 0)")
    if np.any(np.diff(ladder) >= 0):
        raise DegenerateLadder("ladder must be strictly decreasing")
    exponent = beta / (alpha + beta)
    points = []
    for j, mu in enumerate(ladder):
        g = base.shifted(mu)
        dk = population_delta_k(spec, base, g, np.inf, method, mc_n, seed + j).value
        if dk <= 0:
            raise DegenerateLadder(f"Delta_K vanished at shift {mu}")
        l2 = l2_distance_sq(base, g).value
        points.append((float(np.log(dk)), float(np.log(l2))))
    pts = np.array(points)
    slope, intercept = np.polyfit(pts[:, 0], pts[:, 1], 1)
    log_c = np.max(pts[:, 1] - exponent * pts[:, 0])
    consistent = bool(np.all(pts[:, 1] <= log_c + exponent * pts[:, 0] + 1e-12))
    return RateFit(float(slope), float(intercept), [list(p) for p in points], float(exponent),
                   float(np.exp(log_c)), consistent)

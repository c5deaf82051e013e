"""Ball volumes, their analytic bounds and regularity diagnostics.

``Phi(x, t)`` is the Lebesgue measure (surface measure on spheres) of the
right-ball ``{y : h(x, y) < t}``.  Closed forms exist for norm-induced
families, their monotone transforms, the 1-D Canberra distance, the
oscillatory test distance and geodesic caps; everything else goes through
hit-or-miss Monte Carlo in a circumscribed box.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.special import gammaln, lambertw

from . import distances as dist
from .errors import (
    DegenerateDenominator,
    DomainViolation,
    InsufficientAcceptance,
    InvalidParameter,
    InvalidRadius,
    PreconditionViolation,
    UnsupportedFamily,
)
from .montecarlo import map_chunks, uniform_sphere

VOLUME_REGULAR = "VolumeRegularConsistent"
INCONCLUSIVE = "Inconclusive"
VIOLATION = "ViolationDetected"

ENTROPIC_RECT_LIMIT = 1.0 / 12.0
SIMPSON_PANELS = 10_000


def dyadic_grid(t_max, n=8):
    """``t_j = t_max * 2**-j`` for ``j = 0..n-1`` (decreasing)."""
    return float(t_max) * 2.0 ** -np.arange(n)


def unit_ball_volume(p, k):
    """Lebesgue volume of the unit lp ball in R^k."""
    if np.isinf(p):
        return 2.0**k
    return float(np.exp(k * (np.log(2.0) + gammaln(1.0 / p + 1.0)) - gammaln(k / p + 1.0)))


def sphere_area(ambient_dim):
    """Surface area of the unit sphere S^(n-1) in R^n."""
    n = ambient_dim
    return float(2.0 * np.pi ** (n / 2.0) / np.exp(gammaln(n / 2.0)))


def cap_area(ambient_dim, t):
    """Area of a geodesic cap of radius ``t`` on the unit sphere in R^n."""
    t = min(float(t), np.pi)
    if ambient_dim == 3:
        return 2.0 * np.pi * (1.0 - np.cos(t))
    if ambient_dim == 2:
        return 2.0 * t
    s = np.linspace(0.0, t, SIMPSON_PANELS + 1)
    return sphere_area(ambient_dim - 1) * float(simpson(np.sin(s) ** (ambient_dim - 2), x=s))


def gray_expansion_sphere(t, intrinsic_dim=2, order=4):
    """Small-radius series for the geodesic ball volume on the unit sphere S^k.

    Constant curvature 1 gives scalar curvature k(k-1), |Ric|^2 = k(k-1)^2,
    |R|^2 = 2k(k-1) and a vanishing Laplacian of the scalar curvature.
    """
    k = intrinsic_dim
    t = np.asarray(t, dtype=float)
    scal = k * (k - 1.0)
    ric2 = k * (k - 1.0) ** 2
    riem2 = 2.0 * k * (k - 1.0)
    series = np.ones_like(t)
    if order >= 2:
        series = series - scal / (6.0 * (k + 2)) * t**2
    if order >= 4:
        series = series + (-3 * riem2 + 8 * ric2 + 5 * scal**2) / (360.0 * (k + 2) * (k + 4)) * t**4
    return unit_ball_volume(2.0, k) * t**k * series


def canberra_interval(x, t):
    """The 1-D Canberra ball around ``x != 0`` for ``0 < t < 1`` as an open interval."""
    a = np.abs(x) * (1.0 - t) / (1.0 + t)
    b = np.abs(x) * (1.0 + t) / (1.0 - t)
    return np.where(x > 0, a, -b), np.where(x > 0, b, -a)


def entropic_interval(x, t):
    """Exact 1-D entropic ball ``{y > 0 : x log(x/y) - x + y < t}``.

    With ``y = x z`` the boundary solves ``z - log z = 1 + t/x``, whose two
    roots are ``-W_0(-e^{-1-t/x})`` and ``-W_{-1}(-e^{-1-t/x})``.
    """
    x = np.asarray(x, dtype=float)
    arg = -np.exp(-1.0 - t / x)
    lo = -np.real(lambertw(arg, 0))
    hi = -np.real(lambertw(arg, -1))
    return x * lo, x * hi


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    @property
    def volume(self):
        v = np.prod(self.upper - self.lower, axis=-1)
        return float(v) if np.ndim(v) == 0 else v

    def contains(self, points):
        return np.all((points >= self.lower) & (points <= self.upper), axis=-1)


@dataclass(frozen=True)
class VolumeBounds:
    lower: float
    upper: float
    source: str


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    n_samples: int
    box_volume: float
    seed: int

    def to_dict(self):
        return asdict(self)


def _check_t(t):
    if not np.isfinite(t) or t <= 0:
        raise InvalidRadius(f"radius must be positive, got {t}")


def volume_exact(spec, x, t):
    """Exact ``Phi(x, t)`` when a closed form exists, else ``None``."""
    _check_t(t)
    x = dist.as_points(spec, x)
    k = spec.dim
    fam = spec.family
    if fam == "canberra":
        if k != 1:
            return None
        if t >= 1:
            raise InvalidRadius("1-D Canberra closed form needs t < 1")
        return float(4.0 * t * abs(x[0]) / (1.0 - t * t))
    if spec.translation_invariant:
        r = float(spec.radius(t))
        return unit_ball_volume(spec.radius_norm, k) * r**k
    if fam == "sphere":
        return cap_area(k, t)
    if fam == "oscillatory":
        if t >= dist.OSCILLATORY_T0:
            raise InvalidRadius("oscillatory distance is only defined below t0")
        r = float(dist.oscillation_radius(spec, x, t))
        return unit_ball_volume(1.0, k) * r**k
    return None


def volume_bounds(spec, x, t):
    """Inscribed / circumscribed rectangle volumes (Canberra, entropic)."""
    _check_t(t)
    x = dist.as_points(spec, x)
    k = spec.dim
    if spec.family == "canberra":
        if t >= 1:
            raise InvalidRadius("Canberra bounds need t < 1")
        if np.any(x == 0):
            raise PreconditionViolation("Canberra bounds need a center off the axes")
        prod = float(np.prod(np.abs(x)))
        s = t / k
        lower = (4.0 * s / (1.0 - s * s)) ** k * prod
        upper = (4.0 * t / (1.0 - t * t)) ** k * prod
        return VolumeBounds(lower, upper, "canberra_rectangles")
    if spec.family == "entropic":
        if t > ENTROPIC_RECT_LIMIT * float(np.min(x)):
            raise PreconditionViolation(
                "entropic rectangles need t <= min(x)/12 so that |y - x| < x/2"
            )
        lower = float(np.prod(2.0 * np.sqrt(6.0 / 11.0 * x * t / k)))
        upper = float(np.prod(2.0 * np.sqrt(3.0 * x * t)))
        return VolumeBounds(lower, upper, "entropic_rectangles")
    raise UnsupportedFamily(f"no rectangle bounds for {spec.family}")


def bounding_box(spec, x, t):
    """Axis-aligned box containing the ball ``B_t(x)``; vectorised over rows of ``x``."""
    _check_t(t)
    x = dist.as_points(spec, x)
    fam = spec.family
    if spec.translation_invariant:
        r = float(spec.radius(t))
        return Box(x - r, x + r)
    if fam == "canberra":
        if t >= 1:
            raise InvalidRadius("Canberra balls are unbounded for t >= 1")
        if np.any(x == 0):
            raise PreconditionViolation("Canberra balls centered on an axis are null sets for t < 1")
        lo, hi = canberra_interval(x, t)
        return Box(lo, hi)
    if fam == "bray_curtis":
        if t >= 1:
            raise InvalidRadius("Bray-Curtis box needs t < 1")
        # sum|x-y| < t (Sx + Sy) and Sy < Sx (1+t)/(1-t) give |x_i - y_i| < 2 t Sx / (1-t)
        w = 2.0 * t * np.sum(x, axis=-1, keepdims=True) / (1.0 - t)
        return Box(np.maximum(x - w, 0.0), x + w)
    if fam == "entropic":
        half = np.sqrt(3.0 * x * t)
        lo, hi = x - half, x + half
        exact_lo, exact_hi = entropic_interval(x, t)
        use_exact = t > ENTROPIC_RECT_LIMIT * x
        pad = 1e-12 * x
        return Box(
            np.where(use_exact, np.maximum(exact_lo - pad, 0.0), lo),
            np.where(use_exact, exact_hi + pad, hi),
        )
    if fam == "oscillatory":
        if t >= dist.OSCILLATORY_T0:
            raise InvalidRadius("oscillatory distance is only defined below t0")
        r = (1.0 + spec.eps) * t
        return Box(x - r, x + r)
    raise UnsupportedFamily(f"no bounding box for {fam}")


def inflate_box(spec, box, factor):
    """Enlarge ``box`` about its center; orthant families stay inside the orthant."""
    if factor == 1:
        return box
    if factor < 1:
        raise InvalidParameter("inflation factor must be >= 1")
    mid = 0.5 * (box.lower + box.upper)
    half = 0.5 * factor * (box.upper - box.lower)
    lower = mid - half
    if spec.domain == dist.POSITIVE_ORTHANT:
        lower = np.maximum(lower, 0.0)
    return Box(lower, mid + half)


def _proposal(spec, x, t, inflate=1.0):
    """Sampler over a region containing the ball plus that region's measure."""
    if spec.family == "sphere":
        area = sphere_area(spec.dim)
        return (lambda rng, size: uniform_sphere(rng, size, spec.dim)), area
    box = inflate_box(spec, bounding_box(spec, x, t), inflate)
    span = box.upper - box.lower

    def draw(rng, size):
        return box.lower + span * rng.random((size, spec.dim))

    return draw, box.volume


def volume_mc(spec, x, t, n=10**6, seed=0, threads=1, inflate=1.0):
    """Hit-or-miss estimate of ``Phi(x, t)``.

    ``inflate > 1`` samples from an enlarged box, which keeps the estimate
    informative when the bounding box coincides with the ball (1-D Canberra).
    """
    if n < 1000:
        raise InvalidParameter("volume_mc needs n >= 1000")
    x = dist.as_points(spec, x)
    if spec.family == "oscillatory" and t >= dist.OSCILLATORY_T0:
        raise InvalidRadius("oscillatory distance is only defined below t0")
    draw, measure = _proposal(spec, x, t, inflate)
    hits = map_chunks(
        lambda rng, size: np.count_nonzero(dist.in_ball(spec, x, draw(rng, size), t)),
        n,
        seed,
        threads=threads,
    )
    frac = float(hits) / n
    return VolumeEstimate(
        value=measure * frac,
        stderr=float(measure * np.sqrt(frac * (1.0 - frac) / n)),
        n_samples=int(n),
        box_volume=measure,
        seed=int(seed),
    )


def volume_mc_nested(spec, x, t_grid, n=10**6, seed=0, threads=1):
    """Estimates over a radius grid from one common sample (nested hit sets)."""
    t_grid = np.asarray(t_grid, dtype=float)
    x = dist.as_points(spec, x)
    draw, measure = _proposal(spec, x, float(np.max(t_grid)))

    def count(rng, size):
        pts = draw(rng, size)
        if spec.family == "oscillatory":
            return [np.count_nonzero(dist.in_ball(spec, x, pts, t)) for t in t_grid]
        h = dist._raw(spec, x, pts)
        return [np.count_nonzero(h < t) for t in t_grid]

    hits = map_chunks(count, n, seed, threads=threads)
    out = []
    for h in np.atleast_1d(hits):
        frac = float(h) / n
        out.append(
            VolumeEstimate(measure * frac, float(measure * np.sqrt(frac * (1 - frac) / n)), int(n), measure, int(seed))
        )
    return out


def volume(spec, x, t, method="auto", n=10**6, seed=0, threads=1):
    """``(value, stderr)`` by the requested method; ``auto`` prefers the closed form."""
    if method in ("auto", "exact"):
        exact = volume_exact(spec, x, t)
        if exact is not None:
            return exact, 0.0
        if method == "exact":
            raise UnsupportedFamily(f"no closed-form volume for {spec.family} in dim {spec.dim}")
    est = volume_mc(spec, x, t, n=n, seed=seed, threads=threads)
    return est.value, est.stderr


def delta_t(spec, x, y, t, method="exact", n=10**6, seed=0, threads=1):
    """Volume ratio ``Phi(x, t) / Phi(y, t)``."""
    num, _ = volume(spec, x, t, method=method, n=n, seed=seed, threads=threads)
    den, _ = volume(spec, y, t, method=method, n=n, seed=seed, threads=threads)
    if den <= 0:
        raise DegenerateDenominator("Phi(y, t) = 0")
    return num / den


def delta_limit(spec, x, y):
    """Analytic small-radius limit of ``delta_t(x, y)``; ``None`` when it does not exist."""
    x = dist.as_points(spec, x)
    y = dist.as_points(spec, y)
    fam = spec.family
    if fam == "canberra":
        if np.any(x == 0) or np.any(y == 0):
            raise DomainViolation("Canberra volume ratio needs centers off the axes")
        return float(np.prod(np.abs(x / y)))
    if fam == "bray_curtis":
        # balls are x-independent polytopes scaled by sum(x) once t is small
        return float((np.sum(x) / np.sum(y)) ** spec.dim)
    if fam == "entropic":
        return float(np.prod(np.sqrt(x / y)))
    if fam == "oscillatory":
        return None
    return 1.0


@dataclass
class RegularityReport:
    t_grid: list
    phi_x: list
    phi_y: list
    delta_t_values: list
    delta_limit: float | None
    sandwich: tuple
    verdict: str
    method: str
    tolerance: tuple = (1.0 / 3.0, 3.0)

    def to_dict(self):
        d = asdict(self)
        d["sandwich"] = list(self.sandwich)
        d["tolerance"] = list(self.tolerance)
        if self.delta_limit is None:
            del d["delta_limit"]
        return d


def _check_grid(t_grid, decreasing=True):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 5:
        raise InvalidParameter("radius grid needs at least 5 points")
    if np.any(t_grid <= 0):
        raise InvalidParameter("radii must be positive")
    if decreasing and np.any(np.diff(t_grid) >= 0):
        raise InvalidParameter("radius grid must be strictly decreasing")
    return t_grid


def _volumes(spec, x, t_grid, method, mc_n, seed, threads):
    return np.array(
        [volume(spec, x, t, method=method, n=mc_n, seed=seed, threads=threads)[0] for t in t_grid]
    )


def check_volume_regularity(
    spec, x, y, t_grid, mc_n=10**5, seed=0, method="auto", tolerance=(1.0 / 3.0, 3.0), threads=1
):
    t_grid = _check_grid(t_grid)
    phi_x = _volumes(spec, x, t_grid, method, mc_n, seed, threads)
    phi_y = _volumes(spec, y, t_grid, method, mc_n, seed + 1, threads)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(phi_y > 0, phi_x / np.where(phi_y > 0, phi_y, 1.0), np.nan)
    try:
        limit = delta_limit(spec, x, y)
    except DomainViolation:
        # centers on a Canberra axis: Phi vanishes there and the verdict below reports it
        limit = None
    scaled = ratios / (limit if limit else 1.0)
    finite = np.all(np.isfinite(ratios)) and np.all(ratios > 0)
    c_hat = float(np.nanmin(scaled)) if np.any(np.isfinite(scaled)) else float("nan")
    C_hat = float(np.nanmax(scaled)) if np.any(np.isfinite(scaled)) else float("nan")

    shrinking = bool(np.all(np.diff(phi_x) < 0) and phi_x[-1] < 0.01 * phi_x[0])
    in_band = limit is None or (finite and tolerance[0] <= c_hat and C_hat <= tolerance[1])
    steps = np.diff(ratios)
    monotone = finite and (np.all(steps > 0) or np.all(steps < 0))
    diverging = monotone and max(ratios[0] / ratios[-1], ratios[-1] / ratios[0]) > 10

    if not finite or diverging:
        verdict = VIOLATION
    elif shrinking and in_band:
        verdict = VOLUME_REGULAR
    else:
        verdict = INCONCLUSIVE
    return RegularityReport(
        t_grid=t_grid.tolist(),
        phi_x=phi_x.tolist(),
        phi_y=phi_y.tolist(),
        delta_t_values=[None if not np.isfinite(r) else float(r) for r in ratios],
        delta_limit=limit,
        sandwich=(c_hat, C_hat),
        verdict=verdict,
        method=method,
        tolerance=tuple(tolerance),
    )


@dataclass
class AhlforsFit:
    alpha_hat: float
    intercept: float
    r_squared: float
    t_grid: list
    volumes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def estimate_ahlfors_alpha(spec, x, t_grid, mc_n=10**6, seed=0, method="auto", threads=1):
    """Least-squares slope of ``log Phi(x, t)`` against ``log t``."""
    t_grid = _check_grid(t_grid, decreasing=False)
    phi = _volumes(spec, x, t_grid, method, mc_n, seed, threads)
    if np.any(phi <= 0):
        raise PreconditionViolation("Ahlfors fit needs positive volumes on the whole grid")
    lx, ly = np.log(t_grid), np.log(phi)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return AhlforsFit(float(slope), float(intercept), float(np.clip(r2, 0.0, 1.0)), t_grid.tolist(), phi.tolist())


@dataclass
class OscillationEstimate:
    value: float
    per_t: list
    t_grid: list
    accepted: list


def centered_oscillation(f, spec, x, t_grid, mc_n=10**5, seed=0, threads=1):
    """Ball averages of ``|f(y) - f(x)|`` over a radius grid and their maximum.

    ``f`` maps an ``(n, dim)`` array to ``n`` values (a ``DensitySpec`` works).
    """
    x = dist.as_points(spec, x)
    fx = float(np.asarray(f(x[None, :]))[0])
    per_t, accepted = [], []
    for t in np.asarray(t_grid, dtype=float):
        draw, _ = _proposal(spec, x, t)

        def accumulate(rng, size, t=t, draw=draw):
            pts = draw(rng, size)
            inside = pts[dist.in_ball(spec, x, pts, t)]
            return [np.abs(np.asarray(f(inside)) - fx).sum(), len(inside)]

        total, count = map_chunks(accumulate, mc_n, seed, threads=threads)
        if count < 100:
            raise InsufficientAcceptance(f"only {int(count)} ball points accepted at t={t}")
        per_t.append(float(total / count))
        accepted.append(int(count))
    return OscillationEstimate(max(per_t), per_t, list(map(float, t_grid)), accepted)


def volume_table(spec, x, t_grid, mc_n=10**5, seed=0, threads=1):
    """Rows ``(t, phi_exact, phi_mc, stderr, lower, upper)``; missing entries are ``None``."""
    rows = []
    for t in t_grid:
        t = float(t)
        exact = volume_exact(spec, x, t)
        try:
            est = volume_mc(spec, x, t, n=mc_n, seed=seed, threads=threads)
            mc, se = est.value, est.stderr
        except UnsupportedFamily:
            mc = se = None
        try:
            b = volume_bounds(spec, x, t)
            lo, hi = b.lower, b.upper
        except (UnsupportedFamily, PreconditionViolation):
            lo = hi = None
        rows.append((t, exact, mc, se, lo, hi))
    return rows

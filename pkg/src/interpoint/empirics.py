"""Interpoint distance samples, their ECDFs, Kolmogorov discrepancies and a permutation test.

All ECDFs use the strict convention ``F(t) = #{d < t} / #pairs``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import special, stats
from scipy.optimize import minimize_scalar

from . import distances as dist
from .densities import DensitySpec
from .errors import InvalidParameter
from .montecarlo import substream

GRID_CAP = 4096
SUP_DELTA_K = "SupDeltaK"
CRAMER_VON_MISES = "CramerVonMises"


@dataclass(frozen=True)
class Sample:
    points: np.ndarray
    domain: str = dist.EUCLIDEAN
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) < 2:
            raise InvalidParameter("a sample needs at least two points")
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return len(self.points)

    @property
    def dim(self):
        return self.points.shape[1]


def generate(density: DensitySpec, n, seed, label=""):
    """Draw ``n`` points from ``density``; deterministic in ``seed``."""
    if n < 2:
        raise InvalidParameter("n must be >= 2")
    return Sample(density.sample(n, substream(seed, 0x5A)), density.domain, label)


def _points(spec, sample):
    pts = sample.points if isinstance(sample, Sample) else np.asarray(sample, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return dist.as_points(spec, pts)


def distance_matrix(spec, A, B=None, block=256):
    """Full ``h(a_i, b_j)`` matrix (``B`` defaults to ``A``)."""
    a = _points(spec, A)
    b = a if B is None else _points(spec, B)
    out = np.empty((len(a), len(b)))
    for i in range(0, len(a), block):
        out[i : i + block] = dist._raw(spec, a[i : i + block, None, :], b[None, :, :])
    return out


def pairwise_distances(spec, A, B=None, block=256):
    """Sorted interpoint distances.

    Within a sample, unordered pairs ``i < j`` for symmetric distances and all
    ordered pairs ``i != j`` otherwise; between samples, all ``(a, b)`` pairs.
    """
    a = _points(spec, A)
    if B is not None:
        b = _points(spec, B)
        parts = [dist._raw(spec, a[i : i + block, None, :], b[None, :, :]).ravel() for i in range(0, len(a), block)]
        return np.sort(np.concatenate(parts))
    symmetric = dist.is_symmetric(spec)
    n = len(a)
    parts = []
    cols = np.arange(n)
    for i in range(0, n, block):
        rows = np.arange(i, min(i + block, n))
        d = dist._raw(spec, a[rows, None, :], a[None, :, :])
        mask = cols[None, :] > rows[:, None] if symmetric else cols[None, :] != rows[:, None]
        parts.append(d[mask])
    return np.sort(np.concatenate(parts))


def ecdf(sorted_d, grid):
    """Strict ECDF ``#{d < t} / len(d)`` on ``grid``."""
    return np.searchsorted(sorted_d, grid, side="left") / len(sorted_d)


def default_grid(*samples, cap=GRID_CAP):
    """Observed atoms, midpoints between them and one point above the maximum."""
    atoms = np.unique(np.concatenate(samples))
    mids = 0.5 * (atoms[:-1] + atoms[1:])
    top = atoms[-1] + max(1.0, abs(atoms[-1]))
    grid = np.sort(np.concatenate([atoms, mids, [top]]))
    if cap is not None and len(grid) > cap:
        idx = np.unique(np.round(np.linspace(0, len(grid) - 1, cap)).astype(int))
        grid = grid[idx]
    return grid


@dataclass
class EcdfTriple:
    grid: np.ndarray
    f_xx: np.ndarray
    f_yy: np.ndarray
    f_xy: np.ndarray
    n_pairs: tuple

    def rows(self):
        return np.column_stack([self.grid, self.f_xx, self.f_yy, self.f_xy])


def ecdf_triple(spec, X, Y, grid=None, cap=GRID_CAP):
    d_xx = pairwise_distances(spec, X)
    d_yy = pairwise_distances(spec, Y)
    d_xy = pairwise_distances(spec, X, Y)
    return ecdf_triple_from_distances(d_xx, d_yy, d_xy, grid=grid, cap=cap)


def ecdf_triple_from_distances(d_xx, d_yy, d_xy, grid=None, cap=GRID_CAP):
    if grid is None:
        grid = default_grid(d_xx, d_yy, d_xy, cap=cap)
    grid = np.asarray(grid, dtype=float)
    return EcdfTriple(
        grid, ecdf(d_xx, grid), ecdf(d_yy, grid), ecdf(d_xy, grid), (len(d_xx), len(d_yy), len(d_xy))
    )


@dataclass
class DiscrepancyReport:
    t_grid: np.ndarray
    delta_k: np.ndarray
    delta_k_inf: float

    def to_dict(self):
        return {"t_grid": self.t_grid.tolist(), "delta_k": self.delta_k.tolist(), "delta_k_inf": self.delta_k_inf}


def kolmogorov_discrepancy(triple: EcdfTriple):
    """Running suprema of ``|F_XX - F_XY|`` and ``|F_YY - F_XY|`` summed along the grid."""
    a = np.maximum.accumulate(np.abs(triple.f_xx - triple.f_xy))
    b = np.maximum.accumulate(np.abs(triple.f_yy - triple.f_xy))
    dk = a + b
    return DiscrepancyReport(triple.grid, dk, float(dk[-1]))


def _sup_abs_diff(a, b, t=np.inf, chunk=1 << 20):
    """``sup_{0 < u <= t} |F_a(u) - F_b(u)|`` for sorted samples, evaluated exactly.

    Both strict ECDFs are left-continuous step functions, so the supremum is
    a maximum over values just above the atoms below ``t``.
    """
    best = 0.0
    for atoms in (a, b):
        atoms = atoms[atoms < t]
        for i in range(0, len(atoms), chunk):
            u = atoms[i : i + chunk]
            fa = np.searchsorted(a, u, side="right") / len(a)
            fb = np.searchsorted(b, u, side="right") / len(b)
            best = max(best, float(np.max(np.abs(fa - fb))))
    return best


def delta_k_exact(d_xx, d_yy, d_xy, t=np.inf):
    """Exact plug-in ``Delta_K(t)`` from sorted distance vectors (no grid thinning)."""
    return _sup_abs_diff(d_xx, d_xy, t) + _sup_abs_diff(d_yy, d_xy, t)


# closed-form oracle -------------------------------------------------------


@dataclass(frozen=True)
class GaussianPairModel:
    """Isotropic Gaussians ``N(0, sx^2 I)`` and ``N(shift, sy^2 I)`` with Euclidean distance."""

    sigma_x: float = 1.0
    sigma_y: float = 1.0
    shift: float = 0.0
    dim: int = 1

    @classmethod
    def from_densities(cls, f: DensitySpec, g: DensitySpec):
        for d in (f, g):
            if d.family != "diag_gaussian" or len(set(d.scale)) != 1:
                raise InvalidParameter("closed-form CDFs need isotropic Gaussians")
        if f.dim != g.dim:
            raise InvalidParameter("dimension mismatch")
        shift = float(np.linalg.norm(np.asarray(g.loc) - np.asarray(f.loc)))
        return cls(np.sqrt(f.scale[0]), np.sqrt(g.scale[0]), shift, f.dim)

    def cdf(self, pair, t):
        """``P(|U - V| < t)`` for ``pair`` in ``xx``, ``yy``, ``xy``."""
        t = np.asarray(t, dtype=float)
        if pair == "xx":
            var, mu = 2 * self.sigma_x**2, 0.0
        elif pair == "yy":
            var, mu = 2 * self.sigma_y**2, 0.0
        elif pair == "xy":
            var, mu = self.sigma_x**2 + self.sigma_y**2, self.shift
        else:
            raise InvalidParameter(f"unknown pair {pair!r}")
        tp = np.maximum(t, 0.0)
        if self.dim == 1:
            s = np.sqrt(var)
            if mu == 0:
                out = special.erf(tp / (s * np.sqrt(2.0)))
            else:
                out = special.ndtr((tp - mu) / s) - special.ndtr((-tp - mu) / s)
        elif mu == 0:
            out = stats.chi2.cdf(tp**2 / var, self.dim)
        else:
            out = stats.ncx2.cdf(tp**2 / var, self.dim, mu**2 / var)
        return np.where(t > 0, out, 0.0)


def closed_form_distance_cdf(model: GaussianPairModel, t, pair="xy"):
    out = model.cdf(pair, t)
    return float(out) if np.ndim(out) == 0 else out


def _grid_sup(func, t, n_grid):
    u = np.linspace(0.0, t, n_grid + 1)[1:]
    vals = np.abs(func(u))
    i = int(np.argmax(vals))
    lo, hi = u[max(i - 1, 0)], u[min(i + 1, len(u) - 1)]
    best = float(vals[i])
    if hi > lo:
        res = minimize_scalar(lambda s: -abs(float(func(s))), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13 * max(1.0, hi)})
        best = max(best, -float(res.fun))
    return best


def population_delta_k(model: GaussianPairModel, t=np.inf, n_grid=4001):
    """Population ``Delta_K(t)`` from the closed-form CDFs (dense grid plus local refinement)."""
    if not np.isfinite(t):
        spread = max(model.sigma_x, model.sigma_y) * (12.0 + 2.0 * np.sqrt(model.dim)) + model.shift
        t = spread
    a = _grid_sup(lambda u: model.cdf("xx", u) - model.cdf("xy", u), t, n_grid)
    b = _grid_sup(lambda u: model.cdf("yy", u) - model.cdf("xy", u), t, n_grid)
    return a + b


# permutation test -----------------------------------------------------------


@dataclass
class TestResult:
    statistic: float
    p_value: float
    n_permutations: int
    statistic_kind: str

    def to_dict(self):
        return asdict(self)


def _split(D, idx_x, idx_y, symmetric):
    dxx = D[np.ix_(idx_x, idx_x)]
    dyy = D[np.ix_(idx_y, idx_y)]
    if symmetric:
        iu_x = np.triu_indices(len(idx_x), 1)
        iu_y = np.triu_indices(len(idx_y), 1)
        dxx, dyy = dxx[iu_x], dyy[iu_y]
    else:
        dxx = dxx[~np.eye(len(idx_x), dtype=bool)]
        dyy = dyy[~np.eye(len(idx_y), dtype=bool)]
    dxy = D[np.ix_(idx_x, idx_y)].ravel()
    return np.sort(dxx), np.sort(dyy), np.sort(dxy)


def statistic(kind, d_xx, d_yy, d_xy):
    if kind == SUP_DELTA_K:
        return delta_k_exact(d_xx, d_yy, d_xy)
    if kind == CRAMER_VON_MISES:
        pooled = np.concatenate([d_xx, d_yy, d_xy])
        fxx, fyy, fxy = ecdf(d_xx, pooled), ecdf(d_yy, pooled), ecdf(d_xy, pooled)
        return float(np.mean((fxx - fxy) ** 2 + (fyy - fxy) ** 2))
    raise InvalidParameter(f"unknown statistic {kind!r}")


def permutation_test(spec, X, Y, kind=SUP_DELTA_K, B=199, seed=0):
    """Relabel the pooled points ``B`` times; add-one p-value."""
    if B < 99:
        raise InvalidParameter("permutation test needs B >= 99")
    if kind in ("sup", "SupDeltaK"):
        kind = SUP_DELTA_K
    elif kind in ("cvm", "CramerVonMises"):
        kind = CRAMER_VON_MISES
    x, y = _points(spec, X), _points(spec, Y)
    pooled = np.concatenate([x, y])
    n = len(x)
    D = distance_matrix(spec, pooled)
    symmetric = dist.is_symmetric(spec)
    idx = np.arange(len(pooled))
    observed = statistic(kind, *_split(D, idx[:n], idx[n:], symmetric))
    exceed = 0
    for b in range(B):
        perm = substream(seed, 0xB0, b).permutation(len(pooled))
        if statistic(kind, *_split(D, perm[:n], perm[n:], symmetric)) >= observed:
            exceed += 1
    return TestResult(float(observed), (1 + exceed) / (1 + B), int(B), kind)

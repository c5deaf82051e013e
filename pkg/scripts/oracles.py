"""Independent high-precision reference values frozen into the test suite.

Everything here is computed with mpmath from first principles (root finding
and adaptive quadrature on the defining formulas), without importing the
package.  Run ``python3 scripts/oracles.py`` to print the table.
"""

import mpmath as mp
import numpy as np
from scipy import integrate, optimize, stats

mp.mp.dps = 20


def canberra_1d_interval(x, t):
    """Endpoints of {y : |x - y| / (|x| + |y|) < t} for x > 0, t < 1, by root finding."""
    h = lambda y: abs(x - y) / (abs(x) + abs(y)) - t
    lo = mp.findroot(h, (mp.mpf(0), x), solver="anderson")
    hi = mp.findroot(h, (x, 100 * x), solver="anderson")
    return lo, hi


def canberra_2d_volume(x1, x2, t):
    """Area of the 2-D Canberra ball: integrate the 1-D section length over y1."""

    def section(y1):
        s = t - abs(x1 - y1) / (abs(x1) + abs(y1))
        if s <= 0:
            return mp.mpf(0)
        lo, hi = canberra_1d_interval(x2, s)
        return hi - lo

    lo, hi = canberra_1d_interval(x1, t)
    return mp.quad(section, [lo, x1, hi])


def entropic_1d_interval(x, t):
    h = lambda y: x * mp.log(x / y) - x + y - t
    return mp.findroot(h, (mp.mpf("1e-30"), x), solver="anderson"), mp.findroot(h, (x, 50 * x + 50 * t), solver="anderson")


def norm_cdf(z):
    return mp.ncdf(z)


def gauss_pair_cdf(t, mu, var):
    s = mp.sqrt(var)
    return norm_cdf((t - mu) / s) - norm_cdf((-t - mu) / s)


def population_delta_k_1d(mu, sigma=1):
    """2 sup_u |F_XX(u) - F_XY(u)| for N(0, s^2) vs N(mu, s^2) (the two terms coincide)."""
    var = 2 * sigma**2
    diff = lambda u: gauss_pair_cdf(u, 0, var) - gauss_pair_cdf(u, mu, var)
    # the difference is unimodal in u; locate the maximum by a root of its derivative
    d = lambda u: mp.diff(diff, u)
    u_star = mp.findroot(d, mu)
    return 2 * diff(u_star), u_star


def gauss_pdf(x, m):
    return mp.exp(-((x - m) ** 2) / 2) / mp.sqrt(2 * mp.pi)


def remainder_1d(mu, t):
    """r(t) = (2t)^-1 int_{-t}^{t} int |D(x)| |D(x+s) - D(x)| dx ds, D = N(0,1) - N(mu,1).

    The order is swapped relative to the definition so that, for fixed shift
    ``s``, the kinks in ``x`` (the zero of D and the crossings D(x+s) = D(x))
    are located by root finding and handed to the quadrature as breakpoints.
    Double precision (scipy) is enough here and keeps the run short.
    """
    mu, t = float(mu), float(t)
    D = lambda x: stats.norm.pdf(x) - stats.norm.pdf(x, mu)

    def inner(s):
        h = lambda x: D(x + s) - D(x)
        xs = np.linspace(-12, mu + 12, 5001)
        v = h(xs)
        pts = [mu / 2] + [optimize.brentq(h, xs[i], xs[i + 1], xtol=1e-15) for i in np.nonzero(v[:-1] * v[1:] < 0)[0]]
        return integrate.quad(lambda x: abs(D(x) * h(x)), -12, mu + 12, points=sorted(pts), limit=500,
                              epsabs=1e-15, epsrel=1e-13)[0]

    opts = dict(epsabs=1e-15, epsrel=1e-12, limit=200)
    return (integrate.quad(inner, -t, 0, **opts)[0] + integrate.quad(inner, 0, t, **opts)[0]) / (2 * t)


def main():
    rows = {}
    lo, hi = canberra_1d_interval(mp.mpf(2), mp.mpf("0.5"))
    rows["canberra_1d_vol(x=2,t=0.5)"] = hi - lo
    rows["canberra_1d_interval(x=1,t=1/3)"] = canberra_1d_interval(mp.mpf(1), mp.mpf(1) / 3)
    rows["canberra_2d_vol(x=(1,1),t=0.3)"] = canberra_2d_volume(mp.mpf(1), mp.mpf(1), mp.mpf("0.3"))
    rows["canberra_2d_vol(x=(1,2),t=0.2)"] = canberra_2d_volume(mp.mpf(1), mp.mpf(2), mp.mpf("0.2"))
    rows["entropic_1d_interval(x=1,t=0.01)"] = entropic_1d_interval(mp.mpf(1), mp.mpf("0.01"))
    rows["entropic_1d_interval(x=4,t=1)"] = entropic_1d_interval(mp.mpf(4), mp.mpf(1))
    rows["F_XX(sqrt2; sigma=1)"] = gauss_pair_cdf(mp.sqrt(2), 0, 2)
    rows["F_XY(t=1; mu=1, var=2)"] = gauss_pair_cdf(mp.mpf(1), 1, 2)
    for mu in ("0.5", "1", "2"):
        m = mp.mpf(mu)
        rows[f"l2sq(N(0,1),N({mu},1))"] = mp.quad(lambda x: (gauss_pdf(x, 0) - gauss_pdf(x, m)) ** 2, [-mp.inf, 0, m, mp.inf])
        rows[f"pop_delta_k_inf(mu={mu})"] = population_delta_k_1d(m)
    rows["r(mu=1,t=0.1)"] = remainder_1d(mp.mpf(1), mp.mpf("0.1"))
    rows["r(mu=1,t=0.4)"] = remainder_1d(mp.mpf(1), mp.mpf("0.4"))
    kappa = mp.mpf(2)
    c = kappa / (2 * mp.pi * (1 - mp.exp(-2 * kappa)))
    rows["fisher_l2sq(kappa=2)"] = 2 * mp.pi * mp.quad(lambda w: (c * mp.exp(kappa * (w - 1))) ** 2, [-1, 1])
    for k, v in rows.items():
        print(f"{k:40s} {v}")


if __name__ == "__main__":
    main()

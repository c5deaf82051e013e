"""Composite tensor-product Gauss-Legendre quadrature on boxes and on S^2."""

import numpy as np

ORDER = 8


def composite_rule(a, b, panels, order=ORDER):
    """Nodes and weights of ``panels`` equal Gauss-Legendre panels on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_box(func, lower, upper, panels, order=ORDER, block=1 << 18):
    """Integrate ``func`` (vectorised over rows of an ``(n, k)`` array) over a box."""
    lower, upper = np.atleast_1d(lower), np.atleast_1d(upper)
    rules = [composite_rule(a, b, panels, order) for a, b in zip(lower, upper)]
    k = len(rules)
    if k == 1:
        nodes, weights = rules[0]
        return float(np.sum(weights * func(nodes[:, None])))
    # outer loop over the first axis keeps memory bounded
    tail_nodes = np.stack(np.meshgrid(*[r[0] for r in rules[1:]], indexing="ij"), axis=-1).reshape(-1, k - 1)
    tail_w = np.prod(np.stack(np.meshgrid(*[r[1] for r in rules[1:]], indexing="ij"), axis=-1), axis=-1).ravel()
    n0 = len(rules[0][0])
    step = max(1, block // len(tail_w))
    total = 0.0
    for start in range(0, n0, step):
        x0 = rules[0][0][start : start + step]
        w0 = rules[0][1][start : start + step]
        pts = np.concatenate(
            [np.repeat(x0, len(tail_w))[:, None], np.tile(tail_nodes, (len(x0), 1))], axis=1
        )
        vals = func(pts).reshape(len(x0), len(tail_w))
        total += float(w0 @ vals @ tail_w)
    return total


def integrate_sphere(func, panels, order=ORDER):
    """Integrate over the unit sphere S^2 in polar coordinates."""
    th, wt = composite_rule(0.0, np.pi, panels, order)
    ph, wp = composite_rule(0.0, 2 * np.pi, 2 * panels, order)
    T, P = np.meshgrid(th, ph, indexing="ij")
    pts = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    vals = func(pts.reshape(-1, 3)).reshape(T.shape)
    return float(np.einsum("i,ij,j->", wt * np.sin(th), vals, wp))

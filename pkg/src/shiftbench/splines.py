"""Cubic B-spline bases with difference penalties (P-splines)."""

import numpy as np
from scipy.interpolate import BSpline


def knot_vector(lo, hi, n_bases, degree=3):
    """Uniform knot vector giving ``n_bases`` basis functions on [lo, hi].

    Knots are equally spaced and extend ``degree`` steps beyond the range
    on both sides, so a difference penalty's null space contains exact
    polynomial trends in x.
    """
    if n_bases < degree + 1:
        raise ValueError(f"need at least {degree + 1} basis functions, got {n_bases}")
    if not np.isfinite([lo, hi]).all() or hi <= lo:
        raise ValueError(f"bad basis range [{lo}, {hi}]")
    step = (hi - lo) / (n_bases - degree)
    return lo + step * np.arange(-degree, n_bases + 1)


def basis_matrix(x, knots, degree=3):
    """Evaluate the B-spline basis at x; values are clipped to the knot range."""
    lo, hi = knots[degree], knots[-degree - 1]
    x = np.clip(np.asarray(x, dtype=float), lo, hi)
    return BSpline.design_matrix(x, knots, degree).toarray()


def difference_penalty(n_bases, order=2):
    """Penalty matrix D'D for the given difference order on coefficients."""
    d = np.eye(n_bases)
    for _ in range(order):
        d = np.diff(d, axis=0)
    return d.T @ d

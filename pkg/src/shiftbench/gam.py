"""Penalized-spline additive regression with ridge-encoded group effects.

The model is ``y = intercept + sum_j f_j(x_j) + group intercepts + group
slopes + noise`` where each ``f_j`` is a centered cubic B-spline smooth
with a second-difference penalty and the group blocks carry identity
(ridge) penalties, the standard smooth-as-random-effect encoding.
Smoothing parameters are selected per block by generalized cross
validation over a log-spaced grid, via deterministic coordinate descent.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .splines import basis_matrix, difference_penalty, knot_vector

DEFAULT_LAMBDA_GRID = tuple(np.logspace(-4, 4, 12))
OTHER_GROUP = "<other>"


class SingularModelError(np.linalg.LinAlgError):
    """The penalized normal equations are singular even after the ridge floor."""


@dataclass
class Block:
    name: str
    start: int
    stop: int
    penalty: np.ndarray | None = None  # block-local penalty; None = unpenalized

    @property
    def size(self):
        return self.stop - self.start


@dataclass
class DesignMatrix:
    """Assembled design: response, full matrix, and penalized column blocks."""

    X: np.ndarray
    y: np.ndarray
    blocks: list
    feature_names: list
    knots: dict = field(default_factory=dict)
    column_means: dict = field(default_factory=dict)
    group_levels: list | None = None
    slope_feature: int | None = None
    slope_center: float = 0.0

    @property
    def n_rows(self):
        return self.X.shape[0]

    def penalized_blocks(self):
        return [b for b in self.blocks if b.penalty is not None]


def _pool_groups(groups):
    """Map raw labels to levels, pooling singleton groups into one bucket."""
    groups = np.asarray(groups)
    labels, counts = np.unique(groups, return_counts=True)
    keep = {lab for lab, cnt in zip(labels, counts) if cnt >= 2}
    pooled = np.array([g if g in keep else OTHER_GROUP for g in groups], dtype=object)
    levels = sorted(set(pooled))
    return pooled, levels


def build_design(X, y, groups=None, n_bases=10, degree=3, feature_names=None,
                 random_intercepts=True, slope_feature=0):
    """Build the additive design matrix from raw predictor columns.

    Each predictor gets a column-centered B-spline block over its own
    range with a second-difference penalty. Group labels add
    ridge-penalized intercept columns and, when ``slope_feature`` names a
    predictor, ridge-penalized per-group slope columns. Groups with a
    single member are pooled; fewer than two distinct groups collapse to
    the global intercept alone.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(p)]
    cols = [np.ones((n, 1))]
    blocks = [Block("intercept", 0, 1, None)]
    pos = 1
    knots = {}
    column_means = {}
    for j in range(p):
        xj = X[:, j]
        lo, hi = float(xj.min()), float(xj.max())
        if hi <= lo:
            raise ValueError(f"predictor {feature_names[j]!r} is constant across the data")
        kv = knot_vector(lo, hi, n_bases, degree)
        B = basis_matrix(xj, kv, degree)
        means = B.mean(axis=0)
        cols.append(B - means)
        knots[feature_names[j]] = kv
        column_means[feature_names[j]] = means
        blocks.append(Block(f"s({feature_names[j]})", pos, pos + n_bases,
                            difference_penalty(n_bases)))
        pos += n_bases
    group_levels = None
    slope_center = 0.0
    if groups is not None:
        pooled, levels = _pool_groups(groups)
        if len(levels) >= 2:
            group_levels = levels
            index = {g: i for i, g in enumerate(levels)}
            Z = np.zeros((n, len(levels)))
            Z[np.arange(n), [index[g] for g in pooled]] = 1.0
            if random_intercepts:
                cols.append(Z)
                blocks.append(Block("group_intercept", pos, pos + len(levels),
                                    np.eye(len(levels))))
                pos += len(levels)
            if slope_feature is not None:
                slope_center = float(X[:, slope_feature].mean())
                xs = X[:, slope_feature] - slope_center
                cols.append(Z * xs[:, None])
                blocks.append(Block("group_slope", pos, pos + len(levels),
                                    np.eye(len(levels))))
                pos += len(levels)
    return DesignMatrix(
        X=np.hstack(cols), y=y, blocks=blocks, feature_names=list(feature_names),
        knots=knots, column_means=column_means, group_levels=group_levels,
        slope_feature=slope_feature if group_levels else None,
        slope_center=slope_center,
    )


def _assemble_penalty(design, lambdas, ridge_floor):
    p = design.X.shape[1]
    P = ridge_floor * np.eye(p)
    for block in design.penalized_blocks():
        P[block.start:block.stop, block.start:block.stop] += (
            lambdas[block.name] * block.penalty
        )
    return P


def _solve(A, b, P, n, yty, ridge_floor):
    """Solve the penalized normal equations; return beta, edf, rss.

    Solved through a symmetric eigendecomposition, which stays stable when
    block penalties dwarf the data term (lambda toward infinity).
    Eigenvalues the ridge floor guarantees positive are clipped to it;
    without a floor, a rank-deficient system is a reported error.
    """
    M = A + P
    w, Q = linalg.eigh(M)
    if ridge_floor > 0:
        w = np.maximum(w, ridge_floor)
    elif w[0] <= w[-1] * 1e-14 or w[-1] <= 0:
        raise SingularModelError(
            f"penalized normal equations singular "
            f"(eigenvalue range {w[0]:.3g} .. {w[-1]:.3g})"
        )
    beta = Q @ ((Q.T @ b) / w)
    edf = float(np.sum((Q.T @ A @ Q).diagonal() / w))
    rss = float(yty - 2 * beta @ b + beta @ A @ beta)
    return beta, edf, max(rss, 0.0)


def _gcv(n, rss, edf):
    denom = max(n - edf, 1e-8)
    return n * rss / denom**2


@dataclass
class GamFit:
    coef: np.ndarray
    blocks: list
    lambdas: dict
    fitted: np.ndarray
    residuals: np.ndarray
    r_squared: float
    adj_r_squared: float
    edof: float
    gcv: float

    def block_coef(self, name):
        for block in self.blocks:
            if block.name == name:
                return self.coef[block.start:block.stop]
        raise KeyError(name)


def fit_design(design, lambda_grid=DEFAULT_LAMBDA_GRID, sweeps=3, ridge_floor=1e-8):
    """Fit the design, selecting one lambda per penalized block by GCV.

    Coordinate descent over blocks on the fixed grid, smallest-lambda
    tie-break, fixed sweep order: deterministic for identical inputs.
    """
    X, y = design.X, design.y
    n = len(y)
    A = X.T @ X
    b = X.T @ y
    yty = float(y @ y)
    grid = [float(v) for v in lambda_grid]
    penalized = design.penalized_blocks()
    lambdas = {blk.name: grid[len(grid) // 2] for blk in penalized}

    def evaluate(lams):
        P = _assemble_penalty(design, lams, ridge_floor)
        beta, edf, rss = _solve(A, b, P, n, yty, ridge_floor)
        return beta, edf, rss, _gcv(n, rss, edf)

    if penalized:
        for _ in range(sweeps):
            changed = False
            for blk in penalized:
                best_lam, best_score = None, np.inf
                for lam in grid:
                    trial = dict(lambdas, **{blk.name: lam})
                    _, _, _, score = evaluate(trial)
                    if score < best_score - 1e-12:
                        best_lam, best_score = lam, score
                if best_lam != lambdas[blk.name]:
                    lambdas[blk.name] = best_lam
                    changed = True
            if not changed:
                break
    beta, edf, rss, gcv = evaluate(lambdas)
    fitted = X @ beta
    residuals = y - fitted
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    if tss > 0 and n - edf > 1e-8:
        adj_r2 = 1.0 - (rss / (n - edf)) / (tss / (n - 1))
    else:
        adj_r2 = r2
    return GamFit(
        coef=beta, blocks=design.blocks, lambdas=dict(lambdas), fitted=fitted,
        residuals=residuals, r_squared=r2, adj_r_squared=adj_r2, edof=edf, gcv=gcv,
    )


def penalized_objective(design, fit, beta=None, ridge_floor=1e-8):
    """The quadratic objective ||y - Xb||^2 + sum_j lambda_j b'S_j b."""
    beta = fit.coef if beta is None else beta
    P = _assemble_penalty(design, fit.lambdas, ridge_floor)
    r = design.y - design.X @ beta
    return float(r @ r + beta @ P @ beta)


def objective_gradient(design, fit, beta=None, ridge_floor=1e-8):
    """Analytic gradient of the penalized objective."""
    beta = fit.coef if beta is None else beta
    P = _assemble_penalty(design, fit.lambdas, ridge_floor)
    return -2.0 * design.X.T @ (design.y - design.X @ beta) + 2.0 * P @ beta


class SplineGAM(BaseEstimator, RegressorMixin):
    """Additive penalized-spline regressor with optional group effects.

    Follows the scikit-learn estimator contract: parameters in
    ``__init__``, state learned in ``fit`` (accepting an optional
    ``groups`` array for ridge-penalized per-group intercepts and
    slopes), predictions from ``predict``.
    """

    def __init__(self, n_bases=10, degree=3, lambda_grid=DEFAULT_LAMBDA_GRID,
                 sweeps=3, random_intercepts=True, slope_feature=0,
                 ridge_floor=1e-8):
        self.n_bases = n_bases
        self.degree = degree
        self.lambda_grid = lambda_grid
        self.sweeps = sweeps
        self.random_intercepts = random_intercepts
        self.slope_feature = slope_feature
        self.ridge_floor = ridge_floor

    def fit(self, X, y, groups=None):
        X, y = check_X_y(X, y, ensure_min_samples=4)
        design = build_design(
            X, y, groups=groups, n_bases=self.n_bases, degree=self.degree,
            random_intercepts=self.random_intercepts, slope_feature=self.slope_feature,
        )
        result = fit_design(design, lambda_grid=self.lambda_grid,
                            sweeps=self.sweeps, ridge_floor=self.ridge_floor)
        self.design_ = design
        self.result_ = result
        self.coef_ = result.coef
        self.lambdas_ = result.lambdas
        self.r_squared_ = result.r_squared
        self.adj_r_squared_ = result.adj_r_squared
        self.edof_ = result.edof
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X, groups=None):
        check_is_fitted(self, "result_")
        X = check_array(X)
        design = self.design_
        n = X.shape[0]
        out = np.zeros(n)
        for block in design.blocks:
            coef = self.result_.coef[block.start:block.stop]
            if block.name == "intercept":
                out += coef[0]
            elif block.name.startswith("s("):
                name = block.name[2:-1]
                j = design.feature_names.index(name)
                B = basis_matrix(X[:, j], design.knots[name], self.degree)
                out += (B - design.column_means[name]) @ coef
            elif block.name in ("group_intercept", "group_slope") and groups is not None:
                index = {g: i for i, g in enumerate(design.group_levels)}
                for row, g in enumerate(groups):
                    i = index.get(g, index.get(OTHER_GROUP))
                    if i is None:
                        continue
                    if block.name == "group_intercept":
                        out[row] += coef[i]
                    else:
                        xs = X[row, design.slope_feature] - design.slope_center
                        out[row] += coef[i] * xs
        return out

"""Regression and correlation analyses over preference records.

Joins preference scores with weight ratios, fits the additive model per
(backend, shift type) group, runs the predictor-ablation grid, aggregates
preference-vs-ratio curves, and computes rank correlations against human
judgments. Tables are written as plot-ready TSV; no plotting here.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import gam

PREDICTORS = ("token", "word", "syllable", "modifier")


def join_records(pairs, preferences):
    """One analysis row per (pair, preference record), joined on pair id.

    Pairs must already carry ratio annotations from the weigh stage.
    """
    by_id = {p.id: p for p in pairs}
    rows = []
    for pref in preferences:
        pair = by_id.get(pref.pair_id)
        if pair is None:
            continue
        rows.append({
            "pair_id": pair.id,
            "backend_id": pref.backend_id,
            "shift_type": pair.shift_type,
            "verb": pair.verb,
            "m_preference": pref.m_preference,
            "ratios": pair.ratios or {},
        })
    return rows


def _predictor_matrix(records, predictors):
    if not records:
        raise ValueError("no records to analyze")
    X = np.empty((len(records), len(predictors)))
    for i, rec in enumerate(records):
        for j, name in enumerate(predictors):
            value = rec["ratios"].get(name)
            if value is None:
                raise ValueError(
                    f"predictor {name!r} missing on record {rec['pair_id']!r} "
                    "(modifier ratios exist only for synthetic data)"
                )
            X[i, j] = value
    y = np.array([rec["m_preference"] for rec in records], dtype=float)
    return X, y


def build_design(records, predictors, basis_size=10, verb_key="verb",
                 slope_predictor="word"):
    """Design matrix for m_preference as an additive function of ratios.

    Verb-wise random intercepts and slopes (on ``slope_predictor``,
    word-length ratio by default) enter as ridge-penalized blocks.
    """
    predictors = list(predictors)
    X, y = _predictor_matrix(records, predictors)
    groups = np.array([rec[verb_key] for rec in records], dtype=object)
    slope_feature = predictors.index(slope_predictor) if slope_predictor in predictors else 0
    return gam.build_design(
        X, y, groups=groups, n_bases=basis_size, feature_names=predictors,
        slope_feature=slope_feature,
    )


def fit_gam(design, lambda_grid=gam.DEFAULT_LAMBDA_GRID, sweeps=3):
    """Penalized least squares with per-block GCV smoothing selection."""
    return gam.fit_design(design, lambda_grid=lambda_grid, sweeps=sweeps)


@dataclass
class AblationRow:
    backend_id: str
    shift_type: str
    n: int
    full_r2: float | None
    ablated: dict  # predictor -> adjusted R^2 (or None on per-cell error)
    errors: dict  # predictor or "full" -> message


@dataclass
class AblationTable:
    predictors: list
    rows: list

    def to_tsv(self):
        header = ["backend", "shift_type", "n", "full"]
        header += [f"drop_{p}" for p in self.predictors]
        lines = ["\t".join(header)]
        for row in self.rows:
            cells = [row.backend_id, row.shift_type, str(row.n), _fmt(row.full_r2)]
            cells += [_fmt(row.ablated.get(p)) for p in self.predictors]
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"


def _fmt(value):
    return "NA" if value is None else f"{value:.6f}"


def _group_key(rec):
    return (rec["backend_id"], rec["shift_type"])


def ablate(records, predictors, basis_size=10, verb_key="verb",
           lambda_grid=gam.DEFAULT_LAMBDA_GRID, slope_predictor="word"):
    """Full-model fit plus one refit per dropped predictor.

    Smoothing parameters are re-selected for every refit. Reported values
    are adjusted R-squared; a larger drop against the full model marks a
    more informative predictor. Per-cell failures leave the other cells
    intact.
    """
    predictors = list(predictors)
    if len(predictors) < 2:
        raise ValueError("ablation needs at least two predictors")
    grouped = {}
    for rec in records:
        grouped.setdefault(_group_key(rec), []).append(rec)
    rows = []
    for (backend_id, shift_type), group in sorted(grouped.items()):
        errors = {}
        full_r2 = None
        ablated = {}

        def _fit(preds):
            slope = slope_predictor if slope_predictor in preds else preds[0]
            design = build_design(group, preds, basis_size=basis_size,
                                  verb_key=verb_key, slope_predictor=slope)
            return fit_gam(design, lambda_grid=lambda_grid).adj_r_squared

        try:
            full_r2 = _fit(predictors)
        except (ValueError, gam.SingularModelError) as exc:
            errors["full"] = str(exc)
        for dropped in predictors:
            remaining = [p for p in predictors if p != dropped]
            try:
                ablated[dropped] = _fit(remaining)
            except (ValueError, gam.SingularModelError) as exc:
                ablated[dropped] = None
                errors[dropped] = str(exc)
        rows.append(AblationRow(backend_id, shift_type, len(group), full_r2, ablated, errors))
    return AblationTable(predictors=predictors, rows=rows)


@dataclass(frozen=True)
class CurvePoint:
    center: float
    mean: float
    count: int
    stderr: float


def preference_curve(records, metric, bins=12):
    """Binned mean m_preference against one ratio metric.

    Equal-width bins over the observed ratio range; bins without data are
    omitted rather than zero-filled.
    """
    values = []
    for rec in records:
        ratio = rec["ratios"].get(metric)
        if ratio is None:
            raise ValueError(f"metric {metric!r} missing on record {rec['pair_id']!r}")
        values.append((ratio, rec["m_preference"]))
    if not values:
        return []
    x = np.array([v[0] for v in values])
    y = np.array([v[1] for v in values])
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        return [CurvePoint(lo, float(y.mean()), len(y), _stderr(y))]
    width = (hi - lo) / bins
    idx = np.minimum(((x - lo) / width).astype(int), bins - 1)
    points = []
    for b in range(bins):
        mask = idx == b
        if not mask.any():
            continue
        yb = y[mask]
        points.append(CurvePoint(
            center=lo + (b + 0.5) * width,
            mean=float(yb.mean()),
            count=int(mask.sum()),
            stderr=_stderr(yb),
        ))
    return points


def _stderr(values):
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(len(values)))


def write_curve_tsv(path, curves):
    """Write {metric: [CurvePoint]} as one long-format TSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("metric\tbin_center\tmean_preference\tcount\tstderr\n")
        for metric, points in curves.items():
            for pt in points:
                fh.write(f"{metric}\t{pt.center:.6f}\t{pt.mean:.6f}\t{pt.count}\t{pt.stderr:.6f}\n")


def average_ranks(values):
    """Ranks 1..n with ties given the average of their positions."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(x, y):
    """Spearman rank correlation with average-rank tie handling.

    Zero variance in either argument is an error, not a zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("vectors must have equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 observations")
    rx, ry = average_ranks(x), average_ranks(y)
    sx, sy = rx.std(), ry.std()
    if sx == 0 or sy == 0:
        raise ValueError("rank correlation undefined: zero variance")
    return float(((rx - rx.mean()) * (ry - ry.mean())).mean() / (sx * sy))

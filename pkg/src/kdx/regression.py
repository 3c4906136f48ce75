"""Weighted least squares and weighted quantile regression of SCC estimates.

Quantile regression minimises the weighted pinball loss by iteratively
reweighted least squares with a shrinking smoothing floor, then snaps to the
nearby vertex of the linear program (an exact fit through ``k`` records)
when that lowers the loss.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .inference import replicate_rng

logger = logging.getLogger(__name__)

__all__ = [
    "BASE_YEAR",
    "QUANTILES",
    "DesignMatrix",
    "RegressionResult",
    "YearEffects",
    "RankError",
    "build_design",
    "pinball_loss",
    "weighted_quantile",
    "wls",
    "quantile_reg",
    "year_fixed_effects",
]

BASE_YEAR = 1982
QUANTILES = (0.1, 0.3, 0.5, 0.7, 0.9)
EPS_FLOOR = 1e-8
MAX_ITER = 500


class RankError(ValueError):
    """The weighted design matrix does not have full column rank."""


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    y: np.ndarray
    X: np.ndarray
    weights: np.ndarray
    names: tuple
    scheme: str = "none"
    years: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if X.ndim != 2 or X.shape[0] != y.size or w.size != y.size:
            raise ValueError("inconsistent design dimensions")
        if X.shape[1] != len(self.names):
            raise ValueError("one name per column required")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("design has missing or infinite values")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "weights", w)

    def take(self, idx):
        idx = np.asarray(idx, dtype=int)
        years = None if self.years is None else self.years[idx]
        return DesignMatrix(self.y[idx], self.X[idx], self.weights[idx], self.names,
                            self.scheme, years)

    def positive(self):
        """Rows with positive weight only."""
        return self.take(np.flatnonzero(self.weights > 0))


@dataclass(frozen=True, eq=False)
class RegressionResult:
    names: tuple
    coefficients: np.ndarray
    se: np.ndarray
    scheme: str
    tau: float | None = None
    n: int = 0
    converged: bool = True
    iterations: int = 0
    loss: float | None = None
    notes: tuple = field(default=())

    def coef(self, name):
        return float(self.coefficients[self.names.index(name)])

    def stderr(self, name):
        return float(self.se[self.names.index(name)])


@dataclass(frozen=True, eq=False)
class YearEffects:
    years: np.ndarray
    effects: np.ndarray
    half_width: np.ndarray
    base_year: int
    result: RegressionResult


def build_design(dataset, regressors=("prtp", "pub_year"), base_year=BASE_YEAR):
    """Design for regressing standardised SCC on PRTP and publication year.

    ``regressors`` may contain ``"prtp"`` (numeric %/yr; records with PRTP
    "other" are dropped), ``"pub_year"`` (linear) and ``"year_dummies"``
    (one column per year except ``base_year``, or the earliest year present
    when ``base_year`` is absent).  An intercept is always included.
    """
    regressors = tuple(regressors)
    unknown = set(regressors) - {"prtp", "pub_year", "year_dummies"}
    if unknown:
        raise ValueError(f"unknown regressors {sorted(unknown)}")
    if "pub_year" in regressors and "year_dummies" in regressors:
        raise ValueError("pub_year and year_dummies are collinear")
    recs = dataset.records
    keep = np.ones(len(recs), dtype=bool)
    if "prtp" in regressors:
        keep = np.array([r.prtp != "other" for r in recs])
    idx = np.flatnonzero(keep)
    years = np.array([recs[i].pub_year for i in idx])
    cols, names = [np.ones(idx.size)], ["const"]
    for reg in regressors:
        if reg == "prtp":
            cols.append(np.array([float(recs[i].prtp) for i in idx]))
            names.append("prtp")
        elif reg == "pub_year":
            cols.append(years.astype(float))
            names.append("pub_year")
        else:
            present = np.unique(years)
            base = base_year if base_year in present else int(present.min())
            for yr in present:
                if yr != base:
                    cols.append((years == yr).astype(float))
                    names.append(f"y{yr}")
    return DesignMatrix(dataset.values[idx], np.column_stack(cols), dataset.weights[idx],
                        tuple(names), dataset.scheme, years)


def _check_rank(X, w):
    Xw = X * np.sqrt(w)[:, None]
    rank = np.linalg.matrix_rank(Xw)
    if rank < X.shape[1]:
        raise RankError(f"weighted design has rank {rank} < {X.shape[1]} columns")


def _wls_solve(X, y, w):
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    return beta


def wls(design):
    """Weighted least squares with classical standard errors.

    ``sigma^2 = sum w r^2 / (n - k)`` and ``cov = sigma^2 (X'WX)^-1``; both
    are unchanged when all weights are scaled by a constant.
    """
    d = design.positive()
    n, k = d.X.shape
    if n <= k:
        raise RankError(f"{n} observations for {k} coefficients")
    _check_rank(d.X, d.weights)
    beta = _wls_solve(d.X, d.y, d.weights)
    r = d.y - d.X @ beta
    sigma2 = float(np.sum(d.weights * r * r)) / (n - k)
    xtwx = (d.X * d.weights[:, None]).T @ d.X
    cov = sigma2 * np.linalg.inv(xtwx)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return RegressionResult(d.names, beta, se, d.scheme, None, n)


def pinball_loss(y, X, w, beta, tau):
    r = np.asarray(y) - np.asarray(X) @ np.asarray(beta)
    return float(np.sum(np.asarray(w) * r * (tau - (r < 0))))


def weighted_quantile(y, w, tau):
    """Minimiser of the weighted pinball loss for a constant.

    When the loss is flat between two order statistics (cumulative weight
    hits ``tau`` exactly) the midpoint is returned, so equal weights and
    ``tau=0.5`` give the usual median.
    """
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    order = np.argsort(y, kind="stable")
    ys, cw = y[order], np.cumsum(w[order])
    target = tau * cw[-1]
    i = int(np.searchsorted(cw, target, side="left"))
    if np.isclose(cw[i], target, rtol=1e-12, atol=0) and i + 1 < ys.size:
        return 0.5 * (ys[i] + ys[i + 1])
    return float(ys[i])


def _vertex(X, y, w, tau, basis, tol=1e-9):
    """Exact fit through ``basis`` rows and whether it minimises the loss.

    Optimality holds when the basis rows' subgradient multipliers, solved
    from ``sum_i w_i x_i psi_i = 0``, all lie in ``[tau - 1, tau]``.
    """
    A = X[basis]
    try:
        beta = np.linalg.solve(A, y[basis])
    except np.linalg.LinAlgError:
        return None, False
    r = y - X @ beta
    psi = tau - (r < 0)
    psi[basis] = 0.0
    g = X.T @ (w * psi)
    try:
        a = np.linalg.solve(A.T, -g) / w[basis]
    except np.linalg.LinAlgError:
        return beta, False
    return beta, bool(np.all((a >= tau - 1.0 - tol) & (a <= tau + tol)))


def _irls(X, y, w, tau, beta, max_iter=MAX_ITER, tol=1e-8):
    k = X.shape[1]
    r = y - X @ beta
    scale = max(float(np.median(np.abs(r))), 1.0)
    eps = scale
    tried = set()
    for it in range(1, max_iter + 1):
        u = w * np.where(r >= 0, tau, 1.0 - tau) / np.maximum(np.abs(r), eps)
        new = _wls_solve(X, y, u)
        change = np.max(np.abs(new - beta)) / max(1.0, np.max(np.abs(beta)))
        beta = new
        r = y - X @ beta
        if eps <= 1e-3 * scale:
            near = np.sort(np.argsort(np.abs(r), kind="stable")[: k + 2])
            for basis in itertools.islice(itertools.combinations(near, k), 32):
                if basis in tried:
                    continue
                tried.add(basis)
                vert, optimal = _vertex(X, y, w, tau, np.array(basis))
                if optimal:
                    return vert, True, it
        if eps <= EPS_FLOOR and change < tol:
            return beta, True, it
        eps = max(eps * 0.5, EPS_FLOOR)
    return beta, False, max_iter


def _polish(X, y, w, tau, beta, extra=2, max_subsets=64):
    """Best exact fit through ``k`` of the records closest to the IRLS fit."""
    n, k = X.shape
    best, best_loss = beta, pinball_loss(y, X, w, beta, tau)
    r = np.abs(y - X @ beta)
    near = np.argsort(r, kind="stable")[: min(n, k + extra)]
    subsets = itertools.islice(itertools.combinations(near, k), max_subsets)
    for sub in subsets:
        sub = np.array(sub)
        A = X[sub]
        if np.linalg.matrix_rank(A) < k:
            continue
        cand = np.linalg.solve(A, y[sub])
        loss = pinball_loss(y, X, w, cand, tau)
        if loss < best_loss:
            best, best_loss = cand, loss
    return best, best_loss


def _merge_duplicates(X, y, w):
    # identical rows add their weights; the loss is unchanged and vertices
    # stop being degenerate under bootstrap resampling
    rows, inverse = np.unique(np.column_stack([X, y]), axis=0, return_inverse=True)
    if rows.shape[0] == y.size:
        return X, y, w
    return rows[:, :-1], rows[:, -1], np.bincount(inverse.ravel(), weights=w)


def _fit_quantile(X, y, w, tau):
    X, y, w = _merge_duplicates(X, y, w)
    if X.shape[1] == 1 and np.all(X[:, 0] == 1.0):
        beta = np.array([weighted_quantile(y, w, tau)])
        return beta, True, 0, pinball_loss(y, X, w, beta, tau)
    start = _wls_solve(X, y, w)
    beta, converged, it = _irls(X, y, w, tau, start)
    beta, loss = _polish(X, y, w, tau, beta)
    return beta, converged, it, loss


def quantile_reg(design, tau, B=200, seed=0):
    """Weighted quantile regression with bootstrap standard errors.

    Parameters
    ----------
    design : DesignMatrix
    tau : float
        Quantile in (0, 1).
    B : int
        Bootstrap replicates over records for the standard errors; 0 skips them.
    seed : int
        Replicate ``b`` uses :func:`kdx.inference.replicate_rng` ``(seed, b)``.

    Returns
    -------
    RegressionResult
        ``converged`` is False when IRLS hit its iteration cap; the last
        iterate (after polishing) is still reported.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie strictly between 0 and 1")
    d = design.positive()
    n, k = d.X.shape
    if n <= k:
        raise RankError(f"{n} observations for {k} coefficients")
    _check_rank(d.X, d.weights)
    beta, converged, it, loss = _fit_quantile(d.X, d.y, d.weights, tau)
    notes = []
    if not converged:
        logger.warning("quantile regression at tau=%g did not converge in %d iterations",
                       tau, MAX_ITER)
        notes.append("not converged")
    se = np.full(k, np.nan)
    if B:
        draws = []
        skipped = 0
        for b in range(B):
            rng = replicate_rng(seed, b)
            idx = rng.integers(0, n, size=n)
            Xb, yb, wb = d.X[idx], d.y[idx], d.weights[idx]
            if np.linalg.matrix_rank(Xb * np.sqrt(wb)[:, None]) < k:
                skipped += 1
                continue
            draws.append(_fit_quantile(Xb, yb, wb, tau)[0])
        if skipped:
            notes.append(f"{skipped} rank-deficient bootstrap draws skipped")
        if len(draws) >= 2:
            se = np.std(np.array(draws), axis=0, ddof=1)
    return RegressionResult(d.names, beta, se, d.scheme, tau, n, converged, it, loss,
                            tuple(notes))


def year_fixed_effects(dataset, base_year=BASE_YEAR, with_prtp=True):
    """Publication-year dummies from WLS, relative to ``base_year``.

    Returns the deviation for every non-base year with a half-width of one
    standard error (a 67 % interval).
    """
    dataset = dataset.where(dataset.weights > 0)
    years = np.unique([r.pub_year for r in dataset.records])
    if years.size < 2:
        raise ValueError("need at least two publication years")
    regs = ("prtp", "year_dummies") if with_prtp else ("year_dummies",)
    design = build_design(dataset, regs, base_year)
    res = wls(design)
    cols = [i for i, nm in enumerate(res.names) if nm.startswith("y")]
    yrs = np.array([int(res.names[i][1:]) for i in cols])
    present = np.unique(design.years)
    base = base_year if base_year in present else int(present.min())
    return YearEffects(yrs, res.coefficients[cols], res.se[cols], base, res)

"""Weighted composite kernel densities and their decomposition.

A :class:`KernelMixture` holds one kernel per observation (family chosen per
record, shared bandwidth) and evaluates densities and distribution functions
exactly at arbitrary points.  :func:`estimate_density` and :func:`decompose`
discretise it onto a uniform :class:`Grid`; curves carry both the density
values and the exact cumulative mass at each grid point, so interval masses
do not suffer from trapezoid error at the jump at zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .data_model import AUTHOR_GROUPS, PERIODS, PRTP_LEVELS
from .kernels import FAMILIES, REAL_LINE_FAMILIES, prepare, silverman_bandwidth

logger = logging.getLogger(__name__)

__all__ = [
    "KERNEL_PRESETS",
    "Grid",
    "DensityCurve",
    "Component",
    "CompositeDensity",
    "KernelAssignment",
    "KernelMixture",
    "QuintileTable",
    "WeightedECDF",
    "weighted_mean_sd",
    "select_bandwidth",
    "fit_mixture",
    "estimate_density",
    "decompose",
    "cdf",
    "quantiles",
    "interval_mass",
    "moments",
    "tail_probs",
    "quintile_table",
    "mixture_quintile_table",
    "mise",
    "ecdf",
    "component_moments",
]

DEFAULT_GRID_SIZE = 4096
LEFT_PAD = 6.0    # bandwidths below min(0, min x)
RIGHT_PAD = 15.0  # bandwidths above max x; Gumbel / near-exponential Weibull tails
LEVIATHAN_TAIL = 1186.0
_CHUNK_ELEMENTS = 1 << 21
_POSITIVE_SUPPORT = ("weibull", "knotted_normal")

# preset name -> (family for studies admitting benefits, family for positive-only studies, centering)
KERNEL_PRESETS = {
    "gumbel-weibull": ("gumbel", "weibull", "mode"),
    "gumbel-knotted": ("gumbel", "knotted_normal", "mode"),
    "normal-knotted": ("normal", "knotted_normal", "mode"),
    "normal": ("normal", "normal", "mode"),
    "johnson-su": ("johnson_su", "johnson_su", "transformed"),
    "johnson-su-mode": ("johnson_su", "johnson_su", "mode"),
}

_LEVEL_ORDER = {
    "period": PERIODS,
    "prtp": PRTP_LEVELS,
    "author": AUTHOR_GROUPS,
    "author_group": AUTHOR_GROUPS,
    "pigou": ("pigou", "arbitrary"),
}


@dataclass(frozen=True, eq=False)
class Grid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2 or np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be a strictly increasing 1-d array")
        object.__setattr__(self, "points", pts)

    @property
    def lo(self):
        return float(self.points[0])

    @property
    def hi(self):
        return float(self.points[-1])

    @property
    def spacing(self):
        return float(self.points[1] - self.points[0])

    def __len__(self):
        return self.points.size

    @classmethod
    def uniform(cls, lo, hi, n=DEFAULT_GRID_SIZE, include_zero=True):
        """Uniform grid covering [lo, hi]; shifted by less than one step so
        that 0 is an exact grid point when it lies inside the range."""
        if not hi > lo or n < 3:
            raise ValueError("need hi > lo and at least 3 points")
        if include_zero and lo < 0 < hi:
            step = (hi - lo) / (n - 2)
            k = math.ceil(-lo / step)
            return cls((np.arange(n) - k) * step)
        return cls(np.linspace(lo, hi, n))

    @classmethod
    def for_data(cls, values, h, n=DEFAULT_GRID_SIZE, upper=None):
        """Grid spanning the data, padded by ``LEFT_PAD``/``RIGHT_PAD`` bandwidths."""
        values = np.asarray(values, dtype=float)
        lo = min(0.0, float(values.min())) - LEFT_PAD * h
        top = float(values.max()) if upper is None else max(float(values.max()), upper)
        return cls.uniform(lo, top + RIGHT_PAD * h, n)


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """Density values on a grid.

    ``cumulative`` holds the mass at or below each grid point (including any
    mass left of the grid); when omitted it is built by trapezoid integration.
    """

    grid: Grid
    values: np.ndarray
    mass: float
    cumulative: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.points.shape:
            raise ValueError("values must match the grid")
        object.__setattr__(self, "values", vals)
        if self.cumulative is None:
            x = self.grid.points
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(x))])
            object.__setattr__(self, "cumulative", cum)

    def integral(self):
        return float(np.trapezoid(self.values, self.grid.points))

    def to_csv(self):
        lines = ["x,value"]
        lines += [f"{x:.10g},{v:.10g}" for x, v in zip(self.grid.points, self.values)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class Component:
    label: str
    curve: DensityCurve
    weight: float


@dataclass(frozen=True, eq=False)
class CompositeDensity:
    composite: DensityCurve
    components: list
    group_by: str
    mixture: "KernelMixture | None" = None
    labels: np.ndarray | None = None

    @property
    def weights(self):
        return np.array([c.weight for c in self.components])

    @property
    def levels(self):
        return [c.label for c in self.components]

    def component(self, label):
        for c in self.components:
            if c.label == label:
                return c
        raise KeyError(label)


# -- kernel assignment and bandwidth ---------------------------------------------

@dataclass(frozen=True)
class KernelAssignment:
    """Maps each record to a kernel family.

    Records whose study admits benefits get ``real_family``; the rest get
    ``positive_family``.  A positive-only record with a nonpositive value has
    no support under a positive-line kernel and falls back to ``real_family``.
    """

    real_family: str = "gumbel"
    positive_family: str = "weibull"
    centering: str = "mode"

    def __post_init__(self):
        for fam in (self.real_family, self.positive_family):
            if fam not in FAMILIES:
                raise ValueError(f"unknown kernel family {fam!r}")
        if self.real_family not in REAL_LINE_FAMILIES:
            raise ValueError(f"{self.real_family!r} is not defined on the whole real line")

    @classmethod
    def preset(cls, name):
        if isinstance(name, KernelAssignment):
            return name
        try:
            real, pos, centering = KERNEL_PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown kernel preset {name!r}; expected one of "
                             f"{sorted(KERNEL_PRESETS)}") from None
        return cls(real, pos, centering)

    @property
    def transformed(self):
        """True when the bandwidth lives in arcsinh space."""
        return self.real_family == "johnson_su" or self.positive_family == "johnson_su"

    def resolve(self, allows_negative, values):
        allows_negative = np.asarray(allows_negative, dtype=bool)
        values = np.asarray(values, dtype=float)
        fam = np.where(allows_negative, self.real_family, self.positive_family).astype(object)
        if self.positive_family == "weibull":
            bad = ~allows_negative & (values <= 0)
        elif self.positive_family == "knotted_normal":
            bad = ~allows_negative & (values < 0)
        else:
            bad = np.zeros(values.shape, dtype=bool)
        if np.any(bad):
            logger.warning("%d positive-only records with nonpositive values use the %s kernel",
                           int(bad.sum()), self.real_family)
            fam[bad] = self.real_family
        return fam


def weighted_mean_sd(values, weights):
    """Weighted mean and (population) standard deviation."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    mean = float(np.sum(w * v))
    return mean, float(math.sqrt(max(np.sum(w * (v - mean) ** 2), 0.0)))


def select_bandwidth(values, weights, rule="sd", transformed=False):
    """Bandwidth from a rule name or an explicit positive number.

    ``"sd"`` is the weighted standard deviation; ``"silverman"`` applies
    1.06 sd n^(-1/5) with n the number of positively weighted observations.
    With ``transformed`` the statistics are taken on arcsinh(values).
    """
    if not isinstance(rule, str):
        h = float(rule)
        if not h > 0:
            raise ValueError(f"explicit bandwidth must be positive, got {rule}")
        return h
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    keep = w > 0
    v, w = v[keep], w[keep]
    if transformed:
        v = np.arcsinh(v)
    _, sd = weighted_mean_sd(v, w)
    if not sd > 0:
        raise ValueError("cannot choose a bandwidth for data without spread")
    if rule == "sd":
        return sd
    if rule == "silverman":
        return silverman_bandwidth(sd, v.size)
    raise ValueError(f"unknown bandwidth rule {rule!r}; expected 'sd', 'silverman' or a number")


# -- the mixture --------------------------------------------------------------------

class KernelMixture:
    """Weighted sum of per-observation kernels sharing one bandwidth.

    ``weights`` need not sum to one; every curve produced has mass equal to
    the sum of the weights it includes.
    """

    def __init__(self, centers, weights, families, h, centering="mode", source_index=None):
        self.centers = np.asarray(centers, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        if self.centers.size == 0:
            raise ValueError("empty input")
        if self.centers.shape != self.weights.shape:
            raise ValueError("centers and weights differ in length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if isinstance(families, str):
            families = np.full(self.centers.shape, families, dtype=object)
        self.families = np.asarray(families, dtype=object)
        self.h = float(h)
        self.centering = centering
        self.source_index = (np.arange(self.centers.size) if source_index is None
                             else np.asarray(source_index))
        self._groups = []
        for fam in FAMILIES:
            idx = np.flatnonzero(self.families == fam)
            if idx.size:
                cen = centering if fam == "johnson_su" else "mode"
                self._groups.append((idx, prepare(fam, self.centers[idx], self.h, cen)))

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def _accumulate(self, x, weights, method, positive=None):
        # positive: None = all kernels, True/False = only / no positive-support kernels
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.zeros(flat.size)
        chunk = max(1, _CHUNK_ELEMENTS // max(flat.size, 1))
        for idx, kern in self._groups:
            if positive is not None and (kern.family in _POSITIVE_SUPPORT) != positive:
                continue
            w = weights[idx]
            keep = np.flatnonzero(w)
            if keep.size == 0:
                continue
            if keep.size < w.size:
                # component curves only pay for their own kernels
                kern, w = _slice_prepared(kern, keep), w[keep]
            for start in range(0, w.size, chunk):
                sl = slice(start, start + chunk)
                wk = w[sl]
                sub = kern if w.size <= chunk else _slice_prepared(kern, sl)
                # fixed-order reduction keeps results independent of BLAS threading
                out += np.sum(wk[:, None] * getattr(sub, method)(flat), axis=0)
        return out.reshape(x.shape)

    def pdf(self, x, select=None):
        """Mixture density at ``x``; ``select`` is an optional 0/1 mask."""
        return self._accumulate(x, self._w(select), "pdf")

    def cdf(self, x, select=None):
        """Mass at or below ``x`` (not normalised)."""
        return self._accumulate(x, self._w(select), "cdf")

    def kernel_matrix(self, x):
        """Unweighted kernel densities, one row per observation, at points ``x``."""
        x = np.asarray(x, dtype=float).ravel()
        out = np.empty((self.centers.size, x.size))
        for idx, kern in self._groups:
            out[idx] = kern.pdf(x)
        return out

    def _w(self, select):
        return self.weights if select is None else self.weights * select

    def quantiles(self, probs, select=None, tol=1e-12, max_iter=200):
        """Points where the normalised mixture CDF reaches ``probs``.

        Safeguarded Newton: a bracketing interval is kept and any step that
        leaves it (or a flat density) falls back to bisection.
        """
        probs = np.atleast_1d(np.asarray(probs, dtype=float))
        w = self._w(select)
        target = probs * float(w.sum())
        spread = max(self.h, 1.0)
        lo = np.full(probs.shape, min(0.0, self.centers.min()) - 10.0 * spread)
        hi = np.full(probs.shape, self.centers.max() + 10.0 * spread)
        for _ in range(200):
            low_bad = self._accumulate(lo, w, "cdf") > target
            high_bad = self._accumulate(hi, w, "cdf") < target
            if not (np.any(low_bad) or np.any(high_bad)):
                break
            width = hi - lo
            lo = np.where(low_bad, lo - width, lo)
            hi = np.where(high_bad, hi + width, hi)
        # weighted quantiles of the centres are close to the answer
        order = np.argsort(self.centers, kind="stable")
        cw = np.cumsum(w[order])
        pick = np.minimum(np.searchsorted(cw, target, side="left"), cw.size - 1)
        x = np.clip(self.centers[order][pick], lo, hi)
        done = np.zeros(x.shape, dtype=bool)
        for _ in range(max_iter):
            gap = self._accumulate(x, w, "cdf") - target
            lo = np.where(gap < 0, x, lo)
            hi = np.where(gap < 0, hi, x)
            dens = self._accumulate(x, w, "pdf")
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(gap == 0, x, x - gap / dens)
            ok = np.isfinite(step) & (step >= lo) & (step <= hi)
            new = np.where(done, x, np.where(ok, step, 0.5 * (lo + hi)))
            scale = np.maximum(1.0, np.abs(new))
            done |= (np.abs(new - x) <= tol * scale) | (hi - lo <= tol * scale)
            x = new
            if np.all(done):
                break
        return x

    def curve(self, grid, select=None):
        """Density and exact cumulative mass on ``grid``.

        Positive-support kernels (Weibull, knotted Normal) jump or rise almost
        vertically at 0.  When 0 is an interior grid point their value there
        is chosen so that trapezoid quadrature over the grid reproduces their
        exact mass on the grid; for a pure jump this is close to the mean of
        the one-sided limits.
        """
        w = self.weights if select is None else self.weights * select
        pts = grid.points
        values = self._accumulate(pts, w, "pdf", positive=False)
        zero = np.flatnonzero(pts == 0.0)
        if zero.size and 0 < zero[0] < pts.size - 1 and self._has_positive():
            z = zero[0]
            pos = self._accumulate(pts, w, "pdf", positive=True)
            pos_cdf = self._accumulate(np.array([0.0, pts[-1]]), w, "cdf", positive=True)
            step_left = pts[z] - pts[z - 1]
            step_right = pts[z + 1] - pts[z]
            pos[: z + 1] = 0.0
            rest = np.trapezoid(pos[z:], pts[z:])
            target = pos_cdf[1] - pos_cdf[0]
            # coarse grids can overshoot the exact mass; never go negative
            pos[z] = max(2.0 * (target - rest) / (step_left + step_right), 0.0)
            values += pos
        elif self._has_positive():
            values += self._accumulate(pts, w, "pdf", positive=True)
        return DensityCurve(grid, values, float(w.sum()), cumulative=self.cdf(pts, select))

    def _has_positive(self):
        return any(k.family in _POSITIVE_SUPPORT for _, k in self._groups)


def _slice_prepared(kern, sl):
    def cut(a):
        return None if a is None else a[sl]
    return type(kern)(kern.family, kern.centers[sl], kern.h, cut(kern.loc),
                      cut(kern.scale), cut(kern.shape), cut(kern.norm))


def fit_mixture(dataset, kernel="gumbel-weibull", bandwidth="sd"):
    """Kernel mixture for the positively weighted records of ``dataset``."""
    assignment = KernelAssignment.preset(kernel)
    keep = np.flatnonzero(dataset.weights > 0)
    if keep.size == 0:
        raise ValueError("no positively weighted observations")
    values = dataset.values[keep]
    weights = dataset.weights[keep]
    allows = np.array([dataset.records[i].allows_negative for i in keep], dtype=bool)
    families = assignment.resolve(allows, values)
    h = select_bandwidth(values, weights, bandwidth, transformed=assignment.transformed)
    return KernelMixture(values, weights, families, h, assignment.centering, source_index=keep)


def estimate_density(values, weights, families, h, grid, centering="mode"):
    """Weighted kernel density ``sum_i w_i K_i(x; x_i, h)`` on ``grid``.

    ``families`` is one family name or one name per observation.  The curve's
    mass is the sum of the weights.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty input")
    return KernelMixture(values, weights, families, h, centering).curve(grid)


def _ordered_levels(group_by, labels):
    present = list(dict.fromkeys(labels.tolist()))
    order = _LEVEL_ORDER.get(group_by)
    if order is None:
        return sorted(present)
    return [lv for lv in order if lv in present] + sorted(set(present) - set(order))


def decompose(dataset, group_by, kernel="gumbel-weibull", bandwidth="sd", grid=None,
              grid_size=DEFAULT_GRID_SIZE, mixture=None):
    """Composite density and its components by the levels of ``group_by``.

    One bandwidth and one kernel assignment are fixed from the whole
    weighted sample; component ``j`` is the sum over its observations, so it
    has mass ``w_j`` and the components add up to the composite.
    """
    if mixture is None:
        mixture = fit_mixture(dataset, kernel, bandwidth)
    labels = dataset.factor(group_by)[mixture.source_index]
    levels = [lv for lv in _ordered_levels(group_by, labels)
              if mixture.weights[labels == lv].sum() > 0]
    if not levels:
        raise ValueError(f"factor {group_by!r} has no levels with positive weight")
    if grid is None:
        grid = Grid.for_data(mixture.centers, _grid_scale(mixture), grid_size)
    composite = mixture.curve(grid)
    if not np.all(np.isfinite(composite.values)):
        raise ArithmeticError("density is not finite on the grid; bandwidth too small?")
    components = []
    for lv in levels:
        sel = (labels == lv).astype(float)
        components.append(Component(str(lv), mixture.curve(grid, sel), float(np.sum(mixture.weights * sel))))
    return CompositeDensity(composite, components, group_by, mixture, labels)


def _grid_scale(mixture):
    # arcsinh-space bandwidths need a dollar-scale padding
    if any(k.family == "johnson_su" for _, k in mixture._groups):
        return max(float(np.std(mixture.centers)), 1.0)
    return mixture.h


# -- curve functionals ---------------------------------------------------------

def cdf(curve):
    """Cumulative mass curve (same grid), rising from ~0 to ``curve.mass``."""
    return DensityCurve(curve.grid, curve.cumulative, curve.mass, cumulative=curve.cumulative)


def _cum_at(curve, x):
    pts, cum = curve.grid.points, curve.cumulative
    x = np.asarray(x, dtype=float)
    out = np.interp(x, pts, cum)
    out = np.where(x < pts[0], 0.0, out)
    return np.where(x > pts[-1], curve.mass, out)


def interval_mass(curve, a, b):
    """Mass of ``curve`` on [a, b] by interpolating its cumulative values."""
    if a > b:
        raise ValueError(f"interval bounds reversed: {a} > {b}")
    return float(_cum_at(curve, b) - _cum_at(curve, a))


def quantiles(curve, p):
    """The ``p - 1`` interior cut points splitting the curve into equal masses."""
    if p < 2:
        raise ValueError("need at least two quantiles")
    cum = curve.cumulative
    pts = curve.grid.points
    targets = curve.mass * np.arange(1, p) / p
    idx = np.searchsorted(cum, targets, side="left")
    idx = np.clip(idx, 1, pts.size - 1)
    c0, c1 = cum[idx - 1], cum[idx]
    frac = np.where(c1 > c0, (targets - c0) / np.where(c1 > c0, c1 - c0, 1.0), 0.0)
    return pts[idx - 1] + frac * (pts[idx] - pts[idx - 1])


def moments(curve):
    """Mean and standard deviation by trapezoid quadrature on the grid."""
    x, f = curve.grid.points, curve.values
    norm = np.trapezoid(f, x)
    mean = np.trapezoid(x * f, x) / norm
    var = np.trapezoid((x - mean) ** 2 * f, x) / norm
    return float(mean), float(math.sqrt(max(var, 0.0)))


def tail_probs(curve, upper=LEVIATHAN_TAIL):
    """Normalised P(X < 0) and P(X > upper)."""
    below = float(_cum_at(curve, 0.0)) / curve.mass
    above = 1.0 - float(_cum_at(curve, upper)) / curve.mass
    return below, max(above, 0.0)


@dataclass(frozen=True, eq=False)
class QuintileTable:
    """Component mass per composite quantile interval.

    ``entries[k, j]`` is the mass of component ``j`` between cut points
    ``k`` and ``k+1``; ``null`` holds the per-interval mass expected under
    proportionality, ``w_j / p``.
    """

    levels: list
    weights: np.ndarray
    entries: np.ndarray
    cuts: np.ndarray

    @property
    def p(self):
        return self.entries.shape[0]

    @property
    def null(self):
        return self.weights / self.p

    def to_csv(self, digits=4):
        head = "," + ",".join(self.levels)
        rows = [head]
        for k, row in enumerate(self.entries, start=1):
            rows.append(f"Q{k}," + ",".join(f"{v:.{digits}f}" for v in row))
        rows.append("Null," + ",".join(f"{v:.{digits}f}" for v in self.null))
        return "\n".join(rows) + "\n"


def quintile_table(composite, p=5):
    """Grid-based table of component masses in the composite's ``p`` quantile bins."""
    if p < 2:
        raise ValueError("need at least two quantiles")
    comp = composite.composite
    cuts = quantiles(comp, p)
    entries = np.empty((p, len(composite.components)))
    for j, c in enumerate(composite.components):
        cum = np.concatenate([[0.0], _cum_at(c.curve, cuts), [c.curve.mass]])
        entries[:, j] = np.diff(cum)
    return QuintileTable(composite.levels, composite.weights, entries, cuts)


def mixture_quintile_table(mixture, labels, levels, p=5):
    """Grid-free version of :func:`quintile_table` using exact kernel CDFs.

    Cut points solve the normalised mixture CDF by bisection; component
    masses are differences of exact component CDFs at those points.
    """
    if p < 2:
        raise ValueError("need at least two quantiles")
    labels = np.asarray(labels)
    total = mixture.total_weight
    cuts = mixture.quantiles(np.arange(1, p) / p)
    entries = np.empty((p, len(levels)))
    weights = np.empty(len(levels))
    for j, lv in enumerate(levels):
        sel = (labels == lv).astype(float)
        wj = float(np.sum(mixture.weights * sel))
        cum = np.concatenate([[0.0], mixture.cdf(cuts, sel), [wj]])
        entries[:, j] = np.diff(cum) / total
        weights[j] = wj / total
    return QuintileTable(list(levels), weights, entries, cuts)


def mise(curve, values, weights, bins=50):
    """Frequency-weighted squared gap between histogram and model bin masses.

    Bins are uniform over the range of the positively weighted data; the
    model mass per bin comes from the normalised curve.
    """
    if bins < 2:
        raise ValueError("need at least two bins")
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.size == 0:
        raise ValueError("empty data")
    keep = w > 0
    v, w = v[keep], w[keep]
    edges = np.linspace(v.min(), v.max(), bins + 1)
    freq, _ = np.histogram(v, bins=edges, weights=w)
    freq = freq / freq.sum()
    cum = _cum_at(curve, edges) / curve.mass
    prob = np.diff(cum)
    return float(np.sum(freq * (freq - prob) ** 2))


@dataclass(frozen=True, eq=False)
class WeightedECDF:
    """Right-continuous weighted empirical distribution function."""

    x: np.ndarray
    cum: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.x, t, side="right")
        out = np.where(idx > 0, self.cum[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if out.ndim == 0 else out

    def mean(self):
        probs = np.diff(np.concatenate([[0.0], self.cum]))
        return float(np.sum(self.x * probs))


def ecdf(values, weights=None):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty data")
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=float)
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    ux, start = np.unique(v, return_index=True)
    sums = np.add.reduceat(w, start)
    cum = np.cumsum(sums) / w.sum()
    cum[-1] = 1.0
    return WeightedECDF(ux, cum)


def component_moments(composite):
    """(label, mean, sd) for each component, each normalised to mass one."""
    return [(c.label,) + moments(c.curve) for c in composite.components]


"""Equality-of-proportions and Kolmogorov-Smirnov tests on density decompositions.

The Pearson statistic compares each component's share of every composite
quantile interval with its overall weight.  Its reference distribution comes
either from the chi-square approximation or from a bootstrap that resamples
records and reshuffles group labels.  Every bootstrap replicate draws from its
own random stream keyed by ``(seed, replicate)``, so results do not depend on
how replicates are scheduled across workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data_model import CensorPolicy, censor_factor, effective_sample_size, quality_score, winsorize
from .density import (
    Grid,
    KernelAssignment,
    KernelMixture,
    QuintileTable,
    _grid_scale,
    _ordered_levels,
    fit_mixture,
    mixture_quintile_table,
    quantiles,
    quintile_table,
    select_bandwidth,
)
from .special import chi2_sf, kolmogorov_sf

logger = logging.getLogger(__name__)

__all__ = [
    "LEVELS",
    "KS_RESOLUTIONS",
    "EqPropResult",
    "KSResult",
    "DensityBand",
    "pearson_eqprop",
    "pearson_from_table",
    "bootstrap_criticals",
    "ks_subsample",
    "ks_table",
    "density_band",
    "replicate_rng",
]

LEVELS = (0.10, 0.05, 0.01)
KS_RESOLUTIONS = (5, 10, 20, 50, 100)
_MAX_REDRAWS = 1000


@dataclass(frozen=True)
class EqPropResult:
    statistic: float
    dof: int
    p_asymptotic: float
    n: float
    bootstrap_criticals: dict = field(default_factory=dict)
    bootstrap_p: float | None = None
    B: int = 0
    seed: int | None = None
    redraws: int = 0
    replicates: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class KSResult:
    D: float
    n_eff: float
    p_value: float
    p: int


@dataclass(frozen=True, eq=False)
class DensityBand:
    grid: Grid
    lower: np.ndarray
    upper: np.ndarray
    estimate: np.ndarray
    B: int
    seed: int


def replicate_rng(seed, index):
    """Independent generator for replicate ``index`` of a run seeded by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


# -- Pearson statistic ----------------------------------------------------------

def pearson_from_table(table, n, form="pearson"):
    """Statistic and dof from a :class:`QuintileTable`.

    ``form="pearson"`` is the count form ``sum (O - E)^2 / E`` with
    ``O = n * share`` and ``E = n * w_j / p``.  ``form="literal"`` compares
    each interval share directly with ``w_j``, scaled by ``n / p``; it is
    biased away from zero under the null and kept only for comparison.
    """
    entries = np.asarray(table.entries, dtype=float)
    weights = np.asarray(table.weights, dtype=float)
    p, m = entries.shape
    if m < 2:
        raise ValueError("need at least two components")
    if p < 2:
        raise ValueError("need at least two quantile intervals")
    total = weights.sum()
    share = entries / total
    w = weights / total
    keep = w > 0
    share, w = share[:, keep], w[keep]
    if w.size < 2:
        raise ValueError("need at least two components with positive weight")
    dof = (w.size - 1) * (p - 1)
    if form == "pearson":
        expected = n * w / p
        stat = float(np.sum((n * share - expected) ** 2 / expected))
    elif form == "literal":
        stat = float(n / p * np.sum((share - w) ** 2 / w))
    else:
        raise ValueError(f"unknown form {form!r}; expected 'pearson' or 'literal'")
    return stat, dof


def _resolve_n(n, weights):
    if n is None or n == "effective":
        return effective_sample_size(weights)
    if n == "raw":
        return float(np.count_nonzero(weights))
    n = float(n)
    if not n > 0:
        raise ValueError("sample size must be positive")
    return n


def pearson_eqprop(composite, p=5, n=None, form="pearson"):
    """Equality-of-proportions test of a decomposition.

    Parameters
    ----------
    composite : CompositeDensity or QuintileTable
        A decomposition (its grid curves are used) or a ready-made table.
    p : int
        Number of composite quantile intervals; ignored for a table.
    n : float, "effective" or "raw", optional
        Sample-size scale.  The default is the Kish effective size of the
        mixture weights; a table input needs an explicit number.
    form : {"pearson", "literal"}

    Returns
    -------
    EqPropResult
        Without bootstrap fields.
    """
    if isinstance(composite, QuintileTable):
        table = composite
        if n is None or isinstance(n, str):
            raise ValueError("a quintile table needs an explicit sample size")
        n_val = float(n)
    else:
        if len(composite.components) < 2:
            raise ValueError("need at least two components")
        table = quintile_table(composite, p)
        if composite.mixture is not None:
            n_val = _resolve_n(n, composite.mixture.weights)
        elif n is None or isinstance(n, str):
            raise ValueError("decomposition without a mixture needs an explicit sample size")
        else:
            n_val = float(n)
    stat, dof = pearson_from_table(table, n_val, form)
    return EqPropResult(stat, dof, chi2_sf(stat, dof), n_val)


# -- bootstrap -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Pipeline:
    """Array view of a dataset for rebuilding weights and mixtures quickly."""

    values: np.ndarray
    paper: np.ndarray
    multiplicity: np.ndarray
    quality: np.ndarray
    allows_negative: np.ndarray
    labels: np.ndarray
    levels: tuple
    scheme: str
    policy: CensorPolicy
    assignment: KernelAssignment
    bandwidth: object
    p: int
    n: object
    form: str

    @classmethod
    def from_dataset(cls, dataset, group_by, p, kernel, bandwidth, n, form):
        recs = dataset.records
        _, paper = np.unique([r.paper_id for r in recs], return_inverse=True)
        base = dataset.values if dataset.raw_values is None else dataset.raw_values
        labels = dataset.factor(group_by)
        return cls(
            values=np.asarray(base, dtype=float),
            paper=paper,
            multiplicity=np.array([r.favored_multiplicity for r in recs], dtype=float),
            quality=np.array([quality_score(r) for r in recs], dtype=float),
            allows_negative=np.array([r.allows_negative for r in recs], dtype=bool),
            labels=labels,
            levels=tuple(_ordered_levels(group_by, labels)),
            scheme=dataset.scheme,
            policy=dataset.policy,
            assignment=KernelAssignment.preset(kernel),
            bandwidth=bandwidth,
            p=p,
            n=n,
            form=form,
        )

    def weights(self, idx):
        # mirrors data_model.compute_weights on a resample
        values = self.values[idx]
        if self.policy.mode == "winsorize":
            values = winsorize(values, self.policy)
        raw = np.ones(idx.size)
        if self.scheme != "none":
            _, paper = np.unique(self.paper[idx], return_inverse=True)
            share = np.ones(idx.size) if self.scheme == "paper" else self.multiplicity[idx]
            raw = share / np.bincount(paper, weights=share)[paper]
            if self.scheme == "quality":
                raw = raw * self.quality[idx]
        if self.policy.mode == "censor":
            raw = raw * censor_factor(values, self.policy)
        total = raw.sum()
        return values, (raw / total if total > 0 else raw)

    def statistic(self, idx, labels):
        values, weights = self.weights(idx)
        keep = weights > 0
        if np.count_nonzero(keep) < 2:
            return None
        values, weights, labels = values[keep], weights[keep], labels[keep]
        if np.ptp(values) == 0:
            return None
        present = [lv for lv in self.levels if np.any(labels == lv)]
        if len(present) < 2:
            return None
        families = self.assignment.resolve(self.allows_negative[idx][keep], values)
        try:
            h = select_bandwidth(values, weights, self.bandwidth, self.assignment.transformed)
        except ValueError:
            return None
        mix = KernelMixture(values, weights, families, h, self.assignment.centering)
        table = mixture_quintile_table(mix, labels, present, self.p)
        stat, _ = pearson_from_table(table, _resolve_n(self.n, weights), self.form)
        return stat


def _replicate(pipe, seed, b, draw_probs):
    rng = replicate_rng(seed, b)
    size = pipe.values.size
    redraws = 0
    while True:
        idx = rng.choice(size, size=size, replace=True, p=draw_probs)
        labels = rng.permutation(pipe.labels)
        stat = pipe.statistic(idx, labels)
        if stat is not None:
            return stat, redraws
        redraws += 1
        if redraws > _MAX_REDRAWS:
            raise ArithmeticError(f"replicate {b}: no usable resample after {_MAX_REDRAWS} draws")


def _replicate_batch(args):
    pipe, seed, indices, draw_probs = args
    return [_replicate(pipe, seed, b, draw_probs) for b in indices]


def bootstrap_criticals(dataset, group_by, p=5, B=1000, seed=0, kernel="gumbel-weibull",
                        bandwidth="sd", n=None, form="pearson", draw="uniform", workers=1,
                        observed=None):
    """Bootstrap reference distribution for the equality-of-proportions statistic.

    Each replicate resamples records uniformly with replacement (``draw=
    "weighted"`` uses the current weights instead), permutes the original
    group labels over the resample, rebuilds weights with the dataset's
    scheme and censor policy, refits bandwidth and kernels, and recomputes the
    statistic with exact kernel CDFs.  Resamples without spread or with fewer
    than two groups are redrawn and counted.

    Parameters
    ----------
    dataset : Dataset
        Weighted as produced by :meth:`Dataset.reweighted`.
    group_by : str
        Factor name.
    B : int
        Number of replicates; ``B=1`` is allowed for smoke tests.
    seed : int
        Required; replicate ``b`` uses :func:`replicate_rng` ``(seed, b)``.
    workers : int
        Process count; the output does not depend on it.
    observed : float, optional
        Observed statistic.  Computed from ``dataset`` with the same exact
        path as the replicates when omitted.

    Returns
    -------
    EqPropResult
    """
    if seed is None:
        raise ValueError("a seed is required for bootstrap runs")
    if B < 1:
        raise ValueError("B must be positive")
    pipe = _Pipeline.from_dataset(dataset, group_by, p, kernel, bandwidth, n, form)
    all_idx = np.arange(len(dataset))
    if observed is None:
        observed = pipe.statistic(all_idx, pipe.labels)
        if observed is None:
            raise ValueError(f"factor {group_by!r} needs at least two groups with positive weight")
    present = [lv for lv in pipe.levels if dataset.weights[pipe.labels == lv].sum() > 0]
    dof = (len(present) - 1) * (p - 1)
    if draw == "uniform":
        draw_probs = None
    elif draw == "weighted":
        draw_probs = dataset.weights / dataset.weights.sum()
    else:
        raise ValueError(f"unknown draw {draw!r}; expected 'uniform' or 'weighted'")

    if workers > 1 and B > 1:
        chunks = [list(range(k, B, workers)) for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_replicate_batch, [(pipe, seed, c, draw_probs) for c in chunks]))
        results = [None] * B
        for c, part in zip(chunks, parts):
            for b, r in zip(c, part):
                results[b] = r
    else:
        results = [_replicate(pipe, seed, b, draw_probs) for b in range(B)]
    stats = np.array([r[0] for r in results])
    redraws = int(sum(r[1] for r in results))
    if redraws:
        logger.warning("%d degenerate resamples were redrawn", redraws)
    criticals = {lv: float(np.quantile(stats, 1.0 - lv)) for lv in LEVELS}
    n_val = _resolve_n(n, dataset.weights)
    return EqPropResult(
        statistic=float(observed),
        dof=dof,
        p_asymptotic=chi2_sf(float(observed), dof),
        n=n_val,
        bootstrap_criticals=criticals,
        bootstrap_p=float(np.mean(stats >= observed)),
        B=B,
        seed=int(seed),
        redraws=redraws,
        replicates=stats,
    )


# -- Kolmogorov-Smirnov -----------------------------------------------------------

def _curve_of(obj):
    return obj.curve if hasattr(obj, "curve") else obj


def ks_subsample(component, composite, p, n_eff):
    """KS comparison of a normalised component with the composite.

    ``D`` is the largest gap ``|F_j(q_k) - k/p|`` over the ``p - 1`` interior
    composite quantiles ``q_k``; the p-value is the asymptotic Kolmogorov
    tail at ``sqrt(n_eff) * D``.
    """
    comp = _curve_of(component)
    whole = _curve_of(composite)
    if not comp.mass > 0:
        raise ValueError("empty component")
    if not n_eff > 0:
        raise ValueError("n_eff must be positive")
    if p < 2:
        raise ValueError("need at least two quantile intervals")
    cuts = quantiles(whole, p)
    pts, cum = comp.grid.points, comp.cumulative
    fj = np.interp(cuts, pts, cum) / comp.mass
    D = float(np.max(np.abs(fj - np.arange(1, p) / p)))
    D = min(max(D, 0.0), 1.0)
    return KSResult(D, float(n_eff), kolmogorov_sf(math.sqrt(n_eff) * D), int(p))


def ks_table(composite, resolutions=KS_RESOLUTIONS):
    """KS p-values for every component and resolution.

    Returns ``{label: {p: KSResult}}``; each component's sample size is the
    effective size of its own weights.
    """
    mix, labels = composite.mixture, composite.labels
    if mix is None or labels is None:
        raise ValueError("decomposition must carry its mixture and labels")
    out = {}
    for c in composite.components:
        n_eff = effective_sample_size(mix.weights[labels == c.label])
        out[c.label] = {p: ks_subsample(c, composite.composite, p, n_eff) for p in resolutions}
    return out


# -- density band ---------------------------------------------------------------

def density_band(dataset, kernel="gumbel-weibull", bandwidth="sd", B=1000, seed=0,
                 grid=None, grid_size=1024, level=0.95):
    """Pointwise bootstrap band for the composite density.

    Replicates resample records with replacement and keep each record's
    original weight, so replicate masses vary around one.  Bandwidth and
    kernel assignment are fixed at the full-sample choice; each replicate is
    a count-weighted sum of precomputed kernel columns.
    """
    if seed is None:
        raise ValueError("a seed is required for bootstrap runs")
    if B < 1:
        raise ValueError("B must be positive")
    mix = fit_mixture(dataset, kernel, bandwidth)
    if grid is None:
        grid = Grid.for_data(mix.centers, _grid_scale(mix), grid_size)
    pts = grid.points
    n = mix.centers.size
    wK = mix.weights[:, None] * mix.kernel_matrix(pts)
    estimate = np.sum(wK, axis=0)
    size = len(dataset)
    pos = np.full(size, -1)
    pos[mix.source_index] = np.arange(n)
    reps = np.empty((B, pts.size))
    for b in range(B):
        rng = replicate_rng(seed, b)
        draws = rng.integers(0, size, size=size)
        counts = np.bincount(pos[draws][pos[draws] >= 0], minlength=n).astype(float)
        reps[b] = np.sum(counts[:, None] * wK, axis=0)
    alpha = (1.0 - level) / 2.0
    lower = np.quantile(reps, alpha, axis=0)
    upper = np.quantile(reps, 1.0 - alpha, axis=0)
    return DensityBand(grid, lower, upper, estimate, B, int(seed))

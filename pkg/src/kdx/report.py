"""Table and figure writers for the command-line front end.

Every table builder returns CSV text with fixed row and column labels and
fixed number formats, so reruns with the same inputs are byte-identical.
Figures are small hand-written SVG files; the CSVs are the outputs of record.
"""

from __future__ import annotations

import math

import numpy as np

from .data_model import PERIODS, DatasetError, quality_score
from .density import (
    LEVIATHAN_TAIL,
    decompose,
    mise,
    moments,
    tail_probs,
)
from .inference import KS_RESOLUTIONS, LEVELS, bootstrap_criticals, ks_table
from .regression import QUANTILES, RankError, build_design, quantile_reg, wls, year_fixed_effects
from .special import chi2_sf

__all__ = [
    "MAIN_PRTP",
    "KERNEL_VARIANTS",
    "filter_dataset",
    "weighted_moments",
    "table_means",
    "table_kernel_means",
    "table_kernel_variants",
    "table_tests",
    "table_ks",
    "table_regress",
    "year_effects_csv",
    "means_by_year",
    "standardized_csv",
    "curves_csv",
    "bootstrap_cdf_csv",
    "band_csv",
    "svg_lines",
    "svg_stacked",
]

# PRTP levels with observations in every period
MAIN_PRTP = ("3.0", "2.0", "1.0", "0.0")

# kernel variant columns: (header, kernel preset, bandwidth rule)
KERNEL_VARIANTS = (
    ("Normal Silverman", "normal", "silverman"),
    ("Normal", "normal", "sd"),
    ("Johnson SU Silverman", "johnson-su", "silverman"),
    ("Johnson SU", "johnson-su", "sd"),
    ("Normal Normal", "normal-knotted", "sd"),
    ("Gumbel Normal", "gumbel-knotted", "sd"),
    ("Gumbel Weibull", "gumbel-weibull", "sd"),
)


def _f(value, digits=4):
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return "NA"
    return f"{value:.{digits}f}"


def _csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def _prtp_label(level):
    return f"{float(level):g}%"


# -- dataset helpers -------------------------------------------------------------

def _match(record, period, key, value):
    if key == "prtp":
        if value == "other" or record.prtp == "other":
            return record.prtp == value
        return float(record.prtp) == float(value)
    if key == "period":
        return period == value
    if key in ("author", "author_group"):
        return record.author_group == value
    if key == "pigou":
        return record.pigou == (value.lower() in ("1", "true", "pigou", "yes"))
    raise DatasetError(f"unknown filter key {key!r}; expected prtp, period, author or pigou")


def filter_dataset(dataset, filters, scheme, policy):
    """Records matching every ``key=value`` filter, with weights rebuilt."""
    mask = np.ones(len(dataset), dtype=bool)
    for key, value in filters:
        mask &= np.array([_match(r, p, key, value)
                          for r, p in zip(dataset.records, dataset.periods)])
    if not mask.any():
        raise DatasetError(f"no records match filters {filters}")
    return dataset.where(mask).reweighted(scheme, policy)


def weighted_moments(values, weights):
    w = np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    w = w / w.sum()
    mean = float(np.sum(w * v))
    return mean, float(math.sqrt(max(float(np.sum(w * (v - mean) ** 2)), 0.0)))


# -- density tables --------------------------------------------------------------

def table_means(dataset, kernel="gumbel-weibull", bandwidth="sd", grid_size=4096):
    """Empirical and kernel mean (sd) by PRTP; kernel values are moments of
    the normalised components of the decomposition by PRTP."""
    dec = decompose(dataset, "prtp", kernel, bandwidth, grid_size=grid_size)
    labels = dataset.factor("prtp")
    rows = []
    for level in MAIN_PRTP + ("all",):
        if level == "all":
            sel = dataset.weights > 0
            km, ks = moments(dec.composite)
        else:
            sel = (labels == level) & (dataset.weights > 0)
            if level not in dec.levels:
                rows.append([_prtp_label(level), "NA", "NA", "NA", "NA"])
                continue
            km, ks = moments(dec.component(level).curve)
        em, es = weighted_moments(dataset.values[sel], dataset.weights[sel])
        name = "all" if level == "all" else _prtp_label(level)
        rows.append([name, _f(em, 1), _f(es, 1), _f(km, 1), _f(ks, 1)])
    return _csv(["prtp", "empirical_mean", "empirical_sd", "kernel_mean", "kernel_sd"], rows), dec


def table_kernel_means(dataset, kernel="gumbel-weibull", bandwidth="sd", grid_size=4096):
    """Kernel mean by PRTP (rows) and publication period (columns).

    The ``any`` row decomposes the whole sample by period; each PRTP row
    decomposes the records with that PRTP, weights rebuilt on the subset.
    """
    rows = []
    for level in ("any",) + MAIN_PRTP:
        if level == "any":
            sub = dataset
            name = "any"
        else:
            name = _prtp_label(level)
            try:
                sub = filter_dataset(dataset, [("prtp", level)], dataset.scheme, dataset.policy)
            except DatasetError:
                rows.append([name] + ["NA"] * len(PERIODS))
                continue
        dec = decompose(sub, "period", kernel, bandwidth, grid_size=grid_size)
        cells = []
        for period in PERIODS:
            if period in dec.levels:
                cells.append(_f(moments(dec.component(period).curve)[0], 1))
            else:
                cells.append("NA")
        rows.append([name] + cells)
    return _csv(["prtp"] + list(PERIODS), rows)


def table_kernel_variants(dataset, grid_size=4096, upper=LEVIATHAN_TAIL):
    """Mean, tail probabilities and MISE for alternative kernels and bandwidths."""
    pos = dataset.weights > 0
    values, weights = dataset.values[pos], dataset.weights[pos]
    cols, notes = [], []
    for header, kernel, bandwidth in KERNEL_VARIANTS:
        dec = decompose(dataset, "period", kernel, bandwidth, grid_size=grid_size)
        curve = dec.composite
        lost = curve.mass - float(curve.cumulative[-1])
        if lost > 1e-6:
            notes.append(f"{header}: mass {lost:.3g} beyond the grid")
        below, above = tail_probs(curve, upper)
        cols.append((header, moments(curve)[0], below, above, mise(curve, values, weights)))
    w = weights / weights.sum()
    cols.append(("Observed", float(np.sum(w * values)), float(np.sum(w[values < 0])),
                 float(np.sum(w[values > upper])), 0.0))
    header = [""] + [c[0] for c in cols]
    rows = [
        ["Average"] + [_f(c[1], 1) for c in cols],
        ["P(SCC<0)"] + [_f(c[2]) for c in cols],
        [f"P(SCC>{upper:g})"] + [_f(c[3]) for c in cols],
        ["MISE"] + [_f(c[4]) for c in cols],
    ]
    return _csv(header, rows), notes


def curves_csv(dec):
    """Grid, composite and component densities side by side."""
    header = ["x", "composite"] + list(dec.levels)
    pts = dec.composite.grid.points
    cols = [dec.composite.values] + [c.curve.values for c in dec.components]
    rows = ([f"{x:.6g}"] + [f"{col[i]:.6e}" for col in cols] for i, x in enumerate(pts))
    return _csv(header, rows)


# -- tests ----------------------------------------------------------------------

def table_tests(dataset, group_by="period", kernel="gumbel-weibull", bandwidth="sd", p=5,
                B=1000, seed=0, workers=1):
    """Pearson statistic, asymptotic p and bootstrap criticals for the whole
    sample and for each main PRTP level.  Returns the CSV and the per-row
    results."""
    rows, results = [], {}
    levels = ("All",) if group_by == "prtp" else ("All",) + MAIN_PRTP
    for level in levels:
        if level == "All":
            sub, name = dataset, "All"
        else:
            name = f"PRTP = {_prtp_label(level)}"
            try:
                sub = filter_dataset(dataset, [("prtp", level)], dataset.scheme, dataset.policy)
            except DatasetError:
                rows.append([name] + ["NA"] * 6)
                continue
        try:
            res = bootstrap_criticals(sub, group_by, p, B, seed, kernel, bandwidth, workers=workers)
        except ValueError:
            rows.append([name] + ["NA"] * 6)
            continue
        results[name] = res
        crit = res.bootstrap_criticals
        rows.append([name, _f(res.statistic, 2), _f(res.p_asymptotic, 2)]
                    + [_f(crit[lv], 2) for lv in LEVELS] + [_f(res.bootstrap_p, 3)])
    header = ["", "statistic", "p_value", "crit_10", "crit_05", "crit_01", "bootstrap_p"]
    return _csv(header, rows), results


def table_ks(dec, resolutions=KS_RESOLUTIONS):
    table = ks_table(dec, resolutions)
    rows = [[label] + [_f(table[label][p].p_value) for p in resolutions] for label in dec.levels]
    return _csv([""] + [str(p) for p in resolutions], rows)


def bootstrap_cdf_csv(result):
    """Sorted bootstrap statistics with their empirical CDF and chi-square tail."""
    stats = np.sort(result.replicates)
    n = stats.size
    rows = [[f"{s:.6f}", f"{(i + 1) / n:.6f}", f"{chi2_sf(float(s), result.dof):.6f}"]
            for i, s in enumerate(stats)]
    return _csv(["statistic", "bootstrap_cdf", "asymptotic_p"], rows)


def band_csv(band):
    rows = ([f"{x:.6g}", f"{e:.6e}", f"{lo:.6e}", f"{hi:.6e}"]
            for x, e, lo, hi in zip(band.grid.points, band.estimate, band.lower, band.upper))
    return _csv(["x", "estimate", "lower", "upper"], rows)


# -- regression ----------------------------------------------------------------

def _stars(coef, se):
    if not (math.isfinite(se) and se > 0):
        return ""
    z = abs(coef / se)
    # two-sided normal critical values for 1%, 5%, 10%
    return "***" if z > 2.5758 else "**" if z > 1.96 else "*" if z > 1.6449 else ""


def _coef_cells(res, name):
    if res is None:
        return ["NA", "NA", ""]
    c, s = res.coef(name), res.stderr(name)
    return [f"{c:.4g}", f"{s:.4g}", _stars(c, s)]


def table_regress(dataset, schemes=("paper", "author", "quality"), quantiles=QUANTILES,
                  B=200, seed=0, policy=None):
    """WLS and quantile regressions on PRTP and year, and on year only,
    for each weight scheme.  Returns the CSV and notes on failures."""
    policy = dataset.policy if policy is None else policy
    rows, notes = [], []
    for scheme in schemes:
        ds = dataset.reweighted(scheme, policy)
        designs = (build_design(ds, ("prtp", "pub_year")), build_design(ds, ("pub_year",)))
        for tau in (None,) + tuple(quantiles):
            fits = []
            for d in designs:
                try:
                    fits.append(wls(d) if tau is None else quantile_reg(d, tau, B, seed))
                except RankError as exc:
                    notes.append(f"{scheme} tau={tau}: {exc}")
                    fits.append(None)
            for f in fits:
                if f is not None and not f.converged:
                    notes.append(f"{scheme} tau={tau}: quantile regression not converged")
            rows.append([scheme, "mean" if tau is None else f"{tau:g}"]
                        + _coef_cells(fits[0], "prtp") + _coef_cells(fits[0], "pub_year")
                        + _coef_cells(fits[1], "pub_year"))
    header = ["weight", "quantile", "prtp", "prtp_se", "prtp_sig", "year", "year_se",
              "year_sig", "year_only", "year_only_se", "year_only_sig"]
    return _csv(header, rows), notes


def year_effects_csv(dataset):
    fe = year_fixed_effects(dataset)
    rows = [[str(y), f"{e:.4f}", f"{h:.4f}"]
            for y, e, h in zip(fe.years, fe.effects, fe.half_width)]
    return _csv(["year", f"effect_vs_{fe.base_year}", "half_width_67"], rows), fe


# -- descriptive -----------------------------------------------------------------

def means_by_year(dataset):
    """Weighted mean and sd per publication year, reported and standardised."""
    years = np.array([r.pub_year for r in dataset.records])
    reported = np.array([r.scc_reported for r in dataset.records])
    rows = []
    for yr in np.unique(years):
        sel = (years == yr) & (dataset.weights > 0)
        if not sel.any():
            continue
        rm, rs = weighted_moments(reported[sel], dataset.weights[sel])
        sm, ss = weighted_moments(dataset.values[sel], dataset.weights[sel])
        rows.append([str(yr), str(int(sel.sum())), _f(rm, 2), _f(rs, 2), _f(sm, 2), _f(ss, 2)])
    header = ["year", "n", "reported_mean", "reported_sd", "standardized_mean", "standardized_sd"]
    return _csv(header, rows)


def standardized_csv(dataset):
    rows = []
    for r, period, v, w in zip(dataset.records, dataset.periods, dataset.values, dataset.weights):
        q = quality_score(r)
        rows.append([r.paper_id, str(r.pub_year), period, r.prtp, repr(float(r.scc_reported)),
                     f"{v:.6f}", f"{w:.8e}", str(q)])
    header = ["paper_id", "pub_year", "period", "prtp", "scc_reported", "scc_standardized",
              "weight", "quality"]
    return _csv(header, rows)


# -- SVG ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
            "#7f7f7f")
_W, _H, _M = 640, 400, 50


def _scale(lo, hi, a, b):
    span = (hi - lo) or 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{_M}" y1="{_H - _M}" x2="{_W - 10}" y2="{_H - _M}" stroke="black"/>',
           f'<line x1="{_M}" y1="{_H - _M}" x2="{_M}" y2="20" stroke="black"/>',
           f'<text x="{_W / 2:.1f}" y="{_H - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="14" y="{_H / 2:.1f}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {_H / 2:.1f})">{ylabel}</text>',
           f'<text x="{_M}" y="{_H - _M + 15}" font-size="10">{xlo:.4g}</text>',
           f'<text x="{_W - 10}" y="{_H - _M + 15}" text-anchor="end" font-size="10">{xhi:.4g}</text>',
           f'<text x="{_M - 4}" y="{_H - _M}" text-anchor="end" font-size="10">{ylo:.3g}</text>',
           f'<text x="{_M - 4}" y="30" text-anchor="end" font-size="10">{yhi:.3g}</text>']
    return out


def _legend(labels):
    out = []
    for i, lab in enumerate(labels):
        y = 35 + 14 * i
        col = _PALETTE[i % len(_PALETTE)]
        out.append(f'<rect x="{_W - 150}" y="{y - 9}" width="10" height="10" fill="{col}"/>')
        out.append(f'<text x="{_W - 135}" y="{y}" font-size="10">{lab}</text>')
    return out


def svg_lines(series, title="", xlabel="", ylabel="", markers=False):
    """Line (or marker) plot of ``[(label, x, y), ...]``."""
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    xlo, xhi = float(xs.min()), float(xs.max())
    ylo, yhi = min(0.0, float(ys.min())), float(ys.max())
    sx, sy = _scale(xlo, xhi, _M, _W - 10), _scale(ylo, yhi, _H - _M, 30)
    out = _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi)
    for i, (label, x, y) in enumerate(series):
        col = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        if markers:
            out += [f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="2.5" fill="{col}"/>'
                    for a, b in zip(x, y)]
        else:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
    out += _legend([s[0] for s in series])
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_stacked(dec, title="", xlabel="$/tC", ylabel="density", xmax=None):
    """Stacked areas of the components with the composite on top."""
    x = dec.composite.grid.points
    keep = np.ones(x.size, dtype=bool) if xmax is None else x <= xmax
    x = x[keep]
    layers = np.cumsum([c.curve.values[keep] for c in dec.components], axis=0)
    xlo, xhi = float(x.min()), float(x.max())
    yhi = float(layers[-1].max()) or 1.0
    sx, sy = _scale(xlo, xhi, _M, _W - 10), _scale(0.0, yhi, _H - _M, 30)
    out = _frame(title, xlabel, ylabel, xlo, xhi, 0.0, yhi)
    lower = np.zeros(x.size)
    step = max(1, x.size // 400)
    idx = np.arange(0, x.size, step)
    for i, upper in enumerate(layers):
        col = _PALETTE[i % len(_PALETTE)]
        top = " ".join(f"{sx(x[k]):.2f},{sy(upper[k]):.2f}" for k in idx)
        bottom = " ".join(f"{sx(x[k]):.2f},{sy(lower[k]):.2f}" for k in idx[::-1])
        out.append(f'<polygon points="{top} {bottom}" fill="{col}" fill-opacity="0.7" stroke="none"/>')
        lower = upper
    out += _legend(dec.levels)
    out.append("</svg>")
    return "\n".join(out) + "\n"


"""Estimates dataset: parsing, standardisation, weighting and censoring.

Reported social-cost-of-carbon estimates are brought to a common basis
(2010 dollars, emissions in 2010) and weighted by paper, by author
preference or by quality.  Implausibly large values are either censored
(weights discounted linearly above the Leviathan tax and zeroed above the
income bound) or winsorized.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "COLUMNS",
    "PERIODS",
    "PRTP_LEVELS",
    "AUTHOR_GROUPS",
    "WEIGHT_SCHEMES",
    "QUALITY_FLAGS",
    "DatasetError",
    "EstimateRecord",
    "DeflatorSeries",
    "StandardizationConfig",
    "CensorPolicy",
    "Dataset",
    "parse_deflator",
    "parse_dataset",
    "assign_period",
    "standardize",
    "quality_score",
    "censor_factor",
    "winsorize",
    "compute_weights",
    "effective_sample_size",
]

COLUMNS = (
    "paper_id", "author_group", "pub_year", "scc_reported", "dollar_year",
    "emission_year", "prtp", "allows_negative", "favored_multiplicity",
    "peer_reviewed", "scenario_based", "true_marginal", "vulnerability_varies",
    "new_impact", "pigou", "growth_rate",
)
QUALITY_FLAGS = ("peer_reviewed", "scenario_based", "true_marginal",
                 "vulnerability_varies", "new_impact")
AUTHOR_GROUPS = ("Hope", "Nordhaus", "Ploeg", "Tol", "Other")
PRTP_LEVELS = ("3.0", "2.0", "1.5", "1.0", "0.1", "0.0", "other")
PERIODS = ("1982-1995", "1996-2001", "2002-2006", "2007-2013", "2014-2017", "2018-2021")
_PERIOD_BOUNDS = ((1982, 1995), (1996, 2001), (2002, 2006), (2007, 2013),
                  (2014, 2017), (2018, 2021))
FIRST_YEAR, LAST_YEAR = 1982, 2021
WEIGHT_SCHEMES = ("none", "paper", "author", "quality")
CENSOR_MODES = ("none", "censor", "winsorize")

DEFAULT_INFLATION = 0.029
DEFAULT_GROWTH = 0.022


class DatasetError(ValueError):
    """Schema or validation failure; ``problems`` lists one message per issue."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class EstimateRecord:
    paper_id: str
    author_group: str
    pub_year: int
    scc_reported: float
    dollar_year: int
    emission_year: int
    prtp: str
    allows_negative: bool
    favored_multiplicity: int
    peer_reviewed: int
    scenario_based: int
    true_marginal: int
    vulnerability_varies: int
    new_impact: int
    pigou: bool
    growth_rate: float | None = None

    def problems(self):
        """Return a list of invariant violations (empty when valid)."""
        out = []
        if self.author_group not in AUTHOR_GROUPS:
            out.append(f"author_group {self.author_group!r} not in {AUTHOR_GROUPS}")
        if not FIRST_YEAR <= self.pub_year <= LAST_YEAR:
            out.append(f"pub_year {self.pub_year} outside [{FIRST_YEAR}, {LAST_YEAR}]")
        if self.dollar_year > self.pub_year + 1:
            out.append(f"dollar_year {self.dollar_year} after pub_year + 1")
        if self.favored_multiplicity < 1:
            out.append(f"favored_multiplicity {self.favored_multiplicity} < 1")
        for name in QUALITY_FLAGS:
            if getattr(self, name) not in (0, 1):
                out.append(f"{name} must be 0 or 1")
        if not math.isfinite(self.scc_reported):
            out.append("scc_reported is not finite")
        if self.prtp not in PRTP_LEVELS:
            out.append(f"prtp {self.prtp!r} not in {PRTP_LEVELS}")
        if self.growth_rate is not None and not self.growth_rate > -100.0:
            out.append(f"growth_rate {self.growth_rate} must exceed -100 %/yr")
        return out


# -- standardisation -----------------------------------------------------------

@dataclass(frozen=True)
class DeflatorSeries:
    """Year -> price index.  Years outside the table use ``fallback_rate``
    compounding from the nearest tabulated year, or raise if it is None."""

    index: dict = field(default_factory=dict)
    fallback_rate: float | None = DEFAULT_INFLATION

    def __post_init__(self):
        if any(not v > 0 for v in self.index.values()):
            raise DatasetError("deflator indices must be positive")

    def __call__(self, year):
        year = int(year)
        if year in self.index:
            return float(self.index[year])
        if self.fallback_rate is None:
            raise DatasetError(f"no deflator for year {year} and no fallback rate")
        if not self.index:
            return (1.0 + self.fallback_rate) ** (year - 2010)
        anchor = min(self.index, key=lambda y: (abs(y - year), y))
        return self.index[anchor] * (1.0 + self.fallback_rate) ** (year - anchor)


@dataclass(frozen=True)
class StandardizationConfig:
    target_dollar_year: int = 2010
    target_emission_year: int = 2010
    growth_rate: float = DEFAULT_GROWTH
    deflator: DeflatorSeries = field(default_factory=DeflatorSeries)
    use_record_growth: bool = False

    def __post_init__(self):
        if not self.growth_rate > -1:
            raise ValueError("growth_rate must exceed -1")


def standardize(record, config=StandardizationConfig()):
    """Reported SCC in target-year dollars for target-year emissions.

    ``scc * P(target) / P(dollar_year) * (1 + g) ** (target_emission - emission_year)``.
    With ``config.use_record_growth`` the record's own growth rate (in %/yr)
    replaces ``g`` where one is given.
    """
    g = config.growth_rate
    if config.use_record_growth and record.growth_rate is not None:
        g = record.growth_rate / 100.0
    defl = config.deflator
    price = defl(config.target_dollar_year) / defl(record.dollar_year)
    years = config.target_emission_year - record.emission_year
    return record.scc_reported * price * (1.0 + g) ** years


def assign_period(pub_year):
    """Publication period label; both printed endpoints are inclusive."""
    for label, (lo, hi) in zip(PERIODS, _PERIOD_BOUNDS):
        if lo <= pub_year <= hi:
            return label
    raise ValueError(f"publication year {pub_year} outside [{FIRST_YEAR}, {LAST_YEAR}]")


def quality_score(record):
    return sum(int(getattr(record, name)) for name in QUALITY_FLAGS)


# -- censoring -------------------------------------------------------------------

@dataclass(frozen=True)
class CensorPolicy:
    """How to treat implausibly large estimates ($/tC, standardised)."""

    mode: str = "censor"
    income_bound: float = 7609.0
    leviathan_bound: float = 1141.0
    winsor_value: float = 7482.0

    def __post_init__(self):
        if self.mode not in CENSOR_MODES:
            raise ValueError(f"censor mode must be one of {CENSOR_MODES}, got {self.mode!r}")
        if not self.leviathan_bound < self.winsor_value < self.income_bound:
            raise ValueError("need leviathan_bound < winsor_value < income_bound")


def censor_factor(x, policy=CensorPolicy()):
    """Weight multiplier: 1 up to the Leviathan bound, linear down to 0 at the
    income bound, 0 beyond.  Works elementwise on arrays."""
    lo, hi = policy.leviathan_bound, policy.income_bound
    arr = np.asarray(x, dtype=float)
    out = np.clip((hi - arr) / (hi - lo), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def winsorize(x, policy=CensorPolicy(mode="winsorize")):
    arr = np.asarray(x, dtype=float)
    out = np.minimum(arr, policy.winsor_value)
    return float(out) if out.ndim == 0 else out


def effective_sample_size(weights):
    """Kish effective sample size ``(sum w)^2 / sum w^2``."""
    w = np.asarray(weights, dtype=float)
    s2 = float(np.sum(w * w))
    if s2 == 0:
        return 0.0
    return float(np.sum(w)) ** 2 / s2


# -- dataset ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dataset:
    """Validated records with standardised values and normalised weights.

    Column arrays are kept alongside the records so that resampling and
    reweighting stay vectorised.  ``scheme`` and ``policy`` describe how the
    current weights were built.
    """

    records: tuple
    values: np.ndarray
    weights: np.ndarray
    periods: tuple
    scheme: str = "none"
    policy: CensorPolicy = CensorPolicy(mode="none")
    raw_values: np.ndarray | None = None
    warnings: tuple = ()

    def __len__(self):
        return len(self.records)

    def column(self, name):
        """Per-record attribute as a numpy array (``period`` included)."""
        if name == "period":
            return np.asarray(self.periods)
        if name == "quality":
            return np.array([quality_score(r) for r in self.records], dtype=float)
        return np.array([getattr(r, name) for r in self.records])

    def factor(self, name):
        """Labels of a grouping factor: period, prtp, author or pigou."""
        if name == "period":
            return np.asarray(self.periods)
        if name == "prtp":
            return np.array([r.prtp for r in self.records])
        if name in ("author", "author_group"):
            return np.array([r.author_group for r in self.records])
        if name == "pigou":
            return np.array(["pigou" if r.pigou else "arbitrary" for r in self.records])
        raise ValueError(f"unknown factor {name!r}")

    def take(self, indices):
        """Subset (or resample, with repeats) by integer positions.

        Weights are carried over unchanged; call :meth:`reweighted` to rebuild
        them for the subset.
        """
        idx = np.asarray(indices, dtype=int)
        raw = None if self.raw_values is None else self.raw_values[idx]
        return replace(
            self,
            records=tuple(self.records[i] for i in idx),
            values=self.values[idx],
            weights=self.weights[idx],
            periods=tuple(self.periods[i] for i in idx),
            raw_values=raw,
        )

    def where(self, mask):
        return self.take(np.flatnonzero(np.asarray(mask, dtype=bool)))

    def reweighted(self, scheme="quality", policy=CensorPolicy()):
        """New dataset with winsorizing applied (if asked) and weights rebuilt."""
        base = self.values if self.raw_values is None else self.raw_values
        values = winsorize(base, policy) if policy.mode == "winsorize" else base.copy()
        ds = replace(self, values=np.asarray(values, dtype=float), raw_values=base,
                     scheme=scheme, policy=policy)
        return replace(ds, weights=compute_weights(ds, scheme, policy))


def compute_weights(dataset, scheme="quality", policy=CensorPolicy()):
    """Normalised estimate weights.

    none: 1 per estimate.  paper: each paper's estimates share a total of 1.
    author: as paper, split in proportion to ``favored_multiplicity``.
    quality: author weight times the quality score.  Censoring multiplies by
    :func:`censor_factor` of the standardised value before normalising.
    """
    if scheme not in WEIGHT_SCHEMES:
        raise ValueError(f"weight scheme must be one of {WEIGHT_SCHEMES}, got {scheme!r}")
    n = len(dataset)
    if n == 0:
        raise DatasetError("empty dataset")
    recs = dataset.records
    raw = np.ones(n)
    if scheme != "none":
        _, paper_idx = np.unique([r.paper_id for r in recs], return_inverse=True)
        if scheme == "paper":
            share = np.ones(n)
        else:
            share = np.array([r.favored_multiplicity for r in recs], dtype=float)
        totals = np.bincount(paper_idx, weights=share)
        raw = share / totals[paper_idx]
        if scheme == "quality":
            raw = raw * np.array([quality_score(r) for r in recs], dtype=float)
    if policy.mode == "censor":
        raw = raw * censor_factor(dataset.values, policy)
    total = raw.sum()
    if not total > 0:
        raise DatasetError("all weights are zero after weighting and censoring")
    return raw / total


# -- parsing ---------------------------------------------------------------------

def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _parse_prtp(text):
    t = text.strip()
    if t.lower() == "other":
        return "other"
    label = f"{float(t):.1f}"
    if label not in PRTP_LEVELS:
        raise ValueError(f"prtp {t!r} not in {PRTP_LEVELS}")
    return label


def _parse_optional_float(text):
    t = text.strip()
    return None if t == "" or t.lower() in ("na", "nan") else float(t)


_PARSERS = {
    "paper_id": str.strip,
    "author_group": str.strip,
    "pub_year": _parse_int,
    "scc_reported": float,
    "dollar_year": _parse_int,
    "emission_year": _parse_int,
    "prtp": _parse_prtp,
    "allows_negative": _parse_bool,
    "favored_multiplicity": _parse_int,
    "peer_reviewed": _parse_int,
    "scenario_based": _parse_int,
    "true_marginal": _parse_int,
    "vulnerability_varies": _parse_int,
    "new_impact": _parse_int,
    "pigou": _parse_bool,
    "growth_rate": _parse_optional_float,
}


def _read_rows(text, what):
    if text is None or not text.strip():
        raise DatasetError(f"{what} is empty")
    reader = csv.reader(io.StringIO(text.lstrip("﻿"), newline=""))
    rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise DatasetError(f"{what} is empty")
    return [c.strip() for c in rows[0]], rows[1:]


def parse_deflator(csv_text, fallback_rate=DEFAULT_INFLATION):
    """Parse a ``year,index`` CSV into a :class:`DeflatorSeries`."""
    header, rows = _read_rows(csv_text, "deflator file")
    if header != ["year", "index"]:
        raise DatasetError(f"deflator header must be 'year,index', got {','.join(header)!r}")
    table = {}
    problems = []
    for i, row in enumerate(rows, start=1):
        try:
            table[_parse_int(row[0])] = float(row[1])
        except (ValueError, IndexError) as exc:
            problems.append(f"deflator row {i}: {exc}")
    if problems:
        raise DatasetError(problems)
    return DeflatorSeries(index=table, fallback_rate=fallback_rate)


def parse_dataset(csv_text, deflator_csv=None, config=None):
    """Parse and validate an estimates CSV and standardise every record.

    Parameters
    ----------
    csv_text : str
        File contents with the exact header in :data:`COLUMNS`.
    deflator_csv : str, optional
        ``year,index`` table; without it prices inflate at 2.9 %/yr.
    config : StandardizationConfig, optional
        Overrides the deflator built from ``deflator_csv`` when given.

    Returns
    -------
    Dataset
        Equal weights, no censoring; use :meth:`Dataset.reweighted`.

    Raises
    ------
    DatasetError
        Missing columns, unparsable values or invariant violations.  All
        offending rows are reported, numbered from 1 after the header.
    """
    header, rows = _read_rows(csv_text, "estimates file")
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise DatasetError([f"missing column {c!r}" for c in missing])
    if tuple(header) != COLUMNS:
        raise DatasetError(f"columns out of order; expected {','.join(COLUMNS)}")
    if not rows:
        raise DatasetError("estimates file has no data rows")

    if config is None:
        deflator = parse_deflator(deflator_csv) if deflator_csv else DeflatorSeries()
        config = StandardizationConfig(deflator=deflator)

    records, problems = [], []
    for i, row in enumerate(rows, start=1):
        if len(row) != len(COLUMNS):
            problems.append(f"row {i}: expected {len(COLUMNS)} fields, got {len(row)}")
            continue
        fields = {}
        for name, cell in zip(COLUMNS, row):
            try:
                fields[name] = _PARSERS[name](cell)
            except ValueError as exc:
                problems.append(f"row {i}, column {name!r}: {exc}")
        if len(fields) != len(COLUMNS):
            continue
        rec = EstimateRecord(**fields)
        issues = rec.problems()
        if issues:
            problems.extend(f"row {i}: {msg}" for msg in issues)
            continue
        records.append(rec)
    if problems:
        raise DatasetError(problems)
    return build_dataset(records, config)


def build_dataset(records, config=StandardizationConfig()):
    """Standardise already-validated records into an equally weighted Dataset."""
    records = tuple(records)
    if not records:
        raise DatasetError("no records")
    values = np.array([standardize(r, config) for r in records], dtype=float)
    if not np.all(np.isfinite(values)):
        raise DatasetError("standardised values must be finite")
    warnings = []
    for i, (r, v) in enumerate(zip(records, values), start=1):
        if v <= 0 and not r.allows_negative:
            warnings.append(f"row {i}: nonpositive value {v:.4g} in a study without benefits")
    for msg in warnings:
        logger.warning(msg)
    n = len(records)
    return Dataset(
        records=records,
        values=values,
        weights=np.full(n, 1.0 / n),
        periods=tuple(assign_period(r.pub_year) for r in records),
        raw_values=values,
        warnings=tuple(warnings),
    )

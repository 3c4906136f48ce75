"""Synthetic estimate datasets shaped like the SCC literature.

Used by the test-suite and the narrative scripts; none of the numbers
mean anything beyond looking plausible (right-skewed, a few negative
values, papers with many estimates, six publication periods).
"""

import numpy as np

from .data_model import AUTHOR_GROUPS, COLUMNS, PRTP_LEVELS, EstimateRecord, build_dataset

__all__ = ["synthetic_records", "synthetic_dataset", "null_dataset", "records_to_csv"]


def synthetic_records(n_papers=40, rng=None, mean_estimates=8, year_range=(1982, 2021),
                      scale=150.0, sigma=1.0, negative_share=0.3):
    rng = np.random.default_rng(rng)
    records = []
    prtp_choices = [p for p in PRTP_LEVELS]
    for k in range(n_papers):
        pub_year = int(rng.integers(year_range[0], year_range[1] + 1))
        allows_negative = bool(rng.random() < negative_share)
        author = AUTHOR_GROUPS[int(rng.integers(len(AUTHOR_GROUPS)))]
        flags = (rng.random(5) < np.array([0.95, 0.9, 0.98, 0.3, 0.1])).astype(int)
        if flags.sum() == 0:
            flags[0] = 1
        n_est = 1 + int(rng.poisson(mean_estimates - 1))
        emission = pub_year + int(rng.integers(-5, 10))
        dollar = min(pub_year + 1, pub_year - int(rng.integers(0, 5)))
        for _ in range(n_est):
            value = scale * rng.lognormal(0.0, sigma)
            if allows_negative and rng.random() < 0.15:
                value = -abs(rng.normal(0.0, scale * 0.3))
            records.append(EstimateRecord(
                paper_id=f"P{k:03d}",
                author_group=author,
                pub_year=pub_year,
                scc_reported=float(value),
                dollar_year=dollar,
                emission_year=emission,
                prtp=prtp_choices[int(rng.integers(len(prtp_choices)))],
                allows_negative=allows_negative,
                favored_multiplicity=int(rng.choice([1, 1, 1, 2, 3])),
                peer_reviewed=int(flags[0]),
                scenario_based=int(flags[1]),
                true_marginal=int(flags[2]),
                vulnerability_varies=int(flags[3]),
                new_impact=int(flags[4]),
                pigou=bool(rng.random() < 0.6),
                growth_rate=float(rng.normal(2.2, 1.0)) if rng.random() < 0.3 else None,
            ))
    return records


def synthetic_dataset(n_papers=40, rng=None, **kwargs):
    """Equally weighted :class:`~kdx.data_model.Dataset` of synthetic records."""
    return build_dataset(synthetic_records(n_papers, rng, **kwargs))


def null_dataset(n=50, rng=None, loc=100.0, scale=50.0):
    """I.i.d. Normal estimates, one per paper, spread at random over the six
    publication periods.  Every study admits negative values, so every
    record gets a real-line kernel."""
    rng = np.random.default_rng(rng)
    starts = np.array([1982, 1996, 2002, 2007, 2014, 2018])
    ends = np.array([1995, 2001, 2006, 2013, 2017, 2021])
    records = []
    for k in range(n):
        j = int(rng.integers(len(starts)))
        year = int(rng.integers(starts[j], ends[j] + 1))
        records.append(EstimateRecord(
            paper_id=f"N{k:04d}", author_group="Other", pub_year=year,
            scc_reported=float(rng.normal(loc, scale)), dollar_year=2010, emission_year=2010,
            prtp="other", allows_negative=True, favored_multiplicity=1,
            peer_reviewed=1, scenario_based=0, true_marginal=0, vulnerability_varies=0,
            new_impact=0, pigou=False, growth_rate=None,
        ))
    return build_dataset(records)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records):
    """Serialise records in the estimates-file layout."""
    lines = [",".join(COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in COLUMNS))
    return "\n".join(lines) + "\n"

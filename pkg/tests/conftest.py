import numpy as np
import pytest

from kdx.data_model import EstimateRecord, build_dataset
from kdx.synthetic import synthetic_dataset

# acceptance lines collected during the run and echoed in the summary
ACCEPTANCE = []


def record(**overrides):
    base = dict(
        paper_id="A", author_group="Other", pub_year=2005, scc_reported=100.0,
        dollar_year=2005, emission_year=2005, prtp="1.0", allows_negative=False,
        favored_multiplicity=1, peer_reviewed=1, scenario_based=1, true_marginal=1,
        vulnerability_varies=0, new_impact=0, pigou=False, growth_rate=None,
    )
    base.update(overrides)
    return EstimateRecord(**base)


@pytest.fixture
def make_record():
    return record


@pytest.fixture(scope="session")
def small_dataset():
    return synthetic_dataset(30, rng=np.random.default_rng(11)).reweighted("quality")


@pytest.fixture(scope="session")
def tiny_records():
    return [
        record(paper_id="A", scc_reported=120.0, pub_year=1999, dollar_year=1999,
               emission_year=1995, allows_negative=True),
        record(paper_id="A", scc_reported=35.0, pub_year=1999, dollar_year=1999,
               emission_year=1995, favored_multiplicity=2, prtp="3.0"),
        record(paper_id="B", scc_reported=10.0, pub_year=2015, dollar_year=2010,
               emission_year=2010, prtp="0.0"),
    ]


@pytest.fixture(scope="session")
def tiny_dataset(tiny_records):
    return build_dataset(tiny_records)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)

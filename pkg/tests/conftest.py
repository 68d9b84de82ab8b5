import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tilinglab.generators import RandomSpec, gen_random

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def partite_graphs(draw, r_range=(2, 4), n_range=(1, 5)):
    r = draw(st.integers(*r_range))
    n = draw(st.integers(*n_range))
    p = draw(st.sampled_from([0.0, 0.2, 0.5, 0.8, 1.0]))
    seed = draw(st.integers(0, 2**32))
    return gen_random(r, n, RandomSpec(p, seed))


@st.composite
def graph_pairs(draw):
    g = draw(partite_graphs())
    p = draw(st.sampled_from([0.0, 0.3, 0.7]))
    h = gen_random(g.r, g.n, RandomSpec(p, draw(st.integers(0, 2**32))))
    return g, h


# acceptance verdicts, filled in by test_acceptance and printed after the run
CRITERIA: dict[int, str] = {}


def record_criterion(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[k] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])

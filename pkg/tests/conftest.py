import pytest

from plap_limit import oracles
from plap_limit.psolver import ProblemSpec
from plap_limit.radial import RadialSpec, reduce

ACCEPTANCE_KEY = pytest.StashKey[dict]()


def flat_spec(example: int, p: float, n: int | None = None) -> ProblemSpec:
    """The example as a flat (possibly weighted) 1D problem."""
    prob = oracles.example_problem(oracles.ExampleId(example, p, n))
    return reduce(prob) if isinstance(prob, RadialSpec) else prob


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record a one-line verdict for an acceptance criterion."""
    log = request.config.stash[ACCEPTANCE_KEY]

    def record(number: int, ok: bool, detail: str) -> None:
        log[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(log[number])

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE_KEY, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(log):
        terminalreporter.write_line(log[k])

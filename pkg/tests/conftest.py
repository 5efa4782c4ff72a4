import numpy as np
import pytest

from edapprox.bench import planted_pair


@pytest.fixture
def rng():
    return np.random.default_rng(20240614)


def random_bits(rng, n):
    return "".join(rng.choice(["0", "1"], n)) if n else ""


@pytest.fixture(scope="session")
def planted():
    cache = {}

    def make(n, d, seed=0):
        key = (n, d, seed)
        if key not in cache:
            cache[key] = planted_pair(n, d, seed)
        return cache[key]

    return make


ACCEPTANCE = {}


@pytest.fixture
def report(request):
    """Record one summary line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

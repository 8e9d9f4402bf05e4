import numpy as np
import pytest

from satfrac import circuits_of, full_design, model_design_matrix
from satfrac.model import Fraction

import reference_values as ref


@pytest.fixture(scope="session")
def design16():
    return full_design((2, 2, 2, 2))


@pytest.fixture(scope="session")
def A16():
    return model_design_matrix((2, 2, 2, 2), 2)


@pytest.fixture(scope="session")
def C16(A16):
    return circuits_of(A16)


@pytest.fixture(scope="session")
def F1(design16):
    return Fraction.from_tuples(design16, ref.F1)


@pytest.fixture(scope="session")
def F2(design16):
    return Fraction.from_tuples(design16, ref.F2)


def random_int_matrix(rng, p, K, lo=-2, hi=2):
    return rng.integers(lo, hi + 1, size=(p, K)).tolist()


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the summary hook prints them all."""
    def record(n, ok, detail=""):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)

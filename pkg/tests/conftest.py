import numpy as np
import pytest

from carduality.car_space import BasisProjection, Instance, InvariantSubspace, standard_space
from carduality.numlin import Subspace, lowdin

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        _CRITERIA.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(_CRITERIA[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


def random_vector(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def instance_from_real_vectors(real_vectors, name="custom"):
    """Standard space ``C^{2m}`` with ``P = diag(1, 0)`` and ``q`` spanned by ``Fix(Γ)`` vectors.

    ``real_vectors`` are given by their first-half coordinates ``a``, so the
    vector is ``(a, conj(a))``.
    """
    a = np.atleast_2d(np.asarray(real_vectors, dtype=complex)).T
    m = a.shape[0]
    space = standard_space(m)
    p = np.zeros((2 * m, 2 * m), dtype=complex)
    p[:m, :m] = np.eye(m)
    x = np.vstack([a, a.conj()])
    return Instance(space, BasisProjection(p, space), InvariantSubspace(Subspace(lowdin(x)), space), name)

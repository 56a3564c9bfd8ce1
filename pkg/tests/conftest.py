import numpy as np
import pytest

# Ecological parameters of the five-agent star simulations (r = Rmax = 1).
ALPHA = [0.4340, 0.2046, 0.1891, 0.6935, 0.2108]
R_THRESH = [0.2262, 0.4788, 0.4582, 1.1745, 0.8483]

LINE5 = [
    [0, 1, 0, 0, 0],
    [0.5, 0, 0.5, 0, 0],
    [0, 0.5, 0, 0.5, 0],
    [0, 0, 0.5, 0, 0.5],
    [0, 0, 0, 1, 0],
]
LINE5_LABELS = [0.27, 0.53, 0.53, 0.53, 0.27]

CYCLE6 = [[0.5 if (j - i) % 6 in (1, 5) else 0.0 for j in range(6)] for i in range(6)]
CYCLE6_LABELS = [0.41] * 6


def star(hub_row):
    n = len(hub_row) + 1
    return [[0.0] + list(hub_row)] + [[1.0] + [0.0] * (n - 1) for _ in range(n - 1)]


# Hub first, then leaves; (hub weights, node labels) as printed.
STAR_RANDOM = (star([0.05, 0.37, 0.33, 0.25]), [0.87, 0.05, 0.32, 0.29, 0.22])
STAR_UNIFORM = (star([0.25, 0.25, 0.25, 0.25]), [0.89, 0.22, 0.22, 0.22, 0.22])
STAR_SKEWED = (star([0.01, 0.01, 0.01, 0.97]), [0.72, 0.01, 0.01, 0.01, 0.70])


def random_strongly_connected(rng, n, density=0.3):
    """Row-stochastic weights on a random digraph containing a Hamiltonian cycle."""
    perm = rng.permutation(n)
    mask = np.zeros((n, n), dtype=bool)
    mask[perm, np.roll(perm, 1)] = True
    mask |= rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    w = np.where(mask, rng.uniform(0.05, 1.0, (n, n)), 0.0)
    return w / w.sum(axis=1, keepdims=True)


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    def record(criterion, ok, detail):
        _ACCEPTANCE.append((criterion, bool(ok), detail))
        assert ok, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")

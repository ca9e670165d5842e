import itertools

import numpy as np
import pytest

from dymart.space import DyadicSpace


def sign_of_coin(m, j, n):
    """Coin j of atom m read straight from the binary string (independent of the library)."""
    return 1 if format(m, f"0{n}b")[j - 1] == "1" else -1


def naive_walsh(n, coins):
    return np.array(
        [np.prod([sign_of_coin(m, j, n) for j in coins]) if coins else 1
         for m in range(2**n)],
        dtype=float,
    )


def all_coin_sets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(1, n + 1), k)


def naive_mask(coins, n):
    return sum(2 ** (n - j) for j in coins)


def naive_spectrum(values, n):
    """O(N^2) transform: coefficient of every coin set by a direct inner product."""
    size = 2**n
    out = np.zeros(size)
    for coins in all_coin_sets(n):
        w = naive_walsh(n, coins)
        out[naive_mask(coins, n)] = sum(values[m] * w[m] for m in range(size)) / size
    return out


def naive_block_average(values, l, n):
    size = 2**n
    cell = 2 ** (n - l)
    out = np.empty(size)
    for start in range(0, size, cell):
        out[start:start + cell] = sum(values[start:start + cell]) / cell
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[1, 2, 3, 5, 8])
def space(request):
    return DyadicSpace(request.param)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion and assert it."""

    def record(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

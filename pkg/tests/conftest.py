import numpy as np
import pytest

from primelab.ntheory import sieve


@pytest.fixture(scope="session")
def table_1k():
    return sieve(1000)


@pytest.fixture(scope="session")
def table_100k():
    return sieve(10**5)


@pytest.fixture(scope="session")
def table_1m():
    return sieve(10**6)


def chi2_critical(dof: int, significance: float = 1e-6) -> float:
    from scipy.stats import chi2

    return float(chi2.ppf(1 - significance, dof))


def chi2_stat_uniform(counts, total: int, cells: int) -> float:
    """Pearson chi-square statistic against the uniform distribution."""
    expected = total / cells
    observed = np.zeros(cells)
    for i, c in enumerate(counts.values() if isinstance(counts, dict) else counts):
        observed[i] = c
    return float(((observed - expected) ** 2 / expected).sum())


def trial_division_primes(bound: int) -> list[int]:
    """Independent oracle: primes up to bound by trial division."""
    primes = []
    for n in range(2, bound + 1):
        d = 2
        is_p = True
        while d * d <= n:
            if n % d == 0:
                is_p = False
                break
            d += 1
        if is_p:
            primes.append(n)
    return primes

"""Closed-form output distributions of the generators at desk scale.

Each generator's exact probability of producing a given prime p <= x is
computed from residue-class prime counts, using rational arithmetic so
that masses sum to exactly 1.  These distributions are the brute-force
oracle against which Monte Carlo runs and analytic predictions are
checked.
"""

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ResourceLimitError
from .generators import derived_Q
from .metrics import FiniteDist
from .ntheory import Modulus, PrimeTable, sieve

# Refuse random-modulus sweeps needing more than this many class lookups.
DEFAULT_WORK_CAP = 10**10


def _primes_upto(x: int, table: PrimeTable | None) -> np.ndarray:
    if table is None:
        table = sieve(x)
    if table.bound < x:
        raise DomainError(f"table bound {table.bound} below x = {x}")
    return table.primes[: table.count_leq(x)]


def _class_counts(primes_x: np.ndarray, q: int) -> np.ndarray:
    return np.bincount(primes_x % q, minlength=q)


@dataclass(frozen=True)
class ClassProfile:
    """Residue-class census of the primes <= x for one modulus.

    counts maps each unit a to pi(x; q, a); phi_star is the number of
    units whose class is nonempty; error_terms maps a to
    |pi(x;q,a) - pi(x)/phi(q)|.
    """

    x: int
    q: int
    counts: dict[int, int]
    phi_star: int
    error_terms: dict[int, float]


def class_profile(x: int, q: int, table: PrimeTable | None = None) -> ClassProfile:
    primes_x = _primes_upto(x, table)
    mod = Modulus.from_int(q)
    counts_arr = _class_counts(primes_x, q)
    pi_x = len(primes_x)
    expected = Fraction(pi_x, mod.phi)
    counts: dict[int, int] = {}
    errors: dict[int, float] = {}
    for a in range(q):
        if math.gcd(a, q) == 1:
            c = int(counts_arr[a])
            counts[a] = c
            errors[a] = float(abs(c - expected))
    phi_star = sum(1 for c in counts.values() if c > 0)
    return ClassProfile(x, q, counts, phi_star, errors)


def exact_dist_trivial(x: int, table: PrimeTable | None = None) -> FiniteDist:
    """Uniform over the primes <= x."""
    primes_x = _primes_upto(x, table)
    u = Fraction(1, len(primes_x))
    return FiniteDist(len(primes_x), {int(p): u for p in primes_x})


def exact_dist_primeinc(x: int, table: PrimeTable | None = None) -> FiniteDist:
    """Gap-proportional distribution: mass(p) = d(p) / p_max.

    d(p) is the distance from p to the preceding prime (d(2) = 2, counting
    the starts 1 and 2), and p_max the largest prime <= x; gaps telescope
    so the masses sum to exactly 1.
    """
    primes_x = _primes_upto(x, table)
    pmax = int(primes_x[-1])
    gaps = np.empty(len(primes_x), dtype=np.int64)
    gaps[0] = 2
    gaps[1:] = np.diff(primes_x)
    mass = {
        int(p): Fraction(int(d), pmax) for p, d in zip(primes_x, gaps)
    }
    return FiniteDist(len(primes_x), mass)


def exact_dist_basic(
    x: int, q: int, table: PrimeTable | None = None
) -> FiniteDist:
    """Distribution of the fixed-modulus residue-class generator.

    mass(p) = 1 / (phi(q) * pi(x; q, p mod q)) for p not dividing q, and 0
    for p | q.  If some unit class holds no prime the run conditioned on
    termination uses the count of nonempty classes instead of phi(q); the
    result is flagged in meta["conditional"] with the empty classes listed.
    """
    if q >= x:
        raise DomainError(f"modulus {q} must be < x = {x}")
    primes_x = _primes_upto(x, table)
    mod = Modulus.from_int(q)
    counts = _class_counts(primes_x, q)
    empty = [
        a for a in range(q) if math.gcd(a, q) == 1 and counts[a] == 0
    ]
    weight = mod.phi - len(empty)
    mass: dict[int, Fraction] = {}
    for p in primes_x.tolist():
        if q % p == 0:
            mass[p] = Fraction(0)
        else:
            mass[p] = Fraction(1, weight * int(counts[p % q]))
    meta = {
        "conditional": bool(empty),
        "empty_classes": empty,
        "phi": mod.phi,
        "phi_star": weight,
    }
    return FiniteDist(len(primes_x), mass, meta=meta)


def exact_dist_erh_fallback(
    x: int, q: int, T: int, table: PrimeTable | None = None
) -> FiniteDist:
    """Distribution of the fixed-modulus generator with trivial fallback.

    With xi_a = pi(x;q,a) / (floor((x-a)/q) + 1) the chance a residue draw
    succeeds, a run in class a ends in the class with probability
    1 - (1-xi_a)^T and otherwise falls back to a uniform prime, so

        mass(p) = (1/phi) * [ (1 - (1-xi_a)^T) / pi(x;q,a)  for a = p mod q ]
                + (1/phi) * sum_a (1-xi_a)^T / pi(x).

    Empty classes contribute only the fallback term.
    """
    if q >= x:
        raise DomainError(f"modulus {q} must be < x = {x}")
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    primes_x = _primes_upto(x, table)
    pi_x = len(primes_x)
    mod = Modulus.from_int(q)
    counts = _class_counts(primes_x, q)

    class_term: dict[int, Fraction] = {}
    fallback_total = Fraction(0)
    for a in range(q):
        if math.gcd(a, q) != 1:
            continue
        c = int(counts[a])
        xi = Fraction(c, (x - a) // q + 1)
        fail = (1 - xi) ** T
        fallback_total += fail
        if c > 0:
            class_term[a] = (1 - fail) / (mod.phi * c)

    uniform_part = fallback_total / (mod.phi * pi_x)
    mass: dict[int, Fraction] = {}
    for p in primes_x.tolist():
        m = uniform_part
        if q % p != 0:
            term = class_term.get(p % q)
            if term is not None:
                m = m + term
        mass[p] = m
    return FiniteDist(pi_x, mass)


def _check_work_cap(Q: int, pi_x: int, work_cap: int):
    if Q * pi_x > work_cap:
        raise ResourceLimitError(
            f"random-modulus sweep needs ~{Q * pi_x} class lookups "
            f"(cap {work_cap}); increase A or decrease x"
        )


def exact_dist_uncond_nofallback(
    x: int,
    A: float,
    table: PrimeTable | None = None,
    work_cap: int = DEFAULT_WORK_CAP,
) -> FiniteDist:
    """Distribution of the random-modulus generator without fallback.

    Conditioned on termination (the chosen class contains a prime),

        mass(p) = (1 / F*) * sum over q in (Q/2, Q] with p not dividing q
                  of 1 / pi(x; q, p mod q),

    where F* counts the selectable (q, a) pairs with a nonempty class.
    """
    primes_x = _primes_upto(x, table)
    pi_x = len(primes_x)
    Q = derived_Q(x, A)
    _check_work_cap(Q, pi_x, work_cap)

    per_prime: list[Counter] = [Counter() for _ in range(pi_x)]
    f_star = 0
    for q in range(Q // 2 + 1, Q + 1):
        counts_q = _class_counts(primes_x, q)
        units = np.gcd(np.arange(q, dtype=np.int64), q) == 1
        f_star += int(np.count_nonzero(units & (counts_q > 0)))
        residues = primes_x % q
        class_sizes = counts_q[residues]
        divides = np.mod(q, primes_x) == 0
        for i in np.flatnonzero(~divides).tolist():
            per_prime[i][int(class_sizes[i])] += 1

    mass: dict[int, Fraction] = {}
    for i, p in enumerate(primes_x.tolist()):
        total = sum(
            (Fraction(mult, size) for size, mult in per_prime[i].items()),
            Fraction(0),
        )
        mass[p] = total / f_star
    meta = {"Q": Q, "F_star": f_star}
    return FiniteDist(pi_x, mass, meta=meta)


def exact_dist_uncond(
    x: int,
    A: float,
    T: int,
    table: PrimeTable | None = None,
    work_cap: int = DEFAULT_WORK_CAP,
) -> FiniteDist:
    """Distribution of the random-modulus generator with trivial fallback.

    Averages the fixed-(q, a) fallback mixture over the F(Q) selectable
    pairs; empty classes always fall back and contribute uniform mass.
    """
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    primes_x = _primes_upto(x, table)
    pi_x = len(primes_x)
    Q = derived_Q(x, A)
    _check_work_cap(Q, pi_x, work_cap)

    acc: list[Fraction] = [Fraction(0)] * pi_x
    fallback_total = Fraction(0)
    f_q = 0
    for q in range(Q // 2 + 1, Q + 1):
        counts_q = _class_counts(primes_x, q)
        class_term: dict[int, Fraction] = {}
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            f_q += 1
            c = int(counts_q[a])
            xi = Fraction(c, (x - a) // q + 1)
            fail = (1 - xi) ** T
            fallback_total += fail
            if c > 0:
                class_term[a] = (1 - fail) / c
        residues = primes_x % q
        divides = np.mod(q, primes_x) == 0
        for i in np.flatnonzero(~divides).tolist():
            term = class_term.get(int(residues[i]))
            if term is not None:
                acc[i] += term

    uniform_part = fallback_total / pi_x
    mass = {
        int(p): (acc[i] + uniform_part) / f_q
        for i, p in enumerate(primes_x.tolist())
    }
    meta = {"Q": Q, "F": f_q, "T": T}
    return FiniteDist(pi_x, mass, meta=meta)

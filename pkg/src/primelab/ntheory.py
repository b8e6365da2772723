"""Exact number-theoretic primitives at desk scale.

Sieving, prime counting in residue classes, totients, primorials and
primality testing.  Everything here is exact integer arithmetic; these
routines are the oracle substrate for the distribution computations.
"""

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .rng import split_seed

# Desk-scale caps: sieving beyond 2^31 or totient tables beyond 10^8 are
# refused rather than attempted.
DEFAULT_SIEVE_CAP = 2**31
DEFAULT_TOTIENT_CAP = 10**8

_SEGMENT = 1 << 22

# Fixed witness set proving primality for all n below this bound.
_DETERMINISTIC_MR_BOUND = 3_317_044_064_679_887_385_961_981
_DETERMINISTIC_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class PrimeTable:
    """Exact primality for [0, bound]: packed flag bits plus the prime list.

    Immutable after construction; the per-modulus residue histograms are a
    cache whose recomputation is idempotent, so concurrent readers are safe.
    """

    def __init__(self, bound: int, packed_flags: np.ndarray, primes: np.ndarray):
        self.bound = bound
        self._flags = packed_flags
        self.primes = primes
        self._residue_counts: dict[int, np.ndarray] = {}

    def is_prime(self, n: int) -> bool:
        if n < 0 or n > self.bound:
            raise DomainError(f"{n} outside table range [0, {self.bound}]")
        return bool((self._flags[n >> 3] >> (n & 7)) & 1)

    def prime_count(self) -> int:
        """pi(bound)."""
        return len(self.primes)

    def count_leq(self, n: int) -> int:
        """pi(n) for any n <= bound."""
        if n > self.bound:
            raise DomainError(f"{n} exceeds table bound {self.bound}")
        return int(np.searchsorted(self.primes, n, side="right"))

    def residue_counts(self, q: int) -> np.ndarray:
        """Histogram of primes <= bound by residue mod q (cached per q)."""
        counts = self._residue_counts.get(q)
        if counts is None:
            counts = np.bincount(self.primes % q, minlength=q)
            self._residue_counts[q] = counts
        return counts


def sieve(bound: int, cap: int = DEFAULT_SIEVE_CAP) -> PrimeTable:
    """Segmented sieve of Eratosthenes over [0, bound]."""
    if bound < 2:
        raise DomainError(f"sieve needs bound >= 2, got {bound}")
    if bound > cap:
        raise ResourceLimitError(f"sieve bound {bound} exceeds cap {cap}")

    root = math.isqrt(bound)
    base_flags = np.ones(root + 1, dtype=bool)
    base_flags[:2] = False
    for p in range(2, math.isqrt(root) + 1):
        if base_flags[p]:
            base_flags[p * p :: p] = False
    base = [int(p) for p in np.flatnonzero(base_flags)]

    packed = np.zeros(bound // 8 + 1, dtype=np.uint8)
    chunks = []
    for lo in range(0, bound + 1, _SEGMENT):
        hi = min(lo + _SEGMENT, bound + 1)
        mask = np.ones(hi - lo, dtype=bool)
        if lo == 0:
            mask[:2] = False
        for p in base:
            if p * p >= hi:
                break
            start = p * p if p * p >= lo else ((lo + p - 1) // p) * p
            if start < hi:
                mask[start - lo :: p] = False
        chunks.append((np.flatnonzero(mask) + lo).astype(np.int64))
        seg_bits = np.packbits(mask, bitorder="little")
        packed[lo // 8 : lo // 8 + len(seg_bits)] = seg_bits

    return PrimeTable(bound, packed, np.concatenate(chunks))


def count_ap_primes(table: PrimeTable, q: int, a: int) -> int:
    """pi(bound; q, a): primes p <= bound with p = a (mod q)."""
    if q < 1:
        raise DomainError(f"modulus must be >= 1, got {q}")
    if not 0 <= a < q:
        raise DomainError(f"residue {a} not in [0, {q})")
    if q > 4 * len(table.primes):
        # one-off large modulus: a histogram would be mostly zeros
        return int(np.count_nonzero(table.primes % q == a))
    return int(table.residue_counts(q)[a])


def residue_class_primes(table: PrimeTable, q: int, a: int) -> list[int]:
    """The primes counted by ``count_ap_primes``, sorted ascending."""
    if q < 1:
        raise DomainError(f"modulus must be >= 1, got {q}")
    if not 0 <= a < q:
        raise DomainError(f"residue {a} not in [0, {q})")
    return (table.primes[table.primes % q == a]).tolist()


def primorial_below(limit: int) -> int:
    """Largest product of all primes up to some bound that is <= limit."""
    if limit < 2:
        raise DomainError(f"primorial_below needs limit >= 2, got {limit}")
    product = 1
    p = 2
    while product * p <= limit:
        product *= p
        p += 1
        while not is_prime(p):
            p += 1
    return product


def totient_sieve(bound: int, cap: int = DEFAULT_TOTIENT_CAP) -> np.ndarray:
    """Euler phi for 0..bound as an int64 array (phi[0] = 0)."""
    if bound < 1:
        raise DomainError(f"totient_sieve needs bound >= 1, got {bound}")
    if bound > cap:
        raise ResourceLimitError(f"totient bound {bound} exceeds cap {cap}")
    phi = np.arange(bound + 1, dtype=np.int64)
    for p in range(2, bound + 1):
        if phi[p] == p:  # p untouched so far, hence prime
            phi[p::p] -= phi[p::p] // p
    return phi


def totient_partial_sum(bound: int, cap: int = DEFAULT_TOTIENT_CAP) -> int:
    """Sum of phi(q) for q = 1..bound, exactly."""
    phi = totient_sieve(bound, cap)
    return int(phi[1:].sum())


def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of n >= 2 as ((p, e), ...) by trial division."""
    if n < 2:
        raise DomainError(f"factorize needs n >= 2, got {n}")
    factors = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            factors.append((p, e))
    p = 5
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            factors.append((p, e))
        p += 2 if p % 6 == 5 else 4  # skip multiples of 2 and 3
    if n > 1:
        factors.append((n, 1))
    return tuple(factors)


def _carmichael_prime_power(p: int, e: int) -> int:
    if p == 2:
        if e == 1:
            return 1
        if e == 2:
            return 2
        return 2 ** (e - 2)
    return p ** (e - 1) * (p - 1)


@dataclass(frozen=True)
class Modulus:
    """A modulus q with its unit-group data.

    phi = |(Z/qZ)*|, omega = number of distinct prime factors, carmichael =
    exponent of the unit group (divides phi).
    """

    q: int
    phi: int
    omega: int
    factorization: tuple[tuple[int, int], ...]
    carmichael: int

    @classmethod
    def from_int(cls, q: int) -> "Modulus":
        if q < 2:
            raise DomainError(f"modulus must be >= 2, got {q}")
        factorization = factorize(q)
        phi = 1
        lam = 1
        for p, e in factorization:
            phi *= p ** (e - 1) * (p - 1)
            lam = math.lcm(lam, _carmichael_prime_power(p, e))
        return cls(q, phi, len(factorization), factorization, lam)


class PrimalityPolicy:
    """How primality of generated candidates is decided."""


@dataclass(frozen=True)
class Exact(PrimalityPolicy):
    """Always-correct answers: table lookup when covered, fixed-witness
    Miller-Rabin (valid below 3.3e24) otherwise."""

    table: PrimeTable | None = None


@dataclass(frozen=True)
class MillerRabin(PrimalityPolicy):
    """Probabilistic testing with `rounds` random bases.

    Composite verdicts are always correct; a prime verdict on a composite
    has probability <= 4^(-rounds).  Bases come from a dedicated stream
    derived from (seed, n), separate from any generation bit source.
    """

    rounds: int = 20
    seed: int = 0


EXACT = Exact()


def _mr_composite_witness(n: int, a: int, d: int, s: int) -> bool:
    """True if base a proves n composite (n odd, n-1 = d * 2^s, d odd)."""
    a %= n
    if a == 0:
        return False
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def _is_prime_fixed_witnesses(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    return not any(
        _mr_composite_witness(n, a, d, s) for a in _DETERMINISTIC_WITNESSES
    )


def is_prime(n: int, policy: PrimalityPolicy = EXACT) -> bool:
    """Primality of n under the given policy."""
    if n < 0:
        raise DomainError(f"is_prime needs n >= 0, got {n}")
    if n < 2:
        return False
    if isinstance(policy, Exact):
        if policy.table is not None and n <= policy.table.bound:
            return policy.table.is_prime(n)
        if n >= _DETERMINISTIC_MR_BOUND:
            raise ResourceLimitError(
                f"no exact primality method for n >= {_DETERMINISTIC_MR_BOUND}"
            )
        return _is_prime_fixed_witnesses(n)
    if isinstance(policy, MillerRabin):
        for p in _SMALL_PRIMES:
            if n == p:
                return True
            if n % p == 0:
                return False
        d = n - 1
        s = 0
        while d % 2 == 0:
            d //= 2
            s += 1
        rnd = random.Random(split_seed(policy.seed, n))
        return not any(
            _mr_composite_witness(n, rnd.randint(2, n - 2), d, s)
            for _ in range(policy.rounds)
        )
    raise DomainError(f"unknown primality policy {policy!r}")

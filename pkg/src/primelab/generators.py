"""Prime generators with per-run resource telemetry.

Six generators over the primes <= x:

* trivial          -- uniform candidates from {1, ..., x}, retry until prime
* primeinc         -- random start, scan upward to the next prime
* basic            -- fixed modulus q, random unit a, search p = a + t*q
* erh_fallback     -- basic, but fall back to trivial after T failures
* uncond           -- random modulus from (Q/2, Q], then as erh_fallback
* uncond_nofallback-- same selection, residue search runs forever

Every run reports a Telemetry: loop iterations, primality tests, bits
drawn from the generation source (with the subset spent on modulus/unit
selection broken out), the accepted (q, a) and whether the fallback was
entered.  Runs are bit-for-bit reproducible from the seed.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import BrokenBitSourceError, ConfigError, NonTerminationError
from .ntheory import (
    EXACT,
    Exact,
    Modulus,
    PrimalityPolicy,
    _is_prime_fixed_witnesses,
    is_prime,
    primorial_below,
)
from .rng import CountingBitSource

_JP_MAX_ROUNDS = 100_000


class Algorithm(str, Enum):
    TRIVIAL = "trivial"
    PRIMEINC = "primeinc"
    BASIC = "basic"
    ERH_FALLBACK = "erh_fallback"
    UNCOND = "uncond"
    UNCOND_NOFALLBACK = "uncond_nofallback"


class ModulusMode(str, Enum):
    PRIMORIAL = "primorial"
    POWER_OF_TWO = "power_of_two"
    EXPLICIT = "explicit"


class UnitMethod(str, Enum):
    REJECTION = "rejection"
    JOYE_PAILLIER = "joye_paillier"


_RESIDUE_ALGOS = (Algorithm.BASIC, Algorithm.ERH_FALLBACK)
_RANDOM_MODULUS_ALGOS = (Algorithm.UNCOND, Algorithm.UNCOND_NOFALLBACK)


def default_T(x: int) -> int:
    """Residue-search budget before fallback: ceil((ln x)^2)."""
    return math.ceil(math.log(x) ** 2)


def derived_Q(x: int, A: float) -> int:
    """Even modulus-range top for the random-modulus variants:
    2 * floor(x / (2 (ln x)^A))."""
    Q = 2 * int(x / (2 * math.log(x) ** A))
    if Q < 4:
        raise ConfigError(f"Q = {Q} < 4 for x={x}, A={A}; decrease A")
    return Q


def default_iteration_cap(x: int) -> int:
    return math.ceil(1e6 * math.log(x))


@dataclass(frozen=True)
class GenConfig:
    """Algorithm selector plus parameters; primes produced are <= x."""

    x: int
    algorithm: Algorithm
    epsilon: float | None = None
    modulus_mode: ModulusMode = ModulusMode.PRIMORIAL
    q: int | None = None
    A: float | None = None
    T_override: int | None = None
    seed: int = 0
    primality: PrimalityPolicy = EXACT
    unit_method: UnitMethod = UnitMethod.JOYE_PAILLIER
    max_iterations: int | None = None

    def __post_init__(self):
        if self.x < 2:
            raise ConfigError(f"x must be >= 2, got {self.x}")
        algo = self.algorithm
        if algo in _RESIDUE_ALGOS:
            if self.modulus_mode is ModulusMode.EXPLICIT:
                if self.q is None:
                    raise ConfigError("explicit modulus mode requires q")
            elif self.epsilon is None:
                raise ConfigError(f"{algo.value} requires epsilon")
            if self.epsilon is not None and not 0 < self.epsilon < 1:
                raise ConfigError(f"epsilon must be in (0,1), got {self.epsilon}")
        if algo in _RANDOM_MODULUS_ALGOS:
            if self.A is None or self.A <= 0:
                raise ConfigError(f"{algo.value} requires A > 0")
        if self.q is not None and not 2 <= self.q < self.x:
            raise ConfigError(f"explicit q={self.q} not in [2, x)")

    def T(self) -> int:
        return self.T_override if self.T_override is not None else default_T(self.x)

    def iteration_cap(self) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return default_iteration_cap(self.x)


@dataclass
class Telemetry:
    """Per-run counters.  bits_consumed covers every bit drawn from the
    generation source; selection_bits is the part spent choosing the
    modulus and the unit class (zero for trivial/primeinc)."""

    loop_iterations: int = 0
    primality_tests: int = 0
    bits_consumed: int = 0
    selection_bits: int = 0
    fallback_entered: bool = False
    chosen_q: int = 1
    chosen_a: int = 0

    @property
    def loop_bits(self) -> int:
        """Bits drawn inside the candidate-search loop."""
        return self.bits_consumed - self.selection_bits


def select_modulus(
    x: int,
    epsilon: float | None,
    mode: ModulusMode,
    explicit_q: int | None = None,
) -> Modulus:
    """Choose the search modulus.

    PRIMORIAL / POWER_OF_TWO take the largest primorial (resp. power of
    two) that does not exceed x^(1-epsilon); EXPLICIT validates a given q.
    """
    if mode is ModulusMode.EXPLICIT:
        if explicit_q is None:
            raise ConfigError("explicit modulus mode requires q")
        if not 2 <= explicit_q < x:
            raise ConfigError(f"q={explicit_q} not in [2, x={x})")
        return Modulus.from_int(explicit_q)
    if epsilon is None or not 0 < epsilon < 1:
        raise ConfigError(f"epsilon must be in (0,1), got {epsilon}")
    limit = int(x ** (1.0 - epsilon))
    if limit < 3:
        raise ConfigError(
            f"x^(1-epsilon) = {limit} < 3; enlarge x or shrink epsilon"
        )
    if mode is ModulusMode.PRIMORIAL:
        q = primorial_below(limit)
    elif mode is ModulusMode.POWER_OF_TWO:
        q = 1 << (limit.bit_length() - 1)
    else:
        raise ConfigError(f"unknown modulus mode {mode!r}")
    if q < 2:
        raise ConfigError(f"derived modulus {q} < 2")
    return Modulus.from_int(q)


def sample_unit(
    src: CountingBitSource,
    modulus: Modulus,
    method: UnitMethod = UnitMethod.JOYE_PAILLIER,
) -> int:
    """Uniform element of (Z/qZ)*, as an integer in {1, ..., q-1}."""
    q = modulus.q
    if method is UnitMethod.REJECTION:
        while True:
            a = src.uniform_below(q)
            if math.gcd(a, q) == 1:
                return a
    if method is UnitMethod.JOYE_PAILLIER:
        lam = modulus.carmichael
        b = src.uniform_below(q)
        for _ in range(_JP_MAX_ROUNDS):
            u = (1 - pow(b, lam, q)) % q
            if u == 0:
                return b
            r = src.uniform_below(q)
            b = (b + r * u) % q
        raise BrokenBitSourceError(
            f"unit generation made no progress after {_JP_MAX_ROUNDS} rounds"
        )
    raise ConfigError(f"unknown unit method {method!r}")


def primality_tester(policy: PrimalityPolicy, x: int):
    """Fastest correct primality callable for candidates <= x."""
    if isinstance(policy, Exact):
        table = policy.table
        if table is not None and table.bound >= x:
            flags = table._flags
            return lambda p: bool((flags[p >> 3] >> (p & 7)) & 1)
        return _is_prime_fixed_witnesses
    return lambda p: is_prime(p, policy)


def _trivial_search(src, x, test, tel):
    """Uniform candidates from {1, ..., x} until one is prime."""
    while True:
        tel.loop_iterations += 1
        p = src.uniform_below(x) + 1
        tel.primality_tests += 1
        if test(p):
            return p


def gen_trivial(cfg: GenConfig, src: CountingBitSource | None = None):
    """Uniform prime <= x by rejection over {1, ..., x}."""
    if src is None:
        src = CountingBitSource(cfg.seed)
    tel = Telemetry()
    start = src.bits_consumed
    p = _trivial_search(src, cfg.x, primality_tester(cfg.primality, cfg.x), tel)
    tel.bits_consumed = src.bits_consumed - start
    return p, tel


def gen_primeinc(cfg: GenConfig, src: CountingBitSource | None = None):
    """Random start y in {1, ..., x}, scanned upward to the first prime.

    If the scan would leave [1, x] (i.e. y exceeds the largest prime <= x),
    y is resampled, so the output distribution is gap-length over that
    largest prime.
    """
    if src is None:
        src = CountingBitSource(cfg.seed)
    test = primality_tester(cfg.primality, cfg.x)
    x = cfg.x
    tel = Telemetry()
    start = src.bits_consumed
    while True:
        tel.loop_iterations += 1
        p = src.uniform_below(x) + 1
        while p <= x:
            tel.primality_tests += 1
            if test(p):
                tel.bits_consumed = src.bits_consumed - start
                return p, tel
            p += 1


def _residue_search(src, x, q, a, budget, test, tel):
    """Up to `budget` draws of p = a + t*q; returns the prime or None."""
    m = (x - a) // q + 1
    uniform_below = src.uniform_below
    for _ in range(budget):
        tel.loop_iterations += 1
        p = a + uniform_below(m) * q
        tel.primality_tests += 1
        if test(p):
            return p
    return None


def _pick_modulus_and_unit(cfg: GenConfig, src, tel):
    modulus = select_modulus(cfg.x, cfg.epsilon, cfg.modulus_mode, cfg.q)
    if modulus.q >= cfg.x:
        raise ConfigError(f"modulus {modulus.q} must be < x = {cfg.x}")
    start = src.bits_consumed
    a = sample_unit(src, modulus, cfg.unit_method)
    tel.selection_bits = src.bits_consumed - start
    tel.chosen_q = modulus.q
    tel.chosen_a = a
    return modulus.q, a


def gen_basic(cfg: GenConfig, src: CountingBitSource | None = None):
    """Residue-class search with a fixed modulus: p = a + t*q."""
    if src is None:
        src = CountingBitSource(cfg.seed)
    tel = Telemetry()
    start = src.bits_consumed
    q, a = _pick_modulus_and_unit(cfg, src, tel)
    test = primality_tester(cfg.primality, cfg.x)
    p = _residue_search(src, cfg.x, q, a, cfg.iteration_cap(), test, tel)
    tel.bits_consumed = src.bits_consumed - start
    if p is None:
        raise NonTerminationError(
            f"no prime = {a} (mod {q}) found in {cfg.iteration_cap()} "
            f"iterations; the class is likely empty"
        )
    return p, tel


def gen_erh_fallback(cfg: GenConfig, src: CountingBitSource | None = None):
    """Residue-class search for T iterations, then the trivial search."""
    if src is None:
        src = CountingBitSource(cfg.seed)
    tel = Telemetry()
    start = src.bits_consumed
    q, a = _pick_modulus_and_unit(cfg, src, tel)
    test = primality_tester(cfg.primality, cfg.x)
    p = _residue_search(src, cfg.x, q, a, cfg.T(), test, tel)
    if p is None:
        tel.fallback_entered = True
        p = _trivial_search(src, cfg.x, test, tel)
    tel.bits_consumed = src.bits_consumed - start
    return p, tel


def _pick_random_modulus(cfg: GenConfig, src, tel):
    """Exactly uniform pair (q, a): q in (Q/2, Q], a a unit mod q.

    Draw q and a uniformly and restart both on a gcd failure.  A plain
    gcd-rejection loop would leave each unit pair with probability
    proportional to 1/q, overweighting small moduli, so an accepted pair is
    additionally thinned with probability q/Q; every surviving pair then
    has the same chance 2/Q^2 per round, i.e. the output is uniform over
    the F(Q) valid pairs."""
    Q = derived_Q(cfg.x, cfg.A)
    half = Q // 2
    uniform_below = src.uniform_below
    start = src.bits_consumed
    while True:
        q = half + 1 + uniform_below(half)
        a = uniform_below(q)
        if math.gcd(a, q) == 1 and uniform_below(Q) < q:
            tel.selection_bits = src.bits_consumed - start
            tel.chosen_q = q
            tel.chosen_a = a
            return q, a


def gen_uncond(cfg: GenConfig, src: CountingBitSource | None = None):
    """Random-modulus residue search with trivial fallback after T tries."""
    if src is None:
        src = CountingBitSource(cfg.seed)
    tel = Telemetry()
    start = src.bits_consumed
    q, a = _pick_random_modulus(cfg, src, tel)
    test = primality_tester(cfg.primality, cfg.x)
    p = _residue_search(src, cfg.x, q, a, cfg.T(), test, tel)
    if p is None:
        tel.fallback_entered = True
        p = _trivial_search(src, cfg.x, test, tel)
    tel.bits_consumed = src.bits_consumed - start
    return p, tel


def gen_uncond_nofallback(cfg: GenConfig, src: CountingBitSource | None = None):
    """Random-modulus residue search with no fallback (hard cap only)."""
    if src is None:
        src = CountingBitSource(cfg.seed)
    tel = Telemetry()
    start = src.bits_consumed
    q, a = _pick_random_modulus(cfg, src, tel)
    test = primality_tester(cfg.primality, cfg.x)
    p = _residue_search(src, cfg.x, q, a, cfg.iteration_cap(), test, tel)
    tel.bits_consumed = src.bits_consumed - start
    if p is None:
        raise NonTerminationError(
            f"no prime = {a} (mod {q}) found in {cfg.iteration_cap()} "
            f"iterations; the class is likely empty"
        )
    return p, tel


_DISPATCH = {
    Algorithm.TRIVIAL: gen_trivial,
    Algorithm.PRIMEINC: gen_primeinc,
    Algorithm.BASIC: gen_basic,
    Algorithm.ERH_FALLBACK: gen_erh_fallback,
    Algorithm.UNCOND: gen_uncond,
    Algorithm.UNCOND_NOFALLBACK: gen_uncond_nofallback,
}


def generate(cfg: GenConfig, src: CountingBitSource | None = None):
    """Run the configured generator once; returns (prime, Telemetry)."""
    return _DISPATCH[cfg.algorithm](cfg, src)


def with_seed(cfg: GenConfig, seed: int) -> GenConfig:
    """Copy of cfg with a different seed."""
    return replace(cfg, seed=seed)

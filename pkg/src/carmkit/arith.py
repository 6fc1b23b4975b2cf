"""Integer primitives: primality, factorization, sieving, Carmichael's lambda.

All operations are pure functions of their inputs.  The randomized splitting
step inside :func:`factorize` reseeds from ``config.FACTOR_RNG_SEED`` on every
call, so results are deterministic regardless of call history.
"""

from __future__ import annotations

import math
import operator
import random
from dataclasses import dataclass

import numpy as np

from . import config

__all__ = [
    "PrimePower",
    "Factorization",
    "PrimeSieve",
    "SmallestFactorTable",
    "SPRP_CERTIFIED_LIMIT",
    "is_prime",
    "factorize",
    "sieve_primes",
    "prime_count",
    "carmichael_lambda",
    "multiplicative_order",
    "euler_phi",
    "integer_nth_root",
    "count_proper_prime_powers",
]


@dataclass(frozen=True)
class PrimePower:
    """A prime power p**a with a >= 1."""

    p: int
    a: int

    @property
    def value(self) -> int:
        return self.p ** self.a

    @property
    def label(self) -> str:
        return str(self.p) if self.a == 1 else f"{self.p}^{self.a}"


@dataclass(frozen=True)
class Factorization:
    """Complete factorization, bases strictly increasing; empty for n = 1."""

    factors: tuple[PrimePower, ...]

    def __iter__(self):
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    @property
    def value(self) -> int:
        out = 1
        for pp in self.factors:
            out *= pp.value
        return out

    def as_tuples(self) -> tuple[tuple[int, int], ...]:
        return tuple((pp.p, pp.a) for pp in self.factors)


def _tiny_sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(flags[p * p :: p]))
    return [i for i, f in enumerate(flags) if f]


# Primes to 1100 cover trial division up to 2**20 (sqrt(2**20) = 1024).
_SMALL_PRIMES = _tiny_sieve(1100)
_TRIAL_DIVISION_LIMIT = 1 << 20

# First twelve prime bases certify strong-pseudoprime testing for every
# n below this published bound (comfortably past 2**64).
_SPRP_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
SPRP_CERTIFIED_LIMIT = 318_665_857_834_031_151_167_461

# Extended trial-division primes (<= 10**6), built lazily on first use.
_EXT_PRIMES: list[int] | None = None
_EXT_TRIAL_LIMIT = 10 ** 6


def _extended_trial_primes() -> list[int]:
    global _EXT_PRIMES
    if _EXT_PRIMES is None:
        mask = np.ones(_EXT_TRIAL_LIMIT + 1, dtype=bool)
        mask[:2] = False
        for p in range(2, math.isqrt(_EXT_TRIAL_LIMIT) + 1):
            if mask[p]:
                mask[p * p :: p] = False
        primes = np.nonzero(mask)[0]
        _EXT_PRIMES = [int(p) for p in primes[primes > _SMALL_PRIMES[-1]]]
    return _EXT_PRIMES


def _strong_probable_prime(n: int, base: int) -> bool:
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int, *, wide: bool = False) -> bool:
    """Deterministic primality test.

    Valid for 0 <= n < 2**63; with ``wide=True`` the range extends to the
    published certification bound of the fixed witness set.  Out-of-range
    input raises ``ValueError`` rather than degrading to a probabilistic
    answer.
    """
    n = operator.index(n)
    limit = SPRP_CERTIFIED_LIMIT if wide else config.INT_WIDTH_LIMIT
    if n < 0 or n >= limit:
        raise ValueError(f"primality test input {n} outside supported range [0, {limit})")
    if n < 2:
        return False
    if n < _TRIAL_DIVISION_LIMIT:
        for p in _SMALL_PRIMES:
            if p * p > n:
                return True
            if n % p == 0:
                return n == p
        return True
    if n % 2 == 0:
        return False
    for base in _SPRP_BASES:
        if not _strong_probable_prime(n, base):
            return False
    return True


def _brent_rho(n: int, rng: random.Random) -> int:
    """Find a nontrivial factor of odd composite n (Brent's cycle variant)."""
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> Factorization:
    """Complete factorization of 1 <= n < 2**63.

    Trial division by sieved primes up to 10**6, then deterministic-seeded
    Brent splitting; every cofactor is certified by :func:`is_prime`.
    """
    n = operator.index(n)
    if not 1 <= n < config.INT_WIDTH_LIMIT:
        raise ValueError(f"factorize input {n} outside supported range [1, 2^63)")
    counts: dict[int, int] = {}
    m = n
    for p in _SMALL_PRIMES:
        if p * p > m:
            break
        while m % p == 0:
            counts[p] = counts.get(p, 0) + 1
            m //= p
    if m > 1:
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
            m = 1
    if m > 1:
        for p in _extended_trial_primes():
            if p * p > m:
                break
            if m % p == 0:
                while m % p == 0:
                    counts[p] = counts.get(p, 0) + 1
                    m //= p
                if m == 1 or is_prime(m):
                    break
    if m > 1:
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
        else:
            rng = random.Random(config.FACTOR_RNG_SEED)
            stack = [m]
            while stack:
                v = stack.pop()
                if is_prime(v):
                    counts[v] = counts.get(v, 0) + 1
                    continue
                d = _brent_rho(v, rng)
                stack.append(d)
                stack.append(v // d)
    return Factorization(tuple(PrimePower(p, a) for p, a in sorted(counts.items())))


class PrimeSieve:
    """Primality table up to ``limit``; immutable once built."""

    def __init__(self, limit: int, mask: np.ndarray):
        self.limit = limit
        mask.setflags(write=False)
        self._mask = mask
        self._primes: np.ndarray | None = None

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    def is_prime(self, n: int) -> bool:
        if not 0 <= n <= self.limit:
            raise ValueError(f"{n} exceeds sieve limit {self.limit}")
        return bool(self._mask[n])

    def primes(self) -> np.ndarray:
        if self._primes is None:
            self._primes = np.nonzero(self._mask)[0]
            self._primes.setflags(write=False)
        return self._primes

    def primes_up_to(self, x: int) -> np.ndarray:
        if x > self.limit:
            raise ValueError(f"{x} exceeds sieve limit {self.limit}")
        ps = self.primes()
        return ps[: np.searchsorted(ps, x, side="right")]

    def iter_primes_up_to(self, x: int):
        for p in self.primes_up_to(x):
            yield int(p)

    def count_up_to(self, x: int) -> int:
        if x > self.limit:
            raise ValueError(f"{x} exceeds sieve limit {self.limit}")
        if x < 2:
            return 0
        return int(np.count_nonzero(self._mask[: x + 1]))


def sieve_primes(limit: int) -> PrimeSieve:
    """Sieve of Eratosthenes up to ``limit`` (inclusive)."""
    limit = operator.index(limit)
    if limit < 2:
        raise ValueError("sieve limit must be at least 2")
    if limit > config.SIEVE_LIMIT_CAP:
        raise ValueError(
            f"sieve limit {limit} exceeds configured memory budget {config.SIEVE_LIMIT_CAP}"
        )
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return PrimeSieve(limit, mask)


def prime_count(x: int, sieve: PrimeSieve) -> int:
    """Exact count of primes <= x; x must not exceed the sieve limit."""
    return sieve.count_up_to(operator.index(x))


class SmallestFactorTable:
    """Smallest-prime-factor table for fast bulk factorization up to ``limit``."""

    def __init__(self, limit: int):
        limit = operator.index(limit)
        if limit < 2:
            raise ValueError("factor table limit must be at least 2")
        if limit > config.SIEVE_LIMIT_CAP:
            raise ValueError(
                f"factor table limit {limit} exceeds configured memory budget"
            )
        spf = np.zeros(limit + 1, dtype=np.int64)
        spf[1] = 1
        for i in range(2, math.isqrt(limit) + 1):
            if spf[i] == 0:
                sl = spf[i * i :: i]
                sl[sl == 0] = i
                spf[i] = i
        rest = np.nonzero(spf[2:] == 0)[0] + 2
        spf[rest] = rest
        spf.setflags(write=False)
        self.limit = limit
        self._spf = spf

    def factorize(self, n: int) -> Factorization:
        n = operator.index(n)
        if not 1 <= n <= self.limit:
            raise ValueError(f"{n} outside factor table range [1, {self.limit}]")
        factors = []
        while n > 1:
            p = int(self._spf[n])
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            factors.append(PrimePower(p, a))
        return Factorization(tuple(factors))


def carmichael_lambda(n: int) -> int:
    """Carmichael's lambda via the prime-power formula combined by lcm.

    lambda(p**e) = p**(e-1) * (p-1) for odd p or e <= 2; lambda(2**e) = 2**(e-2)
    for e >= 3; lambda(1) = lambda(2) = 1 by convention.
    """
    n = operator.index(n)
    if not 1 <= n < config.INT_WIDTH_LIMIT:
        raise ValueError(f"lambda input {n} outside supported range [1, 2^63)")
    lam = 1
    for pp in factorize(n):
        if pp.p == 2 and pp.a >= 3:
            contrib = 1 << (pp.a - 2)
        else:
            contrib = pp.p ** (pp.a - 1) * (pp.p - 1)
        lam = math.lcm(lam, contrib)
    return lam


def euler_phi(n: int) -> int:
    """Euler's totient via factorization."""
    n = operator.index(n)
    if n < 1:
        raise ValueError("totient requires n >= 1")
    out = 1
    for pp in factorize(n):
        out *= pp.p ** (pp.a - 1) * (pp.p - 1)
    return out


def multiplicative_order(a: int, n: int) -> int:
    """Least e >= 1 with a**e == 1 (mod n); requires gcd(a, n) = 1."""
    a = operator.index(a)
    n = operator.index(n)
    if n < 1:
        raise ValueError("modulus must be at least 1")
    if math.gcd(a, n) != 1:
        raise ValueError(f"gcd({a}, {n}) > 1: order undefined")
    if n == 1:
        return 1
    a %= n
    # Order divides the group size phi(n); strip primes that keep a**t == 1.
    t = euler_phi(n)
    for pp in factorize(t):
        for _ in range(pp.a):
            if t % pp.p == 0 and pow(a, t // pp.p, n) == 1:
                t //= pp.p
            else:
                break
    return t


def integer_nth_root(n: int, k: int) -> int:
    """Exact floor(n ** (1/k)) using integer Newton iteration.

    Never consults floating point, so boundary cases n = m**k are exact.
    """
    n = operator.index(n)
    k = operator.index(k)
    if n < 0 or k < 1:
        raise ValueError("integer_nth_root requires n >= 0 and k >= 1")
    if n == 0:
        return 0
    if k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def count_proper_prime_powers(t: int, sieve: PrimeSieve | None = None) -> int:
    """Exact count of p**a <= t with a >= 2, as a sum of prime counts at
    exact integer k-th roots of t."""
    t = operator.index(t)
    if t < 1:
        raise ValueError("count_proper_prime_powers requires t >= 1")
    if t < 4:
        return 0
    root2 = integer_nth_root(t, 2)
    if sieve is None:
        sieve = sieve_primes(max(root2, 2))
    elif root2 > sieve.limit:
        raise ValueError(f"sqrt({t}) exceeds sieve limit {sieve.limit}")
    total = 0
    k = 2
    while True:
        r = integer_nth_root(t, k)
        if r < 2:
            break
        total += sieve.count_up_to(r)
        k += 1
    return total

"""Numerical and combinatorial machinery: Hurwitz zeta, the progression
matrix and its resolvent column sums, prime-chain enumeration, f-value
censuses, the logarithmic integral, and the progression prime-count check.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import arith, config, factor_tree

__all__ = [
    "NotConvergentError",
    "ProgressionMatrix",
    "ChainReport",
    "CensusReport",
    "ErhReport",
    "hurwitz_zeta",
    "build_progression_matrix",
    "spectral_radius",
    "resolvent_matrix",
    "compute_C_eps",
    "compute_c_eps",
    "enumerate_chains",
    "census_f_ge",
    "census_f_equal",
    "log_integral",
    "check_erh_bound",
]

_ZETA_TOL = 1e-12
_MIN_S = 1.01
_RESIDUAL_TOL = 1e-9
_POWER_ITER_TOL = 1e-10
_POWER_ITER_CAP = 100_000
_CENSUS_HYPOTHESIS_Y = 10 ** 10


class NotConvergentError(Exception):
    """Raised when the matrix power series diverges (spectral radius >= 1)."""


def hurwitz_zeta(s: float, alpha: float) -> float:
    """Hurwitz zeta sum_{n>=0} (n + alpha)**-s to absolute error <= 1e-12.

    Direct summation of the first N terms, then the integral tail with the
    half-term and first curvature corrections; the next correction term
    bounds the truncation error and fixes N.
    """
    s = float(s)
    alpha = float(alpha)
    if s < _MIN_S:
        raise ValueError(f"s = {s} too close to 1 (minimum {_MIN_S})")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha = {alpha} outside (0, 1]")
    coef = s * (s + 1.0) * (s + 2.0) / 720.0
    n_for_tol = math.ceil((coef / (0.1 * _ZETA_TOL)) ** (1.0 / (s + 3.0)))
    n = max(10_000, n_for_tol)
    terms = (np.arange(n, dtype=np.float64) + alpha) ** (-s)
    head = math.fsum(terms.tolist())
    base = n + alpha
    tail = (
        base ** (1.0 - s) / (s - 1.0)
        + 0.5 * base ** (-s)
        + s / 12.0 * base ** (-s - 1.0)
    )
    return head + tail


@dataclass(frozen=True)
class ProgressionMatrix:
    """Square matrix over the units mod w: entry (b, a) is the sum of m**-s
    over m >= 1 with a*m + 1 == b (mod w)."""

    w: int
    s: float
    units: tuple[int, ...]
    entries: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.units)

    def entry(self, b: int, a: int) -> float:
        i = self.units.index(b % self.w)
        j = self.units.index(a % self.w)
        return float(self.entries[i, j])


def _check_primorial(w: int) -> None:
    parts = arith.factorize(w)
    if any(pp.a != 1 for pp in parts):
        raise ValueError(f"w = {w} is not squarefree")
    primes = [pp.p for pp in parts]
    expected = []
    candidate = 2
    while len(expected) < len(primes):
        if arith.is_prime(candidate):
            expected.append(candidate)
        candidate += 1
    if primes != expected:
        raise ValueError(f"w = {w} is not a product of the primes up to some y")


def build_progression_matrix(w: int, s: float) -> ProgressionMatrix:
    """Progression matrix for squarefree primorial w and exponent s > 1.

    Each entry reduces to w**-s * zeta(s, c/w) with c = a^-1 (b - 1) mod w
    taken in [1, w] (the class c = 0 is the progression w, 2w, ... and maps
    to alpha = 1).
    """
    w = operator.index(w)
    s = float(s)
    if w < 2:
        raise ValueError("w must be at least 2")
    _check_primorial(w)
    units = tuple(u for u in range(1, w) if math.gcd(u, w) == 1) or (1,)
    dim = len(units)
    if dim > __import__("carmkit.config", fromlist=["MATRIX_DIM_CAP"]).MATRIX_DIM_CAP:
        raise ValueError(f"matrix dimension {dim} exceeds configured cap")
    scale = float(w) ** (-s)
    zeta_by_class: dict[int, float] = {}

    def class_value(c: int) -> float:
        if c not in zeta_by_class:
            alpha = 1.0 if c == 0 else c / w
            zeta_by_class[c] = scale * hurwitz_zeta(s, alpha)
        return zeta_by_class[c]

    entries = np.empty((dim, dim), dtype=np.float64)
    for j, a in enumerate(units):
        inv = pow(a, -1, w)
        for i, b in enumerate(units):
            entries[i, j] = class_value(inv * (b - 1) % w)
    entries.setflags(write=False)
    return ProgressionMatrix(w=w, s=s, units=units, entries=entries)


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, ProgressionMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=np.float64)


def spectral_radius(matrix) -> float:
    """Dominant eigenvalue of an entrywise-positive matrix by power iteration
    from the all-ones vector (relative tolerance 1e-10)."""
    arr = _as_array(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(arr > 0):
        raise ValueError("power iteration requires strictly positive entries")
    v = np.ones(arr.shape[0])
    previous = 0.0
    for _ in range(_POWER_ITER_CAP):
        w_vec = arr @ v
        estimate = float(w_vec.sum() / v.sum())
        v = w_vec / w_vec.max()
        if abs(estimate - previous) <= _POWER_ITER_TOL * max(1.0, abs(estimate)):
            return estimate
        previous = estimate
    raise ArithmeticError("power iteration did not converge within the cap")


def resolvent_matrix(matrix) -> np.ndarray:
    """(I - M)^-1 by dense LU solve, with a mandatory residual check."""
    arr = _as_array(matrix)
    if spectral_radius(arr) >= 1.0:
        raise NotConvergentError(
            "spectral radius >= 1: the power series for (I - M)^-1 diverges"
        )
    n = arr.shape[0]
    lhs = np.eye(n) - arr
    inv = np.linalg.solve(lhs, np.eye(n))
    residual = float(np.abs(lhs @ inv - np.eye(n)).max())
    if residual > _RESIDUAL_TOL:
        raise ArithmeticError(
            f"resolvent residual {residual:.3e} exceeds {_RESIDUAL_TOL:.0e}"
        )
    return inv


def compute_C_eps(w: int, s: float) -> float:
    """Largest column sum of (I - M)^-1 for the progression matrix (w, s);
    an admissible chain-count constant at eps = s - 1."""
    matrix = build_progression_matrix(w, s)
    inv = resolvent_matrix(matrix)
    return float(inv.sum(axis=0).max())


def compute_c_eps(eps: float, C: float) -> float:
    """Census-bound constant C * (2^(-1-eps) - 6^(-1-eps)) * zeta(1+eps)
    * (0.44 + 2.43 / (1 + 2 eps))."""
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    C = float(C)
    if C < 0.0:
        raise ValueError("C must be nonnegative")
    zeta_value = hurwitz_zeta(1.0 + eps, 1.0)
    return (
        C
        * (2.0 ** (-1.0 - eps) - 6.0 ** (-1.0 - eps))
        * zeta_value
        * (0.44 + 2.43 / (1.0 + 2.0 * eps))
    )


@dataclass(frozen=True)
class ChainReport:
    p: int
    x: int
    count: int
    max_length: int
    eps: float
    C: float
    bound_value: float
    bound_satisfied: bool


def enumerate_chains(
    p: int,
    x: int,
    *,
    eps: float = 0.25,
    C: float = 7.37,
    sieve: arith.PrimeSieve | None = None,
) -> ChainReport:
    """Exact count of prime chains p = p_1 < ... < p_k <= x where each p_i
    divides p_{i+1} - 1, by depth-first search stepping the progression
    1 mod p_i through the sieve."""
    p = operator.index(p)
    x = operator.index(x)
    if not arith.is_prime(p):
        raise ValueError(f"{p} is not prime")
    if x < 1:
        raise ValueError("x must be >= 1")
    if sieve is None:
        sieve = arith.sieve_primes(max(x, 2))
    elif x > sieve.limit:
        raise ValueError(f"x = {x} exceeds sieve limit {sieve.limit}")
    mask = sieve.mask
    count = 0
    max_length = 0
    if p <= x:
        stack = [(p, 1)]
        while stack:
            v, depth = stack.pop()
            count += 1
            if depth > max_length:
                max_length = depth
            if v + 1 <= x:
                hits = np.nonzero(mask[v + 1 : x + 1 : v])[0]
                for k in hits:
                    stack.append((v + 1 + int(k) * v, depth + 1))
    bound_value = C * (x / p) ** (1.0 + eps)
    return ChainReport(
        p=p,
        x=x,
        count=count,
        max_length=max_length,
        eps=eps,
        C=C,
        bound_value=bound_value,
        bound_satisfied=count <= bound_value,
    )


@dataclass(frozen=True)
class CensusReport:
    x: int
    y: int
    count: int
    bound_value: float
    eps: float
    C: float
    out_of_hypothesis: bool
    unitary_filter: tuple[int, int] | None = None


def _census_context(x, sieve, cache, factorizer):
    if sieve is None:
        sieve = arith.sieve_primes(max(x, 2))
    elif x > sieve.limit:
        raise ValueError(f"x = {x} exceeds sieve limit {sieve.limit}")
    if cache is None:
        cache = factor_tree.FCache()
    if factorizer is None and x >= 3:
        factorizer = arith.SmallestFactorTable(x).factorize
    return sieve, cache, factorizer


def _unitary_divides(p: int, a: int, n: int) -> bool:
    pa = p ** a
    return n % pa == 0 and (n // pa) % p != 0


def census_f_ge(
    x: int,
    y: int,
    eps: float = 0.25,
    C: float = 7.37,
    *,
    unitary_filter: tuple[int, int] | None = None,
    sieve: arith.PrimeSieve | None = None,
    cache: factor_tree.FCache | None = None,
    factorizer=None,
) -> CensusReport:
    """Exact count of primes q <= x with f(q) >= y, next to the analytic
    bound c(eps) x^(1+eps) / (y^(1/2+eps) log y).

    The bound's hypothesis needs y >= 10**10; smaller y is reported with
    ``out_of_hypothesis`` set.  ``unitary_filter=(p, a)`` restricts the count
    to primes with p**a exactly dividing q - 1.
    """
    x = operator.index(x)
    y = operator.index(y)
    if x < 2:
        raise ValueError("x must be >= 2")
    if y < 2:
        raise ValueError("y must be >= 2")
    sieve, cache, factorizer = _census_context(x, sieve, cache, factorizer)
    count = 0
    for q in sieve.iter_primes_up_to(x):
        if unitary_filter is not None and not _unitary_divides(
            unitary_filter[0], unitary_filter[1], q - 1
        ):
            continue
        if factor_tree.f_of(q, cache, factorizer=factorizer) >= y:
            count += 1
    bound_value = (
        compute_c_eps(eps, C) * x ** (1.0 + eps) / (y ** (0.5 + eps) * math.log(y))
    )
    return CensusReport(
        x=x,
        y=y,
        count=count,
        bound_value=bound_value,
        eps=eps,
        C=C,
        out_of_hypothesis=y < _CENSUS_HYPOTHESIS_Y,
        unitary_filter=unitary_filter,
    )


def census_f_equal(
    x: int,
    v: int,
    *,
    sieve: arith.PrimeSieve | None = None,
    cache: factor_tree.FCache | None = None,
    factorizer=None,
) -> int:
    """Exact count of primes q <= x with f(q) == v."""
    x = operator.index(x)
    v = operator.index(v)
    if v < 1:
        raise ValueError("v must be >= 1")
    if x < 2:
        return 0
    sieve, cache, factorizer = _census_context(x, sieve, cache, factorizer)
    count = 0
    for q in sieve.iter_primes_up_to(x):
        if factor_tree.f_of(q, cache, factorizer=factorizer) == v:
            count += 1
    return count


def log_integral(x: float) -> float:
    """Integral of dt / log t from 2 to x by adaptive quadrature."""
    x = float(x)
    if x < 2.0:
        raise ValueError("log_integral requires x >= 2")
    if x == 2.0:
        return 0.0
    value, _ = quad(
        lambda t: 1.0 / math.log(t), 2.0, x, epsabs=1e-9, epsrel=1e-11, limit=500
    )
    return float(value)


@dataclass(frozen=True)
class ErhReport:
    x: int
    m: int
    b: int
    pi_xmb: int
    main_term: float
    error_bound: float
    holds: bool


def check_erh_bound(
    x: int, m: int, b: int, *, sieve: arith.PrimeSieve | None = None
) -> ErhReport:
    """Exact progression prime count against li(x)/phi(m) +- sqrt(x) log(x m^2).

    Requires m >= 2 and gcd(b, m) = 1.
    """
    x = operator.index(x)
    m = operator.index(m)
    b = operator.index(b)
    if m < 2:
        raise ValueError("modulus must be >= 2")
    if math.gcd(b, m) != 1:
        raise ValueError(f"gcd({b}, {m}) > 1")
    if x < 2:
        raise ValueError("x must be >= 2")
    if sieve is None:
        sieve = arith.sieve_primes(x)
    primes = sieve.primes_up_to(x)
    pi_xmb = int(np.count_nonzero(primes % m == b % m))
    main_term = log_integral(x) / arith.euler_phi(m)
    error_bound = math.sqrt(x) * math.log(x * m * m)
    return ErhReport(
        x=x,
        m=m,
        b=b,
        pi_xmb=pi_xmb,
        main_term=main_term,
        error_bound=error_bound,
        holds=abs(pi_xmb - main_term) <= error_bound,
    )

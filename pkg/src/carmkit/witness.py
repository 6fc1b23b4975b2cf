"""Witness searches and range verification sweeps.

For a prime power p**a, a witness is a prime q with p**a exactly dividing
q - 1 and f(q) < p**(a+1).  Candidates are q = k * p**a + 1 with p not
dividing k, which enforces exact divisibility by construction.  Any prime
candidate below p**(2a+1) is a witness outright (every prime power dividing
q - 1 is then < p**(a+1)), recorded with the "shortcut" certificate; beyond
that threshold f(q) must be computed in full.
"""

from __future__ import annotations

import math
import operator
import time
from dataclasses import dataclass, replace
from enum import Enum
from multiprocessing import get_context

from . import arith, config, factor_tree

__all__ = [
    "Certificate",
    "WitnessRecord",
    "SweepMode",
    "SearchPolicy",
    "RangeReport",
    "Checkpoint",
    "find_witness",
    "verify_range",
    "proper_prime_powers_up_to",
    "checkpoint_save",
    "checkpoint_load",
    "write_witness_log",
]


class Certificate(str, Enum):
    SHORTCUT = "shortcut"  # q < p**(2a+1): no f computation needed
    FULL_F = "full-f"      # f(q) computed and compared against p**(a+1)


@dataclass(frozen=True)
class WitnessRecord:
    p: int
    a: int
    q: int
    certificate: Certificate
    f_value: int | None = None


@dataclass(frozen=True)
class SweepMode:
    """Range descriptor: kind "a1" sweeps primes p <= bound with a = 1;
    kind "pp" sweeps proper prime powers p**a <= bound (a >= 2)."""

    kind: str
    bound: int

    def __post_init__(self):
        if self.kind not in ("a1", "pp"):
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        minimum = 2 if self.kind == "a1" else 4
        if self.bound < minimum:
            raise ValueError(f"{self.kind} sweep bound must be >= {minimum}")


@dataclass(frozen=True)
class SearchPolicy:
    """Search caps for one prime power.

    The shortcut region is always q < p**(2a+1); ``shortcut_cap`` lowers it.
    With ``allow_full_f`` the search continues past the threshold up to
    ``full_limit``, computing f in full for each candidate.
    """

    shortcut_cap: int | None = None
    allow_full_f: bool = False
    full_limit: int | None = None


DEFAULT_POLICY = SearchPolicy()


@dataclass(frozen=True)
class RangeReport:
    mode: SweepMode
    examined: int
    witnessed: int
    failures: tuple[tuple[int, int], ...]
    records: tuple[WitnessRecord, ...]
    complete: bool
    elapsed_seconds: float

    def __post_init__(self):
        if self.examined != self.witnessed + len(self.failures):
            raise ValueError("examined must equal witnessed + failures")

    def to_lines(self) -> list[str]:
        lines = [
            f"mode={self.mode.kind} bound={self.mode.bound}",
            f"examined={self.examined}",
            f"witnessed={self.witnessed}",
            f"failures={len(self.failures)}",
        ]
        lines.extend(f"failure={p}^{a}" for p, a in self.failures)
        lines.append(f"complete={'true' if self.complete else 'false'}")
        return lines


def _max_f_below(p: int, a: int) -> int:
    return p ** (a + 1)


def _full_f_accepts(p: int, a: int, q: int, cache, factorizer) -> tuple[bool, int]:
    f = factor_tree.f_of(q, cache, factorizer=factorizer)
    return f < _max_f_below(p, a), f


def _search(
    p: int,
    a: int,
    *,
    limit: int,
    allow_full_f: bool,
    shortcut_below: int | None = None,
    cache=None,
    factorizer=None,
) -> WitnessRecord | None:
    """Smallest witness with q <= limit, or None.

    ``shortcut_below`` overrides the q < p**(2a+1) shortcut threshold; it
    exists for tests that need to drive the full-f branch.
    """
    pa = p ** a
    threshold = p ** (2 * a + 1) if shortcut_below is None else shortcut_below
    if cache is None and allow_full_f:
        cache = factor_tree.FCache()
    # k even for odd p (odd q), k odd for p = 2 (p must not divide k).
    k = 1 if p == 2 else 2
    step = 2
    while True:
        q = k * pa + 1
        if q > limit:
            return None
        if q >= arith.SPRP_CERTIFIED_LIMIT:
            raise ValueError(
                f"witness candidate {q} for {p}^{a} exceeds the certified "
                f"primality range"
            )
        if k % p != 0 and arith.is_prime(q, wide=True):
            if q < threshold:
                return WitnessRecord(p, a, q, Certificate.SHORTCUT)
            if allow_full_f:
                ok, f = _full_f_accepts(p, a, q, cache, factorizer)
                if ok:
                    return WitnessRecord(p, a, q, Certificate.FULL_F, f)
        k += step


def find_witness(p: int, a: int, search_limit: int) -> WitnessRecord | None:
    """Smallest prime q <= search_limit with p**a exactly dividing q - 1 and
    f(q) < p**(a+1); None when no such q exists below the limit."""
    p = operator.index(p)
    a = operator.index(a)
    search_limit = operator.index(search_limit)
    if not arith.is_prime(p):
        raise ValueError(f"{p} is not prime")
    if a < 1:
        raise ValueError("exponent must be >= 1")
    pa = p ** a
    if pa >= config.INT_WIDTH_LIMIT:
        raise ValueError(f"{p}^{a} outside supported range")
    if search_limit < pa + 1:
        raise ValueError(f"search limit {search_limit} below first candidate {pa + 1}")
    return _search(p, a, limit=search_limit, allow_full_f=True)


def proper_prime_powers_up_to(bound: int, sieve: arith.PrimeSieve | None = None):
    """Proper prime powers p**a <= bound as (p, a) pairs sorted by (p, a)."""
    bound = operator.index(bound)
    if bound < 4:
        return []
    root = arith.integer_nth_root(bound, 2)
    if sieve is None or sieve.limit < root:
        sieve = arith.sieve_primes(max(root, 2))
    tasks = []
    for p in sieve.iter_primes_up_to(root):
        a = 2
        value = p * p
        while value <= bound:
            tasks.append((p, a))
            a += 1
            value *= p
    return tasks


def _mode_tasks(mode: SweepMode, sieve: arith.PrimeSieve | None) -> list[tuple[int, int]]:
    if mode.kind == "a1":
        if sieve is None or sieve.limit < mode.bound:
            sieve = arith.sieve_primes(mode.bound)
        return [(p, 1) for p in sieve.iter_primes_up_to(mode.bound)]
    return proper_prime_powers_up_to(mode.bound, sieve)


def _task_limit(p: int, a: int, policy: SearchPolicy) -> int:
    # Default sweep searches the shortcut region only: q < p**(2a+1).
    cap = p ** (2 * a + 1) - 1
    if policy.shortcut_cap is not None:
        cap = min(cap, policy.shortcut_cap)
    if policy.allow_full_f and policy.full_limit is not None:
        cap = max(cap, policy.full_limit)
    return cap


def _run_tasks(args) -> list[WitnessRecord | None]:
    tasks, policy = args
    out = []
    cache = factor_tree.FCache() if policy.allow_full_f else None
    for p, a in tasks:
        out.append(
            _search(
                p,
                a,
                limit=_task_limit(p, a, policy),
                allow_full_f=policy.allow_full_f,
                cache=cache,
            )
        )
    return out


@dataclass(frozen=True)
class Checkpoint:
    kind: str
    bound: int
    last_p: int
    last_a: int
    records: tuple[WitnessRecord, ...]
    failures: tuple[tuple[int, int], ...]


def _record_line(rec: WitnessRecord) -> str:
    f_text = "" if rec.f_value is None else str(rec.f_value)
    return f"{rec.p},{rec.a},{rec.q},{rec.certificate.value},{f_text}"


def _failure_line(p: int, a: int) -> str:
    return f"{p},{a},-,none,"


def write_witness_log(records, fh) -> None:
    """Witness log: one "p,a,q,certificate,f" line per record, sorted by (p, a)."""
    for rec in sorted(records, key=lambda r: (r.p, r.a)):
        fh.write(_record_line(rec) + "\n")


def checkpoint_save(ck: Checkpoint, path) -> None:
    lines = {(rec.p, rec.a): _record_line(rec) for rec in ck.records}
    lines.update({(p, a): _failure_line(p, a) for p, a in ck.failures})
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"mode={ck.kind},bound={ck.bound},last={ck.last_p}^{ck.last_a},"
            f"lines={len(lines)}\n"
        )
        for key in sorted(lines):
            fh.write(lines[key] + "\n")


def checkpoint_load(path) -> Checkpoint:
    with open(path, "r", encoding="ascii") as fh:
        raw = [line.rstrip("\n") for line in fh if line.strip()]
    if not raw:
        raise ValueError("empty checkpoint file")
    header = dict(item.split("=", 1) for item in raw[0].split(","))
    try:
        kind = header["mode"]
        bound = int(header["bound"])
        last_p, last_a = (int(x) for x in header["last"].split("^"))
        expected = int(header["lines"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed checkpoint header: {raw[0]!r}") from exc
    body = raw[1:]
    if len(body) != expected:
        raise ValueError(
            f"checkpoint corrupted: header promises {expected} lines, found {len(body)}"
        )
    records: list[WitnessRecord] = []
    failures: list[tuple[int, int]] = []
    previous = (0, 0)
    for line in body:
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"malformed checkpoint line: {line!r}")
        p, a = int(parts[0]), int(parts[1])
        if (p, a) <= previous:
            raise ValueError("checkpoint lines out of order")
        if (p, a) > (last_p, last_a):
            raise ValueError(f"checkpoint line {p}^{a} beyond last completed task")
        previous = (p, a)
        if parts[2] == "-":
            failures.append((p, a))
        else:
            f_value = int(parts[4]) if parts[4] else None
            records.append(
                WitnessRecord(p, a, int(parts[2]), Certificate(parts[3]), f_value)
            )
    return Checkpoint(kind, bound, last_p, last_a, tuple(records), tuple(failures))


def verify_range(
    mode: SweepMode,
    policy: SearchPolicy = DEFAULT_POLICY,
    *,
    sieve: arith.PrimeSieve | None = None,
    workers: int = 1,
    checkpoint: Checkpoint | None = None,
    checkpoint_path=None,
    max_tasks: int | None = None,
) -> RangeReport:
    """Search a witness for every prime power in the range.

    Tasks run in (p, a) order; with several workers the task list is chunked
    and results are merged back in task order, so reports are identical for
    any worker count.  ``max_tasks`` stops early after that many tasks and,
    together with ``checkpoint_path``, persists progress for later resumption.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    started = time.perf_counter()
    tasks = _mode_tasks(mode, sieve)
    records: list[WitnessRecord] = []
    failures: list[tuple[int, int]] = []
    if checkpoint is not None:
        if checkpoint.kind != mode.kind or checkpoint.bound != mode.bound:
            raise ValueError(
                f"checkpoint mode {checkpoint.kind},{checkpoint.bound} does not "
                f"match requested {mode.kind},{mode.bound}"
            )
        done = (checkpoint.last_p, checkpoint.last_a)
        records.extend(checkpoint.records)
        failures.extend(checkpoint.failures)
        tasks = [t for t in tasks if t > done]
    pending = tasks if max_tasks is None else tasks[:max_tasks]
    complete = len(pending) == len(tasks)

    if workers == 1 or len(pending) < 2 * workers:
        results = _run_tasks((pending, policy))
    else:
        chunk = max(16, math.ceil(len(pending) / (workers * 8)))
        batches = [pending[i : i + chunk] for i in range(0, len(pending), chunk)]
        with get_context("fork").Pool(workers) as pool:
            chunked = pool.map(_run_tasks, [(batch, policy) for batch in batches])
        results = [rec for batch in chunked for rec in batch]

    for (p, a), rec in zip(pending, results):
        if rec is None:
            failures.append((p, a))
        else:
            records.append(rec)
    report = RangeReport(
        mode=mode,
        examined=len(records) + len(failures),
        witnessed=len(records),
        failures=tuple(sorted(failures)),
        records=tuple(sorted(records, key=lambda r: (r.p, r.a))),
        complete=complete,
        elapsed_seconds=time.perf_counter() - started,
    )
    if checkpoint_path is not None:
        last = pending[-1] if pending else (
            (checkpoint.last_p, checkpoint.last_a) if checkpoint else (0, 0)
        )
        checkpoint_save(
            Checkpoint(
                mode.kind, mode.bound, last[0], last[1], report.records, report.failures
            ),
            checkpoint_path,
        )
    return report

"""Pratt-style factor trees over q-1 and the largest-proper-prime-power
invariant f(q).

The tree below a prime q links q to the unitary prime-power divisors of
q - 1; each prime-power node expands its base prime the same way, so every
leaf is a power of 2.  f(q) is the largest proper prime power (exponent >= 2)
in the tree, or 1 when there is none, computed here by the equivalent
memoized recursion on factorizations rather than by materializing trees.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable

from . import arith
from .arith import Factorization, PrimePower

__all__ = [
    "TreeNode",
    "FCache",
    "build_tree",
    "f_of",
    "largest_prime_power_divisor",
    "export_dot",
    "tree_max_proper_prime_power",
    "tree_depth",
]

Factorizer = Callable[[int], Factorization]


@dataclass(frozen=True)
class TreeNode:
    """One prime-power node; the root of a tree is the node (q, 1)."""

    p: int
    a: int
    children: tuple["TreeNode", ...]

    @property
    def value(self) -> int:
        return self.p ** self.a

    @property
    def label(self) -> str:
        return str(self.p) if self.a == 1 else f"{self.p}^{self.a}"


class FCache:
    """Append-only map prime -> f(prime).

    Concurrent reads are safe; inserts are serialized by the interpreter and
    must agree with any value already present.  The file format is one
    "q,f" pair per line, decimal, sorted ascending by q.
    """

    def __init__(self, values: dict[int, int] | None = None):
        self._values: dict[int, int] = dict(values) if values else {}

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, q: int) -> bool:
        return q in self._values

    def __getitem__(self, q: int) -> int:
        return self._values[q]

    def get(self, q: int) -> int | None:
        return self._values.get(q)

    def put(self, q: int, f: int) -> None:
        existing = self._values.get(q)
        if existing is not None and existing != f:
            raise ValueError(f"cache disagreement for {q}: {existing} vs {f}")
        self._values[q] = f

    def merge(self, other: "FCache") -> None:
        for q, f in other._values.items():
            self.put(q, f)

    def as_dict(self) -> dict[int, int]:
        return dict(self._values)

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            for q in sorted(self._values):
                fh.write(f"{q},{self._values[q]}\n")

    @classmethod
    def load(cls, path) -> "FCache":
        cache = cls()
        with open(path, "r", encoding="ascii") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    q_text, f_text = line.split(",")
                    cache.put(int(q_text), int(f_text))
                except ValueError as exc:
                    raise ValueError(f"bad cache line {lineno}: {line!r}") from exc
        return cache


def _require_prime(q: int) -> int:
    q = operator.index(q)
    if not arith.is_prime(q):
        raise ValueError(f"{q} is not prime")
    return q


def build_tree(q: int, *, factorizer: Factorizer | None = None) -> TreeNode:
    """Fully expanded tree rooted at the prime q.

    Child prime powers at each node multiply to (base prime - 1) and are
    ordered by increasing base.  Subtrees are shared between equal primes.
    """
    q = _require_prime(q)
    fac = factorizer or arith.factorize
    expanded: dict[int, tuple[TreeNode, ...]] = {}
    stack = [q]
    while stack:
        v = stack[-1]
        if v in expanded:
            stack.pop()
            continue
        parts = fac(v - 1)
        missing = [pp.p for pp in parts if pp.p not in expanded]
        if missing:
            stack.extend(missing)
            continue
        expanded[v] = tuple(TreeNode(pp.p, pp.a, expanded[pp.p]) for pp in parts)
        stack.pop()
    return TreeNode(q, 1, expanded[q])


def f_of(
    q: int,
    cache: FCache | None = None,
    *,
    factorizer: Factorizer | None = None,
) -> int:
    """Largest proper prime power in the tree below q, or 1 when none.

    Computed by the recursion f(q) = max over q-1 = prod p_i**e_i of f(p_i)
    where e_i = 1 and p_i**e_i where e_i >= 2, with f(2) = 1.  Runs on an
    explicit work stack so long prime chains cannot hit recursion limits.
    """
    q = _require_prime(q)
    if cache is None:
        cache = FCache()
    fac = factorizer or arith.factorize
    stack = [q]
    while stack:
        v = stack[-1]
        if v in cache:
            stack.pop()
            continue
        parts = fac(v - 1)
        missing = [pp.p for pp in parts if pp.a == 1 and pp.p not in cache]
        if missing:
            stack.extend(missing)
            continue
        best = 1
        for pp in parts:
            candidate = cache[pp.p] if pp.a == 1 else pp.value
            if candidate > best:
                best = candidate
        cache.put(v, best)
        stack.pop()
    return cache[q]


def largest_prime_power_divisor(
    n: int, *, factorizer: Factorizer | None = None
) -> PrimePower:
    """The unitary prime-power divisor of n with the largest value."""
    n = operator.index(n)
    if n < 2:
        raise ValueError("largest_prime_power_divisor requires n >= 2")
    fac = factorizer or arith.factorize
    return max(fac(n), key=lambda pp: pp.value)


def export_dot(tree: TreeNode) -> str:
    """Deterministic DOT rendering: preorder node ids, children by base."""
    node_lines: list[str] = []
    edge_lines: list[str] = []
    counter = 0
    stack: list[tuple[TreeNode, int | None]] = [(tree, None)]
    while stack:
        node, parent = stack.pop()
        nid = counter
        counter += 1
        node_lines.append(f'  n{nid} [label="{node.label}"];')
        if parent is not None:
            edge_lines.append(f"  n{parent} -> n{nid};")
        for child in reversed(node.children):
            stack.append((child, nid))
    return "\n".join(["digraph factor_tree {", *node_lines, *edge_lines, "}"]) + "\n"


def tree_max_proper_prime_power(tree: TreeNode) -> int:
    """Largest node value with exponent >= 2 anywhere in the tree, else 1."""
    best = 1
    stack = [tree]
    while stack:
        node = stack.pop()
        if node.a >= 2 and node.value > best:
            best = node.value
        stack.extend(node.children)
    return best


def tree_depth(tree: TreeNode) -> int:
    """Depth in edges from the root to the deepest leaf."""
    depth = 0
    stack = [(tree, 0)]
    while stack:
        node, d = stack.pop()
        if d > depth:
            depth = d
        for child in node.children:
            stack.append((child, d + 1))
    return depth

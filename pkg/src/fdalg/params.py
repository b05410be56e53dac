"""Scalar parameters of the tensor-product subalgebra ``B = ⊗ (ℂ ⊕ M_ℓ(n)) ⊆ ⊗ M_k(n)``.

All products over ``n`` are truncated at the supplied levels.  Passing
``tail_p`` certifies ``α_n < 2^-(n+tail_p)`` for every ``n`` beyond the last
level and widens the result to an :class:`Enclosure` of the infinite product.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import format_rational, parse_rational

__all__ = [
    "LevelSequence",
    "Enclosure",
    "tail_trace",
    "summand_data",
    "truncated_product",
    "tail_lower_bound",
    "fed_product",
    "subset_sum_oracle",
    "factor_parameter_t",
    "factor_parameter_s",
    "MAX_ORACLE_LEVELS",
]

MAX_ORACLE_LEVELS = 20


@dataclass(frozen=True)
class LevelSequence:
    """Pairs ``(k(n), ℓ(n))`` with ``1 <= ℓ(n) <= k(n) - 1``."""

    levels: tuple[tuple[int, int], ...]

    def __init__(self, levels: Iterable[Sequence[int]]):
        pairs = tuple((int(k), int(ell)) for k, ell in levels)
        for n, (k, ell) in enumerate(pairs, start=1):
            if not 1 <= ell <= k - 1:
                raise ValueError(f"level {n}: need 1 <= ell <= k - 1, got k={k}, ell={ell}")
        object.__setattr__(self, "levels", pairs)

    def __len__(self) -> int:
        return len(self.levels)

    def k(self, n: int) -> int:
        return self.levels[n - 1][0]

    def ell(self, n: int) -> int:
        return self.levels[n - 1][1]

    def alpha(self, n: int) -> Fraction:
        k, ell = self.levels[n - 1]
        return Fraction(ell, k)

    @property
    def alphas(self) -> list[Fraction]:
        return [Fraction(ell, k) for k, ell in self.levels]

    @classmethod
    def parse(cls, text: str) -> "LevelSequence":
        """Read ``"k1:l1,k2:l2,..."``."""
        text = text.strip()
        if not text:
            return cls([])
        pairs = []
        for item in text.split(","):
            k, _, ell = item.partition(":")
            if not _:
                raise ValueError(f"level {item!r} is not of the form k:l")
            pairs.append((int(k), int(ell)))
        return cls(pairs)

    def to_json(self) -> dict:
        return {"levels": [list(p) for p in self.levels]}

    @classmethod
    def from_json(cls, data: dict) -> "LevelSequence":
        return cls(data["levels"])


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", parse_rational(self.lo))
        object.__setattr__(self, "hi", parse_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: Fraction) -> "Enclosure":
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_open(self, x) -> bool:
        return self.lo < x < self.hi

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}

    @classmethod
    def from_json(cls, data: dict) -> "Enclosure":
        return cls(parse_rational(data["lo"]), parse_rational(data["hi"]))


def tail_trace(seq: LevelSequence, start: int, stop: int) -> Fraction:
    """``Π_{i=start}^{stop} (1 - α_i)``, inclusive, 1-based."""
    if not 1 <= start <= stop <= len(seq):
        raise IndexError(f"need 1 <= {start} <= {stop} <= {len(seq)}")
    out = Fraction(1)
    for i in range(start, stop + 1):
        out *= 1 - seq.alpha(i)
    return out


def summand_data(seq: LevelSequence, subset: Iterable[int]) -> tuple[int, Fraction]:
    """Size ``m(F)`` and minimal-projection trace ``λ_F`` of the summand indexed by ``F``.

    ``λ`` is the truncated product ``Π_{n<=N} (1 - α_n)``.
    """
    F = sorted(set(subset))
    N = len(seq)
    if any(not 1 <= n <= N for n in F):
        raise ValueError(f"subset {F} is not contained in 1..{N}")
    lam = tail_trace(seq, 1, N) if N else Fraction(1)
    size = 1
    denom = Fraction(1)
    for n in F:
        size *= seq.ell(n)
        denom *= seq.k(n) * (1 - seq.alpha(n))
    return size, lam / denom


def truncated_product(seq: LevelSequence, start: int = 1) -> Fraction:
    """``Π_{n=start}^{N} ((1 - α_n)² + 1/k(n)²)``; empty product is 1."""
    out = Fraction(1)
    for n in range(start, len(seq) + 1):
        out *= (1 - seq.alpha(n)) ** 2 + Fraction(1, seq.k(n) ** 2)
    return out


def tail_lower_bound(N: int, tail_p: int) -> Fraction:
    """Lower bound on ``Π_{n>N} ((1-α_n)² + 1/k(n)²)`` given ``α_n < 2^-(n+p)``.

    Each factor is at least ``(1 - 2^-(n+p))² >= 1 - 2^-(n+p)+1`` and the
    Weierstrass product inequality sums the defects to ``2^-(N+p)+1``.
    The factors never exceed 1, so the upper bound is 1.
    """
    return max(Fraction(0), 1 - Fraction(2) ** (1 - N - tail_p))


def _widen(exact: Fraction, scale: Fraction, N: int, tail_p: Optional[int], sign: int) -> Enclosure:
    # value = exact when the tail product is 1; the tail moves it by sign * scale * (1 - T)
    if tail_p is None:
        return Enclosure.point(exact)
    slack = scale * (1 - tail_lower_bound(N, tail_p))
    if sign > 0:
        return Enclosure(exact, exact + slack)
    return Enclosure(exact - slack, exact)


def fed_product(seq: LevelSequence, tail_p: Optional[int] = None) -> Enclosure:
    """Free entropy dimension ``1 - Π ((1-α_n)² + 1/k(n)²)`` of ``B``."""
    prod = truncated_product(seq)
    return _widen(1 - prod, prod, len(seq), tail_p, +1)


def subset_sum_oracle(seq: LevelSequence) -> Fraction:
    """``1 - Σ_F λ_F²`` by enumerating every ``F ⊆ {1..N}``.

    Each ``λ_F`` is built on its own (depth first, one factor per level), so
    the result does not rely on the product formula.
    """
    N = len(seq)
    if N > MAX_ORACLE_LEVELS:
        raise ValueError(f"refusing to enumerate 2^{N} subsets (limit {MAX_ORACLE_LEVELS} levels)")
    lam = tail_trace(seq, 1, N) if N else Fraction(1)
    # dividing by k(n)(1 - α_n) is the same as dividing by k(n) - ℓ(n)
    divisors = [seq.k(n) - seq.ell(n) for n in range(1, N + 1)]
    total = Fraction(0)
    stack = [(0, lam)]
    while stack:
        depth, value = stack.pop()
        if depth == N:
            total += value * value
            continue
        stack.append((depth + 1, value))
        stack.append((depth + 1, value / divisors[depth]))
    return 1 - total


def factor_parameter_t(seq: LevelSequence, tail_p: Optional[int] = None) -> Enclosure:
    """``t = 1 + Π ((1-α_n)² + 1/k(n)²)``, which equals ``2 - δ₀``."""
    prod = truncated_product(seq)
    return _widen(1 + prod, prod, len(seq), tail_p, -1)


def _corner_factor(seq: LevelSequence) -> Fraction:
    alpha = seq.alpha(1)
    return (1 / alpha - 1) ** 2 + Fraction(1, seq.ell(1) ** 2)


def factor_parameter_s(seq: LevelSequence, tail_p: Optional[int] = None) -> Enclosure:
    """Parameter of the corner cut down by the unit of ``M_ℓ(1)``.

    ``s = 1 + ((1/α₁ - 1)² + 1/ℓ(1)²) · Π_{n>=2} ((1-α_n)² + 1/k(n)²)``.
    """
    if len(seq) < 1:
        raise ValueError("s needs at least one level")
    gamma = _corner_factor(seq) * truncated_product(seq, start=2)
    return _widen(1 + gamma, gamma, len(seq), tail_p, -1)

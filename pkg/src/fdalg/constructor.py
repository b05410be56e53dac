"""Level-by-level choice of the parameters ``α_m``, ``j(m)``, ``k(m)``, ``ℓ(m)`` for a target ``s``.

Given a rational target ``s > 1`` the constructor picks, level by level,
``α_m = p(m)/q(m)`` and a multiplier ``j(m)`` so that the running product

    γ_m = ((1/α₁ - 1)² + 1/ℓ(1)²) · Π_{i=2}^{m} ((1 - α_i)² + 1/k(i)²)

satisfies ``s + 2^-(m+1) < 1 + γ_m < s + 2^-m``.  Every comparison is done in
exact rational arithmetic.  The dimensions ``t(m)`` of the finite-dimensional
representations feeding the next level are supplied by a pluggable oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Callable, Optional, Sequence

from .core import format_rational, parse_rational
from .params import Enclosure, LevelSequence, factor_parameter_s
from .report import Report

__all__ = [
    "Level",
    "ConstructionPlan",
    "simplest_rational",
    "choose_alpha1",
    "choose_alpha_m",
    "choose_j",
    "decay_exponent",
    "level_one_decay",
    "bracket",
    "build_plan",
    "verify_plan",
    "const_oracle",
]

LEFT, INSIDE, RIGHT = -1, 0, 1


def simplest_rational(locate: Callable[[Fraction], int]) -> Fraction:
    """Smallest-denominator rational in an open subinterval of ``(0, 1)``.

    ``locate(x)`` returns ``LEFT`` if ``x`` lies at or below the interval,
    ``RIGHT`` if at or above it and ``INSIDE`` otherwise.  The search walks the
    Stern-Brocot tree, taking runs of equal steps by doubling and bisection so
    that narrow intervals near 0 or 1 cost logarithmic time.  The first node
    found inside the interval has minimal denominator and, among those,
    minimal numerator.
    """
    lo_n, lo_d, hi_n, hi_d = 0, 1, 1, 1
    while True:
        mid = Fraction(lo_n + hi_n, lo_d + hi_d)
        where = locate(mid)
        if where == INSIDE:
            return mid
        if where == LEFT:
            # largest k with (lo + k*hi) still LEFT
            step = lambda k: Fraction(lo_n + k * hi_n, lo_d + k * hi_d)
            k = _run_length(lambda k: locate(step(k)) == LEFT)
            lo_n, lo_d = lo_n + k * hi_n, lo_d + k * hi_d
        else:
            step = lambda k: Fraction(hi_n + k * lo_n, hi_d + k * lo_d)
            k = _run_length(lambda k: locate(step(k)) == RIGHT)
            hi_n, hi_d = hi_n + k * lo_n, hi_d + k * lo_d


def _run_length(holds: Callable[[int], bool]) -> int:
    """Largest ``k >= 1`` with ``holds(k)``, given ``holds(1)`` and monotonicity."""
    lo, hi = 1, 2
    while holds(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            lo = mid
        else:
            hi = mid
    return lo


def bracket(s: Fraction, m: int) -> tuple[Fraction, Fraction]:
    """Open bracket ``(s + 2^-(m+1), s + 2^-m)`` for ``1 + γ_m``."""
    return s + Fraction(1, 2 ** (m + 1)), s + Fraction(1, 2 ** m)


def _strictly_inside(x: Fraction, lo: Fraction, hi: Fraction) -> bool:
    return lo < x < hi


def choose_alpha1(s) -> Fraction:
    """Simplest ``α₁`` with ``s + 1/4 < 1 + (1/α₁ - 1)² < s + 1/2``."""
    s = parse_rational(s)
    if s <= 1:
        raise ValueError(f"s must exceed 1, got {s}")
    lo, hi = s - 1 + Fraction(1, 4), s - 1 + Fraction(1, 2)

    def locate(x: Fraction) -> int:
        if x == 0:
            return LEFT
        v = (1 / x - 1) ** 2  # decreasing in x on (0, 1]
        if v >= hi:
            return LEFT
        if v <= lo:
            return RIGHT
        return INSIDE

    alpha = simplest_rational(locate)
    assert _strictly_inside(1 + (1 / alpha - 1) ** 2, *bracket(s, 1))
    return alpha


def choose_alpha_m(s, m: int, gamma_prev: Fraction) -> Fraction:
    """Simplest ``α_m`` with ``s + 2^-(m+1) < 1 + γ_{m-1}(1 - α_m)² < s + 2^-m``."""
    s = parse_rational(s)
    gamma_prev = parse_rational(gamma_prev)
    if m < 2:
        raise ValueError("choose_alpha_m handles levels m >= 2")
    if not _strictly_inside(1 + gamma_prev, *bracket(s, m - 1)):
        raise ValueError(
            f"corrupted plan: 1 + γ_{m - 1} = {1 + gamma_prev} is outside the level-{m - 1} bracket")
    lo_b, hi_b = bracket(s, m)
    lo, hi = (lo_b - 1) / gamma_prev, (hi_b - 1) / gamma_prev

    def locate(x: Fraction) -> int:
        v = (1 - x) ** 2
        if v >= hi:
            return LEFT
        if v <= lo:
            return RIGHT
        return INSIDE

    alpha = simplest_rational(locate)
    assert _strictly_inside(1 + gamma_prev * (1 - alpha) ** 2, lo_b, hi_b)
    return alpha


def _level_value(m: int, gamma_prev: Fraction, alpha: Fraction, k: int, ell: int) -> Fraction:
    """``γ_m`` from ``γ_{m-1}`` and the level-``m`` choices."""
    if m == 1:
        return (1 / alpha - 1) ** 2 + Fraction(1, ell * ell)
    return gamma_prev * ((1 - alpha) ** 2 + Fraction(1, k * k))


def choose_j(s, m: int, gamma_prev: Optional[Fraction], alpha: Fraction,
             t_prev: int = 1) -> tuple[int, int, int]:
    """Smallest ``j`` that puts the corrected value ``1 + γ_m`` strictly inside the level-``m`` bracket; returns ``(j, k, ℓ)``.

    At level 1 the correction term is ``1/ℓ(1)²`` with ``ℓ(1) = p·j``; later it
    is ``γ_{m-1}/k(m)²`` with ``k(m) = j·q·t(m-1)``.
    """
    s = parse_rational(s)
    alpha = parse_rational(alpha)
    p, q = alpha.numerator, alpha.denominator
    if m == 1:
        t_prev, gamma_prev = 1, Fraction(1)
        base = (1 / alpha - 1) ** 2
        unit = p  # ℓ = j * p
    else:
        gamma_prev = parse_rational(gamma_prev)
        base = gamma_prev * (1 - alpha) ** 2
        unit = q * t_prev  # k = j * q * t_prev
    lo, hi = bracket(s, m)
    if not _strictly_inside(1 + base, lo, hi):
        raise ValueError(f"α_{m} = {alpha} leaves 1 + γ outside the level-{m} bracket even before the correction term")
    # need gamma_prev / (j*unit)^2 < hi - 1 - base, i.e. (j*unit)^2 > gamma_prev / gap
    ratio = gamma_prev / (hi - 1 - base)
    j = max(1, isqrt(ratio.numerator // ratio.denominator) // unit)
    while j > 1 and (j - 1) ** 2 * unit * unit > ratio:
        j -= 1
    while (j * unit) ** 2 <= ratio:
        j += 1
    ell, k = j * p * t_prev, j * q * t_prev
    value = _level_value(m, gamma_prev, alpha, k, ell)
    assert _strictly_inside(1 + value, lo, hi)
    return j, k, ell


def decay_exponent(s) -> int:
    """Exponent ``p - 1`` where ``p`` is the largest integer with ``2^(p+1) < s - 1``.

    For ``m >= 2`` the bracket inequalities force ``α_m < 2^-(m + p - 1)``.
    """
    s = parse_rational(s)
    if s <= 1:
        raise ValueError(f"s must exceed 1, got {s}")
    gap = s - 1
    p = 0
    while Fraction(2) ** (p + 1) >= gap:
        p -= 1
    while Fraction(2) ** (p + 2) < gap:
        p += 1
    return p - 1


def level_one_decay(alpha1: Fraction) -> int:
    """Largest ``p`` with ``α₁ < 2^-(1+p)``."""
    p = 0
    while alpha1 >= Fraction(2) ** (-(1 + p)):
        p -= 1
    while alpha1 < Fraction(2) ** (-(2 + p)):
        p += 1
    return p


@dataclass(frozen=True)
class Level:
    m: int
    alpha: Fraction
    p: int
    q: int
    j: int
    k: int
    ell: int
    t: int

    def to_json(self) -> dict:
        return {"m": self.m, "alpha": format_rational(self.alpha), "p": self.p,
                "q": self.q, "j": self.j, "k": self.k, "ell": self.ell, "t": self.t}

    @classmethod
    def from_json(cls, data: dict) -> "Level":
        return cls(int(data["m"]), parse_rational(data["alpha"]), int(data["p"]),
                   int(data["q"]), int(data["j"]), int(data["k"]), int(data["ell"]),
                   int(data["t"]))


@dataclass(frozen=True)
class ConstructionPlan:
    target_s: Fraction
    levels: tuple[Level, ...]
    decay_p: int
    enclosure: Enclosure

    @property
    def sequence(self) -> LevelSequence:
        return LevelSequence([(lv.k, lv.ell) for lv in self.levels])

    def to_json(self) -> dict:
        return {
            "target_s": format_rational(self.target_s),
            "decay_p": self.decay_p,
            "levels": [lv.to_json() for lv in self.levels],
            "enclosure": self.enclosure.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConstructionPlan":
        return cls(parse_rational(data["target_s"]),
                   tuple(Level.from_json(x) for x in data["levels"]),
                   int(data["decay_p"]), Enclosure.from_json(data["enclosure"]))


def const_oracle(value: int = 1) -> Callable[[int], int]:
    if value < 1:
        raise ValueError("t(m) must be a positive integer")
    return lambda m: value


def build_plan(s, levels: int, t_oracle: Callable[[int], int] = const_oracle(1)) -> ConstructionPlan:
    s = parse_rational(s)
    if levels < 1:
        raise ValueError("a plan needs at least one level")
    if s <= 1:
        raise ValueError(f"s must exceed 1, got {s}")
    out = []
    gamma = None
    t_prev = 1
    for m in range(1, levels + 1):
        alpha = choose_alpha1(s) if m == 1 else choose_alpha_m(s, m, gamma)
        j, k, ell = choose_j(s, m, gamma, alpha, t_prev)
        gamma = _level_value(m, gamma, alpha, k, ell)
        t = int(t_oracle(m))
        if t < 1:
            raise ValueError(f"t_oracle({m}) = {t} is not a positive integer")
        out.append(Level(m, alpha, alpha.numerator, alpha.denominator, j, k, ell, t))
        t_prev = t
    # the level-1 choice of α₁ is not covered by the m >= 2 decay argument
    decay_p = min(decay_exponent(s), level_one_decay(out[0].alpha))
    lo, hi = bracket(s, levels)
    return ConstructionPlan(s, tuple(out), decay_p, Enclosure(lo, hi))


def verify_plan(plan: ConstructionPlan) -> Report:
    """Re-derive every quantity of ``plan`` from its integers and check it."""
    rep = Report("verify")
    s = plan.target_s
    rep.add("target_s > 1", s > 1, f"s = {s}")
    if not plan.levels:
        rep.add("nonempty", False, "plan has no levels")
        return rep
    gamma = None
    for idx, lv in enumerate(plan.levels):
        m = lv.m
        tag = f"level {m}"
        rep.add(f"{tag}: index", m == idx + 1, f"expected m = {idx + 1}, got {m}")
        rep.add(f"{tag}: lowest terms",
                lv.q > 0 and gcd(lv.p, lv.q) == 1 and Fraction(lv.p, lv.q) == lv.alpha,
                f"alpha = {lv.alpha}, p = {lv.p}, q = {lv.q}")
        rep.add(f"{tag}: 0 < alpha < 1", 0 < lv.alpha < 1, f"alpha = {lv.alpha}")
        t_prev = 1 if m == 1 else plan.levels[idx - 1].t
        rep.add(f"{tag}: t positive", lv.t >= 1, f"t = {lv.t}")
        rep.add(f"{tag}: ell definition", lv.ell == lv.j * lv.p * t_prev,
                f"ell = {lv.ell}, j*p*t_prev = {lv.j * lv.p * t_prev}")
        rep.add(f"{tag}: k definition", lv.k == lv.j * lv.q * t_prev,
                f"k = {lv.k}, j*q*t_prev = {lv.j * lv.q * t_prev}")
        rep.add(f"{tag}: ell/k = alpha", lv.k > 0 and Fraction(lv.ell, lv.k) == lv.alpha,
                f"ell/k = {Fraction(lv.ell, lv.k) if lv.k else 'undefined'}")
        rep.add(f"{tag}: 1 <= ell <= k-1", 1 <= lv.ell <= lv.k - 1, f"k = {lv.k}, ell = {lv.ell}")
        if not (0 < lv.alpha < 1) or lv.k <= 0 or lv.ell <= 0:
            return rep
        lo, hi = bracket(s, m)
        base = (1 / lv.alpha - 1) ** 2 if m == 1 else gamma * (1 - lv.alpha) ** 2
        rep.add(f"{tag}: bracket before correction", _strictly_inside(1 + base, lo, hi),
                f"{lo} < {1 + base} < {hi} is false")
        gamma = _level_value(m, gamma, lv.alpha, lv.k, lv.ell)
        rep.add(f"{tag}: bracket after correction", _strictly_inside(1 + gamma, lo, hi),
                f"{lo} < {1 + gamma} < {hi} is false")
        if lv.j > 1:
            smaller_k, smaller_ell = (lv.j - 1) * lv.q * t_prev, (lv.j - 1) * lv.p * t_prev
            prev = None if m == 1 else gamma / ((1 - lv.alpha) ** 2 + Fraction(1, lv.k ** 2))
            alt = _level_value(m, prev, lv.alpha, smaller_k, smaller_ell)
            rep.add(f"{tag}: j minimal", not _strictly_inside(1 + alt, lo, hi),
                    f"j = {lv.j - 1} already lands inside the bracket", soft=True)
        bound = Fraction(2) ** (-(m + plan.decay_p))
        rep.add(f"{tag}: decay", lv.alpha < bound,
                f"alpha = {lv.alpha} is not < 2^-({m} + {plan.decay_p})")
        rep.add(f"{tag}: decay alpha(2-alpha)",
                lv.alpha * (2 - lv.alpha) < Fraction(2) ** (-(m + plan.decay_p - 1)),
                f"alpha(2-alpha) = {lv.alpha * (2 - lv.alpha)}")
    rep.add("decay exponent admissible", s - 1 > Fraction(2) ** (plan.decay_p + 1),
            f"s - 1 = {s - 1} is not > 2^{plan.decay_p + 1}")
    N = len(plan.levels)
    lo, hi = bracket(s, N)
    rep.add("enclosure matches final bracket",
            plan.enclosure.lo == lo and plan.enclosure.hi == hi,
            f"enclosure [{plan.enclosure.lo}, {plan.enclosure.hi}] != [{lo}, {hi}]")
    try:
        s_trunc = factor_parameter_s(plan.sequence).lo
    except ValueError as exc:
        rep.add("factor parameter s inside bracket", False, str(exc))
        return rep
    rep.add("running product matches s formula", s_trunc == 1 + gamma,
            f"s formula gives {s_trunc}, running product gives {1 + gamma}")
    rep.add("factor parameter s inside bracket", _strictly_inside(s_trunc, lo, hi),
            f"s truncated = {s_trunc} not in ({lo}, {hi})")
    return rep

"""Finite-dimensional C*-algebras, tracial states and unital embeddings.

Everything here is exact: traces are :class:`fractions.Fraction` values and
embeddings are pure multiplicity data.  Matrices are only materialized in
:mod:`fdalg.reps`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

__all__ = [
    "StructuralError",
    "MultiMatrixAlgebra",
    "TracialState",
    "UnitalEmbedding",
    "TraceComparison",
    "AbelianCompression",
    "PartialIsometryDescriptor",
    "parse_rational",
    "format_rational",
    "induced_trace",
    "traces_compatible",
    "free_entropy_dimension",
    "compressed_entropy_dimension",
    "compress_to_abelian",
    "adapted_partial_isometries",
    "descriptor_count",
]


class StructuralError(ValueError):
    """Raised when algebras, traces or embeddings do not fit together."""


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, an int or a Fraction.  Floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in ".eE"):
            raise ValueError(f"not an exact rational literal: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot read {type(value).__name__} as an exact rational")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class MultiMatrixAlgebra:
    """``M_{n(1)} ⊕ ... ⊕ M_{n(m)}`` given by its summand sizes."""

    summands: tuple[int, ...]

    def __init__(self, summands: Sequence[int]):
        sizes = tuple(int(n) for n in summands)
        if not sizes:
            raise StructuralError("a multi-matrix algebra needs at least one summand")
        if any(n < 1 for n in sizes):
            raise StructuralError(f"summand sizes must be positive, got {sizes}")
        object.__setattr__(self, "summands", sizes)

    def __len__(self) -> int:
        return len(self.summands)

    @property
    def dimension(self) -> int:
        return sum(n * n for n in self.summands)

    @property
    def is_abelian(self) -> bool:
        return all(n == 1 for n in self.summands)

    @property
    def is_factor(self) -> bool:
        return len(self.summands) == 1

    @classmethod
    def full(cls, n: int) -> "MultiMatrixAlgebra":
        return cls([n])

    @classmethod
    def abelian(cls, m: int) -> "MultiMatrixAlgebra":
        return cls([1] * m)

    def to_json(self) -> dict:
        return {"summands": list(self.summands)}

    @classmethod
    def from_json(cls, data: dict) -> "MultiMatrixAlgebra":
        return cls(data["summands"])


@dataclass(frozen=True)
class TracialState:
    """Trace of one minimal projection per summand of ``algebra``."""

    algebra: MultiMatrixAlgebra
    minimal_traces: tuple[Fraction, ...]

    def __init__(self, algebra: MultiMatrixAlgebra, minimal_traces: Sequence):
        lams = tuple(parse_rational(x) for x in minimal_traces)
        if len(lams) != len(algebra):
            raise StructuralError(
                f"{len(lams)} traces given for {len(algebra)} summands")
        if any(x < 0 for x in lams):
            raise StructuralError("minimal traces must be nonnegative")
        total = sum((n * x for n, x in zip(algebra.summands, lams)), Fraction(0))
        if total != 1:
            raise StructuralError(f"trace of the unit is {total}, not 1")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "minimal_traces", lams)

    @property
    def is_faithful(self) -> bool:
        return all(x > 0 for x in self.minimal_traces)

    @classmethod
    def normalized(cls, n: int) -> "TracialState":
        """The unique tracial state ``tr_n`` on ``M_n``."""
        return cls(MultiMatrixAlgebra.full(n), [Fraction(1, n)])

    def to_json(self) -> dict:
        return {"minimal_traces": [format_rational(x) for x in self.minimal_traces]}

    @classmethod
    def from_json(cls, algebra: MultiMatrixAlgebra, data: dict) -> "TracialState":
        return cls(algebra, data["minimal_traces"])


@dataclass(frozen=True)
class UnitalEmbedding:
    """Unital injective homomorphism ``source -> target`` as multiplicities.

    ``multiplicities[a][d]`` is the number of copies of source summand ``d``
    sitting inside target summand ``a``.
    """

    source: MultiMatrixAlgebra
    target: MultiMatrixAlgebra
    multiplicities: tuple[tuple[int, ...], ...]

    def __init__(self, source: MultiMatrixAlgebra, target: MultiMatrixAlgebra,
                 multiplicities: Sequence[Sequence[int]]):
        mult = tuple(tuple(int(x) for x in row) for row in multiplicities)
        if len(mult) != len(target) or any(len(row) != len(source) for row in mult):
            raise StructuralError(
                f"multiplicity matrix must be {len(target)}x{len(source)}")
        if any(x < 0 for row in mult for x in row):
            raise StructuralError("multiplicities must be nonnegative")
        for a, row in enumerate(mult):
            size = sum(x * n for x, n in zip(row, source.summands))
            if size != target.summands[a]:
                raise StructuralError(
                    f"not unital: target summand {a} has size {target.summands[a]}"
                    f" but receives rank {size}")
        for d in range(len(source)):
            if sum(row[d] for row in mult) < 1:
                raise StructuralError(f"not injective: source summand {d} is killed")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def from_multiplicities(cls, source: MultiMatrixAlgebra,
                            multiplicities: Sequence[Sequence[int]]) -> "UnitalEmbedding":
        """Build the embedding, inferring the target sizes."""
        sizes = [sum(int(x) * n for x, n in zip(row, source.summands))
                 for row in multiplicities]
        return cls(source, MultiMatrixAlgebra(sizes), multiplicities)

    @classmethod
    def into_matrix_algebra(cls, source: MultiMatrixAlgebra,
                            ranks: Sequence[int]) -> "UnitalEmbedding":
        """Embedding into a single ``M_n``; ``ranks[d]`` is the multiplicity of summand ``d``."""
        return cls.from_multiplicities(source, [list(ranks)])

    @classmethod
    def identity(cls, algebra: MultiMatrixAlgebra) -> "UnitalEmbedding":
        m = len(algebra)
        return cls(algebra, algebra, [[int(a == d) for d in range(m)] for a in range(m)])

    @property
    def into_factor(self) -> bool:
        return self.target.is_factor

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "multiplicities": [list(row) for row in self.multiplicities],
        }

    @classmethod
    def from_json(cls, data: dict) -> "UnitalEmbedding":
        source = MultiMatrixAlgebra.from_json(data["source"])
        if "target" in data:
            return cls(source, MultiMatrixAlgebra.from_json(data["target"]),
                       data["multiplicities"])
        return cls.from_multiplicities(source, data["multiplicities"])

    def permuted(self, order: Sequence[int]) -> "UnitalEmbedding":
        """Relabel source summands: new summand ``i`` is old summand ``order[i]``."""
        source = MultiMatrixAlgebra([self.source.summands[i] for i in order])
        mult = [[row[i] for i in order] for row in self.multiplicities]
        return UnitalEmbedding(source, self.target, mult)


def induced_trace(emb: UnitalEmbedding, tau: TracialState) -> TracialState:
    """Pull a trace on ``emb.target`` back to ``emb.source``."""
    if tau.algebra != emb.target:
        raise StructuralError(
            f"trace lives on {tau.algebra.summands}, embedding targets {emb.target.summands}")
    lams = []
    for d in range(len(emb.source)):
        lams.append(sum((emb.multiplicities[a][d] * tau.minimal_traces[a]
                         for a in range(len(emb.target))), Fraction(0)))
    return TracialState(emb.source, lams)


@dataclass(frozen=True)
class TraceComparison:
    compatible: bool
    left: tuple[Fraction, ...]
    right: tuple[Fraction, ...]
    left_n: int
    right_n: int
    # only meaningful when compatible
    integral: bool = False

    @property
    def pairs(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.left, self.right))

    @property
    def differing(self) -> list[int]:
        return [i for i, (x, y) in enumerate(self.pairs) if x != y]

    def to_json(self) -> dict:
        return {
            "compatible": self.compatible,
            "left_n": self.left_n,
            "right_n": self.right_n,
            "pairs": [[format_rational(x), format_rational(y)] for x, y in self.pairs],
            "integral": self.integral,
        }


def _require_into_factor(emb: UnitalEmbedding, name: str) -> int:
    if not emb.into_factor:
        raise StructuralError(f"{name} must land in a single matrix algebra, "
                              f"got summands {emb.target.summands}")
    return emb.target.summands[0]


def traces_compatible(gamma: UnitalEmbedding, gamma_prime: UnitalEmbedding) -> TraceComparison:
    """Compare ``tr_n ∘ γ`` with ``tr_n' ∘ γ'`` on the common source, exactly."""
    n = _require_into_factor(gamma, "gamma")
    n_prime = _require_into_factor(gamma_prime, "gamma_prime")
    if gamma.source != gamma_prime.source:
        raise StructuralError("the two embeddings have different sources")
    left = induced_trace(gamma, TracialState.normalized(n)).minimal_traces
    right = induced_trace(gamma_prime, TracialState.normalized(n_prime)).minimal_traces
    compatible = left == right
    integral = compatible and all(
        (n * t).denominator == 1 and (n_prime * t).denominator == 1 for t in left)
    return TraceComparison(compatible, left, right, n, n_prime, integral)


def free_entropy_dimension(tau: TracialState) -> Fraction:
    """``1 - Σ λ_i²`` over the summands, for a type I algebra with atomic center."""
    return 1 - sum((x * x for x in tau.minimal_traces), Fraction(0))


def compressed_entropy_dimension(tau: TracialState) -> Fraction:
    """Free entropy dimension of ``pBp`` with the renormalized trace.

    ``p`` is a sum of one minimal projection from each summand, so ``pBp`` is
    abelian with weights ``λ_i / λ``.
    """
    total = sum(tau.minimal_traces, Fraction(0))
    if total == 0:
        raise ValueError("the selected projection has zero trace")
    return 1 - sum(((x / total) ** 2 for x in tau.minimal_traces), Fraction(0))


@dataclass(frozen=True)
class AbelianCompression:
    """Result of cutting ``M_n *_D M_n'`` down by ``p = Σ_d e^{(d)}_{11}``."""

    algebra: MultiMatrixAlgebra
    left: UnitalEmbedding
    right: UnitalEmbedding
    n: int
    n_prime: int
    # trace of p under tr_n ∘ γ (equal on both sides)
    corner_trace: Fraction


def compress_to_abelian(gamma: UnitalEmbedding, gamma_prime: UnitalEmbedding) -> AbelianCompression:
    cmp = traces_compatible(gamma, gamma_prime)
    if not cmp.compatible:
        raise StructuralError("compression needs trace-compatible embeddings")
    D = gamma.source
    m = len(D)
    abelian = MultiMatrixAlgebra.abelian(m)
    n, n_prime = cmp.left_n, cmp.right_n
    corner_trace = sum(cmp.left, Fraction(0))
    n_c, n_prime_c = n * corner_trace, n_prime * corner_trace
    if n_c.denominator != 1 or n_prime_c.denominator != 1:
        raise AssertionError(f"compressed sizes {n_c}, {n_prime_c} are not integers")
    left = UnitalEmbedding.into_matrix_algebra(abelian, gamma.multiplicities[0])
    right = UnitalEmbedding.into_matrix_algebra(abelian, gamma_prime.multiplicities[0])
    assert left.target.summands[0] == n_c and right.target.summands[0] == n_prime_c
    return AbelianCompression(abelian, left, right, int(n_c), int(n_prime_c), corner_trace)


@dataclass(frozen=True, order=True)
class PartialIsometryDescriptor:
    """A matrix unit ``e_{target, source}`` in one summand of ``A``.

    Indices refer to diagonal positions of that summand in the lexicographic
    block layout of the embedding (target summand, then source summand, then
    copy, then row).
    """

    kind: str  # "w" links copies of one source summand, "w_prime" links classes
    summand: int
    source: int
    target: int
    source_summand: int = field(default=-1, compare=False)

    def to_json(self) -> dict:
        return {"kind": self.kind, "summand": self.summand,
                "source": self.source, "target": self.target}


def block_offsets(emb: UnitalEmbedding) -> dict[tuple[int, int, int], int]:
    """First diagonal position of copy ``c`` of source summand ``b`` in target summand ``a``."""
    offsets = {}
    for a, row in enumerate(emb.multiplicities):
        pos = 0
        for b, mult in enumerate(row):
            for c in range(mult):
                offsets[a, b, c] = pos
                pos += emb.source.summands[b]
    return offsets


def adapted_partial_isometries(emb: UnitalEmbedding) -> list[PartialIsometryDescriptor]:
    """Partial isometries that, with ``B`` and the diagonal ``D``, pin down ``A``.

    ``emb`` embeds ``B`` unitally into ``A``.  For every source summand ``b`` the
    first diagonal unit ``q_b`` of ``b`` splits into one minimal projection of
    ``A`` per copy of ``b``; the ``w`` descriptors connect the first copy to the
    others inside each target summand.  The ``w_prime`` descriptors then connect
    the representatives of different source summands that are equivalent in
    ``A`` (i.e. live in the same target summand).
    """
    offsets = block_offsets(emb)
    out = []
    for a, row in enumerate(emb.multiplicities):
        present = [b for b, mult in enumerate(row) if mult > 0]
        for b in present:
            first = offsets[a, b, 0]
            for c in range(1, row[b]):
                out.append(PartialIsometryDescriptor("w", a, first, offsets[a, b, c], b))
        if present:
            head = offsets[a, present[0], 0]
            for b in present[1:]:
                out.append(PartialIsometryDescriptor(
                    "w_prime", a, head, offsets[a, b, 0], b))
    return out


def descriptor_count(emb: UnitalEmbedding) -> int:
    """``Σ (n(i) - 1) + Σ (|R_k| - 1)`` with classes taken per target summand."""
    copies = sum(mult - 1 for row in emb.multiplicities for mult in row if mult > 0)
    classes = sum(max(sum(1 for mult in row if mult > 0) - 1, 0)
                  for row in emb.multiplicities)
    return copies + classes

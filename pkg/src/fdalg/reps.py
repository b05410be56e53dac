"""Explicit finite-dimensional representations of ``M_n *_D M_n'``.

A representation of ``M_n`` of multiplicity ``a`` on ``ℂ^N`` is stored as an
isometry ``V`` of shape ``(N, n*a)`` with copy-major columns (column
``c*n + r`` is the image of basis vector ``r`` in copy ``c``), so that
``x ↦ V (1_a ⊗ x) V*``.  The abelian amalgam ``D = ℂ^m`` acts on the ambient
space through projections ``D_i``; ``γ`` places minimal projection ``i`` on a
diagonal block of ``M_n`` of size ``g_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .core import (
    MultiMatrixAlgebra,
    StructuralError,
    TraceComparison,
    UnitalEmbedding,
    block_offsets,
    compress_to_abelian,
    format_rational,
    traces_compatible,
)

__all__ = [
    "CONSTRUCTION_TOL",
    "ASSERT_TOL",
    "RepState",
    "FreeWord",
    "Verdict",
    "CornerAmplification",
    "orthonormal_range",
    "embedding_unit",
    "gamma_projection",
    "build_padding",
    "reference_state",
    "empty_state",
    "restrict_state",
    "extend_representations",
    "extension_residuals",
    "evaluate_word",
    "word_approximation_bound",
    "amplify_corner_rep",
    "corner_data",
    "amplify_state",
    "rfd_obstruction_check",
    "matrix_units_span",
]

CONSTRUCTION_TOL = 1e-10
ASSERT_TOL = 1e-8


def orthonormal_range(P: np.ndarray, rank: Optional[int] = None) -> np.ndarray:
    """Orthonormal basis for the range of ``P`` via pivoted QR.

    Ties in the pivoting go to the lowest column index, so coordinate-aligned
    projections yield coordinate vectors in index order.
    """
    P = np.asarray(P)
    N = P.shape[0]
    if rank is None:
        s = np.linalg.svd(P, compute_uv=False) if P.size else np.zeros(0)
        rank = int(np.sum(s > 1e-8 * max(1.0, s[0] if s.size else 0.0)))
    if rank == 0 or N == 0:
        return np.zeros((N, 0), dtype=complex)
    Q, _, _ = scipy.linalg.qr(P.astype(complex), pivoting=True, mode="economic")
    Q = Q[:, :rank]
    # fix the phase: largest entry of each column real positive
    lead = Q[np.argmax(np.abs(Q), axis=0), np.arange(rank)]
    return Q * (np.abs(lead) / lead)


def projection_rank(P: np.ndarray) -> int:
    return int(round(float(np.real(np.trace(P))))) if P.size else 0


def _proj(basis: np.ndarray) -> np.ndarray:
    return basis @ basis.conj().T


def embedding_unit(emb: UnitalEmbedding, b: int, r: int, s: int) -> np.ndarray:
    """Image of the matrix unit ``e_{rs}`` of source summand ``b``.

    The target is laid out block-diagonally over its summands, each in the
    lexicographic layout of :func:`fdalg.core.block_offsets`.
    """
    starts = np.cumsum([0, *emb.target.summands])
    out = np.zeros((starts[-1], starts[-1]), dtype=complex)
    for (a, bb, c), off in block_offsets(emb).items():
        if bb == b:
            out[starts[a] + off + r, starts[a] + off + s] = 1.0
    return out


def gamma_projection(emb: UnitalEmbedding, i: int) -> np.ndarray:
    """``γ(p_i)`` for an abelian source embedded in a single ``M_n``."""
    return embedding_unit(emb, i, 0, 0)


def _ranks(emb: UnitalEmbedding) -> list[int]:
    if not emb.source.is_abelian or not emb.into_factor:
        raise StructuralError("need an abelian D embedded in a single matrix algebra")
    return list(emb.multiplicities[0])


def _matrix_units(n: int):
    for r in range(n):
        for c in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[r, c] = 1.0
            yield e


def build_padding(d: int, r: Sequence[int], t: Sequence, n: int, n_prime: int) -> tuple[int, list[int]]:
    """Smallest ``d' > 0`` with ``n, n' | d + d'`` and ``t_i (d + d') >= r_i``.

    Returns ``(d', r')`` with ``r'_i = t_i (d + d') - r_i``.
    """
    t = [Fraction(x) for x in t]
    if sum(t) != 1:
        raise ValueError(f"traces sum to {sum(t)}, not 1")
    if any((n * x).denominator != 1 or (n_prime * x).denominator != 1 for x in t):
        raise ValueError("n*t_i and n'*t_i must be integers")
    if len(r) != len(t) or any(x < 0 for x in r) or sum(r) != d:
        raise ValueError(f"ranks {list(r)} do not split d = {d}")
    step = lcm(n, n_prime)
    total = (d // step + 1) * step
    while any(x * total < ri for x, ri in zip(t, r)):
        total += step
    return total - d, [int(x * total) - ri for x, ri in zip(t, r)]


@dataclass(frozen=True, eq=False)
class RepState:
    """A pair of representations of ``M_n`` and ``M_n'`` agreeing on ``D``.

    ``alpha``/``beta`` are the isometries of the current representations;
    ``F``/``G`` are orthonormal bases of the subspaces on which they are known
    to agree with the reference (initially their full ranges).
    """

    gamma: UnitalEmbedding
    gamma_prime: UnitalEmbedding
    d_projections: np.ndarray  # (m, N, N)
    alpha: np.ndarray
    beta: np.ndarray
    F: np.ndarray
    G: np.ndarray
    padding: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.gamma.target.summands[0]

    @property
    def n_prime(self) -> int:
        return self.gamma_prime.target.summands[0]

    @property
    def ambient_dim(self) -> int:
        return self.d_projections.shape[1]

    @property
    def traces(self) -> list[Fraction]:
        return list(traces_compatible(self.gamma, self.gamma_prime).left)

    def alpha_rep(self, x: np.ndarray) -> np.ndarray:
        a = self.alpha.shape[1] // self.n
        return self.alpha @ np.kron(np.eye(a), x) @ self.alpha.conj().T

    def beta_rep(self, y: np.ndarray) -> np.ndarray:
        b = self.beta.shape[1] // self.n_prime
        return self.beta @ np.kron(np.eye(b), y) @ self.beta.conj().T

    def rep(self, side: str, x: np.ndarray) -> np.ndarray:
        if side == "left":
            return self.alpha_rep(x)
        if side == "right":
            return self.beta_rep(x)
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def residuals(self) -> dict[str, float]:
        """Invariance and compatibility residuals (all should be ~0)."""
        N = self.ambient_dim
        eye = np.eye(N)
        PF, PG = _proj(self.F), _proj(self.G)
        out = {
            "alpha_isometry": _norm(self.alpha.conj().T @ self.alpha - np.eye(self.alpha.shape[1])),
            "beta_isometry": _norm(self.beta.conj().T @ self.beta - np.eye(self.beta.shape[1])),
            "F_invariant": max((_norm((eye - PF) @ self.alpha_rep(e) @ PF)
                                for e in _matrix_units(self.n)), default=0.0),
            "G_invariant": max((_norm((eye - PG) @ self.beta_rep(e) @ PG)
                                for e in _matrix_units(self.n_prime)), default=0.0),
        }
        PA, PB = _proj(self.alpha), _proj(self.beta)
        comp_a = comp_b = 0.0
        for i, Di in enumerate(self.d_projections):
            comp_a = max(comp_a, _norm(self.alpha_rep(gamma_projection(self.gamma, i)) - Di @ PA))
            comp_b = max(comp_b, _norm(self.beta_rep(gamma_projection(self.gamma_prime, i)) - Di @ PB))
        out["alpha_gamma_is_D"] = comp_a
        out["beta_gamma_is_D"] = comp_b
        return out


def _norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x, 2)) if x.size else 0.0


def _canonical_isometry(ranks: Sequence[int], copies: int, label_starts: Sequence[int],
                        label_sizes: Sequence[int], N: int) -> np.ndarray:
    n = sum(ranks)
    offs = np.cumsum([0, *ranks])
    V = np.zeros((N, n * copies), dtype=complex)
    for c in range(copies):
        for i, g in enumerate(ranks):
            for r in range(g):
                pos = c * g + r
                if pos >= label_sizes[i]:
                    raise StructuralError("label space too small for the requested copies")
                V[label_starts[i] + pos, c * n + offs[i] + r] = 1.0
    return V


def _random_unitary(rng: np.random.Generator, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((0, 0), dtype=complex)
    z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def reference_state(gamma: UnitalEmbedding, gamma_prime: UnitalEmbedding, N: int,
                    rng: Optional[np.random.Generator] = None) -> RepState:
    """A representation of the amalgamated product on all of ``ℂ^N``.

    ``α`` is the canonical representation of multiplicity ``N/n``.  ``β`` is
    the canonical one of multiplicity ``N/n'`` twisted by a unitary commuting
    with ``D`` (random when ``rng`` is given), so that the two ranges of copies
    sit in general position.
    """
    cmp = traces_compatible(gamma, gamma_prime)
    if not cmp.compatible:
        raise StructuralError("traces are not compatible; no finite-dimensional representation")
    n, n_prime = cmp.left_n, cmp.right_n
    if N % n or N % n_prime:
        raise StructuralError(f"ambient dimension {N} must be divisible by {n} and {n_prime}")
    sizes = [int(t * N) for t in cmp.left]
    starts = np.cumsum([0, *sizes])[:-1]
    D = np.zeros((len(sizes), N, N), dtype=complex)
    for i, (st, sz) in enumerate(zip(starts, sizes)):
        D[i, st:st + sz, st:st + sz] = np.eye(sz)
    alpha = _canonical_isometry(_ranks(gamma), N // n, starts, sizes, N)
    beta = _canonical_isometry(_ranks(gamma_prime), N // n_prime, starts, sizes, N)
    if rng is not None:
        U = scipy.linalg.block_diag(*[_random_unitary(rng, sz) for sz in sizes])
        beta = U @ beta
    return RepState(gamma, gamma_prime, D, alpha, beta, alpha.copy(), beta.copy())


def empty_state(gamma: UnitalEmbedding, gamma_prime: UnitalEmbedding) -> RepState:
    """Zero-dimensional starting point, ``F = G = 0``."""
    m = len(gamma.source)
    z = np.zeros((0, 0), dtype=complex)
    return RepState(gamma, gamma_prime, np.zeros((m, 0, 0), dtype=complex), z, z, z, z)


def restrict_state(state: RepState, a_copies: int, b_copies: int) -> RepState:
    """Keep the first ``a_copies`` of ``α`` and ``b_copies`` of ``β``."""
    alpha = state.alpha[:, : a_copies * state.n]
    beta = state.beta[:, : b_copies * state.n_prime]
    if alpha.shape[1] != a_copies * state.n or beta.shape[1] != b_copies * state.n_prime:
        raise ValueError("not enough copies in the state")
    return replace(state, alpha=alpha, beta=beta, F=alpha.copy(), G=beta.copy(), padding={})


def _grow(x: np.ndarray, extra: int, axes: Sequence[int]) -> np.ndarray:
    pad = [(0, 0)] * x.ndim
    for ax in axes:
        pad[ax] = (0, extra)
    return np.pad(x, pad)


def _fresh_rep(ranks: Sequence[int], copies: int, spaces: Sequence[np.ndarray]) -> np.ndarray:
    """Isometry for ``copies`` new copies, reading basis vectors of ``spaces[i]`` in order."""
    n = sum(ranks)
    offs = np.cumsum([0, *ranks])
    N = spaces[0].shape[0]
    V = np.zeros((N, n * copies), dtype=complex)
    for c in range(copies):
        for i, g in enumerate(ranks):
            for r in range(g):
                V[:, c * n + offs[i] + r] = spaces[i][:, c * g + r]
    return V


def extend_representations(state: RepState, d_prime: Optional[int] = None,
                           grow: bool = True) -> RepState:
    """Pad ``E = F + G`` by ``E' ⊥ E`` and extend both representations to ``E ⊕ E'``.

    ``E'`` is carved out of ``D``-eigenspaces orthogonal to ``E``; with
    ``grow=True`` fresh ambient coordinates are appended when there is not
    enough room.  The result keeps ``F`` and ``G``, so the new ``α`` agrees with
    the old one on ``F`` and likewise for ``β`` on ``G``.
    """
    ranks, ranks_prime = _ranks(state.gamma), _ranks(state.gamma_prime)
    cmp = traces_compatible(state.gamma, state.gamma_prime)
    if not cmp.compatible:
        raise StructuralError("traces are not compatible")
    t = list(cmp.left)
    n, n_prime = state.n, state.n_prime
    if state.F.shape[1] % n or state.G.shape[1] % n_prime:
        raise ValueError(f"dim F = {state.F.shape[1]} must be divisible by {n} and "
                         f"dim G = {state.G.shape[1]} by {n_prime}")
    D = state.d_projections
    N = state.ambient_dim
    E = orthonormal_range(np.hstack([state.F, state.G]))
    PE = _proj(E)
    d = E.shape[1]
    r = [projection_rank(PE @ Di @ PE) for Di in D]
    if d_prime is None:
        d_prime, r_prime = build_padding(d, r, t, n, n_prime)
    else:
        total = d + d_prime
        if d_prime <= 0 or total % n or total % n_prime or any(x * total < ri for x, ri in zip(t, r)):
            raise ValueError(
                f"d' = {d_prime} is not an admissible padding for d = {d} "
                f"(needs n={n}, n'={n_prime} | d+d' and t_i(d+d') >= r_i); run build_padding first")
        r_prime = [int(x * total) - ri for x, ri in zip(t, r)]

    F, G, alpha, beta = state.F, state.G, state.alpha, state.beta
    room = [projection_rank(Di) - projection_rank(PE @ Di @ PE) for Di in D]
    short = [max(rp - avail, 0) for rp, avail in zip(r_prime, room)]
    if any(short):
        if not grow:
            raise ValueError(f"ambient space has no room for padding ranks {r_prime} (free {room})")
        extra = sum(short)
        D = _grow(D, extra, (1, 2))
        pos = N
        for i, k in enumerate(short):
            for _ in range(k):
                D[i, pos, pos] = 1.0
                pos += 1
        F, G, alpha, beta, E = (_grow(x, extra, (0,)) for x in (F, G, alpha, beta, E))
        N += extra
        PE = _proj(E)

    eye = np.eye(N)
    pad_cols = []
    for Di, rp in zip(D, r_prime):
        free = orthonormal_range(Di @ (eye - PE) @ Di)
        pad_cols.append(free[:, :rp])
    E_pad = np.hstack(pad_cols) if pad_cols else np.zeros((N, 0))
    H = np.hstack([E, E_pad])
    PH = _proj(H)

    def extend(V, ranks_, n_, basis):
        Pbasis = _proj(basis)
        copies = (d + d_prime - basis.shape[1]) // n_
        spaces = [orthonormal_range(Di @ PH @ (eye - Pbasis) @ PH @ Di, g * copies)
                  for Di, g in zip(D, ranks_)]
        return np.hstack([V, _fresh_rep(ranks_, copies, spaces)])

    new_alpha = extend(alpha, ranks, n, F)
    new_beta = extend(beta, ranks_prime, n_prime, G)
    padding = {"d": d, "d_prime": d_prime, "r": r, "r_prime": r_prime,
               "t": [format_rational(x) for x in t]}
    out = RepState(state.gamma, state.gamma_prime, D, new_alpha, new_beta, F, G, padding)
    res = extension_residuals(out)
    bad = {k: v for k, v in res.items() if isinstance(v, float) and v > CONSTRUCTION_TOL}
    if bad or not res["rank_audit"]:
        raise RuntimeError(f"extension failed its residual checks: {bad or res}")
    return out


def extension_residuals(state: RepState, rng: Optional[np.random.Generator] = None) -> dict:
    """Residuals of an extended state; floats should be below ``CONSTRUCTION_TOL``."""
    n, n_prime = state.n, state.n_prime
    a_old = state.F.shape[1] // n
    b_old = state.G.shape[1] // n_prime
    old_alpha = state.alpha[:, : a_old * n]
    old_beta = state.beta[:, : b_old * n_prime]
    PF, PG = _proj(state.F), _proj(state.G)
    PH = _proj(state.alpha)
    out = {"ambient_dim": state.ambient_dim, "dim_H": int(state.alpha.shape[0] and projection_rank(PH))}
    out["alpha_isometry"] = _norm(state.alpha.conj().T @ state.alpha - np.eye(state.alpha.shape[1]))
    out["beta_isometry"] = _norm(state.beta.conj().T @ state.beta - np.eye(state.beta.shape[1]))
    out["same_support"] = _norm(PH - _proj(state.beta))
    out["amalgam_agrees"] = max(
        _norm(state.alpha_rep(gamma_projection(state.gamma, i))
              - state.beta_rep(gamma_projection(state.gamma_prime, i)))
        for i in range(len(state.gamma.source)))
    a_units = list(_matrix_units(n))
    b_units = list(_matrix_units(n_prime))
    out["alpha_restricts_on_F"] = max(
        _norm((state.alpha_rep(e) - old_alpha @ np.kron(np.eye(a_old), e) @ old_alpha.conj().T) @ PF)
        for e in a_units)
    out["beta_restricts_on_G"] = max(
        _norm((state.beta_rep(e) - old_beta @ np.kron(np.eye(b_old), e) @ old_beta.conj().T) @ PG)
        for e in b_units)
    rng = rng or np.random.default_rng(0)
    mult = 0.0
    for side, k in (("left", n), ("right", n_prime)):
        for _ in range(3):
            x = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            y = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            err = _norm(state.rep(side, x @ y) - state.rep(side, x) @ state.rep(side, y))
            mult = max(mult, err / max(1.0, np.linalg.norm(x, 2) * np.linalg.norm(y, 2)))
        mult = max(mult, _norm(state.rep(side, np.eye(k)) - PH))
        z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        mult = max(mult, _norm(state.rep(side, z.conj().T) - state.rep(side, z).conj().T))
    out["homomorphism"] = mult
    total = projection_rank(PH)
    t = traces_compatible(state.gamma, state.gamma_prime).left
    ranks = [projection_rank(state.alpha_rep(gamma_projection(state.gamma, i)))
             for i in range(len(t))]
    out["ranks"] = ranks
    out["rank_audit"] = all(Fraction(rk) == ti * total for rk, ti in zip(ranks, t))
    return out


@dataclass(frozen=True)
class FreeWord:
    """Alternating product ``letters[0] · letters[1] ⋯`` of left/right matrices."""

    letters: tuple[tuple[str, np.ndarray], ...]

    def __init__(self, letters: Sequence[tuple[str, np.ndarray]]):
        letters = tuple((side, np.asarray(x, dtype=complex)) for side, x in letters)
        for side, _ in letters:
            if side not in ("left", "right"):
                raise ValueError(f"unknown side {side!r}")
        for (s1, _), (s2, _) in zip(letters, letters[1:]):
            if s1 == s2:
                raise ValueError("consecutive letters must come from different sides")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)


def _check_letter(state: RepState, side: str, x: np.ndarray) -> None:
    size = state.n if side == "left" else state.n_prime
    if x.shape != (size, size):
        raise ValueError(f"{side} letter has shape {x.shape}, expected {(size, size)}")


def evaluate_word(state: RepState, w: FreeWord) -> np.ndarray:
    out = np.eye(state.ambient_dim, dtype=complex)
    for side, x in w.letters:
        _check_letter(state, side, x)
        out = out @ state.rep(side, x)
    return out


def _dist(v: np.ndarray, basis: np.ndarray) -> float:
    return float(np.linalg.norm(v - basis @ (basis.conj().T @ v)))


def word_approximation_bound(state_k: RepState, reference: RepState, w: FreeWord,
                             xi: np.ndarray) -> tuple[float, float]:
    """Telescoping bound on ``‖π(w)ξ - π_k(w)ξ‖`` and the actual error.

    With ``w = a_ℓ ⋯ a_1`` and ``ξ_j = π(a_j) ξ_{j-1}``, the bound is
    ``Σ_j ‖π_k(a_ℓ ⋯ a_{j+1})‖ · 2‖a_j‖ · max(dist(ξ_{j-1}, F), dist(ξ_{j-1}, G))``.
    """
    if state_k.ambient_dim != reference.ambient_dim:
        raise ValueError("states live on different ambient spaces")
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (reference.ambient_dim,):
        raise ValueError(f"vector has shape {xi.shape}, expected ({reference.ambient_dim},)")
    # a_1 is the rightmost letter
    applied = list(reversed(w.letters))
    for side, x in applied:
        _check_letter(reference, side, x)
    N = reference.ambient_dim
    ell = len(applied)
    # prefix[j] = π_k of the letters applied after applied[j]
    prefix = [None] * ell
    acc = np.eye(N, dtype=complex)
    for j in range(ell - 1, -1, -1):
        prefix[j] = acc
        side, x = applied[j]
        acc = acc @ state_k.rep(side, x)
    bound = 0.0
    eta = xi
    for j, (side, x) in enumerate(applied):
        gap = max(_dist(eta, state_k.F), _dist(eta, state_k.G))
        bound += _norm(prefix[j]) * 2 * np.linalg.norm(x, 2) * gap
        eta = reference.rep(side, x) @ eta
    actual = float(np.linalg.norm(eta - acc @ xi))
    if actual > bound + ASSERT_TOL:
        raise AssertionError(f"approximation error {actual} exceeds bound {bound}")
    return bound, actual


class CornerAmplification:
    """``π'(a)_{ij} = π(v_i* a v_j)`` on ``⊕_i H_i`` with ``v_0 = p``.

    ``H_i`` is a copy of the range of ``π(v_i* v_i)``.
    """

    def __init__(self, pi: Callable[[np.ndarray], np.ndarray], p: np.ndarray,
                 vs: Sequence[np.ndarray], tol: float = CONSTRUCTION_TOL,
                 bases: Optional[Sequence[np.ndarray]] = None):
        p = np.asarray(p, dtype=complex)
        vs = [np.asarray(v, dtype=complex) for v in vs]
        size = p.shape[0]
        res = {"p_projection": _norm(p @ p - p) + _norm(p - p.conj().T)}
        total = np.zeros_like(p)
        for k, v in enumerate(vs):
            src = v.conj().T @ v
            res[f"v{k + 1}_partial_isometry"] = _norm(v @ src - v)
            res[f"v{k + 1}_under_p"] = _norm(p @ src - src)
            total += v @ v.conj().T
        res["ranges_fill_complement"] = _norm(total - (np.eye(size) - p))
        bad = {k: x for k, x in res.items() if x > tol}
        if bad:
            raise ValueError(f"partial isometry relations fail: {bad}")
        self.pi = pi
        self.p = p
        self.vs = [p, *vs]
        unit = pi(p)
        self.bases = [np.eye(unit.shape[0], dtype=complex)]
        if bases is None:
            bases = [orthonormal_range(pi(v.conj().T @ v)) for v in vs]
        elif len(bases) != len(vs):
            raise ValueError(f"got {len(bases)} bases for {len(vs)} partial isometries")
        for v, B in zip(vs, bases):
            # a supplied basis must be orthonormal and span the range of π(v*v)
            err = max(_norm(B.conj().T @ B - np.eye(B.shape[1])),
                      _norm(B @ B.conj().T - pi(v.conj().T @ v)))
            if err > tol:
                raise ValueError(f"basis does not match the range of pi(v*v): residual {err:.3e}")
            self.bases.append(B)
        self.dims = [b.shape[1] for b in self.bases]
        self.starts = np.cumsum([0, *self.dims])

    @property
    def dim(self) -> int:
        return int(self.starts[-1])

    def __call__(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, (vi, Bi) in enumerate(zip(self.vs, self.bases)):
            for j, (vj, Bj) in enumerate(zip(self.vs, self.bases)):
                block = Bi.conj().T @ self.pi(vi.conj().T @ a @ vj) @ Bj
                out[self.starts[i]:self.starts[i + 1], self.starts[j]:self.starts[j + 1]] = block
        return out

    def compress(self, x: np.ndarray) -> np.ndarray:
        """The ``(0, 0)`` block, i.e. the part acting on the original space."""
        return x[: self.dims[0], : self.dims[0]]


def amplify_corner_rep(pi: Callable[[np.ndarray], np.ndarray], p: np.ndarray,
                       vs: Sequence[np.ndarray]) -> CornerAmplification:
    return CornerAmplification(pi, p, vs)


def corner_data(gamma: UnitalEmbedding) -> tuple[np.ndarray, list[int], list[np.ndarray]]:
    """``p = Σ_d γ(e^{(d)}_{00})``, its coordinate positions, and ``v = γ(e^{(d)}_{r0})``."""
    D = gamma.source
    p = sum(embedding_unit(gamma, d, 0, 0) for d in range(len(D)))
    idx = [int(i) for i in np.flatnonzero(np.real(np.diag(p)) > 0.5)]
    vs = [embedding_unit(gamma, d, r, 0) for d in range(len(D)) for r in range(1, D.summands[d])]
    return p, idx, vs


def amplify_state(gamma: UnitalEmbedding, gamma_prime: UnitalEmbedding,
                  corner_state: RepState) -> tuple[CornerAmplification, CornerAmplification]:
    """Lift a representation pair of the abelian corner back to ``M_n`` and ``M_n'``.

    ``corner_state`` must be built on the output of
    :func:`fdalg.core.compress_to_abelian` for ``(gamma, gamma_prime)``.
    """
    comp = compress_to_abelian(gamma, gamma_prime)
    if (corner_state.n, corner_state.n_prime) != (comp.n, comp.n_prime):
        raise StructuralError("corner state does not match the compression")
    # both sides must identify the extra copies H_i the same way, so the
    # bases are computed once (π(v_i* v_i) is the image of a projection of D)
    out = []
    bases = None
    for emb, side in ((gamma, "left"), (gamma_prime, "right")):
        p, idx, vs = corner_data(emb)

        def pi(x, idx=idx, side=side):
            return corner_state.rep(side, x[np.ix_(idx, idx)])

        amp = CornerAmplification(pi, p, vs, bases=bases)
        bases = amp.bases[1:]
        out.append(amp)
    return out[0], out[1]


@dataclass(frozen=True)
class Verdict:
    status: str  # "COMPATIBLE" | "OBSTRUCTED"
    comparison: TraceComparison
    witness: Optional[int] = None

    @property
    def witness_traces(self) -> Optional[tuple[Fraction, Fraction]]:
        if self.witness is None:
            return None
        return self.comparison.pairs[self.witness]

    def to_json(self) -> dict:
        out = {"status": self.status, "comparison": self.comparison.to_json()}
        if self.witness is not None:
            out["witness"] = {"summand": self.witness,
                              "traces": [format_rational(x) for x in self.witness_traces]}
        return out


def rfd_obstruction_check(gamma: UnitalEmbedding, gamma_prime: UnitalEmbedding) -> Verdict:
    """Trace test for residual finite dimensionality of ``M_n *_D M_n'``.

    When the induced traces differ, the witness is the differing minimal
    projection with the largest trace on either side: a finite-dimensional
    representation would have to fit two copies of it into itself.
    """
    cmp = traces_compatible(gamma, gamma_prime)
    if cmp.compatible:
        return Verdict("COMPATIBLE", cmp)
    witness = max(cmp.differing, key=lambda i: (max(cmp.pairs[i]), -i))
    return Verdict("OBSTRUCTED", cmp, witness)


def matrix_units_span(emb: UnitalEmbedding, descriptors) -> int:
    """Dimension of the algebra generated by ``B``, the diagonal ``D`` and ``descriptors``."""
    starts = np.cumsum([0, *emb.target.summands])
    size = int(starts[-1])
    gens = []
    for b, nb in enumerate(emb.source.summands):
        for r in range(nb):
            for s in range(nb):
                gens.append(embedding_unit(emb, b, r, s))
    for k in range(size):
        e = np.zeros((size, size), dtype=complex)
        e[k, k] = 1.0
        gens.append(e)
    for desc in descriptors:
        e = np.zeros((size, size), dtype=complex)
        e[starts[desc.summand] + desc.target, starts[desc.summand] + desc.source] = 1.0
        gens.append(e)
        gens.append(e.conj().T)
    basis = np.zeros((0, size * size), dtype=complex)

    def absorb(mats):
        nonlocal basis
        grew = False
        for x in mats:
            v = x.reshape(-1)
            if basis.shape[0]:
                v = v - basis.T @ (basis.conj() @ v)
            nv = np.linalg.norm(v)
            if nv > 1e-9:
                basis = np.vstack([basis, v / nv])
                grew = True
        return grew

    absorb(gens)
    while True:
        current = [row.reshape(size, size) for row in basis]
        if not absorb([g @ x for g in gens for x in current]):
            return basis.shape[0]

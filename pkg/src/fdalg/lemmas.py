"""Single-matrix versions of the projection and partial-isometry lifting lemmas.

The normalized trace 2-norm ``‖x‖₂ = sqrt(Tr(x*x)/N)`` is used throughout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .reps import orthonormal_range

__all__ = [
    "HERMITIAN_TOL",
    "THRESHOLD_WARN",
    "ThresholdWarning",
    "as_hermitian",
    "hs_norm",
    "spectral_projection_half",
    "projection_bound_sides",
    "nested_projection_with_trace",
    "Completion",
    "complete_partial_isometry",
]

HERMITIAN_TOL = 1e-12
THRESHOLD_WARN = 1e-12


class ThresholdWarning(RuntimeWarning):
    """An eigenvalue sits within ``THRESHOLD_WARN`` of the cut at 1/2."""


def as_hermitian(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    if np.linalg.norm(x - x.conj().T, 2) >= HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    return x


def hs_norm(x) -> float:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    N = x.shape[0]
    return float(np.sqrt(np.real(np.vdot(x, x)) / N))


def projection_bound_sides(a: np.ndarray, p: np.ndarray) -> tuple[float, float]:
    """``(‖p - a‖₂, 2‖a² - a‖₂)``."""
    return hs_norm(p - a), 2 * hs_norm(a @ a - a)


def spectral_projection_half(a) -> np.ndarray:
    """Spectral projection of ``a`` for ``[1/2, ∞)``.

    Emits :class:`ThresholdWarning` when an eigenvalue is within 1e-12 of 1/2
    and always checks ``‖p - a‖₂ <= 2‖a² - a‖₂``.
    """
    a = as_hermitian(a)
    a = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(a)
    if np.any(np.abs(w - 0.5) < THRESHOLD_WARN):
        warnings.warn("eigenvalue at the 1/2 threshold; using the >= 1/2 rule",
                      ThresholdWarning, stacklevel=2)
    keep = v[:, w >= 0.5]
    p = keep @ keep.conj().T
    lhs, rhs = projection_bound_sides(a, p)
    if lhs > rhs + 1e-10:
        raise AssertionError(f"‖p - a‖₂ = {lhs} exceeds 2‖a² - a‖₂ = {rhs}")
    return p


def _rank(p: np.ndarray) -> int:
    return int(round(float(np.real(np.trace(p))))) if p.size else 0


def nested_projection_with_trace(P_prime, Q, target_rank: int) -> np.ndarray:
    """Projection ``P <= Q`` of rank ``target_rank`` comparable with ``P'``.

    The basis of ``Q`` is ordered as (basis of ``P'``, basis of ``Q - P'``) and
    ``P`` projects onto its first ``target_rank`` vectors, so the output is
    monotone in ``target_rank``.
    """
    P_prime = np.asarray(P_prime, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if np.linalg.norm(Q @ P_prime - P_prime, 2) > 1e-10:
        raise ValueError("P' is not below Q")
    rq = _rank(Q)
    if not 0 <= target_rank <= rq:
        raise ValueError(f"target rank {target_rank} outside 0..{rq}")
    inner = orthonormal_range(P_prime, _rank(P_prime))
    outer = orthonormal_range(Q - P_prime, rq - inner.shape[1])
    basis = np.hstack([inner, outer])[:, :target_rank]
    return basis @ basis.conj().T


@dataclass(frozen=True)
class Completion:
    V: np.ndarray
    U: np.ndarray
    F: np.ndarray
    W: np.ndarray
    # ‖V - B‖₂ and ‖P - F‖₂
    distance: float
    defect: float
    residual: float


def _orth_complement_in(P: np.ndarray, basis: np.ndarray, count: int) -> np.ndarray:
    """``count`` orthonormal vectors of ``range(P)`` orthogonal to ``basis``, by index."""
    N = P.shape[0]
    rest = P - basis @ basis.conj().T if basis.size else P
    return orthonormal_range(rest, count) if count else np.zeros((N, 0), dtype=complex)


def complete_partial_isometry(B, P, Q, tol: float = 1e-10) -> Completion:
    """Partial isometry ``V`` with ``V*V = P``, ``VV* = Q`` built from ``B = QBP``.

    ``B = U|B|`` is the polar decomposition, ``F`` the spectral projection of
    ``|B|`` for ``[1/2, ∞)`` and ``W`` pairs the rest of ``P`` with the rest of
    ``Q``: first the small singular directions of ``B`` in descending order,
    then the kernel and cokernel by coordinate index.
    """
    B = np.asarray(B, dtype=complex)
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if np.linalg.norm(Q @ B @ P - B, 2) > tol * max(1.0, np.linalg.norm(B, 2)):
        raise ValueError("B is not of the form QBP")
    rp, rq = _rank(P), _rank(Q)
    if rp != rq:
        raise ValueError(f"rank(P) = {rp} differs from rank(Q) = {rq}")
    X, sig, Yh = np.linalg.svd(B)
    Y = Yh.conj().T
    nz = sig > 1e-12 * max(1.0, sig[0] if sig.size else 0.0)
    U = X[:, nz] @ Y[:, nz].conj().T
    big = sig >= 0.5
    F = Y[:, big] @ Y[:, big].conj().T
    if np.linalg.norm(U.conj().T @ U @ F - F, 2) > 1e-8:
        raise AssertionError("F is not below the support of U")
    small = nz & ~big  # already in descending order
    src = [Y[:, small]]
    dst = [X[:, small]]
    k = rp - int(np.sum(nz))
    src.append(_orth_complement_in(P, Y[:, nz], k))
    dst.append(_orth_complement_in(Q, X[:, nz], k))
    S, T = np.hstack(src), np.hstack(dst)
    W = T @ S.conj().T
    V = U @ F + W
    residual = max(np.linalg.norm(V.conj().T @ V - P, 2), np.linalg.norm(V @ V.conj().T - Q, 2))
    if residual > 1e-8:
        raise AssertionError(f"completion residual {residual}")
    return Completion(V, U, F, W, hs_norm(V - B), hs_norm(P - F), float(residual))

"""Random inputs for the Monte Carlo checks."""

from __future__ import annotations

import numpy as np

from .core import MultiMatrixAlgebra, UnitalEmbedding
from .reps import FreeWord

__all__ = [
    "random_unitary",
    "random_compatible_pair",
    "random_word",
    "random_hermitian_in",
    "random_completion_input",
]


def random_unitary(rng: np.random.Generator, N: int) -> np.ndarray:
    z = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.where(np.abs(d) > 0, np.abs(d), 1))


def random_compatible_pair(rng: np.random.Generator, max_summands: int = 4,
                           max_size: int = 6) -> tuple[UnitalEmbedding, UnitalEmbedding]:
    """Two embeddings of an abelian ``D`` into ``M_n``, ``M_n'`` with equal induced traces.

    The traces are ``r_i / b`` for a composition ``r`` of ``b``; ``n`` and
    ``n'`` are multiples of ``b``.
    """
    b = int(rng.integers(1, max_size + 1))
    m = int(rng.integers(1, min(max_summands, b) + 1))
    cuts = np.sort(rng.choice(np.arange(1, b), size=m - 1, replace=False)) if m > 1 else []
    ranks = np.diff([0, *cuts, b]).astype(int).tolist()
    c1 = int(rng.integers(1, max_size // b + 1))
    c2 = int(rng.integers(1, max_size // b + 1))
    D = MultiMatrixAlgebra.abelian(m)
    return (UnitalEmbedding.into_matrix_algebra(D, [c1 * r for r in ranks]),
            UnitalEmbedding.into_matrix_algebra(D, [c2 * r for r in ranks]))


def random_word(rng: np.random.Generator, n: int, n_prime: int, length: int) -> FreeWord:
    side = "left" if rng.integers(2) == 0 else "right"
    letters = []
    for _ in range(length):
        k = n if side == "left" else n_prime
        letters.append((side, rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))))
        side = "right" if side == "left" else "left"
    return FreeWord(letters)


def random_hermitian_in(rng: np.random.Generator, N: int, lo: float = -1.0,
                        hi: float = 2.0) -> np.ndarray:
    """Random Hermitian matrix with spectrum in ``[lo, hi]``."""
    U = random_unitary(rng, N)
    w = rng.uniform(lo, hi, N)
    # push some eigenvalues onto {0, 1} so near-projections show up too
    mask = rng.random(N) < 0.3
    w[mask] = np.round(w[mask]).clip(0, 1)
    return (U * w) @ U.conj().T


def random_completion_input(rng: np.random.Generator, N: int):
    """``(B, P, Q)`` with ``B = QBP`` and ``rank P = rank Q``."""
    r = int(rng.integers(1, N + 1))
    U1, U2 = random_unitary(rng, N), random_unitary(rng, N)
    P = U1[:, :r] @ U1[:, :r].conj().T
    Q = U2[:, :r] @ U2[:, :r].conj().T
    core = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    core *= rng.uniform(0.1, 2.0) / max(np.linalg.norm(core, 2), 1e-12)
    B = U2[:, :r] @ core @ U1[:, :r].conj().T
    return B, P, Q

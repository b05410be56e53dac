"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line that is repeated in the terminal summary.
"""

import time
from fractions import Fraction as Fr
from math import lcm

import numpy as np
import pytest

from fdalg.core import MultiMatrixAlgebra, UnitalEmbedding
from fdalg.lemmas import complete_partial_isometry, hs_norm, projection_bound_sides, spectral_projection_half
from fdalg.params import LevelSequence, factor_parameter_s, factor_parameter_t, fed_product, subset_sum_oracle
from fdalg.constructor import bracket, build_plan, choose_alpha1, choose_j, verify_plan
from fdalg.reps import (
    CONSTRUCTION_TOL,
    CornerAmplification,
    build_padding,
    extend_representations,
    extension_residuals,
    reference_state,
    restrict_state,
    rfd_obstruction_check,
    word_approximation_bound,
)
from fdalg.sampling import (
    random_compatible_pair,
    random_completion_input,
    random_hermitian_in,
    random_unitary,
    random_word,
)


def random_sequences(count, max_levels, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        levels = []
        for _ in range(int(rng.integers(1, max_levels + 1))):
            k = int(rng.integers(2, 41))
            levels.append((k, int(rng.integers(1, k))))
        out.append(LevelSequence(levels))
    return out


SEQUENCES = random_sequences(200, 12, seed=2024)


def test_product_equals_subset_sum(criterion):
    t0 = time.perf_counter()
    mismatches = sum(fed_product(seq).lo != subset_sum_oracle(seq) for seq in SEQUENCES)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 10
    criterion(1, ok, f"{len(SEQUENCES)} sequences (N <= 12), {mismatches} mismatches, {elapsed:.2f} s")
    assert ok


def test_scalar_identities(criterion):
    bad = 0
    for seq in SEQUENCES:
        fed = fed_product(seq).lo
        t = factor_parameter_t(seq).lo
        s = factor_parameter_s(seq).lo
        bad += (t + fed != 2) or (s != 1 + (t - 1) / seq.alpha(1) ** 2)
    criterion(2, bad == 0, f"t + fed = 2 and s = 1 + (t-1)/alpha1^2 exact on {len(SEQUENCES)} sequences, "
                           f"{bad} failures")
    assert bad == 0


REQUIRED = ("bracket before correction", "bracket after correction", "ell definition", "k definition", "decay")


@pytest.mark.parametrize("s", [Fr(2), Fr(3), Fr(7, 2), Fr(10)], ids=str)
def test_constructor_certified(criterion, s):
    N = 8
    t0 = time.perf_counter()
    plan = build_plan(s, N)
    report = verify_plan(plan)
    elapsed = time.perf_counter() - t0
    names = {c.name for c in report.checks}
    covered = all(f"level {m}: {key}" in names for m in range(1, N + 1) for key in REQUIRED)
    lo, hi = bracket(s, N)
    s_trunc = factor_parameter_s(plan.sequence).lo
    width_ok = (hi - lo) == Fr(1, 2 ** N) - Fr(1, 2 ** (N + 1)) == Fr(1, 2 ** (N + 1))
    ok = report.passed and covered and width_ok and lo < s_trunc < hi and elapsed < 5
    key = f"3[s={s}]"
    criterion(key, ok, f"s = {s}, N = {N}: {len(report.checks)} checks, "
                       f"{len(report.failures)} failed, width 2^-{N + 1}, "
                       f"s_N = {float(s_trunc):.6f} in bracket, {elapsed:.3f} s")
    assert ok


def test_level_one_worked_value(criterion):
    s = Fr(3)
    lo, hi = bracket(s, 1)
    admissible = [Fr(p, q) for q in range(2, 19) for p in range(1, q)
                  if Fr(p, q).denominator == q and lo < 1 + (Fr(q, p) - 1) ** 2 < hi]
    alpha = choose_alpha1(s)
    j, k, ell = choose_j(s, 1, None, alpha)
    value = 1 + (1 / alpha - 1) ** 2 + Fr(1, ell * ell)
    ok = (admissible == [Fr(7, 18)] and alpha == Fr(7, 18) and (j, k, ell) == (1, 18, 7)
          and value == Fr(171, 49) and Fr(13, 4) < value < Fr(7, 2))
    criterion(4, ok, f"alpha1 = {alpha}, j = {j}, k = {k}, ell = {ell}, 1 + gamma1 = {value}; "
                     f"scan of denominators <= 18 finds {[str(a) for a in admissible]}")
    assert ok


def test_rfd_obstruction(criterion):
    C2 = MultiMatrixAlgebra([1, 1])
    diag = UnitalEmbedding.into_matrix_algebra(C2, [1, 1])
    three = UnitalEmbedding.into_matrix_algebra(C2, [1, 2])
    bad = rfd_obstruction_check(diag, three)
    good = rfd_obstruction_check(diag, diag)
    ok = (bad.status == "OBSTRUCTED" and bad.witness_traces == (Fr(1, 2), Fr(2, 3))
          and good.status == "COMPATIBLE")
    criterion(5, ok, f"M2 vs M3: {bad.status} with traces {tuple(map(str, bad.witness_traces))}; "
                     f"equal embeddings: {good.status}")
    assert ok


def _admissible(d, r, t, n, n_prime, dp):
    total = d + dp
    return dp > 0 and total % n == 0 and total % n_prime == 0 and all(
        x * total >= ri for x, ri in zip(t, r))


def test_padding_construction(criterion):
    rng = np.random.default_rng(6)
    trials = worst = 0
    failures = []
    while trials < 100:
        g1, g2 = random_compatible_pair(rng, max_summands=4, max_size=6)
        n, n_prime = g1.target.summands[0], g2.target.summands[0]
        step = lcm(n, n_prime)
        # a reference space large enough to hold d <= 20 in general position
        N = step * int(rng.integers(1, max(1, 24 // step) + 1))
        ref = reference_state(g1, g2, N, rng)
        a = int(rng.integers(0, min(N // n, 20 // n) + 1))
        b = int(rng.integers(0, min(N // n_prime, (20 - a * n) // n_prime) + 1))
        state = restrict_state(ref, a, b)
        trials += 1
        ext = extend_representations(state)
        pad = ext.padding
        t = [Fr(x) for x in pad["t"]]
        d, r, dp = pad["d"], pad["r"], pad["d_prime"]
        if d > 20:
            failures.append(f"d = {d} > 20")
        if (dp, pad["r_prime"]) != tuple(build_padding(d, r, t, n, n_prime)):
            failures.append("padding differs from build_padding")
        if not _admissible(d, r, t, n, n_prime, dp) or any(
                _admissible(d, r, t, n, n_prime, x) for x in range(1, dp)):
            failures.append(f"d' = {dp} not minimal for d = {d}")
        res = extension_residuals(ext)
        floats = [v for v in res.values() if isinstance(v, float)]
        worst = max(worst, max(floats))
        if max(floats) >= CONSTRUCTION_TOL or not res["rank_audit"]:
            failures.append(f"residuals {res}")
        if any(Fr(rank) != ti * (d + dp) for rank, ti in zip(res["ranks"], t)):
            failures.append("rank audit against t_i (d + d') failed")
    ok = not failures
    criterion(6, ok, f"{trials} random abelian instances, worst residual {worst:.2e}, "
                     f"{len(failures)} failures")
    assert ok, failures[:3]


def test_word_approximation(criterion):
    rng = np.random.default_rng(7)
    words = violations = 0
    worst = 0.0
    while words < 1000:
        g1, g2 = random_compatible_pair(rng, max_summands=4, max_size=6)
        n, n_prime = g1.target.summands[0], g2.target.summands[0]
        step = lcm(n, n_prime)
        if step > 16:
            continue
        N = step * int(rng.integers(1, 16 // step + 1))
        ref = reference_state(g1, g2, N, rng)
        state = restrict_state(ref, int(rng.integers(0, N // n + 1)),
                               int(rng.integers(0, N // n_prime + 1)))
        try:
            state = extend_representations(state, grow=False)
        except ValueError:
            pass  # no room on this ambient space; the partial state also agrees with ref on F, G
        for _ in range(20):
            w = random_word(rng, n, n_prime, int(rng.integers(1, 5)))
            xi = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            try:
                bound, actual = word_approximation_bound(state, ref, w, xi / np.linalg.norm(xi))
            except AssertionError:
                violations += 1
                continue
            if bound > 1e-12:
                worst = max(worst, actual / bound)
            words += 1
    ok = violations == 0
    criterion(7, ok, f"{words} words of length <= 4 at ambient dim <= 16, "
                     f"{violations} violations, worst actual/bound {worst:.3f}")
    assert ok


def test_spectral_projection_bound(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    violations = 0
    for _ in range(1000):
        a = random_hermitian_in(rng, int(rng.integers(2, 17)), -1.0, 2.0)
        try:
            p = spectral_projection_half(a)
        except AssertionError:
            violations += 1
            continue
        lhs, rhs = projection_bound_sides(a, p)
        violations += lhs > rhs + 1e-10
        # near-projections give 0/0 at rounding level; the ratio means nothing there
        if rhs > 1e-8:
            worst = max(worst, lhs / rhs)
    ok = violations == 0 and worst <= 1
    criterion(8, ok, f"1000 Hermitian matrices (sizes 2-16, spectrum in [-1, 2]), "
                     f"{violations} violations, worst ratio {worst:.4f}")
    assert ok


def test_partial_isometry_completion(criterion):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(500):
        B, P, Q = random_completion_input(rng, int(rng.integers(1, 13)))
        V = complete_partial_isometry(B, P, Q).V
        worst = max(worst, np.linalg.norm(V.conj().T @ V - P, 2), np.linalg.norm(V @ V.conj().T - Q, 2))
    # B = (1 - eps) times a partial isometry of rank r on C^N
    N, r = 8, 3
    U1, U2 = random_unitary(rng, N), random_unitary(rng, N)
    S, T = U1[:, :r], U2[:, :r]
    P, Q, U = S @ S.conj().T, T @ T.conj().T, T @ S.conj().T
    rows = []
    for eps in (0.1, 0.01, 0.001):
        out = complete_partial_isometry((1 - eps) * U, P, Q)
        rows.append((eps, out.defect, out.distance))
    slopes = [dist / eps for eps, _, dist in rows]
    linear = all(abs(x - np.sqrt(r / N)) < 1e-8 for x in slopes)
    defect_ok = all(defect <= eps for eps, defect, _ in rows)
    ok = worst < 1e-8 and linear and defect_ok
    criterion(9, ok, f"500 completions, worst residual {worst:.2e}; eps -> (defect, ||V-B||_2): "
                     + ", ".join(f"{eps:g} -> ({d:.1e}, {x:.2e})" for eps, d, x in rows))
    assert ok


def test_corner_round_trip(criterion):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(1, 7))
        r = int(rng.integers(1, k + 1))
        mult = int(rng.integers(1, 4))
        W = random_unitary(rng, k)
        p = W[:, :r] @ W[:, :r].conj().T
        # v_i maps the (i mod r)-th corner vector onto the i-th vector outside the corner
        vs = [np.outer(W[:, r + i], W[:, i % r].conj()) for i in range(k - r)]
        U = random_unitary(rng, mult * r)

        def pi(x, W=W, r=r, mult=mult, U=U):
            core = (W.conj().T @ x @ W)[:r, :r]
            return U @ np.kron(np.eye(mult), core) @ U.conj().T

        amp = CornerAmplification(pi, p, vs)
        for _ in range(3):
            x = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            y = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            a = p @ x @ p
            worst = max(worst, np.linalg.norm(amp.compress(amp(a)) - pi(a), 2),
                        np.linalg.norm(amp(x @ y) - amp(x) @ amp(y), 2) / (1 + np.linalg.norm(x) * np.linalg.norm(y)))
    ok = worst < 1e-10
    criterion(10, ok, f"100 random corner representations, worst round-trip residual {worst:.2e}")
    assert ok

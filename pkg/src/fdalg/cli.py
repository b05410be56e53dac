"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import constructor, core, lemmas, params, reps
from .sampling import random_completion_input, random_hermitian_in, random_unitary, random_word
from .core import MultiMatrixAlgebra, StructuralError, UnitalEmbedding, parse_rational
from .report import Report, dumps

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _levels(text: str) -> params.LevelSequence:
    try:
        return params.LevelSequence.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc))


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational {text!r}: {exc}")


def _oracle(text: str):
    kind, _, value = text.partition(":")
    if kind != "const" or not value.isdigit() or int(value) < 1:
        raise UsageError(f"t-oracle must look like const:<positive int>, got {text!r}")
    return constructor.const_oracle(int(value))


def _emit(report: Report, out: Optional[str]) -> int:
    text = dumps(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_construct(args) -> int:
    s = _rational(args.s)
    if s <= 1:
        raise UsageError("--s must exceed 1")
    if args.levels < 1:
        raise UsageError("--levels must be at least 1")
    plan = constructor.build_plan(s, args.levels, _oracle(args.t_oracle))
    Path(args.out).write_text(dumps(plan))
    report = constructor.verify_plan(plan)
    report.command = "construct"
    report.artifacts = {"plan_file": args.out, "enclosure": plan.enclosure,
                        "decay_p": plan.decay_p}
    return _emit(report, args.report)


def cmd_verify(args) -> int:
    try:
        plan = constructor.ConstructionPlan.from_json(json.loads(Path(args.file).read_text()))
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read plan {args.file!r}: {exc}")
    report = constructor.verify_plan(plan)
    report.command = "verify"
    return _emit(report, args.out)


def cmd_fed(args) -> int:
    seq = _levels(args.levels)
    enc = params.fed_product(seq, args.tail_p)
    report = Report("fed")
    report.add("enclosure contains truncation", (1 - params.truncated_product(seq)) in enc,
               "truncated value outside enclosure")
    report.artifacts = {"levels": seq, "fed": enc}
    if enc.is_exact:
        report.artifacts["value"] = enc.lo
    return _emit(report, args.out)


def cmd_params(args) -> int:
    seq = _levels(args.levels)
    if len(seq) < 1:
        raise UsageError("params needs at least one level")
    fed = params.fed_product(seq)
    t = params.factor_parameter_t(seq)
    s = params.factor_parameter_s(seq)
    alpha1 = seq.alpha(1)
    report = Report("params")
    report.add("t + fed = 2", t.lo + fed.lo == 2, f"t + fed = {t.lo + fed.lo}")
    report.add("s = 1 + (t - 1)/alpha1^2", s.lo == 1 + (t.lo - 1) / alpha1 ** 2,
               f"s = {s.lo}, rescaled t gives {1 + (t.lo - 1) / alpha1 ** 2}")
    report.artifacts = {
        "levels": seq,
        "fed": params.fed_product(seq, args.tail_p),
        "t": params.factor_parameter_t(seq, args.tail_p),
        "s": params.factor_parameter_s(seq, args.tail_p),
    }
    return _emit(report, args.out)


def cmd_oracle(args) -> int:
    seq = _levels(args.levels)
    if len(seq) > params.MAX_ORACLE_LEVELS:
        raise UsageError(f"oracle enumerates 2^N subsets; N <= {params.MAX_ORACLE_LEVELS}")
    brute = params.subset_sum_oracle(seq)
    closed = params.fed_product(seq).lo
    report = Report("oracle")
    report.add("product formula equals subset sum", brute == closed,
               f"subset sum {brute} != product {closed}")
    total = sum((Fraction(m) * lam for m, lam in
                 (params.summand_data(seq, F) for F in _subsets(len(seq)))), Fraction(0))
    report.add("unit has trace 1", total == 1, f"sum m(F) lambda_F = {total}")
    report.artifacts = {"levels": seq, "subset_sum": brute, "product": closed}
    return _emit(report, args.out)


def _subsets(N: int):
    for mask in range(1 << N):
        yield [i + 1 for i in range(N) if mask >> i & 1]


def _embedding(D: MultiMatrixAlgebra, ranks: list[int], n: Optional[int]) -> UnitalEmbedding:
    emb = UnitalEmbedding.into_matrix_algebra(D, ranks)
    if n is not None and emb.target.summands[0] != n:
        raise UsageError(f"ranks {ranks} over summands {list(D.summands)} give M_"
                         f"{emb.target.summands[0]}, not M_{n}")
    return emb


def cmd_rfd_check(args) -> int:
    try:
        D = MultiMatrixAlgebra(_int_list(args.d))
        left = _embedding(D, _int_list(args.left_ranks), args.left_n)
        right = _embedding(D, _int_list(args.right_ranks), args.right_n)
    except StructuralError as exc:
        raise UsageError(str(exc))
    verdict = reps.rfd_obstruction_check(left, right)
    report = Report("rfd-check")
    detail = ""
    if verdict.witness is not None:
        x, y = verdict.witness_traces
        detail = f"summand {verdict.witness} of D has traces {x} and {y}"
    report.add("traces compatible", verdict.status == "COMPATIBLE", detail)
    report.artifacts = {"verdict": verdict}
    return _emit(report, args.out)


def _load_rep_spec(path: str):
    try:
        data = json.loads(Path(path).read_text())
        D = MultiMatrixAlgebra.from_json(data["d"])
        left = UnitalEmbedding.from_multiplicities(D, data["left"]["multiplicities"])
        right = UnitalEmbedding.from_multiplicities(D, data["right"]["multiplicities"])
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read rep spec {path!r}: {exc}")
    return data, left, right


def cmd_rep_build(args) -> int:
    data, left, right = _load_rep_spec(args.spec)
    report = Report("rep-build")
    verdict = reps.rfd_obstruction_check(left, right)
    report.add("traces compatible", verdict.status == "COMPATIBLE",
               f"induced traces differ at summand {verdict.witness}")
    report.artifacts["verdict"] = verdict
    if verdict.status != "COMPATIBLE":
        return _emit(report, args.report)
    comp = core.compress_to_abelian(left, right)
    report.artifacts["compression"] = {
        "needed": not left.source.is_abelian,
        "n": comp.n, "n_prime": comp.n_prime, "corner_trace": comp.corner_trace,
    }
    rng = np.random.default_rng(int(data.get("seed", 0)))
    step = lcm(comp.n, comp.n_prime)
    a, b = int(data.get("alpha_copies", 1)), int(data.get("beta_copies", 1))
    copies = int(data.get("ambient_copies", 0))
    N = max(copies * step, (-(-(a * comp.n + b * comp.n_prime) // step) + 1) * step)
    try:
        ref = reps.reference_state(comp.left, comp.right, N, rng)
        state = reps.restrict_state(ref, a, b)
    except (StructuralError, ValueError) as exc:
        raise UsageError(str(exc))
    res = state.residuals()
    for key, val in res.items():
        report.add(f"initial {key}", val < reps.CONSTRUCTION_TOL, f"residual {val:.3e}")
    report.artifacts["initial"] = {"ambient_dim": N, "dim_F": state.F.shape[1],
                                   "dim_G": state.G.shape[1], "residuals": res}
    if args.pad:
        ext = reps.extend_representations(state, grow=False)
        res = reps.extension_residuals(ext, rng)
        for key, val in res.items():
            if isinstance(val, float):
                report.add(f"padded {key}", val < reps.CONSTRUCTION_TOL, f"residual {val:.3e}")
        report.add("padded rank audit", res["rank_audit"], f"ranks {res['ranks']}")
        report.artifacts["padding"] = ext.padding
        report.artifacts["padded"] = res
        trials = int(data.get("word_trials", 0))
        if trials:
            worst = 0.0
            ok = True
            for _ in range(trials):
                w = random_word(rng, comp.n, comp.n_prime, int(rng.integers(1, 5)))
                xi = rng.standard_normal(N) + 1j * rng.standard_normal(N)
                xi /= np.linalg.norm(xi)
                try:
                    bound, actual = reps.word_approximation_bound(ext, ref, w, xi)
                except AssertionError:
                    ok = False
                    continue
                if bound > 0:
                    worst = max(worst, actual / bound)
            report.add("word approximation bound", ok, "actual error exceeded the bound")
            report.artifacts["words"] = {"trials": trials, "worst_ratio": worst}
        if not left.source.is_abelian:
            amp_a, amp_b = reps.amplify_state(left, right, ext)
            err = max(
                float(np.linalg.norm(amp_a(reps.embedding_unit(left, d, r, c))
                                     - amp_b(reps.embedding_unit(right, d, r, c)), 2))
                for d, nd in enumerate(left.source.summands)
                for r in range(nd) for c in range(nd))
            report.add("amplified reps agree on D", err < reps.CONSTRUCTION_TOL, f"residual {err:.3e}")
            report.artifacts["amplified_dim"] = amp_a.dim
    return _emit(report, args.report)


def cmd_lemmas(args) -> int:
    rng = np.random.default_rng(args.seed)
    report = Report("lemmas")
    if args.trials < 1 or args.dim < 1:
        raise UsageError("--trials and --dim must be positive")
    passed = failed = 0
    worst = 0.0
    if args.check == "spectral":
        for _ in range(args.trials):
            a = random_hermitian_in(rng, args.dim)
            try:
                p = lemmas.spectral_projection_half(a)
            except AssertionError:
                failed += 1
                continue
            lhs, rhs = lemmas.projection_bound_sides(a, p)
            if rhs > 0:
                worst = max(worst, lhs / rhs)
            passed += 1
        report.add("projection bound", failed == 0, f"{failed} of {args.trials} trials violated it")
    elif args.check == "nested":
        for _ in range(args.trials):
            N = args.dim
            U = random_unitary(rng, N)
            rq = int(rng.integers(0, N + 1))
            rp = int(rng.integers(0, rq + 1))
            target = int(rng.integers(0, rq + 1))
            Q = U[:, :rq] @ U[:, :rq].conj().T
            Pp = U[:, :rp] @ U[:, :rp].conj().T
            P = lemmas.nested_projection_with_trace(Pp, Q, target)
            lo, hi = (P, Pp) if target <= rp else (Pp, P)
            err = max(np.linalg.norm(P @ P - P, 2), np.linalg.norm(Q @ P - P, 2),
                      np.linalg.norm(hi @ lo - lo, 2),
                      abs(np.real(np.trace(P)) - target),
                      abs(lemmas.hs_norm(P - Pp) ** 2 - abs(target - rp) / N))
            worst = max(worst, float(err))
            if err < 1e-8:
                passed += 1
            else:
                failed += 1
        report.add("nested projections", failed == 0, f"{failed} of {args.trials} trials failed")
    elif args.check == "completion":
        for _ in range(args.trials):
            B, P, Q = random_completion_input(rng, args.dim)
            try:
                out = lemmas.complete_partial_isometry(B, P, Q)
            except AssertionError:
                failed += 1
                continue
            worst = max(worst, out.residual)
            passed += 1
        report.add("partial isometry completion", failed == 0,
                   f"{failed} of {args.trials} trials failed")
    else:
        raise UsageError(f"unknown check {args.check!r}")
    report.artifacts = {"check": args.check, "trials": args.trials, "dim": args.dim,
                        "passed": passed, "failed": failed, "worst": worst}
    return _emit(report, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdalg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("construct", help="build a certified parameter plan for a target s")
    p.add_argument("--s", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--t-oracle", default="const:1")
    p.add_argument("--out", required=True, help="plan JSON file")
    p.add_argument("--report", help="report file (default stdout)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="re-check a plan file")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    for name, func, helptext in (
        ("fed", cmd_fed, "free entropy dimension of B from levels k:l,..."),
        ("params", cmd_params, "t and s parameters from levels k:l,..."),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--levels", required=True)
        p.add_argument("--tail-p", type=int, default=None)
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("oracle", help="compare the product formula with subset enumeration")
    p.add_argument("--levels", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("rfd-check", help="trace compatibility of two embeddings of D")
    p.add_argument("--d", required=True, help="summand sizes of D, e.g. 1,1")
    p.add_argument("--left-ranks", required=True)
    p.add_argument("--left-n", type=int)
    p.add_argument("--right-ranks", required=True)
    p.add_argument("--right-n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rfd_check)

    p = sub.add_parser("rep-build", help="build and pad explicit block representations")
    p.add_argument("--spec", required=True)
    p.add_argument("--pad", action="store_true")
    p.add_argument("--report")
    p.set_defaults(func=cmd_rep_build)

    p = sub.add_parser("lemmas", help="Monte Carlo checks of the matrix lemmas")
    p.add_argument("--check", required=True, choices=["spectral", "nested", "completion"])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lemmas)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"fdalg: error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

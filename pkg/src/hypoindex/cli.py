"""Command line interface.

Subcommands:

* ``analyze``: index report plus decay-law constants for one system,
* ``decay``: sampled propagator-norm curve (CSV or JSON) and waiting time,
* ``sweep``: decay-law constants and waiting times across eps * A + C,
* ``selftest``: seeded internal consistency battery.

Exit codes: 0 success, 2 usage/parse, 3 validation, 4 numerical quality,
5 internal inconsistency. Output is deterministic: identical input, options
and seed give byte-identical bytes (floats at 17 significant digits).
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import (
    HypoError,
    InconsistencyError,
    NumericalQualityError,
    ValidationError,
    VariantDisagreementError,
)
from .index import INFINITE, IndexVariant, compute_index, stable_index, verify_border_criterion
from .jsonio import (
    curve_csv,
    curve_json_obj,
    export_matrix_document,
    format_float,
    parse_matrix_document,
    render_json,
    sweep_csv,
    sweep_json_obj,
)
from .linalg import DEFAULT_TOL_PSD, DEFAULT_TOL_RANK, hermitian_split, require_semi_dissipative
from .propagator import decay_curve, linear_grid, log_grid, waiting_time
from .series import (
    build_tau_family,
    delta_coefficient,
    sum_of_squares_residual,
    tau_coefficients,
    u_coefficient,
    u_coefficient_factored,
    u_norm_bound,
    verify_family_order,
)
from .shorttime import epsilon_sweep, theoretical_coefficient
from .systems import (
    crisp_random_system,
    get_example,
    get_example_pair,
    random_semi_dissipative,
    random_split_pair,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypoindex",
        description="Hypocoercivity index and short-time decay analysis for x' = -Bx.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--input", type=Path, help="JSON matrix document")
        group.add_argument("--example", help="built-in name: b1, b2, ek:<k>, envelope, num1, num2")
        p.add_argument("--eps", type=float, default=None, help="scale of the conservative part")

    def add_tols(p):
        p.add_argument("--tol-rank", type=float, default=DEFAULT_TOL_RANK)
        p.add_argument("--tol-psd", type=float, default=DEFAULT_TOL_PSD)

    def add_output(p, choices=("json", "csv"), default="json"):
        p.add_argument("--output", choices=list(choices), default=default)
        p.add_argument("--out", type=Path, default=None, help="write to file instead of stdout")

    p = sub.add_parser("analyze", help="index report and decay-law constants")
    add_source(p)
    add_tols(p)
    add_output(p, choices=("json",), default="json")

    p = sub.add_parser("decay", help="propagator norm curve and waiting time")
    add_source(p)
    add_tols(p)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--grid", choices=["linear", "log"], default="linear")
    add_output(p, default="csv")

    p = sub.add_parser("sweep", help="decay-law constants across eps * A + C")
    add_source(p)
    add_tols(p)
    p.add_argument("--eps-geo", default=None, metavar="A:B:N", help="geometric eps range")
    p.add_argument("--points", type=int, default=400)
    add_output(p, default="csv")

    p = sub.add_parser("selftest", help="seeded internal consistency battery")
    add_tols(p)
    p.add_argument("--seed", type=int, default=0)
    add_output(p, choices=("json", "text"), default="text")
    return parser


def _load_source(args) -> tuple[np.ndarray, tuple | None, dict]:
    """Resolve --input/--example (+ --eps) to (B, family split, canonical doc).

    The returned split is the *unscaled* family (A, C); the document echoes
    the analyzed matrix with its own (possibly eps-scaled) split so that it
    re-parses consistently.
    """
    eps = args.eps
    if args.example is not None:
        split = get_example_pair(args.example)
        if eps is not None and split is None:
            raise ValidationError(f"--eps applies only to split families, not {args.example!r}")
        B = get_example(args.example, 1.0 if eps is None else eps)
    else:
        B, split = parse_matrix_document(json.loads(args.input.read_text()))
        if eps is not None:
            if split is None:
                raise ValidationError("--eps needs an input document with a split")
            B = eps * split[0] + split[1]
    doc_split = split
    if split is not None and eps is not None:
        doc_split = (eps * split[0], split[1])
    return B, split, export_matrix_document(B, doc_split)


def _index_json(value) -> int | float:
    return value if value == INFINITE else int(value)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_analyze(args) -> int:
    B, _, doc = _load_source(args)
    sysm = hermitian_split(B)
    report = compute_index(sysm, args.tol_rank, args.tol_psd)
    w_H = np.linalg.eigvalsh(sysm.hermitian_part)

    a = c_theory = degenerate = None
    if report.m_hc != INFINITE:
        law = theoretical_coefficient(sysm, report, args.tol_rank, args.tol_psd)
        a, c_theory, degenerate = law.a, law.c, law.degenerate

    obj = {
        "command": "analyze",
        "input": doc,
        "eps": args.eps,
        "tol_rank": args.tol_rank,
        "tol_psd": args.tol_psd,
        "semi_dissipative": True,
        "m_hc": _index_json(report.m_hc),
        "per_variant": {v.value: _index_json(report.per_variant[v]) for v in IndexVariant},
        "kappa": report.kappa,
        "rank_trace": list(report.rank_trace),
        "hypocoercive_spectral": report.hypocoercive_spectral,
        "low_confidence": report.low_confidence,
        "a": a,
        "c_theory": c_theory,
        "degenerate_direction": degenerate,
        "spectrum": [[float(z.real), float(z.imag)] for z in report.spectrum],
        "lambda_min_BH": float(w_H[0]),
        "lambda_max_BH": float(w_H[-1]),
    }
    _emit(render_json(obj), args.out)
    return 0


def cmd_decay(args) -> int:
    B, _, doc = _load_source(args)
    sysm = hermitian_split(B)
    require_semi_dissipative(sysm, args.tol_psd)
    if args.grid == "linear":
        grid = linear_grid(args.t_max, args.points, 0.0 if args.t_min is None else args.t_min)
    else:
        t_min = args.t_max * 1e-4 if args.t_min is None else args.t_min
        grid = log_grid(t_min, args.t_max, args.points)
    curve = decay_curve(sysm, grid)
    waiting = waiting_time(sysm)

    if args.output == "csv":
        _emit(curve_csv(curve), args.out)
        if args.out is not None and waiting.reached:
            sys.stdout.write(f"t0 = {format_float(waiting.t0)}\n")
    else:
        obj = {"command": "decay", "input": doc, "eps": args.eps}
        obj.update(curve_json_obj(curve, waiting))
        _emit(render_json(obj), args.out)
    return 0


def _parse_eps_geo(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"--eps-geo wants A:B:N, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"--eps-geo wants numbers A:B:N, got {text!r}") from exc
    if count < 1:
        raise ValidationError("--eps-geo needs N >= 1")
    if lo == 0.0 or hi == 0.0 or (lo < 0.0) != (hi < 0.0):
        raise ValidationError("--eps-geo endpoints must be nonzero with the same sign")
    if count == 1:
        return [lo]
    ratio = (hi / lo) ** (1.0 / (count - 1))
    return [lo * ratio**i for i in range(count)]


def cmd_sweep(args) -> int:
    _, split, doc = _load_source(args)
    if split is None:
        raise ValidationError("sweep needs a split family (num1, num2, or a document with split)")
    if args.eps_geo is not None:
        eps_values = _parse_eps_geo(args.eps_geo)
    elif args.eps is not None:
        eps_values = [args.eps]
    else:
        raise ValidationError("sweep needs --eps-geo A:B:N (or a single --eps)")
    A, C = split
    sweep = epsilon_sweep(A, C, eps_values, args.tol_rank, args.tol_psd, points=args.points)

    if args.output == "csv":
        _emit(sweep_csv(sweep), args.out)
        if args.out is not None:
            sys.stdout.write(f"c_tilde = {format_float(sweep.c_tilde)}\n")
            for i in range(len(sweep.eps_values) - 1):
                t0_a, t0_b = sweep.t0_values[i], sweep.t0_values[i + 1]
                if t0_a is not None and t0_b is not None:
                    sys.stdout.write(
                        f"t0({format_float(sweep.eps_values[i])}) / "
                        f"t0({format_float(sweep.eps_values[i + 1])}) = "
                        f"{format_float(t0_a / t0_b)}\n"
                    )
    else:
        obj = {"command": "sweep", "input": doc}
        obj.update(sweep_json_obj(sweep))
        _emit(render_json(obj), args.out)
    return 0


def _crisp_family(rng, n, eps_grid, tol_rank, tol_psd, max_draws=200):
    """Split pair whose index decision is tolerance-stable at every eps."""
    for _ in range(max_draws):
        A, C = random_split_pair(rng, n)
        if all(stable_index(hermitian_split(e * A + C), tol_rank, tol_psd) is not None for e in eps_grid):
            return A, C
    raise RuntimeError(f"no tolerance-stable family in {max_draws} attempts (n={n})")


def _selftest_checks(rng: np.random.Generator, tol_rank: float, tol_psd: float):
    """Yield (name, passed, residual, threshold, detail) tuples."""
    from fractions import Fraction

    # exact combinatorial identities
    diag_ok = all(
        delta_coefficient(m, 2 * m + 1, m) == Fraction(1, math.comb(2 * m, m) ** 2)
        for m in range(7)
    )
    yield ("delta_diagonal_value", diag_ok, None, None, "m <= 6, exact rationals")

    bound_ok = True
    for m in range(5):
        for j in range(2 * m + 1, 21):
            for k in range(m, j - m):
                v = delta_coefficient(m, j, k)
                bound_ok &= 0 < v <= 1
    yield ("delta_unit_bound", bound_ok, None, None, "exhaustive m <= 4, j <= 20")

    b_ok = all(tau_coefficients(m)[0] == Fraction(1, 2) for m in range(1, 7))
    yield ("tau_b1_is_half", b_ok, None, None, "b_1 = 1/2 for m <= 6")

    # series rearrangement, polynomial mode
    worst = 0.0
    for _ in range(12):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(0, 4))
        U, V, W = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(3))
        worst = max(worst, sum_of_squares_residual(U, V, W, m))
    yield ("series_identity_polynomial", worst <= 1e-11, worst, 1e-11, "12 random triples")

    sampled = 0.0
    for _ in range(4):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(0, 4))
        U, V, W = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(3))
        sampled = max(sampled, sum_of_squares_residual(U, V, W, m, degree=2 * m + 10, mode="sampled", t=0.1))
    yield ("series_identity_sampled", sampled <= 1e-9, sampled, 1e-9, "truncated at degree 2m+10")

    # U_j dual forms and growth bound
    u_worst = 0.0
    bound_worst = 0.0
    for _ in range(6):
        n = int(rng.integers(2, 7))
        B = random_semi_dissipative(rng, n)
        sysm = hermitian_split(B)
        for j in range(1, 11):
            direct = u_coefficient(B, j)
            factored = u_coefficient_factored(sysm, j)
            scale = max(np.linalg.norm(direct, 2), 1e-300)
            u_worst = max(u_worst, float(np.linalg.norm(direct - factored, 2)) / scale)
        for j in range(13):
            norm_j, cap_j = u_norm_bound(B, j)
            bound_worst = max(bound_worst, norm_j / max(cap_j, 1e-300))
    yield ("u_dual_forms", u_worst <= 1e-12, u_worst, 1e-12, "j <= 10")
    yield ("u_norm_bound", bound_worst <= 1.0 + 1e-12, bound_worst, 1.0, "||U_j|| / (2||B||)^j")

    # eight-way agreement on random systems (raises on disagreement)
    agreement = True
    detail = "25 random systems, n <= 8"
    try:
        for _ in range(25):
            n = int(rng.integers(1, 9))
            compute_index(hermitian_split(crisp_random_system(rng, n, tol_rank, tol_psd)), tol_rank, tol_psd)
    except (InconsistencyError, NumericalQualityError) as exc:
        agreement = False
        detail = str(exc)
    yield ("variant_agreement", agreement, None, None, detail)

    # crafted near-degenerate instance: honest at 1e-10, breaks at 1e-1
    tampered = True
    detail = "sigma ~ 1e-3 instance"
    try:
        compute_index(hermitian_split(np.diag([1e-6, 1.0])), tol_rank, tol_psd)
    except VariantDisagreementError as exc:
        tampered = False
        detail = str(exc)
    yield ("tolerance_sensitivity", tampered, None, None, detail)

    # border criterion agreement on structured systems
    border = True
    for B in (np.diag([1.0, 1j]), np.array([[0.0, 1.0], [-1.0, 0.0]]), get_example("envelope")):
        res = verify_border_criterion(hermitian_split(np.asarray(B, dtype=complex)))
        border &= res.agrees
    yield ("border_criterion", border, None, None, "diag/rotation/envelope")

    # trajectory family realizes the decay constant
    fam_ok = True
    residual = None
    detail = "envelope family"
    try:
        sysm = hermitian_split(get_example("envelope"))
        fam = build_tau_family(sysm)
        observed = verify_family_order(sysm, fam)
        residual = abs(observed - 2.0 * fam.c1_x0) / (2.0 * fam.c1_x0)
    except HypoError as exc:
        fam_ok = False
        detail = str(exc)
    yield ("family_order", fam_ok, residual, 0.01, detail)

    # eps-independence of the index on a random split family
    eps_ok = True
    eps_grid = (0.125, 0.5, 1.0, 2.0)
    detail = "eps in {1/8, 1/2, 1, 2}, 5 families"
    try:
        for _ in range(5):
            n = int(rng.integers(2, 7))
            A, C = _crisp_family(rng, n, eps_grid, tol_rank, tol_psd)
            values = {
                compute_index(hermitian_split(e * A + C), tol_rank, tol_psd).m_hc
                for e in eps_grid
            }
            eps_ok &= len(values) == 1
    except HypoError as exc:
        eps_ok = False
        detail = str(exc)
    yield ("eps_index_invariance", eps_ok, None, None, detail)


def cmd_selftest(args) -> int:
    rng = np.random.default_rng(args.seed)
    checks = []
    for name, passed, residual, threshold, detail in _selftest_checks(rng, args.tol_rank, args.tol_psd):
        checks.append(
            {
                "name": name,
                "pass": bool(passed),
                "residual": residual,
                "threshold": threshold,
                "detail": detail,
            }
        )
    all_pass = all(c["pass"] for c in checks)
    if args.output == "json":
        obj = {
            "command": "selftest",
            "seed": args.seed,
            "tol_rank": args.tol_rank,
            "tol_psd": args.tol_psd,
            "checks": checks,
            "all_pass": all_pass,
        }
        _emit(render_json(obj), args.out)
    else:
        lines = []
        for c in checks:
            status = "PASS" if c["pass"] else "FAIL"
            extra = ""
            if c["residual"] is not None:
                extra = f" residual={format_float(c['residual'])} threshold={format_float(c['threshold'])}"
            lines.append(f"{status} {c['name']}{extra} ({c['detail']})\n")
        lines.append(("OK" if all_pass else "FAILED") + f" {sum(c['pass'] for c in checks)}/{len(checks)} checks\n")
        _emit("".join(lines), args.out)
    return 0 if all_pass else 5


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "decay":
            return cmd_decay(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_selftest(args)
    except json.JSONDecodeError as exc:
        sys.stderr.write(f"error: JSON parse failure at line {exc.lineno}, column {exc.colno}: {exc.msg}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except NumericalQualityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 4
    except InconsistencyError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 5


if __name__ == "__main__":
    sys.exit(main())

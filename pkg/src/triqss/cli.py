"""Command-line front end: verify the algebra, run the protocol, estimate attacks.

Three subcommands.  `verify` sweeps a dimension range and checks every
identity the protocol rests on (unbiasedness, eigenvector residuals,
state-form equalities, uniqueness of the common eigenstate); it exits
nonzero if any residual exceeds its tolerance.  `run` executes a single
seeded run and writes the full report.  `attack` replays a strategy
over many seeded trials and reports the detection rate beside the
analytic value when one exists.

Every command is a pure function of its flags: reports contain no
timestamps or environment data, so identical invocations produce
byte-identical files.  Exit codes: 0 success, 1 failed checks (or an
aborted run under --strict), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from .adversary import STRATEGY_BUILDERS, estimate_detection
from .core import omega_pow
from .errors import ContractError, ResourceLimitError
from .ghz import GhzSpec, common_eigenspace, form_equivalence, ghz_closed_form, ghz_sum_form, check_u_relation
from .mub import check_mub, pauli_x, pauli_y, x_basis, y_basis, y_eigenvalue
from .protocol import ProtocolConfig, report_to_json, run_protocol

SCHEMA_VERSION = "1"
VERIFY_DIM_LIMIT = 16
RUN_DIM_LIMIT = 32

#: Residual tolerances for the verify command, by check name.
VERIFY_TOLERANCES = {
    "mub_deviation": 1e-9,
    "x_residual": 1e-7,
    "y_residual": 1e-7,
    "sum_vs_closed": 1e-9,
    "u_relation": 1e-9,
    "form_equivalence": 1e-9,
    "generator_gap": 1e-9,
}


def verify_dimension(d: int) -> dict:
    """All algebraic checks for one dimension; values are worst-case residuals."""
    checks: dict[str, float | bool] = {}
    checks["mub_deviation"] = check_mub(d)

    xm = x_basis(d).matrix
    ym = y_basis(d).matrix
    k = np.arange(d)
    x_res = pauli_x(d).mat @ xm - xm * omega_pow(d, k)
    y_eigs = np.array([y_eigenvalue(d, int(kk)) for kk in k])
    y_res = pauli_y(d).mat @ ym - ym * y_eigs
    checks["x_residual"] = float(np.linalg.norm(x_res, axis=0).max())
    checks["y_residual"] = float(np.linalg.norm(y_res, axis=0).max())

    sum_vs_closed = 0.0
    u_rel = 0.0
    forms = 0.0
    rank_ok = True
    generator_gap = 0.0
    for alpha in range(d):
        for form in ("XYY", "XXX"):
            spec = GhzSpec(d, alpha, form)
            gap = float(np.max(np.abs(ghz_sum_form(spec).amps - ghz_closed_form(spec).amps)))
            sum_vs_closed = max(sum_vs_closed, gap)
        u_rel = max(u_rel, check_u_relation(d, alpha))
        forms = max(forms, form_equivalence(d, alpha))
        rank, basis = common_eigenspace(d, alpha, limit=VERIFY_DIM_LIMIT)
        rank_ok = rank_ok and rank == 1
        if rank >= 1:
            overlap = abs(np.vdot(basis[:, 0], ghz_closed_form(GhzSpec(d, alpha, "XYY")).amps))
            generator_gap = max(generator_gap, 1.0 - float(overlap))
        else:
            generator_gap = 1.0
    checks["sum_vs_closed"] = sum_vs_closed
    checks["u_relation"] = u_rel
    checks["form_equivalence"] = forms
    checks["eigenspace_rank_one"] = rank_ok
    checks["generator_gap"] = generator_gap

    ok = rank_ok and all(
        checks[name] < tol for name, tol in VERIFY_TOLERANCES.items()
    )
    checks["ok"] = ok
    return checks


def _parse_d_range(text: str, parser: argparse.ArgumentParser) -> tuple[int, int]:
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
        else:
            lo = hi = int(text)
    except ValueError:
        parser.error(f"cannot parse dimension range {text!r}; expected D or LO..HI")
    if lo < 2:
        parser.error(f"d={lo} rejected; dimensions start at 2")
    if hi < lo:
        parser.error(f"empty dimension range {text!r}")
    if hi > VERIFY_DIM_LIMIT:
        parser.error(f"d={hi} exceeds the verify limit {VERIFY_DIM_LIMIT}")
    return lo, hi


def _write_or_print(text: str, out_path: str | None) -> int:
    if out_path is None:
        sys.stdout.write(text)
        return 0
    try:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        print(f"cannot write {out_path}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args, parser) -> int:
    lo, hi = _parse_d_range(args.d, parser)
    results = []
    all_ok = True
    for d in range(lo, hi + 1):
        checks = verify_dimension(d)
        all_ok = all_ok and bool(checks["ok"])
        results.append({"d": d, **checks})
        flat = " ".join(
            f"{name}={value:.3e}" if isinstance(value, float) else f"{name}={value}"
            for name, value in checks.items()
            if name != "ok"
        )
        print(f"d={d} {'ok' if checks['ok'] else 'FAIL'} {flat}")
    print("all checks passed" if all_ok else "verification FAILED")
    if args.out:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "range": [lo, hi],
            "tolerances": VERIFY_TOLERANCES,
            "results": results,
            "passed": all_ok,
        }
        code = _write_or_print(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
        if code:
            return code
    return 0 if all_ok else 1


def _build_config(args, parser) -> ProtocolConfig:
    if args.d > RUN_DIM_LIMIT:
        parser.error(f"d={args.d} exceeds the run limit {RUN_DIM_LIMIT}")
    try:
        return ProtocolConfig(
            d=args.d,
            n=args.n,
            alpha_mode=args.alpha_mode,
            alpha=args.alpha,
            test_fraction=args.test_fraction,
            seed=args.seed,
        )
    except ContractError as exc:
        parser.error(str(exc))


def _build_strategy(name: str, d: int, parser):
    if name == "none":
        return None
    try:
        return STRATEGY_BUILDERS[name](d)
    except ResourceLimitError as exc:
        parser.error(str(exc))


def cmd_run(args, parser) -> int:
    config = _build_config(args, parser)
    strategy = _build_strategy(args.adversary, config.d, parser)
    report = run_protocol(config, strategy)
    code = _write_or_print(report_to_json(report), args.out)
    if code:
        return code
    if args.out:
        print(
            f"aborted={str(report.aborted).lower()}"
            f" key_length={len(report.alice_key)}"
            f" agreement={str(report.key_agreement).lower()}"
        )
    if args.strict and (report.aborted or report.invalid):
        return 1
    return 0


def cmd_attack(args, parser) -> int:
    if args.adversary == "none":
        parser.error(f"attack requires an adversary; choose from {sorted(STRATEGY_BUILDERS)}")
    config = _build_config(args, parser)
    strategy = _build_strategy(args.adversary, config.d, parser)
    if args.trials < 1:
        parser.error(f"trials must be positive, got {args.trials}")
    estimate = estimate_detection(config, strategy, args.trials)
    attack = estimate.as_dict()
    if estimate.analytic is not None and estimate.std_error > 0:
        attack["z_score"] = (estimate.rate - estimate.analytic) / estimate.std_error
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "attack",
        "adversary": args.adversary,
        "config": asdict(config),
        "attack": attack,
    }
    code = _write_or_print(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    if code:
        return code
    if args.out:
        analytic = "-" if estimate.analytic is None else f"{estimate.analytic:.4f}"
        print(f"rate={estimate.rate:.4f} std_error={estimate.std_error:.4f} analytic={analytic}")
    return 0


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--d", type=int, required=True, help="qudit dimension (2..%d)" % RUN_DIM_LIMIT)
    sub.add_argument("--n", type=int, required=True, help="target key length; 2n rounds are prepared")
    sub.add_argument("--alpha", type=int, default=0, help="hidden residue when --alpha-mode fixed")
    sub.add_argument(
        "--alpha-mode",
        choices=["fixed", "string"],
        default="fixed",
        dest="alpha_mode",
        help="one shared residue, or a fresh hidden residue per round",
    )
    sub.add_argument("--test-fraction", type=float, default=0.5, dest="test_fraction")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None, help="report file; omit to print the JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triqss",
        description="Three-party d-level quantum secret sharing: verification, runs, attacks.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="check the algebraic identities over a dimension range")
    verify.add_argument("--d", required=True, help="dimension or range, e.g. 3 or 2..16")
    verify.add_argument("--out", default=None, help="optional JSON residual report")

    adversary_choices = ["none", *sorted(STRATEGY_BUILDERS)]

    run = commands.add_parser("run", help="execute one seeded protocol run")
    _add_config_flags(run)
    run.add_argument("--adversary", choices=adversary_choices, default="none")
    run.add_argument("--strict", action="store_true", help="exit 1 if the run aborted")

    attack = commands.add_parser("attack", help="estimate an attack's detection rate")
    _add_config_flags(attack)
    attack.add_argument("--adversary", choices=adversary_choices, required=True)
    attack.add_argument("--trials", type=int, default=1000)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args, parser)
    if args.command == "run":
        return cmd_run(args, parser)
    return cmd_attack(args, parser)


if __name__ == "__main__":
    sys.exit(main())

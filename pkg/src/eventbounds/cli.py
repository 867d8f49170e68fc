"""Command-line front end.

Commands: exact (oracle probabilities), bound (one certificate), sweep
(all certificates for a system), witness (per-tuple sharpness witnesses),
conditional (per-block bounds and their expectation), verify (randomized
property suites).  Output is JSON by default, CSV on request.  Exit
codes: 0 success, 2 input or parse error, 3 bound not applicable,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional

from .certificates import SIDES, TARGET_AT_LEAST, TARGETS, BoundRequest, BoundTerm, certificate_from_terms
from .conditional import PartitionField, conditional_bound, expectation_aggregate
from .core import EventSystem, exact_occurrence
from .dispatch import evaluate_request
from .engine import search_index_sets, target_vector
from .errors import EventBoundsError, InputFormatError, NotApplicableError
from .moments import MomentSet, MomentVector, moment_matrix, moment_set
from .numerics import DEFAULT_TOLERANCE, Number, encode_number, exactify
from .verification import run_all

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_APPLICABLE = 3
EXIT_VERIFY = 4


def _load_json(path: str) -> object:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: invalid JSON: {exc}") from None


def _load_system(args: argparse.Namespace) -> EventSystem:
    return EventSystem.from_payload(
        _load_json(args.input), force_exact=args.exact_arithmetic
    )


def _load_moments(args: argparse.Namespace) -> MomentSet:
    loaded = MomentSet.from_payload(_load_json(args.moments))
    if not args.exact_arithmetic or loaded.exact:
        return loaded
    vectors = tuple(
        MomentVector(
            j=vector.j,
            n=vector.n,
            d=vector.d,
            ell=vector.ell,
            values=tuple(exactify(value) for value in vector.values),
        )
        for vector in loaded
    )
    return MomentSet(n=loaded.n, d=loaded.d, ell=loaded.ell, vectors=vectors)


def _difference(a: Number, b: Number) -> Number:
    if isinstance(a, float) or isinstance(b, float):
        return float(a) - float(b)
    return a - b


def _cell(value: object) -> object:
    encoded = encode_number(value) if not isinstance(value, (str, int, bool)) else value
    return encoded


def _emit(args: argparse.Namespace, payload: object, table: Optional[tuple] = None) -> None:
    if args.format == "csv" and table is not None:
        header, rows = table
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(cell) for cell in row])
    else:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _request_from(args: argparse.Namespace) -> BoundRequest:
    return BoundRequest(
        r=args.r,
        d=args.d,
        ell=args.ell,
        side=args.side,
        target=args.target,
        m=getattr(args, "m", None),
    )


def _truth(occurrence, r: int, target: str) -> Number:
    return occurrence.at_least(r) if target == TARGET_AT_LEAST else occurrence.p[r]


def _gap(certificate, truth: Number) -> Number:
    if certificate.side == "upper":
        return _difference(certificate.clamped, truth)
    return _difference(truth, certificate.clamped)


def cmd_exact(args: argparse.Namespace) -> int:
    system = _load_system(args)
    occurrence = exact_occurrence(system)
    payload = {
        "n": system.n,
        "p": [encode_number(value) for value in occurrence.p],
        "at_least": [
            encode_number(occurrence.at_least(r)) for r in range(1, system.n + 1)
        ],
    }
    rows = [["p", i, value] for i, value in enumerate(occurrence.p)]
    rows += [["P", r, occurrence.at_least(r)] for r in range(1, system.n + 1)]
    _emit(args, payload, (["quantity", "index", "value"], rows))
    return EXIT_OK


def cmd_bound(args: argparse.Namespace) -> int:
    request = _request_from(args)
    payload: dict = {}
    if args.input:
        system = _load_system(args)
        moments = moment_set(system, request.d, request.ell)
        certificate = evaluate_request(moments, request, args.tolerance)
        truth = _truth(exact_occurrence(system), request.r, request.target)
        payload["certificate"] = certificate.to_payload()
        payload["exact"] = encode_number(truth)
        payload["gap"] = encode_number(_gap(certificate, truth))
        exact_cells = [truth, _gap(certificate, truth)]
    else:
        moments = _load_moments(args)
        certificate = evaluate_request(moments, request, args.tolerance)
        payload["certificate"] = certificate.to_payload()
        exact_cells = ["", ""]
    row = [
        certificate.side,
        certificate.target,
        certificate.r,
        certificate.d,
        certificate.ell,
        certificate.formula_id,
        certificate.value,
        certificate.clamped,
    ] + exact_cells
    header = ["side", "target", "r", "d", "ell", "formula", "value", "clamped", "exact", "gap"]
    _emit(args, payload, (header, [row]))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    system = _load_system(args)
    occurrence = exact_occurrence(system)
    n = system.n
    entries = []
    for d in range(0, n):
        moments = moment_set(system, d, min(3, n - d + 1))
        windows = [(2, moments.restricted(2))]
        if moments.ell >= 3:
            windows.append((3, moments))
        for r in range(max(d, 1), n + 1):
            for ell, window in windows:
                for target in TARGETS:
                    truth = _truth(occurrence, r, target)
                    for side in SIDES:
                        request = BoundRequest(r=r, d=d, ell=ell, side=side, target=target)
                        try:
                            certificate = evaluate_request(window, request, args.tolerance)
                        except NotApplicableError:
                            continue
                        entries.append(
                            {
                                "r": r,
                                "d": d,
                                "ell": ell,
                                "side": side,
                                "target": target,
                                "formula": certificate.formula_id,
                                "value": encode_number(certificate.value),
                                "clamped": encode_number(certificate.clamped),
                                "exact": encode_number(truth),
                                "gap": encode_number(_gap(certificate, truth)),
                            }
                        )
    header = ["r", "d", "ell", "side", "target", "formula", "value", "clamped", "exact", "gap"]
    rows = [[entry[column] for column in header] for entry in entries]
    _emit(args, {"n": n, "rows": entries}, (header, rows))
    return EXIT_OK


def cmd_witness(args: argparse.Namespace) -> int:
    if args.input:
        system = _load_system(args)
        if args.ell > system.n - args.d + 1:
            raise NotApplicableError(
                f"ell={args.ell} exceeds the {system.n - args.d + 1} moment "
                f"positions at n={system.n}, d={args.d}"
            )
        moments = moment_set(system, args.d, args.ell)
    else:
        moments = _load_moments(args)
        if moments.d != args.d:
            raise InputFormatError(f"moment file has d={moments.d}, request says d={args.d}")
        if args.ell > moments.n - moments.d + 1:
            raise NotApplicableError(
                f"ell={args.ell} exceeds the {moments.n - moments.d + 1} moment "
                f"positions at n={moments.n}, d={moments.d}"
            )
        moments = moments if moments.ell == args.ell else moments.restricted(args.ell)
    n, d = moments.n, moments.d
    fmat = moment_matrix(n, d, args.ell)
    v = target_vector(n, d, args.r, args.target)
    terms, witnesses = [], []
    for vector in moments:
        result = search_index_sets(fmat, v, vector, args.side, tolerance=args.tolerance)
        if result.best is None:
            raise NotApplicableError(
                f"no {args.side}-feasible index set at ell={args.ell} "
                f"for target={args.target!r}, r={args.r}, d={d}, n={n}"
            )
        best = result.best
        terms.append(
            BoundTerm(
                j=vector.j,
                coefficients=best.coefficients,
                index_set=best.index_set,
                value=best.value,
                formula_id="search",
            )
        )
        witnesses.append(
            {"j": list(vector.j), "value": encode_number(best.value), **best.witness.to_payload()}
        )
    certificate = certificate_from_terms(
        args.side, args.target, args.r, d, args.ell, "search", terms
    )
    attained = all(entry["nonnegative"] for entry in witnesses)
    payload = {
        "side": args.side,
        "target": args.target,
        "r": args.r,
        "d": d,
        "ell": args.ell,
        "value": encode_number(certificate.value),
        "clamped": encode_number(certificate.clamped),
        "attained": attained,
        "witnesses": witnesses,
    }
    rows = [
        [
            " ".join(str(k) for k in entry["j"]),
            " ".join(str(i) for i in entry["index_set"]),
            entry["value"],
            " ".join(str(z) for z in entry["z"]),
            entry["nonnegative"],
        ]
        for entry in witnesses
    ]
    _emit(args, payload, (["j", "index_set", "value", "z", "nonnegative"], rows))
    return EXIT_OK


def cmd_conditional(args: argparse.Namespace) -> int:
    system = _load_system(args)
    partition = PartitionField.from_payload(_load_json(args.partition), n=system.n)
    request = _request_from(args)
    blocks = conditional_bound(system, partition, request, args.tolerance)
    unconditional = evaluate_request(
        moment_set(system, request.d, request.ell), request, args.tolerance
    )
    aggregated = expectation_aggregate(blocks, unconditional)
    rows = [
        [
            "block",
            block.index,
            block.weight,
            block.certificate.value,
            block.certificate.clamped,
            block.certificate.formula_id,
        ]
        for block in blocks
    ]
    rows.append(["aggregate", "", 1, aggregated.value, aggregated.clamped, aggregated.formula_id])
    rows.append(
        [
            "unconditional",
            "",
            1,
            unconditional.value,
            unconditional.clamped,
            unconditional.formula_id,
        ]
    )
    header = ["kind", "block", "weight", "value", "clamped", "formula"]
    _emit(args, aggregated.to_payload(), (header, rows))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    reports = run_all(args.trials, args.n_max, args.seed, args.tolerance)
    payload = {
        "seed": args.seed,
        "trials": args.trials,
        "n_max": args.n_max,
        "suites": [
            {
                "name": report.name,
                "passed": report.passed,
                "trials": report.trials,
                "checks": report.checks,
                "failures": list(report.failures),
            }
            for report in reports
        ],
        "passed": all(report.passed for report in reports),
    }
    rows = [
        [report.name, report.passed, report.trials, report.checks, len(report.failures)]
        for report in reports
    ]
    _emit(args, payload, (["suite", "passed", "trials", "checks", "failures"], rows))
    if not payload["passed"]:
        for report in reports:
            for failure in report.failures:
                print(f"reproducer: {failure}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument(
        "--exact-arithmetic",
        action="store_true",
        help="convert float inputs to the exact rationals their text denotes",
    )
    parser.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)


def _add_request(parser: argparse.ArgumentParser, with_m: bool = True) -> None:
    parser.add_argument("--r", type=int, required=True, help="occurrence threshold")
    parser.add_argument("--d", type=int, default=0, help="conditioning order (tuple size)")
    parser.add_argument("--ell", type=int, default=3, help="number of moment orders")
    parser.add_argument("--target", choices=TARGETS, default=TARGET_AT_LEAST)
    parser.add_argument("--side", choices=SIDES, default="upper")
    if with_m:
        parser.add_argument("--m", type=int, default=None, help="pin the window position")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventbounds",
        description=(
            "Sharp upper and lower bounds on the probability that at least r "
            "(or exactly r) of n events occur, from low-order binomial moments."
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)

    exact_cmd = commands.add_parser("exact", help="exact occurrence probabilities")
    exact_cmd.add_argument("--input", required=True, help="event-system JSON file")
    _add_common(exact_cmd)
    exact_cmd.set_defaults(handler=cmd_exact)

    bound_cmd = commands.add_parser("bound", help="one bound certificate")
    source = bound_cmd.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="event-system JSON file")
    source.add_argument("--moments", help="moment-set JSON file")
    _add_request(bound_cmd)
    _add_common(bound_cmd)
    bound_cmd.set_defaults(handler=cmd_bound)

    sweep_cmd = commands.add_parser("sweep", help="all certificates for a system")
    sweep_cmd.add_argument("--input", required=True, help="event-system JSON file")
    _add_common(sweep_cmd)
    sweep_cmd.set_defaults(handler=cmd_sweep)

    witness_cmd = commands.add_parser("witness", help="sharpness witnesses per tuple")
    wsource = witness_cmd.add_mutually_exclusive_group(required=True)
    wsource.add_argument("--input", help="event-system JSON file")
    wsource.add_argument("--moments", help="moment-set JSON file")
    _add_request(witness_cmd, with_m=False)
    _add_common(witness_cmd)
    witness_cmd.set_defaults(handler=cmd_witness)

    conditional_cmd = commands.add_parser(
        "conditional", help="per-block bounds and their expectation"
    )
    conditional_cmd.add_argument("--input", required=True, help="event-system JSON file")
    conditional_cmd.add_argument("--partition", required=True, help="partition JSON file")
    _add_request(conditional_cmd)
    _add_common(conditional_cmd)
    conditional_cmd.set_defaults(handler=cmd_conditional)

    verify_cmd = commands.add_parser("verify", help="randomized property suites")
    verify_cmd.add_argument("--trials", type=int, default=1000)
    verify_cmd.add_argument("--n-max", type=int, default=8, dest="n_max")
    verify_cmd.add_argument("--seed", type=int, default=42)
    _add_common(verify_cmd)
    verify_cmd.set_defaults(handler=cmd_verify)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except NotApplicableError as exc:
        print(f"not applicable: {exc}", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    except (EventBoundsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: analyze, check, signalling, oracle verify.

Exit codes: 0 for pass/admissible, 1 for an inadmissible verdict or a
combinatorial/numeric disagreement, 2 for usage and parse errors.  JSON
reports have stable field names and row order; only timing varies run to
run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from .admissibility import (
    ContractionSpec,
    check_composition,
    check_contraction,
    check_equivalence,
    check_inclusion,
)
from .oracle import (
    basis_for_words,
    channel_violation_margin,
    is_channel,
    channel_defects,
    nosignalling_defect,
    numeric_contraction,
    sample_deterministic,
    violation_witness,
)
from .signalling import Relation, crosscheck, signalling_matrix, signals
from .strings import build_D
from .type_core import (
    TypeExpr,
    TypeSyntaxError,
    io_partition,
    parse_type,
    relabel_unique,
    render_type,
)

DIMS_ENV_VAR = "HOTYPES_DIMS"


class CliError(Exception):
    """Usage-level failure; maps to exit code 2."""


def load_dims_file(path: str) -> dict[str, int]:
    """Read `Name = dimension` lines; '#' starts a comment."""
    table: dict[str, int] = {}
    try:
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                name, sep, value = line.partition("=")
                if not sep:
                    raise CliError(f"{path}:{lineno}: expected 'Name = dimension'")
                try:
                    table[name.strip()] = int(value.strip())
                except ValueError:
                    raise CliError(f"{path}:{lineno}: bad dimension {value.strip()!r}") from None
    except OSError as exc:
        raise CliError(f"cannot read dims file: {exc}") from exc
    return table


def _parse(text: str, dims: dict[str, int]) -> tuple[TypeExpr, dict[str, str]]:
    return relabel_unique(parse_type(text, dims))


def _emit(report: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
    else:
        for line in lines:
            print(line)


def _label_names(labels) -> list[str]:
    return [a.name for a in labels]


def cmd_analyze(args, dims: dict[str, int]) -> int:
    start = time.perf_counter()
    x, renamed = _parse(args.type, dims)
    analysis = io_partition(x)
    words = build_D(x)
    report = {
        "command": "analyze",
        "input_types": [args.type],
        "type": render_type(x, sugar=True),
        "elementary": [{"name": a.name, "dimension": a.dimension} for a in analysis.elementary],
        "inputs": _label_names(analysis.inputs_ordered()),
        "outputs": _label_names(analysis.outputs_ordered()),
        "lambda": str(analysis.lam),
        "word_count": len(words),
        "words": words.render() if len(words) <= 64 else None,
        "renamed": renamed,
        "timing_ms": (time.perf_counter() - start) * 1000,
    }
    lines = [
        f"type:    {report['type']}",
        "systems: " + " ".join(f"{a.name}({a.dimension})" for a in analysis.elementary),
        "inputs:  {" + ", ".join(report["inputs"]) + "}",
        "outputs: {" + ", ".join(report["outputs"]) + "}",
        f"lambda:  {report['lambda']}",
        f"|D|:     {report['word_count']}",
    ]
    if renamed:
        lines.insert(1, "renamed: " + ", ".join(f"{new}<-{old}" for new, old in sorted(renamed.items())))
    if report["words"] is not None:
        lines.append("D:       " + " ".join(report["words"]))
    _emit(report, args.json, lines)
    return 0


def _verdict_lines(verdict) -> list[str]:
    lines = [f"verdict: {'admissible' if verdict.admissible else 'inadmissible'} ({verdict.reason.value})"]
    if verdict.witness is not None:
        lines.append(f"witness: {verdict.witness.render()}")
    if verdict.result_in is not None:
        lines.append(
            "result:  {" + ", ".join(_label_names(verdict.result_in)) + "} -> {"
            + ", ".join(_label_names(verdict.result_out)) + "}"
        )
    return lines


def cmd_check(args, dims: dict[str, int]) -> int:
    start = time.perf_counter()
    if args.relation == "contraction":
        x, _ = _parse(args.type, dims)
        spec = ContractionSpec.from_text(args.pairs, x)
        verdict = check_contraction(x, spec)
        input_types = [args.type]
    else:
        x, _ = _parse(args.type, dims)
        y, _ = _parse(args.other, dims)
        if args.relation == "inclusion":
            verdict = check_inclusion(x, y)
        elif args.relation == "equivalence":
            verdict = check_equivalence(x, y)
        else:
            verdict = check_composition(x, y)
        input_types = [args.type, args.other]
    report = {
        "command": f"check {args.relation}",
        "input_types": input_types,
        "verdict": verdict.to_json(),
        "timing_ms": (time.perf_counter() - start) * 1000,
    }
    _emit(report, args.json, _verdict_lines(verdict))
    return 0 if verdict.admissible else 1


def cmd_signalling(args, dims: dict[str, int]) -> int:
    start = time.perf_counter()
    x, _ = _parse(args.type, dims)
    rows = signalling_matrix(x)
    agreed = crosscheck(x) if args.crosscheck else None
    report = {
        "command": "signalling",
        "input_types": [args.type],
        "rows": [row.to_json() for row in rows],
        "crosscheck": agreed,
        "timing_ms": (time.perf_counter() - start) * 1000,
    }
    lines = []
    if rows:
        width = max(len(r.source.name) for r in rows)
        for row in rows:
            mark = {"no-signalling": "-/->", "full-signalling": "==>", "signalling": "-->"}[row.relation.value]
            lines.append(
                f"{row.source.name:>{width}} {mark:>4} {row.target.name:<4} "
                f"{row.relation.value:<16} via {render_type(row.enclosing, sugar=True)}"
            )
    else:
        lines.append("no input/output pairs")
    if agreed is not None:
        lines.append(f"crosscheck: {'agree' if agreed else 'DISAGREE'}")
    _emit(report, args.json, lines)
    if agreed is False:
        return 1
    return 0


def _counting_dimension(x: TypeExpr) -> int:
    total = 0
    words = build_D(x)
    for word in words:
        size = 1
        for i, a in enumerate(words.universe):
            bit = (word.bits >> i) & 1
            size *= 1 if bit else a.dimension**2 - 1
        total += size
    return total


def cmd_oracle_verify(args, dims: dict[str, int]) -> int:
    start = time.perf_counter()
    x, _ = _parse(args.type, dims)
    analysis = io_partition(x)
    closed_form = Fraction(1)
    for a in analysis.outputs:
        closed_form /= a.dimension
    lambda_ok = analysis.lam == closed_form
    basis = basis_for_words(build_D(x))
    basis_ok = len(basis) == _counting_dimension(x)

    pair_reports = []
    failures = 0 if (lambda_ok and basis_ok) else 1
    if args.trials > 0:
        if args.pairs:
            spec = ContractionSpec.from_text(args.pairs, x)
            pairs = list(spec.pairs)
        else:
            pairs = [
                (a, b)
                for a in analysis.inputs_ordered()
                for b in analysis.outputs_ordered()
                if a.dimension == b.dimension
            ]
        input_names = {s.name for s in analysis.inputs}
        for a, b in pairs:
            verdict = check_contraction(x, ContractionSpec.of([(a, b)]))
            entry: dict = {
                "pair": f"{a.name}:{b.name}",
                "admissible": verdict.admissible,
                "reason": verdict.reason.value,
            }
            if verdict.witness is None and not verdict.admissible:
                # rejected on roles alone (both inputs or both outputs);
                # there is no signalling relation to compare against
                pair_reports.append(entry)
                continue
            if a.name not in input_names:
                a, b = b, a
            relation = signals(x, a, b)
            entry["relation"] = relation.relation.value
            if verdict.admissible != (relation.relation is Relation.NO_SIGNALLING):
                entry["error"] = "signalling algorithm disagrees with critical-set verdict"
                failures += 1
            elif verdict.admissible:
                remaining_in = _label_names(verdict.result_in)
                remaining_out = _label_names(verdict.result_out)
                worst_channel = 0.0
                worst_nosig = 0.0
                bad = 0
                for trial in range(args.trials):
                    sample = sample_deterministic(x, seed=args.seed + trial)
                    contracted = numeric_contraction(sample, a, b)
                    negativity, deviation = channel_defects(contracted, remaining_in, remaining_out)
                    worst_channel = max(worst_channel, negativity, deviation)
                    nosig = nosignalling_defect(
                        sample,
                        analysis.inputs_ordered(),
                        analysis.outputs_ordered(),
                        a,
                        b,
                    )
                    worst_nosig = max(worst_nosig, nosig)
                    if not is_channel(contracted, remaining_in, remaining_out, args.tol):
                        bad += 1
                entry.update(
                    trials=args.trials,
                    channel_failures=bad,
                    worst_channel_residual=worst_channel,
                    worst_nosignalling_residual=worst_nosig,
                )
                if bad or worst_nosig > args.tol:
                    failures += 1
            else:
                witness = violation_witness(x, a, b)
                contracted = numeric_contraction(witness, a, b)
                remaining_in = [s.name for s in analysis.inputs_ordered() if s.name != a.name]
                remaining_out = [s.name for s in analysis.outputs_ordered() if s.name != b.name]
                margin = channel_violation_margin(contracted, remaining_in, remaining_out)
                signal_size = nosignalling_defect(
                    witness,
                    analysis.inputs_ordered(),
                    analysis.outputs_ordered(),
                    a,
                    b,
                )
                entry.update(
                    violation_margin=margin,
                    witness_signalling_size=signal_size,
                )
                if margin < 10 * args.tol:
                    failures += 1
                    entry["error"] = "violation margin too small"
            pair_reports.append(entry)

    report = {
        "command": "oracle verify",
        "input_types": [args.type],
        "seed": args.seed,
        "tol": args.tol,
        "lambda_recursion_matches_closed_form": lambda_ok,
        "deviation_basis_dimension_matches": basis_ok,
        "pairs": pair_reports,
        "failures": failures,
        "timing_ms": (time.perf_counter() - start) * 1000,
    }
    lines = [
        f"lambda check: {'ok' if lambda_ok else 'FAIL'}",
        f"basis dimension check: {'ok' if basis_ok else 'FAIL'} ({len(basis)} elements)",
    ]
    for entry in pair_reports:
        if "error" in entry:
            lines.append(f"pair {entry['pair']}: FAIL ({entry['error']})")
        elif entry["admissible"]:
            lines.append(
                f"pair {entry['pair']}: admissible, {entry['trials'] - entry['channel_failures']}"
                f"/{entry['trials']} channel checks pass, worst residual "
                f"{entry['worst_channel_residual']:.3g}"
            )
        elif "violation_margin" in entry:
            lines.append(
                f"pair {entry['pair']}: inadmissible, violation margin "
                f"{entry['violation_margin']:.3g}"
            )
        else:
            lines.append(f"pair {entry['pair']}: inadmissible ({entry['reason']})")
    lines.append(f"failures: {failures}")
    _emit(report, args.json, lines)
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotypes",
        description="Type calculus for higher-order quantum maps with a numerical oracle.",
    )
    parser.add_argument("--json", action="store_true", help="emit a JSON report")
    parser.add_argument(
        "--dims",
        metavar="FILE",
        default=None,
        help=f"system dimension table (Name = d per line); default ${DIMS_ENV_VAR}",
    )
    # the same flags are accepted after the subcommand; SUPPRESS keeps a leaf
    # parse from clobbering a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--dims", metavar="FILE", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser(
        "analyze", parents=[common], help="systems, io partition, lambda, and word set"
    )
    p_analyze.add_argument("type")
    p_analyze.set_defaults(func=cmd_analyze)

    p_check = sub.add_parser("check", help="decision procedures")
    check_sub = p_check.add_subparsers(dest="relation", required=True)
    for relation in ("inclusion", "equivalence", "composition"):
        p_rel = check_sub.add_parser(relation, parents=[common])
        p_rel.add_argument("type")
        p_rel.add_argument("other")
        p_rel.set_defaults(func=cmd_check)
    p_contr = check_sub.add_parser("contraction", parents=[common])
    p_contr.add_argument("type")
    p_contr.add_argument("--pairs", required=True, help="contraction pairs, e.g. A:B,C:D")
    p_contr.set_defaults(func=cmd_check)

    p_sig = sub.add_parser("signalling", parents=[common], help="pairwise signalling matrix")
    p_sig.add_argument("type")
    p_sig.add_argument("--crosscheck", action="store_true", help="re-derive rows via critical sets")
    p_sig.set_defaults(func=cmd_signalling)

    p_oracle = sub.add_parser("oracle", help="numerical cross-validation")
    oracle_sub = p_oracle.add_subparsers(dest="oracle_command", required=True)
    p_verify = oracle_sub.add_parser("verify", parents=[common])
    p_verify.add_argument("type")
    p_verify.add_argument("--pairs", default=None, help="pairs to test; default all in/out pairs")
    p_verify.add_argument("--trials", type=int, default=50)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--tol", type=float, default=1e-9)
    p_verify.set_defaults(func=cmd_oracle_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    dims_path = args.dims or os.environ.get(DIMS_ENV_VAR)
    try:
        dims = load_dims_file(dims_path) if dims_path else {}
        return args.func(args, dims)
    except TypeSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(exc.caret_diagram(), file=sys.stderr)
        return 2
    except (CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

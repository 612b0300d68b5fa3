"""``cbd`` command-line tool.

Exit status: 0 when the requested analysis completed (whatever the
verdict), 1 for input or validation errors, 2 when a system exceeds the
cell limit. Verdicts live in the report, never in the exit status.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import deterministic, gallery, lp
from .coupling import construct_multimaximal, dump_coupling
from .cyclic import detect_cyclic
from .model import (
    ValidationError,
    connectedness_report,
    connection,
    format_rational,
    load_json,
    serialize_system,
    system_from_dict,
)

REPORT_FORMAT = "cbd-report/1"
BATCH_FORMAT = "cbd-batch/1"
ASSIGNMENT_FORMAT = "cbd-assignment/1"

EXIT_OK, EXIT_INPUT, EXIT_SIZE = 0, 1, 2


def _fmt(x: Fraction) -> str:
    return format_rational(x)


def load_document(path):
    """Parse a file into a System or a ConstraintSystem, by its format tag."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    doc = load_json(text)
    if isinstance(doc, dict) and (doc.get("format") == deterministic.FORMAT
                                  or ("constraints" in doc and "format" not in doc)):
        return deterministic.constraints_from_dict(doc)
    return system_from_dict(doc)


def _suffixed(path: str, mode: str, modes: list[str]) -> str:
    if len(modes) == 1:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{mode}{p.suffix}"))


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def analyze_system(system, modes, max_cells, witness_path=None, certificate_path=None) -> dict:
    conn = connectedness_report(system)
    report = {
        "format": REPORT_FORMAT,
        "kind": "system",
        "system": system.name,
        "cells": len(system.cells),
        "connectedness": {
            "consistent": conn.consistent,
            "deltas": {q: _fmt(d) for q, d in conn.deltas.items()},
        },
        "cyclic": None,
        "verdicts": [],
    }
    arrangement = detect_cyclic(system)
    for mode in modes:
        verdict = lp.decide(system, mode, max_cells=max_cells)
        entry = {
            "mode": mode,
            "contextual": verdict.contextual,
            "methods": verdict.methods,
            "witness": None,
            "certificate": None,
        }
        if witness_path and verdict.witness is not None:
            entry["witness"] = _suffixed(witness_path, mode, modes)
            _write(entry["witness"], lp.dump_document(lp.witness_to_dict(verdict)))
        if certificate_path and verdict.certificate is not None:
            entry["certificate"] = _suffixed(certificate_path, mode, modes)
            _write(entry["certificate"], lp.dump_document(lp.certificate_to_dict(verdict)))
        report["verdicts"].append(entry)
        if verdict.cyclic is not None and report["cyclic"] is None:
            cv = verdict.cyclic
            report["cyclic"] = {
                "rank": cv.rank,
                "properties": list(arrangement.properties),
                "contexts": list(arrangement.contexts),
                "lhs": _fmt(cv.lhs),
                "rhs": _fmt(cv.rhs),
                "slack": _fmt(cv.slack),
                "slack_note": "lhs - rhs; descriptive only, not a contextuality measure",
                "contextual": cv.contextual,
            }
    return report


def analyze_constraints(cs) -> dict:
    result = deterministic.assignment_search(cs)
    parity = deterministic.parity_check_ks4d(cs)
    return {
        "format": REPORT_FORMAT,
        "kind": "constraints",
        "properties": len(cs.properties),
        "constraints": len(cs.constraints),
        "satisfiable": result.satisfiable,
        "assignment": result.assignment,
        "parity": {"status": parity.status, "reason": parity.reason},
    }


def analyze_file(path, modes, max_cells, witness_path=None, certificate_path=None, timing=True):
    """Report dict and exit code for one file; errors are folded into the report."""
    start = time.perf_counter()
    try:
        doc = load_document(path)
        if isinstance(doc, deterministic.ConstraintSystem):
            report = analyze_constraints(doc)
        else:
            report = analyze_system(doc, modes, max_cells, witness_path, certificate_path)
        code = EXIT_OK
    except lp.SizeLimitError as exc:
        report, code = {"format": REPORT_FORMAT, "error": str(exc)}, EXIT_SIZE
    except ValidationError as exc:
        report, code = {"format": REPORT_FORMAT, "error": str(exc)}, EXIT_INPUT
    report = {"file": str(path), **report}
    if timing:
        report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return report, code


def _analyze_job(args):
    return analyze_file(*args)


def render_text(report: dict) -> str:
    lines = [f"file: {report['file']}"]
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    elif report["kind"] == "constraints":
        lines.append(f"  properties: {report['properties']}, constraints: {report['constraints']}")
        lines.append(f"  satisfiable: {report['satisfiable']}")
        if report["assignment"] is not None:
            ones = sorted(p for p, v in report["assignment"].items() if v)
            lines.append(f"  true properties: {', '.join(ones) or '(none)'}")
        lines.append(f"  parity: {report['parity']['status']} ({report['parity']['reason']})")
    else:
        conn = report["connectedness"]
        lines.append(f"  system: {report['system']} ({report['cells']} cells)")
        lines.append(f"  consistently connected: {conn['consistent']}")
        for q, d in conn["deltas"].items():
            if d != "0":
                lines.append(f"    delta[{q}] = {d}")
        cyc = report["cyclic"]
        if cyc:
            lines.append(f"  cyclic rank {cyc['rank']}: lhs {cyc['lhs']}, rhs {cyc['rhs']}, slack {cyc['slack']}")
            lines.append(f"    order: {' '.join(cyc['properties'])} / {' '.join(cyc['contexts'])}")
        for v in report["verdicts"]:
            word = "contextual" if v["contextual"] else "noncontextual"
            lines.append(f"  {v['mode']}: {word} [{', '.join(v['methods'])}]")
            for k in ("witness", "certificate"):
                if v[k]:
                    lines.append(f"    {k}: {v[k]}")
    if "timing" in report:
        lines.append(f"  time: {report['timing']['seconds']:.3f}s")
    return "\n".join(lines) + "\n"


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_validate(args) -> int:
    doc = load_document(args.file)
    if isinstance(doc, deterministic.ConstraintSystem):
        print(f"ok: constraint system, {len(doc.properties)} properties, {len(doc.constraints)} constraints")
    else:
        print(f"ok: {doc.name or '(unnamed)'}: {len(doc.contexts)} contexts, {len(doc.cells)} cells")
    return EXIT_OK


def cmd_analyze(args) -> int:
    modes = list(lp.MODES) if args.mode == "both" else [args.mode]
    max_cells = args.max_cells if args.max_cells is not None else lp.default_max_cells()
    timing = not args.no_timing
    target = Path(args.file)
    if target.is_dir() or args.batch:
        if not target.is_dir():
            raise ValidationError(f"--batch needs a directory, got {target}")
        if args.emit_witness or args.emit_certificate:
            raise ValidationError("--emit-witness/--emit-certificate are single-file options")
        files = sorted(p for p in target.iterdir() if p.suffix == ".json" and p.is_file())
        jobs = [(str(p), modes, max_cells, None, None, timing) for p in files]
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_analyze_job, jobs))
        else:
            results = [_analyze_job(j) for j in jobs]
        reports = [r for r, _ in results]
        code = max((c for _, c in results), default=EXIT_OK)
        summary = []
        for r in reports:
            row = {"file": r["file"]}
            if "error" in r:
                row["error"] = r["error"]
            elif r["kind"] == "constraints":
                row["satisfiable"] = r["satisfiable"]
            else:
                row["system"] = r["system"]
                row["contextual"] = {v["mode"]: v["contextual"] for v in r["verdicts"]}
            summary.append(row)
        if args.format == "json":
            sys.stdout.write(_dump({"format": BATCH_FORMAT, "reports": reports, "summary": summary}))
        else:
            for r in reports:
                sys.stdout.write(render_text(r))
            sys.stdout.write("summary:\n")
            for row in summary:
                if "error" in row:
                    status = f"error: {row['error']}"
                elif "satisfiable" in row:
                    status = "satisfiable" if row["satisfiable"] else "unsatisfiable"
                else:
                    status = ", ".join(f"{m}={'contextual' if c else 'noncontextual'}"
                                       for m, c in row["contextual"].items())
                sys.stdout.write(f"  {row['file']}: {status}\n")
        return code

    report, code = analyze_file(str(target), modes, max_cells, args.emit_witness,
                                args.emit_certificate, timing)
    if "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
        return code
    sys.stdout.write(_dump(report) if args.format == "json" else render_text(report))
    return code


def cmd_coupling(args) -> int:
    system = load_document(args.file)
    if isinstance(system, deterministic.ConstraintSystem):
        raise ValidationError("coupling needs a cbd-system/1 document")
    text = dump_coupling(construct_multimaximal(connection(system, args.property)))
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_assign(args) -> int:
    cs = load_document(args.file)
    if not isinstance(cs, deterministic.ConstraintSystem):
        raise ValidationError("assign needs a cbd-constraints/1 document")
    result = deterministic.assignment_search(cs, count=args.count)
    parity = deterministic.parity_check_ks4d(cs)
    doc = {
        "format": ASSIGNMENT_FORMAT,
        "satisfiable": result.satisfiable,
        "assignment": result.assignment,
        "parity": {"status": parity.status, "reason": parity.reason},
    }
    if args.count:
        doc["count"] = result.count
    sys.stdout.write(_dump(doc))
    return EXIT_OK


def _parse_marginals(text: str):
    items = []
    for part in text.split(","):
        if ":" in part:
            a, b = part.split(":", 1)
            items.append((Fraction(a.strip()), Fraction(b.strip())))
        else:
            items.append(Fraction(part.strip()))
    return items[0] if len(items) == 1 else items


def _parse_products(text: str):
    items = [Fraction(p.strip()) for p in text.split(",")]
    return items[0] if len(items) == 1 else items


def cmd_examples(args) -> int:
    if args.action == "list":
        for key, entry in gallery.ENTRIES.items():
            print(f"{key:12s} {entry.kind:13s} {entry.description}")
        return EXIT_OK
    if not args.key:
        raise ValidationError("examples emit needs a key")
    params = {}
    try:
        if args.marginals is not None:
            params["marginals"] = _parse_marginals(args.marginals)
        if args.products is not None:
            params["products"] = _parse_products(args.products)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad parameter: {exc}") from None
    built = gallery.build(args.key, **params)
    if isinstance(built, deterministic.ConstraintSystem):
        text = deterministic.serialize_constraints(built)
    else:
        text = serialize_system(built)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cbd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a system or constraint file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="decide contextuality of a system file or directory")
    p.add_argument("file")
    p.add_argument("--mode", choices=["cbd", "traditional", "both"], default="cbd")
    p.add_argument("--max-cells", type=_positive_int, default=None)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--emit-witness", metavar="PATH")
    p.add_argument("--emit-certificate", metavar="PATH")
    p.add_argument("--batch", action="store_true", help="analyze every *.json in a directory")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes in batch mode")
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("coupling", help="multimaximal coupling of one connection")
    p.add_argument("file")
    p.add_argument("--property", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("assign", help="search 0/1 assignments of a constraint system")
    p.add_argument("file")
    p.add_argument("--count", action="store_true")
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("examples", help="list or emit built-in systems")
    p.add_argument("action", choices=["list", "emit"])
    p.add_argument("key", nargs="?")
    p.add_argument("--marginals", help="p, or comma list of p or p:p' per context")
    p.add_argument("--products", help="<RR'>, or comma list per context (use --products=-4/5)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for the size limit
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except lp.SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

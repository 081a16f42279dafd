"""Command-line front end.

Exit status is 0 on success, 1 on domain or I/O errors and 2 on usage errors.
Workflow and policy arguments that do not name an existing file are looked up
by basename in the fixture directory (``PROVABS_FIXTURES`` overrides it).
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys
from pathlib import Path

from provabs import bundled
from provabs.abstraction import AbstractionPolicy, ZoomPolicy, apply_policy, load_policy
from provabs.dot import export_dot
from provabs.errors import ProvAbsError
from provabs.flatten import FlatWorkflow, flatten
from provabs.integrity import EXPECTED_MATRIX, check_all, integrity_matrix
from provabs.metrics import precision_report, render_table, reports_to_json
from provabs.model import Workflow, parse_workflow, serialize_workflow, workflow_to_dict
from provabs.trace import filter_trace, generate_trace, serialize_trace
from provabs.views import serialize_view

DEFAULT_FORMAT = {"compare": "table", "check": "table", "export-dot": "dot"}

# expected precision: policy -> (activity A, activity B, port A, port B)
EXPECTED_PRECISION = {
    "eliminate-all": (5, 5, 0, 9),
    "collapse-all": (5, 5, 0, 4),
    "collapse-selected": (5, 9, 4, 8),
    "zoom": (5, 7, 0, 6),
}


class _Usage(Exception):
    pass


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    fallback = bundled.fixture_path(p.name)
    return fallback if fallback.exists() else p


def _read_workflow(path: str) -> Workflow:
    return parse_workflow(_resolve(path).read_bytes())


def _read_policy(spec: str) -> AbstractionPolicy:
    if spec == "zoom":
        return ZoomPolicy()
    p = Path(spec)
    if not p.exists() and not p.suffix:
        p = Path(f"{spec}.json")
    return load_policy(_resolve(str(p)))


def _flat(args) -> FlatWorkflow:
    if not args.workflow:
        raise _Usage(f"{args.command}: --workflow is required")
    return flatten(_read_workflow(args.workflow))


def _need_policy(args) -> AbstractionPolicy:
    if not args.policy:
        raise _Usage(f"{args.command}: --policy is required")
    return _read_policy(args.policy)


def _check_format(args, allowed: tuple[str, ...]) -> str:
    fmt = args.format or DEFAULT_FORMAT.get(args.command, "json")
    if fmt not in allowed:
        raise _Usage(f"{args.command}: --format must be one of {', '.join(allowed)}")
    return fmt


def cmd_flatten(args) -> str:
    _check_format(args, ("json",))
    f = _flat(args)
    if not args.full:
        return serialize_workflow(f.workflow)
    envelope = {
        "workflow": workflow_to_dict(f.workflow),
        "promotion_map": {k: list(v) for k, v in sorted(f.promotion_map.items())},
        "ground_truth": {
            "groups": [
                {"id": g.id, "members": list(g.members), "defining_significant": g.defining_significant}
                for g in f.ground_truth.groups
            ],
            "visible_ports": sorted(f.ground_truth.visible_ports),
        },
    }
    return json.dumps(envelope, indent=2, sort_keys=True) + "\n"


def cmd_abstract(args) -> str:
    fmt = _check_format(args, ("json", "dot"))
    f = _flat(args)
    v = apply_policy(f, _need_policy(args))
    return export_dot(v) if fmt == "dot" else serialize_view(v)


def cmd_check(args) -> str:
    fmt = _check_format(args, ("table", "json"))
    f = _flat(args)
    report = check_all(f, apply_policy(f, _need_policy(args)))
    return report.to_table() if fmt == "table" else report.to_json()


def _policy_list(args) -> list[AbstractionPolicy]:
    if not args.policies:
        raise _Usage(f"{args.command}: --policies is required")
    return [_read_policy(s.strip()) for s in args.policies.split(",") if s.strip()]


def cmd_compare(args) -> str:
    fmt = _check_format(args, ("table", "json"))
    if not args.src or not args.dst:
        raise _Usage("compare: --src and --dst are required")
    f = _flat(args)
    reports = precision_report(f, _policy_list(args), args.src, args.dst)
    return render_table(reports) if fmt == "table" else reports_to_json(reports)


def cmd_trace(args) -> str:
    fmt = _check_format(args, ("json", "dot"))
    f = _flat(args)
    t = generate_trace(f)
    if args.policy:
        t = filter_trace(t, apply_policy(f, _read_policy(args.policy)))
    return export_dot(t) if fmt == "dot" else serialize_trace(t)


def cmd_export_dot(args) -> str:
    _check_format(args, ("dot",))
    if not args.workflow:
        raise _Usage("export-dot: --workflow is required")
    w = _read_workflow(args.workflow)
    if args.policy:
        return export_dot(apply_policy(flatten(w), _read_policy(args.policy)))
    return export_dot(w)


def _precision_lines(rows) -> list[str]:
    return [f"{name}: {a}/{b} {pa}/{pb}" for name, (a, b, pa, pb) in rows]


def run_demo() -> tuple[str, bool]:
    """Both reproductions; returns the printable output and whether everything matched."""
    f = bundled.load_flat("textmining")
    matrix = integrity_matrix(
        f,
        [bundled.bundled_policy(n) for n in ("zoom", "collapse-all", "eliminate-all")],
        bundled.matrix_counterexamples(),
    )
    out = ["Integrity properties per abstraction method", "", matrix.to_table()]
    ok = True
    if matrix.discrepancies():
        ok = False
        exp = [f"{m} {p}: {EXPECTED_MATRIX[m][p]}" for m, p, _, _ in matrix.discrepancies()]
        obs = [f"{m} {p}: {o}" for m, p, o, _ in matrix.discrepancies()]
        out += difflib.unified_diff(exp, obs, "expected", "observed", lineterm="")
        out.append("")

    names = bundled.PRECISION_POLICIES
    reports = precision_report(
        f, [bundled.bundled_policy(n) for n in names], bundled.PRECISION_SRC, bundled.PRECISION_DST
    )
    out += [
        f"Precision on {bundled.PRECISION_SRC} -> {bundled.PRECISION_DST}",
        "",
        render_table(reports),
    ]
    observed = {n: (r.activity_A, r.activity_B, r.port_A, r.port_B) for n, r in zip(names, reports)}
    bad = []
    for n in names:
        a, b, pa, pb = observed[n]
        ea, eb, epa, epb = EXPECTED_PRECISION[n]
        if (a, b, pa) != (ea, eb, epa) or abs(pb - epb) > 1:
            bad.append(n)
    if bad:
        ok = False
        out += difflib.unified_diff(
            _precision_lines((n, EXPECTED_PRECISION[n]) for n in bad),
            _precision_lines((n, observed[n]) for n in bad),
            "expected",
            "observed",
            lineterm="",
        )
        out.append("")
    out.append("all reproductions match" if ok else "REPRODUCTION MISMATCH")
    return "\n".join(out) + "\n", ok


COMMANDS = {
    "flatten": cmd_flatten,
    "abstract": cmd_abstract,
    "check": cmd_check,
    "compare": cmd_compare,
    "trace": cmd_trace,
    "export-dot": cmd_export_dot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="provabs", description="Provenance abstraction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "demo"):
        p = sub.add_parser(name)
        p.add_argument("--output", "-o", help="write the result here instead of stdout")
        p.add_argument("--format", choices=("json", "table", "dot"))
        if name == "demo":
            continue
        p.add_argument("--workflow", "-w")
        if name in ("abstract", "check", "trace", "export-dot"):
            p.add_argument("--policy", "-p")
        if name == "compare":
            p.add_argument("--policies", help="comma-separated policy files or names; 'zoom' selects ZOOM")
            p.add_argument("--src")
            p.add_argument("--dst")
        if name == "flatten":
            p.add_argument("--full", action="store_true", help="include promotion map and design groups")
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "demo":
            text, ok = run_demo()
            _emit(text, args.output)
            return 0 if ok else 1
        _emit(COMMANDS[args.command](args), args.output)
        return 0
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"provabs: error: {exc}", file=sys.stderr)
        return 2
    except ProvAbsError as exc:
        print(f"provabs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        where = exc.filename if exc.filename is not None else ""
        print(f"provabs: cannot access {where}: {exc.strerror or exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

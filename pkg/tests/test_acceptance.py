"""Acceptance criteria, one reported line each.

Run under pytest (the lines appear in the output even without ``-s``) or
directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from generators import (  # noqa: E402
    random_collapse_policy,
    random_eliminate_policy,
    random_flat,
    random_workflow,
    random_zoom_policy,
)
from oracles import agreement_mismatches, oracle_completeness, oracle_reach  # noqa: E402
from provabs.abstraction import apply_policy  # noqa: E402
from provabs.bundled import (  # noqa: E402
    FIXTURE_NAMES,
    PRECISION_DST,
    PRECISION_POLICIES,
    PRECISION_SRC,
    bundled_policy,
    load_flat,
    load_workflow,
    matrix_counterexamples,
)
from provabs.cli import EXPECTED_PRECISION, main  # noqa: E402
from provabs.integrity import STRICT, check_acyclicity, check_all, check_soundness, completeness_violations  # noqa: E402
from provabs.metrics import precision_report  # noqa: E402
from provabs.model import parse_workflow, reach, serialize_workflow  # noqa: E402
from provabs.trace import filter_trace, generate_trace  # noqa: E402
from provabs.views import top_layer_view  # noqa: E402

MATRIX_WORKFLOWS = 200
ORACLE_INSTANCES = 500
AGREEMENT_INSTANCES = 500
ROUND_TRIP_RANDOM = 100

# properties each method must satisfy on every generated instance
REQUIRED = {
    "zoom": ("soundness_significant", "validity", "completeness", "bipartiteness"),
    "collapse": ("acyclicity", "validity", "completeness", "bipartiteness"),
    "eliminate": ("soundness_strict", "acyclicity", "validity", "completeness"),
}


def matrix_sweep() -> tuple[bool, str]:
    failures = []
    for seed in range(MATRIX_WORKFLOWS):
        rng = random.Random(seed)
        f = random_flat(seed, n_min=5, n_max=30)
        policies = {
            "zoom": random_zoom_policy(rng, f),
            "collapse": random_collapse_policy(rng),
            "eliminate": random_eliminate_policy(rng),
        }
        for method, policy in policies.items():
            v = apply_policy(f, policy)
            results = dict(check_all(f, v).named_results())
            for prop in REQUIRED[method]:
                if not results[prop].passed:
                    failures.append((seed, method, prop))
            if method == "eliminate":
                eliminated = bool(v.eliminated)
                if results["bipartiteness"].passed == eliminated:
                    failures.append((seed, method, "bipartiteness iff elimination"))
    # the "N" cells
    tm = load_flat("textmining")
    if check_soundness(tm, top_layer_view(tm), STRICT).passed:
        failures.append(("textmining", "subworkflow", "soundness_strict"))
    for method, f, v in matrix_counterexamples():
        broken = check_acyclicity(v) if method == "zoom" else check_soundness(f, v, STRICT)
        if broken.passed:
            failures.append((f.workflow.id, method, "counterexample"))
    return not failures, f"{MATRIX_WORKFLOWS} workflows x 3 methods + 3 counterexamples, failures={failures[:5]}"


def precision_table() -> tuple[bool, str]:
    f = load_flat("textmining")
    reports = precision_report(f, [bundled_policy(n) for n in PRECISION_POLICIES], PRECISION_SRC, PRECISION_DST)
    bad = []
    for name, r in zip(PRECISION_POLICIES, reports):
        a, b, pa, pb = EXPECTED_PRECISION[name]
        if (r.activity_A, r.activity_B, r.port_A) != (a, b, pa) or abs(r.port_B - pb) > 1:
            bad.append((name, r.activity, r.activity_ports))
    rows = ", ".join(f"{n} {r.activity} {r.activity_ports}" for n, r in zip(PRECISION_POLICIES, reports))
    return not bad, rows


def oracle_equivalence() -> tuple[bool, str]:
    mismatches = []
    for seed in range(ORACLE_INSTANCES):
        rng = random.Random(seed)
        f = random_flat(seed, n_min=2, n_max=10)
        w = f.workflow
        ports = sorted(w.port_refs)
        for s in ports:
            for t in ports:
                if reach(w, s, t) != oracle_reach(w, s, t):
                    mismatches.append((seed, "reach", s, t))
        for policy in (random_zoom_policy(rng, f), random_collapse_policy(rng), random_eliminate_policy(rng)):
            v = apply_policy(f, policy)
            if set(completeness_violations(f, v)) != oracle_completeness(f, v):
                mismatches.append((seed, "completeness", policy.name))
    return not mismatches, f"{ORACLE_INSTANCES} instances, mismatches={mismatches[:5]}"


def trace_agreement() -> tuple[bool, str]:
    mismatches = []
    for seed in range(AGREEMENT_INSTANCES):
        rng = random.Random(seed)
        f = random_flat(seed, n_min=2, n_max=10)
        t = generate_trace(f)
        for policy in (random_zoom_policy(rng, f), random_collapse_policy(rng), random_eliminate_policy(rng)):
            v = apply_policy(f, policy)
            if agreement_mismatches(f, v, filter_trace(t, v)):
                mismatches.append((seed, v.method))
    return not mismatches, f"{AGREEMENT_INSTANCES} instances x 3 methods, mismatches={mismatches[:5]}"


def round_trip() -> tuple[bool, str]:
    workflows = [load_workflow(n) for n in FIXTURE_NAMES]
    workflows += [random_workflow(random.Random(s)) for s in range(ROUND_TRIP_RANDOM)]
    bad = [w.id for w in workflows if parse_workflow(serialize_workflow(w)) != w]
    return not bad, f"{len(FIXTURE_NAMES)} fixtures + {ROUND_TRIP_RANDOM} random, failures={bad[:5]}"


def demo() -> tuple[bool, str]:
    code = main(["demo", "--output", "/dev/null"])
    return code == 0, f"exit status {code}"


CRITERIA = [
    ("Method/property matrix (property sweep + counterexamples)", matrix_sweep, 120.0),
    ("Precision on the text-mining fixture", precision_table, 5.0),
    ("Oracle equivalence of reach and completeness", oracle_equivalence, None),
    ("Trace/view agreement under all three methods", trace_agreement, None),
    ("Round trip parse/serialize/parse", round_trip, None),
    ("demo exits 0", demo, None),
]


def evaluate(fn, limit):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed >= limit:
        ok, detail = False, f"{detail}; took {elapsed:.1f}s, limit {limit:.0f}s"
    return ok, f"{detail} ({elapsed:.2f}s)"


@pytest.mark.parametrize("label,fn,limit", CRITERIA, ids=[c[1].__name__ for c in CRITERIA])
def test_criterion(label, fn, limit, capsys):
    ok, detail = evaluate(fn, limit)
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    all_ok = True
    for label, fn, limit in CRITERIA:
        ok, detail = evaluate(fn, limit)
        all_ok &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    sys.exit(0 if all_ok else 1)

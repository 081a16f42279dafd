"""Decision procedures for the five integrity policies, with witnesses.

Witnesses are chosen deterministically: candidates are ordered by the
topological rank of their ports in the original workflow (upstream first),
ties broken by identifier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from provabs import graph
from provabs.errors import PolicyError
from provabs.flatten import FlatWorkflow
from provabs.model import split_ref, wf_ref
from provabs.views import AbstractView, check_derived, top_layer_view, view_reach

STRICT = "strict"
SIGNIFICANT = "significant"


@dataclass(frozen=True)
class CheckResult:
    check: str
    passed: bool
    witness: Any = None

    def to_dict(self) -> dict[str, Any]:
        return {"status": "pass" if self.passed else "fail", "witness": _jsonable(self.witness)}

    def __bool__(self) -> bool:
        return self.passed


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "__dataclass_fields__"):
        return {k: _jsonable(getattr(value, k)) for k in value.__dataclass_fields__}
    return value


def _pass(check: str) -> CheckResult:
    return CheckResult(check, True)


def _rank(f: FlatWorkflow, ref: str) -> int:
    return f.workflow.port_rank.get(ref, len(f.workflow.port_rank))


def _item_rank(f: FlatWorkflow, item: str) -> int:
    if item.startswith("wf:"):
        return _rank(f, item)
    a = f.workflow.activity(item)
    ports = [f"{a.id}.{p}" for p in (*a.inputs, *a.outputs)]
    return min((_rank(f, p) for p in ports), default=0)


# ---------------------------------------------------------------------------
# soundness


def soundness_violations(f: FlatWorkflow, v: AbstractView, mode: str = STRICT) -> list[tuple[str, str]]:
    """Every unfounded dependency asserted by ``v``, in witness order."""
    check_derived(f, v)
    w = f.workflow
    if mode == STRICT:
        bad = set()
        for n in v.nodes:
            for i, o in n.conduction_pairs():
                if o not in w.reachable_from(i):
                    bad.add((i, o))
        for link in v.indirect_links:
            if link.sink not in w.reachable_from(link.source):
                bad.add((link.source, link.sink))
        return sorted(bad, key=lambda p: (_rank(f, p[0]), _rank(f, p[1]), p))
    if mode != SIGNIFICANT:
        raise ValueError(f"unknown soundness mode {mode!r}")

    node_of = v.node_of
    sig = [s for s in v.significant if s in node_of]
    sources = [wf_ref(p) for p in v.inputs] + sig
    targets = sig + [wf_ref(p) for p in v.outputs]

    def abstract_starts(item: str) -> list[str]:
        return [item] if item.startswith("wf:") else list(v.node_map[node_of[item]].exposed_outputs)

    def abstract_ends(item: str) -> list[str]:
        return [item] if item.startswith("wf:") else list(v.node_map[node_of[item]].exposed_inputs)

    def original_starts(item: str) -> list[str]:
        if item.startswith("wf:"):
            return [item]
        return [f"{item}.{p}" for p in w.activity(item).outputs]

    def original_ends(item: str) -> list[str]:
        if item.startswith("wf:"):
            return [item]
        return [f"{item}.{p}" for p in w.activity(item).inputs]

    bad = []
    for a in sources:
        abstract = graph.reachable(v.dependency_graph, abstract_starts(a))
        original: set[str] = set()
        for s in original_starts(a):
            original |= w.reachable_from(s)
        for b in targets:
            if a == b:
                continue
            if not a.startswith("wf:") and not b.startswith("wf:") and node_of[a] == node_of[b]:
                asserted = True
            else:
                asserted = any(t in abstract for t in abstract_ends(b))
            if asserted and not any(t in original for t in original_ends(b)):
                bad.append((a, b))
    return sorted(bad, key=lambda p: (_item_rank(f, p[0]), _item_rank(f, p[1]), p))


def check_soundness(f: FlatWorkflow, v: AbstractView, mode: str = STRICT) -> CheckResult:
    bad = soundness_violations(f, v, mode)
    name = f"soundness_{mode}"
    return CheckResult(name, False, bad[0]) if bad else _pass(name)


def is_significant_sound(f: FlatWorkflow, v: AbstractView) -> bool:
    return not soundness_violations(f, v, SIGNIFICANT)


# ---------------------------------------------------------------------------
# acyclicity


def check_acyclicity(v: AbstractView) -> CheckResult:
    cycle = graph.find_cycle(v.quotient_graph)
    return _pass("acyclicity") if cycle is None else CheckResult("acyclicity", False, cycle)


# ---------------------------------------------------------------------------
# bipartiteness and validity (views and traces)


def check_bipartiteness(g) -> CheckResult:
    from provabs.trace import ExecutionTrace

    if isinstance(g, ExecutionTrace):
        if g.derived:
            return CheckResult("bipartiteness", False, g.derived[0])
        return _pass("bipartiteness")
    indirect = list(g.indirect_links)
    if not indirect:
        return _pass("bipartiteness")
    rank = _view_port_rank(g)
    first = min(indirect, key=lambda l: (rank(l.source), rank(l.sink), l.source, l.sink))
    return CheckResult("bipartiteness", False, first)


def _view_port_rank(v: AbstractView):
    order = graph.topological_order(v.dependency_graph) or sorted(v.port_refs)
    index = {p: i for i, p in enumerate(order)}
    return lambda p: index.get(p, len(index))


VIEW_NODE_KINDS = ("activity", "composite")


def check_validity(g) -> CheckResult:
    from provabs.trace import ExecutionTrace

    if isinstance(g, ExecutionTrace):
        return _trace_validity(g)
    v: AbstractView = g
    for n in v.nodes:
        if n.kind not in VIEW_NODE_KINDS:
            return CheckResult("validity", False, n.id)
        for p in n.exposed_inputs + n.exposed_outputs:
            act, _ = split_ref(p)
            if act not in n.members:
                return CheckResult("validity", False, p)
    producers = {wf_ref(p) for p in v.inputs}
    consumers = {wf_ref(p) for p in v.outputs}
    for n in v.nodes:
        producers.update(n.exposed_outputs)
        consumers.update(n.exposed_inputs)
    for link in v.links:
        if link.source not in producers or link.sink not in consumers:
            return CheckResult("validity", False, link)
    return _pass("validity")


def _trace_validity(t) -> CheckResult:
    invocations = {i.id for i in t.invocations}
    artifacts = {a.id for a in t.artifacts}
    for inv in t.invocations:
        if inv.kind != "invocation":
            return CheckResult("validity", False, inv.id)
    for art in t.artifacts:
        if art.kind != "artifact":
            return CheckResult("validity", False, art.id)
    for u in t.used:
        if u.invocation not in invocations or u.artifact not in artifacts:
            return CheckResult("validity", False, u)
    for g in t.generated_by:
        if g.artifact not in artifacts or g.invocation not in invocations:
            return CheckResult("validity", False, g)
    generators: dict[str, int] = {}
    for g in t.generated_by:
        generators[g.artifact] = generators.get(g.artifact, 0) + 1
        if generators[g.artifact] > 1:
            return CheckResult("validity", False, g)
    for d in t.derived:
        if not d.indirect or d.artifact not in artifacts or d.source not in artifacts:
            return CheckResult("validity", False, d)
    return _pass("validity")


# ---------------------------------------------------------------------------
# completeness


def _carrier_reach(f: FlatWorkflow, v: AbstractView, ref: str) -> set[str]:
    """Original reach from a retained carrier.

    Each link carries its own artefact, so an exposed output only reaches
    onward through links that leave its node; a link internal to the node
    carries an artefact the view does not contain.
    """
    w = f.workflow
    node = v.port_owner.get(ref)
    act, _ = split_ref(ref)
    if node is None or act is None or ref not in w.outgoing:
        return w.reachable_from(ref)
    out = {ref}
    for link in w.outgoing[ref]:
        sink_act, _ = split_ref(link.sink)
        if sink_act is not None and v.node_of.get(sink_act) == node:
            continue
        out |= w.reachable_from(link.sink)
    return out


def completeness_violations(f: FlatWorkflow, v: AbstractView) -> list[tuple[str, str]]:
    check_derived(f, v)
    w = f.workflow
    carriers = sorted(v.port_refs, key=lambda p: (_rank(f, p), p))
    bad = []
    for d1 in carriers:
        original = _carrier_reach(f, v, d1)
        abstract = v.reachable_from(d1)
        for d2 in carriers:
            if d1 != d2 and d2 in original and d2 not in abstract:
                bad.append((d1, d2))
    return bad


def check_completeness(f: FlatWorkflow, v: AbstractView) -> CheckResult:
    bad = completeness_violations(f, v)
    return CheckResult("completeness", False, bad[0]) if bad else _pass("completeness")


# ---------------------------------------------------------------------------
# reports


CHECKS = ("soundness_strict", "soundness_significant", "acyclicity", "bipartiteness", "validity", "completeness")


@dataclass(frozen=True)
class IntegrityReport:
    soundness_strict: CheckResult
    soundness_significant: CheckResult
    acyclicity: CheckResult
    bipartiteness: CheckResult
    validity: CheckResult
    completeness: CheckResult
    trace_bipartiteness: CheckResult | None = None
    trace_validity: CheckResult | None = None

    def results(self) -> list[CheckResult]:
        return [r for _, r in self.named_results()]

    def named_results(self) -> list[tuple[str, CheckResult]]:
        names = CHECKS + ("trace_bipartiteness", "trace_validity")
        return [(n, getattr(self, n)) for n in names if getattr(self, n) is not None]

    def to_dict(self) -> dict[str, Any]:
        data = {name: getattr(self, name).to_dict() for name in CHECKS}
        if self.trace_bipartiteness is not None:
            data["trace_bipartiteness"] = self.trace_bipartiteness.to_dict()
            data["trace_validity"] = self.trace_validity.to_dict()
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        rows = []
        for name, r in self.named_results():
            status = "pass" if r.passed else "FAIL"
            witness = "" if r.passed else json.dumps(_jsonable(r.witness))
            rows.append((name, status, witness))
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{c:<{width}}  {s:<4}  {w}".rstrip() for c, s, w in rows) + "\n"


def check_all(f: FlatWorkflow, v: AbstractView, *, with_trace: bool = True) -> IntegrityReport:
    tb = tv = None
    if with_trace:
        from provabs.trace import filter_trace, generate_trace

        t = filter_trace(generate_trace(f), v)
        tb, tv = check_bipartiteness(t), check_validity(t)
    return IntegrityReport(
        soundness_strict=check_soundness(f, v, STRICT),
        soundness_significant=check_soundness(f, v, SIGNIFICANT),
        acyclicity=check_acyclicity(v),
        bipartiteness=check_bipartiteness(v),
        validity=check_validity(v),
        completeness=check_completeness(f, v),
        trace_bipartiteness=tb,
        trace_validity=tv,
    )


# ---------------------------------------------------------------------------
# method/property matrix

METHODS = ("zoom", "collapse", "eliminate", "subworkflow")
METHOD_LABELS = {"zoom": "Composite", "collapse": "Collapse", "eliminate": "Eliminate", "subworkflow": "Sub-Wf"}
PROPERTIES = ("soundness", "acyclicity", "bipartiteness", "validity", "completeness")

EXPECTED_MATRIX = {
    "zoom": {"soundness": "Y", "acyclicity": "N", "bipartiteness": "Y", "validity": "Y", "completeness": "Y"},
    "collapse": {"soundness": "N", "acyclicity": "Y", "bipartiteness": "Y", "validity": "Y", "completeness": "Y"},
    "eliminate": {"soundness": "Y", "acyclicity": "Y", "bipartiteness": "N", "validity": "Y", "completeness": "Y"},
    "subworkflow": {"soundness": "N", "acyclicity": "Y", "bipartiteness": "Y", "validity": "Y", "completeness": "Y"},
}


def _property_results(f: FlatWorkflow, v: AbstractView, method: str) -> dict[str, CheckResult]:
    from provabs.trace import filter_trace, generate_trace

    mode = SIGNIFICANT if method == "zoom" else STRICT
    t = filter_trace(generate_trace(f), v)
    view_validity = check_validity(v)
    return {
        "soundness": check_soundness(f, v, mode),
        "acyclicity": check_acyclicity(v),
        "bipartiteness": check_bipartiteness(t),
        "validity": view_validity if not view_validity else check_validity(t),
        "completeness": check_completeness(f, v),
    }


@dataclass
class IntegrityMatrix:
    """Per-method aggregation: a cell is "Y" iff the property held on every evaluated view."""

    observed: dict[str, dict[str, str]]
    witnesses: dict[str, dict[str, list]] = field(default_factory=dict)
    runs: dict[str, int] = field(default_factory=dict)

    @property
    def expected(self) -> dict[str, dict[str, str]]:
        return EXPECTED_MATRIX

    def discrepancies(self) -> list[tuple[str, str, str, str]]:
        out = []
        for m in METHODS:
            if m not in self.observed:
                continue
            for p in PROPERTIES:
                got, want = self.observed[m][p], EXPECTED_MATRIX[m][p]
                if got != want:
                    out.append((m, p, got, want))
        return out

    def to_table(self) -> str:
        methods = [m for m in METHODS if m in self.observed]
        header = ["Method"] + [METHOD_LABELS[m] for m in methods]
        rows = [header]
        for p in PROPERTIES:
            row = [p.capitalize()]
            for m in methods:
                got, want = self.observed[m][p], EXPECTED_MATRIX[m][p]
                row.append(got if got == want else f"{got}!={want}")
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = [" | ".join(c.ljust(widths[i]) for i, c in enumerate(r)).rstrip() for r in rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, Any]:
        return {
            "observed": self.observed,
            "expected": {m: EXPECTED_MATRIX[m] for m in self.observed},
            "discrepancies": [list(d) for d in self.discrepancies()],
            "runs": self.runs,
            "witnesses": _jsonable(self.witnesses),
        }


def integrity_matrix(
    f: FlatWorkflow,
    policies: Sequence,
    counterexamples: Iterable[tuple[str, FlatWorkflow, AbstractView]] = (),
) -> IntegrityMatrix:
    """Evaluate the five policies per abstraction method.

    ``policies`` are applied to ``f``; the sub-workflow column uses ``f``'s own
    design abstraction.  ``counterexamples`` adds extra (method, workflow,
    view) runs, e.g. constructed views demonstrating a missing guarantee.
    """
    from provabs.abstraction import apply_policy

    runs: list[tuple[str, FlatWorkflow, AbstractView]] = []
    for p in policies:
        v = apply_policy(f, p)
        if v.method == "mixed":
            raise PolicyError(f"mixed policy {p.name!r} has no matrix column")
        runs.append((v.method, f, v))
    runs.append(("subworkflow", f, top_layer_view(f)))
    runs.extend(counterexamples)

    observed: dict[str, dict[str, str]] = {}
    witnesses: dict[str, dict[str, list]] = {}
    counts: dict[str, int] = {}
    for method, wf, v in runs:
        cells = observed.setdefault(method, {p: "Y" for p in PROPERTIES})
        counts[method] = counts.get(method, 0) + 1
        for prop, result in _property_results(wf, v, method).items():
            if not result.passed:
                cells[prop] = "N"
                witnesses.setdefault(method, {}).setdefault(prop, []).append(
                    {"workflow": wf.id, "witness": result.witness}
                )
    return IntegrityMatrix(observed, witnesses, counts)

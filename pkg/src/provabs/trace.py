"""Synthetic retrospective provenance: one invocation per activity, one
artifact per produced value, and view-driven filtering of such traces."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from provabs import graph
from provabs.errors import TraceError
from provabs.flatten import FlatWorkflow
from provabs.model import port_ref, split_ref, wf_ref
from provabs.views import AbstractView


@dataclass(frozen=True)
class Invocation:
    id: str
    activity: str
    members: tuple[str, ...]
    # (used role, generated role) pairs; None means full dependency
    deps: frozenset[tuple[str, str]] | None = None
    kind: str = "invocation"


@dataclass(frozen=True)
class Artifact:
    id: str
    kind: str = "artifact"


@dataclass(frozen=True)
class Used:
    invocation: str
    artifact: str
    role: str


@dataclass(frozen=True)
class GeneratedBy:
    artifact: str
    invocation: str
    role: str


@dataclass(frozen=True)
class Derived:
    """``artifact`` was derived from ``source`` through the bypassed activities."""

    artifact: str
    source: str
    bypass: tuple[str, ...] = ()
    indirect: bool = True


@dataclass(frozen=True)
class ExecutionTrace:
    workflow_id: str
    invocations: tuple[Invocation, ...] = ()
    artifacts: tuple[Artifact, ...] = ()
    used: tuple[Used, ...] = ()
    generated_by: tuple[GeneratedBy, ...] = ()
    derived: tuple[Derived, ...] = ()
    # workflow output name -> artifact delivered to it
    outputs: tuple[tuple[str, str], ...] = ()

    def lineage_graph(self) -> dict[str, tuple[str, ...]]:
        """Artifact-to-artifact flow: through invocations (respecting deps) and derivations."""
        uses: dict[str, list[Used]] = {}
        for u in self.used:
            uses.setdefault(u.invocation, []).append(u)
        gens: dict[str, list[GeneratedBy]] = {}
        for g in self.generated_by:
            gens.setdefault(g.invocation, []).append(g)
        edges = []
        for inv in self.invocations:
            for u in uses.get(inv.id, ()):
                for g in gens.get(inv.id, ()):
                    if inv.deps is None or (u.role, g.role) in inv.deps:
                        edges.append((u.artifact, g.artifact))
        edges.extend((d.source, d.artifact) for d in self.derived)
        return graph.build_adjacency([a.id for a in self.artifacts], edges)


def trace_reach(t: ExecutionTrace, source: str, target: str) -> bool:
    return target in graph.reachable(t.lineage_graph(), [source])


def generate_trace(f: FlatWorkflow) -> ExecutionTrace:
    """Expand a flat workflow into a single-run trace (raises on cyclic input)."""
    w = f.workflow
    try:
        order = w.topological_activities
    except Exception as exc:
        raise TraceError(str(exc)) from None
    invocations = []
    artifacts = [Artifact(wf_ref(p)) for p in w.inputs]
    used = []
    generated = []
    for aid in order:
        a = w.activity(aid)
        deps = None
        if a.internal_deps is not None:
            deps = frozenset((port_ref(aid, i), port_ref(aid, o)) for i, o in a.internal_deps)
        inv = f"inv:{aid}"
        invocations.append(Invocation(inv, aid, (aid,), deps))
        for p in a.inputs:
            link = w.incoming.get(port_ref(aid, p))
            if link is not None:
                used.append(Used(inv, link.source, link.sink))
        for p in a.outputs:
            ref = port_ref(aid, p)
            artifacts.append(Artifact(ref))
            generated.append(GeneratedBy(ref, inv, ref))
    outputs = []
    for p in w.outputs:
        link = w.incoming.get(wf_ref(p))
        if link is not None:
            outputs.append((p, link.source))
    return ExecutionTrace(
        w.id, tuple(invocations), tuple(artifacts), tuple(used), tuple(generated), (), tuple(sorted(outputs))
    )


def _sink_artifact(t: ExecutionTrace, by_role: dict[str, Used], sink: str) -> str:
    act, name = split_ref(sink)
    if act is None:
        for out, art in t.outputs:
            if out == name:
                return art
        raise TraceError(f"trace has no artifact for workflow output {name!r}")
    if sink not in by_role:
        raise TraceError(f"trace has no usage at {sink!r}")
    return by_role[sink].artifact


def filter_trace(t: ExecutionTrace, v: AbstractView) -> ExecutionTrace:
    """Project a trace through a view.

    Composites become single invocations that keep only the artifacts on
    their exposed ports; eliminated invocations disappear and indirect links
    turn into ``Derived`` edges between the surviving artifacts.
    """
    if t.workflow_id != v.workflow_id:
        raise TraceError(f"trace of {t.workflow_id!r} filtered through view of {v.workflow_id!r}")
    inv_of = {inv.activity: inv for inv in t.invocations if len(inv.members) == 1}
    for n in v.nodes:
        for m in n.members:
            if m not in inv_of:
                raise TraceError(f"view member {m!r} has no invocation in the trace")
    for m in v.eliminated:
        if m not in inv_of:
            raise TraceError(f"eliminated activity {m!r} has no invocation in the trace")
    by_role = {u.role: u for u in t.used}
    gens_of: dict[str, list[GeneratedBy]] = {}
    for g in t.generated_by:
        gens_of.setdefault(g.invocation, []).append(g)

    invocations, used, generated = [], [], []
    for n in v.nodes:
        if len(n.members) == 1:
            inv = inv_of[n.members[0]]
            invocations.append(inv)
            used.extend(u for u in t.used if u.invocation == inv.id)
            generated.extend(gens_of.get(inv.id, ()))
            continue
        inv_id = f"inv:{n.id}"
        invocations.append(Invocation(inv_id, n.id, n.members, None))
        for p in n.exposed_inputs:
            used.append(Used(inv_id, _sink_artifact(t, by_role, p), p))
        for p in n.exposed_outputs:
            generated.append(GeneratedBy(p, inv_id, p))

    derived: dict[tuple[str, str], Derived] = {}
    for link in v.indirect_links:
        target = _sink_artifact(t, by_role, link.sink)
        derived.setdefault((target, link.source), Derived(target, link.source, link.bypass))

    keep = {wf_ref(p) for p in v.inputs}
    keep.update(g.artifact for g in generated)
    keep.update(d.artifact for d in derived.values())
    artifacts = tuple(a for a in t.artifacts if a.id in keep)
    order = {inv.id: i for i, inv in enumerate(t.invocations)}
    invocations.sort(key=lambda inv: min(order.get(f"inv:{m}", 0) for m in inv.members))
    outputs = tuple((o, a) for o, a in t.outputs if a in keep)
    return ExecutionTrace(
        t.workflow_id,
        tuple(invocations),
        artifacts,
        tuple(sorted(used, key=lambda u: (u.invocation, u.role))),
        tuple(sorted(generated, key=lambda g: (g.invocation, g.role))),
        tuple(derived[k] for k in sorted(derived)),
        outputs,
    )


def trace_to_dict(t: ExecutionTrace) -> dict[str, Any]:
    return {
        "workflow": t.workflow_id,
        "invocations": [
            {
                "id": i.id,
                "activity": i.activity,
                "members": list(i.members),
                **({"deps": [list(d) for d in sorted(i.deps)]} if i.deps is not None else {}),
            }
            for i in t.invocations
        ],
        "artifacts": [{"id": a.id} for a in t.artifacts],
        "used": [{"invocation": u.invocation, "artifact": u.artifact, "role": u.role} for u in t.used],
        "generatedBy": [
            {"artifact": g.artifact, "invocation": g.invocation, "role": g.role} for g in t.generated_by
        ],
        "derived": [
            {"artifact": d.artifact, "from": d.source, "bypass": list(d.bypass)} for d in t.derived
        ],
        "outputs": {o: a for o, a in t.outputs},
    }


def trace_from_dict(obj: dict[str, Any]) -> ExecutionTrace:
    return ExecutionTrace(
        obj["workflow"],
        tuple(
            Invocation(
                i["id"],
                i["activity"],
                tuple(i["members"]),
                frozenset(tuple(d) for d in i["deps"]) if "deps" in i else None,
            )
            for i in obj["invocations"]
        ),
        tuple(Artifact(a["id"]) for a in obj["artifacts"]),
        tuple(Used(u["invocation"], u["artifact"], u["role"]) for u in obj["used"]),
        tuple(GeneratedBy(g["artifact"], g["invocation"], g["role"]) for g in obj["generatedBy"]),
        tuple(Derived(d["artifact"], d["from"], tuple(d["bypass"])) for d in obj["derived"]),
        tuple(sorted(obj.get("outputs", {}).items())),
    )


def serialize_trace(t: ExecutionTrace) -> str:
    return json.dumps(trace_to_dict(t), indent=2) + "\n"

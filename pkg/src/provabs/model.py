"""Typed model of (nested) dataflow workflows, the JSON format, and validation.

Ports are addressed by string references: ``"act.port"`` for an activity port
and ``"wf:name"`` for a port of the enclosing workflow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from provabs import graph
from provabs.errors import (
    CyclicWorkflowError,
    DanglingReferenceError,
    DuplicateIdError,
    InvalidWorkflowError,
    UnknownPortError,
    WorkflowSyntaxError,
)

WF_PREFIX = "wf:"

ADAPTER_MOTIFS = ("InputPreparation", "Extractor", "Filtering", "FormatTransformation")
MOTIF_NAMES = ADAPTER_MOTIFS + ("Retrieval",)


def wf_ref(name: str) -> str:
    return WF_PREFIX + name


def port_ref(activity: str, port: str) -> str:
    return f"{activity}.{port}"


def split_ref(ref: str) -> tuple[str | None, str]:
    """``"wf:x"`` -> ``(None, "x")``; ``"a.p"`` -> ``("a", "p")``."""
    if ref.startswith(WF_PREFIX):
        return None, ref[len(WF_PREFIX):]
    act, sep, port = ref.partition(".")
    if not sep or not act or not port:
        raise WorkflowSyntaxError(f"malformed port reference {ref!r}")
    return act, port


@dataclass(frozen=True, order=True)
class Motif:
    name: str
    label: str | None = None

    @classmethod
    def parse(cls, text: str) -> Motif:
        if text in MOTIF_NAMES:
            return cls(text)
        if text.startswith("Other:"):
            return cls("Other", text[len("Other:"):])
        return cls("Other", text)

    @property
    def is_adapter(self) -> bool:
        return self.name in ADAPTER_MOTIFS

    def __str__(self) -> str:
        return self.name if self.label is None else f"Other:{self.label}"


@dataclass(frozen=True)
class DataLink:
    source: str
    sink: str
    indirect: bool = False
    bypass: tuple[str, ...] = ()


@dataclass(frozen=True)
class Activity:
    id: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    kind: str = "atomic"
    motif: Motif | None = None
    significant: bool = False
    internal_deps: frozenset[tuple[str, str]] | None = None
    child: Workflow | None = None

    def depends(self, inp: str, out: str) -> bool:
        if self.internal_deps is None:
            return True
        return (inp, out) in self.internal_deps

    def dependency_pairs(self) -> list[tuple[str, str]]:
        if self.internal_deps is None:
            return [(i, o) for i in self.inputs for o in self.outputs]
        return sorted(self.internal_deps)


@dataclass(frozen=True)
class Workflow:
    id: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    activities: tuple[Activity, ...] = ()
    links: tuple[DataLink, ...] = ()

    @cached_property
    def activity_map(self) -> dict[str, Activity]:
        return {a.id: a for a in self.activities}

    def activity(self, activity_id: str) -> Activity:
        return self.activity_map[activity_id]

    @cached_property
    def input_refs(self) -> frozenset[str]:
        """Ports that consume data: activity inputs and workflow outputs."""
        refs = {wf_ref(p) for p in self.outputs}
        for a in self.activities:
            refs.update(port_ref(a.id, p) for p in a.inputs)
        return frozenset(refs)

    @cached_property
    def output_refs(self) -> frozenset[str]:
        """Ports that produce data: activity outputs and workflow inputs."""
        refs = {wf_ref(p) for p in self.inputs}
        for a in self.activities:
            refs.update(port_ref(a.id, p) for p in a.outputs)
        return frozenset(refs)

    @cached_property
    def port_refs(self) -> frozenset[str]:
        return self.input_refs | self.output_refs

    @cached_property
    def incoming(self) -> dict[str, DataLink]:
        return {link.sink: link for link in self.links}

    @cached_property
    def outgoing(self) -> dict[str, tuple[DataLink, ...]]:
        out: dict[str, list[DataLink]] = {}
        for link in self.links:
            out.setdefault(link.source, []).append(link)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def is_flat(self) -> bool:
        return all(a.kind == "atomic" for a in self.activities)

    @cached_property
    def dependency_graph(self) -> dict[str, tuple[str, ...]]:
        """Port-level dependency graph: link edges plus activity-internal edges."""
        edges = [(link.source, link.sink) for link in self.links]
        for a in self.activities:
            for i, o in _conduction(a):
                edges.append((port_ref(a.id, i), port_ref(a.id, o)))
        return graph.build_adjacency(sorted(self.port_refs), edges)

    @cached_property
    def _reach_cache(self) -> dict[str, set[str]]:
        return {}

    def reachable_from(self, ref: str) -> set[str]:
        cache = self._reach_cache
        if ref not in cache:
            if ref not in self.port_refs:
                raise UnknownPortError(f"unknown port {ref!r} in workflow {self.id!r}")
            cache[ref] = graph.reachable(self.dependency_graph, [ref])
        return cache[ref]

    @cached_property
    def activity_graph(self) -> dict[str, tuple[str, ...]]:
        edges = set()
        for link in self.links:
            src, _ = split_ref(link.source)
            dst, _ = split_ref(link.sink)
            if src is not None and dst is not None:
                edges.add((src, dst))
        return graph.build_adjacency(sorted(self.activity_map), edges)

    @cached_property
    def topological_activities(self) -> tuple[str, ...]:
        order = graph.topological_order(self.activity_graph)
        if order is None:
            raise CyclicWorkflowError(f"workflow {self.id!r} contains a dataflow cycle")
        return tuple(order)

    @cached_property
    def port_rank(self) -> dict[str, int]:
        """Deterministic topological rank of each port, used to order witnesses."""
        order = graph.topological_order(self.dependency_graph)
        if order is None:
            order = sorted(self.port_refs)
        return {p: i for i, p in enumerate(order)}

    def significant_ids(self) -> tuple[str, ...]:
        return tuple(sorted(a.id for a in self.activities if a.significant))


def _conduction(a: Activity) -> list[tuple[str, str]]:
    if a.kind == "subworkflow" and a.child is not None and a.internal_deps is None:
        child = a.child
        return [
            (i, o)
            for i in a.inputs
            for o in a.outputs
            if wf_ref(o) in child.reachable_from(wf_ref(i))
        ]
    return a.dependency_pairs()


def reach(w: Workflow, source: str, target: str) -> bool:
    """True iff a dependency path leads from port ``source`` to port ``target``."""
    if target not in w.port_refs:
        raise UnknownPortError(f"unknown port {target!r} in workflow {w.id!r}")
    return target in w.reachable_from(source)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    element: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.element}: {self.message}"


def validate_workflow(w: Workflow, *, source: bool = True, _path: str = "") -> list[Violation]:
    """List every invariant violation; an empty list means the workflow is valid.

    With ``source=True`` indirect links and dataflow cycles are also reported,
    since both may only appear in abstractions.
    """
    where = f"{_path}{w.id}"
    found: list[Violation] = []

    def add(kind: str, element: str, message: str) -> None:
        found.append(Violation(kind, f"{where}/{element}", message))

    seen: set[str] = set()
    for name in (*w.inputs, *w.outputs):
        if name in seen:
            add("duplicate-id", wf_ref(name), "workflow port id used twice")
        seen.add(name)
    act_ids: set[str] = set()
    for a in w.activities:
        if a.id in act_ids:
            add("duplicate-id", a.id, "activity id used twice")
        act_ids.add(a.id)
        if "." in a.id or a.id.startswith(WF_PREFIX) or not a.id:
            add("syntax", a.id, "activity ids must be non-empty and contain no '.'")
        ports = list(a.inputs) + list(a.outputs)
        if len(set(ports)) != len(ports):
            add("duplicate-id", a.id, "port id used twice on the same activity")
        if a.internal_deps is not None:
            for i, o in sorted(a.internal_deps):
                if i not in a.inputs or o not in a.outputs:
                    add("reference", a.id, f"internal dependency ({i}, {o}) names an unknown port")
        if a.significant and a.motif is not None and a.motif.is_adapter:
            add("significant-motif", a.id, f"significant activity carries adapter motif {a.motif}")
        if a.kind == "subworkflow":
            if a.child is None:
                add("subworkflow", a.id, "sub-workflow activity without a child workflow")
            else:
                if tuple(sorted(a.inputs)) != tuple(sorted(a.child.inputs)) or tuple(
                    sorted(a.outputs)
                ) != tuple(sorted(a.child.outputs)):
                    add("subworkflow", a.id, "ports do not match the child workflow's ports")
                found.extend(validate_workflow(a.child, source=source, _path=f"{where}/{a.id}:"))
        elif a.kind != "atomic":
            add("syntax", a.id, f"unknown activity kind {a.kind!r}")
        elif a.child is not None:
            add("syntax", a.id, "atomic activity carries a child workflow")

    fan_in: dict[str, int] = {}
    for link in w.links:
        label = f"{link.source}->{link.sink}"
        if link.source not in w.output_refs:
            add("reference", label, f"link source {link.source!r} is not an existing output port")
        if link.sink not in w.input_refs:
            add("reference", label, f"link sink {link.sink!r} is not an existing input port")
        fan_in[link.sink] = fan_in.get(link.sink, 0) + 1
        if source and link.indirect:
            add("indirect-link", label, "indirect links may only appear in abstract views")
    for sink, count in sorted(fan_in.items()):
        if count > 1:
            add("fan-in", sink, f"{count} links target the same input port")

    if source and not any(v.kind in ("reference", "duplicate-id") for v in found):
        if graph.find_cycle(w.activity_graph) is not None:
            add("cycle", w.id, "source workflows must be acyclic")
    return found


# ---------------------------------------------------------------------------
# JSON format


def _require(obj: dict, key: str, kind: type, where: str) -> Any:
    if key not in obj:
        raise WorkflowSyntaxError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise WorkflowSyntaxError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _port_ids(items: list, where: str) -> tuple[str, ...]:
    ids = []
    for item in items:
        if isinstance(item, dict) and isinstance(item.get("id"), str):
            ids.append(item["id"])
        elif isinstance(item, str):
            ids.append(item)
        else:
            raise WorkflowSyntaxError(f"{where}: ports must be objects with a string 'id'")
    return tuple(ids)


def workflow_from_dict(obj: Any, where: str = "workflow") -> Workflow:
    if not isinstance(obj, dict):
        raise WorkflowSyntaxError(f"{where}: expected an object")
    wid = _require(obj, "id", str, where)
    where = f"{where} {wid!r}"
    activities = []
    for raw in _require(obj, "activities", list, where):
        if not isinstance(raw, dict):
            raise WorkflowSyntaxError(f"{where}: activities must be objects")
        aid = _require(raw, "id", str, where)
        kind = raw.get("kind", "atomic")
        motif = raw.get("motif")
        if motif is not None and not isinstance(motif, str):
            raise WorkflowSyntaxError(f"{where}: motif of {aid!r} must be a string")
        deps = raw.get("internal_deps")
        if deps is not None:
            if not all(isinstance(d, list) and len(d) == 2 for d in deps):
                raise WorkflowSyntaxError(f"{where}: internal_deps of {aid!r} must be pairs")
            deps = frozenset((str(i), str(o)) for i, o in deps)
        child = raw.get("child")
        activities.append(
            Activity(
                id=aid,
                kind=kind,
                inputs=_port_ids(_require(raw, "inputs", list, where), where),
                outputs=_port_ids(_require(raw, "outputs", list, where), where),
                motif=Motif.parse(motif) if motif is not None else None,
                significant=bool(raw.get("significant", False)),
                internal_deps=deps,
                child=workflow_from_dict(child, f"{where}/{aid}") if child is not None else None,
            )
        )
    links = []
    for raw in _require(obj, "links", list, where):
        if not isinstance(raw, dict):
            raise WorkflowSyntaxError(f"{where}: links must be objects")
        src = _require(raw, "source", str, where)
        dst = _require(raw, "sink", str, where)
        split_ref(src)
        split_ref(dst)
        links.append(DataLink(src, dst, bool(raw.get("indirect", False)), tuple(raw.get("bypass", ()))))
    return Workflow(
        id=wid,
        inputs=_port_ids(_require(obj, "inputs", list, where), where),
        outputs=_port_ids(_require(obj, "outputs", list, where), where),
        activities=tuple(activities),
        links=tuple(links),
    )


def workflow_to_dict(w: Workflow) -> dict:
    acts = []
    for a in w.activities:
        item: dict[str, Any] = {
            "id": a.id,
            "kind": a.kind,
            "inputs": [{"id": p} for p in a.inputs],
            "outputs": [{"id": p} for p in a.outputs],
        }
        if a.motif is not None:
            item["motif"] = str(a.motif)
        if a.significant:
            item["significant"] = True
        if a.internal_deps is not None:
            item["internal_deps"] = [list(d) for d in sorted(a.internal_deps)]
        if a.child is not None:
            item["child"] = workflow_to_dict(a.child)
        acts.append(item)
    links = []
    for link in w.links:
        item = {"source": link.source, "sink": link.sink}
        if link.indirect:
            item["indirect"] = True
        if link.bypass:
            item["bypass"] = list(link.bypass)
        links.append(item)
    return {
        "id": w.id,
        "inputs": [{"id": p} for p in w.inputs],
        "outputs": [{"id": p} for p in w.outputs],
        "activities": acts,
        "links": links,
    }


def parse_workflow(document: bytes | str) -> Workflow:
    """Parse a workflow JSON document and enforce the workflow invariants."""
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WorkflowSyntaxError(f"document is not UTF-8: {exc}") from None
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise WorkflowSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    w = workflow_from_dict(obj)
    violations = validate_workflow(w)
    for kind, error in (("duplicate-id", DuplicateIdError), ("reference", DanglingReferenceError)):
        hits = [v for v in violations if v.kind == kind]
        if hits:
            raise error("; ".join(str(v) for v in hits))
    if violations:
        raise InvalidWorkflowError(violations)
    return w


def serialize_workflow(w: Workflow) -> str:
    return json.dumps(workflow_to_dict(w), indent=2) + "\n"

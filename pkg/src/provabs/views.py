"""Abstract views: groupings of flat activities plus direct and indirect links.

Every exposed port of a view *is* the flat port it came from, so the
provenance mapping back to the original workflow is the identity on port
references and ``members`` on nodes.
"""

from __future__ import annotations

import json
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from provabs import graph
from provabs.errors import MappingError, UnknownPortError
from provabs.flatten import FlatWorkflow
from provabs.model import DataLink, port_ref, split_ref, wf_ref


@dataclass(frozen=True)
class AbstractNode:
    id: str
    members: tuple[str, ...]
    defining_significant: str | None = None
    exposed_inputs: tuple[str, ...] = ()
    exposed_outputs: tuple[str, ...] = ()
    # "activity" for retained atomic activities, "composite" for groups; None is untyped
    kind: str | None = "composite"
    # conduction relation between exposed ports; None means every input feeds every output
    conducts: frozenset[tuple[str, str]] | None = None

    @property
    def ports(self) -> tuple[str, ...]:
        return self.exposed_inputs + self.exposed_outputs

    def conduction_pairs(self) -> list[tuple[str, str]]:
        if self.conducts is None:
            return [(i, o) for i in self.exposed_inputs for o in self.exposed_outputs]
        return sorted(self.conducts)


@dataclass(frozen=True)
class AbstractView:
    workflow_id: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    nodes: tuple[AbstractNode, ...]
    links: tuple[DataLink, ...]
    eliminated: tuple[str, ...] = ()
    significant: tuple[str, ...] = ()
    method: str = "identity"

    @cached_property
    def node_map(self) -> dict[str, AbstractNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def node_of(self) -> dict[str, str]:
        """Member activity id -> node id."""
        return {m: n.id for n in self.nodes for m in n.members}

    @cached_property
    def port_owner(self) -> dict[str, str]:
        """Exposed port -> node id."""
        return {p: n.id for n in self.nodes for p in n.ports}

    @cached_property
    def port_refs(self) -> frozenset[str]:
        refs = {wf_ref(p) for p in (*self.inputs, *self.outputs)}
        for n in self.nodes:
            refs.update(n.ports)
        return frozenset(refs)

    @cached_property
    def dependency_graph(self) -> dict[str, tuple[str, ...]]:
        edges = [(link.source, link.sink) for link in self.links]
        for n in self.nodes:
            edges.extend(n.conduction_pairs())
        return graph.build_adjacency(sorted(self.port_refs), edges)

    @cached_property
    def _reach_cache(self) -> dict[str, set[str]]:
        return {}

    def reachable_from(self, ref: str) -> set[str]:
        cache = self._reach_cache
        if ref not in cache:
            if ref not in self.port_refs:
                raise UnknownPortError(f"unknown port {ref!r} in view of {self.workflow_id!r}")
            cache[ref] = graph.reachable(self.dependency_graph, [ref])
        return cache[ref]

    @cached_property
    def quotient_graph(self) -> dict[str, tuple[str, ...]]:
        """Nodes with an edge per link between two distinct nodes."""
        owner = self.port_owner
        edges = set()
        for link in self.links:
            a, b = owner.get(link.source), owner.get(link.sink)
            if a is not None and b is not None and a != b:
                edges.add((a, b))
        return graph.build_adjacency(sorted(self.node_map), edges)

    @property
    def indirect_links(self) -> tuple[DataLink, ...]:
        return tuple(link for link in self.links if link.indirect)


def view_reach(v: AbstractView, source: str, target: str) -> bool:
    if target not in v.port_refs:
        raise UnknownPortError(f"unknown port {target!r} in view of {v.workflow_id!r}")
    return target in v.reachable_from(source)


# ---------------------------------------------------------------------------
# construction


def _bypass_links(f: FlatWorkflow, eliminated: frozenset[str]) -> list[DataLink]:
    """Indirect links around eliminated activities.

    A breadth-first search from each retained producer through the eliminated
    region, following links and the eliminated activities' internal
    dependencies; the first (shortest) bypass sequence found per
    (source, sink) pair is recorded.
    """
    w = f.workflow
    found: dict[tuple[str, str], tuple[str, ...]] = {}
    for src in sorted(w.outgoing):
        owner, _ = split_ref(src)
        if owner in eliminated:
            continue
        queue: deque[tuple[str, tuple[str, ...]]] = deque()
        seen: set[str] = set()
        for link in w.outgoing[src]:
            queue.append((link.sink, ()))
        while queue:
            sink, trail = queue.popleft()
            act, port = split_ref(sink)
            if act not in eliminated:
                if trail:
                    found.setdefault((src, sink), trail)
                continue
            if sink in seen:
                continue
            seen.add(sink)
            a = w.activity(act)
            for out in a.outputs:
                if not a.depends(port, out):
                    continue
                for link in w.outgoing.get(port_ref(act, out), ()):
                    queue.append((link.sink, trail + (act,)))
    return [DataLink(s, t, True, b) for (s, t), b in sorted(found.items())]


def build_view(
    f: FlatWorkflow,
    groups: Iterable[Iterable[str]],
    eliminated: Iterable[str] = (),
    *,
    method: str = "custom",
    significant: Iterable[str] | None = None,
    kinds: dict[str, str | None] | None = None,
) -> AbstractView:
    """Assemble a view from a partition of the retained activities.

    ``groups`` must partition every activity not listed in ``eliminated``.
    ``kinds`` optionally overrides node kinds by node id (used to build
    deliberately ill-typed views).
    """
    w = f.workflow
    eliminated = frozenset(eliminated)
    groups = [tuple(sorted(g)) for g in groups]
    node_of: dict[str, int] = {}
    for idx, members in enumerate(groups):
        for m in members:
            if m not in w.activity_map:
                raise MappingError(f"view member {m!r} is not an activity of {w.id!r}")
            if m in node_of or m in eliminated:
                raise MappingError(f"activity {m!r} assigned twice")
            node_of[m] = idx
    missing = set(w.activity_map) - set(node_of) - eliminated
    if missing:
        raise MappingError(f"activities neither grouped nor eliminated: {sorted(missing)}")
    sig = frozenset(significant) if significant is not None else frozenset(w.significant_ids())

    def group_index(ref: str) -> int | None:
        act, _ = split_ref(ref)
        return None if act is None else node_of.get(act)

    links: list[DataLink] = []
    for link in w.links:
        a_src, _ = split_ref(link.source)
        a_dst, _ = split_ref(link.sink)
        if a_src in eliminated or a_dst in eliminated:
            continue
        gs, gt = group_index(link.source), group_index(link.sink)
        if gs is not None and gs == gt:
            continue
        links.append(link)
    links.extend(_bypass_links(f, eliminated))
    links.sort(key=lambda l: (l.source, l.sink, l.bypass))

    exposed_in: dict[int, set[str]] = {i: set() for i in range(len(groups))}
    exposed_out: dict[int, set[str]] = {i: set() for i in range(len(groups))}
    for link in links:
        gs, gt = group_index(link.source), group_index(link.sink)
        if gs is not None:
            exposed_out[gs].add(link.source)
        if gt is not None:
            exposed_in[gt].add(link.sink)

    nodes = []
    for idx, members in enumerate(groups):
        sig_members = [m for m in members if m in sig]
        defining = sig_members[0] if len(sig_members) == 1 else None
        node_id = defining if defining is not None else members[0]
        ins, outs = tuple(sorted(exposed_in[idx])), tuple(sorted(exposed_out[idx]))
        if len(members) == 1:
            a = w.activity(members[0])
            conducts = frozenset(
                (port_ref(a.id, i), port_ref(a.id, o))
                for i, o in a.dependency_pairs()
                if port_ref(a.id, i) in ins and port_ref(a.id, o) in outs
            )
            kind = "activity"
        else:
            conducts, kind = None, "composite"
        if kinds and node_id in kinds:
            kind = kinds[node_id]
        nodes.append(AbstractNode(node_id, members, defining, ins, outs, kind, conducts))
    nodes.sort(key=lambda n: n.id)
    return AbstractView(
        workflow_id=w.id,
        inputs=w.inputs,
        outputs=w.outputs,
        nodes=tuple(nodes),
        links=tuple(links),
        eliminated=tuple(sorted(eliminated)),
        significant=tuple(sorted(sig)),
        method=method,
    )


def identity_view(f: FlatWorkflow) -> AbstractView:
    return build_view(f, [[a.id] for a in f.workflow.activities], method="identity")


def top_layer_view(f: FlatWorkflow) -> AbstractView:
    """The design abstraction itself: one node per top-level activity."""
    return build_view(
        f, [g.members for g in f.ground_truth.groups if g.members], method="subworkflow"
    )


def check_derived(f: FlatWorkflow, v: AbstractView) -> None:
    """Raise MappingError unless every member and port of ``v`` exists in ``f``."""
    w = f.workflow
    if v.workflow_id != w.id:
        raise MappingError(f"view of {v.workflow_id!r} checked against {w.id!r}")
    members = [m for n in v.nodes for m in n.members] + list(v.eliminated)
    unknown = sorted(set(members) - set(w.activity_map))
    if unknown:
        raise MappingError(f"view members missing from {w.id!r}: {unknown}")
    if len(members) != len(set(members)):
        raise MappingError("view members are not disjoint")
    for n in v.nodes:
        for p in n.ports:
            act, _ = split_ref(p)
            if p not in w.port_refs or act not in n.members:
                raise MappingError(f"exposed port {p!r} of node {n.id!r} is not a member port")
    for link in v.links:
        if not link.indirect and w.incoming.get(link.sink) != DataLink(link.source, link.sink):
            raise MappingError(f"direct link {link.source}->{link.sink} has no original link")


# ---------------------------------------------------------------------------
# serialization


def view_to_dict(v: AbstractView) -> dict[str, Any]:
    nodes = []
    for n in v.nodes:
        item: dict[str, Any] = {
            "id": n.id,
            "kind": n.kind,
            "members": list(n.members),
            "defining_significant": n.defining_significant,
            "exposed_inputs": list(n.exposed_inputs),
            "exposed_outputs": list(n.exposed_outputs),
        }
        if n.conducts is not None:
            item["conducts"] = [list(p) for p in sorted(n.conducts)]
        nodes.append(item)
    links = []
    for link in v.links:
        item = {"source": link.source, "sink": link.sink, "indirect": link.indirect}
        if link.indirect:
            item["bypass"] = list(link.bypass)
        links.append(item)
    return {
        "workflow": v.workflow_id,
        "method": v.method,
        "inputs": list(v.inputs),
        "outputs": list(v.outputs),
        "significant": list(v.significant),
        "eliminated": list(v.eliminated),
        "nodes": nodes,
        "links": links,
    }


def view_from_dict(obj: dict[str, Any]) -> AbstractView:
    nodes = tuple(
        AbstractNode(
            id=n["id"],
            members=tuple(n["members"]),
            defining_significant=n.get("defining_significant"),
            exposed_inputs=tuple(n.get("exposed_inputs", ())),
            exposed_outputs=tuple(n.get("exposed_outputs", ())),
            kind=n.get("kind"),
            conducts=(
                frozenset(tuple(p) for p in n["conducts"]) if "conducts" in n else None
            ),
        )
        for n in obj["nodes"]
    )
    links = tuple(
        DataLink(l["source"], l["sink"], bool(l.get("indirect")), tuple(l.get("bypass", ())))
        for l in obj["links"]
    )
    return AbstractView(
        workflow_id=obj["workflow"],
        inputs=tuple(obj["inputs"]),
        outputs=tuple(obj["outputs"]),
        nodes=nodes,
        links=links,
        eliminated=tuple(obj.get("eliminated", ())),
        significant=tuple(obj.get("significant", ())),
        method=obj.get("method", "custom"),
    )


def serialize_view(v: AbstractView) -> str:
    return json.dumps(view_to_dict(v), indent=2, sort_keys=True) + "\n"

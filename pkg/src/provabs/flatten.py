"""Un-nesting of sub-workflows with boundary-port promotion tracking.

The result also records the design abstraction visible at the top layer,
which serves as the ground truth for precision measurements.
"""

from __future__ import annotations

import dataclasses
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

from provabs.errors import FlattenError, InvalidWorkflowError
from provabs.model import (
    Activity,
    DataLink,
    Workflow,
    port_ref,
    split_ref,
    validate_workflow,
    wf_ref,
)


@dataclass(frozen=True)
class Group:
    id: str
    members: tuple[str, ...]
    defining_significant: str | None = None


@dataclass(frozen=True)
class TopLayerView:
    groups: tuple[Group, ...]
    visible_ports: frozenset[str]

    def group_of(self, activity_id: str) -> Group:
        for g in self.groups:
            if activity_id in g.members:
                return g
        raise KeyError(activity_id)


@dataclass(frozen=True)
class FlatWorkflow:
    workflow: Workflow
    promotion_map: Mapping[str, tuple[str, ...]]
    ground_truth: TopLayerView

    @property
    def id(self) -> str:
        return self.workflow.id


class _Scope:
    """One nesting level: a workflow plus the sub-workflow activity that holds it."""

    def __init__(self, workflow: Workflow, parent: _Scope | None, holder: str | None):
        self.workflow = workflow
        self.parent = parent
        self.holder = holder
        self.children: dict[str, _Scope] = {}
        if parent is None:
            self.path: tuple[str, ...] = ()
        else:
            self.path = parent.path + (holder,)

    def qualified(self, activity_id: str) -> str:
        return "/".join(self.path + (activity_id,))


def _collect(scope: _Scope, leaves: list, ancestors: tuple[str, ...]) -> None:
    for a in scope.workflow.activities:
        if a.kind == "subworkflow":
            child = a.child
            if child.id in ancestors:
                raise FlattenError(f"recursive nesting: {' -> '.join(ancestors + (child.id,))}")
            sub = _Scope(child, scope, a.id)
            scope.children[a.id] = sub
            _collect(sub, leaves, ancestors + (child.id,))
        else:
            leaves.append((scope, a))


def flatten(w: Workflow) -> FlatWorkflow:
    """Replace every sub-workflow activity by its (recursively flattened) children."""
    violations = validate_workflow(w)
    if violations:
        raise InvalidWorkflowError(violations)
    if w.is_flat:
        groups = tuple(
            Group(a.id, (a.id,), a.id if a.significant else None) for a in w.activities
        )
        visible = frozenset(
            port_ref(a.id, p) for a in w.activities for p in (*a.inputs, *a.outputs)
        )
        return FlatWorkflow(w, {}, TopLayerView(groups, visible))

    root = _Scope(w, None, None)
    leaves: list[tuple[_Scope, Activity]] = []
    _collect(root, leaves, (w.id,))

    bare = Counter(a.id for _, a in leaves)
    flat_id: dict[tuple[tuple[str, ...], str], str] = {}
    for scope, a in leaves:
        flat_id[(scope.path, a.id)] = a.id if bare[a.id] == 1 else scope.qualified(a.id)

    def source_of(scope: _Scope, ref: str) -> str | None:
        owner, port = split_ref(ref)
        if owner is None:
            if scope.parent is None:
                return ref
            link = scope.parent.workflow.incoming.get(port_ref(scope.holder, port))
            return None if link is None else source_of(scope.parent, link.source)
        if owner in scope.children:
            child = scope.children[owner]
            link = child.workflow.incoming.get(wf_ref(port))
            return None if link is None else source_of(child, link.source)
        return port_ref(flat_id[(scope.path, owner)], port)

    def sinks_of(scope: _Scope, ref: str) -> list[str]:
        owner, port = split_ref(ref)
        if owner is None:
            if scope.parent is None:
                return [ref]
            out = []
            for link in scope.parent.workflow.outgoing.get(port_ref(scope.holder, port), ()):
                out.extend(sinks_of(scope.parent, link.sink))
            return out
        if owner in scope.children:
            child = scope.children[owner]
            out = []
            for link in child.workflow.outgoing.get(wf_ref(port), ()):
                out.extend(sinks_of(child, link.sink))
            return out
        return [port_ref(flat_id[(scope.path, owner)], port)]

    activities = []
    for scope, a in leaves:
        activities.append(dataclasses.replace(a, id=flat_id[(scope.path, a.id)]))

    links = []

    def emit(scope: _Scope) -> None:
        for link in scope.workflow.links:
            owner, _ = split_ref(link.sink)
            terminal = (owner is None and scope.parent is None) or (
                owner is not None and owner not in scope.children
            )
            if terminal:
                src = source_of(scope, link.source)
                if src is not None:
                    links.append(DataLink(src, sinks_of(scope, link.sink)[0]))
        for a in scope.workflow.activities:
            if a.id in scope.children:
                emit(scope.children[a.id])

    emit(root)

    promotion: dict[str, tuple[str, ...]] = {}

    def promote(scope: _Scope) -> None:
        for a in scope.workflow.activities:
            if a.id not in scope.children:
                continue
            child = scope.children[a.id]
            key = "/".join(child.path)
            for p in a.inputs:
                images = []
                for link in child.workflow.outgoing.get(wf_ref(p), ()):
                    images.extend(sinks_of(child, link.sink))
                promotion[f"{key}.{p}"] = tuple(sorted(images))
            for p in a.outputs:
                link = child.workflow.incoming.get(wf_ref(p))
                src = None if link is None else source_of(child, link.source)
                if src is None:
                    raise FlattenError(f"dangling boundary port {key}.{p}: nothing produces it")
                promotion[f"{key}.{p}"] = (src,)
            promote(child)

    promote(root)

    by_top: dict[str, list[str]] = {}
    for scope, a in leaves:
        top = scope.path[0] if scope.path else a.id
        by_top.setdefault(top, []).append(flat_id[(scope.path, a.id)])
    significant = {a.id for a in activities if a.significant}
    groups = []
    visible: set[str] = set()
    for a in w.activities:
        members = tuple(by_top.get(a.id, ()))
        sig = [m for m in members if m in significant]
        groups.append(Group(a.id, members, sig[0] if len(sig) == 1 else None))
        if a.kind == "subworkflow":
            for p in (*a.inputs, *a.outputs):
                visible.update(promotion[f"{a.id}.{p}"])
        else:
            visible.update(port_ref(a.id, p) for p in (*a.inputs, *a.outputs))
    visible = {p for p in visible if not p.startswith("wf:")}

    flat = Workflow(w.id, w.inputs, w.outputs, tuple(activities), tuple(links))
    return FlatWorkflow(flat, promotion, TopLayerView(tuple(groups), frozenset(visible)))

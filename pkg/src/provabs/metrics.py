"""Activity and port precision of abstractions against the design abstraction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from provabs import graph
from provabs.errors import ProvAbsError
from provabs.flatten import FlatWorkflow, TopLayerView
from provabs.views import AbstractNode, AbstractView, identity_view


class UnreachableError(ProvAbsError):
    pass


def resolve_port(name: str) -> str:
    """Bare names denote workflow ports; ``act.port`` and ``wf:x`` pass through."""
    if name.startswith("wf:") or "." in name:
        return name
    return f"wf:{name}"


@dataclass(frozen=True)
class DerivationPath:
    nodes: tuple[str, ...]
    ports: frozenset[str]
    links: tuple


def derivation_path(g: FlatWorkflow | AbstractView, src: str, dst: str) -> DerivationPath:
    """Union of every directed path from ``src`` to ``dst``."""
    v = identity_view(g) if isinstance(g, FlatWorkflow) else g
    src, dst = resolve_port(src), resolve_port(dst)
    forward = v.reachable_from(src)
    if dst not in forward:
        raise UnreachableError(f"{dst!r} is not reachable from {src!r}")
    backward = graph.reachable(graph.reverse(v.dependency_graph), [dst])
    on_path = forward & backward
    dist = graph.distances(v.dependency_graph, src)
    nodes = []
    for n in v.nodes:
        pairs = [(i, o) for i, o in n.conduction_pairs() if i in on_path and o in on_path]
        if pairs:
            nodes.append((min(dist[i] for i, _ in pairs), n.id))
    links = tuple(l for l in v.links if l.source in on_path and l.sink in on_path)
    return DerivationPath(tuple(n for _, n in sorted(nodes)), frozenset(on_path), links)


def match_correspondents(path_nodes: Sequence[AbstractNode], gt: TopLayerView) -> list[tuple[str, str]]:
    """Greedy one-to-one matching of nodes to design groups via defining significant activities."""
    matched: set[str] = set()
    pairs = []
    for n in path_nodes:
        members = set(n.members)
        for grp in gt.groups:
            if grp.id in matched or grp.defining_significant is None:
                continue
            if grp.defining_significant in members:
                matched.add(grp.id)
                pairs.append((n.id, grp.id))
                break
    return pairs


def path_artifacts(path: DerivationPath) -> list[tuple[str, str]]:
    """Data artefacts carried along the path, as ("out"|"in", port) items.

    A direct link is one artefact, identified by its producing port; the two
    ends of an indirect link are distinct artefacts.  Artefacts at workflow
    level ports are not counted.
    """
    items: set[tuple[str, str]] = set()
    for link in path.links:
        src_wf, dst_wf = link.source.startswith("wf:"), link.sink.startswith("wf:")
        if link.indirect:
            if not src_wf:
                items.add(("out", link.source))
            if not dst_wf:
                items.add(("in", link.sink))
        elif not src_wf and not dst_wf:
            items.add(("out", link.source))
    return sorted(items, key=lambda it: (it[1], it[0]))


def activity_precision(f: FlatWorkflow, v: AbstractView, src: str, dst: str) -> tuple[int, int]:
    path = derivation_path(v, src, dst)
    nodes = [v.node_map[n] for n in path.nodes]
    return len(match_correspondents(nodes, f.ground_truth)), len(nodes)


def port_precision(f: FlatWorkflow, v: AbstractView, src: str, dst: str) -> tuple[int, int]:
    items = path_artifacts(derivation_path(v, src, dst))
    visible = f.ground_truth.visible_ports
    return sum(1 for _, p in items if p in visible), len(items)


@dataclass
class PrecisionReport:
    policy_name: str
    activity_A: int
    activity_B: int
    port_A: int
    port_B: int
    matched_pairs: list[tuple[str, str]] = field(default_factory=list)
    path: DerivationPath | None = None
    ports: list[str] = field(default_factory=list)

    @property
    def activity(self) -> str:
        return f"{self.activity_A}/{self.activity_B}"

    @property
    def activity_ports(self) -> str:
        return f"{self.port_A}/{self.port_B}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "policy": self.policy_name,
            "activity": [self.activity_A, self.activity_B],
            "activity_ports": [self.port_A, self.port_B],
            "matched_pairs": [list(p) for p in self.matched_pairs],
            "path_nodes": list(self.path.nodes) if self.path else [],
            "ports": self.ports,
        }


def precision_of(f: FlatWorkflow, v: AbstractView, src: str, dst: str, name: str) -> PrecisionReport:
    path = derivation_path(v, src, dst)
    nodes = [v.node_map[n] for n in path.nodes]
    pairs = match_correspondents(nodes, f.ground_truth)
    items = path_artifacts(path)
    visible = f.ground_truth.visible_ports
    return PrecisionReport(
        policy_name=name,
        activity_A=len(pairs),
        activity_B=len(nodes),
        port_A=sum(1 for _, p in items if p in visible),
        port_B=len(items),
        matched_pairs=pairs,
        path=path,
        ports=[p for _, p in items],
    )


def precision_report(f: FlatWorkflow, policies: Sequence, src: str, dst: str) -> list[PrecisionReport]:
    from provabs.abstraction import apply_policy

    return [precision_of(f, apply_policy(f, p), src, dst, p.name) for p in policies]


def render_table(reports: Sequence[PrecisionReport]) -> str:
    rows = [("PolicyName", "Activity", "ActivityPorts")]
    rows += [(r.policy_name, r.activity, r.activity_ports) for r in reports]
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = [" | ".join(c.ljust(widths[i]) for i, c in enumerate(r)).rstrip() for r in rows]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def reports_to_json(reports: Sequence[PrecisionReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"

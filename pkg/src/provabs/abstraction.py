"""Abstraction policies and the three abstraction methods.

* ``zoom_view``: composites holding at most one significant activity, grown
  greedily under the significant-item soundness constraint.
* ``collapse``: motif-driven merging of adapters into a neighbouring node.
* ``eliminate``: motif-driven removal of adapters, bridged by indirect links.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Union

from provabs import graph
from provabs.errors import PolicyError
from provabs.flatten import FlatWorkflow
from provabs.integrity import is_significant_sound
from provabs.model import ADAPTER_MOTIFS, Motif, split_ref
from provabs.views import AbstractView, build_view


class Action(str, enum.Enum):
    COLLAPSE_UPSTREAM = "collapse_upstream"
    COLLAPSE_DOWNSTREAM = "collapse_downstream"
    ELIMINATE = "eliminate"
    KEEP = "keep"


COLLAPSE_ACTIONS = (Action.COLLAPSE_UPSTREAM, Action.COLLAPSE_DOWNSTREAM)


@dataclass(frozen=True)
class ZoomPolicy:
    significant: frozenset[str] | None = None
    name: str = "ZOOM"


@dataclass(frozen=True)
class MotifActionPolicy:
    pairs: tuple[tuple[Motif, Action], ...]
    name: str = "motif-actions"

    @classmethod
    def from_mapping(cls, pairs: Mapping[str | Motif, Action | str], name: str = "motif-actions"):
        items = []
        for motif, action in pairs.items():
            m = motif if isinstance(motif, Motif) else Motif.parse(motif)
            items.append((m, Action(action)))
        return cls(tuple(sorted(items)), name)

    def action_for(self, motif: Motif | None) -> Action:
        if motif is None:
            return Action.KEEP
        for m, action in self.pairs:
            if m == motif:
                return action
        return Action.KEEP

    @property
    def actions(self) -> set[Action]:
        return {a for _, a in self.pairs if a is not Action.KEEP}


AbstractionPolicy = Union[ZoomPolicy, MotifActionPolicy]


# ---------------------------------------------------------------------------
# policy files


def policy_from_dict(obj: dict, default_name: str = "policy") -> AbstractionPolicy:
    if not isinstance(obj, dict):
        raise PolicyError("policy document must be a JSON object")
    variant = obj.get("variant")
    name = obj.get("name", default_name)
    if variant == "zoom":
        sig = obj.get("significant")
        return ZoomPolicy(frozenset(sig) if sig is not None else None, name)
    if variant == "motif_actions":
        pairs = obj.get("pairs")
        if not isinstance(pairs, dict):
            raise PolicyError("motif_actions policy needs a 'pairs' object")
        try:
            return MotifActionPolicy.from_mapping(pairs, name)
        except ValueError as exc:
            raise PolicyError(f"bad action in policy {name!r}: {exc}") from None
    raise PolicyError(f"unknown policy variant {variant!r}")


def policy_to_dict(p: AbstractionPolicy) -> dict:
    if isinstance(p, ZoomPolicy):
        out: dict = {"variant": "zoom", "name": p.name}
        if p.significant is not None:
            out["significant"] = sorted(p.significant)
        return out
    return {
        "variant": "motif_actions",
        "name": p.name,
        "pairs": {str(m): a.value for m, a in p.pairs},
    }


def load_policy(path: str | Path) -> AbstractionPolicy:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PolicyError(f"{path}: {exc}") from None
    return policy_from_dict(obj, path.stem)


# ---------------------------------------------------------------------------
# shared helpers


def _check_targets(f: FlatWorkflow, p: MotifActionPolicy) -> None:
    for a in f.workflow.activities:
        if a.significant and p.action_for(a.motif) is not Action.KEEP:
            raise PolicyError(
                f"policy {p.name!r} targets motif {a.motif} of significant activity {a.id!r}"
            )


def _targets(f: FlatWorkflow, p: MotifActionPolicy, actions) -> list[str]:
    return [
        aid
        for aid in f.workflow.topological_activities
        if p.action_for(f.workflow.activity(aid).motif) in actions
    ]


class _Partition:
    """Mutable assignment of activities to groups used while building a view."""

    def __init__(self, activities, significant):
        self.group = {a: a for a in activities}
        self.members = {a: {a} for a in activities}
        self.significant = significant

    def node_id(self, g: str) -> str:
        sig = sorted(m for m in self.members[g] if m in self.significant)
        return sig[0] if len(sig) == 1 else min(self.members[g])

    def sig_count(self, g: str) -> int:
        return sum(1 for m in self.members[g] if m in self.significant)

    def merged(self, a: str, b: str) -> dict[str, str]:
        """Group assignment after merging group ``a`` into group ``b`` (not applied)."""
        out = dict(self.group)
        for m in self.members[a]:
            out[m] = b
        return out

    def merge(self, a: str, b: str) -> None:
        for m in self.members[a]:
            self.group[m] = b
        self.members[b] |= self.members.pop(a)

    def groups(self) -> list[list[str]]:
        return [sorted(ms) for _, ms in sorted(self.members.items())]


def _neighbour_groups(edges, part: _Partition, activity: str, upstream: bool, allowed=None):
    """Neighbouring groups of ``activity`` ordered by connecting links, then node id."""
    counts: dict[str, int] = {}
    own = part.group[activity]
    for x, y in edges:
        other = x if upstream else y
        if (y if upstream else x) != activity:
            continue
        g = part.group[other]
        if g == own or (allowed is not None and not allowed(g)):
            continue
        counts[g] = counts.get(g, 0) + 1
    return sorted(counts, key=lambda g: (-counts[g], part.node_id(g)))


def _activity_edges(view: AbstractView) -> list[tuple[str, str]]:
    edges = []
    for link in view.links:
        a, _ = split_ref(link.source)
        b, _ = split_ref(link.sink)
        if a is not None and b is not None:
            edges.append((a, b))
    return edges


def _acyclic(edges, assignment: Mapping[str, str]) -> bool:
    quotient = graph.build_adjacency(
        set(assignment.values()),
        {(assignment[a], assignment[b]) for a, b in edges if assignment[a] != assignment[b]},
    )
    return graph.topological_order(quotient) is not None


# ---------------------------------------------------------------------------
# methods


def eliminate(f: FlatWorkflow, p: MotifActionPolicy) -> AbstractView:
    """Remove every activity whose motif maps to ELIMINATE, bridging with indirect links."""
    if p.actions - {Action.ELIMINATE}:
        raise PolicyError(f"eliminate policy {p.name!r} may only use eliminate/keep actions")
    _check_targets(f, p)
    gone = set(_targets(f, p, (Action.ELIMINATE,)))
    kept = [[a.id] for a in f.workflow.activities if a.id not in gone]
    return build_view(f, kept, gone, method="eliminate")


def _collapse(f: FlatWorkflow, p: MotifActionPolicy, gone: set[str], method: str) -> AbstractView:
    w = f.workflow
    retained = [a.id for a in w.activities if a.id not in gone]
    base = build_view(f, [[a] for a in retained], gone, method=method)
    edges = _activity_edges(base)
    part = _Partition(retained, set(w.significant_ids()))

    for aid in _targets(f, p, COLLAPSE_ACTIONS):
        first_up = p.action_for(w.activity(aid).motif) is Action.COLLAPSE_UPSTREAM
        own = part.group[aid]
        for upstream in (first_up, not first_up):
            chosen = None
            for g in _neighbour_groups(edges, part, aid, upstream):
                if part.sig_count(g) + part.sig_count(own) > 1:
                    continue
                if not _acyclic(edges, part.merged(own, g)):
                    continue
                chosen = g
                break
            if chosen is not None:
                part.merge(own, chosen)
                break
    return build_view(f, part.groups(), gone, method=method)


def collapse(f: FlatWorkflow, p: MotifActionPolicy) -> AbstractView:
    """Merge each targeted adapter into its upstream or downstream neighbour.

    A merge is impossible when no neighbour exists in that direction, when it
    would create a cycle in the quotient graph, or when it would put two
    significant activities in one node; the other direction is tried next and
    the adapter is kept on its own as a last resort.
    """
    if p.actions - set(COLLAPSE_ACTIONS):
        raise PolicyError(f"collapse policy {p.name!r} may only use collapse/keep actions")
    _check_targets(f, p)
    return _collapse(f, p, set(), "collapse")


def zoom_view(f: FlatWorkflow, p: ZoomPolicy | None = None) -> AbstractView:
    """Composite view with at most one significant activity per composite.

    Each significant activity seeds a composite.  Insignificant activities are
    visited in topological order and merged into the first adjacent composite
    (significant-bearing first, upstream before downstream, most connecting
    links first) whose merge keeps dependencies among significant items sound;
    failing that they join a sound adjacent adapter-only group or start one.
    """
    p = p or ZoomPolicy()
    w = f.workflow
    sig = set(p.significant) if p.significant is not None else set(w.significant_ids())
    unknown = sig - set(w.activity_map)
    if unknown:
        raise PolicyError(f"significant activities not in workflow: {sorted(unknown)}")
    if not sig:
        raise PolicyError("ZOOM needs a non-empty set of significant activities")

    part = _Partition([a.id for a in w.activities], sig)
    edges = _activity_edges(build_view(f, [[a.id] for a in w.activities]))
    visited: set[str] = set()

    def sound_after(own: str, target: str) -> bool:
        assignment = part.merged(own, target)
        groups: dict[str, list[str]] = {}
        for m, g in assignment.items():
            groups.setdefault(g, []).append(m)
        view = build_view(f, groups.values(), significant=sig, method="zoom")
        return is_significant_sound(f, view)

    for aid in w.topological_activities:
        if aid in sig:
            continue
        own = part.group[aid]
        composite = lambda g: part.sig_count(g) == 1
        formed = lambda g: part.sig_count(g) == 0 and g in visited
        candidates = (
            _neighbour_groups(edges, part, aid, True, composite)
            + _neighbour_groups(edges, part, aid, False, composite)
            + _neighbour_groups(edges, part, aid, True, formed)
            + _neighbour_groups(edges, part, aid, False, formed)
        )
        for g in candidates:
            if sound_after(own, g):
                part.merge(own, g)
                break
        else:
            visited.add(own)
    return build_view(f, part.groups(), significant=sig, method="zoom")


def apply_policy(f: FlatWorkflow, p: AbstractionPolicy) -> AbstractView:
    """Dispatch on the policy; mixed motif policies eliminate first, then collapse."""
    if isinstance(p, ZoomPolicy):
        return zoom_view(f, p)
    actions = p.actions
    if not actions & set(COLLAPSE_ACTIONS):
        return eliminate(f, p)
    if Action.ELIMINATE not in actions:
        return collapse(f, p)
    _check_targets(f, p)
    gone = set(_targets(f, p, (Action.ELIMINATE,)))
    return _collapse(f, p, gone, "mixed")


def adapter_policy(action: Action | str, name: str) -> MotifActionPolicy:
    """Policy mapping every adapter motif to one action."""
    return MotifActionPolicy.from_mapping({m: action for m in ADAPTER_MOTIFS}, name)

"""Brute-force reference implementations built on networkx path enumeration.

Nothing here reuses the package's graph code: port graphs are rebuilt from
the raw links and activity definitions, and reachability is decided by
enumerating simple paths.
"""

from __future__ import annotations

import itertools

import networkx as nx


def _deps(activity) -> list[tuple[str, str]]:
    if activity.internal_deps is not None:
        return sorted(activity.internal_deps)
    return list(itertools.product(activity.inputs, activity.outputs))


def workflow_graph(w) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(f"wf:{p}" for p in (*w.inputs, *w.outputs))
    for a in w.activities:
        g.add_nodes_from(f"{a.id}.{p}" for p in (*a.inputs, *a.outputs))
        g.add_edges_from((f"{a.id}.{i}", f"{a.id}.{o}") for i, o in _deps(a))
    g.add_edges_from((l.source, l.sink) for l in w.links)
    return g


def view_graph(f, v) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(f"wf:{p}" for p in (*v.inputs, *v.outputs))
    acts = f.workflow.activity_map
    for n in v.nodes:
        g.add_nodes_from(n.exposed_inputs + n.exposed_outputs)
        if len(n.members) == 1 and n.kind == "activity":
            a = acts[n.members[0]]
            pairs = [(f"{a.id}.{i}", f"{a.id}.{o}") for i, o in _deps(a)]
            g.add_edges_from(
                (i, o) for i, o in pairs if i in n.exposed_inputs and o in n.exposed_outputs
            )
        else:
            g.add_edges_from(itertools.product(n.exposed_inputs, n.exposed_outputs))
    g.add_edges_from((l.source, l.sink) for l in v.links)
    return g


def has_path(g: nx.DiGraph, s: str, t: str) -> bool:
    if s == t:
        return True
    if s not in g or t not in g:
        return False
    return next(iter(nx.all_simple_paths(g, s, t)), None) is not None


def oracle_reach(w, s: str, t: str) -> bool:
    return has_path(workflow_graph(w), s, t)


def oracle_completeness(f, v) -> set[tuple[str, str]]:
    """Lost (d1, d2) carrier pairs.

    From an exposed activity output only links leaving its node are followed,
    since a link inside a node carries an artefact the view does not contain.
    """
    wg, vg = workflow_graph(f.workflow), view_graph(f, v)
    node_of = {m: n.id for n in v.nodes for m in n.members}
    exposed_out = {p: n.id for n in v.nodes for p in n.exposed_outputs}

    def starts(d1: str) -> list[str]:
        if d1 not in exposed_out:
            return [d1]
        return [
            sink
            for _, sink in wg.out_edges(d1)
            if sink.startswith("wf:") or node_of.get(sink.split(".")[0]) != exposed_out[d1]
        ]

    lost = set()
    for d1, d2 in itertools.permutations(vg.nodes, 2):
        if any(has_path(wg, s, d2) for s in starts(d1)) and not has_path(vg, d1, d2):
            lost.add((d1, d2))
    return lost


def trace_images(f, t, v) -> dict[str, set[str]]:
    """View ports each retained artifact stands for (artifacts without an image are omitted).

    An artifact that arrives at the sink of an indirect link stands for that sink.
    """
    feeds = {l.sink: l.source for l in f.workflow.links}
    images: dict[str, set[str]] = {}
    retained = {a.id for a in t.artifacts}
    for a in retained & v.port_refs:
        images.setdefault(a, set()).add(a)
    for link in v.indirect_links:
        if feeds[link.sink] in retained:
            images.setdefault(feeds[link.sink], set()).add(link.sink)
    return images


def trace_graph(t) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(a.id for a in t.artifacts)
    g.add_nodes_from(i.id for i in t.invocations)
    deps = {i.id: i.deps for i in t.invocations}
    role_of_gen = {}
    for ge in t.generated_by:
        role_of_gen.setdefault(ge.invocation, []).append(ge)
    # artifact -> artifact through an invocation, honouring its dependency relation
    for u in t.used:
        for ge in role_of_gen.get(u.invocation, ()):
            d = deps[u.invocation]
            if d is None or (u.role, ge.role) in d:
                g.add_edge(u.artifact, ge.artifact)
    g.add_edges_from((d.source, d.artifact) for d in t.derived)
    return g


def agreement_mismatches(f, v, t) -> list[tuple[str, str, bool, bool]]:
    """(a1, a2, trace reach, view reach) for every disagreeing artifact pair."""
    vg = view_graph(f, v)
    tg = trace_graph(t)
    images = trace_images(f, t, v)
    out = []
    for a1, a2 in itertools.permutations(sorted(images), 2):
        in_trace = has_path(tg, a1, a2)
        in_view = any(has_path(vg, p1, p2) for p1 in images[a1] for p2 in images[a2])
        if in_trace != in_view:
            out.append((a1, a2, in_trace, in_view))
    return out

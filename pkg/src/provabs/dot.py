"""Graphviz DOT rendering of workflows, views and traces."""

from __future__ import annotations

import json

from provabs.model import Workflow, split_ref
from provabs.trace import ExecutionTrace
from provabs.views import AbstractView

_HEADER = ("rankdir=LR;", "node [shape=box, fontname=Helvetica];")


def _q(s: str) -> str:
    return json.dumps(s)


def _endpoint(ref: str) -> tuple[str, str]:
    """DOT node for a port reference, plus the port label to show."""
    act, port = split_ref(ref)
    return (_q(ref), "") if act is None else (_q(act), port)


def _edge(src: str, dst: str, attrs: list[str]) -> str:
    a, pa = _endpoint(src)
    b, pb = _endpoint(dst)
    label = f"{pa}->{pb}" if pa and pb else pa or pb
    if label:
        attrs = [f"label={_q(label)}", *attrs]
    suffix = f" [{', '.join(attrs)}]" if attrs else ""
    return f"  {a} -> {b}{suffix};"


def _io_nodes(inputs, outputs) -> list[str]:
    lines = [f"  {_q('wf:' + p)} [shape=ellipse, label={_q(p)}];" for p in inputs]
    lines += [f"  {_q('wf:' + p)} [shape=doublecircle, label={_q(p)}];" for p in outputs]
    return lines


def _activity_label(aid: str, motif, significant: bool) -> str:
    head = f"* {aid}" if significant else aid
    return head if motif is None else f"{head}\n{motif}"


def _wrap(name: str, body: list[str]) -> str:
    lines = [f"digraph {_q(name)} {{"] if name else ["digraph {"]
    lines += [f"  {h}" for h in _HEADER] if body else []
    return "\n".join(lines + body + ["}"]) + "\n"


def workflow_dot(w: Workflow) -> str:
    body = _io_nodes(w.inputs, w.outputs)
    for a in sorted(w.activities, key=lambda a: a.id):
        attrs = [f"label={_q(_activity_label(a.id, a.motif, a.significant))}"]
        if a.significant:
            attrs.append("peripheries=2")
        if a.child is not None:
            attrs.append("shape=box3d")
        body.append(f"  {_q(a.id)} [{', '.join(attrs)}];")
    for link in sorted(w.links, key=lambda l: (l.source, l.sink)):
        body.append(_edge(link.source, link.sink, []))
    return _wrap(w.id if body else "", body)


def view_dot(v: AbstractView) -> str:
    """Composites (and every ZOOM group) become clusters; adapter-only ones are dashed and grey."""
    sig = set(v.significant)
    body = _io_nodes(v.inputs, v.outputs)
    for n in v.nodes:
        clustered = len(n.members) > 1 or v.method == "zoom"
        inner = []
        for m in n.members:
            attrs = [f"label={_q(('* ' + m) if m in sig else m)}"]
            if m in sig:
                attrs.append("peripheries=2")
            inner.append(f"{_q(m)} [{', '.join(attrs)}];")
        if not clustered:
            body += [f"  {line}" for line in inner]
            continue
        adapter_only = not any(m in sig for m in n.members)
        style = "dashed, filled" if adapter_only else "solid"
        body.append(f"  subgraph {_q('cluster_' + n.id)} {{")
        body.append(f"    label={_q(n.id)};")
        body.append(f"    style={_q(style)};")
        if adapter_only:
            body.append('    fillcolor="lightgrey";')
        body += [f"    {line}" for line in inner]
        body.append("  }")
    for link in v.links:
        attrs = []
        if link.indirect:
            attrs = ["style=dashed", f"xlabel={_q('via ' + ','.join(link.bypass))}"]
        body.append(_edge(link.source, link.sink, attrs))
    return _wrap(v.workflow_id if body else "", body)


def trace_dot(t: ExecutionTrace) -> str:
    body = [f"  {_q(a.id)} [shape=ellipse];" for a in t.artifacts]
    body += [f"  {_q(i.id)} [label={_q(i.activity)}];" for i in t.invocations]
    body += [f"  {_q(u.artifact)} -> {_q(u.invocation)} [label={_q('used')}];" for u in t.used]
    body += [
        f"  {_q(g.invocation)} -> {_q(g.artifact)} [label={_q('generated')}];"
        for g in t.generated_by
    ]
    body += [
        f"  {_q(d.source)} -> {_q(d.artifact)} [style=dashed, label={_q('derived')}];"
        for d in t.derived
    ]
    return _wrap(t.workflow_id if body else "", body)


def export_dot(g: Workflow | AbstractView | ExecutionTrace) -> str:
    if isinstance(g, Workflow):
        return workflow_dot(g)
    if isinstance(g, AbstractView):
        return view_dot(g)
    if isinstance(g, ExecutionTrace):
        return trace_dot(g)
    raise TypeError(f"cannot render {type(g).__name__} as DOT")

import dataclasses
import random

import pytest
from hypothesis import given, settings

from generators import random_collapse_policy, random_eliminate_policy, random_flat, random_zoom_policy, seeds
from oracles import agreement_mismatches
from provabs.abstraction import apply_policy, collapse, eliminate
from provabs.bundled import bundled_policy, load_flat
from provabs.errors import TraceError
from provabs.flatten import flatten
from provabs.integrity import check_bipartiteness
from provabs.model import workflow_from_dict
from provabs.trace import (
    Derived,
    filter_trace,
    generate_trace,
    serialize_trace,
    trace_from_dict,
    trace_reach,
    trace_to_dict,
)
from provabs.views import identity_view


def test_empty_workflow_trace():
    f = flatten(workflow_from_dict({"id": "e", "inputs": [], "outputs": [], "activities": [], "links": []}))
    t = generate_trace(f)
    assert (t.invocations, t.artifacts, t.used, t.generated_by) == ((), (), (), ())


def test_chain_trace():
    t = generate_trace(load_flat("chain"))
    assert [i.activity for i in t.invocations] == ["A1", "S1", "A2"]
    assert [a.id for a in t.artifacts] == ["wf:wi", "A1.out", "S1.out", "A2.out"]
    assert t.outputs == (("wo", "A2.out"),)
    assert trace_reach(t, "wf:wi", "A2.out")


def test_diamond_trace():
    t = generate_trace(load_flat("diamond"))
    assert len(t.invocations) == 4
    assert len([u for u in t.used if u.invocation == "inv:S2"]) == 2


def test_identity_filter_is_noop():
    f = load_flat("diamond")
    t = generate_trace(f)
    ft = filter_trace(t, identity_view(f))
    assert set(ft.invocations) == set(t.invocations)
    assert set(ft.artifacts) == set(t.artifacts)
    assert set(ft.used) == set(t.used)
    assert set(ft.generated_by) == set(t.generated_by)
    assert ft.derived == ()


def test_eliminate_chain_trace():
    f = load_flat("chain")
    t = filter_trace(generate_trace(f), eliminate(f, bundled_policy("eliminate-all")))
    assert [i.activity for i in t.invocations] == ["S1"]
    assert {a.id for a in t.artifacts} == {"wf:wi", "A1.out", "S1.out", "A2.out"}
    assert {(d.artifact, d.source) for d in t.derived} == {("A1.out", "wf:wi"), ("A2.out", "S1.out")}
    assert all(isinstance(d, Derived) and d.bypass for d in t.derived)
    assert trace_reach(t, "wf:wi", "A2.out")


def test_collapse_chain_trace():
    f = load_flat("chain")
    t = filter_trace(generate_trace(f), collapse(f, bundled_policy("collapse-all")))
    assert len(t.invocations) == 1
    assert set(t.invocations[0].members) == {"A1", "S1", "A2"}
    assert {a.id for a in t.artifacts} == {"wf:wi", "A2.out"}
    assert check_bipartiteness(t).passed


def test_filter_rejects_foreign_view():
    t = generate_trace(load_flat("chain"))
    with pytest.raises(TraceError):
        filter_trace(t, identity_view(load_flat("bypass")))
    stripped = dataclasses.replace(t, invocations=t.invocations[1:])
    with pytest.raises(TraceError):
        filter_trace(stripped, identity_view(load_flat("chain")))


@pytest.mark.parametrize("name", ["chain", "bypass", "diamond", "cycle_risk", "textmining"])
def test_trace_round_trip(name):
    t = generate_trace(load_flat(name))
    assert trace_from_dict(trace_to_dict(t)) == t
    f = load_flat(name)
    ft = filter_trace(t, apply_policy(f, bundled_policy("zoom")))
    assert trace_from_dict(trace_to_dict(ft)) == ft


def test_textmining_agreement_for_bundled_policies():
    f = load_flat("textmining")
    t = generate_trace(f)
    for name in ("zoom", "collapse-all", "collapse-selected", "eliminate-all"):
        v = apply_policy(f, bundled_policy(name))
        assert agreement_mismatches(f, v, filter_trace(t, v)) == [], name


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_filtered_trace_agrees_with_view(seed):
    rng = random.Random(seed)
    f = random_flat(seed, n_min=3, n_max=12)
    t = generate_trace(f)
    for policy in (random_zoom_policy(rng, f), random_collapse_policy(rng), random_eliminate_policy(rng)):
        v = apply_policy(f, policy)
        ft = filter_trace(t, v)
        assert agreement_mismatches(f, v, ft) == []
        assert len(ft.invocations) <= len(t.invocations)
        assert serialize_trace(filter_trace(generate_trace(f), v)) == serialize_trace(ft)
        assert trace_from_dict(trace_to_dict(ft)) == ft

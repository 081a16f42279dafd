"""Provenance abstraction toolkit for scientific-workflow graphs."""

from provabs.abstraction import (
    Action,
    MotifActionPolicy,
    ZoomPolicy,
    apply_policy,
    collapse,
    eliminate,
    load_policy,
    zoom_view,
)
from provabs.flatten import FlatWorkflow, TopLayerView, flatten
from provabs.integrity import (
    check_acyclicity,
    check_all,
    check_bipartiteness,
    check_completeness,
    check_soundness,
    check_validity,
    integrity_matrix,
)
from provabs.metrics import (
    activity_precision,
    derivation_path,
    match_correspondents,
    port_precision,
    precision_report,
)
from provabs.model import (
    Activity,
    DataLink,
    Motif,
    Workflow,
    parse_workflow,
    reach,
    serialize_workflow,
    validate_workflow,
)
from provabs.trace import ExecutionTrace, filter_trace, generate_trace
from provabs.views import AbstractNode, AbstractView, build_view, identity_view, top_layer_view

__all__ = [
    "AbstractNode",
    "AbstractView",
    "Action",
    "Activity",
    "DataLink",
    "ExecutionTrace",
    "FlatWorkflow",
    "Motif",
    "MotifActionPolicy",
    "TopLayerView",
    "Workflow",
    "ZoomPolicy",
    "activity_precision",
    "apply_policy",
    "build_view",
    "check_acyclicity",
    "check_all",
    "check_bipartiteness",
    "check_completeness",
    "check_soundness",
    "check_validity",
    "collapse",
    "derivation_path",
    "eliminate",
    "filter_trace",
    "flatten",
    "generate_trace",
    "identity_view",
    "integrity_matrix",
    "load_policy",
    "match_correspondents",
    "parse_workflow",
    "port_precision",
    "precision_report",
    "reach",
    "serialize_workflow",
    "top_layer_view",
    "validate_workflow",
    "zoom_view",
]

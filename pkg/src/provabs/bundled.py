"""Access to the bundled fixture workflows and policy files.

``PROVABS_FIXTURES`` points the loaders at a different fixture directory.
"""

from __future__ import annotations

import os
from pathlib import Path

from provabs.abstraction import AbstractionPolicy, ZoomPolicy, load_policy
from provabs.flatten import FlatWorkflow, flatten
from provabs.model import Workflow, parse_workflow

FIXTURE_NAMES = ("chain", "bypass", "diamond", "cycle_risk", "textmining")
PRECISION_POLICIES = ("eliminate-all", "collapse-all", "collapse-selected", "zoom")
PRECISION_SRC = "pdfDirectoryPathIn"
PRECISION_DST = "termCandidatesAboveTreshold"


def fixture_dir() -> Path:
    override = os.environ.get("PROVABS_FIXTURES")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "fixtures"


def fixture_path(name: str) -> Path:
    stem = name[:-5] if name.endswith(".json") else name
    path = fixture_dir() / f"{stem}.json"
    if not path.exists():
        path = fixture_dir() / f"{stem.replace('-', '_')}.json"
    return path


def load_workflow(name: str) -> Workflow:
    return parse_workflow(fixture_path(name).read_bytes())


def load_flat(name: str) -> FlatWorkflow:
    return flatten(load_workflow(name))


def bundled_policy(name: str) -> AbstractionPolicy:
    if name == "zoom":
        return ZoomPolicy()
    return load_policy(fixture_path(name))


def matrix_counterexamples():
    """Constructed views exhibiting the "N" cells of the method/property matrix.

    * Collapse: merging the adapter of the bypass fixture into the significant
      activity's node asserts the false dependency ``wi2 -> wo1``.
    * ZOOM: on the cycle-risk fixture, one adapter-only composite holding
      both adapters is sound among significant items but cyclic.
    """
    from provabs.views import build_view

    bypass = load_flat("bypass")
    forced = build_view(bypass, [["S1", "A1"]], method="collapse")
    risk = load_flat("cycle_risk")
    cyclic = build_view(risk, [["S1"], ["A", "B"], ["S2"]], method="zoom")
    return [("collapse", bypass, forced), ("zoom", risk, cyclic)]

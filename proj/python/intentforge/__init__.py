# SPDX-License-Identifier: Apache-2.0
"""Intent co-creation, catalog traversal, provisioning and test-driven assurance."""

from __future__ import annotations

from pathlib import Path

from ._intentforge import (
    Catalog,
    CatalogError,
    FinalizeError,
    PlanError,
    RuleEvalError,
    RuleSyntaxError,
    RuleTypeError,
    ScenarioError,
    Session,
    backends,
    canonical_rule,
    plan_digest,
    validate_catalog,
)
from . import _intentforge

_DATA = Path(__file__).resolve().parent / "data"


def data_file(name: str) -> str:
    """Bundled file: fixture.json, sports-media-patras.json or patras-intent.json."""
    packaged = _DATA / name
    if packaged.exists():
        return str(packaged)
    if name == "fixture.json":
        return _intentforge.default_catalog_path()
    return str(Path(_intentforge.default_scenario_path()).parent / name)


def load_catalog(path: str | None = None) -> Catalog:
    return _intentforge.load_catalog(path or data_file("fixture.json"))


_run_bench = Catalog.run_bench
_run_demo = Catalog.run_demo


def _bench(self, backend="reference", scenario=None):
    return _run_bench(self, backend, scenario or data_file("sports-media-patras.json"))


def _demo(self, seed=42, scenario=None):
    return _run_demo(self, seed, scenario or data_file("sports-media-patras.json"))


Catalog.run_bench = _bench
Catalog.run_demo = _demo


__all__ = [
    "Catalog",
    "CatalogError",
    "FinalizeError",
    "PlanError",
    "RuleEvalError",
    "RuleSyntaxError",
    "RuleTypeError",
    "ScenarioError",
    "Session",
    "backends",
    "canonical_rule",
    "data_file",
    "load_catalog",
    "plan_digest",
    "validate_catalog",
]

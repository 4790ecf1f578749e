"""Desk-scale library for graded-scale calculus and weighted branched integration.

Submodules follow the build's layering: scales and linear splitting
(sc_core), differentiability probes and tangents (sc_calculus), idempotent
maps with varying-dimension images (retracts), contraction germs (germs),
finite symmetry groupoids (groupoids), strong bundles and multisection
perturbation (perturbation), weighted branch integration (branched_integration),
and the scenario runner (cli).
"""

from . import (
    branched_integration,
    germs,
    groupoids,
    perturbation,
    retracts,
    sc_calculus,
    sc_core,
)

__all__ = [
    "sc_core",
    "sc_calculus",
    "retracts",
    "germs",
    "groupoids",
    "perturbation",
    "branched_integration",
]

__version__ = "0.1.0"

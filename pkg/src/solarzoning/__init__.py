"""Tools for quantifying how local zoning constrains utility-scale solar.

The package turns a jurisdiction-level ordinance table plus synthetic land
and grid inputs into developable-area estimates, land supply curves, a
capacity-loss waterfall decomposition, and a multi-period capacity-expansion
plan, with a scenario-runner CLI on top.
"""

from __future__ import annotations

__version__ = "0.1.0"

"""Multi-period capacity-expansion planning on representative days."""

from __future__ import annotations

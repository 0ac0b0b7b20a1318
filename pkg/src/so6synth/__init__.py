"""Exact T-count-optimal synthesis of two-qubit Clifford+T operators in SO(6)."""

from __future__ import annotations

__version__ = "0.1.0"

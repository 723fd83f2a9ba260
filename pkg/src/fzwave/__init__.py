"""Spectral-Galerkin simulation of the fractional Zener wave equation in 1D."""

from __future__ import annotations

__version__ = "0.1.0"

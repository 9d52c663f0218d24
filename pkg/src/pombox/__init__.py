"""Algebra and modal logic of posets with boxes."""

from . import posets, terms, logic, testkit

__all__ = ["posets", "terms", "logic", "testkit"]

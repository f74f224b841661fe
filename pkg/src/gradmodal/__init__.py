"""Graded two-way modal logic over the frame classes of the modal cube."""

from .syntax import Formula, parse, render
from .kripke import KripkeStructure, FrameClass

__version__ = "0.1.0"
__all__ = ["Formula", "parse", "render", "KripkeStructure", "FrameClass"]

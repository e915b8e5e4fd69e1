"""Numerical toolkit for entanglement and nonlocality in quantum networks."""
from . import agreement, boxes, entanglement, kvgames, states, tensor

__all__ = ["agreement", "boxes", "entanglement", "kvgames", "states", "tensor"]
__version__ = "0.1.0"

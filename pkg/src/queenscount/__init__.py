"""Counting N-queens solutions exactly and by rare-event Monte Carlo."""
from .board import BoardSpec, Embedding, Placement, energy, is_solution, state_space_size
from .exact import count_completion, count_exact, exact_dos

__version__ = "0.1.0"

__all__ = ["BoardSpec", "Embedding", "Placement", "energy", "is_solution", "state_space_size",
           "count_exact", "count_completion", "exact_dos"]

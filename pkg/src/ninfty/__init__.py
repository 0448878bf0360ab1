"""Transfer systems, G-universes and the discs/linear-isometries comparison for small finite groups."""

from .groups import build_group, subgroup_lattice
from .transfer import TransferSystem, enumerate_all, generate, is_bisaturated, is_disclike, is_saturated
from .universes import Universe, UniverseContext, disc_transfer, linear_transfer

__all__ = [
    "build_group",
    "subgroup_lattice",
    "TransferSystem",
    "enumerate_all",
    "generate",
    "is_saturated",
    "is_disclike",
    "is_bisaturated",
    "Universe",
    "UniverseContext",
    "disc_transfer",
    "linear_transfer",
]

__version__ = "0.1.0"

"""Relative entropy of magic: reverse-map families, closed forms and nonadditivity witnesses."""

__version__ = "0.1.0"

from .family import magic_from_stabilizer, rel_entropy_closed_form, t_max  # noqa: E402
from .optim import closest_stabilizer_1q, relative_entropy_of_magic  # noqa: E402
from .witness import find_violation, reconstruct_hyperplane  # noqa: E402

__all__ = [
    "closest_stabilizer_1q",
    "find_violation",
    "magic_from_stabilizer",
    "reconstruct_hyperplane",
    "rel_entropy_closed_form",
    "relative_entropy_of_magic",
    "t_max",
]

"""Folner sets for alternate mother groups and their varying-valency relatives."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import ResourceLimitError, UnsupportedDegreeError
from .perm import Permutation
from .words import DirectedSpec, GroupWord, ValencySequence, decompose, is_identity
from .mother import BElement, perfect1_witness
from .folner import FolnerProfile, brute_force_ratio, cardinalities, delta_sequence
from .dp import epsilon_sequence, f_eval

__all__ = [
    "__version__",
    "ResourceLimitError",
    "UnsupportedDegreeError",
    "Permutation",
    "DirectedSpec",
    "GroupWord",
    "ValencySequence",
    "decompose",
    "is_identity",
    "BElement",
    "perfect1_witness",
    "FolnerProfile",
    "brute_force_ratio",
    "cardinalities",
    "delta_sequence",
    "epsilon_sequence",
    "f_eval",
]

"""Parameter triple for the single-particle swarm recurrence."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonFiniteInput

DEGENERATE = "degenerate"     # c_l = c_g = 0: fully deterministic motion
CHI_ZERO = "chi_zero"         # chi = 0: closed-form drift available
GENERAL = "general"


@dataclass(frozen=True)
class SwarmParams:
    """Inertia weight chi and the two acceleration coefficients."""

    chi: float
    c_l: float
    c_g: float

    def __post_init__(self):
        for name in ("chi", "c_l", "c_g"):
            if not math.isfinite(getattr(self, name)):
                raise NonFiniteInput(f"{name} must be finite")

    @property
    def special_case(self) -> str:
        if self.c_l == 0.0 and self.c_g == 0.0:
            return DEGENERATE
        if self.chi == 0.0:
            return CHI_ZERO
        return GENERAL

"""Unit system carried by every packet.

Natural units (hbar = m = 1) are the default; an explicit UnitSystem makes
SI runs possible without touching any formula.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be strictly positive")


NATURAL = UnitSystem()

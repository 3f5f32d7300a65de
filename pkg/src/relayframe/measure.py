"""Finite positive measure spaces (node id plus mass).

The integrals over the outer index space and over each inner index space
become weighted sums over these atoms.  A counting measure (all masses 1)
gives the ordinary discrete setting.
"""
from dataclasses import dataclass
import math
import numbers

from .errors import DuplicateId, EmptySpace, NonPositiveWeight


@dataclass(frozen=True)
class MeasureAtom:
    id: str
    weight: float


@dataclass(frozen=True)
class DiscreteMeasureSpace:
    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @classmethod
    def counting(cls, n, prefix="w"):
        return cls(tuple(MeasureAtom(f"{prefix}{i + 1}", 1.0) for i in range(n)))

    @classmethod
    def from_weights(cls, weights, prefix="w"):
        return cls(tuple(MeasureAtom(f"{prefix}{i + 1}", float(x)) for i, x in enumerate(weights)))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @property
    def weights(self):
        return [a.weight for a in self.atoms]


def check_weight(weight, what="weight"):
    ok = isinstance(weight, numbers.Real) and not isinstance(weight, bool)
    if not (ok and math.isfinite(weight) and weight > 0):
        raise NonPositiveWeight(f"{what} must be positive and finite, got {weight!r}")


def total_mass(space):
    """Sum of atom weights, accumulated left to right."""
    total = 0.0
    for atom in space.atoms:
        total += atom.weight
    return total


def validate(space):
    """Raise if `space` is empty, has a bad weight, or repeats an id."""
    if len(space.atoms) == 0:
        raise EmptySpace("measure space has no atoms")
    seen = set()
    for atom in space.atoms:
        check_weight(atom.weight, f"weight of atom {atom.id!r}")
        if atom.id in seen:
            raise DuplicateId(f"atom id {atom.id!r} appears more than once")
        seen.add(atom.id)

"""Additive functors on the ground category, described by their action on
presentations, together with the class of objects each one is adapted to."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .core import FgModule, Morphism, tf_reflect, tf_reflect_map
from .errors import StructureMismatch
from .linalg import IntMatrix


@dataclass(frozen=True)
class Functor:
    name: str
    obj: Callable[[FgModule], FgModule]
    mor: Callable[[Morphism], Morphism]
    exact: bool
    adapted: Callable[[FgModule], bool]

    def __call__(self, m: FgModule) -> FgModule:
        return self.obj(m)

    def then(self, other: "Functor") -> "Functor":
        """``other ∘ self``."""
        return Functor(
            name=f"{other.name}∘{self.name}",
            obj=lambda m: other.obj(self.obj(m)),
            mor=lambda f: other.mor(self.mor(f)),
            exact=self.exact and other.exact,
            adapted=lambda m: self.adapted(m) and other.adapted(self.obj(m)),
        )


IDENTITY = Functor("id", lambda m: m, lambda f: f, True, lambda m: True)


def _tensor_obj(m: FgModule, k: int) -> FgModule:
    g = m.generator_count
    return FgModule(g, IntMatrix.vstack(m.relations, IntMatrix.identity(g).scale(k)))


def tensor(k: int) -> Functor:
    """``- ⊗ Z/k``: same generators, ``k`` times every generator added as a relation."""
    if k < 1:
        raise ValueError("tensor functor needs a positive modulus")

    def mor(f: Morphism) -> Morphism:
        return Morphism(_tensor_obj(f.source, k), _tensor_obj(f.target, k), f.matrix)

    return Functor(f"tensor{k}", lambda m: _tensor_obj(m, k), mor, k == 1, lambda m: m.is_free())


TF_REFLECT = Functor("tf", lambda m: tf_reflect(m)[0], tf_reflect_map, False, lambda m: m.is_torsion_free())


def _include(m: FgModule) -> FgModule:
    if not m.is_torsion_free():
        raise StructureMismatch(f"{m} is not an object of the torsion-free category")
    return m


def _include_map(f: Morphism) -> Morphism:
    _include(f.source)
    _include(f.target)
    return f


INCLUSION = Functor("incl", _include, _include_map, True, lambda m: m.is_torsion_free())


def by_name(name: str) -> Functor:
    """``id``, ``tf``, ``incl`` or ``tensorK`` for a positive integer ``K``."""
    fixed = {"id": IDENTITY, "tf": TF_REFLECT, "incl": INCLUSION}
    if name in fixed:
        return fixed[name]
    if name.startswith("tensor") and name[6:].isdigit():
        return tensor(int(name[6:]))
    raise ValueError(f"unknown functor {name!r}")

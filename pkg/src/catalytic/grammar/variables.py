"""Tagged grammar variables and their printed names.

Names follow ``F_k1_k2_k``, ``A_k_i``, ``Ab_k_i``, ``D_j``, ``B_j`` for a
single equation; with several types the pair ``s_t`` is prepended.  The
``typed`` flag only affects printing and is ignored by equality.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..model import SectionVar


def _name(prefix: str, typed: bool, st: tuple, rest: tuple) -> str:
    idx = (st + rest) if typed else rest
    return prefix + "_" + "_".join(str(i) for i in idx)


@dataclass(frozen=True)
class FVar:
    """Paths of type s -> t from level k1 to level k2 staying at or above k."""

    s: int
    t: int
    k1: int
    k2: int
    k: int
    typed: bool = field(default=False, compare=False)

    def __str__(self):
        return _name("F", self.typed, (self.s, self.t), (self.k1, self.k2, self.k))

    @property
    def floor(self) -> int:
        return self.k


@dataclass(frozen=True)
class AVar:
    """Walks k -> k+i whose interior stays strictly above k+i."""

    s: int
    t: int
    k: int
    i: int
    typed: bool = field(default=False, compare=False)

    def __str__(self):
        return _name("A", self.typed, (self.s, self.t), (self.k, self.i))


@dataclass(frozen=True)
class AbarVar:
    """Walks k -> k-i whose interior stays strictly above k."""

    s: int
    t: int
    k: int
    i: int
    typed: bool = field(default=False, compare=False)

    def __str__(self):
        return _name("Ab", self.typed, (self.s, self.t), (self.k, self.i))


@dataclass(frozen=True)
class DVar:
    """Excursion increment between floors j-1 and j."""

    s: int
    t: int
    j: int
    typed: bool = field(default=False, compare=False)

    def __str__(self):
        return _name("D", self.typed, (self.s, self.t), (self.j,))


@dataclass(frozen=True)
class BVar:
    """Increment of the level-returning walk between levels j-1 and j."""

    s: int
    t: int
    j: int
    typed: bool = field(default=False, compare=False)

    def __str__(self):
        return _name("B", self.typed, (self.s, self.t), (self.j,))


@dataclass(frozen=True)
class DiffVar:
    """Difference between a variable and its copy one level lower."""

    upper: object

    @property
    def typed(self) -> bool:
        return self.upper.typed

    def __str__(self):
        return "d" + str(self.upper)


@dataclass(frozen=True)
class Symbol:
    """A variable of a parsed grammar whose name matches no known pattern."""

    name: str

    def __str__(self):
        return self.name


WALK_TYPES = (AVar, AbarVar)

_NAME_RE = re.compile(r"^(d?)(F|A|Ab|D|B|f)((?:_\d+)+)$")
_ARITY = {"F": 3, "A": 2, "Ab": 2, "D": 1, "B": 1, "f": 1}
_CLASSES = {"F": FVar, "A": AVar, "Ab": AbarVar, "D": DVar, "B": BVar}


def parse_variable_name(name: str):
    """Inverse of ``str`` on grammar variables; unknown patterns give a Symbol."""
    m = _NAME_RE.match(name)
    if not m:
        if not re.match(r"^[A-Za-z][A-Za-z0-9_]*$", name) or name == "x":
            raise ValueError(f"invalid variable name {name!r}")
        return Symbol(name)
    diff, prefix, rest = m.groups()
    nums = tuple(int(p) for p in rest.strip("_").split("_"))
    base = _ARITY[prefix]
    if prefix == "f":
        if len(nums) == 1:
            v = SectionVar(1, nums[0], False)
        elif len(nums) == 2:
            v = SectionVar(nums[0], nums[1], True)
        else:
            return Symbol(name)
        return Symbol(name) if diff else v
    if len(nums) == base:
        v = _CLASSES[prefix](1, 1, *nums, typed=False)
    elif len(nums) == base + 2:
        v = _CLASSES[prefix](*nums, typed=True)
    else:
        return Symbol(name)
    if diff:
        if prefix in ("D", "B"):
            return Symbol(name)
        return DiffVar(v)
    return v

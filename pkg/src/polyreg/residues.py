"""Residue-class sets and helpers for integer bitsets.

Sets of non-negative integers up to a bound are stored as Python ints with
bit ``n`` set iff ``n`` belongs to the set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


def bit_mask(bound: int) -> int:
    return (1 << (bound + 1)) - 1


def iter_bits(bits: int) -> Iterator[int]:
    n = 0
    while bits:
        if bits & 1:
            yield n
        low = (bits & -bits).bit_length() - 1 if bits & ~1 else 0
        if low > 1:
            bits >>= low
            n += low
        else:
            bits >>= 1
            n += 1


def bits_to_list(bits: int) -> list[int]:
    s = bin(bits)[:1:-1]
    return [i for i, ch in enumerate(s) if ch == "1"]


def list_to_bits(values: Iterable[int]) -> int:
    out = 0
    for v in values:
        out |= 1 << v
    return out


def lowest_missing(bits: int, bound: int) -> int | None:
    """Least ``n <= bound`` whose bit is clear."""
    inverted = ~bits & bit_mask(bound)
    if not inverted:
        return None
    return (inverted & -inverted).bit_length() - 1


@dataclass(frozen=True)
class ResidueClassSet:
    """A finite union of residue classes modulo ``modulus``.

    Construction canonicalizes to the least modulus describing the same set.
    """

    modulus: int
    residues: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        res = frozenset(r % self.modulus for r in self.residues)
        modulus = self.modulus
        for d in range(1, self.modulus + 1):
            if self.modulus % d:
                continue
            if all(((r % d) + d * k) in res for r in res for k in range(self.modulus // d)):
                modulus = d
                break
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "residues", tuple(sorted({r % modulus for r in res})))

    def __contains__(self, n: int) -> bool:
        return n % self.modulus in self.residues

    def to_bits(self, bound: int) -> int:
        return list_to_bits(n for n in range(bound + 1) if n % self.modulus in self.residues)

    def reduce(self, modulus: int) -> "ResidueClassSet":
        """Image of the set modulo ``modulus`` (a divisor of a common multiple)."""
        m = self.modulus * modulus
        return ResidueClassSet(modulus, tuple(n % modulus for n in range(m) if n in self))

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "residues": list(self.residues)}

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.residues)) + f"}} mod {self.modulus}"


def residues_mod(bits: int, bound: int, modulus: int) -> ResidueClassSet:
    """Residue classes modulo ``modulus`` met by the set ``bits`` within [0, bound]."""
    hit = {n % modulus for n in bits_to_list(bits & bit_mask(bound))}
    return ResidueClassSet(modulus, tuple(hit))


def summarize(bits: int, bound: int, max_modulus: int = 48) -> dict:
    """Describe a set as residue classes plus exception lists.

    Picks the modulus (smallest on ties) minimizing the number of
    exceptions, where a class is included when at least half of its members
    up to ``bound`` are present.
    """
    present = bin(bits & bit_mask(bound))[:1:-1].ljust(bound + 1, "0")
    best: tuple[int, int, tuple[int, ...]] | None = None
    # a modulus needs at least two full periods in range to mean anything
    for modulus in range(1, max(1, min(max_modulus, (bound + 1) // 2)) + 1):
        chosen = []
        errors = 0
        for r in range(modulus):
            column = present[r::modulus]
            ones = column.count("1")
            if 2 * ones >= len(column) and column:
                chosen.append(r)
                errors += len(column) - ones
            else:
                errors += ones
        if best is None or errors < best[0]:
            best = (errors, modulus, tuple(chosen))
        if errors == 0:
            break
    assert best is not None
    _, modulus, chosen = best
    classes = ResidueClassSet(modulus, chosen)
    missing = [n for n in range(bound + 1) if n in classes and present[n] == "0"]
    extra = [n for n in range(bound + 1) if n not in classes and present[n] == "1"]
    return {**classes.to_json(), "bound": bound, "missing": missing, "extra": extra}

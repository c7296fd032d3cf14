"""Classification families of regular m-gonal forms and rank bounds.

Family matching is purely syntactic; :func:`verify_family_claim` is the
semantic check against the local oracle and the sieve.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

from polyreg.localsolve import Status, is_locally_universal
from polyreg.polynumber import Domain, ShiftedForm, is_primitive
from polyreg.represent import locally_represented_set, represented_set, truant
from polyreg.residues import ResidueClassSet, bit_mask, bits_to_list

# hypotheses of the classification theorems
GENERALIZED_MIN_M = 14
GENERALIZED_MIN_M_MOD4 = 28
NONNEG_MIN_M = 9
NONNEG_MIN_M_MOD4 = 12


class NoTheoremApplies(ValueError):
    pass


class Family(str, enum.Enum):
    UNIVERSAL = "Universal"
    F1_4 = "F1_4"
    F1_6 = "F1_6"
    F1_7 = "F1_7"
    F1_8 = "F1_8"
    F1_11 = "F1_11"
    F1_12 = "F1_12"
    F1_13 = "F1_13"
    F1_14 = "F1_14"
    F1_15 = "F1_15"
    F1_16 = "F1_16"
    F1_17 = "F1_17"


# shape -> (label outside the m = 0 mod 4, m != 2 mod 3 theorem, label inside)
_SHAPE_LABELS = {
    "three": (Family.F1_4, Family.F1_11),
    "four": (Family.F1_6, Family.F1_12),
    "one_three": (Family.F1_7, Family.F1_13),
    "one_one": (Family.F1_8, Family.F1_14),
    "three_four": (Family.F1_15, Family.F1_15),
    "three_eight": (Family.F1_16, Family.F1_16),
    "three_three_four": (Family.F1_17, Family.F1_17),
}

_THEOREM_FAMILIES = {
    "4.1": frozenset(),
    "4.2": frozenset({Family.F1_4}),
    "4.4": frozenset({Family.F1_6, Family.F1_7, Family.F1_8}),
    "4.5": frozenset({Family.F1_11, Family.F1_12, Family.F1_13, Family.F1_14,
                      Family.F1_15, Family.F1_16, Family.F1_17}),
    "4.10(1)": frozenset(),
    "4.10(2)": frozenset({Family.F1_4}),
    "4.10(3)": frozenset({Family.F1_6, Family.F1_7, Family.F1_8}),
    "4.10(4)": frozenset({Family.F1_11, Family.F1_12, Family.F1_13, Family.F1_14,
                          Family.F1_15, Family.F1_16, Family.F1_17}),
}


@dataclass(frozen=True)
class FamilyTag:
    family: Family
    a1: int | None = None
    applicable: bool = False

    @property
    def classes(self) -> ResidueClassSet:
        return predicted_classes(self.family, self.a1)

    def to_json(self) -> dict:
        out = {"id": self.family.value, "applicable": self.applicable}
        if self.a1 is not None:
            out["a1"] = self.a1
        if self.family is not Family.UNIVERSAL:
            out["predicted_classes"] = self.classes.to_json()
        return out

    def __str__(self) -> str:
        return self.family.value if self.a1 is None else f"{self.family.value}(a1={self.a1})"


def theorem_window(m: int, domain: Domain | str = Domain.GENERALIZED) -> str:
    """Identifier of the classification theorem whose hypotheses ``m`` meets."""
    domain = Domain(domain)
    mod4 = m % 4 == 0
    two_mod3 = m % 3 == 2
    if domain is Domain.GENERALIZED:
        if not mod4 and m >= GENERALIZED_MIN_M:
            return "4.1" if two_mod3 else "4.2"
        if mod4 and m >= GENERALIZED_MIN_M_MOD4:
            return "4.4" if two_mod3 else "4.5"
    else:
        if not mod4 and m >= NONNEG_MIN_M:
            return "4.10(1)" if two_mod3 else "4.10(2)"
        if mod4 and m >= NONNEG_MIN_M_MOD4:
            return "4.10(3)" if two_mod3 else "4.10(4)"
    raise NoTheoremApplies(f"no classification theorem covers m={m} on domain {domain.value}")


def window_families(m: int, domain: Domain | str = Domain.GENERALIZED) -> frozenset[Family]:
    try:
        return _THEOREM_FAMILIES[theorem_window(m, domain)]
    except NoTheoremApplies:
        return frozenset()


def _rest_divisible(coeffs: list[int], head: list[int], d: int) -> bool:
    rest = Counter(coeffs)
    rest.subtract(Counter(head))
    if any(v < 0 for v in rest.values()):
        return False
    return all(a % d == 0 for a in rest.elements())


def _shapes(coeffs: list[int]) -> list[tuple[str, int | None]]:
    found: list[tuple[str, int | None]] = []
    off3 = [a for a in coeffs if a % 3]
    if len(off3) == 1 and off3[0] in (1, 2):
        found.append(("three", off3[0]))
    special = False
    for name, head in (("three_four", [3, 4]), ("three_eight", [3, 8]),
                       ("three_three_four", [3, 3, 4])):
        if len(coeffs) > len(head) and _rest_divisible(coeffs, head, 12):
            found.append((name, None))
            special = True
    off4 = [a for a in coeffs if a % 4]
    # the 12-modulus shapes refine the single-odd-coefficient one
    if len(off4) == 1 and off4[0] in (1, 3) and not special:
        found.append(("four", off4[0]))
    if len(coeffs) > 2 and _rest_divisible(coeffs, [1, 3], 4):
        found.append(("one_three", None))
    if len(coeffs) > 2 and _rest_divisible(coeffs, [1, 1], 4):
        found.append(("one_one", None))
    return found


def match_family(form: ShiftedForm) -> list[FamilyTag]:
    """Non-universal families whose coefficient pattern the form has."""
    if not form.is_ordinary or not is_primitive(form):
        return []
    allowed = window_families(form.m, form.domain)
    late = form.m % 4 == 0 and form.m % 3 != 2
    tags = []
    for shape, a1 in _shapes(sorted(form.coefficients)):
        early_label, late_label = _SHAPE_LABELS[shape]
        label = late_label if late and late_label in allowed else early_label
        tags.append(FamilyTag(label, a1, label in allowed))
    return sorted(tags, key=lambda t: int(t.family.value[3:]))


def predicted_classes(family: Family | str, a1: int | None = None) -> ResidueClassSet:
    family = Family(family)
    if family in (Family.F1_4, Family.F1_11):
        if a1 not in (1, 2):
            raise ValueError(f"{family.value} needs a1 in {{1,2}}, got {a1}")
        return ResidueClassSet(3, (0, a1))
    if family in (Family.F1_6, Family.F1_12):
        if a1 not in (1, 3):
            raise ValueError(f"{family.value} needs a1 in {{1,3}}, got {a1}")
        return ResidueClassSet(4, (0, a1))
    table = {
        Family.F1_7: (4, (0, 1, 3)),
        Family.F1_13: (4, (0, 1, 3)),
        Family.F1_8: (4, (0, 1, 2)),
        Family.F1_14: (4, (0, 1, 2)),
        Family.F1_15: (12, (0, 3, 4, 7)),
        Family.F1_16: (12, (0, 3, 8, 11)),
        Family.F1_17: (12, (0, 3, 4, 6, 7, 10)),
    }
    if family not in table:
        raise ValueError("the universal family has no residue restriction")
    return ResidueClassSet(*table[family])


@dataclass
class FamilyCheck:
    tag: FamilyTag
    bound: int
    local_match: bool
    global_consistent: bool
    defects: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"tag": self.tag.to_json(), "bound": self.bound, "local_match": self.local_match,
                "global_consistent": self.global_consistent, "defects": self.defects}


def verify_family_claim(form: ShiftedForm, tag: FamilyTag | Family | str, bound: int,
                        cap: int | None = None) -> FamilyCheck:
    """Compare the locally represented set with the family's predicted classes."""
    if not isinstance(tag, FamilyTag):
        tag = FamilyTag(Family(tag))
    mask = bit_mask(bound)
    local, undetermined = locally_represented_set(form, bound, cap)
    rep = represented_set(form, bound)
    defects = [f"undetermined local verdict at N={n}" for n in undetermined]
    if tag.family is Family.UNIVERSAL:
        predicted = mask
    else:
        predicted = tag.classes.to_bits(bound)
    extra = bits_to_list(local & ~predicted)
    missing = bits_to_list(predicted & ~local & ~sum(1 << n for n in undetermined))
    if extra:
        defects.append(f"locally represented outside the predicted classes: {extra[:10]}")
    if missing:
        defects.append(f"predicted but locally missed: {missing[:10]}")
    unrep = bits_to_list(predicted & ~rep)
    if unrep:
        defects.append(f"predicted but not represented: {unrep[:10]}")
    return FamilyCheck(tag, bound, not extra and not missing and not undetermined,
                       not unrep, defects)


def rank_lower_bound(m: int) -> int:
    """Least rank allowed for a generalized regular shifted m-gonal form."""
    if m < 3:
        raise ValueError("m must be >= 3")
    half = m // 2
    if m % 4:
        target = half
    else:
        # 2^n >= half/2 + floor(half/8), with half/2 possibly fractional
        target = half / 2 + half // 8
    n = 0
    while 2 ** n < target:
        n += 1
    return n


def min_universal_rank(m: int) -> int:
    """``ceil(log2(m + 2))``."""
    if m < 3:
        raise ValueError("m must be >= 3")
    return (m + 1).bit_length()


def transformed_universality_check(form: ShiftedForm, bound: int,
                                   cap: int | None = None) -> dict:
    """Evidence on whether universality of the full transform tracks regularity.

    Open question; the result is reported side by side and never treated
    as a proof either way.
    """
    from polyreg.watson import lambda_full
    from polyreg.represent import regularity_report

    image, trail = lambda_full(form, cap=cap)
    verdict = is_locally_universal(image, cap)
    image_truant = truant(image, bound) if verdict.status is Status.YES else None
    report = regularity_report(form, bound, cap)
    return {
        "form": form.spec(),
        "transformed": image.spec(),
        "steps": len(trail),
        "transformed_locally_universal": verdict.status.value,
        "transformed_truant": image_truant,
        "original_status": report.status_text(),
    }

"""Escalation search, regularity surveys and the JSONL result cache."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import gcd
from pathlib import Path
from typing import Iterable, Iterator

from polyreg.classify import Family, match_family, theorem_window
from polyreg.localsolve import Status, is_locally_universal
from polyreg.polynumber import Domain, ShiftedForm
from polyreg.represent import regularity_report, sumset, term_values
from polyreg.residues import bit_mask, lowest_missing

CACHE_ENV = "POLYREG_CACHE"
DEFAULT_MAX_NODES = 200_000
OUTSIDE = "outside-classification"


class TreeBudgetExceeded(RuntimeError):
    pass


class CacheError(ValueError):
    """Malformed cache line; ``records`` holds everything read before it."""

    def __init__(self, path: Path, line: int, reason: str, records: list[dict]):
        super().__init__(f"{path}:{line}: {reason}")
        self.path, self.line, self.records = path, line, records


# ---------------------------------------------------------------------------
# escalation
# ---------------------------------------------------------------------------

@dataclass
class EscalatorNode:
    prefix: tuple[int, ...]
    levels: tuple[int, ...]
    truant: int | None
    depth: int
    children: list[tuple[int, ...]] = field(default_factory=list)

    def form(self, m: int, domain: Domain) -> ShiftedForm:
        return ShiftedForm(m, self.prefix, self.levels, domain)


@dataclass
class EscalationResult:
    m: int
    domain: Domain
    bound: int
    nodes: dict[tuple[tuple[int, ...], tuple[int, ...]], EscalatorNode]
    min_rank_proved: int | None
    candidates: list[ShiftedForm]
    # rank up to which every node has a truant; a lower bound on the universal rank
    refuted_through: int

    def to_json(self) -> dict:
        depth_counts: dict[int, int] = {}
        for node in self.nodes.values():
            depth_counts[node.depth] = depth_counts.get(node.depth, 0) + 1
        return {
            "m": self.m,
            "domain": self.domain.value,
            "bound": self.bound,
            "min_rank_proved": self.min_rank_proved,
            "refuted_through_rank": self.refuted_through,
            "nodes_per_depth": {str(k): v for k, v in sorted(depth_counts.items())},
            "candidates": [{"form": f.spec(), "label": f"candidate({self.bound})"}
                           for f in self.candidates],
        }


def _levels_for(m: int, domain: Domain) -> list[int]:
    top = (m - 2) // 2 if domain is Domain.GENERALIZED else m - 2
    return [r for r in range(1, max(top, 1) + 1) if gcd(r, m - 2) == 1]


def escalate_universal(m: int, domain: Domain | str = Domain.GENERALIZED, max_rank: int = 6,
                       bound: int = 10_000, shifted: bool = False,
                       max_nodes: int = DEFAULT_MAX_NODES, cap: int | None = None
                       ) -> EscalationResult:
    """Bhargava escalation over ordinary (or, with ``shifted``, shifted) forms.

    Every depth-d escalator carrying a truant <= bound shows that no
    universal form of rank d grows through it; since each universal form
    contains an escalator chain, a fully truant-bearing depth is a lower
    bound certificate for the minimal universal rank.
    """
    domain = Domain(domain)
    if bound < m:
        raise ValueError("bound must be at least m")
    mask = bit_mask(bound)
    level_choices = _levels_for(m, domain) if shifted else [1]
    values: dict[tuple[int, int], list[int]] = {}

    def vals(a: int, r: int) -> list[int]:
        if (a, r) not in values:
            values[(a, r)] = term_values(m, r, a, bound, domain)
        return values[(a, r)]

    root = EscalatorNode((), (), lowest_missing(1, bound), 0)
    nodes = {((), ()): root}
    frontier = [(root, 1)]
    min_rank: int | None = None
    refuted = 0
    leaves: list[EscalatorNode] = []
    for depth in range(1, max_rank + 1):
        nxt = []
        for parent, bits in frontier:
            last = (parent.prefix[-1], parent.levels[-1]) if parent.prefix else (1, 0)
            for a in range(last[0], parent.truant + 1):
                for r in level_choices:
                    if (a, r) < last:
                        continue
                    child_bits = sumset(bits, vals(a, r), mask)
                    node = EscalatorNode(parent.prefix + (a,), parent.levels + (r,),
                                         lowest_missing(child_bits, bound), depth)
                    parent.children.append(node.prefix)
                    nodes[(node.prefix, node.levels)] = node
                    if len(nodes) > max_nodes:
                        raise TreeBudgetExceeded(f"escalation tree exceeded {max_nodes} nodes")
                    if node.truant is None:
                        leaves.append(node)
                    else:
                        nxt.append((node, child_bits))
        if leaves:
            min_rank = depth
            break
        refuted = depth
        frontier = nxt
    candidates = []
    for leaf in leaves:
        form = leaf.form(m, domain)
        if is_locally_universal(form, cap).status is Status.YES:
            candidates.append(form)
    return EscalationResult(m, domain, bound, nodes, min_rank, candidates, refuted)


# ---------------------------------------------------------------------------
# surveys
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurveyRecord:
    form: str
    status: str
    first_cx: int | None
    tags: tuple[str, ...]
    ms: float = 0.0

    @property
    def flagged(self) -> bool:
        return OUTSIDE in self.tags

    def digest(self) -> tuple:
        """Everything but the timing; reproducible from the form and bound."""
        return (self.form, self.status, self.first_cx, self.tags)

    def to_json(self) -> dict:
        return {"form": self.form, "status": self.status, "first_cx": self.first_cx,
                "tags": list(self.tags), "ms": self.ms}

    @classmethod
    def from_json(cls, data: dict) -> "SurveyRecord":
        missing = {"form", "status", "first_cx", "tags", "ms"} - set(data)
        if missing:
            raise ValueError(f"missing keys {sorted(missing)}")
        ShiftedForm.parse(data["form"])
        return cls(data["form"], data["status"], data["first_cx"],
                   tuple(data["tags"]), float(data["ms"]))


def survey_forms(m: int, rank: int, coeff_bound: int,
                 domain: Domain | str = Domain.GENERALIZED) -> Iterator[ShiftedForm]:
    """Primitive ordinary forms with nondecreasing coefficients <= coeff_bound."""
    for coeffs in combinations_with_replacement(range(1, coeff_bound + 1), rank):
        g = 0
        for a in coeffs:
            g = gcd(g, a)
        if g == 1:
            yield ShiftedForm.ordinary(m, coeffs, Domain(domain))


def survey_one(form: ShiftedForm, bound: int, cap: int | None = None) -> SurveyRecord:
    start = time.perf_counter()
    report = regularity_report(form, bound, cap)
    tags: list[str] = []
    if report.first_counterexample is None:
        if is_locally_universal(form, cap).status is Status.YES:
            tags.append(Family.UNIVERSAL.value)
        tags += [str(t) for t in match_family(form) if t.applicable]
        if not tags:
            tags.append(OUTSIDE)
    if report.undetermined:
        tags.append(f"undetermined:{len(report.undetermined)}")
    ms = round((time.perf_counter() - start) * 1000, 3)
    return SurveyRecord(form.spec(), report.status_text(), report.first_counterexample,
                        tuple(tags), ms)


def _survey_task(args: tuple[str, int, int | None]) -> SurveyRecord:
    spec, bound, cap = args
    return survey_one(ShiftedForm.parse(spec), bound, cap)


def survey_regular(m: int, rank: int, coeff_bound: int, bound: int,
                   domain: Domain | str = Domain.GENERALIZED, shards: int = 1, shard: int = 0,
                   jobs: int = 1, override: bool = False, cap: int | None = None,
                   ) -> list[SurveyRecord]:
    """Regularity reports over a coefficient grid, cross-checked against the families."""
    if not override:
        theorem_window(m, domain)
    if not 0 <= shard < shards:
        raise ValueError(f"shard {shard} outside 0..{shards - 1}")
    forms = [f for i, f in enumerate(survey_forms(m, rank, coeff_bound, domain))
             if i % shards == shard]
    tasks = [(f.spec(), bound, cap) for f in forms]
    if jobs <= 1:
        return [_survey_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_survey_task, tasks, chunksize=8))


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "polyreg"


def cache_append(path: str | os.PathLike, records: SurveyRecord | Iterable[SurveyRecord]) -> None:
    if isinstance(records, SurveyRecord):
        records = [records]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def cache_load(path: str | os.PathLike) -> list[SurveyRecord]:
    path = Path(path)
    records: list[SurveyRecord] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                if not line.endswith("\n"):
                    raise ValueError("truncated line")
                records.append(SurveyRecord.from_json(json.loads(line)))
            except (ValueError, TypeError, KeyError) as exc:
                raise CacheError(path, lineno, str(exc), records) from None
    return records


def _sort_key(rec: SurveyRecord) -> tuple:
    f = ShiftedForm.parse(rec.form)
    return (f.domain.value, f.m, f.rank, f.coefficients, f.levels)


def merge_records(*groups: Iterable[SurveyRecord]) -> list[SurveyRecord]:
    """Deterministic sorted union; duplicate forms must agree on their digest."""
    merged: dict[str, SurveyRecord] = {}
    for group in groups:
        for rec in group:
            old = merged.get(rec.form)
            if old is not None and old.digest() != rec.digest():
                raise ValueError(f"conflicting records for {rec.form}")
            if old is None:
                merged[rec.form] = rec
    return sorted(merged.values(), key=_sort_key)

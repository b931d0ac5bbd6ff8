"""Feasibility conditions for spacetime distribution tasks.

Four geometric conditions cover every task family here:

  I_A   each authorized target lies at least partly in the start's future;
  I_B   for each excluded set, something launched at the start can run to
        future infinity without ever touching that set;
  II    every two authorized targets are causally connected somewhere, so
        no-cloning cannot be violated by serving both independently;
  III   exclusion is compatible with delivery: either an escape route
        through the authorized target dodges the excluded set, or (for
        call-based tasks) the authorized collection keeps a diamond whose
        release decision can see a distinguishing call.

Summoning without call restrictions needs the stronger B1: in every
subset of diamonds some member's return sees every call in the subset.

A verdict lists every violated condition with the sets that witness it,
in a fixed order, so infeasibility is always explained.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import (Diamond, Point, Region, causal_leq, escape_exists,
                       region_in_future)
from .model import AccessStructure, TaskError, TaskSpec

_CONDITION_RANK = {"I_A": 0, "I_B": 1, "II": 2, "III": 3, "B1": 4}


@dataclass(frozen=True)
class Violation:
    condition: str
    subject: tuple[str, ...]
    detail: str

    def __str__(self) -> str:
        return f"{self.condition} [{', '.join(self.subject)}]: {self.detail}"


@dataclass(frozen=True)
class Verdict:
    feasible: bool
    violations: tuple[Violation, ...]

    def lines(self) -> list[str]:
        if self.feasible:
            return ["feasible"]
        return ["infeasible"] + [f"  {v}" for v in self.violations]


def _verdict(violations: Iterable[Violation]) -> Verdict:
    ordered = tuple(sorted(
        violations,
        key=lambda v: (_CONDITION_RANK[v.condition], v.subject)))
    return Verdict(not ordered, ordered)


def check_task(task: TaskSpec) -> Verdict:
    """Decide feasibility of a validated task and explain any failure."""
    task.validate()
    if task.kind == "localize_exclude":
        return _check_localize_exclude(task)
    if task.kind == "state_assembly":
        return _check_assembly(task)
    if task.kind == "summoning":
        if task.variant == "single_call_single_return":
            return _check_single_call(task)
        if task.variant == "multiple_call_multiple_return":
            return _check_assembly(task)
        return _check_unrestricted(task)
    if task.kind == "pit":
        # validate() already enforced the pair topology, which is the whole
        # feasibility story for transfer tasks.
        return Verdict(True, ())
    return check_access_structure(task.access_structure())


# --------------------------------------------------------------------
# localize-exclude
# --------------------------------------------------------------------


def _check_localize_exclude(task: TaskSpec) -> Verdict:
    assert task.start is not None
    if task.dim != 1 and task.unauthorized:
        raise TaskError(
            "escape conditions are only decided exactly in one spatial "
            "dimension; higher-dimensional exclusion tasks are not supported")
    start = task.start
    auth = [(task.set_label(s), task.region_union(s)) for s in task.authorized]
    excl = [(task.set_label(s), task.region_union(s)) for s in task.unauthorized]
    out: list[Violation] = []

    for label, region in auth:
        if not region_in_future(region, start):
            out.append(Violation(
                "I_A", (label,),
                "no diamond of the region lies in the start's causal future"))

    for label, region in excl:
        if not escape_exists(start, region.diamonds):
            out.append(Violation(
                "I_B", (label,),
                "every causal curve from the start eventually enters the "
                "excluded set"))

    for i in range(len(auth)):
        for j in range(i + 1, len(auth)):
            la, ra = auth[i]
            lb, rb = auth[j]
            if not _regions_connected(ra, rb):
                out.append(Violation(
                    "II", (la, lb),
                    "the two regions are everywhere spacelike separated"))

    for la, ra in auth:
        for lu, ru in excl:
            if not escape_exists(ra, ru.diamonds):
                out.append(Violation(
                    "III", (la, lu),
                    "every causal curve through the authorized region is "
                    "trapped by the excluded set"))

    return _verdict(out)


def _regions_connected(a: Region, b: Region) -> bool:
    for da in a.diamonds:
        for db in b.diamonds:
            if causal_leq(da.c, db.r) or causal_leq(db.c, da.r):
                return True
    return False


# --------------------------------------------------------------------
# assembly (shared with call-restricted summoning)
# --------------------------------------------------------------------


def _check_assembly(task: TaskSpec) -> Verdict:
    assert task.start is not None
    start = task.start
    out: list[Violation] = []
    auth = [(task.set_label(s), s) for s in task.authorized]
    excl = [(task.set_label(s), s) for s in task.unauthorized]

    for label, names in auth:
        if not any(causal_leq(start, task.diamonds[n].r) for n in names):
            out.append(Violation(
                "I_A", (label,),
                "no diamond of the collection can receive anything from "
                "the start"))

    for i in range(len(auth)):
        for j in range(i + 1, len(auth)):
            la, sa = auth[i]
            lb, sb = auth[j]
            if not _sets_connected(task, sa, sb):
                out.append(Violation(
                    "II", (la, lb),
                    "no diamond of either collection can signal any diamond "
                    "of the other"))

    for la, sa in auth:
        for lu, su in excl:
            if not _exclusion_separable(task, sa, su):
                out.append(Violation(
                    "III", (la, lu),
                    "the collection sits inside the excluded one and no "
                    "member's return sees a distinguishing call"))

    return _verdict(out)


def _sets_connected(task: TaskSpec, a: Sequence[str], b: Sequence[str]) -> bool:
    for na in a:
        for nb in b:
            da, db = task.diamonds[na], task.diamonds[nb]
            if causal_leq(da.c, db.r) or causal_leq(db.c, da.r):
                return True
    return False


def _exclusion_separable(task: TaskSpec, auth: Sequence[str],
                         excl: Sequence[str]) -> bool:
    """Can releases at `auth` be conditioned so `excl` alone learns nothing?

    Trivially yes when the authorized collection has a diamond outside the
    excluded one.  Otherwise some authorized diamond's return must see a
    call point that belongs only to the excluded collection, so the release
    can be withheld when that extra call fires.
    """
    extra = [n for n in auth if n not in excl]
    if extra:
        return True
    only_excl = [n for n in excl if n not in auth]
    for na in auth:
        r = task.diamonds[na].r
        for ne in only_excl:
            if causal_leq(task.diamonds[ne].c, r):
                return True
    return False


# --------------------------------------------------------------------
# summoning
# --------------------------------------------------------------------


def _check_single_call(task: TaskSpec) -> Verdict:
    assert task.start is not None
    start = task.start
    names = list(task.diamonds)
    out: list[Violation] = []
    for n in names:
        if not causal_leq(start, task.diamonds[n].r):
            out.append(Violation(
                "I_A", (n,),
                "the return point cannot receive anything from the start"))
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            da, db = task.diamonds[names[i]], task.diamonds[names[j]]
            if not (causal_leq(da.c, db.r) or causal_leq(db.c, da.r)):
                out.append(Violation(
                    "II", (names[i], names[j]),
                    "neither diamond's call can reach the other's return"))
    return _verdict(out)


_UNRESTRICTED_LIMIT = 20


def _check_unrestricted(task: TaskSpec) -> Verdict:
    assert task.start is not None
    start = task.start
    names = list(task.diamonds)
    n = len(names)
    if n > _UNRESTRICTED_LIMIT:
        raise TaskError(
            f"unrestricted summoning over {n} diamonds needs all 2^{n} "
            "call patterns checked; refusing beyond "
            f"{_UNRESTRICTED_LIMIT} diamonds")
    out: list[Violation] = []
    for nm in names:
        if not causal_leq(start, task.diamonds[nm].r):
            out.append(Violation(
                "I_A", (nm,),
                "the return point cannot receive anything from the start"))
    # reach[i] = bitmask of diamonds whose call the i-th return can see.
    reach = []
    for nm in names:
        r = task.diamonds[nm].r
        mask = 0
        for j, other in enumerate(names):
            if causal_leq(task.diamonds[other].c, r):
                mask |= 1 << j
        reach.append(mask)
    for mask in range(1, 1 << n):
        served = False
        m = mask
        while m:
            i = (m & -m).bit_length() - 1
            m &= m - 1
            if mask & ~reach[i] == 0:
                served = True
                break
        if not served:
            subset = tuple(names[i] for i in range(n) if mask >> i & 1)
            out.append(Violation(
                "B1", subset,
                "no member's return sees every call in this subset"))
    return _verdict(out)


# --------------------------------------------------------------------
# abstract access structures
# --------------------------------------------------------------------


def check_access_structure(structure: AccessStructure) -> Verdict:
    """Feasibility of an abstract structure, before any embedding.

    Mirrors the geometric conditions: two authorized sets must share a
    party (II), and no authorized set may be contained in an unauthorized
    one (III).  Reachability conditions are vacuous abstractly, since the
    embedding is free to place the start early.
    """
    out: list[Violation] = []
    auth = [(TaskSpec.set_label(s), frozenset(s)) for s in structure.authorized]
    excl = [(TaskSpec.set_label(s), frozenset(s)) for s in structure.unauthorized]
    for i in range(len(auth)):
        for j in range(i + 1, len(auth)):
            la, sa = auth[i]
            lb, sb = auth[j]
            if not sa & sb:
                out.append(Violation(
                    "II", (la, lb),
                    "disjoint authorized sets would have to clone the state"))
    for la, sa in auth:
        for lu, su in excl:
            if sa <= su:
                out.append(Violation(
                    "III", (la, lu),
                    "an unauthorized coalition contains a full authorized set"))
    return _verdict(out)

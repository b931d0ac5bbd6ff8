"""Protocol synthesis: turn a feasible task into an executable event schedule.

A plan is an ordered list of events over named tokens.  Quantum tokens are
qutrit slots (or qudit, per the task's secret dimension); classical tokens
are key digits, key-share digits, and measurement outcomes.  Event shapes:

    {"op": "source",      "label": L, "at": P}
    {"op": "encode",      "code": "edge23", "input": L, "outputs": [L...],
                          "at": P}
    {"op": "create_pair", "labels": [L, L], "at": P}
    {"op": "key",         "name": K, "at": P}
    {"op": "split",       "source": K, "parts": [L...], "at": P}
    {"op": "pad",         "token": L, "key": K, "at": P}
    {"op": "bell",        "pair": [L, L], "outcome": O, "at": P,
                          "guard": G?}
    {"op": "broadcast",   "value": O, "at": P}
    {"op": "move",        "token": L, "path": [P...], "guard": G?}

A guard is {"called": [name...], "not_called": [name...]}; it is evaluated
against the scenario's call pattern at the event's decision point (a move's
first waypoint), where every named call point must be causally visible.
Each split is an independent additive share of its source, so holding every
part of one split reveals the key and holding fewer reveals nothing.

Plans never draw randomness: key values, outcomes, and states are the
simulator's business.  Planning the same task twice gives identical plans.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .geometry import (Diamond, Point, Region, causal_leq,
                       earliest_point_after, escape_exists,
                       extract_escape_path, from_lightcone, point,
                       to_lightcone)
from .model import TaskSpec
from .feasibility import check_task

Guard = dict
Event = dict


class PlanningError(RuntimeError):
    """The task cannot be planned (infeasible, unsupported, or refused)."""


@dataclass
class Plan:
    kind: str
    task: TaskSpec
    events: list[Event]
    notes: list[str] = field(default_factory=list)

    def to_json(self, indent: int = 2) -> str:
        def enc(x):
            if isinstance(x, Point):
                return [x.t, *x.x]
            if isinstance(x, dict):
                return {k: enc(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [enc(v) for v in x]
            return x
        body = {"kind": self.kind,
                "notes": self.notes,
                "events": [enc(e) for e in self.events]}
        return json.dumps(body, indent=indent)

    def lines(self) -> list[str]:
        out = [f"plan for {self.kind} task: {len(self.events)} events"]
        out.extend(f"  {n}" for n in self.notes)
        return out


def plan_task(task: TaskSpec) -> Plan:
    """Synthesize a protocol for a feasible task; deterministic."""
    verdict = check_task(task)
    if not verdict.feasible:
        raise PlanningError("the checker rejected the task:\n" +
                            "\n".join(verdict.lines()[1:]))
    if task.kind == "localize_exclude":
        return _plan_localize_exclude(task)
    if task.kind == "state_assembly":
        return _plan_assembly(task)
    if task.kind == "summoning":
        if task.variant == "single_call_single_return":
            return _plan_single_call(task)
        if task.variant == "multiple_call_multiple_return":
            raise PlanningError(
                "multiple-call summoning is planned as a state_assembly "
                "task over the same diamonds; rewrite the task kind")
        raise PlanningError(
            "unrestricted summoning admits no finite event schedule here; "
            "the feasibility check is the supported surface")
    if task.kind == "pit":
        return _plan_pit(task)
    raise PlanningError(
        "abstract access structures are planned after embedding; "
        "run embed first")


# --------------------------------------------------------------------
# shared geometry helpers
# --------------------------------------------------------------------


def _decision_point(da: Diamond, db: Diamond,
                    also_after: Point | None = None) -> Point | None:
    """A point seeing both call points and preceding both returns.

    In one spatial dimension the light-cone componentwise maximum of the
    call points is the canonical choice and is complete: if it fails, no
    point works.  In higher dimensions the corner barycenter is tried and
    verified; failure there only means this pair is not used.
    """
    if da.dim == 1:
        ua, va = to_lightcone(da.c)
        ub, vb = to_lightcone(db.c)
        u, v = max(ua, ub), max(va, vb)
        if also_after is not None:
            us, vs = to_lightcone(also_after)
            u, v = max(u, us), max(v, vs)
        p = from_lightcone(u, v)
    else:
        coords = [da.c, db.c, da.r, db.r]
        t = sum(q.t for q in coords) / 4
        xs = tuple(sum(q.x[i] for q in coords) / 4 for i in range(da.dim))
        p = Point(t, xs)
        if also_after is not None and not causal_leq(also_after, p):
            return None
    for pre in (da.c, db.c):
        if not causal_leq(pre, p):
            return None
    if also_after is not None and not causal_leq(also_after, p):
        return None
    for post in (da.r, db.r):
        if not causal_leq(p, post):
            return None
    return p


def _guard_point(task: TaskSpec, start: Point, guard: Guard,
                 dest: Diamond) -> Point:
    """A waypoint that sees every call named in a guard, is reachable from
    the start, and still precedes the delivery return.

    One spatial dimension takes the light-cone join of the start and the
    named call points, which is complete.  Higher dimensions try the call
    points themselves and the corner barycenter of the named diamonds.
    """
    names = [*guard.get("called", ()), *guard.get("not_called", ())]
    ds = [task.diamonds[nm] for nm in names]

    def good(p: Point) -> bool:
        return (causal_leq(start, p) and causal_leq(p, dest.r)
                and all(causal_leq(dd.c, p) for dd in ds))

    if task.dim == 1:
        us, vs = zip(*(to_lightcone(q) for q in [start] + [dd.c for dd in ds]))
        p = from_lightcone(max(us), max(vs))
        if good(p):
            return p
    else:
        cands = [dd.c for dd in ds]
        if len(ds) > 1:
            corners = [q for dd in ds for q in (dd.c, dd.r)]
            t = sum(q.t for q in corners) / len(corners)
            xs = tuple(sum(q.x[i] for q in corners) / len(corners)
                       for i in range(task.dim))
            cands.insert(0, Point(t, xs))
        for p in cands:
            if good(p):
                return p
    raise PlanningError(
        "no waypoint sees the calls of " + ", ".join(names) +
        " before the release diamond's return")


def _base_point(anchors: Sequence[Point]) -> Point:
    """A point in the common causal past of all anchors."""
    first = anchors[0]
    if first.dim == 1:
        us, vs = zip(*(to_lightcone(a) for a in anchors))
        return from_lightcone(min(us) - 2.0, min(vs) - 2.0)
    x0 = first.x
    t0 = min(a.t - _dist(x0, a.x) for a in anchors) - 1.0
    return Point(t0, x0)


def _dist(xa: tuple, xb: tuple) -> float:
    return sum((p - q) ** 2 for p, q in zip(xa, xb)) ** 0.5


def _earliest_entry(region: Region, start: Point
                    ) -> tuple[Diamond, Point] | None:
    for d in region.diamonds:
        p = earliest_point_after(d, start)
        if p is not None:
            return d, p
    return None


# --------------------------------------------------------------------
# localize-exclude
# --------------------------------------------------------------------


def _plan_localize_exclude(task: TaskSpec) -> Plan:
    if task.dim != 1:
        raise PlanningError(
            "localize-exclude planning routes classical keys along exact "
            "light-cone escape paths and supports one spatial dimension")
    assert task.start is not None
    start = task.start
    d = task.secret_dim
    auth = [(task.set_label(s), task.region_union(s)) for s in task.authorized]
    excl = [(task.set_label(s), task.region_union(s)) for s in task.unauthorized]
    n, m = len(auth), len(excl)
    if n > 3:
        raise PlanningError(
            "pairwise channel coding is implemented for up to three "
            "authorized collections; use scheme_cost for the general scaling")
    if n == 3 and task.secret_dim != 3:
        raise PlanningError(
            "three collections ride the 2-of-3 qutrit code: secret_dim "
            "must be 3")

    events: list[Event] = []
    notes: list[str] = []
    events.append({"op": "source", "label": "psi", "at": start})

    # share per pairwise channel (or the secret itself when alone)
    if n == 1:
        edges = [("psi", [auth[0]])]
        notes.append("single collection: the padded state travels directly")
    elif n == 2:
        edges = [("psi", [auth[0], auth[1]])]
        notes.append("two collections: one shared channel carries the state")
    else:
        pair_list = list(itertools.combinations(range(3), 2))
        shares = [f"sh{i}" for i in range(3)]
        events.append({"op": "encode", "code": "edge23", "input": "psi",
                       "outputs": shares, "at": start})
        edges = [(shares[i], [auth[a], auth[b]])
                 for i, (a, b) in enumerate(pair_list)]
        notes.append("three collections: 2-of-3 qutrit shares, one per "
                     "channel; each collection decodes from its two")

    # escape curves, computed up front so the key origin can precede them
    ib_curves: dict[str, list[Point]] = {}
    iii_curves: dict[tuple[str, str], list[Point]] = {}
    for lu, ru in excl:
        ib_curves[lu] = extract_escape_path(start, ru.diamonds)
        for la, ra in auth:
            iii_curves[la, lu] = extract_escape_path(ra, ru.diamonds)

    anchor_pts: list[Point] = [start]
    for curve in ib_curves.values():
        anchor_pts.append(curve[0])
    for curve in iii_curves.values():
        anchor_pts.append(curve[0])
    base = _base_point(anchor_pts)

    for idx, (share, targets) in enumerate(edges):
        key = f"k{idx}"
        events.append({"op": "key", "name": key, "at": base})
        # the encrypting copy rides the start's own escape curves
        parts = [f"{key}.s{l}" for l in range(max(m, 1))]
        events.append({"op": "split", "source": key, "parts": parts,
                       "at": base})
        if m == 0:
            events.append({"op": "move", "token": parts[0],
                           "path": [base, start]})
        else:
            # each part rides the full escape curve; it passes through the
            # start, where the pad consumes the reassembled key
            for l, (lu, _) in enumerate(excl):
                events.append({"op": "move", "token": parts[l],
                               "path": [base] + ib_curves[lu]})
        events.append({"op": "pad", "token": share, "key": key, "at": start})

        for la, region in targets:
            parts = [f"{key}.{la}.{l}" for l in range(max(m, 1))]
            events.append({"op": "split", "source": key, "parts": parts,
                           "at": base})
            if m == 0:
                entry = _earliest_entry(region, start)
                assert entry is not None
                events.append({"op": "move", "token": parts[0],
                               "path": [base, start, entry[1]]})
            else:
                for l, (lu, _) in enumerate(excl):
                    curve = iii_curves[la, lu]
                    events.append({"op": "move", "token": parts[l],
                                   "path": [base] + curve})
            notes.append(f"key {key}: copy for {la} in {max(m, 1)} "
                         "independently routed parts")

        _route_cipher(task, events, notes, share, idx, start, base,
                      [t for t in targets])

    return Plan("localize_exclude", task, events, notes)


def _route_cipher(task: TaskSpec, events: list[Event], notes: list[str],
                  share: str, idx: int, start: Point, base: Point,
                  targets: list[tuple[str, Region]]) -> None:
    """Send one padded share through every target region, directly if a
    causal chain exists, else by teleporting onto a half-pair whose
    worldline threads a connected diamond of each region."""
    if len(targets) == 1:
        la, region = targets[0]
        entry = _earliest_entry(region, start)
        assert entry is not None  # condition I_A
        events.append({"op": "move", "token": share,
                       "path": [start, entry[1]]})
        notes.append(f"channel {idx}: ciphertext direct to {la}")
        return

    (la, ra), (lb, rb) = targets
    for first, second in (((la, ra), (lb, rb)), ((lb, rb), (la, ra))):
        chain = None
        for d1 in first[1].diamonds:
            p = earliest_point_after(d1, start)
            if p is None:
                continue
            for d2 in second[1].diamonds:
                q = earliest_point_after(d2, p)
                if q is not None:
                    chain = (p, q)
                    break
            if chain:
                break
        if chain:
            events.append({"op": "move", "token": share,
                           "path": [start, chain[0], chain[1]]})
            notes.append(f"channel {idx}: ciphertext direct "
                         f"{first[0]} then {second[0]}")
            return

    # no direct chain: thread a pre-placed half-pair through a connected
    # diamond of each region and teleport the ciphertext onto it
    witness = None
    for dfrom in ra.diamonds:
        for dto in rb.diamonds:
            if causal_leq(dfrom.c, dto.r):
                witness = (dfrom, dto)
                break
            if causal_leq(dto.c, dfrom.r):
                witness = (dto, dfrom)
                break
        if witness:
            break
    assert witness is not None  # condition II
    dfrom, dto = witness
    pair_base = _base_point([base, dfrom.c])
    ehalf, ghost = f"E{idx}", f"E{idx}~"
    events.append({"op": "create_pair", "labels": [ehalf, ghost],
                   "at": pair_base})
    events.append({"op": "move", "token": ehalf,
                   "path": [pair_base, start]})
    events.append({"op": "move", "token": ghost,
                   "path": [pair_base, dfrom.c, dto.r]})
    events.append({"op": "bell", "pair": [share, ehalf],
                   "outcome": f"o{idx}", "at": start})
    events.append({"op": "broadcast", "value": f"o{idx}", "at": start})
    notes.append(f"channel {idx}: no direct chain; ciphertext teleported "
                 f"onto a half-pair threading {la} and {lb}")


# --------------------------------------------------------------------
# state assembly
# --------------------------------------------------------------------


def _plan_assembly(task: TaskSpec) -> Plan:
    assert task.start is not None
    start = task.start
    auth = [(task.set_label(s), list(s)) for s in task.authorized]
    excl = [(task.set_label(s), list(s)) for s in task.unauthorized]
    n, m = len(auth), len(excl)
    if n > 3:
        raise PlanningError(
            "pairwise channel coding is implemented for up to three "
            "authorized collections; use scheme_cost for the general scaling")
    if n == 3 and task.secret_dim != 3:
        raise PlanningError(
            "three collections ride the 2-of-3 qutrit code: secret_dim "
            "must be 3")

    events: list[Event] = []
    notes: list[str] = []
    events.append({"op": "source", "label": "psi", "at": start})

    if n == 1:
        edges = [("psi", [0])]
    elif n == 2:
        edges = [("psi", [0, 1])]
    else:
        shares = [f"sh{i}" for i in range(3)]
        events.append({"op": "encode", "code": "edge23", "input": "psi",
                       "outputs": shares, "at": start})
        edges = [(shares[i], list(pair))
                 for i, pair in enumerate(itertools.combinations(range(3), 2))]

    for idx, (share, members) in enumerate(edges):
        key = f"k{idx}"
        events.append({"op": "key", "name": key, "at": start})
        events.append({"op": "pad", "token": share, "key": key, "at": start})

        for ai in members:
            la, names = auth[ai]
            parts = [f"{key}.{la}.{l}" for l in range(max(m, 1))]
            events.append({"op": "split", "source": key, "parts": parts,
                           "at": start})
            rules = ([_release_rule(task, names, ())] if m == 0 else
                     [_release_rule(task, names, unames)
                      for _, unames in excl])
            for l, (dname, guard) in enumerate(rules):
                dest = task.diamonds[dname]
                gp = _guard_point(task, start, guard, dest)
                events.append({"op": "move", "token": parts[l],
                               "path": [start, gp]})
                events.append({"op": "move", "token": parts[l],
                               "path": [gp, dest.r], "guard": guard})
            notes.append(f"key {key}: copy for {la} released only at "
                         "called diamonds, one part per excluded collection")

        _route_assembly_cipher(task, events, notes, share, idx, start,
                               [auth[ai] for ai in members])

    return Plan("state_assembly", task, events, notes)


def _release_rule(task: TaskSpec, auth_names: Sequence[str],
                  excl_names: Sequence[str]) -> tuple[str, Guard]:
    """Pick the diamond and call predicate releasing one key part.

    If the authorized collection owns a diamond outside the excluded one,
    release there whenever it is called.  Otherwise release at a member
    whose return sees a call point private to the excluded collection, and
    withhold when any such visible private call fired.
    """
    assert task.start is not None
    extra = [nm for nm in auth_names if nm not in excl_names]
    for nm in extra:
        if causal_leq(task.start, task.diamonds[nm].r):
            return nm, {"called": [nm]}
    private = [nm for nm in excl_names if nm not in auth_names]
    for nm in auth_names:
        if not causal_leq(task.start, task.diamonds[nm].r):
            continue
        r = task.diamonds[nm].r
        visible = [pe for pe in private
                   if causal_leq(task.diamonds[pe].c, r)]
        if visible:
            return nm, {"called": [nm], "not_called": visible}
    raise PlanningError(
        "no release diamond sees a call distinguishing "
        f"{'+'.join(auth_names)} from {'+'.join(excl_names)}")


def _route_assembly_cipher(task: TaskSpec, events: list[Event],
                           notes: list[str], share: str, idx: int,
                           start: Point,
                           targets: list[tuple[str, list[str]]]) -> None:
    if len(targets) == 1:
        la, names = targets[0]
        for nm in names:
            if causal_leq(start, task.diamonds[nm].r):
                events.append({"op": "move", "token": share,
                               "path": [start, task.diamonds[nm].r]})
                notes.append(f"channel {idx}: ciphertext direct to {nm}")
                return
        raise PlanningError(f"ciphertext cannot reach {la}")

    (la, names_a), (lb, names_b) = targets
    for na in names_a:
        for nb in names_b:
            p = _decision_point(task.diamonds[na], task.diamonds[nb],
                                also_after=start)
            if p is None:
                continue
            events.append({"op": "move", "token": share, "path": [start, p]})
            events.append({"op": "move", "token": share,
                           "path": [p, task.diamonds[na].r],
                           "guard": {"called": [na], "not_called": [nb]}})
            events.append({"op": "move", "token": share,
                           "path": [p, task.diamonds[nb].r],
                           "guard": {"called": [nb], "not_called": [na]}})
            notes.append(f"channel {idx}: ciphertext held at a point seeing "
                         f"calls of {na} and {nb}, handed to whichever is "
                         "called alone")
            return
    raise PlanningError(
        f"no diamond pair of {la} and {lb} admits a common decision point "
        "reachable from the start")


# --------------------------------------------------------------------
# summoning
# --------------------------------------------------------------------


def _plan_single_call(task: TaskSpec) -> Plan:
    assert task.start is not None
    names = sorted(task.diamonds)
    n = len(names)
    if n > 3:
        raise PlanningError(
            "single-call summoning planning covers up to three diamonds")
    if n == 2:
        return _plan_two_diamond(task, names)
    if n == 1:
        return _plan_chain(task, names)
    rot = _plan_rotation(task, names)
    if rot is not None:
        return rot
    for order in itertools.permutations(names):
        if _chain_ok(task, order):
            return _plan_chain(task, list(order))
    raise PlanningError("no rotation or relay order fits; the connectivity "
                        "verdict should have caught this")


def _sees(task: TaskSpec, caller: str, returner: str) -> bool:
    return causal_leq(task.diamonds[caller].c, task.diamonds[returner].r)


def _plan_two_diamond(task: TaskSpec, names: list[str]) -> Plan:
    assert task.start is not None
    start = task.start
    decider = None
    for nm in names:
        if all(_sees(task, nm, other) for other in names):
            decider = nm
            break
    assert decider is not None  # condition II with both self-links
    other = next(nm for nm in names if nm != decider)
    dd = task.diamonds[decider]
    base = _base_point([start, dd.c])
    events: list[Event] = [
        {"op": "source", "label": "psi", "at": start},
        {"op": "create_pair", "labels": ["F0", "F0~"], "at": base},
        {"op": "move", "token": "F0", "path": [base, start]},
        {"op": "move", "token": "F0~", "path": [base, dd.c]},
        {"op": "bell", "pair": ["psi", "F0"], "outcome": "t0", "at": start},
        {"op": "broadcast", "value": "t0", "at": start},
        {"op": "move", "token": "F0~", "path": [dd.c, dd.r],
         "guard": {"called": [decider]}},
        {"op": "move", "token": "F0~",
         "path": [dd.c, task.diamonds[other].r],
         "guard": {"not_called": [decider]}},
    ]
    notes = [f"state teleported onto a half-pair waiting at {decider}'s "
             "call point, which sees both returns",
             f"called there: delivered at {decider}'s return; otherwise "
             f"carried to {other}'s return"]
    return Plan("summoning", task, events, notes)


def _plan_rotation(task: TaskSpec, names: list[str]) -> Plan | None:
    assert task.start is not None
    if task.secret_dim != 3:
        return None  # the ring uses the qutrit code; a relay can still work
    start = task.start
    order = None
    for perm in (names, [names[0], names[2], names[1]]):
        if all(_sees(task, perm[i], perm[(i + 1) % 3]) for i in range(3)):
            order = perm
            break
    if order is None:
        return None
    events: list[Event] = [{"op": "source", "label": "psi", "at": start}]
    shares = [f"sh{i}" for i in range(3)]
    events.append({"op": "encode", "code": "edge23", "input": "psi",
                   "outputs": shares, "at": start})
    notes = [f"ring order {' -> '.join(order)}: each share waits at its "
             "diamond's call point, staying for a local call and otherwise "
             "passing to the next return"]
    for i, nm in enumerate(order):
        dd = task.diamonds[nm]
        nxt = task.diamonds[order[(i + 1) % 3]]
        if causal_leq(start, dd.c):
            events.append({"op": "move", "token": shares[i],
                           "path": [start, dd.c]})
            carrier = shares[i]
        else:
            base = _base_point([start, dd.c])
            events.append({"op": "create_pair",
                           "labels": [f"F{i}", f"F{i}~"], "at": base})
            events.append({"op": "move", "token": f"F{i}",
                           "path": [base, start]})
            events.append({"op": "move", "token": f"F{i}~",
                           "path": [base, dd.c]})
            events.append({"op": "bell", "pair": [shares[i], f"F{i}"],
                           "outcome": f"t{i}", "at": start})
            events.append({"op": "broadcast", "value": f"t{i}", "at": start})
            carrier = f"F{i}~"
            notes.append(f"share for {nm} teleported to its call point")
        events.append({"op": "move", "token": carrier, "path": [dd.c, dd.r],
                       "guard": {"called": [nm]}})
        events.append({"op": "move", "token": carrier, "path": [dd.c, nxt.r],
                       "guard": {"not_called": [nm]}})
    return Plan("summoning", task, events, notes)


def _chain_ok(task: TaskSpec, order: Sequence[str]) -> bool:
    return all(_sees(task, order[i], order[k])
               for i in range(len(order)) for k in range(i + 1, len(order)))


def _plan_chain(task: TaskSpec, order: list[str]) -> Plan:
    """Relay plan for a transitively ordered line of diamonds.

    A half-pair waits at every call point except the last.  The state is
    teleported onto the first; each station keeps it for a local call and
    otherwise teleports it one station down (the bell is guarded by the
    local call bit alone).  The last station is reached by the previous
    one's carry move, so it needs no pair of its own.  Every return sees
    every broadcast it needs because earlier call points precede later
    returns in the relay order.
    """
    assert task.start is not None
    start = task.start
    events: list[Event] = [{"op": "source", "label": "psi", "at": start}]
    notes = [f"relay order {' -> '.join(order)}"]
    prev_token, prev_at = "psi", start
    for i, nm in enumerate(order):
        if i == len(order) - 1 and i > 0:
            break  # served by the previous station's carry move
        dd = task.diamonds[nm]
        base = _base_point([prev_at, dd.c])
        events.append({"op": "create_pair", "labels": [f"F{i}", f"F{i}~"],
                       "at": base})
        events.append({"op": "move", "token": f"F{i}",
                       "path": [base, prev_at]})
        events.append({"op": "move", "token": f"F{i}~",
                       "path": [base, dd.c]})
        bell: Event = {"op": "bell", "pair": [prev_token, f"F{i}"],
                       "outcome": f"t{i}", "at": prev_at}
        if i > 0:
            bell["guard"] = {"not_called": [order[i - 1]]}
        events.append(bell)
        events.append({"op": "broadcast", "value": f"t{i}", "at": prev_at})
        events.append({"op": "move", "token": f"F{i}~",
                       "path": [dd.c, dd.r], "guard": {"called": [nm]}})
        if i + 1 < len(order):
            nxt = order[i + 1]
            if i + 1 == len(order) - 1:
                events.append({"op": "move", "token": f"F{i}~",
                               "path": [dd.c, task.diamonds[nxt].r],
                               "guard": {"not_called": [nm]}})
        prev_token, prev_at = f"F{i}~", dd.c
    return Plan("summoning", task, events, notes)


# --------------------------------------------------------------------
# party-independent transfer
# --------------------------------------------------------------------


def _plan_pit(task: TaskSpec) -> Plan:
    assert task.start is not None
    if task.secret_dim != 3:
        raise PlanningError("transfer rides the 2-of-3 qutrit code: "
                            "secret_dim must be 3")
    start = task.start
    events: list[Event] = [{"op": "source", "label": "psi", "at": start}]
    shares = [f"sh{i}" for i in range(3)]
    events.append({"op": "encode", "code": "edge23", "input": "psi",
                   "outputs": shares, "at": start})
    notes = ["one 2-of-3 share per diamond pair, held at a point seeing "
             "both parties' calls and handed to whichever called alone"]
    for i, (pname, d1, d2) in enumerate(task.pit_pairs()):
        p = _decision_point(d1, d2, also_after=start)
        if p is None:
            raise PlanningError(
                f"pair {pname!r} admits no common decision point")
        n1, n2 = f"{pname}1", f"{pname}2"
        events.append({"op": "move", "token": shares[i], "path": [start, p]})
        events.append({"op": "move", "token": shares[i],
                       "path": [p, d1.r],
                       "guard": {"called": [n1], "not_called": [n2]}})
        events.append({"op": "move", "token": shares[i],
                       "path": [p, d2.r],
                       "guard": {"called": [n2], "not_called": [n1]}})
    return Plan("pit", task, events, notes)

"""Execute a plan over its scenario battery and certify it numerically.

The simulator is exact where exactness is cheap.  Per scenario the control
layer (guards tested against the call pattern) fixes which events fire; the
quantum layer then evolves one dense state vector through them.  Pad keys
are enumerated exhaustively while there are few and sampled beyond that,
with an exact Weyl twirl standing in on the exclusion side.  Bell
measurements are collapsed onto the (0, 0) outcome: measuring any slot
against half of a fresh maximally entangled pair gives uniform outcome
probabilities, and the post-measurement states of the d*d outcomes differ
only by a known Weyl operator on the far half, which the later correction
undoes — so every reported fidelity and leak equals its average over
outcomes.  The engine asserts the uniformity it relies on rather than
assuming it.

Collection semantics differ by task family.  A localize-exclude region
possesses whatever crosses it: a token is collected if any fired segment
of its worldline intersects the region.  Assembly, summoning, and transfer
collections are caller groups served by sealed couriers: they receive
exactly the handovers — guarded moves that fired into their region, and
unguarded moves ending exactly on one of their return corners — plus any
broadcast whose origin can reach them.  A key counts as known once every
part of one of its split copies is in view.

Reconstruction is scored as squared fidelity with the maximally entangled
reference pair; exclusion as the trace distance between the collected view
(jointly with the reference slot) and the same view with the reference
maximally mixed, averaged over the classical values the collection holds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import qsim, schemes
from .geometry import (Diamond, Point, Region, causal_leq, path_is_causal,
                       region_in_future, worldline_intersects_region)
from .model import TaskSpec
from .planner import Plan

_MAX_PATTERNS = 4096
_UNIFORMITY_TOL = 1e-9


class EngineError(RuntimeError):
    """A plan failed an audit: it is malformed, acausal, or inconsistent."""


# --------------------------------------------------------------------
# report structures
# --------------------------------------------------------------------


def _fmt_calls(calls: Iterable[str]) -> str:
    return "{" + ", ".join(calls) + "}"


@dataclass
class CollectorResult:
    label: str
    role: str                      # "deliver" or "exclude"
    fidelity: float | None = None
    leak: float | None = None
    reconstructed: bool | None = None
    ok: bool = True

    def line(self) -> str:
        if self.role == "deliver":
            return f"deliver {self.label}: fidelity {self.fidelity:.9f}"
        tail = "" if self.reconstructed is None else (
            ", reconstruction " + ("possible" if self.reconstructed
                                   else "absent"))
        return f"exclude {self.label}: leak {self.leak:.2e}{tail}"


@dataclass
class ScenarioResult:
    calls: tuple[str, ...]
    collectors: list[CollectorResult] = field(default_factory=list)
    chi_probability: float | None = None
    fired: tuple[int, ...] = ()


@dataclass
class SimulationReport:
    kind: str
    seed: int
    tol: float
    scenarios: list[ScenarioResult]
    min_fidelity: float | None
    max_leak: float | None
    min_chi: float | None
    passed: bool
    notes: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"simulated {self.kind} plan: {len(self.scenarios)} "
               f"scenario(s), tol {self.tol:g}"]
        shown = 0
        for sc in self.scenarios:
            if not sc.collectors and sc.chi_probability is None:
                continue
            if shown >= 24:
                out.append("  ...")
                break
            shown += 1
            bits = [c.line() for c in sc.collectors]
            if sc.chi_probability is not None:
                bits.append(
                    f"check passes with prob {sc.chi_probability:.9f}")
            out.append(f"  calls {_fmt_calls(sc.calls)}: " + "; ".join(bits))
        if self.min_fidelity is not None:
            out.append(f"worst fidelity {self.min_fidelity:.9f}")
        if self.max_leak is not None:
            out.append(f"worst leak {self.max_leak:.2e}")
        if self.min_chi is not None:
            out.append(f"worst check probability {self.min_chi:.9f}")
        out.extend(f"note: {n}" for n in self.notes)
        out.append("PASS" if self.passed else "FAIL")
        return out


# --------------------------------------------------------------------
# static plan audit
# --------------------------------------------------------------------


_OPS = {"source", "encode", "create_pair", "key", "split", "pad", "bell",
        "broadcast", "move"}


def _guard_names(guard: dict | None) -> list[str]:
    if not guard:
        return []
    return [*guard.get("called", ()), *guard.get("not_called", ())]


def validate_plan(plan: Plan) -> None:
    """Audit a plan without running it.

    Checks event shapes, token continuity (every move starts where its
    token rests), causal move paths, guard visibility (each named call
    point must causally precede the decision point), pairwise exclusivity
    of guarded branches of the same quantum token, pad-key availability at
    the pad point, and — for localize-exclude plans — that the key part
    routed against each excluded region never touches it.  Raises
    EngineError with a specific message on the first violation.
    """
    task = plan.task
    qpos: dict[str, Point] = {}
    qguards: dict[str, list[dict]] = {}
    qbranched: set[str] = set()
    cpos: dict[str, Point] = {}
    cpaths: dict[str, list[list[Point]]] = {}
    keys: dict[str, Point] = {}
    splits: list[tuple[str, list[str]]] = []
    outcomes: dict[str, Point] = {}
    pair_of: dict[str, str] = {}
    sourced = False

    def check_guard(guard: dict | None, at: Point, what: str) -> None:
        for nm in _guard_names(guard):
            if nm not in task.diamonds:
                raise EngineError(
                    f"{what}: guard names unknown diamond {nm!r}")
            if not causal_leq(task.diamonds[nm].c, at):
                raise EngineError(
                    f"{what}: the call of {nm} is not visible at the "
                    "decision point")

    def note_qguard(label: str, guard: dict, what: str) -> None:
        for other in qguards.setdefault(label, []):
            exclusive = (
                set(other.get("called", ())) & set(guard.get("not_called", ()))
                or set(guard.get("called", ()))
                & set(other.get("not_called", ())))
            if not exclusive:
                raise EngineError(
                    f"{what}: token {label!r} has two guarded branches that "
                    "can fire together; a quantum token cannot be copied")
        qguards[label].append(guard)

    for i, ev in enumerate(plan.events):
        op = ev.get("op")
        what = f"event {i} ({op})"
        if op not in _OPS:
            raise EngineError(f"{what}: unknown op")
        if op == "source":
            if sourced:
                raise EngineError(f"{what}: a plan has a single source")
            sourced = True
            if ev["label"] == "ref":
                raise EngineError(f"{what}: the label 'ref' is reserved")
            qpos[ev["label"]] = ev["at"]
        elif op == "encode":
            if qpos.get(ev["input"]) != ev["at"]:
                raise EngineError(
                    f"{what}: input does not rest at the encode point")
            del qpos[ev["input"]]
            for out in ev["outputs"]:
                qpos[out] = ev["at"]
        elif op == "create_pair":
            la, lb = ev["labels"]
            pair_of[la], pair_of[lb] = lb, la
            qpos[la] = qpos[lb] = ev["at"]
        elif op == "key":
            keys[ev["name"]] = ev["at"]
        elif op == "split":
            if ev["source"] not in keys:
                raise EngineError(f"{what}: split of an unknown key")
            if not causal_leq(keys[ev["source"]], ev["at"]):
                raise EngineError(f"{what}: split precedes its key")
            for part in ev["parts"]:
                if part in cpos:
                    raise EngineError(
                        f"{what}: part {part!r} already exists")
                cpos[part] = ev["at"]
                cpaths[part] = [[ev["at"]]]
            splits.append((ev["source"], list(ev["parts"])))
        elif op == "pad":
            if qpos.get(ev["token"]) != ev["at"]:
                raise EngineError(
                    f"{what}: token does not rest at the pad point")
            if ev["key"] not in keys:
                raise EngineError(f"{what}: pad with an unknown key")
        elif op == "bell":
            la, lb = ev["pair"]
            for lab in (la, lb):
                if qpos.get(lab) != ev["at"]:
                    raise EngineError(
                        f"{what}: token {lab!r} does not rest at the "
                        "measurement point")
            if lb not in pair_of:
                raise EngineError(
                    f"{what}: second slot must be half of a created pair")
            check_guard(ev.get("guard"), ev["at"], what)
            if ev.get("guard"):
                note_qguard(la, ev["guard"], what)
                qbranched.add(la)
            outcomes[ev["outcome"]] = ev["at"]
            del qpos[la], qpos[lb]
        elif op == "broadcast":
            if ev["value"] not in outcomes:
                raise EngineError(
                    f"{what}: broadcast of an unknown outcome")
            if not causal_leq(outcomes[ev["value"]], ev["at"]):
                raise EngineError(f"{what}: broadcast precedes its outcome")
        elif op == "move":
            lab, path = ev["token"], ev["path"]
            if not path_is_causal(path):
                raise EngineError(f"{what}: move path is not causal")
            guard = ev.get("guard")
            check_guard(guard, path[0], what)
            if lab in qpos:
                if qpos[lab] != path[0]:
                    raise EngineError(
                        f"{what}: move does not start at the token's "
                        "resting position")
                if guard:
                    note_qguard(lab, guard, what)
                    qbranched.add(lab)
                else:
                    if lab in qbranched:
                        raise EngineError(
                            f"{what}: unguarded move after a guarded "
                            f"branch of {lab!r}")
                    qpos[lab] = path[-1]
            elif lab in cpos:
                if cpos[lab] != path[0]:
                    raise EngineError(
                        f"{what}: move does not start at the part's "
                        "resting position")
                if not guard:
                    cpos[lab] = path[-1]
                    cpaths[lab].append(list(path))
            else:
                raise EngineError(
                    f"{what}: move of an unknown token {lab!r}")

    # pad-key availability: the key is born at the pad point, or a complete
    # split copy passes through it along unguarded moves.
    for i, ev in enumerate(plan.events):
        if ev.get("op") != "pad":
            continue
        key, at = ev["key"], ev["at"]
        if keys[key] == at:
            continue
        spot = Diamond(at, at)
        if not any(
            src == key and all(
                any(worldline_intersects_region(p, spot) for p in cpaths[part])
                for part in parts)
            for src, parts in splits
        ):
            raise EngineError(
                f"event {i} (pad): key {key!r} has no complete copy "
                "passing through the pad point")

    # localize-exclude: the part routed against each excluded region must
    # avoid it along its whole worldline.
    if task.kind == "localize_exclude" and task.unauthorized:
        m = len(task.unauthorized)
        zones = [task.region_union(s) for s in task.unauthorized]
        for src, parts in splits:
            if len(parts) != m:
                continue
            for l, part in enumerate(parts):
                for p in cpaths[part]:
                    if worldline_intersects_region(p, zones[l]):
                        raise EngineError(
                            f"part {part!r} crosses the excluded region "
                            "it is routed against")


# --------------------------------------------------------------------
# one scenario, one key assignment
# --------------------------------------------------------------------


@dataclass
class _QTok:
    label: str
    alive: bool = True
    plain: bool = False
    share: int | None = None
    stack: list = field(default_factory=list)
    partner: str | None = None
    pos: Point | None = None
    paths: list = field(default_factory=list)       # fired polylines
    handovers: list = field(default_factory=list)   # (endpoint, guarded)
    branched: int = 0


@dataclass
class _CTok:
    label: str
    pos: Point
    paths: list = field(default_factory=list)
    handovers: list = field(default_factory=list)


@dataclass
class _Trace:
    state: qsim.State | None = None
    q: dict = field(default_factory=dict)
    c: dict = field(default_factory=dict)
    splits: list = field(default_factory=list)      # (key, [parts])
    casts: list = field(default_factory=list)       # (outcome, origin)
    outcomes: set = field(default_factory=set)
    fired: list = field(default_factory=list)


def _guard_ok(guard: dict | None, calls: frozenset[str]) -> bool:
    if not guard:
        return True
    return (all(nm in calls for nm in guard.get("called", ()))
            and all(nm not in calls for nm in guard.get("not_called", ())))


def _run(plan: Plan, calls: frozenset[str],
         key_values: dict[str, tuple[int, int]]) -> _Trace:
    """Execute the schedule for one call pattern and key assignment."""
    d = plan.task.secret_dim
    tr = _Trace()

    def need_q(label: str, at: Point, what: str) -> _QTok:
        tok = tr.q.get(label)
        if tok is None or not tok.alive:
            raise EngineError(
                f"{what}: quantum token {label!r} is not alive")
        if tok.pos != at:
            raise EngineError(
                f"{what}: token {label!r} rests at {tok.pos}, not {at}")
        return tok

    for i, ev in enumerate(plan.events):
        op = ev["op"]
        what = f"event {i} ({op})"
        if op == "source":
            lab = ev["label"]
            tr.state = qsim.maximally_entangled(d, ("ref", lab))
            tr.q[lab] = _QTok(lab, plain=True, pos=ev["at"],
                              paths=[[ev["at"]]])
        elif op == "encode":
            tok = need_q(ev["input"], ev["at"], what)
            if d != 3:
                raise EngineError(
                    f"{what}: the 2-of-3 code is a qutrit code")
            tr.state = schemes.code23_encode(tr.state, tok.label,
                                             ev["outputs"])
            tok.alive = False
            for idx, out in enumerate(ev["outputs"]):
                tr.q[out] = _QTok(out, share=idx, pos=ev["at"],
                                  paths=[[ev["at"]]])
        elif op == "create_pair":
            la, lb = ev["labels"]
            pair = qsim.maximally_entangled(d, (la, lb))
            tr.state = pair if tr.state is None else tr.state.tensor(pair)
            tr.q[la] = _QTok(la, partner=lb, pos=ev["at"],
                             paths=[[ev["at"]]])
            tr.q[lb] = _QTok(lb, partner=la, pos=ev["at"],
                             paths=[[ev["at"]]])
        elif op == "key":
            pass
        elif op == "split":
            tr.splits.append((ev["source"], list(ev["parts"])))
            for part in ev["parts"]:
                tr.c[part] = _CTok(part, pos=ev["at"], paths=[[ev["at"]]])
        elif op == "pad":
            tok = need_q(ev["token"], ev["at"], what)
            a, b = key_values[ev["key"]]
            tr.state = qsim.apply_weyl(tr.state, tok.label, a, b)
            tok.stack.append(("pad", ev["key"]))
        elif op == "bell":
            if not _guard_ok(ev.get("guard"), calls):
                continue
            tr.fired.append(i)
            la, lb = ev["pair"]
            ta = need_q(la, ev["at"], what)
            tb = need_q(lb, ev["at"], what)
            if ev.get("guard"):
                ta.branched += 1
                if ta.branched > 1:
                    raise EngineError(
                        f"{what}: token {la!r} branched twice")
            ghost = tr.q.get(tb.partner or "")
            if ghost is None or not ghost.alive:
                raise EngineError(
                    f"{what}: measured half has no living partner")
            prob, post = qsim.bell_project(tr.state, la, lb, 0, 0)
            if abs(prob * d * d - 1.0) > _UNIFORMITY_TOL:
                raise EngineError(
                    f"{what}: outcome probabilities are not uniform "
                    f"(p00*d^2 = {prob * d * d:.6f}); collapsing onto one "
                    "outcome would be unsound")
            tr.state = post
            ta.alive = tb.alive = False
            ghost.plain = ta.plain
            ghost.share = ta.share
            ghost.stack = ta.stack + [("teleport", ev["outcome"])]
            tr.outcomes.add(ev["outcome"])
        elif op == "broadcast":
            if ev["value"] in tr.outcomes:
                tr.fired.append(i)
                tr.casts.append((ev["value"], ev["at"]))
        elif op == "move":
            lab, path = ev["token"], ev["path"]
            guard = ev.get("guard")
            if not _guard_ok(guard, calls):
                continue
            tr.fired.append(i)
            if lab in tr.q:
                tok = need_q(lab, path[0], what)
                if guard:
                    tok.branched += 1
                    if tok.branched > 1:
                        raise EngineError(
                            f"{what}: token {lab!r} branched twice")
                tok.pos = path[-1]
                tok.paths.append(list(path))
                tok.handovers.append((path[-1], bool(guard)))
            else:
                ctk = tr.c[lab]
                if ctk.pos != path[0]:
                    raise EngineError(
                        f"{what}: part {lab!r} is not at the path start")
                if not guard:
                    # guarded branches carry copies; only unguarded moves
                    # advance the resting position
                    ctk.pos = path[-1]
                ctk.paths.append(list(path))
                ctk.handovers.append((path[-1], bool(guard)))
    return tr


# --------------------------------------------------------------------
# collection
# --------------------------------------------------------------------


@dataclass
class _View:
    slots: list[str]
    keys: set[str]
    outcomes: set[str]


def _handed_over(handovers: Sequence[tuple[Point, bool]],
                 region: Region) -> bool:
    returns = [dd.r for dd in region.diamonds]
    for endpoint, guarded in handovers:
        if guarded:
            if region.contains(endpoint):
                return True
        elif any(endpoint == r for r in returns):
            return True
    return False


def _collect(trace: _Trace, region: Region, geometric: bool) -> _View:
    slots = []
    parts = set()
    for lab, tok in trace.q.items():
        if not tok.alive:
            continue
        if geometric:
            hit = any(worldline_intersects_region(p, region)
                      for p in tok.paths)
        else:
            hit = _handed_over(tok.handovers, region)
        if hit:
            slots.append(lab)
    for lab, ctk in trace.c.items():
        if geometric:
            hit = any(worldline_intersects_region(p, region)
                      for p in ctk.paths)
        else:
            hit = _handed_over(ctk.handovers, region)
        if hit:
            parts.add(lab)
    known = {key for key, ps in trace.splits
             if all(p in parts for p in ps)}
    heard = {val for val, origin in trace.casts
             if region_in_future(region, origin)}
    return _View(sorted(slots), known, heard)


# --------------------------------------------------------------------
# scoring
# --------------------------------------------------------------------


def _undo(state: qsim.State, tok: _QTok,
          key_values: dict[str, tuple[int, int]]) -> qsim.State:
    for kind, name in reversed(tok.stack):
        if kind == "pad":
            a, b = key_values[name]
            w = qsim.weyl(state.register.dim(tok.label), a, b)
            state = qsim.apply_unitary(state, w.conj().T, [tok.label])
        else:
            # the collapsed outcome is (0, 0), whose correction is the
            # identity; applied anyway so the bookkeeping stays honest
            state = qsim.apply_weyl(state, tok.label, 0, 0)
    return state


def _reconstruct(trace: _Trace, view: _View,
                 key_values: dict[str, tuple[int, int]],
                 d: int) -> tuple[float, bool]:
    """Best decode from a view: (fidelity, whether a decode path existed)."""
    state = trace.state
    usable: list[_QTok] = []
    for lab in view.slots:
        tok = trace.q[lab]
        if all((name in view.keys) if kind == "pad"
               else (name in view.outcomes)
               for kind, name in tok.stack):
            usable.append(tok)
    for tok in usable:
        state = _undo(state, tok, key_values)
    secret = None
    plain = sorted((t for t in usable if t.plain), key=lambda t: t.label)
    if plain:
        secret = plain[0].label
    else:
        shares = sorted((t for t in usable if t.share is not None),
                        key=lambda t: (t.share, t.label))
        for ta, tb in itertools.combinations(shares, 2):
            if ta.share != tb.share:
                state = schemes.code23_decode(
                    state, (ta.share, tb.share), ta.label, tb.label)
                secret = ta.label
                break
    if secret is None:
        return 0.0, False
    dm = qsim.partial_trace(state, ["ref", secret])
    return qsim.fidelity(dm, qsim.maximally_entangled(d).vec), True


def _exclusion_dm(trace: _Trace, view: _View) -> np.ndarray:
    # reference slot last, so tracing out the tail leaves the view alone
    return qsim.partial_trace(trace.state, view.slots + ["ref"])


def _leak_of(dm: np.ndarray, d: int) -> float:
    n = dm.shape[0] // d
    red = np.trace(dm.reshape(n, d, n, d), axis1=1, axis2=3)
    return qsim.trace_distance(dm, np.kron(red, np.eye(d) / d))


# --------------------------------------------------------------------
# scenario batteries and collections
# --------------------------------------------------------------------


def _battery(task: TaskSpec) -> list[frozenset[str]]:
    if task.kind == "localize_exclude":
        return [frozenset()]
    if task.kind == "state_assembly":
        names = sorted(task.diamonds)
        if 2 ** len(names) > _MAX_PATTERNS:
            raise EngineError(
                f"{2 ** len(names)} call patterns exceed the battery cap")
        out: list[frozenset[str]] = []
        for r in range(len(names) + 1):
            out.extend(frozenset(c)
                       for c in itertools.combinations(names, r))
        return out
    if task.kind == "summoning":
        return [frozenset({nm}) for nm in sorted(task.diamonds)]
    raise EngineError(f"no scenario battery for kind {task.kind!r}")


def _collections_for(task: TaskSpec):
    deliveries, exclusions = [], []
    if task.kind == "localize_exclude":
        for s in task.authorized:
            deliveries.append(
                (task.set_label(s), task.region_union(s), s))
        for s in task.unauthorized:
            exclusions.append(
                (task.set_label(s), task.region_union(s), s))
    elif task.kind == "state_assembly":
        def reg(names):
            return Region("+".join(names),
                          tuple(task.diamonds[n] for n in names))
        for s in task.authorized:
            deliveries.append((task.set_label(s), reg(s), s))
        for s in task.unauthorized:
            exclusions.append((task.set_label(s), reg(s), s))
    elif task.kind == "summoning":
        for nm in sorted(task.diamonds):
            deliveries.append(
                (nm, Region(nm, (task.diamonds[nm],)), (nm,)))
    return deliveries, exclusions


# --------------------------------------------------------------------
# the simulator
# --------------------------------------------------------------------


def simulate(plan: Plan, seed: int = 0, tol: float = 1e-9,
             max_key_enumeration: int = 3, key_samples: int = 24,
             access: str | None = None,
             calls: Iterable[str] | None = None) -> SimulationReport:
    """Run a plan over its scenario battery and score every collection.

    Every delivery set is scored in the scenario where exactly its
    diamonds call (localize-exclude has a single call-free scenario), and
    every excluded set in the scenario where exactly *its* diamonds call —
    which is what makes over-calling patterns the interesting ones.  Key
    assignments are enumerated exactly while the plan holds at most
    `max_key_enumeration` keys; beyond that, reconstruction is checked on
    seeded samples and exclusion through the exact Weyl twirl (a collected
    slot padded with a key the collection lacks averages to the maximally
    mixed state).

    `access` restricts scoring to the one named collection; `calls`
    restricts the battery to the one given call pattern.  Transfer tasks
    fix their own scenarios and accept neither.
    """
    validate_plan(plan)
    task = plan.task
    d = task.secret_dim
    if task.kind == "pit":
        if access is not None or calls is not None:
            raise EngineError("transfer scenarios are fixed by the task")
        return _simulate_pit(plan, seed, tol)
    if calls is not None:
        bad = set(calls) - set(task.diamonds)
        if bad:
            raise EngineError(f"unknown call diamonds {sorted(bad)}")
        if task.kind == "localize_exclude":
            raise EngineError("localize-exclude has no call pattern")

    key_names = [ev["name"] for ev in plan.events if ev["op"] == "key"]
    enumerated = len(key_names) <= max_key_enumeration
    if enumerated:
        wheel = [(a, b) for a in range(d) for b in range(d)]
        assignments = [dict(zip(key_names, combo)) for combo in
                       itertools.product(wheel, repeat=len(key_names))]
    else:
        rng = np.random.default_rng(seed)
        assignments = [
            {k: (int(rng.integers(d)), int(rng.integers(d)))
             for k in key_names}
            for _ in range(key_samples)]
    zero_assignment = {k: (0, 0) for k in key_names}

    deliveries, exclusions = _collections_for(task)
    if access is not None:
        deliveries = [t for t in deliveries if t[0] == access]
        exclusions = [t for t in exclusions if t[0] == access]
        if not deliveries and not exclusions:
            raise EngineError(
                f"no authorized or excluded collection labeled {access!r}")
    geometric = task.kind == "localize_exclude"
    battery = ([frozenset(calls)] if calls is not None else _battery(task))
    scenarios: list[ScenarioResult] = []
    fids: list[float] = []
    leaks: list[float] = []

    for pattern in battery:
        base = _run(plan, pattern, zero_assignment)
        res = ScenarioResult(calls=tuple(sorted(pattern)),
                             fired=tuple(base.fired))
        traces: list[_Trace] | None = None

        def runs() -> list[_Trace]:
            nonlocal traces
            if traces is None:
                traces = [_run(plan, pattern, kv) for kv in assignments]
            return traces

        for label, region, members in deliveries:
            if not geometric and frozenset(members) != pattern:
                continue
            view = _collect(base, region, geometric)
            scored = [_reconstruct(tr, view, kv, d)
                      for tr, kv in zip(runs(), assignments)]
            worst = min(f for f, _ in scored)
            fids.append(worst)
            res.collectors.append(CollectorResult(
                label, "deliver", fidelity=worst,
                reconstructed=scored[0][1], ok=worst >= 1.0 - tol))
        for label, region, members in exclusions:
            if not geometric and frozenset(members) != pattern:
                continue
            view = _collect(base, region, geometric)
            if enumerated:
                blocks: dict[tuple, list] = {}
                for tr, kv in zip(runs(), assignments):
                    v = tuple((k, kv[k]) for k in sorted(view.keys))
                    dm = _exclusion_dm(tr, view)
                    if v in blocks:
                        blocks[v][0] += 1.0
                        blocks[v][1] = blocks[v][1] + dm
                    else:
                        blocks[v] = [1.0, dm]
                total = sum(w for w, _ in blocks.values())
                leak = sum((w / total) * _leak_of(acc / w, d)
                           for w, acc in blocks.values())
            else:
                leak = _twirl_leak(base, view, d)
            leaks.append(leak)
            res.collectors.append(CollectorResult(
                label, "exclude", leak=leak,
                reconstructed=_reconstruct(base, view, zero_assignment,
                                           d)[1],
                ok=leak <= tol))
        scenarios.append(res)

    min_fid = min(fids) if fids else None
    max_leak = max(leaks) if leaks else None
    passed = ((min_fid is None or min_fid >= 1.0 - tol)
              and (max_leak is None or max_leak <= tol))
    notes = [f"{len(key_names)} pad key(s), "
             + ("enumerated exactly" if enumerated else
                f"sampled ({key_samples} draws), twirl on the exclusion "
                "side")]
    return SimulationReport(task.kind, seed, tol, scenarios, min_fid,
                            max_leak, None, passed, notes)


def _twirl_leak(base: _Trace, view: _View, d: int) -> float:
    """Exclusion metric without key enumeration.

    Averaging a collected slot over a uniform pad key it cannot undo is
    the Weyl twirl, which maps any state to the maximally mixed one;
    conditioned on the keys the view does hold, the blocks differ only by
    known unitaries, so the single all-zero-key run suffices.
    """
    dm = _exclusion_dm(base, view)
    dims = [d] * (len(view.slots) + 1)
    for idx, lab in enumerate(view.slots):
        tok = base.q[lab]
        if any(kind == "pad" and name not in view.keys
               for kind, name in tok.stack):
            dm = qsim.depolarize_slot(dm, dims, idx)
    return _leak_of(dm, d)


# --------------------------------------------------------------------
# party-independent transfer
# --------------------------------------------------------------------


def _pit_pair_names(task: TaskSpec) -> list[str]:
    return [pname for pname, _, _ in task.pit_pairs()]


def _pit_battery(task: TaskSpec) -> list[tuple[int, str, frozenset[str]]]:
    """All honest scenarios: the receiving party crossed with the choice
    of the pair whose share is left to the other party."""
    out = []
    pnames = _pit_pair_names(task)
    for receiver in (1, 2):
        other = 3 - receiver
        for third in pnames:
            calls = {f"{p}{receiver}" for p in pnames if p != third}
            calls.add(f"{third}{other}")
            out.append((receiver, third, frozenset(calls)))
    return out


def _simulate_pit(plan: Plan, seed: int, tol: float) -> SimulationReport:
    task = plan.task
    d = task.secret_dim
    pnames = _pit_pair_names(task)
    pair_map = {pname: (d1, d2) for pname, d1, d2 in task.pit_pairs()}
    scenarios: list[ScenarioResult] = []
    fids: list[float] = []
    chis: list[float] = []

    for receiver, third, calls in _pit_battery(task):
        tr = _run(plan, calls, {})
        mine = [p for p in pnames if p != third]
        region = Region("receiver", tuple(
            pair_map[p][receiver - 1] for p in mine))
        view = _collect(tr, region, geometric=False)
        toks = sorted(
            (tr.q[lab] for lab in view.slots
             if tr.q[lab].share is not None),
            key=lambda t: (t.share, t.label))
        if len(toks) != 2 or toks[0].share == toks[1].share:
            raise EngineError(
                "the receiver did not end up with two distinct code "
                f"shares in scenario {_fmt_calls(sorted(calls))}")
        state = tr.state
        for tok in toks:
            state = _undo(state, tok, {})
        state = schemes.code23_decode(
            state, (toks[0].share, toks[1].share),
            toks[0].label, toks[1].label)
        fid = qsim.fidelity(
            qsim.partial_trace(state, ["ref", toks[0].label]),
            qsim.maximally_entangled(d).vec)
        spare = 3 - toks[0].share - toks[1].share
        spares = [t for t in tr.q.values()
                  if t.alive and t.share == spare]
        if len(spares) != 1:
            raise EngineError("exactly one code share must be left over")
        other_region = Region(
            "other", (pair_map[third][2 - receiver],))
        if not _handed_over(spares[0].handovers, other_region):
            raise EngineError(
                "the left-over share was not delivered to the other party")
        chi = _project_prob(state, schemes.chi_state(),
                            [toks[1].label, spares[0].label])
        fids.append(fid)
        chis.append(chi)
        scenarios.append(ScenarioResult(
            calls=tuple(sorted(calls)), fired=tuple(tr.fired),
            collectors=[CollectorResult(
                f"party{receiver}", "deliver", fidelity=fid,
                ok=fid >= 1.0 - tol)],
            chi_probability=chi))

    min_fid = min(fids)
    min_chi = min(chis)
    passed = min_fid >= 1.0 - tol and min_chi >= 1.0 - tol
    return SimulationReport(
        "pit", seed, tol, scenarios, min_fid, None, min_chi, passed,
        ["all honest receiver and left-over pair choices enumerated"])


def _project_prob(state: qsim.State, vec: np.ndarray,
                  labels: Sequence[str]) -> float:
    """Probability of projecting the named slots onto a pure state."""
    reg = state.register
    idxs = [reg.index(l) for l in labels]
    arr = np.moveaxis(state.vec.reshape(reg.dims), idxs,
                      range(len(idxs)))
    head = 1
    for i in idxs:
        head *= reg.dims[i]
    amp = vec.conj() @ arr.reshape(head, -1)
    return float(np.real(np.vdot(amp, amp)))


def pit_cheat_chi_probability(seed: int = 0) -> float:
    """Certification probability against the two-codeword cheat.

    A dishonest sender who prepares two independent codewords — one whose
    shares reach the chosen receiver, another contributing the share kept
    by the other party — faces a check measurement on two slots that are
    maximally mixed and uncorrelated, so the check passes with probability
    1/9 whatever states were encoded.
    """
    rng = np.random.default_rng(seed)
    state = qsim.maximally_entangled(3, ("ref", "psi"))
    state = schemes.code23_encode(state, "psi", ["a0", "a1", "a2"])
    decoy = qsim.haar_state(qsim.Register([("phi", 3)]), rng)
    state = state.tensor(decoy)
    state = schemes.code23_encode(state, "phi", ["b0", "b1", "b2"])
    state = schemes.code23_decode(state, (0, 1), "a0", "a1")
    return _project_prob(state, schemes.chi_state(), ["a1", "b2"])

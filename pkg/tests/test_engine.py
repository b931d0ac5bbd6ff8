from __future__ import annotations

import copy
import dataclasses
import itertools

import pytest

from stq import engine
from stq.engine import (CollectorResult, EngineError, ScenarioResult,
                        SimulationReport, pit_cheat_chi_probability, simulate,
                        validate_plan)
from stq.geometry import Diamond, causal_leq, point
from stq.model import AccessStructure, TaskSpec, embed_access_structure
from stq.planner import plan_task

SIMULATED = ["fig1", "fig10", "fig12", "fig13", "fig14", "fig15", "triangle"]


@pytest.mark.parametrize("name", SIMULATED)
def test_fixture_plans_simulate_clean(report_of, name):
    report = report_of(name)
    assert report.passed
    if report.min_fidelity is not None:
        assert report.min_fidelity >= 1.0 - 1e-9
    if report.max_leak is not None:
        assert report.max_leak <= 1e-9
    assert report.lines()[-1] == "PASS"


def test_embedded_structure_simulates_clean(task_of):
    base = task_of("embed3")
    s = AccessStructure(base.parties, base.authorized, base.unauthorized)
    report = simulate(plan_task(embed_access_structure(s)))
    assert report.passed


def test_simulation_is_deterministic(task_of, report_of):
    fresh = simulate(plan_task(task_of("fig13")))
    cached = report_of("fig13")
    assert fresh.lines() == cached.lines()
    assert fresh.min_fidelity == cached.min_fidelity
    assert fresh.max_leak == cached.max_leak


def test_transfer_certification_is_exact(report_of):
    report = report_of("fig15")
    assert report.kind == "pit"
    assert len(report.scenarios) == 6
    for sc in report.scenarios:
        assert sc.chi_probability is not None
        assert abs(sc.chi_probability - 1.0) <= 1e-12
    assert report.min_chi is not None and report.min_chi >= 1.0 - 1e-12


def test_two_codeword_cheat_is_caught():
    chi = pit_cheat_chi_probability(seed=0)
    assert abs(chi - 1.0 / 9.0) <= 1e-9
    # whatever the dishonest preparation, the seed cannot rescue it
    assert abs(pit_cheat_chi_probability(seed=7) - chi) <= 1e-9


# --------------------------------------------------------- scenario shape


def _event_point(ev):
    return ev["at"] if "at" in ev else ev["path"][0]


def test_assembly_battery_covers_every_call_pattern(report_of):
    report = report_of("fig13")
    patterns = {sc.calls for sc in report.scenarios}
    names = ("Da1", "Da2", "Db1", "Db2")
    assert len(patterns) == 16
    for r in range(5):
        for combo in itertools.combinations(names, r):
            assert tuple(sorted(combo)) in patterns


def test_calls_outside_the_light_cone_change_nothing(task_of, plan_of):
    # switching one extra call on may only affect events that can see it
    task = task_of("fig13")
    plan = plan_of("fig13")
    zero_keys = {ev["name"]: (0, 0) for ev in plan.events
                 if ev["op"] == "key"}
    names = sorted(task.diamonds)
    fired = {}
    for r in range(len(names) + 1):
        for combo in itertools.combinations(names, r):
            tr = engine._run(plan, frozenset(combo), zero_keys)
            fired[frozenset(combo)] = set(tr.fired)
    for pattern, seen in fired.items():
        for extra in names:
            if extra in pattern:
                continue
            call = task.diamonds[extra].c
            diff = seen ^ fired[pattern | {extra}]
            for idx in diff:
                assert causal_leq(call, _event_point(plan.events[idx]))


def test_independent_split_blocks_commute(plan_of):
    # the two per-collection key routings share nothing but the key itself,
    # so scheduling them in either order must give the same report
    plan = plan_of("fig13")
    baseline = simulate(plan)
    events = list(plan.events)
    psi = events[0]["label"]
    i0, i1 = [i for i, e in enumerate(events) if e["op"] == "split"]
    j = next(i for i, e in enumerate(events)
             if i > i1 and e["op"] == "move" and e["token"] == psi)
    reordered = dataclasses.replace(
        plan, events=events[:i0] + events[i1:j] + events[i0:i1] + events[j:])
    report = simulate(reordered)
    assert report.passed
    assert report.lines() == baseline.lines()


# --------------------------------------------------------- plan audits


def tampered(plan, mutate):
    twin = dataclasses.replace(plan, events=copy.deepcopy(plan.events))
    mutate(twin.events)
    return twin


def test_audit_rejects_cloned_guard_branches(plan_of):
    plan = plan_of("fig12")

    def clone_guarded(events):
        guarded = next(e for e in events
                       if e["op"] == "move" and e.get("guard"))
        events.append(copy.deepcopy(guarded))

    with pytest.raises(EngineError, match="cannot be copied"):
        validate_plan(tampered(plan, clone_guarded))


def test_audit_rejects_backward_moves(plan_of):
    plan = plan_of("fig12")

    def reverse_first_move(events):
        mv = next(e for e in events if e["op"] == "move")
        mv["path"] = list(reversed(mv["path"]))

    with pytest.raises(EngineError, match="not causal"):
        validate_plan(tampered(plan, reverse_first_move))


def test_audit_rejects_guards_outside_the_light_cone(task_of, plan_of):
    task, plan = task_of("fig12"), plan_of("fig12")

    def blind_guard(events):
        mv = next(e for e in events if e["op"] == "move" and e.get("guard"))
        at = mv["path"][0]
        blind = next(nm for nm in sorted(task.diamonds)
                     if not causal_leq(task.diamonds[nm].c, at))
        mv["guard"] = {"called": [blind]}

    with pytest.raises(EngineError, match="not visible"):
        validate_plan(tampered(plan, blind_guard))


def test_audit_rejects_unguarded_moves_after_branching(plan_of):
    plan = plan_of("fig12")

    def continue_unguarded(events):
        mv = next(e for e in events if e["op"] == "move" and e.get("guard"))
        start = mv["path"][0]
        events.append({"op": "move", "token": mv["token"],
                       "path": [start, start]})

    with pytest.raises(EngineError, match="unguarded move"):
        validate_plan(tampered(plan, continue_unguarded))


def test_audit_rejects_second_sources_and_reserved_labels(plan_of):
    plan = plan_of("fig12")
    src = next(e for e in plan.events if e["op"] == "source")

    with pytest.raises(EngineError, match="single source"):
        validate_plan(tampered(
            plan, lambda evs: evs.append({"op": "source", "label": "psi2",
                                          "at": src["at"]})))

    def rename(events):
        events[events.index(next(e for e in events
                                 if e["op"] == "source"))]["label"] = "ref"

    with pytest.raises(EngineError, match="reserved"):
        validate_plan(tampered(plan, rename))


def test_audit_rejects_broadcasts_before_their_outcome(plan_of):
    plan = plan_of("fig12")

    def swap_bell_and_broadcast(events):
        i = events.index(next(e for e in events if e["op"] == "bell"))
        j = events.index(next(e for e in events if e["op"] == "broadcast"))
        events[i], events[j] = events[j], events[i]

    with pytest.raises(EngineError, match="unknown outcome"):
        validate_plan(tampered(plan, swap_bell_and_broadcast))


def test_audit_rejects_moves_of_unknown_tokens(plan_of):
    plan = plan_of("fig12")
    with pytest.raises(EngineError, match="unknown token"):
        validate_plan(tampered(
            plan, lambda evs: evs.append(
                {"op": "move", "token": "ghost",
                 "path": [point(0, 0), point(1, 0)]})))


def test_audit_rejects_pads_with_unknown_keys(plan_of):
    plan = plan_of("fig1")

    def rename_key(events):
        next(e for e in events if e["op"] == "pad")["key"] = "nope"

    with pytest.raises(EngineError, match="unknown key"):
        validate_plan(tampered(plan, rename_key))


def test_audit_requires_a_key_copy_at_the_pad_point(plan_of):
    plan = plan_of("fig1")
    pad = next(e for e in plan.events if e["op"] == "pad")
    parts = {p for e in plan.events if e["op"] == "split"
             for p in e["parts"]}

    def drop_pad_visit(events):
        for ev in events:
            if (ev["op"] == "move" and ev["token"] in parts
                    and pad["at"] in ev["path"]):
                ev["path"] = [p for p in ev["path"] if p != pad["at"]]

    with pytest.raises(EngineError, match="no complete copy"):
        validate_plan(tampered(plan, drop_pad_visit))


def test_audit_rejects_key_parts_crossing_their_excluded_region(task_of,
                                                                plan_of):
    task, plan = task_of("fig1"), plan_of("fig1")
    inside = task.region_union(task.unauthorized[0]).diamonds[0].c

    def reroute(events):
        split = next(e for e in events if e["op"] == "split")
        part = split["parts"][0]
        mv = next(e for e in events
                  if e["op"] == "move" and e["token"] == part)
        detour = [p for p in mv["path"] if causal_leq(p, inside)]
        mv["path"] = detour + [inside, mv["path"][-1]]

    with pytest.raises(EngineError, match="crosses the excluded region"):
        validate_plan(tampered(plan, reroute))


def test_audit_rejects_discontinuous_moves(plan_of):
    plan = plan_of("fig12")

    def teleport_without_a_channel(events):
        mv = next(e for e in events if e["op"] == "move")
        p0 = mv["path"][0]
        mv["path"] = [point(p0.t, p0.x[0] + 0.5), mv["path"][-1]]

    with pytest.raises(EngineError, match="resting position"):
        validate_plan(tampered(plan, teleport_without_a_channel))


# ----------------------------------------------------- access and calls


def test_access_restricts_scoring(task_of, plan_of):
    report = simulate(plan_of("fig1"), access="A1")
    labels = {c.label for sc in report.scenarios for c in sc.collectors}
    assert labels == {"A1"}

    report = simulate(plan_of("fig1"), access="U1")
    collectors = [c for sc in report.scenarios for c in sc.collectors]
    assert [c.role for c in collectors] == ["exclude"]

    with pytest.raises(EngineError, match="no authorized or excluded"):
        simulate(plan_of("fig1"), access="nope")


def test_calls_restricts_the_battery(plan_of):
    report = simulate(plan_of("fig13"), calls=("Da1", "Db1"))
    assert [sc.calls for sc in report.scenarios] == [("Da1", "Db1")]
    assert report.passed

    with pytest.raises(EngineError, match="unknown call"):
        simulate(plan_of("fig13"), calls=("Dz9",))


def test_localization_has_no_call_patterns(plan_of):
    with pytest.raises(EngineError, match="no call pattern"):
        simulate(plan_of("fig1"), calls=())


def test_transfer_scenarios_are_fixed(plan_of):
    with pytest.raises(EngineError, match="fixed by the task"):
        simulate(plan_of("fig15"), access="party1")
    with pytest.raises(EngineError, match="fixed by the task"):
        simulate(plan_of("fig15"), calls=("a1",))


def test_battery_is_capped():
    spot = Diamond(point(0, 0), point(1, 0))
    wide = TaskSpec(kind="state_assembly",
                    diamonds={f"D{i:02d}": spot for i in range(13)})
    with pytest.raises(EngineError, match="battery cap"):
        engine._battery(wide)


# ----------------------------------------------------------- formatting


def test_collector_lines():
    hit = CollectorResult("A1", "deliver", fidelity=1.0)
    assert hit.line() == "deliver A1: fidelity 1.000000000"
    miss = CollectorResult("U1", "exclude", leak=0.0, reconstructed=False)
    assert miss.line() == "exclude U1: leak 0.00e+00, reconstruction absent"
    bare = CollectorResult("U1", "exclude", leak=2e-12)
    assert bare.line() == "exclude U1: leak 2.00e-12"


def test_report_lines_truncate_long_batteries():
    scenarios = [
        ScenarioResult(calls=(f"D{i}",),
                       collectors=[CollectorResult(f"D{i}", "deliver",
                                                   fidelity=1.0)])
        for i in range(30)]
    report = SimulationReport("state_assembly", 0, 1e-9, scenarios,
                              1.0, None, None, True)
    lines = report.lines()
    assert "  ..." in lines
    assert sum(1 for line in lines if line.startswith("  calls")) == 24
    assert lines[-1] == "PASS"

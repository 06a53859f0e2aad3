#!/usr/bin/env python3
"""Roll out a scenario step by step and detect interactions.

Places three aircraft on a five-node corridor — one eastbound, one westbound
and one slow leader being caught up — prints the occupancy table, and then
the classified interaction events plus the validation verdict.
"""

from atcgen.core import Aircraft, Scenario, SectorGraph
from atcgen.rollout import (detect_interactions, simulate, unique_pairs,
                            validate_scenario)

nodes = {f"X{i}": (20.0 * i, 0.0) for i in range(5)}
graph = SectorGraph(nodes=nodes, routes={
    "EAST": ["X0", "X1", "X2", "X3", "X4"],
    "WEST": ["X4", "X3", "X2", "X1", "X0"],
})

scenario = Scenario(duration=10, aircraft=[
    Aircraft(id="FAST1", spawn_time=0, route="EAST", speed=1),
    Aircraft(id="OPPO1", spawn_time=0, route="WEST", speed=1),
    Aircraft(id="SLOW1", spawn_time=0, route="EAST", speed=2),
    Aircraft(id="FAST2", spawn_time=3, route="EAST", speed=1),
])

table = simulate(scenario, graph)
print("occupancy (time-step: node -> aircraft):")
for t, step in enumerate(table.steps):
    cells = ", ".join(f"{n}:{'+'.join(sorted(ids))}"
                      for n, ids in sorted(step.items()))
    print(f"  t={t:2d}  {cells}")

events = detect_interactions(scenario, graph)
print(f"\n{len(events)} interaction events, "
      f"{len(unique_pairs(events))} unique pairs:")
for e in events:
    print(f"  t={e.time}  {e.pair[0]} vs {e.pair[1]}  {e.mechanism} at "
          f"{'/'.join(e.nodes)}  [{e.interaction_class}]")

report = validate_scenario(scenario, graph)
print(f"\nvalidation ok: {report.ok}")
for v in report.violations:
    print(f"  violation: {v.aircraft_id} {v.rule} ({v.detail})")
for e in report.spawn_grace_violations:
    print(f"  grace violation: {e.pair} at t={e.time}")

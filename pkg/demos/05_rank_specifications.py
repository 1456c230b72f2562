"""End to end: which task best explains six demonstrations?

Five demonstrations satisfy the full task (recharge, avoid lava, towel off
after water) and one fails by slipping left until time runs out.  Ranking is
by demonstration log likelihood relative to the uniform-policy baseline,
plus a uniform prior.
"""
from pathlib import Path

from specinfer import (GridCoinCache, load_demos, load_world, parse_spec,
                       rank)

here = Path(__file__).parent.parent / "experiments" / "recharge"
world = load_world(here / "world.json")
demos = load_demos(here / "demos.json", world)
print("world:")
for row in world.rows:
    print("   ", row)
print(len(demos), "demonstrations of length", len(demos[0]))

candidates = [
    ("recharge_dry_safe",
     "and(reach(yellow), avoid(red), dry_before_recharge(blue, brown, yellow))"),
    ("recharge_dry",
     "and(reach(yellow), dry_before_recharge(blue, brown, yellow))"),
    ("recharge_safe", "and(reach(yellow), avoid(red))"),
    ("anything", "true"),
]
monitors = [(name, parse_spec(expr, world)) for name, expr in candidates]

report = rank(monitors, world.pa, tau=10, demos=demos,
              coin_source=GridCoinCache(world))
print()
print(report.to_tsv())
print("winner:", report.rows[0].name)

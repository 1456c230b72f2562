"""Task specifications as tiny sequential circuits.

Each past-time operator costs one history bit; conjunction just runs the
operand monitors side by side.  The combinator parser builds the same
monitors from the expressions used in run configuration files.
"""
from specinfer import (accepts, avoid, dry_before_recharge, m_and,
                       make_gridworld, parse_spec, reach)

world = make_gridworld(4, 4, slip_num=0, n_slip_bits=0,
                       tiles=["wwwy",
                              "wrrw",
                              "wbbw",
                              "nwww"],
                       start=(0, 3))

recharge = reach(world, "yellow")
safe = avoid(world, "red")
dry_first = dry_before_recharge(world, "blue", "brown", "yellow")
task = m_and(m_and(recharge, safe), dry_first)
print("history bits:", recharge.n_history_bits, "+", safe.n_history_bits,
      "+", dry_first.n_history_bits, "=", task.n_history_bits)

U, D, L, R = (world.action_id(n) for n in ("up", "down", "left", "right"))
cell = world.cell_id

# a dry run up the left edge and along the top
good = [(U, cell(0, 2)), (U, cell(0, 1)), (U, cell(0, 0)),
        (R, cell(1, 0)), (R, cell(2, 0)), (R, cell(3, 0))]
print("dry route accepted:", accepts(task, good, world.pa.initial_state))

# stepping in water then recharging without drying breaks the water clause
wet = [(R, cell(1, 3)), (U, cell(1, 2)), (U, cell(1, 1)),  # (1,2) is water
       (U, cell(1, 0)), (R, cell(2, 0)), (R, cell(3, 0))]
print("wet shortcut accepted:", accepts(task, wet, world.pa.initial_state))

# ...unless the agent towels off at the brown tile first
dried = [(R, cell(1, 3)), (U, cell(1, 2)), (D, cell(1, 3)),
         (L, cell(0, 3)), (U, cell(0, 2)), (U, cell(0, 1)),
         (U, cell(0, 0)), (R, cell(1, 0)), (R, cell(2, 0)), (R, cell(3, 0))]
print("dried route accepted:", accepts(task, dried, world.pa.initial_state))

# the same task, written the way config files carry it
parsed = parse_spec(
    "and(reach(yellow), avoid(red), dry_before_recharge(blue, brown, yellow))",
    world)
print("parsed monitor agrees:",
      all(accepts(parsed, t, world.pa.initial_state)
          == accepts(task, t, world.pa.initial_state)
          for t in (good, wet, dried)))

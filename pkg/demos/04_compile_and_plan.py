"""Compile a task over a horizon, then plan on the compressed diagram.

The unrolled decision tree would have (|A| * 2**q)**tau leaves; the diagram
keeps only the distinctions the task can observe, and the value backup
recovers every eliminated decision with a k*ln(2) correction.
"""
import math

from specinfer import (fit_theta, m_and, make_gridworld, avoid, reach,
                       sat_prob, size_bound, true_monitor, unroll,
                       value_backup, with_discount)

world = make_gridworld(8, 8, slip_num=1, n_slip_bits=5,
                       tiles=["wwwwwwww",
                              "wwwwwyyw",
                              "wwwrrwww",
                              "wwwrrwww",
                              "wwbbwnww",
                              "wwbbwwww",
                              "wwwwwwww",
                              "wwwwwwww"],
                       start=(1, 5))
task = m_and(reach(world, "yellow"), avoid(world, "red"))
tau = 10

b = unroll(world.pa, task, tau)
tree_leaves = (4 * 2 ** 5) ** tau
print(f"decision tree leaves: {tree_leaves:.3e}")
print("diagram internal nodes:", b.stats.internal_nodes,
      "(a-priori bound", b.stats.node_bound, ")")

# the always-true task compresses to a single terminal no matter the world
trivial = unroll(world.pa, true_monitor(world.pa.n_state_bits,
                                        world.pa.n_action_bits), tau)
print("always-true task nodes:", trivial.stats.total_nodes)

# soft values: at rationality 0 the policy is uniform and the root value is
# pure decision entropy, tau * n_action_bits * ln 2
vt0 = value_backup(b, 0.0)
print("root value at theta=0:", vt0.root_value,
      "=", tau * 2 * math.log(2))
print("uniform-policy success probability:", sat_prob(b, vt0))

# crank rationality up and success probability climbs monotonically
for theta in (2.0, 6.0, 12.0):
    vt = value_backup(b, theta)
    print(f"  theta={theta:5.1f} -> p={sat_prob(b, vt):.4f}")

# bisection finds the rationality matching a target success probability
solution = fit_theta(b, p_target=0.8, tol=1e-4)
print("fit to p=0.8: theta =", round(solution.theta, 4),
      "achieved p =", round(solution.sat, 5),
      "in", solution.iterations, "evaluations")

# geometric episode termination: a sink flag plus extra coins per step
discounted, horizon = with_discount(world.pa, gamma_num=1, n_gamma_bits=3,
                                    eps=0.01)
print("1/8 per-step termination needs horizon", horizon)
db = unroll(discounted, task, horizon)
print("discounted diagram nodes:", db.stats.internal_nodes)

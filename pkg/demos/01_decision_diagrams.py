"""A walk through the decision-diagram engine.

Diagrams are canonical: build the same Boolean function two different ways
and you get the same integer handle back.
"""
from specinfer import BOT, ONE, ZERO, Engine

engine = Engine(n_vars=4)

x0, x1, x2 = engine.var(0), engine.var(1), engine.var(2)

# apply() computes pointwise Boolean combinations
f = engine.apply("and", x0, x1)
g = engine.apply("or", f, x2)
print("and(x0, x1):        handle", f, "with", engine.size(f), "internal nodes")
print("or(and(x0,x1), x2): handle", g, "with", engine.size(g), "internal nodes")

# canonicity: same function, same handle; De Morgan built both ways
lhs = engine.negate(engine.apply("or", x0, x1))
rhs = engine.apply("and", engine.negate(x0), engine.negate(x1))
print("De Morgan handles equal:", lhs == rhs)

# evaluation follows one path from the root; assignments cover every level
print("g(1,1,0,*):", engine.evaluate(g, [1, 1, 0, 0]))
print("g(0,0,0,*):", engine.evaluate(g, [0, 0, 0, 1]))

# compose substitutes whole diagrams for variables, all at once
swapped = engine.compose(g, {0: x1, 1: x0})
print("swapping x0/x1 leaves the symmetric g unchanged:", swapped == g)

# the third terminal marks invalid inputs and absorbs everything it touches
masked = engine.apply("gate", x0, g)
print("gated diagram evaluates to None when x0=0:",
      engine.evaluate(masked, [0, 1, 1, 0]))
print("terminals:", ZERO, ONE, BOT)

# DOT export for eyeballing small diagrams
print()
print(engine.to_dot(f))

#!/usr/bin/env python3
"""Tour of asymmetric distance spaces and their axiom checkers.

A space is either a finite labeled carrier with a distance table over a
formula default, or a real interval with a closed-form distance.  The two
axioms under test:

  (i)  d(a, b) = 0  exactly when  a = b
  (ii) d(x, y) <= s * (d(x, u) + d(u, v) + d(v, y))
       for all quadruples with u, v distinct and different from x, y

Run: python demos/01_space_axioms.py
"""
from rqbm import (
    build_example_2_3,
    check_b_rectangular,
    check_identity_axiom,
    classify,
    minimal_rectangular_coefficient,
    resolve_distance,
    space_from_dict,
)

BAR = "-" * 72

# A space definition is plain JSON: labeled points, optional overrides,
# and a default formula in x and y for every pair the table leaves out.
tiny = space_from_dict({
    "kind": "finite",
    "points": [
        {"label": "a", "value": 0.0},
        {"label": "b", "value": 1.0},
        {"label": "c", "value": 2.0},
        {"label": "d", "value": 3.5},
    ],
    "default": "(x - y)^2",
    "overrides": [
        {"from": "a", "to": "b", "d": 0.3},
        {"from": "b", "to": "a", "d": 0.1},   # asymmetric on purpose
    ],
    "claimed_s": 3.0,
})

print(BAR)
print("a hand-made 4-point space")
print(BAR)
print("d(a, b) =", tiny.distance("a", "b"), " (table)")
print("d(b, a) =", tiny.distance("b", "a"), " (table, other direction)")
print("d(a, c) =", tiny.distance("a", "c"), " (formula default)")

identity = check_identity_axiom(tiny)
print("identity axiom:", "pass" if identity.passed else "fail")

quad = check_b_rectangular(tiny, 3.0)
print(f"quadrilateral at s=3: {'pass' if quad.passed else 'fail'} "
      f"({quad.quadruples_checked} quadruples)")

bound = minimal_rectangular_coefficient(tiny)
print("tightest coefficient on this space:", bound.value)
print("attained at:", bound.witness.to_dict())

# The shipped asymmetric table: six reciprocal labels over a squared
# difference default, claimed coefficient 3.
print()
print(BAR)
print("the built-in 6-point table (plus an 11-point grid on [1, 2])")
print(BAR)
space = build_example_2_3().space
print("rho(1/2, 1/3) =", resolve_distance(space, "1/2", "1/3"))
print("rho(1/3, 1/2) =", resolve_distance(space, "1/3", "1/2"))
print("rho(1, 2)     =", resolve_distance(space, "1", "2"), " (default formula)")

report = check_b_rectangular(space, 3.0)
print(f"claimed coefficient 3: {'holds' if report.passed else 'falsified'} "
      f"over {report.quadruples_checked} quadruples")

bound = minimal_rectangular_coefficient(space)
print("tightest coefficient:", bound.value)

# Classification runs every scan at once: symmetry, metric and b-metric
# triangles, the s = 1 quadrilateral, and the quadrilateral at claimed s.
result = classify(space)
print()
print("classification:")
for key, val in result.to_dict().items():
    if isinstance(val, bool) or key in ("s", "minimal_s"):
        print(f"  {key:<20} {val}")
print("first asymmetry witness:", result.asymmetry_witnesses[0])

# Three points admit no quadruple at all: the check is vacuously true and
# says so explicitly rather than claiming a substantive pass.
small = space_from_dict({
    "kind": "finite",
    "points": [{"label": p, "value": float(i)} for i, p in enumerate("abc")],
    "default": "abs(x - y)",
    "overrides": [],
    "claimed_s": None,
})
vac = check_b_rectangular(small, 1.0)
print()
print(f"3-point space: passed={vac.passed}, vacuous={vac.vacuous}")

#!/usr/bin/env python3
"""Anatomy of a fixed-point run and its convergence diagnostics.

Each run records four distance series: forward and backward consecutive
steps and the two skip distances.  For a genuine contraction every series
decreases strictly while positive and vanishes at the tail; the diagnostics
report exactly which of these predictions hold on a given trace.

Run: python demos/04_fixed_point_solver.py
"""
from rqbm import (
    SelfMap,
    build_example_final,
    build_example_sqrt,
    cauchy_diagnostics,
    limit_sandwich_check,
    picard_iterate,
    uniqueness_scan,
    verify_fixed_point,
)

BAR = "-" * 72

print(BAR)
print("square-root iteration on [1, 2] from x0 = 2")
print(BAR)
b = build_example_sqrt("sqrt")
trace = picard_iterate(b.space, b.selfmap, 2.0, tol=1e-10)
print(f"terminated by {trace.terminated_by} after {trace.steps} steps")
print(f"limit {trace.limit!r}")
print("first iterates:", [round(v, 6) for v in trace.values[:6]])
print("first forward steps:", [f"{v:.3e}" for v in trace.fwd_step[:5]])
print("last  forward steps:", [f"{v:.3e}" for v in trace.fwd_step[-3:]])

diag = cauchy_diagnostics(trace, tol=1e-9)
print(f"diagnostics: {'PASS' if diag.passed else 'FAIL'}")
for s in diag.series:
    print(f"  {s.name:<9} monotone={s.monotone}  tail={s.tail_value:.3e}")

verdict = verify_fixed_point(b.space, b.selfmap, trace.limit, 1e-9)
print(f"fixed-point residuals: fwd={verdict.fwd_residual:.3e} "
      f"bwd={verdict.bwd_residual:.3e} verified={verdict.verified}")

# The tail of the trace stays inside the coefficient band around the
# limit's distance to any other observer point.
sandwich = limit_sandwich_check(trace, 2.0, 2.0, tail_len=10)
print(f"band check at observer 2.0: {'PASS' if sandwich.passed else 'FAIL'} "
      f"(reference {sandwich.fwd_reference:.6f}, "
      f"tail range [{sandwich.fwd_tail_min:.6f}, {sandwich.fwd_tail_max:.6f}])")

# The table-plus-interval space: starts in the table part jump to 1 in one
# step and terminate exactly; interval starts contract at rate about 1/8.
print()
print(BAR)
print("table-plus-interval space, every start")
print(BAR)
bf = build_example_final()
for start in ("1/3", "0.5", "1.5"):
    t = picard_iterate(bf.space, bf.selfmap, start, tol=1e-10)
    print(f"  start {start:>4}: {t.terminated_by:<18} steps={t.steps:<3} "
          f"limit={t.limit!r}")

scan = uniqueness_scan(bf.space, bf.selfmap, list(bf.space.labels),
                       tol=1e-10, merge_tol=1e-8)
print(f"uniqueness over all {len(scan.limits)} starts: "
      f"{'PASS' if scan.passed else 'FAIL'}, representative {scan.representative!r}, "
      f"max mutual distance {scan.max_mutual_distance:.3e}")

# A non-contractive input is first-class: the 2-point swap cycles, and the
# diagnostics name the first index where monotone decrease fails.
print()
print(BAR)
print("a period-2 swap is detected, not silently iterated")
print(BAR)
from rqbm import space_from_dict

two = space_from_dict({
    "kind": "finite",
    "points": [{"label": "a", "value": 0.0}, {"label": "b", "value": 1.0}],
    "default": None,
    "overrides": [
        {"from": "a", "to": "b", "d": 1.0},
        {"from": "b", "to": "a", "d": 1.0},
    ],
    "claimed_s": None,
})
swap = SelfMap.from_table({"a": "b", "b": "a"})
t = picard_iterate(two, swap, "a")
print(f"terminated by {t.terminated_by}; iterates {t.labels}")
d = cauchy_diagnostics(t)
print(f"diagnostics passed: {d.passed} "
      f"(forward steps {list(t.fwd_step)} never decrease)")

#!/usr/bin/env python3
"""Validating the two comparison-function families by sampling.

Theta candidates map (0, inf) into (1, inf), strictly increase, and approach
1 exactly when the argument approaches 0.  Phi candidates map [1, inf) into
itself, never decrease, and their iterates fall to 1 from every start; this
forces phi(1) = 1 and phi(t) < t above 1, which the validator checks with
explicit witnesses.

Run: python demos/02_comparison_functions.py
"""
import numpy as np

from rqbm import (
    PhiSpec,
    ThetaSpec,
    builtin_phi,
    builtin_theta,
    iterate_phi,
    validate_phi,
    validate_theta,
)

BAR = "-" * 72


def show(report):
    print(f"  {report.name}: {'PASS' if report.passed else 'FAIL'}")
    for check in report.checks:
        mark = "ok" if check.passed else "FAIL"
        line = f"    {check.name:<20} {mark}"
        if not check.passed and check.witnesses:
            line += f"   witness {check.witnesses[0]}"
        print(line)


print(BAR)
print("builtin theta candidates")
print(BAR)
grid = list(np.geomspace(1e-6, 10.0, 200))
for name in ("exp-sqrt", "sqrt-plus-1"):
    show(validate_theta(builtin_theta(name), grid, 40))

print()
print("candidates that do not belong:")
# constant: neither above 1 nor increasing
show(validate_theta(ThetaSpec.from_source("constant-one", "t * 0 + 1"), grid, 20))
# shifted identity: increasing and above 1, but tends to 2 at zero
show(validate_theta(ThetaSpec.from_source("t-plus-2", "t + 2"), grid, 20))

print()
print(BAR)
print("builtin phi candidates")
print(BAR)
show(validate_phi(builtin_phi("midpoint")))
show(validate_phi(builtin_phi("pow-0.5")))
print()
print("the identity map fails the strict-below requirement:")
show(validate_phi(PhiSpec.from_source("identity", "t"), list(np.linspace(1, 10, 10))))

# Iterates of (t+1)/2 from 2 have the closed form 1 + 2^-n, exact in
# binary floating point.
print()
print(BAR)
print("iterates of (t + 1) / 2 from t = 2")
print(BAR)
phi = builtin_phi("midpoint")
for n in (0, 1, 2, 5, 10, 30):
    value = iterate_phi(phi, 2.0, n)
    print(f"  n = {n:>2}: {value!r}   (closed form 1 + 2^-{n} = {1 + 2.0 ** -n!r})")

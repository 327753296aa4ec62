"""Ratio tables of the high-energy theorems on the named scenarios.

Run with ``python3 demos/verify_theorems.py``; the same tables come from
``cansys verify --theorem THEOREM --scenario NAME --format table``.
"""
from cansys import scenarios, verify

for name in scenarios.names():
    sc = scenarios.get(name)
    rep = verify(sc.theorem, sc)
    worst = rep.deviation.max(axis=1)
    print(f"{name:20s} {sc.theorem:18s} {rep.status:6s} worst |ratio - 1| on the top rung {worst[-1]:.2e}")

# one full table; the oscillating profile is a negative control and must fail
print()
print(verify("alpha_positive", "oscillating_A", ladder=[1e2, 1e4, 1e6, 1e8]).table())

"""Weyl m-function of a few Hamiltonians against their closed forms.

Run with ``python3 demos/m_function.py``.
"""
import numpy as np

from cansys import Alpha, Constant, PowerLawAlpha, StepExample, flip, m_values, model_m, trace_normalize
from cansys.weyl import constant_from_m

z = np.array([1j, 2j, 1 + 1j, 10j])


def show(title, H, reference):
    value, radius, x_trunc, _ = m_values(H, z)
    print(title)
    print(f"{'z':>10} {'m(z)':>32} {'radius':>10} {'|m - ref|':>10} {'x':>9}")
    for zi, v, r, ref, x in zip(z, value, radius, reference(z), x_trunc):
        print(f"{zi!s:>10} {v.real:15.10f}{v.imag:+15.10f}i {r:10.1e} {abs(v - ref):10.1e} {x:9.3g}")
    print()


# a constant Hamiltonian has a constant m; build it from the value it should have
zeta0 = 0.3 + 1.2j
show("constant Hamiltonian with m = 0.3 + 1.2i", Constant(*constant_from_m(zeta0)), lambda z: np.full(z.shape, zeta0))

# the step Hamiltonian diag(1 on [1, inf), 1 on [0, 1)) has m(z) = -1/z
show("step Hamiltonian", StepExample(), lambda z: -1 / z)

# power law H_1 = diag(2x, 1), reference from the 0F1 closed form
show("power law alpha = 1", PowerLawAlpha(1.0), lambda z: model_m(Alpha(1.0), z))

# the flip -J H J turns m into -1/m
show("flipped power law", flip(PowerLawAlpha(1.0)), lambda z: -1 / model_m(Alpha(1.0), z))

# reparametrising to trace norm leaves m unchanged
Ht, eta = trace_normalize(PowerLawAlpha(2.0))
show("trace-normed power law alpha = 2", Ht, lambda z: model_m(Alpha(2.0), z))

"""Spectral function by Stieltjes inversion and the Tauberian comparison.

Run with ``python3 demos/spectral.py``.
"""
import numpy as np

from cansys import Alpha, Constant, PowerLawAlpha, StepExample, model_rho, stieltjes_invert, tauberian_compare
from cansys.weyl import sampler

# H = I has m = i and spectral function t / pi
t = np.linspace(-3, 3, 7)
rho = stieltjes_invert(sampler(Constant(1, 0, 1)), t)
print("identity Hamiltonian: rho(t) pi / t")
print(np.round(rho(t[t != 0]) * np.pi / t[t != 0], 8))

# the step Hamiltonian has m = -1/z: a unit atom at 0 and nothing else
rho = stieltjes_invert(sampler(StepExample()), np.array([-2.0, -0.5, 0.5, 2.0]))
print("\nstep Hamiltonian: atoms", rho.atoms, "values", np.round(rho(np.array([-2.0, 2.0])), 8))

# H_1 = diag(2x, 1): rho grows like t**(2/3); compare with the closed form
t = np.geomspace(10, 1000, 5)
rho = stieltjes_invert(sampler(PowerLawAlpha(1.0)), np.concatenate([-t[::-1], t]))
ref = model_rho(Alpha(1.0), t)
slope = np.polyfit(np.log(t), np.log(rho(t)), 1)[0]
print("\npower law alpha = 1")
print(f"{'t':>8} {'rho(t)':>14} {'closed form':>14} {'ratio':>10}")
for ti, a, b in zip(t, rho(t), ref):
    print(f"{ti:8.1f} {a:14.8f} {b:14.8f} {a / b:10.6f}")
print(f"log-log slope {slope:.5f} (2/3 expected)")

# the Tauberian comparison uses the normaliser 1/f_scale(t) = t**(-1/3)
rep = tauberian_compare(rho, lambda r: r ** (-1 / 3), Alpha(1.0), t)
print("tauberian comparison passed:", rep.passed)

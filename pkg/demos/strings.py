"""Strings and indefinite strings through their canonical systems.

Run with ``python3 demos/strings.py``.
"""
import numpy as np

from cansys import IndefiniteStringData, StringData, indefinite_string_to_canonical, m_values, string_to_canonical
from cansys.weyl import d_nu, upper_root

# the uniform string w(x) = x is a constant canonical system with m_D(zeta) = -sqrt(-zeta)
H = string_to_canonical(StringData.closed_form({"tag": "power", "coef": 1.0, "exponent": 1.0}))
print("uniform string becomes", H.form, (H.a0, H.b0, H.c0))
zeta = np.array([-1.0, -100.0, 2j])
z = upper_root(zeta)
print("m_D(zeta) = z m(z):", np.round(z * m_values(H, z)[0], 10), "expected", np.round(-np.sqrt(-zeta), 10))

# w(x) = x**2: m_D(r mu) r**(1/3) tends to -d (-mu)**(1/3) with nu = 1/3
H = string_to_canonical(StringData.closed_form({"tag": "power", "coef": 1.0, "exponent": 2.0}))
nu, mu = 1 / 3, -1.0
print("\nstring w = x^2, ratio to the power-law asymptote along zeta = r mu")
for r in [1e2, 1e4, 1e6]:
    z = upper_root(np.array([r * mu]))
    mD = z * m_values(H, z)[0]
    print(f"  r = {r:8.0e}: {abs(mD[0] * r**-nu / (-d_nu(nu) * (-mu) ** nu)):.8f}")

# indefinite strings with w = c: M(z) = -m(-z) tends to c
print("\nindefinite string w = c: M(z) at z = 1e4 i")
for c in (0.5, 2.0):
    H = indefinite_string_to_canonical(IndefiniteStringData.closed_form({"tag": "constant", "c": c}))
    M = -m_values(H, np.array([-1e4j]))[0][0]
    print(f"  c = {c}: M = {M:.6f}")

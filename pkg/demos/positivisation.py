"""α⁺ brackets the matricial norm, and coincides with it on a matrix system.

Run with ``python3 demos/positivisation.py``.
"""

import math

import numpy as np

from matorder import positivisation as ps
from matorder import regularity as rg
from matorder import spaces as sp
from matorder import structures as st

rng = np.random.default_rng(0)

S = st.matrix_system(2)
print("matrix system M_2 (1-normal and 1-generating):")
for _ in range(3):
    x = st.random_element(S, 2, rng)
    r = ps.alpha_plus(S, x)
    print(f"  alpha = {st.level_norm(S, x).value:.9f}   alpha+ in [{r.value_lower:.9f}, {r.value_upper:.9f}]")

S = st.MatricialStructure(sp.schatten(2, 2), st.SCHATTEN, restarts=8)
x = st.random_element(S, 2, rng, hermitian=True)
w = rg.generation_witness(S, x)
print("\nS_2² at level 2, generation witness:")
print(f"  alpha(x) = {st.level_norm(S, x).value:.9f}, witness value = {w.value:.9f}")
print("  witness verified:", rg.verify_witness(S, x, w)["pass"])
print("  closed-form sqrt witness value:", f"{rg.closed_form_sqrt_witness(S, x).value:.9f}")

r = rg.am_obstruction(sp.lattice(1, 2), 2, 2, budget=20, seed=0)
print(f"\nMIN(l1²) generation constant at level 2 is at least {r['bound']:.6f} (target {math.sqrt(2) / 2:.6f})")

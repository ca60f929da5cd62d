"""The flip element separates the three natural cones over S_2².

Run with ``python3 demos/flip_separation.py``.
"""

import numpy as np

from matorder import experiments as ex
from matorder import linalg as la
from matorder import structures as st

X, F = ex.flip_element(2, p=2)
print("realigned flip equals the swap matrix:", np.allclose(la.realign_schatten(F), la.swap_matrix(2, 2)))
print("its spectrum:", np.round(np.linalg.eigvalsh(la.realign_schatten(F)), 12))

for kind in (st.MIN, st.SCHATTEN, st.MAX):
    v = st.cone_member(st.MatricialStructure(X, kind), F)
    print(f"{kind:>9}: {v.label:<11} certificate type = {v.certificate.get('type')}")

# The MIN cone only tests vector states ⟨ξ|F|ξ⟩, which land in the PSD cone of S_2².
# The natural Schatten cone asks for positivity of the realigned matrix, which fails with eigenvalue -1.

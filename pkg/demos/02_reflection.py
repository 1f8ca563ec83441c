# %% [markdown]
# # Reflection at level 2
#
# Solve for the matrix relating J^h at a and -a, then check that the
# combination h2_a is carried to h2_{-a}.

# %%
import numpy as np

from descff import ModelParams
from descff.algebra_core import h2_element
from descff.reflection import apply_reflection, solve_reflection

P = ModelParams(p=0.31)
a = 0.13
sol = solve_reflection(2, a, P)
print([lam.label() for lam in sol.basis])
print(np.round(sol.matrix, 6))
print("residual", sol.residual, "condition", sol.condition)

# %%
print(apply_reflection(sol, h2_element(a, P)))
print(h2_element(-a, P))

# %% [markdown]
# Approaching a = p/2 the matrix becomes singular; cond(M) grows like 1/d.

# %%
for d in (1e-1, 1e-2, 1e-3, 1e-4):
    print(d, solve_reflection(2, P.p / 2 - d, P).condition)

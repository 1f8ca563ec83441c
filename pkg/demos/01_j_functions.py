# %% [markdown]
# # J-functions and the free-field oracle
#
# Evaluate J^g_{N,a} directly, look at its rho-polynomial, and compare
# against the vertex-operator expectation value.

# %%
import numpy as np

from descff import DescendantElement, ModelParams, annulus_points, j_direct, j_rho
from descff.fock_oracle import t_vacuum_expectation

P = ModelParams(p=0.31)
rng = np.random.default_rng(0)
X = annulus_points(rng, 5, P)

# %%
res = j_direct(DescendantElement.one(), 0.13, X, P)
print("J_5 =", res.value)
print("oracle:", t_vacuum_expectation(X, 0.13, P))

# %% [markdown]
# The a-dependence is a Laurent polynomial in rho = exp(i pi a).
# For the exponential it is palindromic, hence even in a.

# %%
poly = j_rho(DescendantElement.one(), X, P)
print(poly)
print("palindromy defect:", poly.palindromy_defect())

# %%
g = DescendantElement.monomial((1, 1), (2,))
for a in (0.1, 0.2, 0.3):
    print(a, j_direct(g, a, X[:4], P).value)

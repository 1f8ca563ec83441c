# %% [markdown]
# # Identities at a = -1/2 and the kink layer

# %%
import numpy as np

from descff import DescendantElement, ModelParams, annulus_points
from descff.identities import check_em_conservation, check_eom, check_T_identification
from descff.kink_algebra import chain_defect, pq_consistency, q_level_rank

P = ModelParams(p=0.31)
rng = np.random.default_rng(3)

# %%
for N in (1, 3, 5):
    r = check_eom(N, annulus_points(rng, N, P), P)
    print("eom", N, r.deviation, r.passed)
for N in (2, 4):
    print("em ", N, check_em_conservation(N, annulus_points(rng, N, P), P).deviation)
    print("T  ", N, check_T_identification(N, annulus_points(rng, N, P), P).deviation)

# %% [markdown]
# Q-functionals: the chain equation, the map from P to Q, and the
# number of independent functionals per level.

# %%
h = DescendantElement.monomial((3, 1))
pts = annulus_points(rng, 6, P)
print("chain", chain_defect(h, pts[:2], pts[2], pts[3:5], P))
print("P vs Q", pq_consistency(h, pts[:2], pts[2:], P).deviation)
print([q_level_rank(n, P) for n in range(7)])

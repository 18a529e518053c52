"""Walk through the analytical planner.

Given smoothness L, gradient noise sigma, initial suboptimality F0, an
aggregator robustness coefficient c, a corrupted-worker fraction delta, and
a fixed budget C of honest gradient evaluations, the planner answers: what
batch size minimizes the convergence bound, and what learning rate /
momentum should each algorithm use?
"""

import numpy as np

from byzbatch.planner import (
    BoundParams,
    bound_byzsgdm_U,
    hyperparams_byzsgdm,
    hyperparams_byzsgdnm,
    integer_batch,
    numeric_optimal_batch_byzsgdm,
    optimal_batch_byzsgdm,
    optimal_batch_byzsgdnm,
)

params = BoundParams(L=1.0, sigma=1.0, F0=1.0, c=1.0, delta=0.25, m=16, C=1e7)
print("Setting: m=16 workers, delta=1/4 corrupted, budget C=1e7 evaluations.")

bstar, u_at, interior = optimal_batch_byzsgdm(params)
print(f"\nClosed-form optimal batch B* = {bstar:.4f} (bound value {u_at:.6f})")
print(f"Numeric argmin (golden section) = {numeric_optimal_batch_byzsgdm(params):.4f}")
print(f"Best integer batch: {integer_batch(bstar, params)}")

print("\nThe bound is convex in B: too small and the aggregator error blows up,")
print("too large and the round count T = C/(B m (1-delta)) is too short.")
for B in (1, 4, bstar, 4 * bstar, 64 * bstar):
    print(f"  U(B={B:10.3f}) = {bound_byzsgdm_U(B, params):.6f}")

print("\nThe optimum grows as corruption increases:")
for delta in (0.05, 0.15, 0.25, 0.35, 0.45):
    p = BoundParams(L=1, sigma=1, F0=1, c=1, delta=delta, m=16, C=1e7)
    print(f"  delta={delta:.2f}: B* = {optimal_batch_byzsgdm(p)[0]:9.3f},"
          f"  normalized-variant B~ = {optimal_batch_byzsgdnm(p)[0]:9.3f}")

B = int(round(bstar))
T = int(params.C / (B * params.m * (1 - params.delta)))
eta, beta = hyperparams_byzsgdm(
    BoundParams(L=1, sigma=1, F0=1, c=1, delta=0.25, m=16, T=T, B=B))
print(f"\nRecipe at B={B}, T={T}:")
print(f"  momentum variant:   eta = {eta:.6f}, beta = {beta:.6f}")
alpha, eta_nm = hyperparams_byzsgdnm(
    T, B, BoundParams(L=1, sigma=1, F0=1, c=1, delta=0.25, m=16))
print(f"  normalized variant: eta = {eta_nm:.6f}, alpha = {alpha:.6f}"
      f" (beta = {1 - alpha:.6f})")

"""Holonomy classification across the builtin catalog.

Rolls each builtin chart metric against the hyperbolic space of matching
dimension (c = -1) and prints the holonomy algebra dimension plus the
reducibility verdict.  Expected picture:

  * the hyperbolic chart itself       -> flat connection, dim 0
  * round spheres / generic metrics   -> full algebra, controllable
  * exponential warp over a line      -> reducible, lightlike invariant line
  * sinh/cosh doubly warped products  -> reducible, transversal pair
"""

import numpy as np

from hyperroll import holonomy as ho
from hyperroll import manifolds as mf

CFG = ho.SamplingConfig(n_sample_points=6, loop_count=12, stability_check=False)

catalog = [
    (mf.hyperbolic_space(2), np.array([0.1, -0.1])),
    (mf.sphere_space(2), np.array([0.1, 0.05])),
    (mf.perturbed_flat(2, amplitude=0.1, seed=7), np.array([0.0, 0.1])),
    (mf.exp_warp(), np.array([0.1, 0.05, -0.1])),
    (mf.sinh_cosh_warp(), None),
    (mf.polar_cosh_warp(k=2), None),
]

print(f"{'manifold':42s} {'dim':>4s} {'full':>5s}  verdict")
print("-" * 80)
for spec, base in catalog:
    if base is None:
        base = spec.center() + 0.05
    rep = ho.classify(spec, -1.0, base, CFG)
    full = spec.n * (spec.n + 1) // 2
    line = f"{spec.name:42s} {rep.algebra_dim:4d} {full:5d}  {rep.verdict}"
    if rep.verdict == ho.VERDICT_LIGHTLIKE:
        line += f"  L = {np.round(rep.lightlike_direction, 6)}"
    print(line)

print()
print("The lightlike case pins the chart as an exponential warped product;")
print("the transversal case pins it as a sinh/cosh (doubly) warped product.")
print("A full algebra makes the rolling control system completely")
print("controllable; anything less leaves a proper invariant subspace.")

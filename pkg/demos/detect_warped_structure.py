"""Detect the warped-product structure of a doubly warped chart, blind.

The pipeline never looks at how the metric was built: it classifies the
holonomy, pulls the invariant subspace field across the chart, splits the
unit scalar section, runs the Frobenius / umbilicity / sphericality checks
on the induced plane fields, and recovers the warping functions by
integrating the mean-curvature normal.  For the sinh/cosh doubly warped
chart the recovered pair must satisfy f1^2 - f2^2 = 1 after normalization.
"""

import numpy as np

from hyperroll import decomposition as dc
from hyperroll import holonomy as ho
from hyperroll import lorentz as lz
from hyperroll import manifolds as mf

spec = mf.sinh_cosh_warp()
base = spec.center() + 0.05
print(f"chart: {spec.name}, dimension {spec.n}")

rep = ho.classify(spec, -1.0, base,
                  ho.SamplingConfig(n_sample_points=6, loop_count=12,
                                    stability_check=False))
print(f"verdict: {rep.verdict} (algebra dim {rep.algebra_dim} of "
      f"{spec.n * (spec.n + 1) // 2})")

form = lz.BilinearForm(spec.n, -1.0)
v1 = next(s for s in rep.invariant_subspaces
          if lz.restricted_signature(s, form)[1] == 1)
print(f"chose the signature-(m,1) invariant subspace, dim {v1.dim}")

field = dc.InvariantSubspaceField.from_frame_basis(spec, -1.0, base,
                                                   v1.vectors, step=2e-3)
split = dc.SplitSection(field)
x = base + np.array([0.25, -0.2, 0.15, 0.1])
v = split.value(x)
print(f"split of the unit section at s={x[0]:.3f}:")
print(f"  tangent part  {np.round(v.w1, 6)}  (radial direction)")
print(f"  scalar part   {v.w1_scalar:.6f}  (cosh^2 s = {np.cosh(x[0])**2:.6f})")

pts = [np.random.default_rng(1).uniform(spec.domain[:, 0] + 0.1,
                                        spec.domain[:, 1] - 0.1)
       for _ in range(6)]
print(f"curvature annihilation residual: "
      f"{dc.curvature_annihilation(spec, split, pts):.2e}")

dists = dc.induced_distributions(spec, split)
print("induced plane fields:", {k: d.rank for k, d in dists.items()})
for name in ("D1", "D2", "V2M"):
    ok, res = dc.frobenius_check(spec, dists[name], base)
    print(f"  {name} integrable: {ok} (bracket residual {res:.2e})")
ii, _ = dc.second_fundamental_form(spec, dists["V2M"], base)
print(f"  V2M leaves totally geodesic: |II| = {np.abs(ii).max():.2e}")
sph = dc.spherical_check(spec, dists["D1"],
                         lambda p: split.value(p).w1 / split.value(p).w1_scalar,
                         base)
print(f"  D1 leaves spherical: residual {sph['residual']:.2e}")

s = np.linspace(spec.domain[0, 0] + 0.08, spec.domain[0, 1] - 0.08, 101)
wr1 = dc.recover_warp(spec, lambda p: split.value(p).w1 / split.value(p).w1_scalar,
                      base, 0, s)
wr2 = dc.recover_warp(spec, lambda p: split.value(p).w2 / split.value(p).w2_scalar,
                      base, 0, s)
print(f"recovered warps: {wr1.kind} (shift {wr1.shift:+.2e}), "
      f"{wr2.kind} (shift {wr2.shift:+.2e})")
f1, f2 = wr1.normalized(s), wr2.normalized(s)
print(f"pair identity |f1^2 - f2^2 - 1| = {np.abs(f1**2 - f2**2 - 1).max():.2e}")
print()
print("Conclusion: the chart is (an open piece of) an interval times a")
print("sinh-scaled factor times a cosh-scaled factor, recovered without")
print("looking at the construction.")

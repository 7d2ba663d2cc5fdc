"""Roll the round 2-sphere on the hyperbolic plane around small loops.

The contact state carries the point on each surface plus the isometry
between the tangent planes.  Rolling around a closed loop returns to the
same base point with the ambient configuration moved by an isometry of the
hyperbolic model, the loop element.  Two things are checked on screen:

  * the element's matrix logarithm follows eps^2 times the curvature
    operator of the governing connection as the loop shrinks,
  * the element agrees with the parallel transport of that connection
    under one fixed algebraic convention on every loop.
"""

import numpy as np
from scipy.linalg import logm

from hyperroll import manifolds as mf
from hyperroll import rolling as rl
from hyperroll.connection import rolling_curvature

spec = mf.sphere_space(2)
base = np.array([0.1, 0.05])
state = rl.initial_state(spec, -1.0, base)
print("initial contact residuals:", rl.state_residuals(spec, -1.0, state))
print()

curv = rolling_curvature(spec, -1.0, base, np.eye(2)[0], np.eye(2)[1]).mat
iota = rl.state_identification(state)
conj = iota @ curv @ np.linalg.inv(iota)

print("shrinking square loops: log(element) ~ eps^2 * conjugated curvature")
print(f"{'eps':>6s} {'|log B - eps^2 K|':>20s} {'per eps^3':>12s}")
for eps in (0.2, 0.1, 0.05):
    loop = mf.rectangle_loop(spec, base, (0, 1), eps)
    b = rl.rolling_loop_element(spec, -1.0, state, loop, step=1e-3)
    err = np.abs(np.real(logm(b)) - eps**2 * conj).max()
    print(f"{eps:6.2f} {err:20.3e} {err / eps**3:12.3f}")

print()
print("correspondence with the connection transport (fixed convention:"
      f" {rl.CORRESPONDENCE_CONVENTION})")
rng = np.random.default_rng(0)
for k in range(5):
    anchor = base + rng.uniform(-0.15, 0.15, 2)
    eps = (0.08, 0.1, 0.12)[k % 3]
    pts = [base, anchor, anchor + [eps, 0], anchor + [eps, eps],
           anchor + [0, eps], anchor, base]
    loop = mf.chart_path(spec, pts)
    rep = rl.holonomy_correspondence(spec, -1.0, state, loop, step=1e-3)
    print(f"  loop {k}: convention={rep.convention:8s}"
          f" deviation={rep.matched_deviation:.2e}")

print()
print("constraint drift over a long open path (step 1e-3):")
path = mf.chart_path(spec, [base, [0.5, -0.2], [-0.3, 0.4], [0.2, -0.5]])
res = rl.roll_along(spec, -1.0, state, path, step=1e-3)
for key, val in res.drift.items():
    print(f"  {key:22s} {val:.3e}")

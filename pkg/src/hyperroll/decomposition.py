"""Warped-product structure checks driven by an invariant subspace.

Given an invariant subspace of the extended holonomy at a base point, this
module extends it over the chart by parallel transport, splits the unit
scalar section against the h-orthogonal complement, and runs the downstream
geometry: curvature annihilation of the split components, integrability of
the induced distributions, umbilicity and sphericality of their leaves, and
recovery of the warping function from the mean-curvature normal, fitted
against the hyperbolic-cosine family that the transport ODEs force.  The
lightlike case has its own battery around the distinguished unit field L.

Every check returns residual magnitudes; tolerances live with the callers.
"""

from dataclasses import dataclass

import numpy as np

from . import lorentz
from .connection import extended_frame, h_matrix, transport_ext_matrix
from .manifolds import FD_STEP_1, b_action, chart_path, christoffel, g_norm, riemann, riemann_action


class WrongCaseError(RuntimeError):
    """Operation applied to the wrong invariant-subspace case."""


class NotAWarpError(RuntimeError):
    """The candidate normal field is not a gradient-type warp normal."""


class DegenerateSplitError(RuntimeError):
    """w_1 vanished numerically; the invariant subspace input is wrong."""


# ---------------------------------------------------------------------------
# invariant subspace as a field over the chart
# ---------------------------------------------------------------------------

class InvariantSubspaceField:
    """Extends a base-point subspace of TM + R over the chart by transport.

    Transport runs along coordinate staircase rays from the base point
    (axis by axis); invariance of the subspace makes the extension
    path-independent up to integration error, and path_independence_residual
    measures exactly that against the straight-segment alternative.
    """

    def __init__(self, spec, c, base_x, basis_chart, step=2e-3):
        self.spec = spec
        self.c = float(c)
        self.base_x = np.asarray(base_x, dtype=float)
        self.basis_chart = np.atleast_2d(np.asarray(basis_chart, dtype=float))
        self.step = step
        self._cache = {}

    @staticmethod
    def from_frame_basis(spec, c, base_x, basis_j, step=2e-3):
        """Build from basis rows expressed in the orthonormal frame at base."""
        phi = extended_frame(spec, c, base_x)
        rows = (phi @ np.atleast_2d(basis_j).T).T
        return InvariantSubspaceField(spec, c, base_x, rows, step)

    @property
    def dim(self):
        return self.basis_chart.shape[0]

    def _staircase(self, x):
        pts = [self.base_x]
        cur = self.base_x.copy()
        for k in range(self.spec.n):
            if abs(x[k] - cur[k]) > 0:
                nxt = cur.copy()
                nxt[k] = x[k]
                pts.append(nxt)
                cur = nxt
        if len(pts) == 1:
            pts.append(cur)
        return chart_path(self.spec, pts)

    def basis_at(self, x):
        """Chart-frame basis rows of the transported subspace at x."""
        x = np.asarray(x, dtype=float)
        key = tuple(np.round(x, 12))
        if key not in self._cache:
            t = transport_ext_matrix(self.spec, self.c, self._staircase(x),
                                     step=self.step).value
            self._cache[key] = (t @ self.basis_chart.T).T
        return self._cache[key]

    def path_independence_residual(self, x):
        """Angle-type gap between staircase and straight-segment transports."""
        x = np.asarray(x, dtype=float)
        stair = self.basis_at(x)
        t = transport_ext_matrix(self.spec, self.c,
                                 chart_path(self.spec, [self.base_x, x]),
                                 step=self.step).value
        straight = (t @ self.basis_chart.T).T
        qs = np.linalg.qr(stair.T)[0]
        qd = np.linalg.qr(straight.T)[0]
        return float(np.abs(qs @ (qs.T @ qd) - qd).max())


def perp_local(spec, c, x, basis_chart, rank_tol=1e-9):
    """h-orthogonal complement at x of chart-frame basis rows."""
    hm = h_matrix(spec, c, x)
    a = np.atleast_2d(basis_chart) @ hm
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    r = int(np.sum(s > rank_tol * (s[0] if s.size else 1.0)))
    return vt[r:]


class FunctionSubspaceField:
    """Subspace field given in closed form (for designed examples)."""

    def __init__(self, spec, c, base_x, basis_fn):
        self.spec = spec
        self.c = float(c)
        self.base_x = np.asarray(base_x, dtype=float)
        self._fn = basis_fn

    @property
    def dim(self):
        return self.basis_at(self.base_x).shape[0]

    def basis_at(self, x):
        return np.atleast_2d(np.asarray(self._fn(np.asarray(x, dtype=float)),
                                        dtype=float))


def designed_v1_sinh_cosh(spec, base_x=None):
    """Closed-form invariant subspace of the sinh/cosh doubly warped charts.

    Rows: the distinguished combination cosh(s)(-sinh(s) d_s, cosh(s)) plus
    the cosh-fiber coordinate directions with zero scalar part.  Valid for
    charts whose first coordinate is the radial direction and whose last
    block is the cosh-warped fiber.
    """
    nb = spec.base.n
    n = spec.n
    if base_x is None:
        base_x = spec.center()

    def rows(x):
        s = x[0]
        out = np.zeros((1 + spec.fiber.n, n + 1))
        out[0, 0] = -np.cosh(s) * np.sinh(s)
        out[0, n] = np.cosh(s) ** 2
        for k in range(spec.fiber.n):
            out[1 + k, nb + k] = 1.0
        return out

    return FunctionSubspaceField(spec, -1.0, base_x, rows)


def designed_lightlike_line(spec, base_x=None):
    """Closed-form lightlike invariant line (d_s, 1) of the exponential
    warped chart."""
    n = spec.n
    if base_x is None:
        base_x = spec.center()

    def rows(x):
        out = np.zeros((1, n + 1))
        out[0, 0] = 1.0
        out[0, n] = 1.0
        return out

    return FunctionSubspaceField(spec, -1.0, base_x, rows)


# ---------------------------------------------------------------------------
# the split of the unit scalar section
# ---------------------------------------------------------------------------

@dataclass
class SplitValue:
    w1: np.ndarray
    w1_scalar: float
    w2: np.ndarray
    w2_scalar: float


class SplitSection:
    """Pointwise splitting (0, 1) = (W1, w1) + (W2, w2) against V1, V2.

    V2 is computed locally as the h-complement of the transported V1, which
    is itself invariant because the holonomy is h-antisymmetric.
    """

    def __init__(self, v1_field, w1_floor=1e-8):
        self.v1_field = v1_field
        self.spec = v1_field.spec
        self.c = v1_field.c
        self.w1_floor = w1_floor
        base = v1_field.base_x
        b1 = v1_field.basis_at(base)
        b2 = perp_local(self.spec, self.c, base, b1)
        inter = _intersection_dim(b1, b2)
        if inter != 0:
            raise WrongCaseError(
                "V1 meets its h-complement (lightlike case); use the "
                "lightlike battery instead of the unit-section split")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        n = self.spec.n
        b1 = self.v1_field.basis_at(x)
        b2 = perp_local(self.spec, self.c, x, b1)
        target = np.zeros(n + 1)
        target[-1] = 1.0
        stacked = np.vstack([b1, b2]).T
        coef, *_ = np.linalg.lstsq(stacked, target, rcond=None)
        p1 = b1.T @ coef[: b1.shape[0]]
        p2 = b2.T @ coef[b1.shape[0]:]
        if abs(p1[-1]) < self.w1_floor:
            raise DegenerateSplitError(
                "w_1 vanished on the chart; invariant subspace input is wrong")
        return SplitValue(p1[:-1], float(p1[-1]), p2[:-1], float(p2[-1]))

    def residuals(self, x):
        """Structural identities of the split at one point."""
        v = self.value(x)
        n = self.spec.n
        sum_res = max(
            float(np.abs(v.w1 + v.w2).max()),
            abs(v.w1_scalar + v.w2_scalar - 1.0))
        mirror_res = float(np.abs(v.w1 + v.w2).max())
        hm = h_matrix(self.spec, self.c, x)
        a1 = np.append(v.w1, v.w1_scalar)
        a2 = np.append(v.w2, v.w2_scalar)
        ortho = abs(float(a1 @ hm @ a2))
        pos = float(a2 @ hm @ a2)
        return {"sum": sum_res, "mirror": mirror_res, "orthogonality": ortho,
                "v2_h_norm_sq": pos}


def _intersection_dim(b1, b2, tol=1e-7):
    r1 = np.linalg.matrix_rank(b1, tol)
    r2 = np.linalg.matrix_rank(b2, tol)
    r12 = np.linalg.matrix_rank(np.vstack([b1, b2]), tol)
    return r1 + r2 - r12


def curvature_annihilation(spec, split, points):
    """max over points and coordinate planes of |R(X,Y)W_a + B(X,Y)W_a|.

    W_a are unit-normalized; X, Y run over g-normalized coordinate
    directions.  Points where W_a nearly vanishes contribute zero.
    """
    worst = 0.0
    n = spec.n
    for x in points:
        x = np.asarray(x, dtype=float)
        g = spec.metric(x)
        r = riemann(spec, x)
        v = split.value(x)
        for w in (v.w1, v.w2):
            nw = g_norm(g, w)
            if nw < 1e-10:
                continue
            wn = w / nw
            for i in range(n):
                for j in range(i + 1, n):
                    xi = np.eye(n)[i] / np.sqrt(g[i, i])
                    yj = np.eye(n)[j] / np.sqrt(g[j, j])
                    res = riemann_action(r, xi, yj, wn) + b_action(g, xi, yj, wn)
                    worst = max(worst, g_norm(g, res))
    return worst


# ---------------------------------------------------------------------------
# distributions, second fundamental form, sphericality
# ---------------------------------------------------------------------------

@dataclass
class DistributionField:
    """A rank-r plane field spanned by smooth vector-field callbacks."""

    spanning_fields: list
    rank: int

    def matrix_at(self, x):
        cols = np.column_stack([f(np.asarray(x, dtype=float))
                                for f in self.spanning_fields])
        return cols

    def rank_at(self, x, tol=1e-8):
        return int(np.linalg.matrix_rank(self.matrix_at(x), tol))


def coordinate_distribution(spec, axes):
    n = spec.n
    fields = [(lambda x, k=k: np.eye(n)[k]) for k in axes]
    return DistributionField(fields, len(axes))


def _field_jacobian(fld, x, h=FD_STEP_1):
    n = len(x)
    out = np.empty((n, n))
    for k in range(n):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        out[:, k] = (np.asarray(fld(xp)) - np.asarray(fld(xm))) / (2 * h)
    return out


def _g_projector(g, cols):
    """g-orthogonal projector onto the column span."""
    gram = cols.T @ g @ cols
    return cols @ np.linalg.solve(gram, cols.T @ g)


def frobenius_check(spec, dist, x, tol=1e-5):
    """Involutivity test: all pairwise brackets stay in the plane field.

    Returns (integrable, worst residual); a rank drop at x is flagged by
    returning (None, nan) and the caller decides.
    """
    x = np.asarray(x, dtype=float)
    cols = dist.matrix_at(x)
    if np.linalg.matrix_rank(cols, 1e-8) < dist.rank:
        return None, float("nan")
    g = spec.metric(x)
    proj = _g_projector(g, cols)
    jacs = [_field_jacobian(f, x) for f in dist.spanning_fields]
    vals = [np.asarray(f(x), dtype=float) for f in dist.spanning_fields]
    worst = 0.0
    for a in range(dist.rank):
        for b in range(a + 1, dist.rank):
            bracket = jacs[b] @ vals[a] - jacs[a] @ vals[b]
            res = bracket - proj @ bracket
            worst = max(worst, g_norm(g, res))
    return worst <= tol, worst


def second_fundamental_form(spec, dist, x):
    """II[a, b] = normal part of nabla_{X_a} X_b for the spanning fields.

    Returns (ii, symmetry_residual) where ii has shape (r, r, n); callers
    check it against g(X_a, X_b) nu for candidate normals nu.
    """
    x = np.asarray(x, dtype=float)
    cols = dist.matrix_at(x)
    g = spec.metric(x)
    gamma = christoffel(spec, x)
    proj = _g_projector(g, cols)
    jacs = [_field_jacobian(f, x) for f in dist.spanning_fields]
    vals = [np.asarray(f(x), dtype=float) for f in dist.spanning_fields]
    r = dist.rank
    ii = np.empty((r, r, spec.n))
    for a in range(r):
        for b in range(r):
            nab = jacs[b] @ vals[a] + np.einsum("kij,i,j->k", gamma,
                                                vals[a], vals[b])
            ii[a, b] = nab - proj @ nab
    sym = float(np.abs(ii - np.swapaxes(ii, 0, 1)).max())
    return ii, sym


def umbilic_normal(spec, dist, x):
    """Least-squares nu with II(X, Y) = g(X, Y) nu, plus the fit residual."""
    x = np.asarray(x, dtype=float)
    g = spec.metric(x)
    cols = dist.matrix_at(x)
    ii, _ = second_fundamental_form(spec, dist, x)
    r = dist.rank
    gram = cols.T @ g @ cols
    num = np.zeros(spec.n)
    den = 0.0
    for a in range(r):
        for b in range(r):
            num += gram[a, b] * ii[a, b]
            den += gram[a, b] ** 2
    nu = num / den
    worst = 0.0
    for a in range(r):
        for b in range(r):
            worst = max(worst, g_norm(g, ii[a, b] - gram[a, b] * nu))
    return nu, worst


def spherical_check(spec, dist, nu_field, x, tol=1e-4):
    """Residual of the normal component of nabla_X nu over X spanning dist.

    A vanishing nu is the totally geodesic degenerate case and passes with a
    flag instead of a residual.
    """
    x = np.asarray(x, dtype=float)
    g = spec.metric(x)
    nu = np.asarray(nu_field(x), dtype=float)
    if g_norm(g, nu) < 1e-10:
        return {"degenerate": True, "residual": 0.0, "passes": True}
    cols = dist.matrix_at(x)
    proj = _g_projector(g, cols)
    gamma = christoffel(spec, x)
    jac = _field_jacobian(nu_field, x)
    worst = 0.0
    for a in range(dist.rank):
        xa = cols[:, a]
        xa = xa / g_norm(g, xa)
        nab = jac @ xa + np.einsum("kij,i,j->k", gamma, xa, nu)
        res = nab - proj @ nab
        worst = max(worst, g_norm(g, res))
    return {"degenerate": False, "residual": worst, "passes": worst <= tol}


def induced_distributions(spec, split):
    """Plane fields induced by the transversal split.

    From the transported pair (V1, V2): the tangent shadow of V_beta and its
    g-orthogonal complement D_alpha.  Spanning fields are g-projections of
    fixed coordinate vectors chosen at the base point, which keeps them
    smooth across the chart (plain null-space bases would carry arbitrary
    gauge jumps and break the finite-difference brackets).

    Returns {"D1": ..., "D2": ..., "V2M": ..., "V1M": ...} as
    DistributionField objects (entries missing when the rank is zero).
    """
    v1f = split.v1_field
    spec_ = v1f.spec
    n = spec_.n

    def tangent_cols(which, x):
        b1 = v1f.basis_at(x)
        if which == 1:
            rows = b1
        else:
            rows = perp_local(spec_, v1f.c, x, b1)
        return rows[:, :n].T

    def complement_field(which, k):
        def f(x):
            x = np.asarray(x, dtype=float)
            g = spec_.metric(x)
            cols = tangent_cols(which, x)
            proj = _g_projector(g, cols)
            return (np.eye(n) - proj) @ np.eye(n)[k]
        return f

    def shadow_field(which, k):
        def f(x):
            x = np.asarray(x, dtype=float)
            g = spec_.metric(x)
            cols = tangent_cols(which, x)
            proj = _g_projector(g, cols)
            return proj @ np.eye(n)[k]
        return f

    base = v1f.base_x
    out = {}
    for which, comp_name, shadow_name in ((2, "D1", "V2M"), (1, "D2", "V1M")):
        cols0 = tangent_cols(which, base)
        rank_shadow = int(np.linalg.matrix_rank(cols0, 1e-8))
        rank_comp = n - rank_shadow
        g0 = spec_.metric(base)
        proj0 = _g_projector(g0, cols0)
        # greedy choice of coordinate seeds with independent projections
        def pick(mat_fn, rank):
            chosen, basis = [], []
            for k in range(n):
                v = mat_fn(k)
                res = v.copy()
                for b in basis:
                    res = res - (b @ res) * b
                if np.linalg.norm(res) > 1e-6:
                    chosen.append(k)
                    basis.append(res / np.linalg.norm(res))
                if len(chosen) == rank:
                    break
            return chosen

        if rank_comp > 0:
            axes = pick(lambda k: (np.eye(n) - proj0) @ np.eye(n)[k], rank_comp)
            out[comp_name] = DistributionField(
                [complement_field(which, k) for k in axes], rank_comp)
        if rank_shadow > 0:
            axes = pick(lambda k: proj0 @ np.eye(n)[k], rank_shadow)
            out[shadow_name] = DistributionField(
                [shadow_field(which, k) for k in axes], rank_shadow)
    return out


# ---------------------------------------------------------------------------
# warp recovery
# ---------------------------------------------------------------------------

@dataclass
class WarpRecovery:
    s_grid: np.ndarray
    f_samples: np.ndarray
    coef_cosh: float
    coef_sinh: float
    fit_residual: float
    ode_residual: float
    kind: str            # exp_minus | exp_plus | cosh_like | sinh_like
    shift: float         # f ~ scale * cosh(s - shift) / sinh(s - shift)
    scale: float
    closedness_residual: float

    def normalized(self, s):
        """The fitted function rescaled to the unit-normalization family."""
        if self.kind == "exp_minus":
            return np.exp(-(np.asarray(s) - self.s_grid[0]))
        if self.kind == "exp_plus":
            return np.exp(np.asarray(s) - self.s_grid[0])
        if self.kind == "cosh_like":
            return np.cosh(np.asarray(s) - self.shift)
        return np.sinh(np.asarray(s) - self.shift)


def _closedness_residual(spec, nu_field, points, h=1e-4):
    """Antisymmetrized mixed partials of the 1-form g(nu, .)."""

    def omega(x):
        return spec.metric(x) @ np.asarray(nu_field(x), dtype=float)

    worst = 0.0
    n = spec.n
    for x in points:
        x = np.asarray(x, dtype=float)
        jac = np.empty((n, n))
        for k in range(n):
            xp, xm = x.copy(), x.copy()
            xp[k] += h
            xm[k] -= h
            jac[:, k] = (omega(xp) - omega(xm)) / (2 * h)
        worst = max(worst, float(np.abs(jac - jac.T).max()))
    return worst


def recover_warp(spec, nu_field, x0, axis, s_values, closedness_tol=1e-4):
    """Integrate f'/f = -g(nu, gamma') along a coordinate curve and fit.

    The curve is s -> x0 with coordinate `axis` replaced by s; f is
    normalized to 1 at the first grid value.  The fitted model is
    A cosh(s) + B sinh(s), the solution family of f'' = f; the kind
    classifies the degenerate exponential rays A = -B / A = B against the
    cosh-like (|A| > |B|) and sinh-like (|A| < |B|) branches.
    """
    x0 = np.asarray(x0, dtype=float)
    s_values = np.asarray(s_values, dtype=float)

    def point(s):
        x = x0.copy()
        x[axis] = s
        return x

    pts = [point(s) for s in s_values]
    closed = _closedness_residual(spec, nu_field, pts[:: max(1, len(pts) // 5)])
    if closed > closedness_tol:
        raise NotAWarpError(
            f"1-form of the normal field is not closed (residual {closed:.2e})")

    logf_slope = []
    for x in pts:
        g = spec.metric(x)
        nu = np.asarray(nu_field(x), dtype=float)
        logf_slope.append(-(g @ nu)[axis])
    logf_slope = np.array(logf_slope)

    from scipy.integrate import cumulative_simpson

    logf = cumulative_simpson(logf_slope, x=s_values, initial=0.0)
    f = np.exp(logf)

    basis = np.column_stack([np.cosh(s_values), np.sinh(s_values)])
    (a, b), *_ = np.linalg.lstsq(basis, f, rcond=None)
    fit = basis @ np.array([a, b])
    fit_residual = float(np.abs(fit - f).max())

    # f''/f = (log f)'' + ((log f)')^2 with (log f)' the measured slope;
    # differencing the smooth slope avoids the sawtooth of the cumulative
    # quadrature; fourth-order stencil keeps the truncation harmless where
    # the slope is steep
    h = s_values[1] - s_values[0]
    slope_d = np.gradient(logf_slope, s_values, edge_order=2)
    slope_d[2:-2] = (logf_slope[:-4] - 8 * logf_slope[1:-3]
                     + 8 * logf_slope[3:-1] - logf_slope[4:]) / (12 * h)
    fdd = f * (slope_d + logf_slope**2)
    ode_residual = float(np.abs(fdd[2:-2] - f[2:-2]).max())

    mag = max(abs(a), abs(b))
    if abs(a + b) <= 1e-6 * mag:
        kind, shift, scale = "exp_minus", 0.0, a
    elif abs(a - b) <= 1e-6 * mag:
        kind, shift, scale = "exp_plus", 0.0, a
    elif a * a > b * b:
        scale = np.sign(a) * np.sqrt(a * a - b * b)
        shift = -np.arcsinh(b / scale)
        kind = "cosh_like"
    else:
        scale = np.sign(b) * np.sqrt(b * b - a * a)
        shift = -np.arcsinh(a / scale)
        kind = "sinh_like"
    return WarpRecovery(s_values, f, float(a), float(b), fit_residual,
                        ode_residual, kind, float(shift), float(scale), closed)


# ---------------------------------------------------------------------------
# lightlike case: the distinguished unit field
# ---------------------------------------------------------------------------

def lightlike_field_from_line(v1_field):
    """Unit vector field L from a transported lightlike line (L, 1)."""

    def l_of(x):
        rows = v1_field.basis_at(x)
        v = rows[0]
        return v[:-1] / v[-1]

    return l_of


def lightlike_structure(spec, c, l_field, points):
    """Residual battery for the lightlike invariant line.

    (a) nabla_X L + X - g(X, L) L over coordinate directions;
    (b) the geodesic property nabla_L L;
    (c) invariance: D_X (L, 1) - g(X, L) (L, 1) for the extended derivative.
    """
    if c != -1.0:
        raise ValueError("the lightlike battery is stated for c = -1")
    from .connection import nabla_ext

    def section(p):
        return np.asarray(l_field(p), dtype=float), 1.0

    res_a = res_b = res_c = 0.0
    n = spec.n
    for x in points:
        x = np.asarray(x, dtype=float)
        g = spec.metric(x)
        gamma = christoffel(spec, x)
        lve = np.asarray(l_field(x), dtype=float)
        jac = _field_jacobian(l_field, x)
        for k in range(n):
            xv = np.eye(n)[k] / np.sqrt(g[k, k])
            nab = jac @ xv + np.einsum("kij,i,j->k", gamma, xv, lve)
            res_a = max(res_a, g_norm(g, nab + xv - (xv @ g @ lve) * lve))
            # invariance via the extended derivative: D_X (L, 1) must be a
            # multiple of (L, 1), with factor g(X, L)
            alpha = float(xv @ g @ lve)
            ext = nabla_ext(spec, c, x, xv, section)
            res_c = max(res_c, g_norm(g, ext.tangent - alpha * lve),
                        abs(ext.scalar - alpha))
        nab_l = jac @ lve + np.einsum("kij,i,j->k", gamma, lve, lve)
        res_b = max(res_b, g_norm(g, nab_l))
    return {"shape_operator": res_a, "geodesic": res_b, "invariance": res_c}


# ---------------------------------------------------------------------------
# locus of the distinguished slice
# ---------------------------------------------------------------------------

def n1_detector(spec, c, v1_field, grid_points, tol=1e-5):
    """Residual of projecting (0, 1) into the transported V1 over a grid.

    Returns (hits, residual_list).  In the lightlike case the split is
    undefined and the detector reports the wrong-case note instead.
    """
    try:
        split = SplitSection(v1_field)
    except WrongCaseError:
        return [], [], "lightlike case: no transversal locus"
    hits, residuals = [], []
    for x in grid_points:
        x = np.asarray(x, dtype=float)
        v = split.value(x)
        phi = extended_frame(spec, c, x)
        comp = np.linalg.solve(phi, np.append(v.w2, v.w2_scalar))
        r = float(np.linalg.norm(comp))
        residuals.append(r)
        if r <= tol:
            hits.append(x)
    return hits, residuals, ""

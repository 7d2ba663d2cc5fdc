"""Chart-based Riemannian metrics and the differential geometry kernels.

A manifold here is a single chart: an axis-aligned box in R^n together with
a smooth field of symmetric positive-definite matrices.  Builtins cover
constant-curvature spaces (hyperboloid graph chart for negative curvature,
stereographic chart for positive), warped and doubly warped products built
recursively from factors, and deterministic trigonometric perturbations of
the flat metric.  On top of the metric the module computes Christoffel
symbols (analytic metric derivatives when the builtin provides them,
central finite differences otherwise), the curvature tensor, geodesics and
parallel transport by fixed-step RK4, and a Jacobi-field consistency check
used by the warped-product machinery.
"""

from dataclasses import dataclass, field

import numpy as np

FD_STEP_1 = 1e-5   # first metric derivatives
FD_STEP_2 = 1e-4   # derivatives of Christoffel symbols
DEFAULT_ODE_STEP = 1e-3


class DomainError(ValueError):
    """A chart point fell outside the declared coordinate box."""


# ---------------------------------------------------------------------------
# metric specifications
# ---------------------------------------------------------------------------

class ManifoldSpec:
    """Base class: a metric field over an axis-aligned chart box.

    Subclasses implement metric(x); those with closed-form derivatives also
    override metric_deriv and set analytic_deriv = True.
    """

    analytic_deriv = False
    name = "manifold"

    def __init__(self, n, domain):
        self.n = int(n)
        dom = np.asarray(domain, dtype=float).reshape(self.n, 2)
        if np.any(dom[:, 1] <= dom[:, 0]):
            raise ValueError("empty chart domain")
        self.domain = dom

    def metric(self, x):
        raise NotImplementedError

    def metric_deriv(self, x):
        """dg[k, i, j] = d g_ij / d x_k, by central differences."""
        x = np.asarray(x, dtype=float)
        dg = np.empty((self.n, self.n, self.n))
        h = FD_STEP_1
        for k in range(self.n):
            xp = x.copy()
            xm = x.copy()
            xp[k] += h
            xm[k] -= h
            dg[k] = (self.metric(xp) - self.metric(xm)) / (2.0 * h)
        return dg

    def metric_deriv2(self, x):
        """d2g[a, b, i, j] = d^2 g_ij / d x_a d x_b (central differences of
        metric_deriv; builtins override with closed forms)."""
        x = np.asarray(x, dtype=float)
        d2g = np.empty((self.n, self.n, self.n, self.n))
        h = FD_STEP_2
        for a in range(self.n):
            xp, xm = x.copy(), x.copy()
            xp[a] += h
            xm[a] -= h
            d2g[a] = (self.metric_deriv(xp) - self.metric_deriv(xm)) / (2.0 * h)
        return 0.5 * (d2g + np.swapaxes(d2g, 0, 1))

    def contains(self, x, margin=0.0):
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= self.domain[:, 0] + margin)
            and np.all(x <= self.domain[:, 1] - margin)
        )

    def center(self):
        return 0.5 * (self.domain[:, 0] + self.domain[:, 1])

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} n={self.n}>"


def metric_at(spec, x):
    """Metric matrix at an interior chart point (domain-checked entry point)."""
    if not spec.contains(x):
        raise DomainError(f"point {x} outside chart domain of {spec.name}")
    return spec.metric(np.asarray(x, dtype=float))


class Flat(ManifoldSpec):
    """Euclidean box: the identity metric."""

    analytic_deriv = True

    def __init__(self, n, half_width=1.0, name="flat"):
        super().__init__(n, [[-half_width, half_width]] * n)
        self.name = name

    def metric(self, x):
        return np.eye(self.n)

    def metric_deriv(self, x):
        return np.zeros((self.n, self.n, self.n))

    def metric_deriv2(self, x):
        return np.zeros((self.n, self.n, self.n, self.n))


class Interval(Flat):
    """One-dimensional flat factor used as a warped-product base."""

    def __init__(self, a, b, name="interval"):
        ManifoldSpec.__init__(self, 1, [[a, b]])
        self.name = name


class PerturbedFlat(ManifoldSpec):
    """delta_ij plus a seeded superposition of smooth sine bumps.

    Deterministic in the seed, so holonomy verdicts are reproducible.  The
    amplitude is capped at 0.2, which keeps the smallest eigenvalue of g
    above 1 - 0.2 n > 0 for n <= 4.
    """

    analytic_deriv = True
    N_MODES = 2

    def __init__(self, n, amplitude=0.1, seed=0, half_width=1.0):
        super().__init__(n, [[-half_width, half_width]] * n)
        if not 0.0 <= amplitude <= 0.2:
            raise ValueError("amplitude must lie in [0, 0.2]")
        self.amplitude = float(amplitude)
        self.seed = int(seed)
        self.name = f"perturbed_flat(n={n}, amp={amplitude}, seed={seed})"
        rng = np.random.default_rng(seed)
        m = self.N_MODES
        self.waves = rng.uniform(0.6, 1.4, size=(m, n, n, n)) * rng.choice(
            [-1.0, 1.0], size=(m, n, n, n)
        )
        self.phases = rng.uniform(0.0, 2 * np.pi, size=(m, n, n))
        self.coeffs = rng.uniform(0.3, 1.0, size=(m, n, n))
        # symmetrize mode data and normalize so |S_ij| <= 1
        for a in (self.waves, self.phases, self.coeffs):
            a += np.swapaxes(a, 1, 2).copy()
            a *= 0.5
        self.coeffs /= np.sum(self.coeffs, axis=0)[None]

    def _angles(self, x):
        return np.einsum("mijk,k->mij", self.waves, x) + self.phases

    def metric(self, x):
        s = np.sum(self.coeffs * np.sin(self._angles(x)), axis=0)
        return np.eye(self.n) + self.amplitude * s

    def metric_deriv(self, x):
        cos = self.coeffs * np.cos(self._angles(x))
        dg = np.einsum("mij,mijk->kij", cos, self.waves)
        return self.amplitude * dg

    def metric_deriv2(self, x):
        sin = self.coeffs * np.sin(self._angles(x))
        d2g = -np.einsum("mij,mija,mijb->abij", sin, self.waves, self.waves)
        return self.amplitude * d2g


class SpaceFormChart(ManifoldSpec):
    """Chart on the constant-curvature space of curvature k != 0.

    Negative curvature uses the global graph chart of the hyperboloid
    y -> (y, sqrt(1 - k |y|^2)); positive curvature uses a stereographic
    chart g = delta / (1 + (k/4)|y|^2)^2, which misses only the antipode.
    Both expose the ambient embedding onto the model quadric
    k(x_1^2 + ... + x_n^2) + x_{n+1}^2 = 1.
    """

    analytic_deriv = True

    def __init__(self, n, curvature, half_width=None, chart=None):
        if curvature == 0.0:
            raise ValueError("curvature must be nonzero; use Flat for k = 0")
        self.curvature = float(curvature)
        if chart is None:
            chart = "graph" if curvature < 0 else "stereographic"
        if chart == "graph" and curvature > 0:
            raise ValueError("graph chart only covers negative curvature")
        self.chart = chart
        if half_width is None:
            half_width = 1.0 if curvature < 0 else 0.8 / np.sqrt(curvature)
        super().__init__(n, [[-half_width, half_width]] * n)
        self.name = f"space_form(n={n}, k={curvature})"

    def metric(self, x):
        k = self.curvature
        if self.chart == "graph":
            denom = 1.0 - k * (x @ x)
            return np.eye(self.n) + k * np.outer(x, x) / denom
        lam = 1.0 / (1.0 + 0.25 * k * (x @ x))
        return lam * lam * np.eye(self.n)

    def metric_deriv(self, x):
        k = self.curvature
        n = self.n
        dg = np.empty((n, n, n))
        if self.chart == "graph":
            denom = 1.0 - k * (x @ x)
            outer = np.outer(x, x)
            eye = np.eye(n)
            for a in range(n):
                term = eye[a][:, None] * x[None, :] + x[:, None] * eye[a][None, :]
                dg[a] = k * term / denom + 2.0 * k * k * x[a] * outer / denom**2
            return dg
        lam = 1.0 / (1.0 + 0.25 * k * (x @ x))
        for a in range(n):
            dg[a] = -k * x[a] * lam**3 * np.eye(n)
        return dg

    def metric_deriv2(self, x):
        k = self.curvature
        n = self.n
        eye = np.eye(n)
        d2g = np.empty((n, n, n, n))
        if self.chart == "graph":
            denom = 1.0 - k * (x @ x)
            outer = np.outer(x, x)
            for a in range(n):
                for b in range(n):
                    sym_ab = (
                        eye[a][:, None] * eye[b][None, :]
                        + eye[b][:, None] * eye[a][None, :]
                    )
                    t_a = eye[a][:, None] * x[None, :] + x[:, None] * eye[a][None, :]
                    t_b = eye[b][:, None] * x[None, :] + x[:, None] * eye[b][None, :]
                    d2g[a, b] = (
                        k * sym_ab / denom
                        + 2.0 * k * k * (t_a * x[b] + t_b * x[a]) / denom**2
                        + 2.0 * k * k * eye[a, b] * outer / denom**2
                        + 8.0 * k**3 * x[a] * x[b] * outer / denom**3
                    )
            return d2g
        lam = 1.0 / (1.0 + 0.25 * k * (x @ x))
        for a in range(n):
            for b in range(n):
                d2g[a, b] = (
                    -k * eye[a, b] * lam**3 + 1.5 * k * k * x[a] * x[b] * lam**4
                ) * eye
        return d2g

    def embed(self, x):
        """Ambient (n+1)-vector of the chart point on the model quadric."""
        k = self.curvature
        x = np.asarray(x, dtype=float)
        if self.chart == "graph":
            return np.append(x, np.sqrt(1.0 - k * (x @ x)))
        q = 0.25 * k * (x @ x)
        r = 1.0 / np.sqrt(k)
        u = x / (1.0 + q)
        return np.append(u, np.sqrt(k) * r * (1.0 - q) / (1.0 + q))

    def embed_diff(self, x):
        """(n+1) x n Jacobian of the embedding; columns span the tangent."""
        k = self.curvature
        x = np.asarray(x, dtype=float)
        out = np.zeros((self.n + 1, self.n))
        if self.chart == "graph":
            out[: self.n] = np.eye(self.n)
            out[self.n] = -k * x / np.sqrt(1.0 - k * (x @ x))
            return out
        q = 0.25 * k * (x @ x)
        d = 1.0 + q
        out[: self.n] = np.eye(self.n) / d - 0.5 * k * np.outer(x, x) / d**2
        out[self.n] = -k * x / d**2
        return out


class CustomMetric(ManifoldSpec):
    """Metric given by a user callback; derivatives by finite differences."""

    def __init__(self, n, fn, domain, deriv=None, name="custom"):
        super().__init__(n, domain)
        self._fn = fn
        self._deriv = deriv
        self.analytic_deriv = deriv is not None
        self.name = name

    def metric(self, x):
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=float)

    def metric_deriv(self, x):
        if self._deriv is None:
            return super().metric_deriv(x)
        return np.asarray(self._deriv(np.asarray(x, dtype=float)), dtype=float)


# ---------------------------------------------------------------------------
# warping functions and warped products
# ---------------------------------------------------------------------------

class Warp:
    """Positive scalar on the base factor with a closed-form gradient."""

    name = "warp"

    def value(self, y):
        raise NotImplementedError

    def grad(self, y):
        raise NotImplementedError

    def hessian(self, y):
        raise NotImplementedError


class ExpMinusWarp(Warp):
    name = "exp_minus"

    def value(self, y):
        return np.exp(-y[0])

    def grad(self, y):
        g = np.zeros(len(y))
        g[0] = -np.exp(-y[0])
        return g

    def hessian(self, y):
        h = np.zeros((len(y), len(y)))
        h[0, 0] = np.exp(-y[0])
        return h


class CoshWarp(Warp):
    name = "cosh"

    def value(self, y):
        return np.cosh(y[0])

    def grad(self, y):
        g = np.zeros(len(y))
        g[0] = np.sinh(y[0])
        return g

    def hessian(self, y):
        h = np.zeros((len(y), len(y)))
        h[0, 0] = np.cosh(y[0])
        return h


class SinhWarp(Warp):
    name = "sinh"

    def value(self, y):
        return np.sinh(y[0])

    def grad(self, y):
        g = np.zeros(len(y))
        g[0] = np.cosh(y[0])
        return g

    def hessian(self, y):
        h = np.zeros((len(y), len(y)))
        h[0, 0] = np.sinh(y[0])
        return h


class CoshDistWarp(Warp):
    """cosh of the base distance from the chart origin of a hyperbolic graph
    chart of curvature k < 0: closed form sqrt(1 - k |y|^2), smooth at 0."""

    name = "cosh_dist"

    def __init__(self, curvature=-1.0):
        if curvature >= 0:
            raise ValueError("cosh_dist warp needs a negatively curved base")
        self.curvature = float(curvature)

    def value(self, y):
        return np.sqrt(1.0 - self.curvature * (y @ y))

    def grad(self, y):
        return -self.curvature * np.asarray(y) / self.value(y)

    def hessian(self, y):
        f = self.value(y)
        k = self.curvature
        y = np.asarray(y, dtype=float)
        return -k * np.eye(len(y)) / f - k * k * np.outer(y, y) / f**3


class CustomWarp(Warp):
    name = "custom"

    def __init__(self, fn, grad_fn, hess_fn=None):
        self._fn = fn
        self._grad = grad_fn
        self._hess = hess_fn

    def value(self, y):
        return float(self._fn(y))

    def grad(self, y):
        return np.asarray(self._grad(y), dtype=float)

    def hessian(self, y):
        if self._hess is not None:
            return np.asarray(self._hess(y), dtype=float)
        y = np.asarray(y, dtype=float)
        m = len(y)
        out = np.empty((m, m))
        for b in range(m):
            yp, ym = y.copy(), y.copy()
            yp[b] += FD_STEP_2
            ym[b] -= FD_STEP_2
            out[:, b] = (self.grad(yp) - self.grad(ym)) / (2 * FD_STEP_2)
        return 0.5 * (out + out.T)


class WarpedProduct(ManifoldSpec):
    """Product chart with metric blockdiag(h(y), f(y)^2 g(x)).

    Chart coordinates are (base coords, fiber coords).  Doubly warped
    products arise by nesting: the warp of the outer product reads only the
    base part of the point, so a warp depending on the first coordinate of
    an inner product composes correctly.
    """

    def __init__(self, base, fiber, warp, name=None):
        self.base = base
        self.fiber = fiber
        self.warp = warp
        n = base.n + fiber.n
        super().__init__(n, np.vstack([base.domain, fiber.domain]))
        self.analytic_deriv = base.analytic_deriv and fiber.analytic_deriv
        self.name = name or f"({base.name} x_{warp.name} {fiber.name})"
        # the warp must not vanish anywhere on the closed base box
        corners = np.stack(
            np.meshgrid(*[base.domain[i] for i in range(base.n)], indexing="ij"),
            axis=-1,
        ).reshape(-1, base.n)
        vals = [warp.value(c) for c in corners] + [warp.value(base.center())]
        if min(np.abs(vals)) < 1e-12 or min(vals) * max(vals) < 0:
            raise ValueError("warping function vanishes on the declared domain")

    def split_point(self, x):
        nb = self.base.n
        return x[:nb], x[nb:]

    def metric(self, x):
        y, z = self.split_point(x)
        f = self.warp.value(y)
        out = np.zeros((self.n, self.n))
        nb = self.base.n
        out[:nb, :nb] = self.base.metric(y)
        out[nb:, nb:] = f * f * self.fiber.metric(z)
        return out

    def metric_deriv(self, x):
        y, z = self.split_point(x)
        nb = self.base.n
        f = self.warp.value(y)
        df = self.warp.grad(y)
        gf = self.fiber.metric(z)
        dg = np.zeros((self.n, self.n, self.n))
        dbase = self.base.metric_deriv(y)
        dfiber = self.fiber.metric_deriv(z)
        for a in range(nb):
            dg[a, :nb, :nb] = dbase[a]
            dg[a, nb:, nb:] = 2.0 * f * df[a] * gf
        for a in range(self.fiber.n):
            dg[nb + a, nb:, nb:] = f * f * dfiber[a]
        return dg

    def metric_deriv2(self, x):
        y, z = self.split_point(x)
        nb, nf = self.base.n, self.fiber.n
        f = self.warp.value(y)
        df = self.warp.grad(y)
        hf = self.warp.hessian(y)
        gf = self.fiber.metric(z)
        dgf = self.fiber.metric_deriv(z)
        d2g = np.zeros((self.n, self.n, self.n, self.n))
        d2base = self.base.metric_deriv2(y)
        d2fiber = self.fiber.metric_deriv2(z)
        for a in range(nb):
            for b in range(nb):
                d2g[a, b, :nb, :nb] = d2base[a, b]
                d2g[a, b, nb:, nb:] = 2.0 * (df[a] * df[b] + f * hf[a, b]) * gf
            for b in range(nf):
                block = 2.0 * f * df[a] * dgf[b]
                d2g[a, nb + b, nb:, nb:] = block
                d2g[nb + b, a, nb:, nb:] = block
        for a in range(nf):
            for b in range(nf):
                d2g[nb + a, nb + b, nb:, nb:] = f * f * d2fiber[a, b]
        return d2g


# ---------------------------------------------------------------------------
# builtin catalog
# ---------------------------------------------------------------------------

def hyperbolic_space(n, half_width=1.0):
    return SpaceFormChart(n, -1.0, half_width=half_width)

def sphere_space(n, half_width=0.8):
    return SpaceFormChart(n, 1.0, half_width=half_width)

def flat_space(n, half_width=1.0):
    return Flat(n, half_width=half_width)

def perturbed_flat(n, amplitude=0.1, seed=0, half_width=1.0):
    return PerturbedFlat(n, amplitude=amplitude, seed=seed, half_width=half_width)


def exp_warp(fiber=None, s_range=(-0.8, 0.8)):
    """ds^2 + e^{-2s} g1: the exponential warped product over a line.

    The default fiber is a perturbed flat 2-manifold; with an exactly flat
    fiber this metric would be a constant-curvature space in horospherical
    coordinates and every associated transport would degenerate to the flat
    case, which makes a useless test subject.
    """
    if fiber is None:
        fiber = perturbed_flat(2, amplitude=0.12, seed=3, half_width=0.8)
    return WarpedProduct(
        Interval(*s_range, name="line"), fiber, ExpMinusWarp(), name="exp_warp"
    )


def sinh_cosh_warp(fiber1=None, s_range=(0.4, 1.6), x2_half_width=0.8):
    """ds^2 + sinh(s)^2 g2 + cosh(s)^2 g1 over an interval avoiding s = 0.

    g2 is one-dimensional; g1 defaults to a perturbed flat 2-manifold (a flat
    g1 would again produce a constant-curvature total space).
    """
    if fiber1 is None:
        fiber1 = perturbed_flat(2, amplitude=0.12, seed=5, half_width=0.8)
    inner = WarpedProduct(
        Interval(*s_range, name="line"),
        Interval(-x2_half_width, x2_half_width, name="m2"),
        SinhWarp(),
        name="sinh_cosh_base",
    )
    return WarpedProduct(inner, fiber1, CoshWarp(), name="sinh_cosh_warp")


def sphere_factor_chart(m, half_width=0.8):
    """Chart on the unit m-sphere used as the angular factor of polar charts."""
    if m == 1:
        return Interval(-half_width, half_width, name="circle")
    return SpaceFormChart(m, 1.0, half_width=half_width)


def polar_cosh_warp(k=2, fiber=None, s_range=(0.35, 1.4), angular_half_width=0.8):
    """Polar chart (s, theta, x1) of the cosh-of-distance warped product.

    Metric ds^2 + sinh(s)^2 g_{S^{k-1}} + cosh(s)^2 g1.  The polar radius
    stays away from 0 where the angular factor collapses; the distinguished
    origin slice is reachable only through the graph-chart variant below.
    """
    if fiber is None:
        fiber = perturbed_flat(2, amplitude=0.12, seed=5, half_width=0.8)
    base = WarpedProduct(
        Interval(*s_range, name="radius"),
        sphere_factor_chart(k - 1, angular_half_width),
        SinhWarp(),
        name=f"polar_h{k}",
    )
    return WarpedProduct(base, fiber, CoshWarp(), name=f"polar_cosh_warp(k={k})")


def graph_cosh_warp(k=2, fiber=None, half_width=0.9):
    """Graph-chart presentation of the cosh-of-distance warped product.

    Base is the hyperbolic graph chart (which contains the distinguished
    origin), warp sqrt(1 + |y|^2) = cosh(d(y, 0)).
    """
    if fiber is None:
        fiber = perturbed_flat(2, amplitude=0.12, seed=5, half_width=0.8)
    return WarpedProduct(
        hyperbolic_space(k, half_width=half_width),
        fiber,
        CoshDistWarp(-1.0),
        name=f"graph_cosh_warp(k={k})",
    )


# ---------------------------------------------------------------------------
# connection and curvature
# ---------------------------------------------------------------------------

def christoffel(spec, x):
    """Christoffel symbols Gamma[k, i, j] of the Levi-Civita connection."""
    x = np.asarray(x, dtype=float)
    g = spec.metric(x)
    dg = spec.metric_deriv(x)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"degenerate metric at {x}") from exc
    t1 = np.einsum("kl,ijl->kij", ginv, dg)
    t2 = np.einsum("kl,jil->kij", ginv, dg)
    t3 = np.einsum("kl,lij->kij", ginv, dg)
    return 0.5 * (t1 + t2 - t3)


def christoffel_deriv(spec, x, h=FD_STEP_2):
    """dGamma[m, k, i, j] = d Gamma^k_ij / d x_m.

    Closed form from the first and second metric derivatives when the spec
    provides them analytically, otherwise central differences of christoffel.
    """
    x = np.asarray(x, dtype=float)
    n = spec.n
    if spec.analytic_deriv:
        g = spec.metric(x)
        dg = spec.metric_deriv(x)
        d2g = spec.metric_deriv2(x)
        ginv = np.linalg.inv(g)
        dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
        sym = (
            np.einsum("ijl->ijl", dg)
            + np.einsum("jil->ijl", dg)
            - np.einsum("lij->ijl", dg)
        )
        dsym = (
            np.einsum("mijl->mijl", d2g)
            + np.einsum("mjil->mijl", d2g)
            - np.einsum("mlij->mijl", d2g)
        )
        out = 0.5 * np.einsum("mkl,ijl->mkij", dginv, sym)
        out += 0.5 * np.einsum("kl,mijl->mkij", ginv, dsym)
        return out
    out = np.empty((n, n, n, n))
    for m in range(n):
        xp, xm = x.copy(), x.copy()
        xp[m] += h
        xm[m] -= h
        out[m] = (christoffel(spec, xp) - christoffel(spec, xm)) / (2.0 * h)
    return out


def riemann(spec, x):
    """Curvature tensor R[l, k, i, j]: the component along d_l of
    R(d_i, d_j) d_k with R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]."""
    gamma = christoffel(spec, x)
    dgamma = christoffel_deriv(spec, x)
    r = np.einsum("iljk->lkij", dgamma) - np.einsum("jlik->lkij", dgamma)
    r += np.einsum("lim,mjk->lkij", gamma, gamma)
    r -= np.einsum("ljm,mik->lkij", gamma, gamma)
    return r


def riemann_action(r_tensor, xv, yv, zv):
    """R(X, Y)Z from the tensor returned by riemann()."""
    return np.einsum("lkij,k,i,j->l", r_tensor, zv, xv, yv)


def b_action(g, xv, yv, zv):
    """B(X, Y)Z = g(Y, Z) X - g(X, Z) Y, the constant-curvature tensor."""
    return (yv @ g @ zv) * xv - (xv @ g @ zv) * yv


def sectional_curvature(spec, x, xv, yv):
    g = spec.metric(x)
    r = riemann(spec, x)
    num = riemann_action(r, xv, yv, yv) @ g @ xv
    den = (xv @ g @ xv) * (yv @ g @ yv) - (xv @ g @ yv) ** 2
    return num / den


def orthonormal_frame(g):
    """Columns E with E^T g E = I, from the Cholesky factor of g."""
    chol = np.linalg.cholesky(g)
    return np.linalg.inv(chol).T


def g_norm(g, v):
    return float(np.sqrt(max(v @ g @ v, 0.0)))


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinePiece:
    """Straight chart segment x(t) = a + t (b - a), t in [0, 1]."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))

    @property
    def chart_length(self):
        return float(np.linalg.norm(self.b - self.a))

    def reversed(self):
        return LinePiece(self.b, self.a)


@dataclass(frozen=True)
class GeodesicPiece:
    """Geodesic from x0 with initial chart velocity v0 over time span T."""

    x0: np.ndarray
    v0: np.ndarray
    T: float

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "v0", np.asarray(self.v0, dtype=float))

    @property
    def chart_length(self):
        return abs(self.T) * float(np.linalg.norm(self.v0))


@dataclass
class Path:
    """A chain of path pieces inside one chart."""

    spec: ManifoldSpec
    pieces: list

    @property
    def start(self):
        p = self.pieces[0]
        return p.a if isinstance(p, LinePiece) else p.x0

    def is_closed(self, tol=0.0):
        # exact closure for waypoint loops; geodesic pieces close only
        # approximately and need an explicit tolerance
        end = trace_path(self)[-1]
        return bool(np.max(np.abs(end - self.start)) <= tol)

    def reversed(self):
        rev = []
        for p in self.pieces[::-1]:
            if isinstance(p, LinePiece):
                rev.append(p.reversed())
            else:
                end_x, end_v = _geodesic_endpoint(self.spec, p)
                rev.append(GeodesicPiece(end_x, -end_v, p.T))
        return Path(self.spec, rev)


def chart_path(spec, waypoints):
    """Piecewise-linear chart path through the given waypoints."""
    pts = [np.asarray(w, dtype=float) for w in waypoints]
    if len(pts) < 2:
        raise ValueError("need at least two waypoints")
    pieces = [LinePiece(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
    return Path(spec, pieces)


def rectangle_loop(spec, anchor, plane, eps):
    """Closed coordinate rectangle of side eps in the (i, j) plane."""
    i, j = plane
    a = np.asarray(anchor, dtype=float)
    ei = np.zeros(spec.n)
    ej = np.zeros(spec.n)
    ei[i] = eps
    ej[j] = eps
    return chart_path(spec, [a, a + ei, a + ei + ej, a + ej, a])


def path_length(path):
    return sum(p.chart_length for p in path.pieces)


def trace_path(path, per_piece=8):
    """Coarse polyline of chart points along the path (for domain checks)."""
    pts = [path.start]
    for p in path.pieces:
        if isinstance(p, LinePiece):
            for t in np.linspace(0, 1, per_piece + 1)[1:]:
                pts.append(p.a + t * (p.b - p.a))
        else:
            res = geodesic(path.spec, p.x0, p.v0, p.T, step=max(p.T / per_piece, 1e-3))
            pts.extend(res.xs[1:])
    return pts


# ---------------------------------------------------------------------------
# geodesics and transport
# ---------------------------------------------------------------------------

@dataclass
class GeodesicResult:
    ts: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    truncated: bool

    @property
    def x_end(self):
        return self.xs[-1]

    @property
    def v_end(self):
        return self.vs[-1]


def geodesic(spec, x0, v0, T, step=DEFAULT_ODE_STEP):
    """Integrate the geodesic equation with fixed-step RK4.

    Aborts (with truncated=True) if the path leaves the chart box.
    """
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    nsteps = max(1, int(np.ceil(abs(T) / step)))
    h = T / nsteps
    ts = [0.0]
    xs = [x.copy()]
    vs = [v.copy()]
    truncated = False

    def acc(xx, vv):
        gamma = christoffel(spec, xx)
        return -np.einsum("kij,i,j->k", gamma, vv, vv)

    for m in range(nsteps):
        k1x, k1v = v, acc(x, v)
        k2x = v + 0.5 * h * k1v
        k2v = acc(x + 0.5 * h * k1x, k2x)
        k3x = v + 0.5 * h * k2v
        k3v = acc(x + 0.5 * h * k2x, k3x)
        k4x = v + h * k3v
        k4v = acc(x + h * k3x, k4x)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not spec.contains(x):
            truncated = True
            break
        ts.append((m + 1) * h)
        xs.append(x.copy())
        vs.append(v.copy())
    return GeodesicResult(np.array(ts), np.array(xs), np.array(vs), truncated)


@dataclass
class TransportResult:
    value: np.ndarray
    end_point: np.ndarray
    truncated: bool
    history: list = field(default_factory=list)


def transport_linear(spec, path, coeff, y0, step=DEFAULT_ODE_STEP, record=False):
    """Integrate dY/dt = coeff(x, xdot) @ Y along a path.

    Y may be a vector or a matrix of stacked columns; coeff returns the
    coefficient matrix given the current chart point and velocity.  Line
    pieces drive the base point analytically, geodesic pieces integrate the
    base jointly with the payload.
    """
    y = np.array(y0, dtype=float)
    end = np.asarray(path.start, dtype=float)
    history = []
    truncated = False
    for piece in path.pieces:
        if truncated:
            break
        if isinstance(piece, LinePiece):
            v = piece.b - piece.a
            nsteps = max(1, int(np.ceil(piece.chart_length / step)))
            h = 1.0 / nsteps
            t = 0.0
            for _ in range(nsteps):

                def rhs(tt, yy):
                    return coeff(piece.a + tt * v, v) @ yy

                k1 = rhs(t, y)
                k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
                k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
                k4 = rhs(t + h, y + h * k3)
                y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
                if record:
                    history.append((piece.a + t * v, y.copy()))
            end = piece.b
        else:
            x = piece.x0.copy()
            v = piece.v0.copy()
            nsteps = max(1, int(np.ceil(max(piece.chart_length, abs(piece.T)) / step)))
            h = piece.T / nsteps
            for _ in range(nsteps):

                def rhs(xx, vv, yy):
                    gamma = christoffel(spec, xx)
                    a = -np.einsum("kij,i,j->k", gamma, vv, vv)
                    return vv, a, coeff(xx, vv) @ yy

                k1x, k1v, k1y = rhs(x, v, y)
                k2x, k2v, k2y = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v, y + 0.5 * h * k1y)
                k3x, k3v, k3y = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v, y + 0.5 * h * k2y)
                k4x, k4v, k4y = rhs(x + h * k3x, v + h * k3v, y + h * k3y)
                x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
                v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
                y = y + (h / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y)
                if not spec.contains(x):
                    truncated = True
                    break
                if record:
                    history.append((x.copy(), y.copy()))
            end = x
    return TransportResult(y, end, truncated, history)


def lc_transport(spec, path, x0_vec, step=DEFAULT_ODE_STEP):
    """Levi-Civita parallel transport of a tangent vector along a path."""

    def coeff(x, v):
        gamma = christoffel(spec, x)
        return -np.einsum("kij,i->kj", gamma, v)

    return transport_linear(spec, path, coeff, x0_vec, step=step)


def lc_transport_frame(spec, path, frame, step=DEFAULT_ODE_STEP):
    """Transport a whole column frame at once (same linear ODE)."""

    def coeff(x, v):
        gamma = christoffel(spec, x)
        return -np.einsum("kij,i->kj", gamma, v)

    return transport_linear(spec, path, coeff, frame, step=step)


def _geodesic_endpoint(spec, piece, step=DEFAULT_ODE_STEP):
    res = geodesic(spec, piece.x0, piece.v0, piece.T, step=step)
    return res.x_end, res.v_end


def geodesic_between(spec, x0, x1, step=5e-3, tol=1e-10, max_iter=40):
    """Shooting solver: the geodesic piece from x0 reaching x1 at time 1.

    Newton iteration on the initial velocity with a finite-difference
    Jacobian; the chart boxes in use are small enough for the straight-line
    initial guess to converge.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    v = x1 - x0

    def end(vv):
        res = geodesic(spec, x0, vv, 1.0, step=step)
        if res.truncated:
            raise DomainError("shooting geodesic left the chart")
        return res.x_end

    for _ in range(max_iter):
        f = end(v) - x1
        if np.linalg.norm(f) < tol:
            break
        jac = np.empty((spec.n, spec.n))
        dh = 1e-6
        for k in range(spec.n):
            dv = np.zeros(spec.n)
            dv[k] = dh
            jac[:, k] = (end(v + dv) - end(v - dv)) / (2.0 * dh)
        v = v - np.linalg.solve(jac, f)
    return GeodesicPiece(x0, v, 1.0)


def geodesic_polygon(spec, vertices, step=5e-3):
    """Closed path of geodesic segments through the listed chart vertices."""
    pts = [np.asarray(p, dtype=float) for p in vertices]
    if np.linalg.norm(pts[0] - pts[-1]) > 0:
        pts.append(pts[0])
    pieces = [geodesic_between(spec, pts[i], pts[i + 1], step=step)
              for i in range(len(pts) - 1)]
    return Path(spec, pieces)


# ---------------------------------------------------------------------------
# Jacobi-field consistency check
# ---------------------------------------------------------------------------

@dataclass
class JacobiCheck:
    applicable: bool
    residual: float = np.nan
    t: float = np.nan
    note: str = ""


def jacobi_check(spec, x, u, xvec, t, radial_offset=None, step=DEFAULT_ODE_STEP):
    """Residual of the Jacobi equation for the sinh-rescaled transported field.

    Along the unit geodesic from x in direction u, the candidate field is
    Y(s) = sinh(s) / sinh(s0) * (parallel transport of xvec), where s is the
    radial clock starting at radial_offset = s0 at x (for the polar warped
    charts s0 is the first coordinate).  Returns the g-norm of
    nabla^2_t Y - R(gamma', Y) gamma' at radial clock t, computed by second
    differences of the components of Y in a parallel orthonormal frame.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    xvec = np.asarray(xvec, dtype=float)
    g0 = spec.metric(x)
    if g_norm(g0, xvec) < 1e-12:
        return JacobiCheck(False, note="no transverse direction available")
    if abs(g_norm(g0, u) - 1.0) > 1e-8:
        raise ValueError("u must be a unit vector")
    if abs(u @ g0 @ xvec) > 1e-8 * g_norm(g0, xvec):
        raise ValueError("xvec must be g-orthogonal to u")
    s0 = float(x[0]) if radial_offset is None else float(radial_offset)
    if abs(np.sinh(s0)) < 1e-12:
        return JacobiCheck(False, note="radial clock starts at the singular origin")

    tau_end = t - s0
    if tau_end <= 0:
        raise ValueError("target clock t must exceed the starting offset")
    nsteps = max(2, int(np.ceil(tau_end / step)))
    h = tau_end / nsteps

    frame0 = orthonormal_frame(g0)
    payload = np.column_stack([xvec, frame0])

    xx, vv, yy = x.copy(), u.copy(), payload.copy()
    snapshots = {}

    def rhs(xc, vc, yc):
        gamma = christoffel(spec, xc)
        a = -np.einsum("kij,i,j->k", gamma, vc, vc)
        m = -np.einsum("kij,i->kj", gamma, vc)
        return vc, a, m @ yc

    for mstep in range(nsteps):
        if mstep >= nsteps - 3:
            snapshots[mstep] = (xx.copy(), vv.copy(), yy.copy())
        k1 = rhs(xx, vv, yy)
        k2 = rhs(xx + 0.5 * h * k1[0], vv + 0.5 * h * k1[1], yy + 0.5 * h * k1[2])
        k3 = rhs(xx + 0.5 * h * k2[0], vv + 0.5 * h * k2[1], yy + 0.5 * h * k2[2])
        k4 = rhs(xx + h * k3[0], vv + h * k3[1], yy + h * k3[2])
        xx = xx + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        vv = vv + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        yy = yy + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    snapshots[nsteps] = (xx.copy(), vv.copy(), yy.copy())

    # Y components in the parallel frame at the three last grid points
    comp = {}
    for mstep in (nsteps - 2, nsteps - 1, nsteps):
        xc, vc, yc = snapshots[mstep]
        px, fr = yc[:, 0], yc[:, 1:]
        s = s0 + mstep * h
        yvec = np.sinh(s) / np.sinh(s0) * px
        comp[mstep] = np.linalg.solve(fr, yvec)
    ydd = (comp[nsteps] - 2 * comp[nsteps - 1] + comp[nsteps - 2]) / (h * h)

    xc, vc, yc = snapshots[nsteps - 1]
    fr = yc[:, 1:]
    nabla2 = fr @ ydd
    s_mid = s0 + (nsteps - 1) * h
    y_mid = np.sinh(s_mid) / np.sinh(s0) * yc[:, 0]
    r_tensor = riemann(spec, xc)
    rhs_vec = riemann_action(r_tensor, vc, y_mid, vc)
    g_mid = spec.metric(xc)
    return JacobiCheck(True, g_norm(g_mid, nabla2 - rhs_vec), s_mid)

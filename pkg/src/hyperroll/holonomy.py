"""Holonomy sampling and reducibility classification of the extended connection.

The holonomy algebra at a base point is approximated two ways at once:
curvature endomorphisms at sampled chart points conjugated back to the base
along connecting segments (the infinitesimal generators), and matrix
logarithms of transports around a deterministic family of small loops.  The
bracket closure of the union gives the algebra dimension; for c < 0 the
dimension decides controllability outright, because the only connected
subgroup of the Lorentz group acting irreducibly is the full identity
component.  When the dimension is deficient, a seed-orbit search looks for
an invariant subspace and the pair (V, V^perp_h) is classified as
transversal or lightlike; the two cases correspond to the two warped-product
normal forms that reducibility forces on the metric.

All verdicts are chart-local: they certify the structure on the declared
coordinate box, nothing global.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import logm

from . import lorentz
from .connection import (
    check_curvature_param,
    extended_frame,
    rolling_curvature,
    transport_ext_matrix,
)
from .manifolds import chart_path, rectangle_loop, trace_path

FULL_DIM = lorentz.algebra_dim_bound


@dataclass
class SamplingConfig:
    """Knobs for holonomy sampling; defaults match the desk-scale test sizes."""

    n_sample_points: int = 9
    loop_count: int = 40
    eps_list: tuple = (0.08, 0.12, 0.16)
    step: float = 5e-3
    rank_tol: float = 1e-6
    min_generator_norm: float = 1e-7
    subspace_tol: float = 1e-6
    seed: int = 0
    stability_check: bool = True
    n1_tol: float = 1e-5


def sample_points(spec, count, seed, margin_frac=0.15):
    """Deterministic interior sample points of the chart box."""
    rng = np.random.default_rng(seed)
    lo = spec.domain[:, 0]
    hi = spec.domain[:, 1]
    width = hi - lo
    return rng.uniform(lo + margin_frac * width, hi - margin_frac * width,
                       size=(count, spec.n))


def default_loop_family(spec, base_x, count, eps_list, seed):
    """Lasso loops: straight approach, coordinate rectangle, straight return.

    Anchors, planes and side lengths cycle deterministically from the seed.
    Every loop starts and ends exactly at base_x.
    """
    rng = np.random.default_rng(seed + 1)
    base_x = np.asarray(base_x, dtype=float)
    lo = spec.domain[:, 0]
    hi = spec.domain[:, 1]
    width = hi - lo
    planes = [(i, j) for i in range(spec.n) for j in range(i + 1, spec.n)]
    loops = []
    for k in range(count):
        eps = eps_list[k % len(eps_list)]
        plane = planes[k % len(planes)]
        anchor = base_x + rng.uniform(-0.25, 0.25, spec.n) * width
        anchor = np.clip(anchor, lo + 0.1 * width, hi - 0.1 * width - eps)
        i, j = plane
        ei = np.zeros(spec.n)
        ej = np.zeros(spec.n)
        ei[i] = eps
        ej[j] = eps
        pts = [base_x, anchor, anchor + ei, anchor + ei + ej, anchor + ej,
               anchor, base_x]
        loops.append(chart_path(spec, pts))
    return loops


class LoopError(ValueError):
    """The provided path is not closed or leaves the chart."""


def loop_transport(spec, c, loop, step=5e-3, closure_tol=1e-9):
    """Transport the h_c-orthonormal extended frame around a closed loop.

    Returns the holonomy element as a matrix in the orthonormal frame at the
    loop's base point; it preserves the model form J up to integration error.
    """
    check_curvature_param(c)
    if not loop.is_closed(closure_tol):
        raise LoopError("loop start and end points differ")
    for p in trace_path(loop):
        if not loop.spec.contains(p, margin=-1e-12):
            raise LoopError("loop leaves the chart domain")
    res = transport_ext_matrix(spec, c, loop, step=step)
    if res.truncated:
        raise LoopError("loop transport left the chart domain")
    phi = extended_frame(spec, c, loop.start)
    return np.linalg.solve(phi, res.value @ phi)


def form_defect(mat, form):
    """Max-entry residual of M^T J M - J."""
    J = form.matrix()
    return float(np.abs(mat.T @ J @ mat - J).max())


def ambrose_singer_generators(spec, c, base_x, points=None, config=None):
    """Curvature endomorphisms conjugated to the base point.

    For each sample point p and each coordinate plane, the curvature at p is
    carried back along the straight chart segment from base_x to p.  Output
    matrices are expressed in the orthonormal frame at base_x, hence they sit
    inside the matrix algebra of the model form.
    """
    check_curvature_param(c)
    config = config or SamplingConfig()
    base_x = np.asarray(base_x, dtype=float)
    if points is None:
        points = sample_points(spec, config.n_sample_points, config.seed)
    form = lorentz.BilinearForm(spec.n, c)
    phi = extended_frame(spec, c, base_x)
    planes = [(i, j) for i in range(spec.n) for j in range(i + 1, spec.n)]
    eye = np.eye(spec.n)

    gens = []
    all_points = [base_x] + [np.asarray(p, dtype=float) for p in points]
    for p in all_points:
        if np.allclose(p, base_x):
            t = np.eye(spec.n + 1)
        else:
            seg = chart_path(spec, [base_x, p])
            t = transport_ext_matrix(spec, c, seg, step=config.step).value
        tinv = np.linalg.inv(t)
        for (i, j) in planes:
            curv = rolling_curvature(spec, c, p, eye[i], eye[j]).mat
            conj = tinv @ curv @ t
            gens.append(lorentz.AlgebraElement(
                np.linalg.solve(phi, conj @ phi), form))
    return gens


@dataclass
class AlgebraResult:
    basis: list
    dim: int
    form: lorentz.BilinearForm
    diagnostics: dict = field(default_factory=dict)


def holonomy_algebra(spec, c, base_x, config=None):
    """Bracket closure of curvature generators and loop-transport logarithms."""
    check_curvature_param(c)
    config = config or SamplingConfig()
    base_x = np.asarray(base_x, dtype=float)
    form = lorentz.BilinearForm(spec.n, c)

    def collect(n_points, n_loops, seed):
        gens = ambrose_singer_generators(
            spec, c, base_x,
            points=sample_points(spec, n_points, seed), config=config)
        defects = []
        member_residuals = []
        for loop in default_loop_family(spec, base_x, n_loops,
                                        config.eps_list, seed):
            t = loop_transport(spec, c, loop, step=config.step)
            defects.append(form_defect(t, form))
            if np.abs(t - np.eye(spec.n + 1)).max() < 0.5:
                lg = np.real(logm(t))
                proj = lorentz.antisymmetrize(lg, form)
                member_residuals.append(float(np.abs(lg - proj).max()))
                gens.append(lorentz.AlgebraElement(proj, form))
        basis, dim = lorentz.lie_closure(
            gens, tol=config.rank_tol, min_norm=config.min_generator_norm)
        return basis, dim, defects, member_residuals

    basis, dim, defects, residuals = collect(
        config.n_sample_points, config.loop_count, config.seed)
    diagnostics = {
        "sample_points": config.n_sample_points,
        "loop_count": config.loop_count,
        "max_form_defect": max(defects) if defects else 0.0,
        "max_log_membership_residual": max(residuals) if residuals else 0.0,
        "rank_tol": config.rank_tol,
        "min_generator_norm": config.min_generator_norm,
        "dim_primary": dim,
    }
    if config.stability_check:
        basis2, dim2, defects2, _ = collect(
            2 * config.n_sample_points, 2 * config.loop_count, config.seed)
        diagnostics["dim_doubled"] = dim2
        diagnostics["stable_under_doubling"] = bool(dim2 == dim)
        diagnostics["max_form_defect"] = max(
            diagnostics["max_form_defect"], max(defects2) if defects2 else 0.0)
        if dim2 > dim:
            basis, dim = basis2, dim2
    return AlgebraResult(basis, dim, form, diagnostics)


VERDICT_IRREDUCIBLE = "irreducible_controllable"
VERDICT_LIGHTLIKE = "reducible_lightlike"
VERDICT_TRANSVERSAL = "reducible_transversal"
VERDICT_UNLOCATED = "reducible_unlocated"


@dataclass
class HolonomyReport:
    """Classification outcome at a base point (chart-local statement)."""

    base_x: np.ndarray
    c: float
    algebra_dim: int
    algebra_basis: list
    invariant_subspaces: list
    verdict: str
    n1_hit: bool = False
    lightlike_direction: np.ndarray = None  # chart components of L
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "base_x": list(map(float, self.base_x)),
            "c": self.c,
            "algebra_dim": self.algebra_dim,
            "algebra_basis": [b.mat.tolist() for b in self.algebra_basis],
            "invariant_subspaces": [s.vectors.tolist()
                                    for s in self.invariant_subspaces],
            "verdict": self.verdict,
            "n1_hit": bool(self.n1_hit),
            "lightlike_direction": (
                None if self.lightlike_direction is None
                else list(map(float, self.lightlike_direction))),
            "diagnostics": self.diagnostics,
            "scope": "local (single chart)",
        }


def transversal_split(v1, v2, target):
    """Write target = p1 + p2 with p1 in V1, p2 in V2 (transversal pair)."""
    b = np.vstack([v1.vectors, v2.vectors]).T
    coef, *_ = np.linalg.lstsq(b, target, rcond=None)
    p1 = v1.vectors.T @ coef[: v1.dim]
    p2 = v2.vectors.T @ coef[v1.dim:]
    return p1, p2


def classify(spec, c, base_x, config=None):
    """Full classification pipeline at a base point (requires c < 0).

    Dimension first: the full algebra dimension n(n+1)/2 certifies the
    irreducible (controllable) case.  Otherwise the invariant-subspace search
    runs on the algebra basis and the located pair decides the lightlike /
    transversal dichotomy; a deficient dimension with no located subspace is
    still reducible and reported as such.
    """
    check_curvature_param(c)
    if c >= 0:
        raise ValueError("classification verdicts require c < 0; "
                         "use holonomy_algebra for raw dimensions")
    config = config or SamplingConfig()
    base_x = np.asarray(base_x, dtype=float)
    algebra = holonomy_algebra(spec, c, base_x, config)
    form = algebra.form
    n = spec.n
    full = FULL_DIM(form)
    diagnostics = dict(algebra.diagnostics)
    phi = extended_frame(spec, c, base_x)

    if algebra.dim == full:
        return HolonomyReport(base_x, c, algebra.dim, algebra.basis, [],
                              VERDICT_IRREDUCIBLE, diagnostics=diagnostics)

    if algebra.dim == 0:
        # flat extended connection: every subspace is invariant; report the
        # scalar axis as a representative invariant line
        diagnostics["note"] = ("flat connection: every subspace invariant "
                               "(maximally degenerate)")
        v1 = lorentz.SubspaceBasis(np.eye(n + 1)[n:])
        return HolonomyReport(base_x, c, 0, [], [v1], VERDICT_TRANSVERSAL,
                              n1_hit=True, diagnostics=diagnostics)

    candidates = lorentz.invariant_subspaces(
        algebra.basis, form, tol=config.subspace_tol)
    diagnostics["n_invariant_subspaces"] = len(candidates)
    if not candidates:
        diagnostics["note"] = ("dimension criterion certifies reducibility "
                               "but the seed search located no subspace")
        return HolonomyReport(base_x, c, algebra.dim, algebra.basis, [],
                              VERDICT_UNLOCATED, diagnostics=diagnostics)

    lightlike_gen = None
    for cand in candidates:
        kind, gen = lorentz.classify_pair(cand, form, tol=config.subspace_tol)
        if kind == "lightlike":
            lightlike_gen = gen
            break

    if lightlike_gen is not None:
        gen_chart = phi @ lightlike_gen
        gen_chart = gen_chart / gen_chart[-1]
        return HolonomyReport(
            base_x, c, algebra.dim, algebra.basis, candidates,
            VERDICT_LIGHTLIKE, n1_hit=False,
            lightlike_direction=gen_chart[:-1], diagnostics=diagnostics)

    # transversal: report the Lorentzian member of the pair as V1
    v1 = None
    for cand in candidates:
        pos, neg, null = lorentz.restricted_signature(cand, form)
        if neg == 1 and null == 0:
            v1 = cand
            break
    if v1 is None:
        v1 = candidates[0]
    v2 = lorentz.perp_h(v1, form)
    e_scalar = np.eye(n + 1)[n]
    _, p2 = transversal_split(v1, v2, e_scalar)
    n1_residual = float(np.linalg.norm(p2))
    diagnostics["n1_residual"] = n1_residual
    return HolonomyReport(
        base_x, c, algebra.dim, algebra.basis, candidates,
        VERDICT_TRANSVERSAL, n1_hit=n1_residual <= config.n1_tol,
        diagnostics=diagnostics)

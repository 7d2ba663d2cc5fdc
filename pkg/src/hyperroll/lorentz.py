"""Indefinite bilinear forms, their matrix Lie algebras, and invariant subspaces.

Everything in this module is plain finite-dimensional linear algebra on
R^(n+1).  The weighted inner product

    <x, y> = x_1 y_1 + ... + x_n y_n + (1/c) x_{n+1} y_{n+1}

is positive definite for c > 0 and Lorentzian (signature (n, 1)) for c < 0.
Matrices A with A^T J + J A = 0, where J = diag(1, ..., 1, 1/c), form the
Lie algebra of the isometry group of the form: so(n+1) when c > 0 and
so(n, 1) when c < 0.  The module provides bracket closure of generator sets
and a seed-orbit search for common invariant subspaces, which downstream
code uses to decide whether a holonomy action is reducible.
"""

from dataclasses import dataclass

import numpy as np

RANK_TOL = 1e-8


@dataclass(frozen=True)
class BilinearForm:
    """The weighted inner product on R^(n+1) with matrix diag(1,...,1, 1/c)."""

    n: int
    c: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if self.c == 0:
            raise ValueError("curvature parameter c must be nonzero")

    @property
    def dim(self):
        return self.n + 1

    def matrix(self):
        d = np.ones(self.n + 1)
        d[-1] = 1.0 / self.c
        return np.diag(d)

    def signature(self):
        """(number of positive, number of negative) eigenvalue signs of J."""
        neg = 1 if self.c < 0 else 0
        return (self.n + 1 - neg, neg)


def form_eval(x, y, form):
    """Evaluate the weighted inner product of two (n+1)-vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (form.n + 1,) or y.shape != (form.n + 1,):
        raise ValueError(
            f"expected vectors of length {form.n + 1}, got {x.shape} and {y.shape}"
        )
    return float(x[:-1] @ y[:-1] + x[-1] * y[-1] / form.c)


def algebra_membership(mat, form, tol=1e-10):
    """True if mat^T J + J mat vanishes entrywise within tol."""
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (form.n + 1, form.n + 1):
        raise ValueError(f"expected a square matrix of size {form.n + 1}")
    J = form.matrix()
    return float(np.abs(mat.T @ J + J @ mat).max()) <= tol


def antisymmetrize(mat, form):
    """Project a matrix onto the algebra of the form (J-antisymmetric part)."""
    J = form.matrix()
    Jinv = np.diag(1.0 / np.diag(J))
    return 0.5 * (mat - Jinv @ mat.T @ J)


@dataclass(frozen=True)
class AlgebraElement:
    """A matrix in the Lie algebra of the isometry group of a BilinearForm."""

    mat: np.ndarray
    form: BilinearForm

    def __post_init__(self):
        object.__setattr__(self, "mat", np.asarray(self.mat, dtype=float))
        if self.mat.shape != (self.form.n + 1, self.form.n + 1):
            raise ValueError("matrix size does not match the form dimension")

    def check(self, tol=1e-9):
        return algebra_membership(self.mat, self.form, tol)


def bracket(a, b):
    """Commutator [a, b] = ab - ba of two algebra elements over the same form."""
    if a.form != b.form:
        raise ValueError("algebra elements live over different bilinear forms")
    return AlgebraElement(a.mat @ b.mat - b.mat @ a.mat, a.form)


def algebra_dim_bound(form):
    """dim so(n+1) = dim so(n,1) = (n+1)n/2."""
    return (form.n + 1) * form.n // 2


def _orth_rows(vectors, tol):
    """Orthonormal row basis of the span of the given stacked row vectors.

    Rank cut uses singular values relative to the largest one.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.size == 0:
        return np.zeros((0, vectors.shape[1]))
    u, s, vt = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, vectors.shape[1]))
    r = int(np.sum(s > tol * s[0]))
    return vt[:r]


def _rank(vectors, tol):
    return _orth_rows(vectors, tol).shape[0]


@dataclass
class SubspaceBasis:
    """A subspace of R^(n+1) stored as orthonormal (Euclidean) basis rows."""

    vectors: np.ndarray
    tol: float = RANK_TOL

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        rows = _orth_rows(self.vectors, self.tol)
        if rows.shape[0] < self.vectors.shape[0]:
            raise ValueError("basis vectors are linearly dependent at tolerance")
        self.vectors = rows

    @property
    def dim(self):
        return self.vectors.shape[0]

    @property
    def ambient_dim(self):
        return self.vectors.shape[1]

    def project(self, v):
        """Euclidean-orthogonal projection of v onto the subspace."""
        return self.vectors.T @ (self.vectors @ v)

    def contains(self, v, tol=1e-7):
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return True
        return np.linalg.norm(v - self.project(v)) <= tol * nv

    def same_as(self, other, tol=1e-7):
        if self.dim != other.dim:
            return False
        return all(other.contains(v, tol) for v in self.vectors)


def perp_h(basis, form, tol=RANK_TOL):
    """The orthogonal complement with respect to the bilinear form.

    v is in the complement iff (basis @ J) v = 0, so this is a plain
    null-space computation.
    """
    J = form.matrix()
    a = basis.vectors @ J
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    cut = tol * (s[0] if s.size else 1.0)
    r = int(np.sum(s > cut))
    return SubspaceBasis(vt[r:], tol)


def intersection_dim(b1, b2, tol=RANK_TOL):
    """dim(V1 cap V2) = rank(B1) + rank(B2) - rank([B1; B2])."""
    stacked = np.vstack([b1.vectors, b2.vectors])
    return b1.dim + b2.dim - _rank(stacked, tol)


def intersection_basis(b1, b2, tol=RANK_TOL):
    """Orthonormal basis rows of V1 cap V2.

    A vector is in the intersection iff it is fixed by both projectors, i.e.
    an eigenvector of P1 P2 with eigenvalue 1; we extract the joint fixed
    space from the singular structure of [I - P1; I - P2].
    """
    m = b1.ambient_dim
    p1 = b1.vectors.T @ b1.vectors
    p2 = b2.vectors.T @ b2.vectors
    a = np.vstack([np.eye(m) - p1, np.eye(m) - p2])
    u, s, vt = np.linalg.svd(a)
    keep = s <= max(tol * (s[0] if s.size else 1.0), 1e2 * np.finfo(float).eps)
    return vt[keep]


def lie_closure(generators, tol=RANK_TOL, min_norm=0.0):
    """Close a set of algebra elements under the bracket.

    Returns (basis, dim) where basis is a maximal linearly independent list
    of AlgebraElements spanning the generated Lie algebra.  Generators with
    Frobenius norm below min_norm are discarded before closing (transport
    noise filter; 0 disables).  Termination: the span dimension is strictly
    monotone and bounded by dim so = (n+1)n/2.
    """
    gens = [g for g in generators if np.linalg.norm(g.mat) > min_norm]
    if not gens:
        return [], 0
    form = gens[0].form
    m = form.n + 1
    bound = algebra_dim_bound(form)

    rows = []  # orthonormal vectorized basis rows
    basis = []

    def try_add(mat):
        v = mat.reshape(-1).astype(float)
        nv = np.linalg.norm(v)
        if nv <= min_norm or nv == 0.0:
            return False
        v = v / nv
        for r in rows:
            v = v - (r @ v) * r
            v2 = np.linalg.norm(v)
            if v2 < tol:
                return False
            # second orthogonalization pass keeps the basis numerically tight
        v = v - sum((r @ v) * r for r in rows) if rows else v
        nv2 = np.linalg.norm(v)
        if nv2 < tol:
            return False
        rows.append(v / nv2)
        basis.append(AlgebraElement(mat / np.linalg.norm(mat), form))
        return True

    for g in gens:
        if g.form != form:
            raise ValueError("generators live over different bilinear forms")
        try_add(g.mat)

    for _ in range(bound + 1):
        grew = False
        cur = list(basis)
        for i in range(len(cur)):
            for j in range(i + 1, len(cur)):
                br = cur[i].mat @ cur[j].mat - cur[j].mat @ cur[i].mat
                if try_add(br):
                    grew = True
        if not grew or len(basis) >= bound:
            break
    return basis, len(basis)


def _module_closure(seed, mats, tol):
    """Smallest subspace containing seed and invariant under all mats."""
    m = mats[0].shape[0]
    rows = []
    sv = seed / np.linalg.norm(seed)
    rows.append(sv)
    queue = [sv]
    while queue:
        v = queue.pop()
        for a in mats:
            w = a @ v
            res = w.copy()
            for r in rows:
                res -= (r @ res) * r
            nres = np.linalg.norm(res)
            if nres > tol:
                res = res / nres
                rows.append(res)
                queue.append(res)
                if len(rows) == m:
                    return np.array(rows)
    return np.array(rows)


def invariant_subspaces(generators, form, tol=1e-7, n_random_seeds=16, seed=12345):
    """Search for proper nonzero subspaces invariant under every generator.

    Strategy: for each seed vector (all standard basis vectors plus
    n_random_seeds deterministic random ones) compute the smallest
    generator-invariant subspace containing it; keep the proper ones; add the
    form-orthogonal complement of everything kept (invariant automatically,
    because the generators are antisymmetric for the form); deduplicate by
    mutual containment.  An empty result means the search located nothing,
    not a proof of irreducibility.
    """
    gens = [g for g in generators if np.linalg.norm(g.mat) > 0]
    if not gens:
        raise ValueError("empty generator list")
    m = form.n + 1
    mats = [g.mat / np.linalg.norm(g.mat) for g in gens]

    rng = np.random.default_rng(seed)
    seeds = [e for e in np.eye(m)]
    seeds += [rng.standard_normal(m) for _ in range(n_random_seeds)]

    found = []
    for sv in seeds:
        rows = _module_closure(sv, mats, tol)
        if 0 < rows.shape[0] < m:
            found.append(SubspaceBasis(rows))
    with_perps = []
    for v in found:
        with_perps.append(v)
        p = perp_h(v, form)
        if 0 < p.dim < m:
            with_perps.append(p)

    unique = []
    for v in with_perps:
        if not any(v.same_as(u, tol) for u in unique):
            unique.append(v)
    unique.sort(key=lambda s: (s.dim, tuple(np.round(np.abs(s.vectors[0]), 6))))
    return unique


class SignatureError(RuntimeError):
    """Numerically inconsistent intersection pattern for Lorentzian data."""


def classify_pair(v1, form, tol=1e-7):
    """Decide how an invariant subspace meets its form-orthogonal complement.

    Returns ("transversal", None) when V1 and V2 = V1^perp intersect only at
    the origin, and ("lightlike", gen) when the intersection is a line; gen
    is a generator of the line scaled so its last coordinate equals 1.  An
    intersection of dimension two or more cannot occur for exact data of
    signature (n, 1) and raises SignatureError.
    """
    if v1.dim == 0 or v1.dim == form.n + 1:
        raise ValueError("V1 must be a proper nonzero subspace")
    v2 = perp_h(v1, form)
    d = intersection_dim(v1, v2, tol)
    if d == 0:
        return "transversal", None
    if d == 1:
        gen = intersection_basis(v1, v2, tol)[0]
        if abs(gen[-1]) < tol:
            raise SignatureError(
                "lightlike intersection has vanishing scalar component"
            )
        return "lightlike", gen / gen[-1]
    raise SignatureError(
        f"dim(V1 cap V1^perp) = {d} >= 2; impossible for signature (n,1) data"
    )


def restricted_signature(basis, form, tol=1e-9):
    """(positive, negative, null) inertia of the form restricted to a subspace."""
    gram = basis.vectors @ form.matrix() @ basis.vectors.T
    w = np.linalg.eigvalsh(gram)
    scale = max(np.abs(w).max(), 1.0)
    pos = int(np.sum(w > tol * scale))
    neg = int(np.sum(w < -tol * scale))
    return pos, neg, basis.dim - pos - neg

"""Brute-force ground truth: dense polynomial evaluation, spectral similarity
certification, exact effective resistances, support brackets, and exhaustive
walk enumeration.

Everything here is dense and intended for small instances (n <= 512).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import PolyCoeffs, SddmMatrix, WeightedGraph

DENSE_THRESHOLD = 512
RANK_RTOL = 1e-9


def dense_poly(G, alpha: PolyCoeffs, threshold=DENSE_THRESHOLD):
    """Exact D - sum_r alpha_r D (D^-1 A)^r as a dense matrix.

    Accepts a WeightedGraph or an SddmMatrix (whose diagonal replaces D).
    """
    if isinstance(G, SddmMatrix):
        D = G.diag
        A = G.offdiag.adjacency_dense()
        n = G.n
    else:
        D = G.degree
        A = G.adjacency_dense()
        n = G.n
    if n > threshold:
        raise ValidationError(f"dense oracle limited to n <= {threshold}")
    Dinv = np.where(D > 0, 1.0 / np.where(D > 0, D, 1.0), 0.0)
    out = np.diag(D).astype(np.float64)
    walk = A.copy()  # walk = D (D^-1 A)^r, starting at r = 1
    for r, a_r in enumerate(alpha.alpha, start=1):
        if a_r:
            out -= a_r * walk
        if r < alpha.d:
            walk = walk * Dinv[np.newaxis, :] @ A
    return out


def dense_monomial(G, r, threshold=DENSE_THRESHOLD):
    return dense_poly(G, PolyCoeffs.monomial(r), threshold=threshold)


@dataclass
class SimilarityReport:
    """Extremal generalized eigenvalues of (X, Y) on the shared range space."""

    lambda_min: float
    lambda_max: float
    eps_required: float
    eps_target: float
    kernel_mismatch: bool

    @property
    def passed(self):
        # absolute slack so eps_target = 0 accepts X == Y up to roundoff
        return (not self.kernel_mismatch) and self.eps_required <= self.eps_target + 1e-9

    def as_kv(self):
        return (
            f"pass={str(self.passed).lower()} eps_required={self.eps_required:.6g} "
            f"eps_target={self.eps_target:.6g} lambda_min={self.lambda_min:.12g} "
            f"lambda_max={self.lambda_max:.12g} kernel_mismatch={str(self.kernel_mismatch).lower()}"
        )


def generalized_eigenvalues(X, Y, rank_rtol=RANK_RTOL):
    """Eigenvalues of the pencil (X, Y) restricted to Y's range space.

    Returns (eigenvalues, kernel_mismatch). The pencil is whitened through
    Y's rank-revealing eigendecomposition; both inputs are symmetrized first.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape or X.shape[0] != X.shape[1]:
        raise ValidationError("inputs must be square matrices of equal shape")
    if not np.allclose(X, X.T, atol=1e-8 * max(1.0, np.abs(X).max())):
        raise ValidationError("X is not symmetric")
    if not np.allclose(Y, Y.T, atol=1e-8 * max(1.0, np.abs(Y).max())):
        raise ValidationError("Y is not symmetric")
    X = 0.5 * (X + X.T)
    Y = 0.5 * (Y + Y.T)
    wy, Vy = np.linalg.eigh(Y)
    cut = rank_rtol * max(np.abs(wy).max(), 1e-300)
    rng_mask = wy > cut
    mismatch = False
    if np.any(wy < -cut):
        mismatch = True  # Y not PSD; treat as failure
    ker = Vy[:, ~rng_mask]
    if ker.shape[1]:
        xnorm = max(np.abs(X).max(), 1e-300)
        if np.max(np.abs(X @ ker)) > 1e-6 * xnorm:
            mismatch = True
    wx = np.linalg.eigvalsh(X)
    rank_x = int(np.sum(wx > rank_rtol * max(np.abs(wx).max(), 1e-300)))
    if rank_x != int(rng_mask.sum()):
        mismatch = True
    if not np.any(rng_mask):
        return np.array([]), mismatch
    Vr = Vy[:, rng_mask]
    half = Vr / np.sqrt(wy[rng_mask])[np.newaxis, :]
    T = half.T @ X @ half
    vals = np.linalg.eigvalsh(0.5 * (T + T.T))
    return vals, mismatch


def similarity_check(X, Y, eps, rank_rtol=RANK_RTOL):
    """Certify X ~ Y within exp(+-eps) on the common range space."""
    vals, mismatch = generalized_eigenvalues(X, Y, rank_rtol=rank_rtol)
    if len(vals) == 0:
        lam_min = lam_max = 1.0
    else:
        lam_min = float(vals.min())
        lam_max = float(vals.max())
    if lam_min <= 0:
        eps_req = math.inf
    else:
        eps_req = max(abs(math.log(lam_min)), abs(math.log(lam_max)))
    return SimilarityReport(
        lambda_min=lam_min,
        lambda_max=lam_max,
        eps_required=eps_req,
        eps_target=float(eps),
        kernel_mismatch=mismatch,
    )


def exact_er(L, u, v, rank_rtol=RANK_RTOL):
    """(e_u - e_v)^T L^+ (e_u - e_v) via dense pseudoinverse.

    Returns math.inf when u and v lie in different components.
    """
    L = np.asarray(L, dtype=np.float64)
    n = L.shape[0]
    if not (0 <= u < n and 0 <= v < n):
        raise ValidationError("vertex out of range")
    if u == v:
        return 0.0
    w, V = np.linalg.eigh(0.5 * (L + L.T))
    cut = rank_rtol * max(np.abs(w).max(), 1e-300)
    b = np.zeros(n)
    b[u], b[v] = 1.0, -1.0
    coeff = V.T @ b
    ker = np.abs(w) <= cut
    if np.any(np.abs(coeff[ker]) > 1e-8):
        return math.inf
    rng = ~ker
    return float(np.sum(coeff[rng] ** 2 / w[rng]))


def exact_er_matrix(L, rank_rtol=RANK_RTOL):
    """All-pairs effective resistances from the pseudoinverse Gram identity."""
    Lp = np.linalg.pinv(np.asarray(L, dtype=np.float64), rcond=rank_rtol)
    d = np.diag(Lp)
    return d[:, None] + d[None, :] - Lp - Lp.T


@dataclass
class SupportReport:
    """Pencil eigenvalue range vs the bracket [lower, upper] it must sit in."""

    lambda_min: float
    lambda_max: float
    lower: float
    upper: float
    slack: float

    @property
    def passed(self):
        return self.lambda_min >= self.lower - self.slack and self.lambda_max <= self.upper + self.slack


def support_check(G: WeightedGraph, r, slack=1e-9, threshold=DENSE_THRESHOLD):
    """Certify the parity support bracket of the r-step walk Laplacian:
    [1/2, r] against L_G for odd r, [1, r/2] against L_{G_2} for even r."""
    if G.n > threshold:
        raise ValidationError(f"dense oracle limited to n <= {threshold}")
    Lr = dense_monomial(G, r)
    if r % 2 == 1:
        base = G.laplacian_dense()
        lo, hi = 0.5, float(r)
    else:
        base = dense_monomial(G, 2)
        lo, hi = 1.0, r / 2.0
    vals, _ = generalized_eigenvalues(Lr, base)
    if len(vals) == 0:
        lam_min, lam_max = lo, lo
    else:
        lam_min, lam_max = float(vals.min()), float(vals.max())
    return SupportReport(lam_min, lam_max, lo, hi, slack)


@dataclass(frozen=True)
class EnumeratedPath:
    vertices: tuple
    weight: float
    resistance_bound: float

    @property
    def mass(self):
        return self.weight * self.resistance_bound

    @property
    def closed(self):
        return self.vertices[0] == self.vertices[-1]

    @property
    def palindromic(self):
        return self.vertices == self.vertices[::-1]


def enumerate_paths(G: WeightedGraph, r, max_n=8, max_r=5):
    """All directed length-r walks with exact w(p) and Z(p).

    Each walk appears once per direction; a walk and its reversal describe
    the same multi-edge, so aggregate masses halve non-palindromic pairs.
    """
    if G.n > max_n or r > max_r:
        raise ValidationError(f"enumeration guarded at n <= {max_n}, r <= {max_r}")
    if r < 1:
        raise ValidationError("walk length must be >= 1")
    A = G.adjacency
    indptr, indices, data = A.indptr, A.indices, A.data
    D = G.degree
    out = []
    stack = [((u,), 1.0, 0.0) for u in range(G.n)]
    while stack:
        verts, wnum, z = stack.pop()
        u = verts[-1]
        depth = len(verts) - 1
        if depth == r:
            out.append(EnumeratedPath(verts, wnum, z))
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            a = data[k]
            w_next = wnum * a
            if depth + 1 < r:
                w_next /= D[v]  # v is interior
            stack.append((verts + (v,), w_next, z + 2.0 / a))
    return out


def total_enumerated_mass(paths):
    """Sum of w(p) Z(p) over direction-identified walks; equals 2 r m."""
    return 0.5 * sum(p.mass for p in paths)


def canonical_path_masses(paths):
    """Aggregate directed walks into canonical (direction-free) walks.

    Returns dict mapping canonical vertex tuple -> mass, where palindromic
    walks carry half their directed mass so the totals sum to 2 r m.
    """
    masses = {}
    for p in paths:
        key = min(p.vertices, p.vertices[::-1])
        masses[key] = masses.get(key, 0.0) + 0.5 * p.mass
    return masses


def scalar_inequality_suite(grid_points=10**4, max_r=64):
    """Scalar support inequalities on a lambda grid; returns True iff clean.

    Checks, for lambda in (-1, 1):
      0.5 (1 - x) <= 1 - x^(2r+1) <= (2r+1)(1 - x)
      (1 - x^2)   <= 1 - x^(2r)   <= r (1 - x^2)
      1 - x^(4r+2) <= (1 + 1/(2r)) (1 - x^(4r))
    """
    lam = np.linspace(-1.0, 1.0, grid_points + 2)[1:-1]
    tol = 1e-12
    for r in range(1, max_r + 1):
        odd = 1.0 - lam ** (2 * r + 1)
        if np.any(odd < 0.5 * (1 - lam) - tol) or np.any(odd > (2 * r + 1) * (1 - lam) + tol):
            return False
        even = 1.0 - lam ** (2 * r)
        if np.any(even < (1 - lam**2) - tol) or np.any(even > r * (1 - lam**2) + tol):
            return False
        slacked = 1.0 - lam ** (4 * r + 2)
        base = 1.0 - lam ** (4 * r)
        if np.any(slacked < base - tol) or np.any(slacked > (1 + 1 / (2 * r)) * base + tol):
            return False
    return True

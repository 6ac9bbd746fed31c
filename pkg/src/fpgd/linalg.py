"""Field-generic dense linear algebra for factored PSD optimization.

Everything here works uniformly for real symmetric and complex Hermitian
matrices: conjugation is a no-op on real arrays, and all matrix inner
products take the real part of trace(A^H B) so results are real in both
fields.  Factor alignment uses unitary matrices in the complex case (the
natural extension of the orthogonal group; real inputs recover O(r)).
"""

import numpy as np

__all__ = [
    "EigPair",
    "is_hermitian",
    "require_hermitian",
    "trace_inner",
    "spectral_norm",
    "hermitian_eig_top_r",
    "psd_project",
    "factor_from_psd",
    "procrustes_align",
    "procrustes_dist",
    "project_frobenius_ball",
    "project_l1_ball",
]

# Eigenvalues below this (relative to the top one) count as numerically zero
# when extracting factors of degenerate-rank matrices.
_RANK_EPS = 1e-12


class EigPair:
    """Top-r eigenvalues (descending) with orthonormal eigenvectors."""

    def __init__(self, values, vectors):
        self.values = np.asarray(values, dtype=float)
        self.vectors = np.asarray(vectors)

    def __iter__(self):
        return iter((self.values, self.vectors))


def trace_inner(a, b):
    """Real trace inner product <A, B> = Re trace(A^H B)."""
    return float(np.real(np.vdot(a, b)))


def is_hermitian(m, tol=1e-12):
    """Check entrywise conjugate symmetry up to tol * max|entry|."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = np.max(np.abs(m)) if m.size else 0.0
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * max(scale, 1e-300))


def require_hermitian(m, tol=1e-12, what="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be square, got shape {m.shape}")
    if not is_hermitian(m, tol=tol):
        raise ValueError(f"{what} is not Hermitian within tolerance {tol:g}")
    return m


def spectral_norm(m):
    """Largest singular value; uses |eigenvalues| for Hermitian input."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    if m.ndim == 2 and m.shape[0] == m.shape[1] and is_hermitian(m, tol=1e-10):
        return float(np.max(np.abs(np.linalg.eigvalsh(m))))
    return float(np.linalg.norm(m, 2))


def _fix_vector_phases(vectors):
    # Make the largest-modulus entry of each column real-positive so
    # eigendecompositions are deterministic up to degeneracies.
    v = vectors.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        i = int(np.argmax(np.abs(col)))
        pivot = col[i]
        if np.abs(pivot) > 0:
            v[:, j] = col * (np.conj(pivot) / np.abs(pivot))
    return v


def hermitian_eig_top_r(m, r):
    """Top-r eigenpairs of a Hermitian matrix, by algebraic eigenvalue.

    Parameters
    ----------
    m : (n, n) array, Hermitian within 1e-12 relative tolerance.
    r : int, 1 <= r <= n.

    Returns
    -------
    EigPair with ``values`` sorted descending and orthonormal ``vectors``
    whose largest-modulus entries are real-positive.
    """
    m = require_hermitian(m)
    n = m.shape[0]
    if not 1 <= r <= n:
        raise ValueError(f"rank r={r} out of range for n={n}")
    w, v = np.linalg.eigh(m)  # ascending
    idx = np.argsort(w)[::-1][:r]
    return EigPair(w[idx], _fix_vector_phases(v[:, idx]))


def psd_project(m):
    """Projection onto the PSD cone: clip negative eigenvalues.

    Nearest PSD matrix in Frobenius norm; idempotent; Hermitian output.
    """
    m = require_hermitian(m)
    w, v = np.linalg.eigh(m)
    w = np.maximum(w, 0.0)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def factor_from_psd(x, r):
    """n x r factor U with U U^H = best rank-r PSD part of ``x``.

    Columns carry sqrt of the top-r eigenvalues; eigenvalues below
    1e-12 * lambda_max count as zero and yield zero columns, so the
    factor always has exactly r columns.
    """
    pair = hermitian_eig_top_r(x, r)
    vals = pair.values.copy()
    cutoff = _RANK_EPS * max(vals[0], 0.0) if vals.size else 0.0
    vals[vals <= cutoff] = 0.0
    return pair.vectors * np.sqrt(vals)


def procrustes_align(u, v):
    """Best alignment of ``v`` onto ``u`` over orthonormal r x r matrices.

    Returns ``(dist, rotation)`` where ``rotation`` minimizes
    ||u - v @ R||_F over unitary R (orthogonal for real inputs) and
    ``dist`` is the minimum, i.e. the rotation-invariant factor distance.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    # Polar factor of v^H u solves the orthogonal Procrustes problem.
    w, _, zh = np.linalg.svd(v.conj().T @ u)
    rot = w @ zh
    dist = float(np.linalg.norm(u - v @ rot))
    return dist, rot


def procrustes_dist(u, v):
    """Rotation-invariant distance min_R ||u - v R||_F."""
    return procrustes_align(u, v)[0]


def project_frobenius_ball(v, lam):
    """Euclidean projection onto {||U||_F <= lam}; pure scaling.

    Returns ``(projected, xi)`` with xi = 1 for feasible input and
    xi = lam / ||v||_F otherwise.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    v = np.asarray(v)
    nrm = float(np.linalg.norm(v))
    if nrm <= lam:
        return v, 1.0
    xi = lam / nrm
    return xi * v, xi


def project_l1_ball(v, lam):
    """Euclidean projection onto {||U||_1 <= lam} (entrywise l1 norm).

    Sorted-threshold algorithm on the entry moduli; complex entries keep
    their phases (the modulus pattern is projected, a standard complex
    extension).
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    v = np.asarray(v)
    mags = np.abs(v).ravel()
    total = float(mags.sum())
    if total <= lam:
        return v
    # Duchi et al. soft-threshold level for the simplex {sum = lam}.
    s = np.sort(mags)[::-1]
    cumulative = np.cumsum(s)
    k = np.arange(1, s.size + 1)
    rho = int(np.max(np.nonzero(s - (cumulative - lam) / k > 0)[0])) + 1
    theta = (cumulative[rho - 1] - lam) / rho
    shrunk = np.maximum(mags - theta, 0.0).reshape(v.shape)
    if np.iscomplexobj(v):
        phases = np.where(np.abs(v) > 0, v / np.where(np.abs(v) > 0, np.abs(v), 1.0), 0.0)
        return phases * shrunk
    return np.sign(v) * shrunk

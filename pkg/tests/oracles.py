"""Brute-force reference implementations used as independent test oracles.

These deliberately avoid the code paths of the package: the Jacobi
eigensolver is hand-rolled (no LAPACK), the O(2) alignment search is a
dense angle grid, and the l1 projection is a coarse-to-fine grid search
over the simplex face.
"""

import numpy as np


def jacobi_eigh(a, sweeps=60, tol=1e-14):
    """Cyclic Jacobi eigensolver for Hermitian matrices: repeatedly
    diagonalize 2x2 blocks with exact closed-form unitaries.  Brute-force
    reference, independent of LAPACK."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    for _ in range(sweeps):
        off = np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off <= tol * max(1.0, np.sqrt(np.sum(np.abs(a) ** 2))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                rho = abs(a[p, q])
                if rho == 0.0:
                    continue
                alpha, beta = a[p, p].real, a[q, q].real
                phase = a[p, q] / rho
                half_gap = np.hypot(0.5 * (alpha - beta), rho)
                lam_hi = 0.5 * (alpha + beta) + half_gap
                lam_lo = 0.5 * (alpha + beta) - half_gap
                # Build the better-conditioned eigenvector (the one whose
                # second component avoids cancellation) and take its exact
                # orthogonal complement, so j2 is unitary to machine
                # precision even for tiny off-diagonal entries.
                if alpha >= beta:
                    w = np.array([rho * phase, lam_lo - alpha])
                    w /= np.linalg.norm(w)
                    j2 = np.column_stack([[-np.conj(w[1]), np.conj(w[0])], w])
                else:
                    w = np.array([rho * phase, lam_hi - alpha])
                    w /= np.linalg.norm(w)
                    j2 = np.column_stack([w, [-np.conj(w[1]), np.conj(w[0])]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j2
                a[idx, :] = j2.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ j2
    w = np.real(np.diag(a))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def grid_o2_dist(u, v, step=1e-4):
    """Brute-force Dist over O(2): dense angle grid of rotations and
    reflections.  ||u - v R||^2 = ||u||^2 + ||v||^2 - 2 tr(R^T A), A = v^T u."""
    a = v.T @ u
    theta = np.arange(0.0, 2.0 * np.pi, step)
    c, s = np.cos(theta), np.sin(theta)
    # rotations [[c, -s], [s, c]] and reflections (rotation @ diag(1, -1))
    rot_scores = c * (a[0, 0] + a[1, 1]) + s * (a[1, 0] - a[0, 1])
    ref_scores = c * (a[0, 0] - a[1, 1]) + s * (a[1, 0] + a[0, 1])
    best = max(rot_scores.max(), ref_scores.max())
    sq = np.linalg.norm(u) ** 2 + np.linalg.norm(v) ** 2 - 2.0 * best
    return np.sqrt(max(sq, 0.0))


def random_hermitian(rng, n, complex_field=True, scale=1.0):
    g = rng.standard_normal((n, n))
    if complex_field:
        g = g + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (g + g.conj().T)



def grid_l1_project(v, lam, rounds=6):
    """Projected-coordinate brute force: coarse-to-fine grid over the
    simplex face {|z| >= 0, sum = lam} with the sign pattern of v.
    Dimension <= 3."""
    flat = np.abs(np.asarray(v, dtype=float)).ravel()
    if flat.sum() <= lam:
        return np.asarray(v, dtype=float)
    d = flat.size
    assert d in (2, 3)
    lo = np.zeros(d)
    hi = np.full(d, lam)
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[k], hi[k], 41) for k in range(d - 1)]
        grids = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=1)
        last = lam - coords.sum(axis=1)
        ok = last >= -1e-12
        coords = np.column_stack([coords[ok], np.maximum(last[ok], 0.0)])
        errs = np.sum((coords - flat) ** 2, axis=1)
        best = coords[np.argmin(errs)]
        span = (hi - lo) / 8.0
        lo = np.maximum(best - span, 0.0)
        hi = best + span
    out = best.reshape(np.asarray(v).shape)
    return np.sign(v) * out



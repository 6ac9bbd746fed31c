"""Least-squares sensing objectives f(X) = ||A(X) - y||_2^2.

A measurement ensemble is a list of Hermitian operators E_i with
observations y_i; the forward map is (A(X))_i = Re trace(E_i X), the
adjoint is A*(z) = sum_i z_i E_i, and the gradient convention is

    grad f(X) = 2 A*(A(X) - y),

i.e. the residual factor 2 lives inside ``grad``; the factored-space
update uses grad(X) @ U directly.
"""

import json

import numpy as np

from .linalg import require_hermitian

__all__ = ["MeasurementEnsemble", "Objective", "empirical_rip"]


class MeasurementEnsemble:
    """Linear sensing operator: m Hermitian operators plus observations.

    Parameters
    ----------
    operators : (m, n, n) array of Hermitian matrices.
    y : (m,) real observations.
    noise_norm : l2 norm of the additive noise used to produce ``y``
        (0 for noiseless data); carried as metadata.
    """

    def __init__(self, operators, y, noise_norm=0.0):
        operators = np.asarray(operators)
        y = np.asarray(y, dtype=float)
        if operators.ndim != 3 or operators.shape[1] != operators.shape[2]:
            raise ValueError(f"operators must be (m, n, n), got {operators.shape}")
        if y.shape != (operators.shape[0],):
            raise ValueError("y length must match the number of operators")
        if noise_norm < 0:
            raise ValueError("noise_norm must be non-negative")
        for k in range(operators.shape[0]):
            require_hermitian(operators[k], what=f"operator {k}")
        self.operators = operators
        self.y = y
        self.noise_norm = float(noise_norm)
        # Flattened views make apply/adjoint single BLAS calls.
        self._flat = operators.reshape(operators.shape[0], -1)
        self._flat_conj = self._flat.conj()

    @property
    def m(self):
        return self.operators.shape[0]

    @property
    def dim(self):
        return self.operators.shape[1]

    @property
    def field(self):
        return "complex" if np.iscomplexobj(self.operators) else "real"

    def apply(self, x):
        """A(X): real vector of Re trace(E_i X)."""
        x = np.asarray(x)
        if x.shape != (self.dim, self.dim):
            raise ValueError(f"dimension mismatch: expected {(self.dim, self.dim)}, got {x.shape}")
        return np.real(self._flat_conj @ x.ravel())

    def adjoint(self, z):
        """A*(z) = sum_i z_i E_i; Hermitian for real z."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.m,):
            raise ValueError("adjoint input length must match m")
        return (z @ self._flat).reshape(self.dim, self.dim)

    # ---- serialization ----------------------------------------------------

    def to_json_dict(self):
        """{dim, field, operators, y, noise_norm}; complex entries as [re, im]."""
        if self.field == "complex":
            ops = [
                [[float(c.real), float(c.imag)] for c in op.ravel()]
                for op in self.operators
            ]
        else:
            ops = [[float(c) for c in op.ravel()] for op in self.operators]
        return {
            "dim": int(self.dim),
            "field": self.field,
            "operators": ops,
            "y": [float(v) for v in self.y],
            "noise_norm": self.noise_norm,
        }

    @classmethod
    def from_json_dict(cls, doc):
        n = int(doc["dim"])
        field = doc["field"]
        if field not in ("real", "complex"):
            raise ValueError(f"unknown field {field!r}")
        raw = doc["operators"]
        if field == "complex":
            ops = np.array(
                [[complex(re, im) for re, im in op] for op in raw], dtype=complex
            ).reshape(len(raw), n, n)
        else:
            ops = np.array(raw, dtype=float).reshape(len(raw), n, n)
        return cls(ops, np.array(doc["y"], dtype=float), float(doc["noise_norm"]))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


class Objective:
    """f(X) = ||A(X) - y||_2^2 with gradients and constant estimation.

    Immutable after construction; the smoothness estimate is computed
    lazily and cached.
    """

    def __init__(self, ensemble):
        if ensemble.m == 0:
            raise ValueError("ensemble must be non-empty")
        self.ensemble = ensemble
        self._smoothness = None
        self._mu_cache = {}

    @property
    def dim(self):
        return self.ensemble.dim

    def residual(self, x):
        return self.ensemble.apply(x) - self.ensemble.y

    def value(self, x):
        """f(X) = sum_i (Re trace(E_i X) - y_i)^2."""
        r = self.residual(x)
        return float(r @ r)

    def grad(self, x):
        """Matrix gradient 2 sum_i (Re trace(E_i X) - y_i) E_i; Hermitian."""
        return self.ensemble.adjoint(2.0 * self.residual(x))

    def grad_from_residual(self, r):
        # Shared-residual path for solvers that already computed A(X) - y.
        return self.ensemble.adjoint(2.0 * r)

    def factored_grad(self, u):
        """grad(U U^H) @ U (the residual factor 2 lives in grad)."""
        u = np.asarray(u)
        if u.ndim != 2 or u.shape[0] != self.dim:
            raise ValueError(f"factor must be ({self.dim}, r), got {u.shape}")
        return self.grad(u @ u.conj().T) @ u

    def smoothness(self, tol=1e-6, max_iters=20000, seed=0):
        """L_hat = 2 lambda_max of the Gram form of A, by power iteration.

        Iterates z <- A(A*(z)) on the m-vector side (same nonzero spectrum
        as the n^2-side Gram form) until the Rayleigh quotient is stable
        to ``tol`` relative.
        """
        if self._smoothness is not None:
            return self._smoothness
        ens = self.ensemble
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(ens.m)
        z /= np.linalg.norm(z)
        lam = 0.0
        for _ in range(max_iters):
            w = ens.apply(ens.adjoint(z))
            lam_new = float(z @ w)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                lam_new = 0.0
                break
            z = w / nw
            if abs(lam_new - lam) <= tol * abs(lam_new):
                lam = lam_new
                break
            lam = lam_new
        self._smoothness = 2.0 * lam
        return self._smoothness

    def strong_convexity(self, rank, trials=50, seed=0):
        """mu_hat: 2 * min directional Gram curvature over random rank-r
        Hermitian directions.

        Diagnostics only; the solver's step size never uses it.
        """
        key = (rank, trials, seed)
        if key in self._mu_cache:
            return self._mu_cache[key]
        n = self.dim
        rng = np.random.default_rng(seed)
        complex_field = self.ensemble.field == "complex"
        best = np.inf
        for _ in range(trials):
            g = rng.standard_normal((n, rank))
            if complex_field:
                g = g + 1j * rng.standard_normal((n, rank))
            q, _ = np.linalg.qr(g)
            s = rng.standard_normal(rank)
            d = (q * s) @ q.conj().T
            d /= np.linalg.norm(d)
            curvature = 2.0 * float(np.sum(self.ensemble.apply(d) ** 2))
            best = min(best, curvature)
        self._mu_cache[key] = best
        return best


def empirical_rip(ensemble, rank, trials=200, seed=0):
    """Empirical restricted-isometry spread of ||A(X)||^2 / ||X||_F^2
    over random rank-r PSD matrices.

    Returns a dict with the raw min/max ratio, the mean gain of the
    ensemble, and ``delta`` measured around that gain (a deliberately
    scaled ensemble is not an isometry defect).  Reported as a
    diagnostic; the sandwich is probabilistic, not certified.
    """
    n = ensemble.dim
    rng = np.random.default_rng(seed)
    complex_field = ensemble.field == "complex"
    ratios = np.empty(trials)
    for k in range(trials):
        g = rng.standard_normal((n, rank))
        if complex_field:
            g = g + 1j * rng.standard_normal((n, rank))
        x = g @ g.conj().T
        x /= np.linalg.norm(x)
        ratios[k] = float(np.sum(ensemble.apply(x) ** 2))
    low, high, gain = float(ratios.min()), float(ratios.max()), float(ratios.mean())
    return {
        "low": low,
        "high": high,
        "gain": gain,
        "delta": max(1.0 - low / gain, high / gain - 1.0),
    }

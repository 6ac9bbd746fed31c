"""Problem generators: quantum state tomography, sparse phase retrieval,
and synthetic matrix sensing, each with known ground truth.

All generators are deterministic functions of their seed and return a
ProblemInstance bundling the least-squares objective, the true matrix
X* and a factor U* of it, and the factored-space constraint set.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import project_frobenius_ball, project_l1_ball
from .objective import MeasurementEnsemble, Objective

__all__ = [
    "ConstraintSet",
    "unconstrained",
    "frobenius_ball",
    "l1_ball",
    "ProblemInstance",
    "pauli_operator",
    "gen_qst",
    "gen_phase_retrieval",
    "gen_synthetic",
]

_PAULI = {
    "0": np.eye(2, dtype=complex),
    "1": np.array([[0, 1], [1, 0]], dtype=complex),
    "2": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "3": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Qubit counts past this would need >= 4^13 * 16 bytes per operator batch.
_MAX_QUBITS = 12


@dataclass(frozen=True)
class ConstraintSet:
    """Factored-space constraint with its Euclidean projection.

    kind is one of "unconstrained", "frobenius_ball", "l1_ball".  The
    Frobenius ball is faithful (one-to-one with the trace constraint on
    X = U U^H); the l1 ball is not: feasible factors can map to
    infeasible X, so factored-space convergence statements do not
    transfer.
    """

    kind: str
    lam: float | None = None
    faithful: bool = True

    def project(self, v):
        """Project a factor; returns (projected, xi).

        xi is the norm scaling actually applied, ||Pi(v)||_F / ||v||_F:
        exactly the scaling factor for the Frobenius ball, 1 whenever the
        input is feasible, and the induced norm ratio for the l1 ball.
        """
        if self.kind == "unconstrained":
            return v, 1.0
        if self.kind == "frobenius_ball":
            return project_frobenius_ball(v, self.lam)
        if self.kind == "l1_ball":
            out = project_l1_ball(v, self.lam)
            nv = float(np.linalg.norm(v))
            if nv == 0.0 or out is v:
                return out, 1.0
            return out, float(np.linalg.norm(out)) / nv
        raise ValueError(f"unknown constraint kind {self.kind!r}")

    def contains(self, v, tol=1e-10):
        if self.kind == "unconstrained":
            return True
        if self.kind == "frobenius_ball":
            return float(np.linalg.norm(v)) <= self.lam + tol
        if self.kind == "l1_ball":
            return float(np.abs(v).sum()) <= self.lam + tol
        raise ValueError(f"unknown constraint kind {self.kind!r}")

    def to_json_dict(self):
        return {"kind": self.kind, "lam": self.lam, "faithful": self.faithful}

    @classmethod
    def from_json_dict(cls, doc):
        return cls(doc["kind"], doc["lam"], doc["faithful"])


def unconstrained():
    return ConstraintSet("unconstrained", None, True)


def frobenius_ball(lam):
    if lam <= 0:
        raise ValueError("lam must be positive")
    return ConstraintSet("frobenius_ball", float(lam), True)


def l1_ball(lam):
    if lam <= 0:
        raise ValueError("lam must be positive")
    return ConstraintSet("l1_ball", float(lam), False)


@dataclass
class ProblemInstance:
    """A sensing problem with known ground truth.

    truth_x = truth_factor @ truth_factor^H up to 1e-10, and truth_factor
    is feasible for ``constraint`` for the faithful generators.
    """

    objective: Objective
    truth_x: np.ndarray
    truth_factor: np.ndarray
    constraint: ConstraintSet
    rank: int
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.objective.dim

    def save(self, ensemble_path, companion_path):
        """Write the ensemble JSON and the {truth, constraint, seed} companion."""
        self.objective.ensemble.save(ensemble_path)
        complex_field = np.iscomplexobj(self.truth_x)

        def encode(mat):
            if complex_field:
                return [[float(c.real), float(c.imag)] for c in np.asarray(mat).ravel()]
            return [float(c) for c in np.asarray(mat).ravel()]

        doc = {
            "truth": encode(self.truth_x),
            "truth_factor": encode(self.truth_factor),
            "constraint": self.constraint.to_json_dict(),
            "rank": int(self.rank),
            "seed": int(self.seed),
        }
        with open(companion_path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, ensemble_path, companion_path):
        ensemble = MeasurementEnsemble.load(ensemble_path)
        with open(companion_path) as fh:
            doc = json.load(fh)
        n = ensemble.dim
        rank = int(doc["rank"])

        def decode(flat, shape):
            if ensemble.field == "complex":
                arr = np.array([complex(re, im) for re, im in flat], dtype=complex)
            else:
                arr = np.array(flat, dtype=float)
            return arr.reshape(shape)

        return cls(
            objective=Objective(ensemble),
            truth_x=decode(doc["truth"], (n, n)),
            truth_factor=decode(doc["truth_factor"], (n, rank)),
            constraint=ConstraintSet.from_json_dict(doc["constraint"]),
            rank=rank,
            seed=int(doc["seed"]),
        )


def pauli_operator(q, index, normalize=True):
    """Tensor product of single-qubit Pauli matrices, one per digit.

    Parameters
    ----------
    q : qubit count, 1 <= q <= 12.
    index : base-4 digit string of length q; 0,1,2,3 pick I, sigma_x,
        sigma_y, sigma_z.
    normalize : divide by sqrt(2^q) so the operator has unit Frobenius
        norm (the convention used throughout; distinct index strings are
        then orthonormal under the trace inner product).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > _MAX_QUBITS:
        raise ValueError(f"q={q} exceeds the memory budget (max {_MAX_QUBITS})")
    if len(index) != q or any(d not in _PAULI for d in index):
        raise ValueError(f"index must be a length-{q} string over digits 0-3")
    op = _PAULI[index[0]]
    for digit in index[1:]:
        op = np.kron(op, _PAULI[digit])
    if normalize:
        op = op / np.sqrt(2.0**q)
    return op


def _int_to_pauli_string(value, q):
    digits = []
    for _ in range(q):
        digits.append(str(value % 4))
        value //= 4
    return "".join(reversed(digits))


def _sample_distinct_paulis(q, m, rng):
    total = 4**q
    if m > total:
        raise ValueError(f"cannot draw {m} distinct Pauli strings from 4^{q} = {total}")
    if m > total // 2:
        picks = rng.permutation(total)[:m]
    else:
        seen = set()
        picks = []
        while len(picks) < m:
            candidate = int(rng.integers(0, total))
            if candidate not in seen:
                seen.add(candidate)
                picks.append(candidate)
        picks = np.array(picks)
    return [_int_to_pauli_string(int(v), q) for v in picks]


def _scaled_noise(rng, m, noise_norm):
    if noise_norm == 0.0:
        return np.zeros(m)
    eta = rng.standard_normal(m)
    return eta * (noise_norm / np.linalg.norm(eta))


def gen_qst(q, r, c_sam, noise_norm=1e-3, seed=0):
    """Quantum state tomography instance: rank-r density matrix, Pauli
    measurements, Frobenius-ball factored constraint.

    n = 2^q; m = round(c_sam * r * n * ln n) distinct Pauli index strings
    sampled uniformly without replacement.  X* is PSD rank-r with unit
    trace (random orthonormal directions, Dirichlet(1,...,1) spectrum);
    the noise vector is rescaled to exactly ``noise_norm``.

    Sampled operators carry a uniform gain n^{3/2} / sqrt(m) on top of
    the unit-Frobenius Pauli convention, so ||A(X)||^2 ~ n ||X||_F^2:
    the gain-normalized ensemble satisfies the restricted-isometry
    sandwich, and the absolute gain reproduces the reported recovery
    error magnitudes under ||noise|| = 1e-3.
    """
    if q < 1 or q > _MAX_QUBITS:
        raise ValueError(f"q must be in [1, {_MAX_QUBITS}]")
    n = 2**q
    if r > n:
        raise ValueError("rank must not exceed 2^q")
    m = int(round(c_sam * r * n * np.log(n)))
    if m < 1:
        raise ValueError("c_sam too small: no measurements")
    rng = np.random.default_rng(seed)
    strings = _sample_distinct_paulis(q, m, rng)
    scale = n**1.5 / np.sqrt(m)
    ops = np.stack([scale * pauli_operator(q, s) for s in strings])

    g = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    basis, _ = np.linalg.qr(g)
    spectrum = rng.dirichlet(np.ones(r))
    spectrum = np.sort(spectrum)[::-1]
    truth_factor = basis * np.sqrt(spectrum)
    truth_x = truth_factor @ truth_factor.conj().T
    truth_x = 0.5 * (truth_x + truth_x.conj().T)

    ensemble = MeasurementEnsemble(ops, np.zeros(m), noise_norm)
    clean = ensemble.apply(truth_x)
    ensemble = MeasurementEnsemble(ops, clean + _scaled_noise(rng, m, noise_norm), noise_norm)
    return ProblemInstance(
        objective=Objective(ensemble),
        truth_x=truth_x,
        truth_factor=truth_factor,
        constraint=frobenius_ball(1.0),
        rank=r,
        seed=seed,
        meta={"kind": "qst", "q": q, "c_sam": c_sam, "pauli_strings": strings},
    )


def gen_phase_retrieval(n, sparsity, m, noise_norm=0.0, lam=None, seed=0):
    """Sparse phase retrieval: rank-1 lifted recovery of a k-sparse
    complex vector from quadratic measurements y_i = |<a_i, x*>|^2.

    Operators are Phi_i = a_i a_i^H with complex Gaussian a_i; the
    factored constraint is the (unfaithful) entrywise l1 ball of radius
    ``lam``, default 1.2 * ||x*||_1.
    """
    if sparsity > n:
        raise ValueError("sparsity must not exceed n")
    if m < 1:
        raise ValueError("need at least one measurement")
    rng = np.random.default_rng(seed)
    support = rng.choice(n, size=sparsity, replace=False)
    x = np.zeros(n, dtype=complex)
    x[support] = rng.standard_normal(sparsity) + 1j * rng.standard_normal(sparsity)
    x /= np.linalg.norm(x)

    a = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2.0)
    ops = np.einsum("mi,mj->mij", a, a.conj())
    truth_factor = x[:, None]
    truth_x = truth_factor @ truth_factor.conj().T
    truth_x = 0.5 * (truth_x + truth_x.conj().T)

    ensemble = MeasurementEnsemble(ops, np.zeros(m), noise_norm)
    clean = ensemble.apply(truth_x)
    ensemble = MeasurementEnsemble(ops, clean + _scaled_noise(rng, m, noise_norm), noise_norm)
    if lam is None:
        lam = 1.2 * float(np.abs(x).sum())
    return ProblemInstance(
        objective=Objective(ensemble),
        truth_x=truth_x,
        truth_factor=truth_factor,
        constraint=l1_ball(lam),
        rank=1,
        seed=seed,
        meta={"kind": "phase_retrieval", "sparsity": sparsity},
    )


def octanary_pattern(n, rng):
    """One coded-diffraction octanary mask (provided for completeness;
    the desk-scale generator uses Gaussian vectors instead)."""
    phases = rng.choice([1, -1, 1j, -1j], size=n)
    mags = np.where(rng.random(n) < 0.8, np.sqrt(2.0) / 2.0, np.sqrt(3.0))
    return phases * mags


def gen_synthetic(n, r, m, condition_number=2.0, noise_norm=0.0, seed=0):
    """Real symmetric Gaussian sensing of a rank-r PSD matrix with a
    controlled spectrum.

    X* has geometric spectrum from 1 down to 1/condition_number,
    rescaled to unit trace; operators (G + G^T) / (2 sqrt(m)) are
    near-isometric in expectation; constraint is the Frobenius unit ball.
    """
    if condition_number < 1:
        raise ValueError("condition_number must be >= 1")
    if r > n:
        raise ValueError("rank must not exceed n")
    if m < 1:
        raise ValueError("need at least one measurement")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, n, n))
    ops = (g + np.transpose(g, (0, 2, 1))) / (2.0 * np.sqrt(m))

    basis, _ = np.linalg.qr(rng.standard_normal((n, r)))
    if r == 1:
        spectrum = np.array([1.0])
    else:
        spectrum = condition_number ** (-np.arange(r) / (r - 1))
    spectrum = spectrum / spectrum.sum()
    truth_factor = basis * np.sqrt(spectrum)
    truth_x = truth_factor @ truth_factor.T
    truth_x = 0.5 * (truth_x + truth_x.T)

    ensemble = MeasurementEnsemble(ops, np.zeros(m), noise_norm)
    clean = ensemble.apply(truth_x)
    ensemble = MeasurementEnsemble(ops, clean + _scaled_noise(rng, m, noise_norm), noise_norm)
    return ProblemInstance(
        objective=Objective(ensemble),
        truth_x=truth_x,
        truth_factor=truth_factor,
        constraint=frobenius_ball(1.0),
        rank=r,
        seed=seed,
        meta={"kind": "synthetic", "condition_number": condition_number},
    )

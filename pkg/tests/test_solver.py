"""Solver: initialization, step size, iteration, stopping, trace export."""

import json

import numpy as np
import pytest

from fpgd.linalg import procrustes_dist, spectral_norm
from fpgd.objective import MeasurementEnsemble, Objective
from fpgd.problems import (
    ProblemInstance,
    frobenius_ball,
    gen_qst,
    gen_synthetic,
    unconstrained,
)
from fpgd.solver import (
    SolverConfig,
    fgd_solve,
    init_point,
    projfgd_solve,
    step_size,
    summary_dict,
    write_summary_json,
    write_trace_csv,
)


def scalar_instance(y_value, constraint=None):
    ens = MeasurementEnsemble(np.ones((1, 1, 1)), np.array([float(y_value)]), 0.0)
    truth = np.array([[abs(float(y_value))]])
    return ProblemInstance(
        objective=Objective(ens),
        truth_x=truth,
        truth_factor=np.sqrt(truth),
        constraint=constraint or unconstrained(),
        rank=1,
        seed=0,
    )


# ---------------------------------------------------------------------------
# init_point
# ---------------------------------------------------------------------------


def test_init_zero_observations_degenerate():
    ens = MeasurementEnsemble(np.eye(3)[None, :, :], np.array([0.0]), 0.0)
    u0 = init_point(Objective(ens), unconstrained(), 2)
    assert np.allclose(u0, 0.0)


def test_init_scalar_hand_arithmetic():
    # E = [1], y = [1]: L_hat = 2, -grad f(0) = [[2]], X0 = [[1]], U0 = min(1, lam)
    inst = scalar_instance(1.0)
    obj = inst.objective
    assert obj.smoothness() == pytest.approx(2.0, rel=1e-6)
    u0 = init_point(obj, unconstrained(), 1)
    assert u0[0, 0] == pytest.approx(1.0, rel=1e-6)
    u0 = init_point(obj, frobenius_ball(0.5), 1)
    assert u0[0, 0] == pytest.approx(0.5, rel=1e-6)
    u0 = init_point(obj, frobenius_ball(2.0), 1)
    assert u0[0, 0] == pytest.approx(1.0, rel=1e-6)


def test_init_feasible_on_generated_instances():
    inst = gen_qst(q=3, r=1, c_sam=3.0, noise_norm=1e-3, seed=0)
    u0 = init_point(inst.objective, inst.constraint, inst.rank)
    assert u0.shape == (8, 1)
    assert inst.constraint.contains(u0)


# ---------------------------------------------------------------------------
# step_size
# ---------------------------------------------------------------------------


def test_step_size_formula_instantiation():
    # rig L_hat = 1 and grad(x0) = 0: eta = C / (1 * ||x0||_2)
    ens = MeasurementEnsemble(np.eye(2)[None, :, :] / np.sqrt(2.0), np.array([np.sqrt(2.0)]), 0.0)
    obj = Objective(ens)
    obj._smoothness = 1.0
    x0 = np.eye(2)  # A(x0) = y so grad vanishes; ||x0||_2 = 1
    assert step_size(obj, x0, 1.0 / 128.0) == pytest.approx(1.0 / 128.0)
    # doubling both spectral norms halves eta
    x2 = 2.0 * np.eye(2)
    obj2 = Objective(MeasurementEnsemble(ens.operators, np.array([2.0 * np.sqrt(2.0)]), 0.0))
    obj2._smoothness = 1.0
    assert step_size(obj2, x2, 1.0 / 128.0) == pytest.approx(1.0 / 256.0)


def test_step_size_matches_dense_recomputation():
    rng = np.random.default_rng(1)
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=1e-3, seed=1)
    obj = inst.objective
    for _ in range(5):
        g = rng.standard_normal((8, 8))
        x = 0.5 * (g + g.T)
        expected = (1.0 / 128.0) / (
            obj.smoothness() * np.max(np.abs(np.linalg.eigvalsh(x)))
            + np.max(np.abs(np.linalg.eigvalsh(obj.grad(x))))
        )
        assert step_size(obj, x) == pytest.approx(expected, rel=1e-10)


def test_step_size_zero_denominator():
    ens = MeasurementEnsemble(np.eye(2)[None, :, :], np.array([0.0]), 0.0)
    with pytest.raises(ValueError):
        step_size(Objective(ens), np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# solve loop
# ---------------------------------------------------------------------------


def test_truth_is_fixed_point():
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=0.0, seed=2)
    cfg = SolverConfig(rank=2, max_iters=50, tol=5e-6)
    u, trace = projfgd_solve(inst, cfg, u0=inst.truth_factor)
    assert trace.status == "converged"
    assert trace.n_iters == 1
    assert np.array_equal(u, inst.truth_factor)


def test_fgd_single_hand_computed_iteration():
    # f(x) = (x - 1)^2, u0 = 0.5: eta = (1/16) / (2 * 0.25 + 1.5) = 1/32,
    # u1 = u0 - eta * 2 (u0^2 - 1) u0 = 0.5 + 0.75 / 32 = 0.5234375
    inst = scalar_instance(1.0)
    cfg = SolverConfig(rank=1, max_iters=1, tol=1e-15)
    u, trace = fgd_solve(inst, cfg, u0=np.array([[0.5]]))
    assert trace.step_eta == pytest.approx(1.0 / 32.0, rel=1e-6)
    assert u[0, 0] == pytest.approx(0.5234375, rel=1e-9)
    assert trace.status == "max_iters"


def test_fgd_equals_projfgd_when_unconstrained():
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=1e-3, seed=3)
    free = ProblemInstance(
        inst.objective, inst.truth_x, inst.truth_factor, unconstrained(), 2, 3
    )
    cfg_p = SolverConfig(rank=2, max_iters=200, tol=1e-8, step_size_constant=1.0 / 16.0)
    cfg_f = SolverConfig(rank=2, max_iters=200, tol=1e-8)
    u_p, tr_p = projfgd_solve(free, cfg_p)
    u_f, tr_f = fgd_solve(free, cfg_f)
    assert np.array_equal(u_p, u_f)
    assert tr_p.objective == tr_f.objective


def test_projfgd_iterates_feasible():
    # max_iters=k yields the k-th iterate (deterministic), so feasibility
    # can be checked along the whole path
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=1e-2, seed=4)
    lam = inst.constraint.lam
    for k in (1, 2, 3, 5, 8, 13):
        cfg = SolverConfig(rank=2, max_iters=k, tol=1e-15)
        u, _ = projfgd_solve(inst, cfg)
        assert np.linalg.norm(u) <= lam + 1e-10


def test_xi_one_when_feasible():
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=0.0, seed=5)
    free = ProblemInstance(
        inst.objective, inst.truth_x, inst.truth_factor, unconstrained(), 2, 5
    )
    cfg = SolverConfig(rank=2, max_iters=50, tol=1e-10)
    _, trace = projfgd_solve(free, cfg)
    assert all(x == 1.0 for x in trace.xi)
    assert all(0.0 < x <= 1.0 for x in trace.xi)


def test_solver_determinism():
    inst = gen_qst(q=3, r=1, c_sam=3.0, noise_norm=1e-3, seed=6)
    cfg = SolverConfig(rank=1, max_iters=300, tol=5e-6, record_truth_dist=True)
    u1, t1 = projfgd_solve(inst, cfg)
    u2, t2 = projfgd_solve(inst, cfg)
    assert np.array_equal(u1, u2)
    assert t1.objective == t2.objective
    assert t1.rel_change == t2.rel_change
    assert t1.xi == t2.xi
    assert t1.dist == t2.dist


def test_divergence_status_on_nonfinite_start():
    inst = scalar_instance(1.0)
    cfg = SolverConfig(rank=1, max_iters=10, tol=1e-10)
    with np.errstate(over="ignore"):
        _, trace = fgd_solve(inst, cfg, u0=np.array([[1e200]]))
    assert trace.status == "diverged"


def test_adaptive_step_mode_converges():
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=0.0, seed=7)
    cfg = SolverConfig(
        rank=2, max_iters=5000, tol=5e-6, step_mode="adaptive_per_iter",
        step_size_constant=0.25, record_truth_dist=True,
    )
    u, trace = projfgd_solve(inst, cfg)
    assert trace.status == "converged"
    assert procrustes_dist(u, inst.truth_factor) < 1e-3


def test_stopping_rule_is_spectral():
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=0.0, seed=8)
    cfg = SolverConfig(rank=2, max_iters=400, tol=5e-6, step_size_constant=0.5)
    u, trace = projfgd_solve(inst, cfg)
    assert trace.status == "converged"
    assert trace.rel_change[-1] <= 5e-6
    # recompute the final stopping quantity from the last two iterates
    cfg_prev = SolverConfig(rank=2, max_iters=trace.n_iters - 1, tol=1e-15, step_size_constant=0.5)
    u_prev, _ = projfgd_solve(inst, cfg_prev)
    x, x_prev = u @ u.T, u_prev @ u_prev.T
    expected = spectral_norm(x - x_prev) / spectral_norm(x)
    assert trace.rel_change[-1] == pytest.approx(expected, rel=1e-9)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(rank=1, tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(rank=1, step_size_constant=2.0)
    with pytest.raises(ValueError):
        SolverConfig(rank=1, step_mode="warp")


# ---------------------------------------------------------------------------
# trace export
# ---------------------------------------------------------------------------


def test_trace_csv_format_and_determinism(tmp_path):
    inst = gen_synthetic(n=8, r=2, m=60, condition_number=2.0, noise_norm=1e-3, seed=9)
    cfg = SolverConfig(rank=2, max_iters=100, tol=1e-6, record_truth_dist=True)
    _, trace = projfgd_solve(inst, cfg)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(trace, p1)
    write_trace_csv(trace, p2)
    data1, data2 = p1.read_bytes(), p2.read_bytes()
    assert data1 == data2
    lines = data1.decode().strip().split("\n")
    assert lines[0] == "iter,objective,rel_change,xi,dist,grad_norm"
    assert len(lines) == trace.n_iters + 1
    first = lines[1].split(",")
    assert int(first[0]) == 1
    assert float(first[1]) == trace.objective[0]  # repr round-trips exactly


def test_trace_csv_empty_dist_column(tmp_path):
    inst = gen_synthetic(n=6, r=1, m=30, condition_number=1.0, noise_norm=0.0, seed=10)
    cfg = SolverConfig(rank=1, max_iters=20, tol=1e-6)
    _, trace = projfgd_solve(inst, cfg)
    path = tmp_path / "t.csv"
    write_trace_csv(trace, path)
    row = path.read_text().strip().split("\n")[1].split(",")
    assert row[4] == ""


def test_summary_json(tmp_path):
    inst = gen_synthetic(n=6, r=1, m=30, condition_number=1.0, noise_norm=0.0, seed=11)
    cfg = SolverConfig(rank=1, max_iters=2000, tol=5e-6, step_size_constant=0.5)
    u, trace = projfgd_solve(inst, cfg)
    summary = summary_dict(trace, final_rel_error=0.5, tol=cfg.tol, seed=11)
    path = tmp_path / "summary.json"
    write_summary_json(summary, path)
    doc = json.loads(path.read_text())
    assert set(doc) == {
        "status", "iters", "final_objective", "final_rel_error", "tol", "seed", "elapsed_ms",
    }
    assert doc["status"] == "converged"
    assert doc["tol"] == 5e-6


def test_trace_callback_stream():
    inst = gen_synthetic(n=6, r=1, m=30, condition_number=1.0, noise_norm=0.0, seed=12)
    cfg = SolverConfig(rank=1, max_iters=50, tol=5e-6)
    seen = []
    _, trace = projfgd_solve(inst, cfg, callback=seen.append)
    assert len(seen) == trace.n_iters
    assert [rec["iter"] for rec in seen] == trace.iters
    assert [rec["objective"] for rec in seen] == trace.objective

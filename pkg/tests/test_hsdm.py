import numpy as np
import pytest

import hiersvm as hv
from hiersvm.drs import extract_minimizer
from hiersvm.errors import ConfigError
from hiersvm.hsdm import (HsdmConfig, apply_T, benchmark_config, constraint_residuals,
                          hsdm_step, lambda_schedule, solve_rhc)
from hiersvm.operators import DataOperator
from hiersvm.points import ProductPoint, SplitPoint, product_distance, zero_product_point
from hiersvm.projections import compute_radii

from helpers import product_to_vector, tiny_instance


def binary_instance():
    return hv.TrainingDataset(x=np.array([[2.0], [-2.0]]), y=np.array([1, 2]))


def random_product(ops, rng, scale=2.0):
    return ProductPoint(
        p=scale * rng.standard_normal(ops.dim_h1),
        u=scale * rng.standard_normal((ops.n_samples, ops.n_classes)),
        omega=scale * rng.standard_normal((len(ops.pairs), ops.n_features)),
        t=float(scale * rng.standard_normal()),
    )


# ---------------------------------------------------------------------------
# lambda schedule


def test_schedule_anchor_and_halving():
    cfg = HsdmConfig(lambda1=3.0)
    assert lambda_schedule(1, cfg) == 3.0
    for n in (1, 5, 173, 9999):
        assert lambda_schedule(2 * n, cfg) == pytest.approx(lambda_schedule(n, cfg) / 2.0)


def test_schedule_partial_sums_diverge_at_test_scale():
    cfg = HsdmConfig(lambda1=1.0, max_iterations=4_000_000)
    n = np.arange(1, 10**6 + 1, dtype=float)
    total = float(np.sum(cfg.lambda1 / n))
    # spot-check the vectorized sum against the schedule function
    for probe in (1, 10, 999_983):
        assert lambda_schedule(probe, cfg) == pytest.approx(cfg.lambda1 / probe)
    assert total > 10.0 * cfg.lambda1


def test_schedule_vanishes_in_polish_tail():
    cfg = HsdmConfig(max_iterations=1000, annealing_iterations=100)
    assert lambda_schedule(100, cfg) > 0
    assert lambda_schedule(101, cfg) == 0.0


def test_schedule_rejects_bad_index():
    with pytest.raises(ConfigError):
        lambda_schedule(0, HsdmConfig())


def test_config_validation():
    with pytest.raises(ConfigError):
        HsdmConfig(rho1=-1.0)
    with pytest.raises(ConfigError):
        HsdmConfig(alpha=1.0)
    with pytest.raises(ConfigError):
        HsdmConfig(decay_exponent=0.0)
    with pytest.raises(ConfigError):
        HsdmConfig(schedule="linear")


# ---------------------------------------------------------------------------
# the composed operator T and one HSDM step


def test_hsdm_step_only_changes_t(rng):
    ds = tiny_instance(rng, 3, 4)
    ops = DataOperator(ds)
    box = compute_radii(ds, 50.0)
    z = random_product(ops, rng)
    a = apply_T(z, ops, box, 0.5)
    b = hsdm_step(z, 0.37, ops, box, 0.5)
    np.testing.assert_array_equal(a.p, b.p)
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.omega, b.omega)
    assert b.t == pytest.approx(a.t - 0.37, abs=1e-15)


def test_hsdm_step_zero_lambda_is_apply_T(rng):
    ds = tiny_instance(rng, 2, 3)
    ops = DataOperator(ds)
    box = compute_radii(ds, 50.0)
    z = random_product(ops, rng)
    a = apply_T(z, ops, box, 0.5)
    b = hsdm_step(z, 0.0, ops, box, 0.5)
    assert product_distance(a, b) == 0.0


def test_apply_T_nonexpansive_sampled(rng):
    ds = tiny_instance(rng, 3, 5)
    ops = DataOperator(ds)
    box = compute_radii(ds, 30.0)
    for _ in range(200):
        z1 = random_product(ops, rng, scale=3.0)
        z2 = random_product(ops, rng, scale=3.0)
        lhs = product_distance(apply_T(z1, ops, box, 0.5), apply_T(z2, ops, box, 0.5))
        rhs = product_distance(z1, z2)
        assert lhs <= rhs + 1e-9 * (1.0 + rhs)


def test_converged_point_is_fixed_and_feasible():
    ds = binary_instance()
    ops = DataOperator(ds)
    cfg = benchmark_config(log_every=0)
    params, report = solve_rhc(ds, cfg, ops=ops)
    # reconstruct the fixed point: the report carries the feasibility residuals
    assert report.converged
    assert report.notes["pair_link_residual"] < 1e-5
    assert report.notes["cone_residual"] < 1e-5
    assert report.final_residual < cfg.tolerance


def test_fixed_point_property_of_T():
    # run to convergence, then one more application of T must not move z
    ds = binary_instance()
    ops = DataOperator(ds)
    box = compute_radii(ds, 100.0 * ds.max_sample_norm())
    z = zero_product_point(ds.n_classes, ds.n_features, ds.n_samples)
    lam = 1.0
    for _ in range(20000):
        y = apply_T(z, ops, box, 0.5)
        y.t -= lam
        moved = product_distance(y, z)
        z = y
        if lam > 0 and moved < max(0.05 * lam, 1e-13):
            lam = 0.0 if lam <= 1e-6 else lam / 2.0
        if lam == 0.0 and moved < 1e-12:
            break
    assert product_distance(apply_T(z, ops, box, 0.5), z) <= 1e-9


# ---------------------------------------------------------------------------
# the full solve


def test_solver_reaches_binary_max_margin():
    ds = binary_instance()
    params, report = solve_rhc(ds, benchmark_config(log_every=0))
    # hard-margin optimum for x = +-2: w1 - w2 = 0.5, margin 2
    assert report.hinge_loss <= 1e-9
    assert params.w[0, 0] - params.w[1, 0] == pytest.approx(0.5, abs=1e-5)
    assert report.evaluation.smallest_pairwise_margin == pytest.approx(2.0, abs=1e-4)
    assert report.final_value == pytest.approx(0.5, abs=1e-4)  # t converges to Psi*


def test_bounded_iterates_inside_box(rng):
    ds = tiny_instance(rng, 2, 4)
    ops = DataOperator(ds)
    rho1 = 20.0
    box = compute_radii(ds, rho1)
    z = random_product(ops, rng, scale=1000.0)  # far outside B
    z = apply_T(z, ops, box, 0.5)
    for _ in range(5):
        assert np.linalg.norm(z.p) <= box.rho1 + 1e-9
        assert np.linalg.norm(z.u) <= box.rho2 + 1e-9
        assert np.linalg.norm(z.omega) <= box.rho3 + 1e-9
        assert abs(z.t) <= box.rho4 + 1e-9
        z = apply_T(z, ops, box, 0.5)


def test_t_tracks_worst_pair_objective():
    ds = binary_instance()
    params, report = solve_rhc(ds, benchmark_config(log_every=0))
    assert report.final_value == pytest.approx(report.evaluation.worst_pair_objective, abs=1e-4)


def test_asymptotic_feasibility_residuals():
    ds = binary_instance()
    ops = DataOperator(ds)
    params, report = solve_rhc(ds, benchmark_config(log_every=0), ops=ops)
    assert report.notes["pair_link_residual"] < 1e-5
    assert report.notes["cone_residual"] < 1e-5


def test_history_and_report_shape():
    ds = binary_instance()
    cfg = benchmark_config(max_iterations=500, log_every=100, stage1_refine=False)
    params, report = solve_rhc(ds, cfg)
    assert report.solver == "rhc"
    assert report.value_label == "t"
    # one entry per logging tick until the run stopped (possibly mid-interval)
    ticks = [e.n for e in report.history]
    assert ticks == [100 * (i + 1) for i in range(len(ticks))]
    assert ticks and ticks[-1] <= report.iterations <= 500
    assert report.wall_time_s > 0


def test_binding_box_warns():
    ds = binary_instance()
    cfg = benchmark_config(rho1=0.3, max_iterations=4000, log_every=0)  # optimum has ||p|| ~ 0.35
    with pytest.warns(UserWarning, match="rho1"):
        solve_rhc(ds, cfg)


def test_rho1_doubling_leaves_solution_unchanged(iris_sep, rhc_sep):
    params, report = rhc_sep
    doubled = benchmark_config(rho1=2.0 * report.notes["rho1"], log_every=0)
    params2, report2 = solve_rhc(iris_sep, doubled)
    base = params.to_vector()
    rel = np.linalg.norm(params2.to_vector() - base) / np.linalg.norm(base)
    assert rel < 1e-4


def test_z0_shape_validation():
    ds = binary_instance()
    bad = ProductPoint(p=np.zeros(3), u=np.zeros((2, 2)), omega=np.zeros((1, 1)), t=0.0)
    with pytest.raises(hv.InputError):
        solve_rhc(ds, HsdmConfig(z0=bad, max_iterations=10))

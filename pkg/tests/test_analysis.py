import numpy as np
import pytest
from scipy.integrate import simpson

from qplatoon.analysis import (
    BoundCheck,
    check_mean_convergence,
    check_uub,
    check_variance,
    compute_variance_bound,
    delta_sweep,
    ensemble_stats,
    steady_rms,
    steady_window,
)
from qplatoon.numerics import expm
from qplatoon.quantizer import QuantizerSpec
from qplatoon.sim import SimConfig, SimTrace, run, run_ensemble
from qplatoon.topology import build_standard
from qplatoon.vehicle import HeadProfile

from conftest import gains_for


def test_variance_bound_scaling():
    g = gains_for("PF", 4)
    assert compute_variance_bound(g, 0.0).bound == 0.0
    b1 = compute_variance_bound(g, 1.0)
    b3 = compute_variance_bound(g, 3.0)
    assert b3.bound == pytest.approx(9 * b1.bound, rel=1e-14)
    assert b1.bound == pytest.approx(0.25 * 5 * b1.trace_W)
    assert b1.residual <= 1e-8 * max(1.0, np.linalg.norm(g.B_eps @ g.B_eps.T))
    np.testing.assert_allclose(b1.W, b1.W.T, atol=1e-12)
    assert np.linalg.eigvalsh(b1.W).min() >= -1e-9


def test_gramian_trace_matches_simpson_quadrature():
    g = gains_for("PF", 2)
    a, q = g.A_eps, g.B_eps @ g.B_eps.T
    h, T = 1e-3, 60.0
    n = int(round(T / h))
    step = expm(a * h)
    e = np.eye(a.shape[0])
    vals = np.empty(n + 1)
    for k in range(n + 1):
        vals[k] = np.trace(e @ q @ e.T)
        e = step @ e
    quad = simpson(vals, dx=h)
    vb = compute_variance_bound(g, 1.0)
    assert vb.trace_W == pytest.approx(quad, rel=1e-4)
    # frozen quadrature value for this case
    assert quad == pytest.approx(11.993410399592758, rel=1e-9)


def _traces(errors):
    """Traces for one follower carrying the given ``(R, T, 3)`` tracking errors."""
    t = np.arange(errors.shape[1]) * 0.1
    z = np.zeros((len(t), 2, 3))
    return [SimTrace(t, z, e[:, None, :], e[:, None, 0], np.zeros((len(t), 1)), z) for e in errors]


def test_ensemble_stats_single_trace_and_zeros():
    rng = np.random.default_rng(0)
    e = rng.normal(size=(1, 20, 3))
    st = ensemble_stats(_traces(e))
    np.testing.assert_array_equal(st.mean_error, e[0])
    np.testing.assert_allclose(st.mean_sq_norm, np.sum(e[0] ** 2, axis=1))
    assert np.all(st.half_width_norm == 0)
    z = ensemble_stats(_traces(np.zeros((4, 20, 3))))
    assert np.all(z.mean_error == 0) and np.all(z.mean_sq_norm == 0)


def test_ensemble_half_width_shrinks_like_inverse_sqrt():
    rng = np.random.default_rng(1)
    small = ensemble_stats(_traces(rng.normal(size=(50, 5, 3))))
    big = ensemble_stats(_traces(rng.normal(size=(800, 5, 3))))
    ratio = small.half_width_norm.mean() / big.half_width_norm.mean()
    assert ratio == pytest.approx(4.0, rel=0.15)


def test_ensemble_stats_rejects_mismatched_grids():
    a = _traces(np.zeros((1, 5, 3)))[0]
    b = _traces(np.zeros((1, 6, 3)))[0]
    with pytest.raises(ValueError):
        ensemble_stats([a, b])
    with pytest.raises(ValueError):
        ensemble_stats([])


def test_steady_window():
    t = np.linspace(0, 60, 6001)
    w = steady_window(t)
    assert t[w][0] == pytest.approx(45.0)
    assert w.sum() == 1501


def test_mean_convergence_and_variance_small_ensemble():
    n = 4
    x0 = np.array([[-20.0 * i, 20.0, 0.0] for i in range(1, n + 1)])
    x0[:, 0] += [1.5, -1.0, 0.5, 2.0]
    cfg = SimConfig(build_standard("BDL", n), gains_for("BDL", n), quantizer=QuantizerSpec("probabilistic", 1.0),
                    head=HeadProfile.constant(), initial_states=x0, duration=40.0, record_every=10)
    traces = run_ensemble(cfg, 60)
    st = ensemble_stats(traces)
    assert check_mean_convergence(st, 40.0).passed
    assert check_variance(st, cfg.gains, 1.0).passed
    # the unforced initial error has long decayed; the mean is a statistical zero
    assert st.mean_error_norm[-1] < st.mean_error_norm[0] / 10


def test_check_uub_and_str():
    cfg = SimConfig(build_standard("PF", 3), gains_for("PF", 3), quantizer=QuantizerSpec("deterministic", 1.0),
                    duration=40.0)
    c = check_uub(run(cfg), cfg.gains, 1.0)
    assert isinstance(c, BoundCheck) and c.passed
    assert "<=" in str(c)
    assert "> bound" in str(BoundCheck("x", 2.0, 1.0, False))


def test_sweep_single_step_has_no_flag():
    cfg = SimConfig(build_standard("BDL", 3), gains_for("BDL", 3), quantizer=QuantizerSpec("deterministic", 1.0),
                    duration=20.0)
    res = delta_sweep(cfg, [0.5])
    assert len(res.rows) == 1 and res.monotone is None
    assert res.rows[0].rms == pytest.approx(steady_rms([run(cfg.with_(quantizer=QuantizerSpec("deterministic", 0.5)))]))


def test_sweep_monotone_deterministic_and_probabilistic_below():
    base = SimConfig(build_standard("BDL", 10), gains_for("BDL", 10), duration=60.0)
    steps = [0.25, 0.5, 0.75, 1.0]
    det = delta_sweep(base.with_(quantizer=QuantizerSpec("deterministic", 1.0)), steps)
    prob = delta_sweep(base.with_(quantizer=QuantizerSpec("probabilistic", 1.0)), steps, replicas=5)
    assert det.monotone and prob.monotone
    assert np.all(prob.column("rms") < det.column("rms"))
    np.testing.assert_array_equal(det.column("step"), steps)
    assert np.all(det.column("rms") <= det.column("bound"))

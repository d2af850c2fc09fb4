"""Grids, steppers, transforms, the Barenblatt oracle, monitors."""

import math

import numpy as np
import pytest

from fde._kernels import newton_step, newton_step_numpy
from fde.evolution import (
    BoundarySpec,
    EvolutionConfig,
    EvolutionError,
    InitialSpec,
    RadialField,
    Trajectory,
    aronson_benilan_monitor,
    barenblatt_oracle,
    build_grid,
    inversion_residual_check,
    inversion_transform,
    ordering_monitor,
    rescale_transform,
    run,
    step_physical,
    step_rescaled,
)
from fde.params import ModelParams, derive_constants

P32 = ModelParams(n=3, m=0.2, beta=-1.0)
C32 = derive_constants(P32)


# -- grid -----------------------------------------------------------------

def test_grid_three_nodes():
    g = build_grid(math.e, 17)
    assert g.r[0] == 1.0 / math.e
    assert g.r[-1] == math.e
    assert g.r[8] == 1.0


def test_grid_spacing():
    g = build_grid(10.0, 201)
    assert g.ds == pytest.approx(2.0 * math.log(10.0) / 200.0, rel=1e-14)


def test_grid_mirror_symmetry():
    # r[i] * r[N-1-i] == 1 to within one rounding of the reciprocal
    for N in (100, 101):
        g = build_grid(math.e ** 3, N)
        assert np.max(np.abs(g.r * g.r[::-1] - 1.0)) <= 4.0 * np.finfo(float).eps


def test_grid_validation():
    with pytest.raises(EvolutionError, match="R > 1"):
        build_grid(0.9, 32)
    with pytest.raises(EvolutionError, match="N >= 16"):
        build_grid(2.0, 8)


# -- Barenblatt oracle ----------------------------------------------------

def test_barenblatt_values():
    n, m = 3, 0.2
    q = n - 2 - n * m
    cstar = 2 * (n - 1) * q / (1 - m)
    T, k = 2.0, 1.5
    # value at r -> 0, t = 0
    v = barenblatt_oracle(1e-12, 0.0, k, T, P32)
    assert v == pytest.approx(T ** (n / q) * (cstar / k) ** (1 / (1 - m)), rel=1e-9)
    # extinction
    assert np.all(barenblatt_oracle(np.array([0.5, 1.0]), 2.0, k, T, P32) == 0.0)
    assert barenblatt_oracle(1.0, 1.999999, k, T, P32) < 1e-3
    with pytest.raises(EvolutionError, match="k > 0"):
        barenblatt_oracle(1.0, 0.0, -1.0, T, P32)


def test_barenblatt_discrete_residual_refines():
    # apply the discrete spatial operator to exact nodal values and compare
    # with the exact time derivative: residual drops ~4x per grid halving
    n, m = 3, 0.2
    k, T, t = 1.0, 1.0, 0.3
    res = []
    for N in (101, 201, 401):
        g = build_grid(math.e, N)
        einv, ap, am = g.coeffs(n)
        u = barenblatt_oracle(g.r, t, k, T, P32)
        um = u ** m
        L = (n - 1) / m * einv[1:-1] * (ap[1:-1] * (um[2:] - um[1:-1])
                                        - am[1:-1] * (um[1:-1] - um[:-2]))
        dt = 1e-7
        ut = (barenblatt_oracle(g.r, t + dt, k, T, P32)
              - barenblatt_oracle(g.r, t - dt, k, T, P32)) / (2 * dt)
        res.append(np.max(np.abs(L - ut[1:-1])))
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.2)
    assert res[1] / res[2] == pytest.approx(4.0, rel=0.2)


# -- kernels --------------------------------------------------------------

def test_numba_and_numpy_kernels_agree():
    g = build_grid(math.e, 101)
    einv, ap, am = g.coeffs(3)
    u = barenblatt_oracle(g.r, 0.0, 1.0, 1.0, P32)
    args = (0.01, u[0] * 0.99, u[-1] * 0.99, 0.2, 10.0, einv, ap, am,
            -2.5, -1.0 / g.ds, 1e-12, 50)
    U1, it1, ok1 = newton_step(u.copy(), *args)
    U2, it2, ok2 = newton_step_numpy(u.copy(), *args)
    assert ok1 and ok2
    np.testing.assert_allclose(U1, U2, rtol=1e-9)


# -- physical stepping ----------------------------------------------------

def test_constant_steady_state():
    # constant data with matching constant boundary: Delta of a constant is 0
    g = build_grid(math.e, 51)
    f = RadialField(u=np.full(51, 3.7), t=0.0, form="physical")
    bc = BoundarySpec(kind="constant", value=3.7)
    out = step_physical(f, 0.01, bc, g, P32)
    np.testing.assert_allclose(out.u, 3.7, rtol=1e-12)
    assert out.t == pytest.approx(0.01)


def test_stationary_U_lambda_one_step(profile_cache):
    # with exact initial and boundary data, one step tracks U_lambda to
    # local truncation accuracy, shrinking with resolution
    prof = profile_cache(3, 0.2)
    errs = []
    for N, dt in ((101, 4e-4), (201, 1e-4)):
        g = build_grid(math.e, N)
        u0 = prof.eval_U_lambda(5.0, g.r, 0.0)
        f = RadialField(u=u0, t=0.0, form="physical")
        bc = BoundarySpec(kind="U_lambda", lam=5.0)
        out = step_physical(f, dt, bc, g, P32, profile=prof)
        exact = prof.eval_U_lambda(5.0, g.r, dt)
        errs.append(np.max(np.abs(out.u - exact)))
    assert errs[0] < 1e-6
    assert errs[1] < errs[0] / 3.0


def test_barenblatt_tracking_refinement():
    # L_inf error at a fixed horizon drops ~4x when ds halves (dt ~ ds^2)
    errs = []
    for N, dt in ((101, 8e-3), (201, 2e-3)):
        g = build_grid(math.e, N)
        cfg = EvolutionConfig(
            grid=g, params=P32, form="physical",
            initial=InitialSpec(kind="barenblatt", k=1.0, T=1.0),
            boundary=BoundarySpec(kind="barenblatt", k=1.0, T=1.0),
            dt=dt, horizon=0.25, snapshot_times=np.array([0.0, 0.25]))
        traj = run(cfg)
        exact = barenblatt_oracle(g.r, traj.times[-1], 1.0, 1.0, P32)
        errs.append(np.max(np.abs(traj.fields[-1] - exact)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.3)


# -- rescaled stepping ----------------------------------------------------

def test_rescaled_steady_profile_drift(profile_cache):
    # f_lambda clamped at both ends is steady for the discrete operator up
    # to truncation; drift per unit time stays below C * ds
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 401)
    f = prof.eval_f_lambda(1.0, g.r)
    cfg = EvolutionConfig(
        grid=g, params=P32, form="rescaled",
        initial=InitialSpec(kind="f_lambda", lam=1.0),
        boundary=BoundarySpec(kind="f_lambda", lam=1.0),
        dt=2e-3, horizon=1.0, snapshot_times=np.array([0.0, 1.0]), profile=prof)
    traj = run(cfg)
    drift = np.max(np.abs(traj.fields[-1] - f) / f)
    assert drift <= g.ds  # second-order advection leaves ample margin


def test_rescaled_degenerate_alpha_beta_rejected():
    with pytest.raises(Exception, match="beta"):
        ModelParams(n=3, m=0.2, beta=0.0)


def test_physical_vs_rescaled_consistency(profile_cache):
    # evolving both forms from the same data and comparing through the
    # exact change of variables agrees within truncation
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 401)
    horizon = 0.2
    cfg_p = EvolutionConfig(
        grid=g, params=P32, form="physical",
        initial=InitialSpec(kind="f_lambda", lam=1.0),
        boundary=BoundarySpec(kind="U_lambda", lam=1.0),
        dt=5e-4, horizon=horizon, snapshot_times=np.array([0.0, horizon]),
        profile=prof)
    traj_p = run(cfg_p)
    cfg_r = EvolutionConfig(
        grid=g, params=P32, form="rescaled",
        initial=InitialSpec(kind="f_lambda", lam=1.0),
        boundary=BoundarySpec(kind="f_lambda", lam=1.0),
        dt=5e-4, horizon=horizon, snapshot_times=np.array([0.0, horizon]),
        profile=prof)
    traj_r = run(cfg_r)
    phys = RadialField(u=traj_p.fields[-1], t=horizon, form="physical")
    resc, mask = rescale_transform(phys, g, C32)
    diff = np.abs(resc.u[mask] - traj_r.fields[-1][mask])
    scale = np.abs(traj_r.fields[-1][mask])
    assert np.max(diff / scale) < 5.0 * g.ds


# -- transforms -----------------------------------------------------------

def test_rescale_transform_identity_at_t0(profile_cache):
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e, 51)
    u = prof.eval_f_lambda(1.0, g.r)
    f = RadialField(u=u, t=0.0, form="physical")
    out, mask = rescale_transform(f, g, C32)
    assert np.all(mask)
    np.testing.assert_allclose(out.u, u, rtol=1e-12)


def test_rescale_transform_exact_U_lambda(profile_cache):
    # applied to exact U_lambda data the transform returns f_lambda
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 201)
    t = 0.5
    u = prof.eval_U_lambda(1.0, g.r, t)
    f = RadialField(u=u, t=t, form="physical")
    out, mask = rescale_transform(f, g, C32)
    fl = prof.eval_f_lambda(1.0, g.r)
    assert mask.sum() < g.N  # some nodes are missing, as documented
    np.testing.assert_allclose(out.u[mask], fl[mask], rtol=1e-6)
    assert np.all(np.isnan(out.u[~mask]))


def test_rescale_round_trip(profile_cache):
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 201)
    u = prof.eval_f_lambda(1.0, g.r)
    f = RadialField(u=u, t=0.35, form="rescaled")
    back, mask1 = rescale_transform(f, g, C32, inverse=True)
    fwd, mask2 = rescale_transform(
        RadialField(u=np.where(np.isnan(back.u), 1.0, back.u), t=0.35,
                    form="physical"), g, C32)
    both = mask1 & mask2 & ~np.isnan(back.u)
    # two pchip resamples: error ~ ds^4 * (log u)'''' per pass
    np.testing.assert_allclose(fwd.u[both], u[both], rtol=1e-5)


def test_inversion_involution(profile_cache):
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 101)
    u = prof.eval_f_lambda(1.0, g.r)
    f = RadialField(u=u, t=0.0, form="physical")
    bar = inversion_transform(f, g, C32, P32)
    double = inversion_transform(bar, g, C32, P32)
    np.testing.assert_allclose(double.u, u, rtol=1e-12)


def test_inversion_maps_U_to_U_bar(profile_cache):
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 101)
    t = 0.3
    u = prof.eval_U_lambda(1.5, g.r, t)
    bar = inversion_transform(RadialField(u=u, t=t, form="physical"), g, C32, P32)
    expect = prof.eval_U_bar_lambda(1.5, g.r, t)
    np.testing.assert_allclose(bar.u, expect, rtol=1e-9)


def test_inversion_rejects_asymmetric_grid():
    g = build_grid(math.e, 33)
    bad = g.__class__(R=g.R, N=g.N, s=g.s, r=g.r + 1e-3, ds=g.ds)
    with pytest.raises(EvolutionError, match="symmetric"):
        inversion_transform(RadialField(u=np.ones(33), t=0.0, form="physical"),
                            bad, C32, P32)


def test_inversion_residual_refines():
    res = []
    for N, dt in ((101, 4e-3), (201, 1e-3)):
        g = build_grid(math.e, N)
        cfg = EvolutionConfig(
            grid=g, params=P32, form="physical",
            initial=InitialSpec(kind="barenblatt", k=1.0, T=1.0),
            boundary=BoundarySpec(kind="barenblatt", k=1.0, T=1.0),
            dt=dt, horizon=0.1, snapshot_times=np.linspace(0.0, 0.1, 6))
        traj = run(cfg)
        res.append(inversion_residual_check(traj, g, C32, P32)["max_scaled_residual"])
    assert res[1] < res[0]


# -- run loop and monitors --------------------------------------------------

def test_run_snapshots_and_monitors_exact_solution(profile_cache):
    # u0 = f_lambda, boundary U_lambda: exact solution; both monitors pass
    # with tiny slack and the snapshot clock is strictly increasing
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e, 201)
    cfg = EvolutionConfig(
        grid=g, params=P32, form="physical",
        initial=InitialSpec(kind="f_lambda", lam=5.0),
        boundary=BoundarySpec(kind="U_lambda", lam=5.0),
        dt=1e-4, horizon=0.02, snapshot_times=np.linspace(0.0, 0.02, 5),
        profile=prof, monitors=True, lam1=5.0, lam2=5.0)
    traj = run(cfg)
    assert np.all(np.diff(traj.times) > 0)
    ab = aronson_benilan_monitor(traj)
    om = ordering_monitor(traj)
    assert ab["ok"] and ab["max_excess"] <= 1e-8
    assert om["ok"]
    # degenerate band lam1 = lam2: both gaps are the solver deviation
    assert om["gap_lo_min"] >= -1e-6 and om["gap_hi_min"] >= -1e-6


def test_blend_run_ordering(profile_cache):
    # midpoint blend initial data stays inside the U band for the whole run
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 201)
    cfg = EvolutionConfig(
        grid=g, params=P32, form="physical",
        initial=InitialSpec(kind="blend", lam1=2.0, lam2=1.0, theta=0.5),
        boundary=BoundarySpec(kind="U_lambda", lam=2.0),
        dt=1e-3, horizon=0.3, snapshot_times=np.array([0.0, 0.3]),
        profile=prof, monitors=True, lam1=2.0, lam2=1.0)
    traj = run(cfg)
    om = ordering_monitor(traj)
    assert om["ok"], om
    ab = aronson_benilan_monitor(traj)
    assert ab["ok"], ab


def test_discrete_comparison_principle(profile_cache):
    # ordered initial data with identical boundary stays ordered node-wise
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e ** 2, 201)
    bc = BoundarySpec(kind="U_lambda", lam=2.0)
    runs = []
    for init in (InitialSpec(kind="f_lambda", lam=2.0),
                 InitialSpec(kind="blend", lam1=2.0, lam2=1.0, theta=0.5),
                 InitialSpec(kind="f_lambda", lam=1.0)):
        cfg = EvolutionConfig(grid=g, params=P32, form="physical", initial=init,
                              boundary=bc, dt=1e-3, horizon=0.2,
                              snapshot_times=np.linspace(0.0, 0.2, 5), profile=prof)
        runs.append(run(cfg))
    for k in range(5):
        assert np.all(runs[0].fields[k] <= runs[1].fields[k] + 1e-9)
        assert np.all(runs[1].fields[k] <= runs[2].fields[k] + 1e-9)


def test_positivity_preserved():
    # Barenblatt close to extinction stresses positivity; every accepted
    # step must stay positive
    g = build_grid(math.e, 51)
    cfg = EvolutionConfig(
        grid=g, params=P32, form="physical",
        initial=InitialSpec(kind="barenblatt", k=1.0, T=0.3),
        boundary=BoundarySpec(kind="barenblatt", k=1.0, T=0.3),
        dt=5e-3, horizon=0.28, snapshot_times=np.array([0.0, 0.28]))
    traj = run(cfg)
    assert np.all(traj.fields[-1] > 0.0)


def test_config_validation(profile_cache):
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e, 51)
    with pytest.raises(EvolutionError, match="form"):
        EvolutionConfig(grid=g, params=P32, form="both",
                        initial=InitialSpec(kind="constant", value=1.0),
                        boundary=BoundarySpec(kind="constant", value=1.0),
                        dt=0.1, horizon=1.0, snapshot_times=np.array([0.0, 1.0]))
    with pytest.raises(EvolutionError, match="snapshot"):
        EvolutionConfig(grid=g, params=P32, form="physical",
                        initial=InitialSpec(kind="constant", value=1.0),
                        boundary=BoundarySpec(kind="constant", value=1.0),
                        dt=0.1, horizon=1.0, snapshot_times=np.array([0.5, 1.0]))
    cfg = EvolutionConfig(grid=g, params=P32, form="physical",
                          initial=InitialSpec(kind="f_lambda", lam=5.0),
                          boundary=BoundarySpec(kind="U_lambda", lam=5.0),
                          dt=0.1, horizon=1.0, snapshot_times=np.array([0.0, 1.0]),
                          profile=prof, monitors=True)
    with pytest.raises(EvolutionError, match="lam1"):
        run(cfg)
    # initial data outside the ordering band
    cfg2 = EvolutionConfig(grid=g, params=P32, form="physical",
                           initial=InitialSpec(kind="f_lambda", lam=0.5),
                           boundary=BoundarySpec(kind="U_lambda", lam=2.0),
                           dt=0.1, horizon=1.0, snapshot_times=np.array([0.0, 1.0]),
                           profile=prof, monitors=True, lam1=2.0, lam2=1.0)
    with pytest.raises(EvolutionError, match="ordering band"):
        run(cfg2)


def test_field_validation():
    with pytest.raises(EvolutionError, match="positive"):
        RadialField(u=np.array([1.0, -2.0, 1.0]), t=0.0, form="physical")
    with pytest.raises(EvolutionError, match="finite"):
        RadialField(u=np.full(3, np.nan), t=0.0, form="physical")


def test_table_initial_data(profile_cache):
    # a user table is pchip-resampled onto the grid in log-log coordinates
    prof = profile_cache(3, 0.2)
    g = build_grid(math.e, 101)
    r_tab = np.geomspace(1.0 / math.e, math.e, 401)
    u_tab = prof.eval_f_lambda(1.0, r_tab)
    init = InitialSpec(kind="table", table_r=r_tab, table_u=u_tab)
    u0 = init.values(g, None, P32)
    np.testing.assert_allclose(u0, prof.eval_f_lambda(1.0, g.r), rtol=1e-8)


def test_numpy_fallback_env_flag(tmp_path):
    # FDE_NUMBA=0 selects the numpy kernel at import; results match numba's
    import subprocess
    import sys

    script = (
        "import os, numpy as np\n"
        "import fde._kernels as K\n"
        "from fde.evolution import build_grid, barenblatt_oracle\n"
        "from fde.params import ModelParams\n"
        "p = ModelParams(n=3, m=0.2, beta=-1.0)\n"
        "g = build_grid(np.e, 51)\n"
        "einv, ap, am = g.coeffs(3)\n"
        "u = barenblatt_oracle(g.r, 0.0, 1.0, 1.0, p)\n"
        "U, it, ok = K.newton_step(u, 1e-3, u[0], u[-1], 0.2, 10.0, einv, ap, am,"
        " 0.0, 0.0, 1e-12, 50)\n"
        "assert ok\n"
        "print(K.USING_NUMBA, repr(float(U[25])))\n"
    )
    import os

    env = dict(os.environ)
    env["FDE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", script], env=env,
                         capture_output=True, text=True, check=True)
    flag, val = out.stdout.split()
    assert flag == "False"
    env["FDE_NUMBA"] = "1"
    out2 = subprocess.run([sys.executable, "-c", script], env=env,
                          capture_output=True, text=True, check=True)
    flag2, val2 = out2.stdout.split()
    assert flag2 == "True"
    assert float(val) == pytest.approx(float(val2), rel=1e-12)

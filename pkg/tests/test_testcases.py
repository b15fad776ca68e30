import numpy as np
import pytest

from helpers import make_worker
from hexdg.basis import LGL, build_basis
from hexdg.config import RunConfig
from hexdg.equations import CONST_VISCOSITY, GasProperties
from hexdg.mesh import compute_metrics, generate_box_mesh
from hexdg.operator import Domain
from hexdg.parallel import NumericalFailure, run_distributed
from hexdg.testcases import (ManufacturedSolution, TGVSetup, analysis_partials,
                             analyze_tgv, freestream_init, mms_source,
                             reduce_tgv_quantities, sod_init, tgv_init)

GAS = GasProperties(gamma=1.4, R=287.058)

# 8th-order central difference stencil
_FD = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105,
                -1 / 280])


def fd(f, h=5e-3):
    return sum(c * f(i * h) for i, c in zip(range(-4, 5), _FD)) / h


def nse_flux(mms, gas, x, y, z, t, d, h):
    """Flux column d of the NSE at a point, gradients by finite differences."""
    def prim(U):
        rho = U[0]
        vel = U[1:4] / rho
        p = (gas.gamma - 1.0) * (U[4] - 0.5 * rho * np.sum(vel ** 2))
        return rho, vel, p, p / (rho * gas.R)

    U = mms.state(np.array([x, y, z]), t)
    rho, vel, p, T = prim(U)
    pt = [x, y, z]

    def grad_of(component):
        g = np.zeros(3)
        for ax in range(3):
            def f(s):
                q = pt.copy()
                q[ax] += s
                return component(*prim(mms.state(np.array(q), t)))
            g[ax] = fd(f, h)
        return g

    gu = grad_of(lambda rho, v, p, T: v[0])
    gv = grad_of(lambda rho, v, p, T: v[1])
    gw = grad_of(lambda rho, v, p, T: v[2])
    gT = grad_of(lambda rho, v, p, T: T)
    G = [gu, gv, gw]
    divu = gu[0] + gv[1] + gw[2]
    mu = gas.mu_ref
    lam = gas.gamma * gas.R / (gas.gamma - 1.0) * mu / gas.Pr
    tau = np.array([[mu * (G[i][j] + G[j][i] - (2 / 3 * divu if i == j else 0))
                     for j in range(3)] for i in range(3)])
    q = -lam * gT
    F = np.zeros(5)
    F[0] = rho * vel[d]
    for i in range(3):
        F[1 + i] = rho * vel[i] * vel[d] + (p if i == d else 0.0) - tau[i, d]
    F[4] = vel[d] * (U[4] + p) - np.dot(tau[d], vel) + q[d]
    return F


@pytest.mark.parametrize("mu", [0.0, 0.03])
def test_mms_fd_residual_oracle(mu):
    # the embedded closed-form sources satisfy the NSE to the FD accuracy
    gas = GasProperties(gamma=1.4, R=287.058, Pr=0.71, mu_ref=mu,
                        viscosity_law=CONST_VISCOSITY)
    mms = ManufacturedSolution(amplitude=0.1, speed=1.0)
    rng = np.random.default_rng(0)
    h = 5e-3
    for _ in range(4):
        x, y, z, t = rng.uniform(0.0, 1.0, 4)
        dUdt = np.array([fd(lambda s, v=v: mms.state(
            np.array([x, y, z]), t + s)[v], h) for v in range(5)])
        divF = np.zeros(5)
        for d, (dx, dy, dz) in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))):
            divF += np.array([fd(lambda s, v=v: nse_flux(
                mms, gas, x + s * dx, y + s * dy, z + s * dz, t, d, h)[v], h)
                for v in range(5)])
        S = mms_source(np.array([x, y, z]), t, gas, mms)
        assert np.max(np.abs(dUdt + divF - S)) < 1e-8


def test_mms_amplitude_zero_source_vanishes():
    gas = GasProperties(gamma=1.4, R=1.0)
    S = mms_source(np.array([[0.3, 0.1, 0.7]]), 0.4, gas,
                   ManufacturedSolution(amplitude=0.0))
    assert np.max(np.abs(S)) == 0.0
    U = ManufacturedSolution(amplitude=0.0).state(np.zeros((2, 3)), 1.0)
    assert np.allclose(U, [2.0, 2.0, 2.0, 2.0, 4.0])


def test_mms_state_is_admissible():
    mms = ManufacturedSolution()
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, (100, 3))
    U = mms.state(x, 0.3)
    rho = U[..., 0]
    p = 0.4 * (U[..., 4] - 0.5 * np.sum(U[..., 1:4] ** 2, axis=-1) / rho)
    assert np.all(rho > 0) and np.all(p > 0)


# ---------------------------------------------------------------------------
# Taylor-Green vortex


def tgv_domain(setup, N=5, m=4, gas=GAS):
    b = build_basis(N, LGL)
    mesh = generate_box_mesh(m, m, m, setup.domain, (True,) * 3)
    compute_metrics(mesh, b)
    d = Domain(mesh, b, gas)
    d.U[...] = tgv_init(setup, mesh.x, gas)
    return d


def test_tgv_velocity_zero_at_origin_and_w_zero():
    setup = TGVSetup(mach=0.1, reynolds=1600.0, version=1)
    d = tgv_domain(setup)
    origin = d.U[0, 0, 0, 0]
    x0 = d.x[0, 0, 0, 0]
    assert np.allclose(x0, 0.0, atol=1e-14)
    assert abs(origin[1]) < 1e-14 and abs(origin[2]) < 1e-14
    assert np.max(np.abs(d.U[..., 3])) == 0.0  # w identically zero


def test_tgv_version1_kinetic_energy():
    setup = TGVSetup(mach=0.1, reynolds=1600.0, version=1)
    d = tgv_domain(setup)
    parts = analysis_partials(d, setup.mu0())
    q = reduce_tgv_quantities(parts, setup)
    assert abs(q["E_k"] - 0.125) < 1e-10


def test_tgv_pressure_mean_is_background():
    setup = TGVSetup(mach=0.1, reynolds=1600.0, version=1)
    gas = GAS
    d = tgv_domain(setup, N=4, m=4)
    rho = d.U[..., 0]
    kin = 0.5 * np.sum(d.U[..., 1:4] ** 2, axis=-1) / rho
    p = (gas.gamma - 1.0) * (d.U[..., 4] - kin)
    w = d.basis.weights
    dv = d.J * w[None, None, None, :] * w[None, None, :, None] * w[None, :, None, None]
    mean = np.sum((p - setup.p0(gas)) * dv) / np.sum(dv)
    assert abs(mean) < 1e-12


def test_tgv_version2_constant_temperature():
    setup = TGVSetup(mach=0.1, reynolds=1600.0, version=2)
    gas = GAS
    d = tgv_domain(setup)
    rho = d.U[..., 0]
    kin = 0.5 * np.sum(d.U[..., 1:4] ** 2, axis=-1) / rho
    p = (gas.gamma - 1.0) * (d.U[..., 4] - kin)
    T = p / (rho * gas.R)
    assert np.max(np.abs(T - setup.T0(gas))) < 1e-12 * setup.T0(gas)


def test_zero_velocity_analysis_is_zero():
    setup = TGVSetup(mach=0.1, reynolds=1600.0)
    gas = GasProperties(gamma=1.4, R=287.058, mu_ref=setup.mu0())
    d = tgv_domain(setup, gas=gas)
    d.U[..., 1:4] = 0.0
    Ek, eS, eD = analyze_tgv(d.U, d.g, d.mesh, gas, setup)
    assert Ek == 0.0 and eS == 0.0 and eD == 0.0


def test_tgv_initial_field_nearly_divergence_free():
    # dilatational dissipation at t=0 is only the divergence quadrature error
    cfg = RunConfig(testcase="tgv", n=7, meshx=4, meshy=4, meshz=4,
                    x0=0.0, x1=2 * np.pi, y0=0.0, y1=2 * np.pi,
                    z0=0.0, z1=2 * np.pi, mach=0.1, reynolds=1600.0,
                    muref=1.0 / 1600.0, tgvversion=2,
                    operator="split", nodetype="LGL", tend=1e9, maxsteps=1,
                    analyzeinterval=0)
    res = run_distributed(cfg)
    row = res.series[0]
    assert row["eps_D"] < 1e-4 * row["eps_S"]


# ---------------------------------------------------------------------------
# Sod tube


def test_sod_init_states():
    gas = GasProperties(gamma=1.4, R=1.0)
    x = np.array([[0.25, 0.5, 0.5], [0.75, 0.5, 0.5]])
    U, bc = sod_init(x, gas, interface=0.5)
    assert np.allclose(U[0], [1.0, 0.0, 0.0, 0.0, 2.5])
    assert np.allclose(U[1], [0.125, 0.0, 0.0, 0.0, 0.25])
    assert np.allclose(bc[1], [1.0, 0.0, 0.0, 0.0, 2.5])
    assert np.allclose(bc[2], [0.125, 0.0, 0.0, 0.0, 0.25])


def sod_cfg(**kw):
    base = dict(testcase="sod", n=3, nodetype="LGL", operator="split",
                shockcapture=True, meshx=16, meshy=1, meshz=1,
                x0=0.0, x1=1.0, y0=0.0, y1=0.0625, z0=0.0, z1=0.0625,
                periodicx=False, rgas=1.0, tend=0.1, analyzeinterval=0)
    base.update(kw)
    return RunConfig(**base)


def test_sod_mirror_symmetry():
    # mirror the tube: x -> 1 - x with u -> -u; solutions must mirror
    cfg = sod_cfg(maxsteps=20, tend=1e9)
    res = run_distributed(cfg)

    w = make_worker(sod_cfg(maxsteps=20, tend=1e9))
    d = w.domain
    xm = d.x.copy()
    xm[..., 0] = 1.0 - xm[..., 0]
    Um, _ = sod_init(xm, cfg.gas(), 0.5)
    Um[..., 1] *= -1.0
    d.U[...] = Um
    d.bc_states[1], d.bc_states[2] = d.bc_states[2].copy(), d.bc_states[1].copy()
    w.run()
    assert w.error is None

    mesh = w.domain.mesh
    order = np.argsort(mesh.grid_index[:, 0])
    morder = np.argsort(mesh.grid_index[:, 0])[::-1]
    a = res.U[order][:, :, :, ::-1, :]
    b = w.domain.U[morder]
    assert np.max(np.abs(a[..., 0] - b[..., 0])) < 1e-12
    assert np.max(np.abs(a[..., 1] + b[..., 1])) < 1e-12
    assert np.max(np.abs(a[..., 4] - b[..., 4])) < 1e-12


def test_sod_without_capturing_goes_unstable():
    cfg = sod_cfg(n=7, meshx=8, shockcapture=False, tend=0.2)
    with pytest.raises(NumericalFailure):
        run_distributed(cfg)


# ---------------------------------------------------------------------------
# free stream


def test_freestream_init_constant():
    U = freestream_init(np.zeros((4, 3)), GAS)
    assert np.all(U == U[0])

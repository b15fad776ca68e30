import numpy as np
import pytest

from riemann_oracle import sod_density_profile, star_state
from hexdg.basis import LGL, build_basis
from hexdg.equations import GasProperties, RIEMANN_LLF
from hexdg.mesh import compute_metrics, curve_mesh, generate_box_mesh
from hexdg.operator import Domain
from hexdg.shock import (ShockConfig, blend, fv_subcell_operator,
                         indicator_alpha, modal_threshold,
                         subcell_interface_metrics)
from hexdg.testcases import TGVSetup, tgv_init

GAS = GasProperties(gamma=1.4, R=1.0)


def lgl_domain(mesh_n=2, N=3, curved=0.0, periodic=(True, True, True),
               gas=GAS, extents=None):
    b = build_basis(N, LGL)
    mesh = generate_box_mesh(mesh_n, mesh_n, mesh_n,
                             extents or [(-1.0, 1.0)] * 3, periodic)
    if curved:
        mesh = curve_mesh(mesh, curved)
    compute_metrics(mesh, b)
    return Domain(mesh, b, gas)


def constant_state(domain, rho=1.0, p=1.0):
    domain.U[..., 0] = rho
    domain.U[..., 1:4] = 0.0
    domain.U[..., 4] = p / (GAS.gamma - 1.0)


def test_indicator_constant_element_is_zero():
    d = lgl_domain()
    constant_state(d)
    cfg = ShockConfig(enabled=True)
    assert indicator_alpha(d.U[0], d.basis, cfg) == 0.0


def test_indicator_high_mode_clamps_to_alpha_max():
    from hexdg.basis import legendre

    d = lgl_domain(N=5)
    b = d.basis
    # a fifth of the rho*p modal energy in the highest mode: far above threshold
    pn, _ = legendre(b.N, b.nodes)
    rho = 2.0 + 1.0 * pn[None, None, :] * np.ones((6, 6, 6))
    U = np.zeros((6, 6, 6, 5))
    U[..., 0] = rho
    U[..., 4] = 1.0 / (GAS.gamma - 1.0)
    cfg = ShockConfig(enabled=True, alpha_max=0.5)
    assert indicator_alpha(U, b, cfg) == 0.5


def test_indicator_zero_on_resolved_tgv_field():
    # smooth resolved vortex at N = 7, 8^3 elements: alpha = 0 almost everywhere
    setup = TGVSetup(mach=0.1, reynolds=1600.0, version=2)
    gas = GasProperties(gamma=1.4, R=287.058)
    b = build_basis(7, LGL)
    mesh = generate_box_mesh(8, 8, 8, setup.domain, (True,) * 3)
    compute_metrics(mesh, b)
    d = Domain(mesh, b, gas)
    d.U[...] = tgv_init(setup, mesh.x, gas)
    cfg = ShockConfig(enabled=True)
    alphas = np.array([indicator_alpha(d.U[e], b, cfg, gas.gamma)
                       for e in range(mesh.nelem)])
    assert np.mean(alphas == 0.0) >= 0.99


def test_threshold_decreases_with_degree():
    ts = [modal_threshold(N) for N in range(1, 10)]
    assert all(t1 > t2 for t1, t2 in zip(ts, ts[1:]))


@pytest.mark.parametrize("curved", [0.0, 0.1])
def test_fv_residual_zero_for_constant_state(curved):
    d = lgl_domain(curved=curved)
    constant_state(d)
    d.cons_to_prim()
    d.prolong(mpi=False)
    d.prolong(mpi=True)
    d.fill_flux(d.sides_inner, RIEMANN_LLF)
    fvm = subcell_interface_metrics(d)
    for e in range(d.ne):
        R = fv_subcell_operator(d, e, fvm=fvm)
        assert np.max(np.abs(R)) < 1e-13


def test_fv_conservation_telescopes_to_outer_flux():
    # width-weighted element sum of the FV residual equals the net DG
    # surface flux of that element (interior interfaces cancel pairwise)
    d = lgl_domain(curved=0.05)
    rng = np.random.default_rng(1)
    constant_state(d, rho=1.0, p=1.0)
    d.U[..., 0] += 0.2 * rng.random(d.U.shape[:-1])
    d.U[..., 4] += 0.3 * rng.random(d.U.shape[:-1])
    d.cons_to_prim()
    d.prolong(mpi=False)
    d.prolong(mpi=True)
    d.fill_flux(d.sides_inner, RIEMANN_LLF)
    fvm = subcell_interface_metrics(d)
    w = d.basis.weights
    wvol = w[None, None, :] * w[None, :, None] * w[:, None, None]
    for e in range(d.ne):
        R = fv_subcell_operator(d, e, fvm=fvm)
        total = np.einsum("kji,kjiv->v", wvol, R * d.J[e][..., None])
        # net outer flux: quadrature-weighted, outward-signed
        net = np.zeros(5)
        for loc in range(6):
            s = d.ef_side[e, loc]
            sign = d.ef_sign[e, loc]
            code = d.ef_orient[e, loc]
            from hexdg.operator import _orient
            N = d.N
            for a in range(N + 1):
                for bq in range(N + 1):
                    p, q = _orient(code, a, bq, N)
                    net += sign * w[a] * w[bq] * d.fstar[s, q, p]
        assert np.max(np.abs(total + net)) < 1e-12 * max(1.0, np.max(np.abs(net)))


def test_fv_sod_profile_matches_1d_oracle():
    # one element with Sod data along x: interior interfaces match a
    # standalone first-order FV update on the same nonuniform grid
    gas = GAS
    d = lgl_domain(mesh_n=1, N=7, periodic=(False, True, True),
                   extents=[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)])
    x = d.x[0, 0, 0, :, 0]
    n1 = d.n1
    rho = np.where(x < 0.5, 1.0, 0.125)
    p = np.where(x < 0.5, 1.0, 0.1)
    d.U[...] = 0.0
    d.U[..., 0] = rho[None, None, None, :]
    d.U[..., 4] = p[None, None, None, :] / 0.4
    d.bc_states[1] = [1.0, 0.0, 0.0, 0.0, 2.5]
    d.bc_states[2] = [0.125, 0.0, 0.0, 0.0, 0.25]
    d.cons_to_prim()
    d.prolong(mpi=False)
    d.prolong(mpi=True)
    d.fill_flux(d.sides_inner, RIEMANN_LLF)
    R = fv_subcell_operator(d, 0)

    # independent 1-D scalar FV oracle on physical subcell widths w_i / 2
    from test_equations import scalar_llf_oracle
    h = 0.5 * d.basis.weights  # physical widths, element length 1
    states = [(rho[i], 0.0, p[i]) for i in range(n1)]
    F = np.zeros((n1 + 1, 3))
    F[0] = scalar_llf_oracle(states[0], states[0], 1.4)
    F[-1] = scalar_llf_oracle(states[-1], states[-1], 1.4)
    for i in range(1, n1):
        F[i] = scalar_llf_oracle(states[i - 1], states[i], 1.4)
    R1d = -(F[1:] - F[:-1]) / h[:, None]
    for i in range(n1):
        got = R[0, 0, i][[0, 1, 4]]
        assert np.max(np.abs(got - R1d[i])) < 1e-12 * max(1.0, np.max(np.abs(R1d)))


def test_blend_endpoints_and_mean():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4, 4, 5))
    b = rng.standard_normal((4, 4, 4, 5))
    assert np.array_equal(blend(a, b, 0.0), a)
    assert np.array_equal(blend(a, b, 1.0), b)
    assert np.allclose(blend(a, b, 0.5), 0.5 * (a + b))
    with pytest.raises(ValueError):
        blend(a, b, 1.5)
    with pytest.raises(ValueError):
        blend(a, b[:2], 0.5)


def test_exact_riemann_oracle_sanity():
    # Sod star state from the literature: p* ~ 0.30313, u* ~ 0.92745
    ps, us = star_state((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
    assert abs(ps - 0.30313) < 2e-5
    assert abs(us - 0.92745) < 2e-5
    # density profile limits
    x = np.array([0.05, 0.95])
    rho = sod_density_profile(x, 0.2)
    assert abs(rho[0] - 1.0) < 1e-12
    assert abs(rho[1] - 0.125) < 1e-12

"""Shared test utilities: single-rank harness and reference implementations."""

import numpy as np

from hexdg import testcases
from hexdg.basis import build_basis
from hexdg.config import RunConfig
from hexdg.mesh import (compute_metrics, curve_mesh, generate_box_mesh,
                        partition_sfc, permute_element_axes, side_mapping)
from hexdg.parallel import RankWorker, SlotLimiter, Transport


def make_worker(cfg: RunConfig, mesh=None):
    """Single-rank worker on the configured (or given) mesh."""
    basis = build_basis(cfg.n, cfg.nodetype)
    if mesh is None:
        mesh = generate_box_mesh(
            cfg.meshx, cfg.meshy, cfg.meshz,
            [(cfg.x0, cfg.x1), (cfg.y0, cfg.y1), (cfg.z0, cfg.z1)],
            (cfg.periodicx, cfg.periodicy, cfg.periodicz))
        if cfg.curveamplitude:
            mesh = curve_mesh(mesh, cfg.curveamplitude)
    compute_metrics(mesh, basis)
    parts = partition_sfc(mesh, 1)
    return RankWorker(0, mesh, basis, cfg.gas(), parts[0],
                      np.zeros(mesh.nelem, dtype=np.int64), cfg, Transport(1),
                      SlotLimiter(1), testcases.build_case(cfg))


def all_orientation_mesh():
    """3^3 periodic box with one element reoriented: carries codes 0..3."""
    mesh = generate_box_mesh(3, 3, 3, [(-1.0, 1.0)] * 3, (True,) * 3)
    return permute_element_axes(mesh, 13, "flip_xy")


def surf_int_scatter_reference(domain, fstar):
    """Side-loop (scatter) formulation of the surface integral.

    Independent reference for the gather kernel: iterates sides, maps each
    face node through side_mapping and scatters the flux along the full
    volume line, flipping the sign on the replica element.
    """
    b = domain.basis
    N = b.N
    mesh = domain.mesh
    Ut = np.zeros_like(domain.Ut)
    for sl, sg in enumerate(domain.side_global):
        roles = [(mesh.side_elem_p[sg], mesh.side_loc_p[sg], +1.0, 0)]
        if mesh.side_elem_r[sg] >= 0:
            roles.append((mesh.side_elem_r[sg], mesh.side_loc_r[sg], -1.0,
                          mesh.side_orient[sg]))
        for elem, loc, sign, code in roles:
            el = elem - domain.lo
            if not 0 <= el < domain.ne:
                continue
            for p in range(N + 1):
                for q in range(N + 1):
                    line, d, plus = side_mapping(loc, code, p, q, N)
                    lh = b.lhat_plus if plus else b.lhat_minus
                    for m in range(N + 1):
                        i, j, k = line[m]
                        Ut[el, k, j, i] += sign * lh[line[m][d]] * fstar[sl, q, p]
    return Ut

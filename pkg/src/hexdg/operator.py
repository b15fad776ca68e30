"""The semi-discrete DG operator: kernels and per-rank domain data.

The solution layout is variable-fastest, node-lexicographic (i fastest),
element-major: arrays of shape (nelem, N+1, N+1, N+1, 5) indexed
[e, k, j, i, var]. Face storage is [side, q, p, var] in the primary
element's face coordinates; replica elements translate their tangential
indices through the side's orientation code.

All hot loops are numba kernels with fixed iteration order, so results are
independent of how elements are distributed across ranks.
"""

import numpy as np
from numba import njit, prange

from . import equations as eq
from .basis import Basis1D
from .mesh import Mesh
from .equations import N_LIFT

NVAR = 5
NPRIM = 7  # rho, u, v, w, p, T, specific total enthalpy


class OperatorError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# index helpers shared by the kernels


@njit(cache=True)
def _vol_index(loc, a, b, n):
    """Volume (i, j, k) of face-tangential point (a, b) at normal index n."""
    d = loc // 2
    if d == 0:
        return n, a, b
    if d == 1:
        return b, n, a
    return a, b, n


@njit(cache=True)
def _orient(code, a, b, N):
    if code == 1:
        return N - a, b
    if code == 2:
        return a, N - b
    if code == 3:
        return N - a, N - b
    return a, b


@njit(cache=True)
def _prim_point(U, o, gamma, R):
    rho = U[0]
    ir = 1.0 / rho
    u = U[1] * ir
    v = U[2] * ir
    w = U[3] * ir
    p = (gamma - 1.0) * (U[4] - 0.5 * rho * (u * u + v * v + w * w))
    o[0] = rho
    o[1] = u
    o[2] = v
    o[3] = w
    o[4] = p
    o[5] = p * ir / R
    o[6] = (U[4] + p) * ir


# ---------------------------------------------------------------------------
# pointwise kernels


@njit(cache=True, parallel=True)
def k_cons_to_prim(U, prim, gamma, R):
    """Primitive variables for every DOF; returns (min rho, min p)."""
    n = U.shape[0]
    min_rho = 1e300
    min_p = 1e300
    for i in prange(n):
        _prim_point(U[i], prim[i], gamma, R)
        min_rho = min(min_rho, prim[i, 0])
        min_p = min(min_p, prim[i, 4])
    return min_rho, min_p


@njit(cache=True, parallel=True)
def k_viscous_contravariant(prim, g, Ja, Fvis, gamma, R, Pr, mu_ref, T_ref, law):
    """Contravariant viscous fluxes Ja^a . Fv at every node; flat over DOFs."""
    n = prim.shape[0]
    for i in prange(n):
        mu = eq.pt_viscosity(prim[i, 5], mu_ref, T_ref, law)
        lam = eq.pt_conductivity(mu, gamma, R, Pr)
        for a in range(3):
            eq.pt_viscous_flux_dir(
                prim[i, 1], prim[i, 2], prim[i, 3], mu, lam,
                g[i, 0, 0], g[i, 0, 1], g[i, 0, 2], g[i, 0, 3],
                g[i, 1, 0], g[i, 1, 1], g[i, 1, 2], g[i, 1, 3],
                g[i, 2, 0], g[i, 2, 1], g[i, 2, 2], g[i, 2, 3],
                Ja[i, a, 0], Ja[i, a, 1], Ja[i, a, 2], Fvis[i, a])


# ---------------------------------------------------------------------------
# volume integrals


@njit(cache=True, parallel=True)
def k_vol_int_standard(U, prim, Ja, Fvis, Dhat, Ut, viscous):
    """Weak-form volume integral with nodal contravariant fluxes."""
    ne, n1 = U.shape[0], U.shape[1]
    for e in prange(ne):
        f = np.empty(NVAR)
        F = np.empty((n1, n1, n1, 3, NVAR))
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    for a in range(3):
                        eq.pt_euler_flux_dir(
                            prim[e, k, j, i, 0], prim[e, k, j, i, 1],
                            prim[e, k, j, i, 2], prim[e, k, j, i, 3],
                            prim[e, k, j, i, 4], U[e, k, j, i, 4],
                            Ja[e, a, k, j, i, 0], Ja[e, a, k, j, i, 1],
                            Ja[e, a, k, j, i, 2], f)
                        for v in range(NVAR):
                            F[k, j, i, a, v] = f[v]
                            if viscous:
                                F[k, j, i, a, v] += Fvis[e, k, j, i, a, v]
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    for v in range(NVAR):
                        acc = 0.0
                        for al in range(n1):
                            acc += Dhat[i, al] * F[k, j, al, 0, v] \
                                + Dhat[j, al] * F[k, al, i, 1, v] \
                                + Dhat[k, al] * F[al, j, i, 2, v]
                        Ut[e, k, j, i, v] += acc


@njit(cache=True, parallel=True)
def k_vol_int_split(prim, Ja, Fvis, Dsplit, Ut, viscous):
    """Two-point split-form volume integral (LGL collocation).

    Works line by line: each line's primitives, metric vectors and viscous
    fluxes are copied into contiguous buffers, the symmetric pair loop
    accumulates into a local line buffer, and the result is added to Ut once.
    """
    ne, n1 = prim.shape[0], prim.shape[1]
    for e in prange(ne):
        fs = np.empty(NVAR)
        line = np.empty((n1, 6))
        met = np.empty((n1, 3))
        fv = np.empty((n1, NVAR))
        acc = np.empty((n1, NVAR))
        for d in range(3):
            for c2 in range(n1):
                for c1 in range(n1):
                    for m in range(n1):
                        if d == 0:
                            k, j, i = c2, c1, m
                        elif d == 1:
                            k, j, i = c2, m, c1
                        else:
                            k, j, i = m, c1, c2
                        line[m, 0] = prim[e, k, j, i, 0]
                        line[m, 1] = prim[e, k, j, i, 1]
                        line[m, 2] = prim[e, k, j, i, 2]
                        line[m, 3] = prim[e, k, j, i, 3]
                        line[m, 4] = prim[e, k, j, i, 4]
                        line[m, 5] = prim[e, k, j, i, 6]
                        met[m, 0] = Ja[e, d, k, j, i, 0]
                        met[m, 1] = Ja[e, d, k, j, i, 1]
                        met[m, 2] = Ja[e, d, k, j, i, 2]
                        if viscous:
                            for v in range(NVAR):
                                fv[m, v] = Fvis[e, k, j, i, d, v]
                        for v in range(NVAR):
                            acc[m, v] = 0.0
                    for m in range(n1):
                        for al in range(m, n1):
                            eq.pt_split_flux_kep(
                                line[m, 0], line[m, 1], line[m, 2],
                                line[m, 3], line[m, 4], line[m, 5],
                                line[al, 0], line[al, 1], line[al, 2],
                                line[al, 3], line[al, 4], line[al, 5],
                                0.5 * (met[m, 0] + met[al, 0]),
                                0.5 * (met[m, 1] + met[al, 1]),
                                0.5 * (met[m, 2] + met[al, 2]), fs)
                            if viscous:
                                for v in range(NVAR):
                                    fs[v] += 0.5 * (fv[m, v] + fv[al, v])
                            if al == m:
                                for v in range(NVAR):
                                    acc[m, v] += Dsplit[m, m] * fs[v]
                            else:
                                for v in range(NVAR):
                                    acc[m, v] += Dsplit[m, al] * fs[v]
                                    acc[al, v] += Dsplit[al, m] * fs[v]
                    for m in range(n1):
                        if d == 0:
                            k, j, i = c2, c1, m
                        elif d == 1:
                            k, j, i = c2, m, c1
                        else:
                            k, j, i = m, c1, c2
                        for v in range(NVAR):
                            Ut[e, k, j, i, v] += acc[m, v]


# ---------------------------------------------------------------------------
# surface pipeline


@njit(cache=True, parallel=True)
def k_prolong(U, rows, l_minus, l_plus, UL, UR):
    """Evaluate element traces on the listed faces, in primary face order.

    rows: (n, 5) int array of (side, elem, locSide, is_primary, orient).
    """
    n1 = U.shape[1]
    N = n1 - 1
    for r in prange(rows.shape[0]):
        s, e, loc, is_p, code = rows[r, 0], rows[r, 1], rows[r, 2], rows[r, 3], rows[r, 4]
        lv = l_plus if loc % 2 == 1 else l_minus
        for a in range(n1):
            for b in range(n1):
                p, q = _orient(code, a, b, N)
                for v in range(NVAR):
                    acc = 0.0
                    for m in range(n1):
                        i, j, k = _vol_index(loc, a, b, m)
                        acc += lv[m] * U[e, k, j, i, v]
                    if is_p == 1:
                        UL[s, q, p, v] = acc
                    else:
                        UR[s, q, p, v] = acc


@njit(cache=True, parallel=True)
def k_prolong_grad(g, rows, l_minus, l_plus, gL, gR):
    """Trace of the lifted gradients on the listed faces."""
    n1 = g.shape[1]
    N = n1 - 1
    for r in prange(rows.shape[0]):
        s, e, loc, is_p, code = rows[r, 0], rows[r, 1], rows[r, 2], rows[r, 3], rows[r, 4]
        lv = l_plus if loc % 2 == 1 else l_minus
        for a in range(n1):
            for b in range(n1):
                p, q = _orient(code, a, b, N)
                for m in range(n1):
                    i, j, k = _vol_index(loc, a, b, m)
                    w = lv[m]
                    for d in range(3):
                        for l in range(N_LIFT):
                            if m == 0:
                                if is_p == 1:
                                    gL[s, q, p, d, l] = w * g[e, k, j, i, d, l]
                                else:
                                    gR[s, q, p, d, l] = w * g[e, k, j, i, d, l]
                            else:
                                if is_p == 1:
                                    gL[s, q, p, d, l] += w * g[e, k, j, i, d, l]
                                else:
                                    gR[s, q, p, d, l] += w * g[e, k, j, i, d, l]


@njit(cache=True, parallel=True)
def k_fill_flux_convective(sides, UL, UR, nvec, ssurf, fstar, solver_id, gamma, R):
    """Riemann flux times the surface element on the listed sides."""
    n1 = UL.shape[1]
    bad = -1
    for r in prange(sides.shape[0]):
        pl = np.empty(NPRIM)
        pr = np.empty(NPRIM)
        f = np.empty(NVAR)
        s = sides[r]
        for q in range(n1):
            for p in range(n1):
                _prim_point(UL[s, q, p], pl, gamma, R)
                _prim_point(UR[s, q, p], pr, gamma, R)
                if pl[0] <= 0.0 or pl[4] <= 0.0 or pr[0] <= 0.0 or pr[4] <= 0.0:
                    bad = max(bad, s)
                eq.pt_riemann(solver_id,
                              pl[0], pl[1], pl[2], pl[3], pl[4], UL[s, q, p, 4],
                              pr[0], pr[1], pr[2], pr[3], pr[4], UR[s, q, p, 4],
                              nvec[s, q, p, 0], nvec[s, q, p, 1], nvec[s, q, p, 2],
                              gamma, f)
                for v in range(NVAR):
                    fstar[s, q, p, v] = f[v] * ssurf[s, q, p]
    return bad


@njit(cache=True, parallel=True)
def k_fill_flux_viscous(sides, UL, UR, gL, gR, nvec, ssurf, fstar,
                        gamma, R, Pr, mu_ref, T_ref, law):
    """Add the mean viscous interface flux (BR1) to the surface flux."""
    n1 = UL.shape[1]
    for r in prange(sides.shape[0]):
        pl = np.empty(NPRIM)
        pr = np.empty(NPRIM)
        fl = np.empty(NVAR)
        fr = np.empty(NVAR)
        s = sides[r]
        for q in range(n1):
            for p in range(n1):
                _prim_point(UL[s, q, p], pl, gamma, R)
                _prim_point(UR[s, q, p], pr, gamma, R)
                nx = nvec[s, q, p, 0]
                ny = nvec[s, q, p, 1]
                nz = nvec[s, q, p, 2]
                mu = eq.pt_viscosity(pl[5], mu_ref, T_ref, law)
                lam = eq.pt_conductivity(mu, gamma, R, Pr)
                eq.pt_viscous_flux_dir(
                    pl[1], pl[2], pl[3], mu, lam,
                    gL[s, q, p, 0, 0], gL[s, q, p, 0, 1], gL[s, q, p, 0, 2], gL[s, q, p, 0, 3],
                    gL[s, q, p, 1, 0], gL[s, q, p, 1, 1], gL[s, q, p, 1, 2], gL[s, q, p, 1, 3],
                    gL[s, q, p, 2, 0], gL[s, q, p, 2, 1], gL[s, q, p, 2, 2], gL[s, q, p, 2, 3],
                    nx, ny, nz, fl)
                mu = eq.pt_viscosity(pr[5], mu_ref, T_ref, law)
                lam = eq.pt_conductivity(mu, gamma, R, Pr)
                eq.pt_viscous_flux_dir(
                    pr[1], pr[2], pr[3], mu, lam,
                    gR[s, q, p, 0, 0], gR[s, q, p, 0, 1], gR[s, q, p, 0, 2], gR[s, q, p, 0, 3],
                    gR[s, q, p, 1, 0], gR[s, q, p, 1, 1], gR[s, q, p, 1, 2], gR[s, q, p, 1, 3],
                    gR[s, q, p, 2, 0], gR[s, q, p, 2, 1], gR[s, q, p, 2, 2], gR[s, q, p, 2, 3],
                    nx, ny, nz, fr)
                for v in range(NVAR):
                    fstar[s, q, p, v] += 0.5 * (fl[v] + fr[v]) * ssurf[s, q, p]


@njit(cache=True, parallel=True)
def k_surf_int(fstar, ef_side, ef_sign, ef_orient, lhat_minus, lhat_plus, Ut):
    """Gather-style surface integral: one writer per volume DOF."""
    ne = ef_side.shape[0]
    n1 = Ut.shape[1]
    N = n1 - 1
    for e in prange(ne):
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    for loc in range(6):
                        s = ef_side[e, loc]
                        sign = ef_sign[e, loc]
                        code = ef_orient[e, loc]
                        d = loc // 2
                        if d == 0:
                            m, a, b = i, j, k
                        elif d == 1:
                            m, a, b = j, k, i
                        else:
                            m, a, b = k, i, j
                        p, q = _orient(code, a, b, N)
                        lh = lhat_plus[m] if loc % 2 == 1 else lhat_minus[m]
                        w = sign * lh
                        for v in range(NVAR):
                            Ut[e, k, j, i, v] += w * fstar[s, q, p, v]


@njit(cache=True)
def k_apply_jac(Ut, J):
    ne, n1 = Ut.shape[0], Ut.shape[1]
    for e in range(ne):
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    w = -1.0 / J[e, k, j, i]
                    for v in range(NVAR):
                        Ut[e, k, j, i, v] *= w


# ---------------------------------------------------------------------------
# BR1 lifting


@njit(cache=True, parallel=True)
def k_lift_fill(sides, UL, UR, vstar, gamma, R):
    """Central lifting flux: arithmetic mean of (u, v, w, T) traces."""
    n1 = UL.shape[1]
    for r in prange(sides.shape[0]):
        pl = np.empty(NPRIM)
        pr = np.empty(NPRIM)
        s = sides[r]
        for q in range(n1):
            for p in range(n1):
                _prim_point(UL[s, q, p], pl, gamma, R)
                _prim_point(UR[s, q, p], pr, gamma, R)
                for l in range(N_LIFT):
                    lp = 1 + l if l < 3 else 5  # velocities, then temperature
                    vstar[s, q, p, l] = 0.5 * (pl[lp] + pr[lp])


@njit(cache=True, parallel=True)
def k_lift_volume(prim, Ja, Dhat, g):
    """Weak volume term of the lifting operator, all three directions."""
    ne, n1 = prim.shape[0], prim.shape[1]
    for e in prange(ne):
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    for d in range(3):
                        for l in range(N_LIFT):
                            g[e, k, j, i, d, l] = 0.0
                    for al in range(n1):
                        di = Dhat[i, al]
                        dj = Dhat[j, al]
                        dk = Dhat[k, al]
                        for d in range(3):
                            jai = di * Ja[e, 0, k, j, al, d]
                            jaj = dj * Ja[e, 1, k, al, i, d]
                            jak = dk * Ja[e, 2, al, j, i, d]
                            for l in range(N_LIFT):
                                lp = 1 + l if l < 3 else 5
                                g[e, k, j, i, d, l] += \
                                    jai * prim[e, k, j, al, lp] \
                                    + jaj * prim[e, k, al, i, lp] \
                                    + jak * prim[e, al, j, i, lp]


@njit(cache=True, parallel=True)
def k_lift_surf_and_jac(vstar, nvec, ssurf, ef_side, ef_sign, ef_orient,
                        lhat_minus, lhat_plus, J, g):
    """Surface term of the lifting operator, then scale by 1/J."""
    ne = ef_side.shape[0]
    n1 = g.shape[1]
    N = n1 - 1
    for e in prange(ne):
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    for loc in range(6):
                        s = ef_side[e, loc]
                        sign = ef_sign[e, loc]
                        code = ef_orient[e, loc]
                        d = loc // 2
                        if d == 0:
                            m, a, b = i, j, k
                        elif d == 1:
                            m, a, b = j, k, i
                        else:
                            m, a, b = k, i, j
                        p, q = _orient(code, a, b, N)
                        lh = lhat_plus[m] if loc % 2 == 1 else lhat_minus[m]
                        w = sign * lh * ssurf[s, q, p]
                        for dd in range(3):
                            nd = w * nvec[s, q, p, dd]
                            for l in range(N_LIFT):
                                g[e, k, j, i, dd, l] += nd * vstar[s, q, p, l]
                    iw = 1.0 / J[e, k, j, i]
                    for dd in range(3):
                        for l in range(N_LIFT):
                            g[e, k, j, i, dd, l] *= iw


# ---------------------------------------------------------------------------
# timestep estimate


@njit(cache=True)
def k_local_dt(prim, Ja, J, N, cfl, cfl_visc, gamma, R, Pr, mu_ref, T_ref, law,
               viscous):
    """Deterministic minimum of the nodal CFL estimates on this rank."""
    n = prim.shape[0]
    dt = 1e300
    scale = 2.0 * N + 1.0
    for i in range(n):
        a = np.sqrt(gamma * prim[i, 4] / prim[i, 0])
        lam = 0.0
        metric2 = 0.0
        for d in range(3):
            jx, jy, jz = Ja[i, d, 0], Ja[i, d, 1], Ja[i, d, 2]
            nrm = np.sqrt(jx * jx + jy * jy + jz * jz)
            vn = prim[i, 1] * jx + prim[i, 2] * jy + prim[i, 3] * jz
            lam += np.abs(vn) + a * nrm
            metric2 += nrm * nrm
        dta = cfl * 2.0 * J[i] / (scale * lam)
        if dta < dt:
            dt = dta
        if viscous:
            mu = eq.pt_viscosity(prim[i, 5], mu_ref, T_ref, law)
            nu = mu / prim[i, 0] * max(4.0 / 3.0, gamma / Pr)
            if nu > 0.0:
                dtv = cfl_visc * (2.0 * J[i]) ** 2 / (scale * scale * metric2 * nu)
                if dtv < dt:
                    dt = dtv
    return dt


# ---------------------------------------------------------------------------
# per-rank domain data


class Domain:
    """Local element range plus all tables the kernels need.

    Sides touching the local range are renumbered locally; sides whose other
    element lives on a different rank are "mpi" sides and carry enough
    information to pack/unpack exchange buffers in a priori known order.
    """

    def __init__(self, mesh: Mesh, basis: Basis1D, gas: eq.GasProperties,
                 lo: int = 0, hi: int = None, elem_rank=None, rank: int = 0):
        if mesh.J is None:
            raise OperatorError("mesh metrics missing; call compute_metrics first")
        hi = mesh.nelem if hi is None else hi
        self.mesh = mesh
        self.basis = basis
        self.gas = gas
        self.rank = rank
        self.lo, self.hi = lo, hi
        self.ne = hi - lo
        n1 = basis.N + 1
        self.n1 = n1
        self.N = basis.N

        # local sides: any side touching a local element
        local_sides = []
        for s in range(mesh.n_sides):
            ep, er = mesh.side_elem_p[s], mesh.side_elem_r[s]
            if lo <= ep < hi or (er >= 0 and lo <= er < hi):
                local_sides.append(s)
        self.side_global = np.array(local_sides, dtype=np.int64)
        self.ns = len(local_sides)
        loc_of = {g: i for i, g in enumerate(local_sides)}

        self.J = np.ascontiguousarray(mesh.J[lo:hi])
        self.Ja = np.ascontiguousarray(mesh.Ja[lo:hi])
        self.x = np.ascontiguousarray(mesh.x[lo:hi])
        self.ssurf = np.ascontiguousarray(mesh.face_s[self.side_global])
        self.nvec = np.ascontiguousarray(mesh.face_normal[self.side_global])
        self.side_bc = np.ascontiguousarray(mesh.side_bc[self.side_global])

        # element face tables (local element idx, local side idx)
        self.ef_side = np.zeros((self.ne, 6), dtype=np.int64)
        self.ef_sign = np.zeros((self.ne, 6))
        self.ef_orient = np.zeros((self.ne, 6), dtype=np.int64)
        for el in range(self.ne):
            eg = lo + el
            for loc in range(6):
                s = mesh.elem_sides[eg, loc]
                self.ef_side[el, loc] = loc_of[s]
                prim_side = mesh.elem_primary[eg, loc]
                self.ef_sign[el, loc] = 1.0 if prim_side else -1.0
                self.ef_orient[el, loc] = 0 if prim_side else mesh.side_orient[s]

        # classify sides and build prolong work lists
        rows_inner, rows_mpi = [], []
        sides_inner, sides_mpi_primary, sides_mpi_replica, sides_bc = [], [], [], []
        self.side_is_mpi = np.zeros(self.ns, dtype=bool)
        for sl, sg in enumerate(local_sides):
            ep, er = mesh.side_elem_p[sg], mesh.side_elem_r[sg]
            p_local = lo <= ep < hi
            r_local = er >= 0 and lo <= er < hi
            if er < 0:
                sides_bc.append(sl)
                sides_inner.append(sl)
                rows_inner.append((sl, ep - lo, mesh.side_loc_p[sg], 1, 0))
            elif p_local and r_local:
                sides_inner.append(sl)
                rows_inner.append((sl, ep - lo, mesh.side_loc_p[sg], 1, 0))
                rows_inner.append((sl, er - lo, mesh.side_loc_r[sg],
                                   0, mesh.side_orient[sg]))
            else:
                self.side_is_mpi[sl] = True
                if p_local:
                    sides_mpi_primary.append(sl)
                    rows_mpi.append((sl, ep - lo, mesh.side_loc_p[sg], 1, 0))
                else:
                    sides_mpi_replica.append(sl)
                    rows_mpi.append((sl, er - lo, mesh.side_loc_r[sg],
                                     0, mesh.side_orient[sg]))

        def rows_arr(rows):
            return np.array(rows, dtype=np.int64).reshape(len(rows), 5)

        self.rows_inner = rows_arr(rows_inner)
        self.rows_mpi = rows_arr(rows_mpi)
        self.sides_inner = np.array(sides_inner, dtype=np.int64)
        self.sides_mpi_primary = np.array(sides_mpi_primary, dtype=np.int64)
        self.sides_mpi_replica = np.array(sides_mpi_replica, dtype=np.int64)
        self.sides_mpi = np.array(sorted(sides_mpi_primary + sides_mpi_replica),
                                  dtype=np.int64)
        self.sides_bc = np.array(sides_bc, dtype=np.int64)

        # neighbor exchange tables: ordered by global side id per neighbor
        self.neighbors = {}
        if elem_rank is not None:
            for sl, sg in enumerate(local_sides):
                if not self.side_is_mpi[sl]:
                    continue
                ep, er = mesh.side_elem_p[sg], mesh.side_elem_r[sg]
                p_local = lo <= ep < hi
                other = int(elem_rank[er] if p_local else elem_rank[ep])
                self.neighbors.setdefault(other, []).append((sg, sl, p_local))
            for r in self.neighbors:
                entries = sorted(self.neighbors[r])
                self.neighbors[r] = {
                    "sides": np.array([e[1] for e in entries], dtype=np.int64),
                    "is_primary": np.array([e[2] for e in entries], dtype=bool),
                }

        # state and workspaces
        self.U = np.zeros((self.ne, n1, n1, n1, NVAR))
        self.prim = np.zeros((self.ne, n1, n1, n1, NPRIM))
        self.Ut = np.zeros((self.ne, n1, n1, n1, NVAR))
        self.UL = np.zeros((self.ns, n1, n1, NVAR))
        self.UR = np.zeros((self.ns, n1, n1, NVAR))
        self.fstar = np.zeros((self.ns, n1, n1, NVAR))
        self.viscous = gas.viscous
        if self.viscous:
            self.g = np.zeros((self.ne, n1, n1, n1, 3, N_LIFT))
            self.gL = np.zeros((self.ns, n1, n1, 3, N_LIFT))
            self.gR = np.zeros((self.ns, n1, n1, 3, N_LIFT))
            self.vstar = np.zeros((self.ns, n1, n1, N_LIFT))
            self.Fvis = np.zeros((self.ne, n1, n1, n1, 3, NVAR))
        else:
            self.g = np.zeros((0, n1, n1, n1, 3, N_LIFT))
            self.gL = np.zeros((0, n1, n1, 3, N_LIFT))
            self.gR = np.zeros((0, n1, n1, 3, N_LIFT))
            self.vstar = np.zeros((0, n1, n1, N_LIFT))
            self.Fvis = np.zeros((0, n1, n1, n1, 3, NVAR))

        # Dirichlet state per boundary tag (filled by the test-case setup)
        self.bc_states = np.zeros((8, NVAR))

    # -- kernel wrappers ----------------------------------------------------

    def cons_to_prim(self):
        min_rho, min_p = k_cons_to_prim(
            self.U.reshape(-1, NVAR), self.prim.reshape(-1, NPRIM),
            self.gas.gamma, self.gas.R)
        if min_rho <= 0.0 or min_p <= 0.0:
            raise eq.AdmissibilityError(
                f"rank {self.rank}: inadmissible state (min rho {min_rho:.3e}, "
                f"min p {min_p:.3e})")

    def prolong(self, mpi: bool):
        rows = self.rows_mpi if mpi else self.rows_inner
        if rows.size:
            k_prolong(self.U, rows, self.basis.l_minus, self.basis.l_plus,
                      self.UL, self.UR)
        if not mpi:
            self.apply_bc_traces()

    def apply_bc_traces(self):
        for sl in self.sides_bc:
            tag = self.side_bc[sl]
            self.UR[sl, :, :, :] = self.bc_states[tag]

    def fill_flux(self, sides, solver_id):
        if not sides.size:
            return
        bad = k_fill_flux_convective(
            sides, self.UL, self.UR, self.nvec, self.ssurf, self.fstar,
            solver_id, self.gas.gamma, self.gas.R)
        if bad >= 0:
            raise eq.AdmissibilityError(
                f"rank {self.rank}: inadmissible trace state on local side {bad}")
        if self.viscous:
            k_fill_flux_viscous(
                sides, self.UL, self.UR, self.gL, self.gR, self.nvec,
                self.ssurf, self.fstar, self.gas.gamma, self.gas.R,
                self.gas.Pr, self.gas.mu_ref, self.gas.T_ref,
                self.gas.viscosity_law)

    def lift_fill(self, sides):
        if sides.size:
            k_lift_fill(sides, self.UL, self.UR, self.vstar,
                        self.gas.gamma, self.gas.R)

    def lift_volume(self):
        k_lift_volume(self.prim, self.Ja, self.basis.Dhat, self.g)

    def lift_finish(self):
        """Surface term, 1/J scaling, and the nodal viscous fluxes."""
        k_lift_surf_and_jac(self.vstar, self.nvec, self.ssurf, self.ef_side,
                            self.ef_sign, self.ef_orient, self.basis.lhat_minus,
                            self.basis.lhat_plus, self.J, self.g)
        k_viscous_contravariant(
            self.prim.reshape(-1, NPRIM), self.g.reshape(-1, 3, N_LIFT),
            self._ja_flat(), self.Fvis.reshape(-1, 3, NVAR),
            self.gas.gamma, self.gas.R, self.gas.Pr, self.gas.mu_ref,
            self.gas.T_ref, self.gas.viscosity_law)

    def lift_gradients(self):
        """Full lifting pipeline for a serial context (volume + surface)."""
        self.lift_volume()
        self.lift_finish()

    def _ja_flat(self):
        # (ne, 3, n,n,n, 3) -> (ndof, 3, 3) nodal metric vectors
        if not hasattr(self, "_ja_flat_cache"):
            self._ja_flat_cache = np.ascontiguousarray(
                self.Ja.transpose(0, 2, 3, 4, 1, 5)).reshape(-1, 3, 3)
        return self._ja_flat_cache

    def prolong_grad(self, mpi: bool):
        rows = self.rows_mpi if mpi else self.rows_inner
        if rows.size:
            k_prolong_grad(self.g, rows, self.basis.l_minus, self.basis.l_plus,
                           self.gL, self.gR)
        if not mpi:
            for sl in self.sides_bc:
                self.gR[sl] = self.gL[sl]

    def vol_int(self, split: bool):
        if split:
            k_vol_int_split(self.prim, self.Ja, self.Fvis,
                            self.basis.Dsplit, self.Ut, self.viscous)
        else:
            k_vol_int_standard(self.U, self.prim, self.Ja, self.Fvis,
                               self.basis.Dhat, self.Ut, self.viscous)

    def surf_int(self):
        k_surf_int(self.fstar, self.ef_side, self.ef_sign, self.ef_orient,
                   self.basis.lhat_minus, self.basis.lhat_plus, self.Ut)

    def apply_jac(self):
        k_apply_jac(self.Ut, self.J)

    def local_dt(self, cfl, cfl_visc):
        return k_local_dt(self.prim.reshape(-1, NPRIM), self._ja_flat(),
                          self.J.reshape(-1), self.N, cfl, cfl_visc,
                          self.gas.gamma, self.gas.R, self.gas.Pr,
                          self.gas.mu_ref, self.gas.T_ref,
                          self.gas.viscosity_law, self.viscous)

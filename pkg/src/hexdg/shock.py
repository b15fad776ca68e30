"""FV subcell shock capturing: a priori indicator, subcell operator, blending.

Per element, the high-order residual is convexly blended with a first-order
finite-volume update on the LGL subcell grid. The subcell widths are the LGL
quadrature weights; interior interface fluxes come from the nodal left/right
states, the outermost interfaces reuse the element's DG surface fluxes so the
blended scheme stays conservative for any blending factor.

Subcell interface metric vectors are built by a telescoping sum anchored at
the element's own face metric: each step adds the quadrature-weighted nodal
derivative of Ja^i along the line. Together with the discrete metric identity
this makes the FV residual vanish exactly for constant states, also on curved
elements (a plain two-node average of Ja^i does not).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from . import equations as eq
from .basis import Basis1D
from .operator import NPRIM, NVAR, Domain, _orient, _prim_point

INDICATOR_HENNEMANN = 0
INDICATOR_CONSTANT = 1

# logistic sharpness: alpha(E=0) ~ eps, alpha(E=2T) ~ 1-eps with eps = 1e-4
SHARPNESS = float(np.log(1.0 / 1e-4 - 1.0))


@dataclass(frozen=True)
class ShockConfig:
    enabled: bool = False
    alpha_max: float = 0.5
    alpha_min: float = 1e-3
    indicator: int = INDICATOR_HENNEMANN
    alpha_const: float = 0.0


def modal_threshold(N: int) -> float:
    """Indicator threshold as a function of polynomial degree."""
    return 0.5 * 10.0 ** (-1.8 * (N + 1.0) ** 0.25)


@njit(cache=True, parallel=True)
def k_indicator(U, Vinv, alpha, threshold, sharpness, alpha_max, alpha_min,
                gamma):
    """Blending factor from the modal energy of rho*p, per element."""
    ne, n1 = U.shape[0], U.shape[1]
    N = n1 - 1
    for e in prange(ne):
        ind = np.empty((n1, n1, n1))
        t1 = np.empty((n1, n1, n1))
        t2 = np.empty((n1, n1, n1))
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    rho = U[e, k, j, i, 0]
                    p = (gamma - 1.0) * (U[e, k, j, i, 4] - 0.5 * (
                        U[e, k, j, i, 1] ** 2 + U[e, k, j, i, 2] ** 2
                        + U[e, k, j, i, 3] ** 2) / rho)
                    ind[k, j, i] = rho * p
        # modal transform along i, j, k
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    acc = 0.0
                    for m in range(n1):
                        acc += Vinv[i, m] * ind[k, j, m]
                    t1[k, j, i] = acc
        for k in range(n1):
            for i in range(n1):
                for j in range(n1):
                    acc = 0.0
                    for m in range(n1):
                        acc += Vinv[j, m] * t1[k, m, i]
                    t2[k, j, i] = acc
        for j in range(n1):
            for i in range(n1):
                for k in range(n1):
                    acc = 0.0
                    for m in range(n1):
                        acc += Vinv[k, m] * t2[m, j, i]
                    t1[k, j, i] = acc
        total = 0.0
        clip1 = 0.0
        clip2 = 0.0
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    m2 = t1[k, j, i] * t1[k, j, i]
                    total += m2
                    if k < N and j < N and i < N:
                        clip1 += m2
                    if k < N - 1 and j < N - 1 and i < N - 1:
                        clip2 += m2
        energy = 0.0
        if total > 1e-300:
            energy = (total - clip1) / total
        if clip1 > 1e-300:
            e2 = (clip1 - clip2) / clip1
            if e2 > energy:
                energy = e2
        a = 1.0 / (1.0 + np.exp(-sharpness / threshold * (energy - threshold)))
        if a > alpha_max:
            a = alpha_max
        if a < alpha_min:
            a = 0.0
        alpha[e] = a


@njit(cache=True)
def k_fv_residual(flagged, U, fvm0, fvm1, fvm2, weights, J, fstar,
                  ef_side, ef_sign, ef_orient, solver_id, gamma, R, RFV):
    """First-order FV update on the subcell grid for the flagged elements."""
    n1 = U.shape[1]
    N = n1 - 1
    pl = np.empty(NPRIM)
    pr = np.empty(NPRIM)
    f = np.empty(NVAR)
    Fline = np.empty((n1 + 1, NVAR))
    for idx in range(flagged.shape[0]):
        e = flagged[idx]
        for v in range(NVAR):
            for k in range(n1):
                for j in range(n1):
                    for i in range(n1):
                        RFV[e, k, j, i, v] = 0.0
        for d in range(3):
            # choose the outer sides for this direction
            loc_m = 2 * d
            loc_p = 2 * d + 1
            s_m, s_p = ef_side[e, loc_m], ef_side[e, loc_p]
            sg_m, sg_p = ef_sign[e, loc_m], ef_sign[e, loc_p]
            cd_m, cd_p = ef_orient[e, loc_m], ef_orient[e, loc_p]
            for a in range(n1):
                for b in range(n1):
                    # line through the element along direction d; (a, b) are
                    # the cyclic tangential indices of loc 2d
                    # outer flux at the minus end, oriented along +d
                    p, q = _orient(cd_m, a, b, N)
                    for v in range(NVAR):
                        Fline[0, v] = -sg_m * fstar[s_m, q, p, v]
                    p, q = _orient(cd_p, a, b, N)
                    for v in range(NVAR):
                        Fline[n1, v] = sg_p * fstar[s_p, q, p, v]
                    for h in range(1, n1):
                        # nodal states left/right of interface h
                        if d == 0:
                            iL = (h - 1, a, b)
                            iR = (h, a, b)
                            mx = fvm0[e, b, a, h, 0]
                            my = fvm0[e, b, a, h, 1]
                            mz = fvm0[e, b, a, h, 2]
                        elif d == 1:
                            iL = (b, h - 1, a)
                            iR = (b, h, a)
                            mx = fvm1[e, a, b, h, 0]
                            my = fvm1[e, a, b, h, 1]
                            mz = fvm1[e, a, b, h, 2]
                        else:
                            iL = (a, b, h - 1)
                            iR = (a, b, h)
                            mx = fvm2[e, b, a, h, 0]
                            my = fvm2[e, b, a, h, 1]
                            mz = fvm2[e, b, a, h, 2]
                        snorm = np.sqrt(mx * mx + my * my + mz * mz)
                        nx, ny, nz = mx / snorm, my / snorm, mz / snorm
                        _prim_point(U[e, iL[2], iL[1], iL[0]], pl, gamma, R)
                        _prim_point(U[e, iR[2], iR[1], iR[0]], pr, gamma, R)
                        eq.pt_riemann(solver_id,
                                      pl[0], pl[1], pl[2], pl[3], pl[4],
                                      U[e, iL[2], iL[1], iL[0], 4],
                                      pr[0], pr[1], pr[2], pr[3], pr[4],
                                      U[e, iR[2], iR[1], iR[0], 4],
                                      nx, ny, nz, gamma, f)
                        for v in range(NVAR):
                            Fline[h, v] = f[v] * snorm
                    for h in range(n1):
                        iw = 1.0 / weights[h]
                        if d == 0:
                            i, j, k = h, a, b
                        elif d == 1:
                            i, j, k = b, h, a
                        else:
                            i, j, k = a, b, h
                        for v in range(NVAR):
                            RFV[e, k, j, i, v] -= (Fline[h + 1, v] - Fline[h, v]) * iw
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    iw = 1.0 / J[e, k, j, i]
                    for v in range(NVAR):
                        RFV[e, k, j, i, v] *= iw


@njit(cache=True)
def k_blend(flagged, alpha, Ut, RFV):
    n1 = Ut.shape[1]
    for idx in range(flagged.shape[0]):
        e = flagged[idx]
        a = alpha[e]
        b = 1.0 - a
        for k in range(n1):
            for j in range(n1):
                for i in range(n1):
                    for v in range(NVAR):
                        Ut[e, k, j, i, v] = b * Ut[e, k, j, i, v] \
                            + a * RFV[e, k, j, i, v]


def subcell_interface_metrics(domain: Domain):
    """Telescoping interface metric vectors for the three subcell directions.

    Returns (fvm0, fvm1, fvm2) with fvm0[e, b, a, h] the metric at interface
    h (between nodes h-1 and h along xi) of the line with tangential indices
    (a, b) = (j, k); analogous cyclic layouts for the other directions.
    """
    b = domain.basis
    if b.node_type != "LGL":
        raise ValueError("subcell shock capturing requires LGL nodes")
    n1 = b.N + 1
    w = b.weights
    D = b.D
    Ja = domain.Ja  # (ne, 3, k, j, i, 3)
    ne = Ja.shape[0]

    def telescope(anchor, deriv, axis_len):
        out = np.empty(anchor.shape[:-1] + (axis_len + 1, 3))
        out[..., 0, :] = anchor
        for h in range(axis_len):
            out[..., h + 1, :] = out[..., h, :] + w[h] * deriv[..., h, :]
        return out

    # lines along i: anchor at i = 0, result indexed [e, k, j, h, 3]
    dJ0 = np.einsum("im,ekjmc->ekjic", D, Ja[:, 0])
    fvm0 = np.ascontiguousarray(telescope(Ja[:, 0][:, :, :, 0, :], dJ0, n1))

    # lines along j: anchor at j = 0, result indexed [e, k, i, h, 3]
    dJ1 = np.einsum("jm,ekmic->ekjic", D, Ja[:, 1])
    fvm1 = np.empty((ne, n1, n1, n1 + 1, 3))
    acc = Ja[:, 1][:, :, 0, :, :].copy()
    fvm1[:, :, :, 0, :] = acc
    for h in range(n1):
        acc = acc + w[h] * dJ1[:, :, h, :, :]
        fvm1[:, :, :, h + 1, :] = acc

    # lines along k: anchor at k = 0, result indexed [e, j, i, h, 3]
    dJ2 = np.einsum("km,emjic->ekjic", D, Ja[:, 2])
    fvm2 = np.empty((ne, n1, n1, n1 + 1, 3))
    acc = Ja[:, 2][:, 0, :, :, :].copy()
    fvm2[:, :, :, 0, :] = acc
    for h in range(n1):
        acc = acc + w[h] * dJ2[:, h, :, :, :]
        fvm2[:, :, :, h + 1, :] = acc
    return fvm0, np.ascontiguousarray(fvm1), np.ascontiguousarray(fvm2)


def indicator_alpha(U_elem: np.ndarray, basis: Basis1D, config: ShockConfig,
                    gamma: float = 1.4) -> float:
    """Blending factor of a single element's nodal state (k, j, i, 5)."""
    if config.indicator == INDICATOR_CONSTANT:
        return min(config.alpha_const, config.alpha_max)
    alpha = np.zeros(1)
    k_indicator(U_elem[None, ...], basis.vandermonde_modal, alpha,
                modal_threshold(basis.N), SHARPNESS, config.alpha_max,
                config.alpha_min, gamma)
    return float(alpha[0])


def fv_subcell_operator(domain: Domain, elem: int, fstar: np.ndarray = None,
                        solver_id: int = 0, fvm=None) -> np.ndarray:
    """First-order FV update of one element's subcell grid.

    Interior interface fluxes come from the nodal left/right states; the
    outermost interfaces reuse the element's DG surface fluxes (fstar, which
    defaults to the fluxes currently stored on the domain).
    """
    if fstar is None:
        fstar = domain.fstar
    if fvm is None:
        fvm = subcell_interface_metrics(domain)
    RFV = np.zeros_like(domain.Ut)
    flagged = np.array([elem], dtype=np.int64)
    k_fv_residual(flagged, domain.U, fvm[0], fvm[1], fvm[2],
                  domain.basis.weights, domain.J, fstar, domain.ef_side,
                  domain.ef_sign, domain.ef_orient, solver_id,
                  domain.gas.gamma, domain.gas.R, RFV)
    return RFV[elem]


def blend(R_DG: np.ndarray, R_FV: np.ndarray, alpha: float) -> np.ndarray:
    """Convex combination (1 - alpha) * R_DG + alpha * R_FV."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"blending factor {alpha} outside [0, 1]")
    if R_DG.shape != R_FV.shape:
        raise ValueError("operator shapes differ")
    return (1.0 - alpha) * R_DG + alpha * R_FV

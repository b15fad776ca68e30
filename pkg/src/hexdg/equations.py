"""Compressible Navier-Stokes physics: material laws, state conversions, fluxes.

The scalar "point" routines carry the equation-specific arithmetic and are
numba-compiled so the volume/surface kernels can inline them. The array-level
wrappers validate admissibility (positive density and pressure) once at entry;
the inner loops assume admissible states.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

CONST_VISCOSITY = 0
SUTHERLAND = 1

# lifted variable set for the viscous terms: velocities and temperature
N_LIFT = 4


class AdmissibilityError(ValueError):
    """State with non-positive density or pressure entered a flux routine."""


@dataclass(frozen=True)
class GasProperties:
    """Perfect-gas material description."""

    gamma: float = 1.4
    R: float = 287.058
    Pr: float = 0.71
    mu_ref: float = 0.0
    T_ref: float = 273.15
    viscosity_law: int = CONST_VISCOSITY

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.Pr <= 0.0:
            raise ValueError(f"Prandtl number must be positive, got {self.Pr}")
        if self.mu_ref < 0.0:
            raise ValueError(f"reference viscosity must be >= 0, got {self.mu_ref}")

    @property
    def viscous(self) -> bool:
        return self.mu_ref > 0.0


@dataclass(frozen=True)
class ConservedState:
    rho: float
    mom: tuple
    rhoE: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, *self.mom, self.rhoE])


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    vel: tuple
    p: float
    T: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, *self.vel, self.p, self.T])


@njit(cache=True)
def pt_pressure(rho, mx, my, mz, rhoE, gamma):
    return (gamma - 1.0) * (rhoE - 0.5 * (mx * mx + my * my + mz * mz) / rho)


@njit(cache=True)
def pt_viscosity(T, mu_ref, T_ref, law):
    if law == CONST_VISCOSITY:
        return mu_ref
    tr = T / T_ref
    return mu_ref * 1.4042 * tr * np.sqrt(tr) / (tr + 0.4042)


@njit(cache=True)
def pt_conductivity(mu, gamma, R, Pr):
    return gamma * R / (gamma - 1.0) * mu / Pr


@njit(cache=True)
def pt_sound_speed(rho, p, gamma):
    return np.sqrt(gamma * p / rho)


@njit(cache=True)
def pt_euler_flux_dir(rho, u, v, w, p, rhoE, nx, ny, nz, out):
    """Physical Euler flux projected on a (not necessarily unit) direction."""
    vn = u * nx + v * ny + w * nz
    m = rho * vn
    out[0] = m
    out[1] = m * u + p * nx
    out[2] = m * v + p * ny
    out[3] = m * w + p * nz
    out[4] = vn * (rhoE + p)


@njit(cache=True)
def pt_llf(rhoL, uL, vL, wL, pL, rhoEL,
           rhoR, uR, vR, wR, pR, rhoER,
           nx, ny, nz, gamma, out):
    """Local Lax-Friedrichs flux for a unit normal."""
    pt_euler_flux_dir(rhoL, uL, vL, wL, pL, rhoEL, nx, ny, nz, out)
    fR = np.empty(5)
    pt_euler_flux_dir(rhoR, uR, vR, wR, pR, rhoER, nx, ny, nz, fR)
    vnL = uL * nx + vL * ny + wL * nz
    vnR = uR * nx + vR * ny + wR * nz
    lam = max(np.abs(vnL) + pt_sound_speed(rhoL, pL, gamma),
              np.abs(vnR) + pt_sound_speed(rhoR, pR, gamma))
    out[0] = 0.5 * (out[0] + fR[0]) - 0.5 * lam * (rhoR - rhoL)
    out[1] = 0.5 * (out[1] + fR[1]) - 0.5 * lam * (rhoR * uR - rhoL * uL)
    out[2] = 0.5 * (out[2] + fR[2]) - 0.5 * lam * (rhoR * vR - rhoL * vL)
    out[3] = 0.5 * (out[3] + fR[3]) - 0.5 * lam * (rhoR * wR - rhoL * wL)
    out[4] = 0.5 * (out[4] + fR[4]) - 0.5 * lam * (rhoER - rhoEL)


@njit(cache=True)
def pt_hllc(rhoL, uL, vL, wL, pL, rhoEL,
            rhoR, uR, vR, wR, pR, rhoER,
            nx, ny, nz, gamma, out):
    """HLLC flux (Toro) for a unit normal, rotated to the normal frame."""
    vnL = uL * nx + vL * ny + wL * nz
    vnR = uR * nx + vR * ny + wR * nz
    aL = pt_sound_speed(rhoL, pL, gamma)
    aR = pt_sound_speed(rhoR, pR, gamma)

    # Roe-averaged wave speed estimates
    sqL = np.sqrt(rhoL)
    sqR = np.sqrt(rhoR)
    fac = 1.0 / (sqL + sqR)
    vnRoe = (sqL * vnL + sqR * vnR) * fac
    HL = (rhoEL + pL) / rhoL
    HR = (rhoER + pR) / rhoR
    HRoe = (sqL * HL + sqR * HR) * fac
    u2Roe = ((sqL * (uL * uL + vL * vL + wL * wL)
              + sqR * (uR * uR + vR * vR + wR * wR)) * fac)
    aRoe = np.sqrt(max((gamma - 1.0) * (HRoe - 0.5 * u2Roe), 1e-300))
    sL = min(vnL - aL, vnRoe - aRoe)
    sR = max(vnR + aR, vnRoe + aRoe)

    if sL >= 0.0:
        pt_euler_flux_dir(rhoL, uL, vL, wL, pL, rhoEL, nx, ny, nz, out)
        return
    if sR <= 0.0:
        pt_euler_flux_dir(rhoR, uR, vR, wR, pR, rhoER, nx, ny, nz, out)
        return

    sM = (pR - pL + rhoL * vnL * (sL - vnL) - rhoR * vnR * (sR - vnR)) \
        / (rhoL * (sL - vnL) - rhoR * (sR - vnR))
    if sM >= 0.0:
        pt_euler_flux_dir(rhoL, uL, vL, wL, pL, rhoEL, nx, ny, nz, out)
        rho_s = rhoL * (sL - vnL) / (sL - sM)
        p_s = pL + rhoL * (vnL - sL) * (vnL - sM)
        us = np.empty(5)
        us[0] = rho_s
        us[1] = rho_s * (uL + (sM - vnL) * nx)
        us[2] = rho_s * (vL + (sM - vnL) * ny)
        us[3] = rho_s * (wL + (sM - vnL) * nz)
        us[4] = rho_s * (rhoEL / rhoL + (sM - vnL) * (sM + pL / (rhoL * (sL - vnL))))
        out[0] += sL * (us[0] - rhoL)
        out[1] += sL * (us[1] - rhoL * uL)
        out[2] += sL * (us[2] - rhoL * vL)
        out[3] += sL * (us[3] - rhoL * wL)
        out[4] += sL * (us[4] - rhoEL)
    else:
        pt_euler_flux_dir(rhoR, uR, vR, wR, pR, rhoER, nx, ny, nz, out)
        rho_s = rhoR * (sR - vnR) / (sR - sM)
        us = np.empty(5)
        us[0] = rho_s
        us[1] = rho_s * (uR + (sM - vnR) * nx)
        us[2] = rho_s * (vR + (sM - vnR) * ny)
        us[3] = rho_s * (wR + (sM - vnR) * nz)
        us[4] = rho_s * (rhoER / rhoR + (sM - vnR) * (sM + pR / (rhoR * (sR - vnR))))
        out[0] += sR * (us[0] - rhoR)
        out[1] += sR * (us[1] - rhoR * uR)
        out[2] += sR * (us[2] - rhoR * vR)
        out[3] += sR * (us[3] - rhoR * wR)
        out[4] += sR * (us[4] - rhoER)


@njit(cache=True)
def pt_llf_split(rhoL, uL, vL, wL, pL, rhoEL,
                 rhoR, uR, vR, wR, pR, rhoER,
                 nx, ny, nz, gamma, out):
    """Lax-Friedrichs flux whose central part is the two-point split flux.

    Required for nonlinear stability when the volume terms use the split
    form: the central surface flux must telescope against the volume
    two-point fluxes, otherwise the kinetic-energy balance of the scheme is
    broken at strongly underresolved interfaces.
    """
    pt_split_flux_kep(rhoL, uL, vL, wL, pL, (rhoEL + pL) / rhoL,
                      rhoR, uR, vR, wR, pR, (rhoER + pR) / rhoR,
                      nx, ny, nz, out)
    vnL = uL * nx + vL * ny + wL * nz
    vnR = uR * nx + vR * ny + wR * nz
    lam = max(np.abs(vnL) + pt_sound_speed(rhoL, pL, gamma),
              np.abs(vnR) + pt_sound_speed(rhoR, pR, gamma))
    out[0] -= 0.5 * lam * (rhoR - rhoL)
    out[1] -= 0.5 * lam * (rhoR * uR - rhoL * uL)
    out[2] -= 0.5 * lam * (rhoR * vR - rhoL * vL)
    out[3] -= 0.5 * lam * (rhoR * wR - rhoL * wL)
    out[4] -= 0.5 * lam * (rhoER - rhoEL)


RIEMANN_LLF = 0
RIEMANN_HLLC = 1
RIEMANN_LLF_SPLIT = 2
RIEMANN_SOLVERS = {"llf": RIEMANN_LLF, "hllc": RIEMANN_HLLC}


@njit(cache=True)
def pt_riemann(solver_id,
               rhoL, uL, vL, wL, pL, rhoEL,
               rhoR, uR, vR, wR, pR, rhoER,
               nx, ny, nz, gamma, out):
    if solver_id == RIEMANN_HLLC:
        pt_hllc(rhoL, uL, vL, wL, pL, rhoEL, rhoR, uR, vR, wR, pR, rhoER,
                nx, ny, nz, gamma, out)
    elif solver_id == RIEMANN_LLF_SPLIT:
        pt_llf_split(rhoL, uL, vL, wL, pL, rhoEL, rhoR, uR, vR, wR, pR, rhoER,
                     nx, ny, nz, gamma, out)
    else:
        pt_llf(rhoL, uL, vL, wL, pL, rhoEL, rhoR, uR, vR, wR, pR, rhoER,
               nx, ny, nz, gamma, out)


@njit(cache=True)
def pt_split_flux_kep(rhoL, uL, vL, wL, pL, hL,
                      rhoR, uR, vR, wR, pR, hR,
                      jx, jy, jz, out):
    """Kinetic-energy-preserving two-point volume flux.

    Arithmetic means of density, velocity, pressure and specific total
    enthalpy h = (rho e + p) / rho, contracted with the metric vector
    (jx,jy,jz) which is itself the mean of the two nodal metric vectors.
    Symmetric in (L,R) and consistent with the contravariant Euler flux for
    L == R.
    """
    rm = 0.5 * (rhoL + rhoR)
    um = 0.5 * (uL + uR)
    vm = 0.5 * (vL + vR)
    wm = 0.5 * (wL + wR)
    pm = 0.5 * (pL + pR)
    hm = 0.5 * (hL + hR)
    vn = um * jx + vm * jy + wm * jz
    m = rm * vn
    out[0] = m
    out[1] = m * um + pm * jx
    out[2] = m * vm + pm * jy
    out[3] = m * wm + pm * jz
    out[4] = m * hm


@njit(cache=True)
def pt_viscous_flux_dir(u, v, w, mu, lam,
                        dudx, dvdx, dwdx, dTdx,
                        dudy, dvdy, dwdy, dTdy,
                        dudz, dvdz, dwdz, dTdz,
                        nx, ny, nz, out):
    """Viscous flux (negated diffusion part of the conservation law) along a direction."""
    divu = dudx + dvdy + dwdz
    txx = mu * (2.0 * dudx - 2.0 / 3.0 * divu)
    tyy = mu * (2.0 * dvdy - 2.0 / 3.0 * divu)
    tzz = mu * (2.0 * dwdz - 2.0 / 3.0 * divu)
    txy = mu * (dudy + dvdx)
    txz = mu * (dudz + dwdx)
    tyz = mu * (dvdz + dwdy)
    qx = -lam * dTdx
    qy = -lam * dTdy
    qz = -lam * dTdz
    out[0] = 0.0
    out[1] = -(txx * nx + txy * ny + txz * nz)
    out[2] = -(txy * nx + tyy * ny + tyz * nz)
    out[3] = -(txz * nx + tyz * ny + tzz * nz)
    out[4] = (-(txx * u + txy * v + txz * w) + qx) * nx \
        + (-(txy * u + tyy * v + tyz * w) + qy) * ny \
        + (-(txz * u + tyz * v + tzz * w) + qz) * nz


def cons_to_prim(U: ConservedState, gas: GasProperties) -> PrimitiveState:
    """Primitive variables (rho, velocity, pressure, temperature) from the state."""
    if U.rho <= 0.0:
        raise AdmissibilityError(f"non-positive density in state {U}")
    vel = tuple(m / U.rho for m in U.mom)
    p = pt_pressure(U.rho, U.mom[0], U.mom[1], U.mom[2], U.rhoE, gas.gamma)
    if p <= 0.0:
        raise AdmissibilityError(f"non-positive pressure {p} in state {U}")
    return PrimitiveState(rho=U.rho, vel=vel, p=p, T=p / (U.rho * gas.R))


def prim_to_cons(P: PrimitiveState, gas: GasProperties) -> ConservedState:
    if P.rho <= 0.0 or P.p <= 0.0:
        raise AdmissibilityError(f"non-positive density or pressure in state {P}")
    mom = tuple(P.rho * v for v in P.vel)
    rhoE = P.p / (gas.gamma - 1.0) + 0.5 * P.rho * sum(v * v for v in P.vel)
    return ConservedState(rho=P.rho, mom=mom, rhoE=rhoE)


def viscosity(T: float, gas: GasProperties) -> float:
    if T <= 0.0:
        raise AdmissibilityError(f"non-positive temperature {T}")
    return pt_viscosity(T, gas.mu_ref, gas.T_ref, gas.viscosity_law)


def thermal_conductivity(mu: float, gas: GasProperties) -> float:
    if mu < 0.0:
        raise AdmissibilityError(f"negative viscosity {mu}")
    return pt_conductivity(mu, gas.gamma, gas.R, gas.Pr)


def euler_flux(P: PrimitiveState, U: ConservedState) -> np.ndarray:
    """Physical convective fluxes, one 5-vector per Cartesian direction; shape (3, 5)."""
    out = np.zeros((3, 5))
    for d, n in enumerate(np.eye(3)):
        pt_euler_flux_dir(P.rho, P.vel[0], P.vel[1], P.vel[2], P.p, U.rhoE,
                          n[0], n[1], n[2], out[d])
    return out


def viscous_flux(P: PrimitiveState, gradP: np.ndarray, gas: GasProperties) -> np.ndarray:
    """Viscous fluxes from the (3, 4) gradient of (u, v, w, T); shape (3, 5)."""
    g = np.asarray(gradP, dtype=np.float64)
    if g.shape != (3, N_LIFT):
        raise ValueError(f"gradient must have shape (3, {N_LIFT}), got {g.shape}")
    mu = viscosity(P.T, gas)
    lam = thermal_conductivity(mu, gas)
    out = np.zeros((3, 5))
    for d, n in enumerate(np.eye(3)):
        pt_viscous_flux_dir(P.vel[0], P.vel[1], P.vel[2], mu, lam,
                            g[0, 0], g[0, 1], g[0, 2], g[0, 3],
                            g[1, 0], g[1, 1], g[1, 2], g[1, 3],
                            g[2, 0], g[2, 1], g[2, 2], g[2, 3],
                            n[0], n[1], n[2], out[d])
    return out


def riemann_flux(PL: PrimitiveState, PR: PrimitiveState, n: np.ndarray,
                 gas: GasProperties, solver: str = "llf") -> np.ndarray:
    """Common interface flux f*(UL, UR, n) for a unit normal."""
    n = np.asarray(n, dtype=np.float64)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"normal must have unit length, got |n|={np.linalg.norm(n)}")
    for P in (PL, PR):
        if P.rho <= 0.0 or P.p <= 0.0:
            raise AdmissibilityError(f"inadmissible interface state {P}")
    UL = prim_to_cons(PL, gas)
    UR = prim_to_cons(PR, gas)
    out = np.zeros(5)
    pt_riemann(RIEMANN_SOLVERS[solver],
               PL.rho, PL.vel[0], PL.vel[1], PL.vel[2], PL.p, UL.rhoE,
               PR.rho, PR.vel[0], PR.vel[1], PR.vel[2], PR.p, UR.rhoE,
               n[0], n[1], n[2], gas.gamma, out)
    return out


def split_flux_twopoint(PL: PrimitiveState, PR: PrimitiveState,
                        metric: np.ndarray, gas: GasProperties) -> np.ndarray:
    """Symmetric two-point volume flux in the direction of a metric vector."""
    UL = prim_to_cons(PL, gas)
    UR = prim_to_cons(PR, gas)
    m = np.asarray(metric, dtype=np.float64)
    out = np.zeros(5)
    pt_split_flux_kep(PL.rho, PL.vel[0], PL.vel[1], PL.vel[2], PL.p,
                      (UL.rhoE + PL.p) / PL.rho,
                      PR.rho, PR.vel[0], PR.vel[1], PR.vel[2], PR.p,
                      (UR.rhoE + PR.p) / PR.rho,
                      m[0], m[1], m[2], out)
    return out


def br1_lifting_flux(PL: PrimitiveState, PR: PrimitiveState) -> np.ndarray:
    """Central (arithmetic mean) trace of the lifted variable set (u, v, w, T)."""
    vL = np.array([*PL.vel, PL.T])
    vR = np.array([*PR.vel, PR.T])
    return 0.5 * (vL + vR)

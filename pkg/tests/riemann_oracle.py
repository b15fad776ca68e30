"""Exact Riemann problem solution for a perfect gas (Toro's solver).

Independent oracle for the shock-tube acceptance: Newton iteration for the
star pressure, then similarity sampling of the full wave fan.
"""

import numpy as np


def _pressure_functions(p, rho, pk, gamma):
    a = np.sqrt(gamma * pk / rho)
    if p > pk:  # shock
        A = 2.0 / ((gamma + 1.0) * rho)
        B = (gamma - 1.0) / (gamma + 1.0) * pk
        f = (p - pk) * np.sqrt(A / (p + B))
        df = np.sqrt(A / (B + p)) * (1.0 - (p - pk) / (2.0 * (B + p)))
    else:  # rarefaction
        f = 2.0 * a / (gamma - 1.0) * ((p / pk) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
        df = 1.0 / (rho * a) * (p / pk) ** (-(gamma + 1.0) / (2.0 * gamma))
    return f, df


def star_state(left, right, gamma=1.4, tol=1e-12):
    """(p*, u*) of the Riemann problem with states (rho, u, p)."""
    rhoL, uL, pL = left
    rhoR, uR, pR = right
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)
    du = uR - uL
    p = max(0.5 * (pL + pR) - 0.125 * du * (rhoL + rhoR) * (aL + aR), 1e-8)
    for _ in range(100):
        fL, dfL = _pressure_functions(p, rhoL, pL, gamma)
        fR, dfR = _pressure_functions(p, rhoR, pR, gamma)
        dp = -(fL + fR + du) / (dfL + dfR)
        p_new = max(p + dp, 1e-10)
        if abs(p_new - p) < tol * max(p, p_new):
            p = p_new
            break
        p = p_new
    fL, _ = _pressure_functions(p, rhoL, pL, gamma)
    fR, _ = _pressure_functions(p, rhoR, pR, gamma)
    u = 0.5 * (uL + uR) + 0.5 * (fR - fL)
    return p, u


def sample(left, right, xi, gamma=1.4):
    """(rho, u, p) at similarity coordinate xi = x/t."""
    rhoL, uL, pL = left
    rhoR, uR, pR = right
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)
    ps, us = star_state(left, right, gamma)

    if xi <= us:  # left of the contact
        if ps > pL:  # left shock
            sL = uL - aL * np.sqrt((gamma + 1.0) / (2 * gamma) * ps / pL
                                   + (gamma - 1.0) / (2 * gamma))
            if xi <= sL:
                return rhoL, uL, pL
            rho = rhoL * ((ps / pL + (gamma - 1.0) / (gamma + 1.0))
                          / ((gamma - 1.0) / (gamma + 1.0) * ps / pL + 1.0))
            return rho, us, ps
        head = uL - aL
        asL = aL * (ps / pL) ** ((gamma - 1.0) / (2 * gamma))
        tail = us - asL
        if xi <= head:
            return rhoL, uL, pL
        if xi >= tail:
            return rhoL * (ps / pL) ** (1.0 / gamma), us, ps
        u = 2.0 / (gamma + 1.0) * (aL + (gamma - 1.0) / 2.0 * uL + xi)
        a = 2.0 / (gamma + 1.0) * (aL + (gamma - 1.0) / 2.0 * (uL - xi))
        rho = rhoL * (a / aL) ** (2.0 / (gamma - 1.0))
        return rho, u, rho * a * a / gamma
    if ps > pR:  # right shock
        sR = uR + aR * np.sqrt((gamma + 1.0) / (2 * gamma) * ps / pR
                               + (gamma - 1.0) / (2 * gamma))
        if xi >= sR:
            return rhoR, uR, pR
        rho = rhoR * ((ps / pR + (gamma - 1.0) / (gamma + 1.0))
                      / ((gamma - 1.0) / (gamma + 1.0) * ps / pR + 1.0))
        return rho, us, ps
    head = uR + aR
    asR = aR * (ps / pR) ** ((gamma - 1.0) / (2 * gamma))
    tail = us + asR
    if xi >= head:
        return rhoR, uR, pR
    if xi <= tail:
        return rhoR * (ps / pR) ** (1.0 / gamma), us, ps
    u = 2.0 / (gamma + 1.0) * (-aR + (gamma - 1.0) / 2.0 * uR + xi)
    a = 2.0 / (gamma + 1.0) * (aR - (gamma - 1.0) / 2.0 * (uR - xi))
    rho = rhoR * (a / aR) ** (2.0 / (gamma - 1.0))
    return rho, u, rho * a * a / gamma


def sod_density_profile(x, t, interface=0.5, gamma=1.4):
    """Exact Sod-tube density at positions x and time t."""
    left = (1.0, 0.0, 1.0)
    right = (0.125, 0.0, 0.1)
    out = np.empty_like(np.asarray(x, dtype=np.float64))
    for i, xv in enumerate(np.atleast_1d(x)):
        out.flat[i] = sample(left, right, (xv - interface) / t, gamma)[0]
    return out

"""One-dimensional spectral building blocks on Legendre-Gauss type nodes.

Everything a tensor-product spectral element kernel needs in 1-D: node sets,
quadrature weights, the strong/weak differentiation matrices, boundary
evaluation vectors and the nodal<->modal Legendre transform. All tables are
computed once and frozen.
"""

from dataclasses import dataclass, field

import numpy as np

GL = "GL"
LGL = "LGL"

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


def legendre(n: int, x):
    """Evaluate P_n and dP_n/dx via the three-term recurrence."""
    x = np.asarray(x, dtype=np.float64)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    # derivative from P_n and P_{n-1}; at the endpoints dP_n = (+-1)^{n+1} n(n+1)/2
    interior = np.abs(x) < 1.0
    denom = np.where(interior, x * x - 1.0, 1.0)
    dp = np.where(interior, n * (x * p - p_prev) / denom,
                  np.sign(x) ** (n + 1) * n * (n + 1) / 2.0)
    return p, dp


def _legendre_scalar(n, x):
    p, dp = legendre(n, np.array([x]))
    return p[0], dp[0]


def gauss_nodes(n_points: int):
    """Legendre-Gauss nodes/weights (roots of P_n), by Newton iteration."""
    n = n_points
    nodes = np.zeros(n)
    weights = np.zeros(n)
    for i in range(n):
        # Chebyshev initial guess, ascending order
        x = -np.cos(np.pi * (2 * i + 1) / (2 * n))
        for _ in range(_NEWTON_MAXIT):
            p, dp = _legendre_scalar(n, x)
            dx = -p / dp
            x += dx
            if abs(dx) < _NEWTON_TOL:
                break
        p, dp = _legendre_scalar(n, x)
        nodes[i] = x
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp)
    return nodes, weights


def lobatto_nodes(n_points: int):
    """Legendre-Gauss-Lobatto nodes/weights (endpoints plus roots of P'_{n-1})."""
    n = n_points
    N = n - 1
    nodes = np.zeros(n)
    weights = np.zeros(n)
    nodes[0], nodes[-1] = -1.0, 1.0
    for i in range(1, N):
        # interior roots of P'_N, bracketed by Chebyshev-Lobatto guesses
        x = -np.cos(np.pi * i / N)
        for _ in range(_NEWTON_MAXIT):
            # q = P'_N, q' from the Legendre ODE: (1-x^2) P''_N = 2x P'_N - N(N+1) P_N
            p, dp = _legendre_scalar(N, x)
            ddp = (2.0 * x * dp - N * (N + 1) * p) / (1.0 - x * x)
            dx = -dp / ddp
            x += dx
            if abs(dx) < _NEWTON_TOL:
                break
        nodes[i] = x
    for i in range(n):
        p, _ = _legendre_scalar(N, nodes[i])
        weights[i] = 2.0 / (N * (N + 1) * p * p)
    return nodes, weights


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    n = len(nodes)
    w = np.ones(n)
    for j in range(n):
        for k in range(n):
            if k != j:
                w[j] /= nodes[j] - nodes[k]
    return w


def lagrange_weights(nodes: np.ndarray, x: float) -> np.ndarray:
    """Values of all Lagrange polynomials l_i(x) for the given node set."""
    bw = barycentric_weights(nodes)
    diff = x - nodes
    exact = np.nonzero(np.abs(diff) < 1e-14)[0]
    out = np.zeros(len(nodes))
    if exact.size:
        out[exact[0]] = 1.0
        return out
    t = bw / diff
    return t / t.sum()


def interpolation_matrix(from_nodes: np.ndarray, to_points: np.ndarray) -> np.ndarray:
    """Matrix mapping nodal values on from_nodes to values at to_points."""
    return np.array([lagrange_weights(from_nodes, x) for x in np.atleast_1d(to_points)])


def differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    """Strong derivative matrix D_ij = l'_j(x_i)."""
    n = len(nodes)
    bw = barycentric_weights(nodes)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = bw[j] / bw[i] / (nodes[i] - nodes[j])
        D[i, i] = -np.sum(D[i, :])
    return D


@dataclass(frozen=True)
class Basis1D:
    """Immutable 1-D spectral element tables for polynomial degree N.

    Attributes
    ----------
    D : strong derivative matrix, (D u)_i = u'(xi_i) for nodal polynomials.
    Dhat : weak-form derivative matrix entering the volume integral.
    Dsplit : two-point volume matrix (2*D with the SBP boundary terms folded
        into the corner entries); only meaningful on LGL nodes.
    l_minus, l_plus : l_i(-1), l_i(+1) interpolation-to-face vectors.
    lhat_minus, lhat_plus : l_i(-+1)/omega_i surface quadrature vectors.
    vandermonde_modal : nodal -> Legendre-modal coefficient matrix.
    """

    N: int
    node_type: str
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray
    Dhat: np.ndarray
    Dsplit: np.ndarray
    l_minus: np.ndarray
    l_plus: np.ndarray
    lhat_minus: np.ndarray
    lhat_plus: np.ndarray
    vandermonde_modal: np.ndarray
    vandermonde_nodal: np.ndarray
    geom_nodes: np.ndarray = field(repr=False, default=None)
    geom_to_solution: np.ndarray = field(repr=False, default=None)

    @property
    def n_nodes(self) -> int:
        return self.N + 1


def build_basis(N: int, node_type: str = LGL) -> Basis1D:
    """Construct all 1-D tables for degree N on GL or LGL nodes."""
    if N < 1:
        raise ValueError(f"polynomial degree must be >= 1, got N={N}")
    if node_type == GL:
        nodes, weights = gauss_nodes(N + 1)
    elif node_type == LGL:
        nodes, weights = lobatto_nodes(N + 1)
    else:
        raise ValueError(f"unknown node type {node_type!r}, expected 'GL' or 'LGL'")

    D = differentiation_matrix(nodes)
    # weak form: Dhat_ij = -(w_j/w_i) * D_ji
    Dhat = -(weights[None, :] / weights[:, None]) * D.T
    # split (strong two-point) form: 2D with boundary closure absorbed in corners
    Dsplit = 2.0 * D
    Dsplit[0, 0] += 1.0 / weights[0]
    Dsplit[-1, -1] -= 1.0 / weights[-1]

    l_minus = lagrange_weights(nodes, -1.0)
    l_plus = lagrange_weights(nodes, 1.0)
    lhat_minus = l_minus / weights
    lhat_plus = l_plus / weights

    # nodal <-> modal Legendre transform
    vandermonde_nodal = np.zeros((N + 1, N + 1))
    for j in range(N + 1):
        p, _ = legendre(j, nodes)
        vandermonde_nodal[:, j] = p
    vandermonde_modal = np.linalg.inv(vandermonde_nodal)

    # geometry is always represented on LGL nodes so that element faces are
    # watertight; interpolation to the solution nodes is exact for degree <= N
    if node_type == LGL:
        geom_nodes = nodes.copy()
        geom_to_solution = np.eye(N + 1)
    else:
        geom_nodes, _ = lobatto_nodes(N + 1)
        geom_to_solution = interpolation_matrix(geom_nodes, nodes)

    b = Basis1D(
        N=N,
        node_type=node_type,
        nodes=nodes,
        weights=weights,
        D=D,
        Dhat=Dhat,
        Dsplit=Dsplit,
        l_minus=l_minus,
        l_plus=l_plus,
        lhat_minus=lhat_minus,
        lhat_plus=lhat_plus,
        vandermonde_modal=vandermonde_modal,
        vandermonde_nodal=vandermonde_nodal,
        geom_nodes=geom_nodes,
        geom_to_solution=geom_to_solution,
    )
    for arr in (b.nodes, b.weights, b.D, b.Dhat, b.Dsplit, b.l_minus, b.l_plus,
                b.lhat_minus, b.lhat_plus, b.vandermonde_modal, b.vandermonde_nodal,
                b.geom_nodes, b.geom_to_solution):
        arr.setflags(write=False)
    return b


def lagrange_eval(basis: Basis1D, i: int, x: float) -> float:
    """Evaluate the i-th Lagrange polynomial of the basis at a point."""
    if not 0 <= i <= basis.N:
        raise IndexError(f"Lagrange index {i} out of range for degree {basis.N}")
    return lagrange_weights(basis.nodes, x)[i]


def modal_transform(basis: Basis1D, nodal: np.ndarray) -> np.ndarray:
    """Nodal values -> Legendre modal coefficients (1-D)."""
    return basis.vandermonde_modal @ np.asarray(nodal, dtype=np.float64)


def nodal_transform(basis: Basis1D, modal: np.ndarray) -> np.ndarray:
    """Legendre modal coefficients -> nodal values (1-D)."""
    return basis.vandermonde_nodal @ np.asarray(modal, dtype=np.float64)

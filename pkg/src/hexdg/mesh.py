"""Hexahedral meshes: box generation, curving, curl-form metrics, partitioning.

Elements are stored along a Morton space-filling curve. Geometry is kept as
trilinear corner coordinates plus an optional smooth sinusoidal deformation;
`compute_metrics` samples the isoparametric mapping on LGL geometry nodes,
builds the contravariant metric vectors in curl form (which makes the discrete
metric identity hold to roundoff) and evaluates surface normals once per side
from the primary element.

Local side numbering: 0..5 = xi-, xi+, eta-, eta+, zeta-, zeta+. Face
coordinates (p, q) run along the cyclic tangential axes (d+1)%3, (d+2)%3 of
the normal axis d. Orientation codes relate the replica element's face
coordinates to the primary's storage order:

    0: (p, q) -> (p, q)          identity
    1: (p, q) -> (N-p, q)        flip first axis
    2: (p, q) -> (p, N-q)        flip second axis
    3: (p, q) -> (N-p, N-q)      flip both (180 degree rotation)

These four maps form the set closed under the conforming element relabelings
supported here (double axis flips, which keep J > 0); each is an involution,
so applying a code twice is the identity.
"""

from dataclasses import dataclass, field

import numpy as np

from .basis import Basis1D, differentiation_matrix

N_LOC_SIDES = 6
ORIENTATION_CODES = (0, 1, 2, 3)

# boundary tags used by the box generator: 1..6 = the six walls in locSide order
BC_NONE = 0


class MeshError(ValueError):
    pass


def morton_key(ix: int, iy: int, iz: int, nbits: int = 21) -> int:
    """Interleave grid indices, x least significant (x varies fastest)."""
    key = 0
    for t in range(nbits):
        key |= ((ix >> t) & 1) << (3 * t)
        key |= ((iy >> t) & 1) << (3 * t + 1)
        key |= ((iz >> t) & 1) << (3 * t + 2)
    return key


def loc_side_axes(loc: int):
    """(normal axis, is_plus, tangential axis p, tangential axis q)."""
    d = loc // 2
    return d, loc % 2 == 1, (d + 1) % 3, (d + 2) % 3


def orient_map(code: int, p: int, q: int, N: int):
    if code == 0:
        return p, q
    if code == 1:
        return N - p, q
    if code == 2:
        return p, N - q
    if code == 3:
        return N - p, N - q
    raise MeshError(f"invalid orientation code {code}")


def side_mapping(loc_side: int, orientation: int, p: int, q: int, N: int):
    """Volume index line influenced by face node (p, q) of a side.

    Face indices are given in the side's storage (primary) order; the
    orientation code is applied first to obtain the element-local tangential
    indices. Returns (indices, normal_axis, is_plus) where `indices` is an
    (N+1, 3) array of (i, j, k) volume indices along the normal axis.
    """
    if not (0 <= p <= N and 0 <= q <= N):
        raise MeshError(f"face index ({p}, {q}) out of range for N={N}")
    a, b = orient_map(orientation, p, q, N)
    d, plus, t1, t2 = loc_side_axes(loc_side)
    line = np.empty((N + 1, 3), dtype=np.int64)
    line[:, d] = np.arange(N + 1)
    line[:, t1] = a
    line[:, t2] = b
    return line, d, plus


@dataclass
class Partition:
    """Contiguous SFC element range owned by one rank."""

    rank: int
    lo: int
    hi: int
    # side ids on the partition boundary, keyed by neighbor rank, sorted by
    # global side id so both endpoints agree on the ordering a priori
    neighbors: dict

    @property
    def n_elems(self) -> int:
        return self.hi - self.lo


@dataclass
class Mesh:
    nelem: int
    corners: np.ndarray  # (nelem, 2, 2, 2, 3), indexed [c_zeta, c_eta, c_xi]
    extents: np.ndarray  # (3, 2)
    periodic: tuple
    counts: tuple
    grid_index: np.ndarray  # (nelem, 3)
    curve_amplitude: float

    n_sides: int
    side_elem_p: np.ndarray
    side_loc_p: np.ndarray
    side_elem_r: np.ndarray  # -1 for boundary sides
    side_loc_r: np.ndarray
    side_orient: np.ndarray
    side_bc: np.ndarray
    side_shift: np.ndarray  # (n_sides, 3) replica->primary translation

    elem_sides: np.ndarray  # (nelem, 6)
    elem_primary: np.ndarray  # (nelem, 6) bool

    # filled by compute_metrics
    basis: Basis1D = field(default=None, repr=False)
    geom: np.ndarray = field(default=None, repr=False)  # (nelem, g,g,g, 3)
    x: np.ndarray = field(default=None, repr=False)  # solver-node coordinates
    J: np.ndarray = field(default=None, repr=False)
    Ja: np.ndarray = field(default=None, repr=False)  # (nelem, 3, n,n,n, 3)
    face_normal: np.ndarray = field(default=None, repr=False)  # (nsides, n,n, 3)
    face_s: np.ndarray = field(default=None, repr=False)  # (nsides, n,n)

    @property
    def n_interior_sides(self) -> int:
        return int(np.sum(self.side_elem_r >= 0))

    @property
    def n_boundary_sides(self) -> int:
        return int(np.sum(self.side_elem_r < 0))


def _deformation(points: np.ndarray, amplitude: float, extents: np.ndarray) -> np.ndarray:
    if amplitude == 0.0:
        return points
    lo = extents[:, 0]
    L = extents[:, 1] - extents[:, 0]
    unit = (points - lo) / L
    bump = np.sin(2.0 * np.pi * unit[..., 0]) \
        * np.sin(2.0 * np.pi * unit[..., 1]) \
        * np.sin(2.0 * np.pi * unit[..., 2])
    return points + amplitude * bump[..., None] * L


def _face_corner_grid(corners_e: np.ndarray, loc: int) -> np.ndarray:
    """(2, 2, 3) corner coordinates of a local face, indexed [p, q]."""
    d, plus, t1, t2 = loc_side_axes(loc)
    out = np.empty((2, 2, 3))
    for cp in (0, 1):
        for cq in (0, 1):
            idx = [0, 0, 0]
            idx[d] = 1 if plus else 0
            idx[t1] = cp
            idx[t2] = cq
            out[cp, cq] = corners_e[idx[2], idx[1], idx[0]]
    return out


def _apply_orient_corners(grid: np.ndarray, code: int) -> np.ndarray:
    if code == 0:
        return grid
    if code == 1:
        return grid[::-1, :]
    if code == 2:
        return grid[:, ::-1]
    return grid[::-1, ::-1]


def _match_orientation(primary: np.ndarray, replica: np.ndarray, shift: np.ndarray,
                       tol: float = 1e-9):
    """Orientation code aligning a replica face-corner grid with the primary's."""
    target = replica + shift
    for code in ORIENTATION_CODES:
        if np.max(np.abs(primary - _apply_orient_corners(target, code))) < tol:
            return code
    return None


def generate_box_mesh(nx: int, ny: int, nz: int, extents, periodic) -> Mesh:
    """Cartesian hexahedral mesh on a box, elements ordered along a Morton curve.

    extents: three (lo, hi) intervals; periodic: three flags pairing the
    opposite walls of the respective direction.
    """
    counts = (int(nx), int(ny), int(nz))
    if min(counts) < 1:
        raise MeshError(f"element counts must be >= 1, got {counts}")
    extents = np.asarray(extents, dtype=np.float64).reshape(3, 2)
    if np.any(extents[:, 1] <= extents[:, 0]):
        raise MeshError("extents must be non-empty intervals")
    periodic = tuple(bool(p) for p in periodic)

    grid = [(ix, iy, iz) for iz in range(nz) for iy in range(ny) for ix in range(nx)]
    grid.sort(key=lambda g: morton_key(*g))
    nelem = len(grid)
    grid_index = np.array(grid, dtype=np.int64)
    elem_of = {g: e for e, g in enumerate(grid)}

    # corner coordinates, indexed [c_zeta, c_eta, c_xi]
    edges = [np.linspace(extents[d, 0], extents[d, 1], counts[d] + 1) for d in range(3)]
    corners = np.empty((nelem, 2, 2, 2, 3))
    for e, (ix, iy, iz) in enumerate(grid):
        for c2 in (0, 1):
            for c1 in (0, 1):
                for c0 in (0, 1):
                    corners[e, c2, c1, c0] = (edges[0][ix + c0],
                                              edges[1][iy + c1],
                                              edges[2][iz + c2])

    L = extents[:, 1] - extents[:, 0]
    side_elem_p, side_loc_p = [], []
    side_elem_r, side_loc_r = [], []
    side_orient, side_bc, side_shift = [], [], []

    def add_side(ep, lp, er, lr, bc, shift):
        side_elem_p.append(ep)
        side_loc_p.append(lp)
        side_elem_r.append(er)
        side_loc_r.append(lr)
        side_orient.append(0)
        side_bc.append(bc)
        side_shift.append(shift)

    for e, (ix, iy, iz) in enumerate(grid):
        g = (ix, iy, iz)
        for d in range(3):
            # plus face: owns the side as primary
            nbr = list(g)
            nbr[d] += 1
            shift = np.zeros(3)
            if nbr[d] == counts[d]:
                if periodic[d]:
                    nbr[d] = 0
                    shift[d] = L[d]  # replica (minus face) + L lands on primary
                    add_side(e, 2 * d + 1, elem_of[tuple(nbr)], 2 * d, BC_NONE, shift)
                else:
                    add_side(e, 2 * d + 1, -1, -1, 2 * d + 2, shift)
            else:
                add_side(e, 2 * d + 1, elem_of[tuple(nbr)], 2 * d, BC_NONE, shift)
            # minus face at a non-periodic wall: boundary side
            if g[d] == 0 and not periodic[d]:
                add_side(e, 2 * d, -1, -1, 2 * d + 1, np.zeros(3))

    mesh = Mesh(
        nelem=nelem,
        corners=corners,
        extents=extents,
        periodic=periodic,
        counts=counts,
        grid_index=grid_index,
        curve_amplitude=0.0,
        n_sides=len(side_elem_p),
        side_elem_p=np.array(side_elem_p, dtype=np.int64),
        side_loc_p=np.array(side_loc_p, dtype=np.int64),
        side_elem_r=np.array(side_elem_r, dtype=np.int64),
        side_loc_r=np.array(side_loc_r, dtype=np.int64),
        side_orient=np.array(side_orient, dtype=np.int64),
        side_bc=np.array(side_bc, dtype=np.int64),
        side_shift=np.array(side_shift, dtype=np.float64),
        elem_sides=None,
        elem_primary=None,
    )
    _rebuild_elem_side_table(mesh)
    return mesh


def _rebuild_elem_side_table(mesh: Mesh):
    elem_sides = np.full((mesh.nelem, N_LOC_SIDES), -1, dtype=np.int64)
    elem_primary = np.zeros((mesh.nelem, N_LOC_SIDES), dtype=bool)
    for s in range(mesh.n_sides):
        ep, lp = mesh.side_elem_p[s], mesh.side_loc_p[s]
        if elem_sides[ep, lp] != -1:
            raise MeshError(f"element {ep} locSide {lp} referenced by two sides")
        elem_sides[ep, lp] = s
        elem_primary[ep, lp] = True
        er, lr = mesh.side_elem_r[s], mesh.side_loc_r[s]
        if er >= 0:
            if elem_sides[er, lr] != -1:
                raise MeshError(f"element {er} locSide {lr} referenced by two sides")
            elem_sides[er, lr] = s
    if np.any(elem_sides < 0):
        bad = np.argwhere(elem_sides < 0)[0]
        raise MeshError(f"element {bad[0]} locSide {bad[1]} has no side")
    mesh.elem_sides = elem_sides
    mesh.elem_primary = elem_primary


def curve_mesh(mesh: Mesh, amplitude: float) -> Mesh:
    """Mesh with a smooth sinusoidal coordinate perturbation applied.

    The displacement vanishes on the domain walls and is periodic inside, so
    connectivity and watertightness are unaffected. Fold-over (J <= 0) is
    detected when metrics are computed.
    """
    if mesh.corners is None:
        raise MeshError("cannot curve a mesh loaded from a cache file")
    import copy

    out = copy.copy(mesh)
    out.curve_amplitude = float(amplitude)
    out.basis = out.geom = out.x = out.J = out.Ja = None
    out.face_normal = out.face_s = None
    return out


def permute_element_axes(mesh: Mesh, e: int, kind: str) -> Mesh:
    """Reverse two reference axes of one element (orientation-preserving).

    Used to build meshes exercising the nontrivial orientation codes: a
    double axis flip keeps J > 0 and induces codes 1, 2 and 3 on the three
    face pairs of the element. kinds: 'flip_xy', 'flip_xz', 'flip_yz'.
    """
    if mesh.corners is None:
        raise MeshError("cannot permute a mesh loaded from a cache file")
    if mesh.side_shift is None:
        raise MeshError("mesh lacks periodic shift data")
    for loc in range(N_LOC_SIDES):
        s = mesh.elem_sides[e, loc]
        if mesh.side_elem_p[s] == mesh.side_elem_r[s]:
            raise MeshError(f"element {e} pairs with itself; cannot permute")

    import copy

    out = copy.copy(mesh)
    out.corners = mesh.corners.copy()
    out.side_loc_p = mesh.side_loc_p.copy()
    out.side_loc_r = mesh.side_loc_r.copy()
    out.side_orient = mesh.side_orient.copy()
    out.basis = out.geom = out.x = out.J = out.Ja = None
    out.face_normal = out.face_s = None

    c = out.corners[e]
    if kind == "flip_xy":
        c = c[:, ::-1, ::-1].copy()
    elif kind == "flip_xz":
        c = c[::-1, :, ::-1].copy()
    elif kind == "flip_yz":
        c = c[::-1, ::-1, :].copy()
    else:
        raise MeshError(f"unknown permutation kind {kind!r}")
    out.corners[e] = c

    # re-derive locSides and orientations of the element's sides geometrically
    for s in range(out.n_sides):
        if out.side_elem_p[s] != e and out.side_elem_r[s] != e:
            continue
        e_is_primary = out.side_elem_p[s] == e
        other = out.side_elem_r[s] if e_is_primary else out.side_elem_p[s]
        other_loc = out.side_loc_r[s] if e_is_primary else out.side_loc_p[s]
        shift = out.side_shift[s]
        if other < 0:
            # boundary side: find the face whose corners match the old face
            old_loc = mesh.side_loc_p[s]
            old_grid = _face_corner_grid(mesh.corners[e], old_loc)
            found = False
            for loc in range(N_LOC_SIDES):
                code = _match_orientation(old_grid, _face_corner_grid(c, loc),
                                          np.zeros(3))
                if code is not None:
                    out.side_loc_p[s] = loc
                    found = True
                    break
            if not found:
                raise MeshError(f"lost boundary face of element {e}")
            continue
        other_grid = _face_corner_grid(out.corners[other], other_loc)
        found = False
        for loc in range(N_LOC_SIDES):
            mine = _face_corner_grid(c, loc)
            if e_is_primary:
                code = _match_orientation(mine, other_grid, shift)
            else:
                code = _match_orientation(other_grid, mine, shift)
            if code is not None:
                if e_is_primary:
                    out.side_loc_p[s] = loc
                else:
                    out.side_loc_r[s] = loc
                out.side_orient[s] = code
                found = True
                break
        if not found:
            raise MeshError(
                f"no supported orientation for element {e} against {other}")
    _rebuild_elem_side_table(out)
    return out


def _axis_derivative(Dg: np.ndarray, A: np.ndarray, axis: int) -> np.ndarray:
    """Apply a 1-D derivative matrix along reference axis 0, 1 or 2 of (e,k,j,i,...)."""
    if axis == 0:
        return np.einsum("ia,ekja...->ekji...", Dg, A)
    if axis == 1:
        return np.einsum("ja,ekai...->ekji...", Dg, A)
    return np.einsum("ka,eaji...->ekji...", Dg, A)


def _interp_axis(T: np.ndarray, A: np.ndarray, axis: int) -> np.ndarray:
    return _axis_derivative(T, A, axis)  # same contraction pattern


def extract_face(Q: np.ndarray, loc: int, lvec_minus: np.ndarray,
                 lvec_plus: np.ndarray) -> np.ndarray:
    """Evaluate a per-element nodal field (k,j,i,...) on one local face.

    Returns the face array indexed [q, p] in the cyclic tangential convention.
    """
    d, plus, t1, t2 = loc_side_axes(loc)
    lvec = lvec_plus if plus else lvec_minus
    if d == 0:
        out = np.einsum("a,kja...->kj...", lvec, Q)  # [k, j] = [q, p]
    elif d == 1:
        out = np.einsum("a,kai...->ki...", lvec, Q)  # [k, i] = [p, q]
        out = np.swapaxes(out, 0, 1)
    else:
        out = np.einsum("a,aji...->ji...", lvec, Q)  # [j, i] = [q, p]
    return out


def compute_metrics(mesh: Mesh, basis: Basis1D):
    """Sample the mapping, build curl-form metrics and per-side surface data.

    Attaches geometry nodes, solver-node coordinates, J, the contravariant
    vectors Ja^i and per-side (normal, surface element) to the mesh; returns
    (J, Ja).
    """
    n1 = basis.N + 1
    g = basis.geom_nodes
    # trilinear blend of the corner coordinates onto LGL geometry nodes
    if mesh.corners is not None:
        B = np.stack([(1.0 - g) / 2.0, (1.0 + g) / 2.0], axis=1)  # (n1, 2)
        X = np.einsum("ka,jb,ic,eabc...->ekji...", B, B, B, mesh.corners)
        X = _deformation(X, mesh.curve_amplitude, mesh.extents)
    else:
        if mesh.geom.shape[1] != n1:
            raise MeshError(
                f"cached mesh has degree {mesh.geom.shape[1] - 1}, basis has N={basis.N}")
        X = mesh.geom

    Dg = differentiation_matrix(g)
    dX = np.stack([_axis_derivative(Dg, X, a) for a in range(3)], axis=1)
    # dX[e, a, k, j, i, c] = d x_c / d xi_a on geometry nodes

    # curl form: for Cartesian component n with (n, m, l) cyclic,
    #   Ja^i_n = -[curl_xi (x_l * grad_xi x_m)]_i
    Ja_g = np.empty_like(dX)  # [e, i, k, j, i_node..., n]
    for n in range(3):
        m, l = (n + 1) % 3, (n + 2) % 3
        A = X[..., l][:, None, ...] * dX[..., m]  # A[e, a, k, j, i]
        curl0 = _axis_derivative(Dg, A[:, 2], 1) - _axis_derivative(Dg, A[:, 1], 2)
        curl1 = _axis_derivative(Dg, A[:, 0], 2) - _axis_derivative(Dg, A[:, 2], 0)
        curl2 = _axis_derivative(Dg, A[:, 1], 0) - _axis_derivative(Dg, A[:, 0], 1)
        Ja_g[:, 0, ..., n] = -curl0
        Ja_g[:, 1, ..., n] = -curl1
        Ja_g[:, 2, ..., n] = -curl2

    # exact interpolation of the degree-N metric polynomials to solver nodes
    T = basis.geom_to_solution
    def to_solver(A):
        for a in range(3):
            A = _interp_axis(T, A, a)
        return A

    x_sol = to_solver(X)
    dX_sol = np.stack([to_solver(dX[:, a]) for a in range(3)], axis=1)
    Ja = np.stack([to_solver(Ja_g[:, i]) for i in range(3)], axis=1)
    # J = det(d x / d xi) pointwise from the interpolated Jacobian matrix
    Jmat = np.stack([dX_sol[:, a] for a in range(3)], axis=-2)  # (..., a, c)
    J = np.linalg.det(Jmat)
    if np.any(J <= 0.0):
        bad = int(np.argwhere(np.any(J.reshape(mesh.nelem, -1) <= 0.0, axis=1))[0, 0])
        raise MeshError(f"mapping fold-over: J <= 0 in element {bad}")

    # per-side surface metrics from the primary element
    face_normal = np.zeros((mesh.n_sides, n1, n1, 3))
    face_s = np.zeros((mesh.n_sides, n1, n1))
    for s in range(mesh.n_sides):
        ep, lp = mesh.side_elem_p[s], mesh.side_loc_p[s]
        d, plus, _, _ = loc_side_axes(lp)
        Jad = extract_face(Ja[ep, d], lp, basis.l_minus, basis.l_plus)
        sign = 1.0 if plus else -1.0
        Ns = sign * Jad  # outward for the primary element, [q, p, 3]
        snorm = np.sqrt(np.sum(Ns * Ns, axis=-1))
        face_normal[s] = Ns / snorm[..., None]
        face_s[s] = snorm

    mesh.basis = basis
    mesh.geom = X
    mesh.x = x_sol
    mesh.J = J
    mesh.Ja = Ja
    mesh.face_normal = face_normal
    mesh.face_s = face_s
    return J, Ja


def metric_identity_residual(mesh: Mesh) -> float:
    """Max-norm of the discrete metric divergence sum_i d(Ja^i)/d xi_i."""
    if mesh.Ja is None:
        raise MeshError("compute_metrics must run first")
    D = mesh.basis.D
    res = sum(_axis_derivative(D, mesh.Ja[:, a], a) for a in range(3))
    return float(np.max(np.abs(res)))


def partition_sfc(mesh: Mesh, n_ranks: int):
    """Split the SFC-ordered elements into contiguous, balanced rank ranges."""
    if n_ranks < 1:
        raise MeshError(f"need at least one rank, got {n_ranks}")
    if n_ranks > mesh.nelem:
        raise MeshError(f"{n_ranks} ranks exceed {mesh.nelem} elements")
    base, rem = divmod(mesh.nelem, n_ranks)
    bounds = [0]
    for r in range(n_ranks):
        bounds.append(bounds[-1] + base + (1 if r < rem else 0))
    elem_rank = np.empty(mesh.nelem, dtype=np.int64)
    for r in range(n_ranks):
        elem_rank[bounds[r]:bounds[r + 1]] = r

    partitions = []
    for r in range(n_ranks):
        neighbors = {}
        for s in range(mesh.n_sides):
            er = mesh.side_elem_r[s]
            if er < 0:
                continue
            rp = elem_rank[mesh.side_elem_p[s]]
            rr = elem_rank[er]
            if rp == rr:
                continue
            if rp == r:
                neighbors.setdefault(int(rr), []).append(s)
            elif rr == r:
                neighbors.setdefault(int(rp), []).append(s)
        for k in neighbors:
            neighbors[k] = np.array(sorted(neighbors[k]), dtype=np.int64)
        partitions.append(Partition(rank=r, lo=bounds[r], hi=bounds[r + 1],
                                    neighbors=neighbors))
    return partitions


# ---------------------------------------------------------------------------
# binary mesh cache ("HDGM")

_MAGIC = b"HDGM"
_FORMAT_VERSION = 1
_NODE_TYPE_IDS = {"LGL": 0, "GL": 1}


def write_mesh_cache(mesh: Mesh, basis: Basis1D, path):
    """Write sampled geometry nodes and connectivity, little-endian binary."""
    if mesh.geom is None:
        compute_metrics(mesh, basis)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        header = np.array([_FORMAT_VERSION, basis.N, mesh.nelem,
                           _NODE_TYPE_IDS["LGL"], mesh.n_sides], dtype="<u4")
        fh.write(header.tobytes())
        fh.write(mesh.geom.astype("<f8").tobytes())
        conn = np.empty((mesh.n_sides, 6), dtype="<i4")
        conn[:, 0] = mesh.side_elem_p
        conn[:, 1] = mesh.side_loc_p
        conn[:, 2] = mesh.side_elem_r
        conn[:, 3] = mesh.side_loc_r
        conn[:, 4] = mesh.side_orient
        conn[:, 5] = mesh.side_bc
        fh.write(conn.tobytes())


def load_mesh_cache(path) -> Mesh:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise MeshError(f"not a mesh cache file (magic {magic!r})")
        version, N, nelem, node_type, n_sides = np.frombuffer(fh.read(20), dtype="<u4")
        if version != _FORMAT_VERSION:
            raise MeshError(f"unsupported mesh cache version {version}")
        if node_type != _NODE_TYPE_IDS["LGL"]:
            raise MeshError(f"unsupported geometry node type id {node_type}")
        n1 = int(N) + 1
        count = int(nelem) * n1 ** 3 * 3
        geom = np.frombuffer(fh.read(count * 8), dtype="<f8").reshape(
            int(nelem), n1, n1, n1, 3).astype(np.float64)
        conn = np.frombuffer(fh.read(int(n_sides) * 6 * 4), dtype="<i4").reshape(
            int(n_sides), 6).astype(np.int64)

    mesh = Mesh(
        nelem=int(nelem),
        corners=None,
        extents=np.array([[np.min(geom[..., d]), np.max(geom[..., d])] for d in range(3)]),
        periodic=(False, False, False),
        counts=(0, 0, 0),
        grid_index=np.zeros((int(nelem), 3), dtype=np.int64),
        curve_amplitude=0.0,
        n_sides=int(n_sides),
        side_elem_p=conn[:, 0].copy(),
        side_loc_p=conn[:, 1].copy(),
        side_elem_r=conn[:, 2].copy(),
        side_loc_r=conn[:, 3].copy(),
        side_orient=conn[:, 4].copy(),
        side_bc=conn[:, 5].copy(),
        side_shift=np.zeros((int(n_sides), 3)),
        elem_sides=None,
        elem_primary=None,
    )
    mesh.geom = geom
    _rebuild_elem_side_table(mesh)
    return mesh

import numpy as np
import pytest

from hexdg.basis import GL, LGL, build_basis
from hexdg.mesh import (MeshError, compute_metrics, curve_mesh, extract_face,
                        generate_box_mesh, load_mesh_cache, loc_side_axes,
                        metric_identity_residual, morton_key, orient_map,
                        partition_sfc, permute_element_axes, side_mapping,
                        write_mesh_cache)

UNIT = [(-1.0, 1.0)] * 3


def box(nx, ny, nz, periodic=(True, True, True), extents=UNIT):
    return generate_box_mesh(nx, ny, nz, extents, periodic)


def test_element_count_4x4x2():
    assert box(4, 4, 2).nelem == 32


def test_single_periodic_element_self_pairs():
    m = box(1, 1, 1)
    assert m.nelem == 1
    assert m.n_sides == 3
    assert np.all(m.side_elem_p == 0) and np.all(m.side_elem_r == 0)
    # every locSide of the element is covered
    assert np.all(m.elem_sides[0] >= 0)


def test_2x1x1_nonperiodic_x_side_counts():
    m = box(2, 1, 1, periodic=(False, True, True))
    interior = np.sum(m.side_elem_r >= 0)
    boundary = np.sum(m.side_elem_r < 0)
    # x faces: 1 interior + 2 walls; y,z periodic pairs are interior
    assert m.nelem == 2
    assert interior == 1 + 4
    assert boundary == 2
    m = box(2, 1, 1, periodic=(False, False, False))
    assert np.sum(m.side_elem_r >= 0) == 1
    assert np.sum(m.side_elem_r < 0) == 10


def test_morton_visit_order():
    m = box(2, 2, 2)
    expect = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0),
              (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    assert [tuple(g) for g in m.grid_index] == expect
    assert morton_key(1, 1, 1) == 7


def test_zero_counts_rejected():
    with pytest.raises(MeshError):
        box(0, 1, 1)


def test_identity_mapping_metrics():
    m = box(1, 1, 1)
    b = build_basis(3, LGL)
    J, Ja = compute_metrics(m, b)
    assert np.max(np.abs(J - 1.0)) < 1e-13
    for i in range(3):
        expect = np.zeros(3)
        expect[i] = 1.0
        assert np.max(np.abs(Ja[:, i] - expect)) < 1e-13


def test_affine_stretch_metrics():
    m = generate_box_mesh(1, 1, 1, [(-2.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)],
                          (True, True, True))
    b = build_basis(2, LGL)
    J, Ja = compute_metrics(m, b)
    assert np.max(np.abs(J - 2.0)) < 1e-13
    assert np.max(np.abs(Ja[:, 0] - np.array([1.0, 0.0, 0.0]))) < 1e-13
    assert np.max(np.abs(Ja[:, 1] - np.array([0.0, 2.0, 0.0]))) < 1e-13
    assert np.max(np.abs(Ja[:, 2] - np.array([0.0, 0.0, 2.0]))) < 1e-13


@pytest.mark.parametrize("node_type", [GL, LGL])
def test_curved_mesh_metric_identity(node_type):
    m = curve_mesh(box(4, 4, 4), 0.1)
    b = build_basis(4, node_type)
    J, _ = compute_metrics(m, b)
    assert np.all(J > 0.0)
    assert metric_identity_residual(m) < 1e-12


def test_curve_amplitude_zero_is_identity():
    m0 = box(3, 3, 3)
    b = build_basis(3, LGL)
    compute_metrics(m0, b)
    m1 = curve_mesh(box(3, 3, 3), 0.0)
    compute_metrics(m1, b)
    assert np.array_equal(m0.geom, m1.geom)


def test_excessive_curve_folds_over():
    m = curve_mesh(box(4, 4, 4), 0.5)
    with pytest.raises(MeshError, match="fold-over"):
        compute_metrics(m, build_basis(3, LGL))


def replica_face_normal(mesh, s):
    """Outward normal/surface element of the replica, in primary ordering."""
    b = mesh.basis
    er, lr = mesh.side_elem_r[s], mesh.side_loc_r[s]
    d, plus, _, _ = loc_side_axes(lr)
    Jad = extract_face(mesh.Ja[er, d], lr, b.l_minus, b.l_plus)
    Ns = (1.0 if plus else -1.0) * Jad
    # reorder replica face storage [q, p] into primary storage via the code
    N1 = b.N + 1
    out = np.empty_like(Ns)
    for p in range(N1):
        for q in range(N1):
            a, bb = orient_map(mesh.side_orient[s], p, q, b.N)
            out[q, p] = Ns[bb, a]
    snorm = np.sqrt(np.sum(out * out, axis=-1))
    return out / snorm[..., None], snorm


@pytest.mark.parametrize("node_type", [GL, LGL])
def test_primary_replica_normals_antiparallel(node_type):
    m = curve_mesh(box(3, 3, 3), 0.08)
    compute_metrics(m, build_basis(3, node_type))
    for s in range(m.n_sides):
        if m.side_elem_r[s] < 0:
            continue
        n_r, s_r = replica_face_normal(m, s)
        assert np.max(np.abs(m.face_normal[s] + n_r)) < 1e-13
        assert np.max(np.abs(m.face_s[s] - s_r)) < 1e-13 * np.max(m.face_s[s])


def test_partition_even_split():
    m = box(4, 4, 2)
    parts = partition_sfc(m, 4)
    assert [p.n_elems for p in parts] == [8, 8, 8, 8]
    covered = sorted(e for p in parts for e in range(p.lo, p.hi))
    assert covered == list(range(32))


def test_partition_uneven_and_bounds():
    m = box(3, 3, 3)
    parts = partition_sfc(m, 4)
    assert sorted(p.n_elems for p in parts) == [6, 7, 7, 7]
    with pytest.raises(MeshError):
        partition_sfc(m, 28)


def test_partition_neighbor_lists_symmetric():
    m = box(4, 4, 4)
    parts = partition_sfc(m, 4)
    for p in parts:
        for r, sides in p.neighbors.items():
            other = parts[r].neighbors[p.rank]
            assert np.array_equal(sides, other)
            assert np.all(np.diff(sides) > 0)


def test_partition_deterministic():
    a = partition_sfc(box(4, 4, 2), 3)
    b = partition_sfc(box(4, 4, 2), 3)
    assert all(pa.lo == pb.lo and pa.hi == pb.hi for pa, pb in zip(a, b))


def test_side_mapping_identity_orientation():
    line, d, plus = side_mapping(0, 0, 1, 2, 3)
    assert d == 0 and not plus
    assert np.all(line[:, 0] == np.arange(4))
    assert np.all(line[:, 1] == 1) and np.all(line[:, 2] == 2)


def test_orientation_maps_are_involutions():
    N = 3
    for code in range(4):
        for p in range(N + 1):
            for q in range(N + 1):
                a, b = orient_map(code, p, q, N)
                assert orient_map(code, a, b, N) == (p, q)


def test_side_mapping_bijection_all_cases():
    N = 3
    for loc in range(6):
        for code in range(4):
            seen = set()
            for p in range(N + 1):
                for q in range(N + 1):
                    line, d, _ = side_mapping(loc, code, p, q, N)
                    t = tuple(line[0][ax] for ax in range(3) if ax != d)
                    seen.add(t)
            assert len(seen) == (N + 1) ** 2


@pytest.mark.parametrize("kind", ["flip_xy", "flip_xz", "flip_yz"])
def test_permuted_element_orientation_codes(kind):
    # a double axis flip produces all three nontrivial codes around one element
    m = permute_element_axes(box(3, 3, 3), 13, kind)
    codes = set()
    for s in range(m.n_sides):
        if 13 in (m.side_elem_p[s], m.side_elem_r[s]):
            codes.add(int(m.side_orient[s]))
    assert codes == {1, 2, 3}
    # mesh still consistent: metrics and the identity still hold
    compute_metrics(m, build_basis(3, LGL))
    assert metric_identity_residual(m) < 1e-12


def test_permuted_element_normals_still_match():
    m = curve_mesh(permute_element_axes(box(3, 3, 3), 13, "flip_yz"), 0.05)
    compute_metrics(m, build_basis(2, LGL))
    for s in range(m.n_sides):
        if m.side_elem_r[s] < 0:
            continue
        n_r, s_r = replica_face_normal(m, s)
        assert np.max(np.abs(m.face_normal[s] + n_r)) < 1e-13


def test_mesh_cache_round_trip(tmp_path):
    m = curve_mesh(box(2, 3, 2, periodic=(True, False, True)), 0.05)
    b = build_basis(3, LGL)
    compute_metrics(m, b)
    path = tmp_path / "mesh.hdgm"
    write_mesh_cache(m, b, path)
    m2 = load_mesh_cache(path)
    assert m2.nelem == m.nelem
    assert np.array_equal(m2.geom, m.geom)
    assert np.array_equal(m2.side_elem_p, m.side_elem_p)
    assert np.array_equal(m2.side_loc_r, m.side_loc_r)
    assert np.array_equal(m2.side_orient, m.side_orient)
    assert np.array_equal(m2.side_bc, m.side_bc)
    # metrics recomputed from cached nodes agree
    J2, Ja2 = compute_metrics(m2, b)
    assert np.allclose(J2, m.J, atol=1e-14)
    assert np.allclose(Ja2, m.Ja, atol=1e-14)


def test_mesh_cache_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.hdgm"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(MeshError, match="magic"):
        load_mesh_cache(path)


def test_run_from_mesh_cache_matches_direct(tmp_path):
    # a cached mesh drives the solver to bitwise-identical results
    from hexdg.config import RunConfig
    from hexdg.parallel import run_distributed

    m = curve_mesh(box(2, 2, 2), 0.05)
    b = build_basis(3, LGL)
    compute_metrics(m, b)
    path = tmp_path / "box.hdgm"
    write_mesh_cache(m, b, path)
    common = dict(testcase="freestream", n=3, nodetype="LGL", operator="split",
                  tend=1e9, maxsteps=3, analyzeinterval=0)
    direct = run_distributed(RunConfig(meshx=2, meshy=2, meshz=2,
                                       x0=-1.0, x1=1.0, y0=-1.0, y1=1.0,
                                       z0=-1.0, z1=1.0, curveamplitude=0.05,
                                       **common))
    cached = run_distributed(RunConfig(meshfile=str(path), **common))
    assert np.array_equal(direct.U, cached.U)

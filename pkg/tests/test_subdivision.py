"""Refinement rules, basic-function tables, curve evaluation, interpolation operator."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subdivseg.subdivision import (
    ControlPolygon,
    CubicBSpline,
    FourPoint,
    OMEGA_C1_LIMIT,
    build_basic_table,
    evaluate_curve,
    evaluation_weights,
    interpolation_matrix,
    interpolation_operator,
    refine_once,
    scheme_from_name,
)

FP = FourPoint()
BS = CubicBSpline()


def delta(n, at=0):
    v = np.zeros(n)
    v[at] = 1.0
    return v


# --- refine_once -------------------------------------------------------------


def test_fourpoint_refine_delta_by_hand():
    # one hand application of the odd rule to delta data:
    # new point between 0 and 1 is (w + 1/2)*1 = 9/16, between 1 and 2 is -w
    out = refine_once(delta(8), FP)
    assert out[0] == 1.0
    assert out[1] == 9.0 / 16.0
    assert out[-1] == 9.0 / 16.0
    assert out[3] == -1.0 / 16.0
    assert out[2] == 0.0  # old vertices are kept verbatim


def test_bspline_refine_delta_by_hand():
    out = refine_once(delta(8), BS)
    assert out[0] == 6.0 / 8.0
    assert out[1] == 0.5
    assert out[-1] == 0.5
    assert out[2] == 1.0 / 8.0


def test_refine_doubles_length_2d():
    pts = np.random.default_rng(0).normal(size=(6, 2))
    for scheme in (FP, BS):
        out = refine_once(pts, scheme)
        assert out.shape == (12, 2)


@given(c=st.floats(-1e6, 1e6, allow_nan=False), n=st.integers(4, 12))
def test_refine_constant_stays_constant(c, n):
    # masks sum to one, so affinity forces constants to be fixed points
    pts = np.full(n, c)
    for scheme in (FP, BS):
        out = refine_once(pts, scheme)
        assert np.allclose(out, c, rtol=0, atol=1e-9 * max(1.0, abs(c)))


def test_refine_rejects_short_and_open_polygons():
    with pytest.raises(ValueError):
        refine_once(np.zeros((3, 2)), FP)
    with pytest.raises(ValueError):
        refine_once(np.zeros((2, 2)), BS)
    with pytest.raises(ValueError):
        refine_once(np.zeros((8, 2)), FP, closed=False)


def test_omega_validation():
    with pytest.raises(ValueError):
        FourPoint(0.0)
    with pytest.raises(ValueError):
        FourPoint(OMEGA_C1_LIMIT)
    with pytest.raises(ValueError):
        FourPoint(-0.05)
    FourPoint(0.1)  # inside the open interval


# --- basic-function tables ----------------------------------------------------


def test_fourpoint_table_values():
    t = build_basic_table(FP, depth=4)
    # interpolation: delta at integers, exactly
    for i in range(-3, 4):
        assert t.at(i * 16) == (1.0 if i == 0 else 0.0)
    assert t.at(8) == 9.0 / 16.0  # phi(1/2)
    assert t.at(24) == -1.0 / 16.0  # phi(3/2)
    assert t.at(-8) == 9.0 / 16.0  # symmetry


def test_bspline_table_values():
    t = build_basic_table(BS, depth=4)
    assert abs(t.at(0) - 2.0 / 3.0) <= 1e-15
    assert abs(t.at(16) - 1.0 / 6.0) <= 1e-15
    assert abs(t.at(-16) - 1.0 / 6.0) <= 1e-15
    assert t.at(32) == 0.0
    assert t.at(5000) == 0.0  # out of support entirely


def test_fourpoint_derivative_table_values():
    # derivative of the four-point basic function at integers: known exact values
    t = build_basic_table(FP, depth=4)
    assert abs(t.derivative_at(0)) <= 1e-15
    assert abs(t.derivative_at(16) - (-2.0 / 3.0)) <= 1e-14
    assert abs(t.derivative_at(-16) - (2.0 / 3.0)) <= 1e-14
    assert abs(t.derivative_at(32) - (1.0 / 12.0)) <= 1e-14


def test_bspline_derivative_table_values():
    t = build_basic_table(BS, depth=4)
    assert abs(t.derivative_at(0)) <= 1e-15
    assert abs(t.derivative_at(16) - (-0.5)) <= 1e-15
    assert abs(t.derivative_at(-16) - 0.5) <= 1e-15


@pytest.mark.parametrize("scheme", [FP, BS], ids=["four-point", "cubic-bspline"])
@pytest.mark.parametrize("depth", [1, 2, 4, 5])
def test_partition_of_unity(scheme, depth):
    t = build_basic_table(scheme, depth)
    step = 2**depth
    span = scheme.support * step
    for a in range(step):  # all dyadic residues in [0, 1)
        total = sum(
            t.phi[a + j * step + span]
            for j in range(-scheme.support, scheme.support + 1)
            if 0 <= a + j * step + span < len(t.phi)
        )
        assert abs(total - 1.0) <= 1e-12
        dtotal = sum(
            t.dphi[a + j * step + span]
            for j in range(-scheme.support, scheme.support + 1)
            if 0 <= a + j * step + span < len(t.dphi)
        )
        assert abs(dtotal) <= 1e-12  # derivative of a constant sum


@pytest.mark.parametrize("scheme", [FP, BS], ids=["four-point", "cubic-bspline"])
def test_derivative_matches_finite_differences(scheme):
    # central differences of phi tabulated three levels deeper
    k = 6
    t = build_basic_table(scheme, k)
    fine = build_basic_table(scheme, k + 3)
    h = 2.0 ** -(k + 3)
    span = scheme.support * 2**k
    nums = np.arange(-span + 1, span)  # interior of the support
    fd = np.array(
        [(fine.at(8 * m + 1) - fine.at(8 * m - 1)) / (2.0 * h) for m in nums]
    )
    exact = np.array([t.derivative_at(m) for m in nums])
    scale = np.abs(exact).max()
    assert scale > 0
    assert np.abs(fd - exact).max() / scale < 1e-3


def test_table_depth_validation():
    with pytest.raises(ValueError):
        build_basic_table(FP, 0)


# --- curve evaluation ----------------------------------------------------------


def rng_polygon(scheme, m, seed=0, scale=10.0):
    rng = np.random.default_rng(seed)
    return ControlPolygon(rng.normal(size=(m, 2)) * scale, scheme)


def test_fourpoint_samples_hit_control_points_exactly():
    poly = rng_polygon(FP, 9, seed=3)
    sample = evaluate_curve(poly, build_basic_table(FP, 4))
    assert sample.points.shape == (9 * 16, 2)
    on_grid = sample.points[::16]
    assert np.array_equal(on_grid, poly.vertices)  # bitwise, not approximate


def test_bspline_integer_samples_match_limit_stencil():
    poly = rng_polygon(BS, 7, seed=5)
    sample = evaluate_curve(poly, build_basic_table(BS, 4))
    v = poly.vertices
    stencil = (np.roll(v, 1, axis=0) + 4.0 * v + np.roll(v, -1, axis=0)) / 6.0
    assert np.abs(sample.points[::16] - stencil).max() <= 1e-10


def test_constant_polygon_evaluates_constant_with_zero_tangent():
    for scheme in (FP, BS):
        poly = ControlPolygon(np.full((6, 2), 11.5), scheme)
        s = evaluate_curve(poly, build_basic_table(scheme, 3))
        assert np.abs(s.points - 11.5).max() <= 1e-12
        assert np.abs(s.tangents).max() <= 1e-12


def test_scheme_mismatch_rejected():
    poly = rng_polygon(FP, 6)
    with pytest.raises(ValueError):
        evaluate_curve(poly, build_basic_table(BS, 4))


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    a=st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4),
    b=st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=2),
)
def test_affine_equivariance(seed, a, b):
    mat = np.array(a).reshape(2, 2)
    off = np.array(b)
    for scheme in (FP, BS):
        poly = rng_polygon(scheme, 6, seed=seed)
        table = build_basic_table(scheme, 3)
        direct = evaluate_curve(poly.with_vertices(poly.vertices @ mat.T + off), table)
        mapped = evaluate_curve(poly, table)
        assert np.allclose(direct.points, mapped.points @ mat.T + off, atol=1e-9)
        assert np.allclose(direct.tangents, mapped.tangents @ mat.T, atol=1e-9)


def test_small_polygon_wraps_support_correctly():
    # M=4 four-point: the support (-3,3) is wider than the period, so several
    # wrapped copies of phi overlap; row sums must still be exactly one
    w, wd = evaluation_weights(FP, 3, 4)
    assert np.abs(w.sum(axis=1) - 1.0).max() <= 1e-12
    assert np.abs(wd.sum(axis=1)).max() <= 1e-12


# --- interpolation operator ----------------------------------------------------


def dense_integer_evaluation_matrix(m):
    """Oracle: circulant with first row (2/3, 1/6, 0, ..., 0, 1/6), built naively."""
    s = np.zeros((m, m))
    for i in range(m):
        s[i, i] = 2.0 / 3.0
        s[i, (i + 1) % m] += 1.0 / 6.0
        s[i, (i - 1) % m] += 1.0 / 6.0
    return s


def test_interpolation_matrix_m4_first_column():
    a = interpolation_matrix(4)
    assert np.abs(a[:, 0] - np.array([7.0 / 4.0, -0.5, 0.25, -0.5])).max() <= 1e-12


@pytest.mark.parametrize("m", list(range(3, 33)))
def test_interpolation_matrix_matches_dense_inverse(m):
    oracle = np.linalg.inv(dense_integer_evaluation_matrix(m))
    assert np.abs(interpolation_matrix(m) - oracle).max() <= 1e-10


def test_interpolation_round_trip_through_curve():
    targets = rng_polygon(BS, 7, seed=11, scale=40.0)
    control = interpolation_operator(targets)
    sample = evaluate_curve(control, build_basic_table(BS, 4))
    assert np.abs(sample.points[::16] - targets.vertices).max() <= 1e-9
    # and the defining linear system holds
    s = dense_integer_evaluation_matrix(7)
    assert np.abs(s @ control.vertices - targets.vertices).max() <= 1e-9


def test_interpolation_constant_targets():
    targets = ControlPolygon(np.full((5, 2), 3.25), BS)
    control = interpolation_operator(targets)
    assert np.abs(control.vertices - 3.25).max() <= 1e-12


def test_interpolation_rejects_fourpoint():
    with pytest.raises(ValueError):
        interpolation_operator(rng_polygon(FP, 6))


# --- polygon type & wire format --------------------------------------------------


def test_polygon_validation():
    with pytest.raises(ValueError):
        ControlPolygon(np.zeros((4, 3)), FP)
    with pytest.raises(ValueError):
        ControlPolygon(np.array([[0.0, 0.0], [1.0, np.nan], [1.0, 1.0], [2.0, 2.0]]), FP)
    with pytest.raises(ValueError):
        ControlPolygon(np.zeros((2, 2)), BS)


def test_wire_format_round_trip():
    poly = rng_polygon(FP, 5, seed=2)
    d = poly.to_dict()
    assert d["scheme"] == "four-point"
    assert d["omega"] == 1.0 / 16.0
    back = ControlPolygon.from_dict(d)
    assert np.array_equal(back.vertices, poly.vertices)
    assert back.scheme == poly.scheme

    bs = rng_polygon(BS, 5, seed=2).to_dict()
    assert "omega" not in bs
    assert ControlPolygon.from_dict(bs).scheme == BS


def test_scheme_from_name():
    assert scheme_from_name("four-point").omega == 1.0 / 16.0
    assert scheme_from_name("four-point", 0.05).omega == 0.05
    assert scheme_from_name("cubic-bspline") == BS
    with pytest.raises(ValueError):
        scheme_from_name("cubic-bspline", 0.05)
    with pytest.raises(ValueError):
        scheme_from_name("quintic")

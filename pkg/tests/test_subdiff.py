import math

import numpy as np
import pytest

from matherlab.mather import alpha_lp, discretize_lagrangian, \
    pendulum_lagrangian
from matherlab.subdiff import (ConvexPolytope, SampledFunction,
                               ScheduleOutsideBoxError,
                               clarke_subdifferential, convex_hull,
                               dini_lower_derivative, lebourg_witness)


def sf_abs(analytic=True):
    return SampledFunction(
        lambda x: float(np.abs(x[0])),
        gradient=(lambda x: np.sign(x)) if analytic else None,
        box=(np.array([-2.0]), np.array([2.0])), lipschitz=1.0)


def sf_max2():
    return SampledFunction(
        lambda x: float(np.max(x)),
        gradient=lambda x: (np.arange(2) == int(np.argmax(x))).astype(float),
        box=(np.array([-2.0, -2.0]), np.array([2.0, 2.0])), lipschitz=1.0)


# ---------------------------------------------------------------------------
# Dini directional derivatives
# ---------------------------------------------------------------------------

def test_dini_abs_and_negated():
    assert dini_lower_derivative(sf_abs(), [0.0], [1.0]).value == 1.0
    f_neg = SampledFunction(lambda x: -float(np.abs(x[0])),
                            box=(np.array([-2.0]), np.array([2.0])),
                            lipschitz=1.0)
    assert dini_lower_derivative(f_neg, [0.0], [1.0]).value \
        == pytest.approx(-1.0, abs=1e-12)


def test_dini_smooth_matches_gradient():
    f = SampledFunction(lambda x: float(np.sin(x[0]) + 0.5 * x[1] ** 2),
                        box=(np.full(2, -4.0), np.full(2, 4.0)),
                        lipschitz=5.0)
    x, v = np.array([0.3, -0.7]), np.array([1.0, 2.0])
    expected = math.cos(0.3) * 1.0 + (-0.7) * 2.0
    tau0 = 1e-2
    got = dini_lower_derivative(f, x, v,
                                [tau0 * 0.5 ** k for k in range(20)])
    assert got.value == pytest.approx(expected, abs=5.0 * tau0)


def test_dini_schedule_must_stay_in_box():
    with pytest.raises(ScheduleOutsideBoxError):
        dini_lower_derivative(sf_abs(), [1.9], [1.0], [0.5])


# ---------------------------------------------------------------------------
# Clarke subdifferential estimates
# ---------------------------------------------------------------------------

def test_clarke_abs_interval():
    hull = clarke_subdifferential(sf_abs(), [0.0], radius=0.1,
                                  n_samples=64, seed=0)
    lo, hi = hull.interval()
    assert lo == pytest.approx(-1.0, abs=1e-6)
    assert hi == pytest.approx(1.0, abs=1e-6)
    assert hull.refined is not None
    assert hull.refined.interval() == pytest.approx((-1.0, 1.0), abs=1e-6)


def test_clarke_abs_with_fd_and_kink_skip():
    hull = clarke_subdifferential(sf_abs(analytic=False), [0.0], radius=0.1,
                                  n_samples=128, seed=1)
    assert hull.hausdorff_1d(-1.0, 1.0) < 1e-3
    assert hull.skipped >= 0


def test_clarke_smooth_collapse():
    f = SampledFunction(lambda x: float(np.sum(x ** 2)),
                        gradient=lambda x: 2.0 * x,
                        box=(np.full(2, -2.0), np.full(2, 2.0)),
                        lipschitz=8.0)
    radius = 0.05
    hull = clarke_subdifferential(f, [0.3, -0.4], radius=radius,
                                  n_samples=64, seed=2)
    centre = np.array([0.6, -0.8])
    spread = np.max(np.linalg.norm(hull.vertices - centre, axis=1))
    assert spread <= 2.0 * radius + 1e-12


def test_clarke_max_segment():
    hull = clarke_subdifferential(sf_max2(), [0.0, 0.0], radius=0.1,
                                  n_samples=128, seed=3)
    verts = hull.vertices[np.lexsort((hull.vertices[:, 1],
                                      hull.vertices[:, 0]))]
    assert np.max(np.abs(verts - np.array([[0.0, 1.0], [1.0, 0.0]]))) < 1e-3


def test_hull_monotone_under_radius_shrink():
    hull = clarke_subdifferential(sf_abs(), [0.02], radius=0.1,
                                  n_samples=64, seed=5)
    inflate = 1.0 * (0.1 - 0.05)
    lo, hi = hull.interval()
    rlo, rhi = hull.refined.interval()
    assert rlo >= lo - inflate - 1e-12
    assert rhi <= hi + inflate + 1e-12


def test_hull_matches_vertex_recomputation():
    rng = np.random.default_rng(7)
    pts = rng.standard_normal((40, 2))
    hull = convex_hull(pts)
    again = convex_hull(hull.vertices)
    a = hull.vertices[np.lexsort(hull.vertices.T)]
    b = again.vertices[np.lexsort(again.vertices.T)]
    assert np.array_equal(a, b)


def test_vertices_in_convex_position():
    rng = np.random.default_rng(9)
    pts = rng.standard_normal((60, 2))
    hull = convex_hull(pts)
    for i, v in enumerate(hull.vertices):
        others = ConvexPolytope(np.delete(hull.vertices, i, axis=0))
        assert not others.contains(v, tol=1e-9)


def test_polytope_distance_geometry():
    square = ConvexPolytope(np.array([[0.0, 0.0], [1.0, 0.0],
                                      [1.0, 1.0], [0.0, 1.0]]))
    assert square.contains([0.5, 0.5])
    assert square.distance_to([2.0, 0.5]) == pytest.approx(1.0)
    assert square.distance_to([0.5, 0.5]) == 0.0
    seg = ConvexPolytope(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert seg.distance_to([0.0, 0.0]) == pytest.approx(math.sqrt(0.5))


def test_lipschitz_validation():
    f = sf_abs()
    assert f.validate_lipschitz(seed=1) <= 1.05 * f.lipschitz


# ---------------------------------------------------------------------------
# Lebourg witnesses
# ---------------------------------------------------------------------------

def test_lebourg_affine_any_point_works():
    f = SampledFunction(lambda x: float(3.0 * x[0] - 1.0),
                        gradient=lambda x: np.array([3.0]),
                        box=(np.array([-5.0]), np.array([5.0])),
                        lipschitz=3.0)
    wit = lebourg_witness(f, [-1.0], [2.0])
    assert wit.residual == pytest.approx(0.0, abs=1e-12)


def test_lebourg_kink_witness():
    wit = lebourg_witness(sf_abs(), [-1.0], [2.0])
    # f(x)-f(y) = -1 = <v*, x-y> = -3 v*, attained at the kink t = 1/3
    assert wit.residual <= 1e-6
    assert wit.t == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert wit.subgradient[0] == pytest.approx(1.0 / 3.0, abs=1e-6)


def test_lebourg_smooth_convex_classical_point():
    f = SampledFunction(lambda x: float(np.sum(x ** 2)),
                        box=(np.array([-3.0]), np.array([3.0])),
                        lipschitz=6.0)
    wit = lebourg_witness(f, [-1.0], [1.5])
    assert wit.residual <= 1e-6
    # classical mean value point of x^2 on [-1, 1.5] is the midpoint 0.25
    point = wit.t * 1.5 + (1.0 - wit.t) * (-1.0)
    assert point == pytest.approx(0.25, abs=1e-5)


# ---------------------------------------------------------------------------
# consistency with the alpha module
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("c, slack", [(0.0, 2e-2), (1.8, 2e-2)])
def test_clarke_estimate_contains_lp_rotation(c, slack):
    S = discretize_lagrangian(pendulum_lagrangian, 32, R=2.5, substeps=4)
    f = SampledFunction(lambda x: alpha_lp(S, [float(x[0])]).alpha,
                        box=(np.array([-2.5]), np.array([2.5])),
                        lipschitz=3.0)
    rho = alpha_lp(S, [c]).rotation.components
    hull = clarke_subdifferential(f, [c], radius=0.05, n_samples=10, seed=4)
    assert hull.distance_to(rho) <= slack


def test_polytope_json_serialization(tmp_path):
    hull = clarke_subdifferential(sf_abs(), [0.0], radius=0.1,
                                  n_samples=32, seed=0)
    path = tmp_path / "hull.json"
    hull.to_json(str(path))
    import json
    payload = json.loads(path.read_text())
    assert payload["summary"]["interval"] == [-1.0, 1.0]
    assert "refined" in payload and payload["seed"] == 0

    seg = clarke_subdifferential(sf_max2(), [0.0, 0.0], radius=0.1,
                                 n_samples=64, seed=1)
    seg.to_json(str(tmp_path / "seg.json"))
    payload = json.loads((tmp_path / "seg.json").read_text())
    assert "segment" in payload["summary"]

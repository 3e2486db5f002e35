import json

import numpy as np
import pytest

from warpfill.errors import OutOfDomainError, ValidationError
from warpfill.model_spaces import LatticeTorus, halfplane_distance, strip_to_halfplane
from warpfill.numerics import Const, Cosh, ExpShift, LinearR, Sinh
from warpfill.warp_engine import (
    PolylinePath,
    WarpedSpace,
    WPoint,
    alexandrov_angle,
    direction_at_singular,
    distance_to_core,
    log_map,
    path_length,
    path_point_at_arclength,
    solve_geodesic,
    space_from_json_dict,
    space_to_json_dict,
)


def h2_chart(pt):
    """Isometry R x_{e^r} E^1 -> upper half-plane, (r, x) -> x + i e^(-r)."""
    return complex(pt.e[0], np.exp(-pt.r))


def straight(p, q, tdim=0):
    return PolylinePath((p, q), (np.zeros(tdim, dtype=int),))


@pytest.fixture(scope="module")
def cone():
    """[0, 10] x_r S^1: polar coordinates on the flat plane."""
    return WarpedSpace(
        interval=(0.0, 10.0),
        euclid_dim=0,
        warp_g=Const(1.0),
        torus=LatticeTorus(np.array([[2 * np.pi]])),
        warp_f=LinearR(),
    )


class TestWarpedSpaceValidation:
    def test_singularity_detection(self, singular_model):
        assert singular_model.singular_at_zero

    def test_nonsingular(self, h2_space):
        assert not h2_space.singular_at_zero

    def test_torus_without_warp_rejected(self):
        with pytest.raises(ValidationError):
            WarpedSpace(interval=(0, 1), euclid_dim=1, warp_g=Cosh(),
                        torus=LatticeTorus(np.eye(1)), warp_f=None)

    def test_quotient_equality_at_core(self, singular_model):
        p = WPoint(0.0, [0.5], [1.0])
        q = WPoint(0.0, [0.5], [4.0])
        assert singular_model.points_equal(p, q)
        assert not singular_model.points_equal(WPoint(0.5, [0.5], [1.0]),
                                               WPoint(0.5, [0.5], [4.0]))


class TestPathLength:
    def test_radial_segment(self, h2_space):
        p, q = WPoint(0.3, [0.2]), WPoint(1.7, [0.2])
        assert path_length(h2_space, straight(p, q)) == pytest.approx(1.4, abs=1e-12)

    def test_circle_at_radius(self, cone):
        path = PolylinePath(
            (WPoint(2.0, [], [0.0]), WPoint(2.0, [], [0.0])), (np.array([1]),)
        )
        assert path_length(cone, path) == pytest.approx(4 * np.pi, abs=1e-10)

    def test_horizontal_segment(self, h2_space):
        r = 0.7
        p, q = WPoint(r, [0.0]), WPoint(r, [2.5])
        assert path_length(h2_space, straight(p, q)) == pytest.approx(
            np.exp(r) * 2.5, abs=1e-10
        )

    def test_additive_over_concatenation(self, h2_space):
        p, m, q = WPoint(0.0, [0.0]), WPoint(0.4, [1.0]), WPoint(-0.2, [2.0])
        whole = PolylinePath((p, m, q), (np.zeros(0, int), np.zeros(0, int)))
        assert path_length(h2_space, whole) == pytest.approx(
            path_length(h2_space, straight(p, m)) + path_length(h2_space, straight(m, q)),
            abs=1e-12,
        )

    def test_out_of_domain(self, h2_space):
        with pytest.raises(OutOfDomainError):
            path_length(h2_space, straight(WPoint(-7.0, [0.0]), WPoint(0.0, [0.0])))


class TestSolver:
    def test_identical_points(self, h2_space):
        res = solve_geodesic(h2_space, WPoint(0.1, [0.5]), WPoint(0.1, [0.5]))
        assert res.distance == 0.0 and res.converged

    def test_h2_isometry(self, h2_space):
        p, q = WPoint(0.0, [0.0]), WPoint(0.0, [1.0])
        res = solve_geodesic(h2_space, p, q, 32, 0)
        exact = halfplane_distance(h2_chart(p), h2_chart(q))
        assert res.distance == pytest.approx(exact, abs=1e-4)

    def test_distance_equals_path_length(self, h2_space):
        res = solve_geodesic(h2_space, WPoint(0.2, [0.1]), WPoint(-0.4, [1.3]), 16, 0)
        assert res.distance == pytest.approx(path_length(h2_space, res.path), abs=1e-12)

    def test_deterministic(self, h2_space):
        a = solve_geodesic(h2_space, WPoint(0.2, [0.1]), WPoint(-0.4, [1.3]), 16, 7)
        b = solve_geodesic(h2_space, WPoint(0.2, [0.1]), WPoint(-0.4, [1.3]), 16, 7)
        assert a.distance == b.distance
        assert a.iterations == b.iterations
        for va, vb in zip(a.path.vertices, b.path.vertices):
            assert va.r == vb.r and np.array_equal(va.e, vb.e)

    def test_cone_is_flat_plane(self, cone):
        # polar coordinates: d((1, 0), (1, pi)) = 2, straight through the origin
        res = solve_geodesic(cone, WPoint(1.0, [], [0.0]), WPoint(1.0, [], [np.pi]), 32, 0)
        assert res.distance == pytest.approx(2.0, abs=1e-4)

    def test_wraparound_uses_deck_shift(self, cone):
        # nearly full turn at large radius: wrapping backwards is shorter
        res = solve_geodesic(cone, WPoint(8.0, [], [0.1]), WPoint(8.0, [], [2 * np.pi - 0.1]), 16, 0)
        chord = 2 * 8.0 * np.sin(0.1)  # Euclidean chord across the short way
        assert res.distance == pytest.approx(chord, abs=1e-3)

    def test_strip_model(self):
        space = WarpedSpace(interval=(0.0, 5.0), euclid_dim=1, warp_g=Cosh())
        res = solve_geodesic(space, WPoint(0.0, [0.0]), WPoint(1.0, [1.0]), 32, 0)
        exact = halfplane_distance(strip_to_halfplane(0, 0, 1), strip_to_halfplane(1, 1, 1))
        assert res.distance == pytest.approx(exact, abs=1e-4)

    def test_metric_axioms_sampled(self, h2_space):
        rng = np.random.default_rng(5)
        pts = [WPoint(rng.uniform(-0.8, 0.8), [rng.uniform(-1, 1)]) for _ in range(6)]
        d = {}
        for i in range(len(pts)):
            for j in range(len(pts)):
                if i != j and (j, i) not in d:
                    d[(i, j)] = solve_geodesic(h2_space, pts[i], pts[j], 16, 0,
                                               refine_tol=1e-6).distance
        for (i, j), dij in d.items():
            dji = solve_geodesic(h2_space, pts[j], pts[i], 16, 0, refine_tol=1e-6).distance
            assert dji == pytest.approx(dij, abs=2e-6)
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    if len({i, j, k}) == 3:
                        dij = d.get((i, j), d.get((j, i)))
                        djk = d.get((j, k), d.get((k, j)))
                        dik = d.get((i, k), d.get((k, i)))
                        assert dik <= dij + djk + 2e-6


class TestSingularModel:
    def test_distance_to_core(self, singular_model):
        p = WPoint(0.7, [0.3], [1.0])
        assert distance_to_core(singular_model, p) == 0.7

    def test_radial_minimality(self, singular_model):
        p = WPoint(0.7, [0.3], [1.0])
        res = solve_geodesic(singular_model, p, WPoint(0.0, [0.3], [0.0]), 16, 0)
        assert res.distance == pytest.approx(0.7, abs=1e-6)

    def test_core_is_convex(self, singular_model):
        rng = np.random.default_rng(2)
        for _ in range(10):
            p = WPoint(0.0, [rng.uniform(-1, 1)], [rng.uniform(0, 7)])
            q = WPoint(0.0, [rng.uniform(-1, 1)], [rng.uniform(0, 7)])
            res = solve_geodesic(singular_model, p, q, 16, 0)
            assert max(v.r for v in res.path.vertices) <= 1e-6
            # the geodesic between core points is the Euclidean segment
            assert res.distance == pytest.approx(abs(p.e[0] - q.e[0]), abs=1e-6)

    def test_theta_jump_through_core_is_free(self, singular_model):
        # antipodal torus coordinates force passage through the core
        p = WPoint(0.5, [0.0], [0.0])
        q = WPoint(0.5, [0.0], [3.5])
        res = solve_geodesic(singular_model, p, q, 16, 0)
        assert res.distance <= 1.0 + 1e-6  # down and up is always available
        direct = path_length(singular_model, straight(p, q, tdim=1))
        assert res.distance < direct

    def test_direction_formula(self, singular_model):
        phi, alpha, theta = direction_at_singular(
            singular_model, [0.0], WPoint(1.0, [1.0], [0.5])
        )
        assert phi == pytest.approx(np.arctan(np.tanh(1.0) / np.sinh(1.0)), abs=1e-14)
        assert alpha == pytest.approx([1.0])
        assert theta == pytest.approx([0.5])

    def test_direction_vertical(self, singular_model):
        phi, alpha, theta = direction_at_singular(
            singular_model, [0.2], WPoint(1.0, [0.2], [0.5])
        )
        assert phi == np.pi / 2 and alpha is None

    def test_direction_flattens_with_t(self, singular_model):
        phis = [
            direction_at_singular(singular_model, [0.0], WPoint(t, [1.0], [0.0]))[0]
            for t in (0.5, 0.1, 0.02)
        ]
        assert phis[0] > phis[1] > phis[2]

    def test_log_map_radial(self, singular_model):
        p = WPoint(0.0, [0.3], [0.0])
        x = WPoint(0.9, [0.3], [2.0])
        radius, (phi, alpha, theta) = log_map(singular_model, p, x, 16, 0)
        assert radius == pytest.approx(0.9, abs=1e-6)
        assert phi == np.pi / 2 and alpha is None
        assert theta == pytest.approx([2.0])

    def test_log_injective_near_singular_point(self, singular_model):
        rng = np.random.default_rng(9)
        p = WPoint(0.0, [0.0], [0.0])
        images = []
        for _ in range(25):
            x = WPoint(rng.uniform(0.05, 0.3), [rng.uniform(-0.3, 0.3)], [rng.uniform(0, 0.5)])
            radius, (phi, alpha, theta) = log_map(singular_model, p, x, 16, 0,
                                                  refine_tol=1e-5, shift_radius=0)
            a = alpha[0] if alpha is not None else 0.0
            images.append((radius, phi, a, theta[0]))
        arr = np.array(images)
        for i in range(len(arr)):
            for j in range(i + 1, len(arr)):
                assert np.linalg.norm(arr[i] - arr[j]) > 1e-6


class TestAngles:
    def test_zero_angle_along_geodesic(self):
        flat = WarpedSpace(interval=(-3, 3), euclid_dim=1, warp_g=Const(1.0))
        ang = alexandrov_angle(flat, WPoint(0, [0.0]), WPoint(1, [0.0]), WPoint(2, [0.0]))
        assert ang == pytest.approx(0.0, abs=1e-5)

    def test_pi_on_opposite_rays(self):
        flat = WarpedSpace(interval=(-3, 3), euclid_dim=1, warp_g=Const(1.0))
        ang = alexandrov_angle(flat, WPoint(0, [0.0]), WPoint(1, [0.0]), WPoint(-1, [0.0]))
        assert ang == pytest.approx(np.pi, abs=1e-5)

    def test_right_angle_flat(self):
        flat = WarpedSpace(interval=(-3, 3), euclid_dim=1, warp_g=Const(1.0))
        ang = alexandrov_angle(flat, WPoint(0, [0.0]), WPoint(1, [0.0]), WPoint(0, [1.0]))
        assert ang == pytest.approx(np.pi / 2, abs=1e-3)


class TestArclengthAndSerialization:
    def test_point_at_arclength(self, h2_space):
        res = solve_geodesic(h2_space, WPoint(0.0, [0.0]), WPoint(0.0, [1.0]), 16, 0)
        mid = path_point_at_arclength(h2_space, res.path, res.distance / 2)
        d1 = solve_geodesic(h2_space, WPoint(0.0, [0.0]), mid, 16, 0).distance
        assert d1 == pytest.approx(res.distance / 2, abs=1e-4)

    def test_space_json_roundtrip(self, singular_model):
        doc = json.loads(json.dumps(space_to_json_dict(singular_model)))
        space2 = space_from_json_dict(doc)
        assert space2.singular_at_zero
        r = np.linspace(0, 3, 50)
        assert np.allclose(space2.f(r), singular_model.f(r))
        assert np.allclose(space2.g(r), singular_model.g(r))

    def test_smooth_warp_space_roundtrip(self, fg_space):
        doc = json.loads(json.dumps(space_to_json_dict(fg_space)))
        space2 = space_from_json_dict(doc)
        r = np.linspace(0, 2.6, 101)
        assert np.allclose(space2.f(r), fg_space.f(r), atol=1e-15)

    def test_geodesic_result_json(self, h2_space):
        res = solve_geodesic(h2_space, WPoint(0.0, [0.0]), WPoint(0.0, [0.5]), 16, 0)
        doc = json.loads(res.dumps())
        assert doc["distance"] == res.distance
        assert len(doc["path"]["vertices"]) == len(res.path.vertices)

import numpy as np
import pytest

from pmg.curvature import (
    CurvatureEstimates,
    curvature_profile,
    fit_quadratic_form,
    gaussian_curvature_at,
    local_frame,
)
from pmg.errors import DegenerateFrameError, ParameterError
from pmg.pointcloud import PointCloud, knn

from conftest import random_rotation, sphere_points
from oracles import quadratic_fit_pinv


def plane_cloud(rng, n=200):
    pts = np.column_stack([rng.uniform(-1, 1, size=(n, 2)), np.zeros(n)])
    return PointCloud(pts)


class TestLocalFrame:
    def test_plane_normal_is_e3(self, rng):
        cloud = plane_cloud(rng, 60)
        graph = knn(cloud, 8)
        frame = local_frame(cloud, graph, 0, m=2)
        assert abs(frame.normal[2]) == pytest.approx(1.0, abs=1e-9)
        span = np.abs(frame.tangent_basis[:, 2])
        assert np.all(span < 1e-9)

    def test_line_normal_in_r2(self):
        pts = np.column_stack([np.linspace(0, 1, 12), np.zeros(12)])
        cloud = PointCloud(pts)
        graph = knn(cloud, 4)
        frame = local_frame(cloud, graph, 5, m=1)
        assert abs(frame.tangent_basis[0, 0]) == pytest.approx(1.0, abs=1e-9)
        assert abs(frame.normal[1]) == pytest.approx(1.0, abs=1e-9)

    def test_eigenvalues_match_eigh_oracle(self, rng):
        pts = rng.normal(size=(80, 6))
        cloud = PointCloud(pts)
        graph = knn(cloud, 20)
        frame = local_frame(cloud, graph, 3, m=2)
        nbrs = pts[graph.indices[3]]
        y = nbrs - nbrs.mean(axis=0)
        oracle = np.sort(np.linalg.eigvalsh(y.T @ y))[::-1]
        assert np.allclose(frame.eigenvalues, oracle, rtol=1e-9, atol=1e-12)

    def test_orthonormal_frame(self, rng):
        pts = rng.normal(size=(60, 5))
        cloud = PointCloud(pts)
        graph = knn(cloud, 15)
        frame = local_frame(cloud, graph, 7, m=3)
        basis = np.vstack([frame.tangent_basis, frame.normal])
        gram = basis @ basis.T
        assert np.allclose(gram, np.eye(4), atol=1e-9)

    def test_eigenvalues_sorted_nonnegative(self, rng):
        pts = rng.normal(size=(60, 5))
        cloud = PointCloud(pts)
        frame = local_frame(cloud, knn(cloud, 15), 0, m=2)
        assert np.all(np.diff(frame.eigenvalues) <= 0)
        assert np.all(frame.eigenvalues >= 0)

    def test_coincident_neighbors_degenerate(self):
        cloud = PointCloud([[0.0, 0.0]] * 5 + [[1.0, 1.0]])
        graph = knn(cloud, 3)
        with pytest.raises(DegenerateFrameError):
            local_frame(cloud, graph, 0, m=1)

    def test_m_out_of_range(self, rng):
        cloud = plane_cloud(rng, 30)
        graph = knn(cloud, 8)
        with pytest.raises(ParameterError):
            local_frame(cloud, graph, 0, m=3)  # m must be < p
        with pytest.raises(ParameterError):
            local_frame(cloud, graph, 0, m=0)


class TestGaussianCurvature:
    def test_plane_is_flat(self, rng):
        cloud = plane_cloud(rng, 200)
        graph = knn(cloud, 20)
        values = [abs(gaussian_curvature_at(cloud, graph, i, 2)) for i in range(0, 200, 20)]
        assert max(values) < 1e-6

    def test_unit_sphere(self, rng):
        cloud = PointCloud(sphere_points(rng, 2000))
        graph = knn(cloud, 30)
        est, _ = curvature_profile(cloud, graph, m=2)
        assert 0.7 <= est.mean_curvature <= 1.3

    def test_radius2_sphere(self, rng):
        cloud = PointCloud(sphere_points(rng, 2000, radius=2.0))
        graph = knn(cloud, 30)
        est, _ = curvature_profile(cloud, graph, m=2)
        assert 0.17 <= est.mean_curvature <= 0.33

    def test_scaling_covariance(self, rng):
        base = sphere_points(rng, 1500)
        means = []
        for radius in (1.0, 2.0):
            cloud = PointCloud(base * radius)
            est, _ = curvature_profile(cloud, knn(cloud, 30), m=2)
            means.append(est.mean_curvature)
        assert means[1] == pytest.approx(means[0] / 4.0, rel=0.2)

    def test_rigid_motion_invariance_abs(self, rng):
        pts = sphere_points(rng, 500)
        cloud = PointCloud(pts)
        graph = knn(cloud, 30)
        ref, _ = curvature_profile(cloud, graph, m=2)
        moved = PointCloud(pts @ random_rotation(rng, 3).T + np.array([3.0, -1.0, 2.0]))
        got, _ = curvature_profile(moved, knn(moved, 30), m=2)
        assert np.allclose(np.abs(got.values), np.abs(ref.values), rtol=1e-6)


class TestFit:
    def test_matches_pinv_oracle_on_random_systems(self, rng):
        for _ in range(50):
            k, m2 = 40, 9
            design = rng.normal(size=(k, m2))
            # force a well-conditioned design
            u, s, vt = np.linalg.svd(design, full_matrices=False)
            design = u @ np.diag(np.clip(s, 3.0, 6.0)) @ vt
            target = rng.normal(size=k)
            ours = fit_quadratic_form(design, target)
            oracle = quadratic_fit_pinv(design, target)
            assert np.allclose(ours, oracle, rtol=1e-8, atol=1e-12)

    def test_symmetrization_idempotent(self, rng):
        cloud = PointCloud(sphere_points(rng, 300))
        graph = knn(cloud, 25)
        nbrs = cloud.points[graph.indices[0]]
        diff = nbrs - cloud.points[0]
        frame = local_frame(cloud, graph, 0, m=2)
        o = diff @ frame.tangent_basis.T
        design = 0.5 * (o[:, :, None] * o[:, None, :]).reshape(o.shape[0], 4)
        theta = fit_quadratic_form(design, diff @ frame.normal).reshape(2, 2)
        sym = 0.5 * (theta + theta.T)
        assert np.array_equal(sym, 0.5 * (sym + sym.T))


class TestProfile:
    def test_aggregates(self):
        est = CurvatureEstimates.from_values([1.0, -1.0], m=2, k=10, skipped=0)
        assert est.mean_curvature == 0.0
        assert est.mean_abs_curvature == 1.0

    def test_aggregate_invariants(self, rng):
        cloud = PointCloud(sphere_points(rng, 400))
        est, _ = curvature_profile(cloud, knn(cloud, 25), m=2)
        assert est.mean_curvature == pytest.approx(est.values.mean(), abs=1e-12)
        assert est.mean_abs_curvature == pytest.approx(np.abs(est.values).mean(), abs=1e-12)

    def test_plane_profile_flat(self, rng):
        cloud = plane_cloud(rng, 150)
        est, warning = curvature_profile(cloud, knn(cloud, 20), m=2)
        assert est.mean_abs_curvature < 1e-6
        assert warning is None

    def test_auto_m_on_sphere(self, rng):
        cloud = PointCloud(sphere_points(rng, 600))
        est, _ = curvature_profile(cloud, knn(cloud, 30), m="auto")
        assert est.m == 2

    def test_m_must_stay_below_p(self, rng):
        cloud = plane_cloud(rng, 50)
        with pytest.raises(ParameterError):
            curvature_profile(cloud, knn(cloud, 10), m=5)

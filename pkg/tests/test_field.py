import numpy as np
import pytest

from seekcert.field import (
    FieldGraph,
    QuadraticField,
    certify_sector,
    check_minimizer_geometry,
    check_path_to_informed,
    f_value,
    grad_f,
    grounded_laplacians,
    laplacian,
    load_scenario,
    minimize_f,
    save_scenario,
    smoothed_huber_field,
)


def cycle_edges(n):
    return tuple((i, (i + 1) % n) for i in range(n))


def make_graph(n, edges, informed, field, r=None):
    r = np.zeros(n * field.d) if r is None else r
    return FieldGraph(n_agents=n, edges=edges, informed=informed, r=r, field=field)


def random_connected_graph(rng, n):
    """Random spanning tree plus extra random edges."""
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        j = order[k]
        i = order[rng.integers(0, k)]
        edges.add((min(i, j), max(i, j)))
    for _ in range(rng.integers(0, n)):
        i, j = rng.integers(0, n, 2)
        if i != j:
            edges.add((min(i, j), max(i, j)))
    return tuple(edges)


def random_graph_maybe_disconnected(rng, n):
    edges = set()
    for _ in range(rng.integers(0, 2 * n)):
        i, j = rng.integers(0, n, 2)
        if i != j:
            edges.add((min(i, j), max(i, j)))
    return tuple(edges)


UNIT_FIELD = QuadraticField(0.5 * np.eye(1))


class TestLaplacian:
    def test_path_graph(self):
        fg = make_graph(2, ((0, 1),), (0,), UNIT_FIELD)
        np.testing.assert_array_equal(laplacian(fg), [[1.0, -1.0], [-1.0, 1.0]])

    def test_cycle_spectrum(self):
        # oracle: eigenvalues 2 - 2 cos(2 pi k / 10)
        fg = make_graph(10, cycle_edges(10), tuple(range(10)), UNIT_FIELD)
        eigs = np.sort(np.linalg.eigvalsh(laplacian(fg)))
        expected = np.sort(2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(10) / 10))
        np.testing.assert_allclose(eigs, expected, atol=1e-12)
        assert eigs[-1] == pytest.approx(4.0)
        assert abs(eigs[0]) < 1e-12

    def test_empty_edges(self):
        fg = make_graph(3, (), (0,), UNIT_FIELD)
        np.testing.assert_array_equal(laplacian(fg), np.zeros((3, 3)))

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            make_graph(3, ((1, 1),), (0,), UNIT_FIELD)

    def test_empty_informed_rejected(self):
        with pytest.raises(ValueError, match="informed"):
            FieldGraph(n_agents=2, edges=((0, 1),), informed=(), r=np.zeros(2), field=UNIT_FIELD)


class TestGroundedLaplacians:
    def test_single_informed_agent(self):
        field = QuadraticField(0.5 * np.eye(1))  # hessian 1
        fg = make_graph(1, (), (0,), QuadraticField(np.eye(1) * 0.5, None, 0.0))
        # declared sector from the field: m = L = 1
        Ls, Lb = grounded_laplacians(fg)
        np.testing.assert_array_equal(Ls, [[1.0]])
        np.testing.assert_array_equal(Lb, [[1.0]])

    def test_cycle_all_informed_66(self):
        field = QuadraticField(33.0 * np.eye(1))  # psi = 33 y^2: hessian 66
        fg = make_graph(10, cycle_edges(10), tuple(range(10)), field)
        Ls, Lb = grounded_laplacians(fg)
        assert np.linalg.eigvalsh(Ls)[0] == pytest.approx(66.0, abs=1e-9)
        assert np.linalg.eigvalsh(Lb)[-1] == pytest.approx(70.0, abs=1e-9)

    def test_path_single_informed(self):
        field = QuadraticField(0.5 * np.eye(1))
        fg = make_graph(3, ((0, 1), (1, 2)), (0,), field)
        Ls, _ = grounded_laplacians(fg)
        np.testing.assert_array_equal(Ls, laplacian(fg) + np.diag([1.0, 0.0, 0.0]))


class TestCertifySector:
    def test_cycle_66_in_sector_1_70(self):
        field = QuadraticField(33.0 * np.eye(1))
        fg = make_graph(10, cycle_edges(10), tuple(range(10)), field)
        assert certify_sector(fg, 1.0, 70.0)
        assert not certify_sector(fg, 1.0, 69.0)

    def test_disconnected_uninformed_component_fails(self):
        # the query floor must clear the eigenvalue tolerance (1e-9 * scale)
        field = QuadraticField(0.5 * np.eye(1))
        fg = make_graph(4, ((0, 1),), (0,), field)  # agents 2, 3 isolated
        assert not certify_sector(fg, 1e-6, 1e6)

    def test_self_consistency_at_exact_spectra(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            n = int(rng.integers(2, 7))
            edges = random_connected_graph(rng, n)
            informed = tuple(sorted(rng.choice(n, size=rng.integers(1, n + 1), replace=False)))
            field = QuadraticField(0.5 * rng.uniform(0.5, 3.0) * np.eye(1))
            fg = make_graph(n, edges, informed, field)
            Ls, Lb = grounded_laplacians(fg)
            lam_min = np.linalg.eigvalsh(Ls)[0]
            lam_max = np.linalg.eigvalsh(Lb)[-1]
            assert certify_sector(fg, lam_min, lam_max)
            assert not certify_sector(fg, lam_min + 1e-6, lam_max)
            assert not certify_sector(fg, lam_min, lam_max - 1e-6)


class TestPathToInformed:
    def test_connected_graph(self):
        fg = make_graph(5, random_connected_graph(np.random.default_rng(0), 5), (2,), UNIT_FIELD)
        assert check_path_to_informed(fg)

    def test_unreachable_component(self):
        fg = make_graph(4, ((0, 1), (2, 3)), (0,), UNIT_FIELD)
        assert not check_path_to_informed(fg)

    def test_equivalence_with_grounded_spectrum(self):
        # reachability holds iff the strongly grounded Laplacian is PD
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(2, 8))
            edges = random_graph_maybe_disconnected(rng, n)
            informed = tuple(sorted(rng.choice(n, size=rng.integers(1, n + 1), replace=False)))
            fg = make_graph(n, edges, informed, UNIT_FIELD)
            Ls, _ = grounded_laplacians(fg)
            spectral = np.linalg.eigvalsh(Ls)[0] > 1e-10
            assert check_path_to_informed(fg) == spectral


class TestGradF:
    def test_zero_at_minimizer(self):
        rng = np.random.default_rng(1)
        field = QuadraticField(np.array([[1.0, 0.2], [0.2, 2.0]]), np.array([0.3, -1.0]))
        fg = make_graph(3, ((0, 1), (1, 2)), (0, 2), field, r=rng.normal(size=6))
        y_star = minimize_f(fg)
        assert np.linalg.norm(grad_f(fg, y_star)) <= 1e-8

    def test_single_agent_reduces_to_field_gradient(self):
        field = QuadraticField(np.array([[2.0]]), np.array([1.0]))
        fg = make_graph(1, (), (0,), field, r=np.array([5.0]))
        y = np.array([0.7])
        np.testing.assert_allclose(grad_f(fg, y), field.grad(y))

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(3)
        field = smoothed_huber_field(1.0, 6.0, np.array([0.4, -0.2]))
        fg = make_graph(3, ((0, 1), (1, 2), (0, 2)), (1,), field, r=rng.normal(size=6))
        h = 1e-6
        for _ in range(100):
            y = rng.uniform(-3, 3, 6)
            g = grad_f(fg, y)
            g_fd = np.empty_like(g)
            for k in range(y.size):
                e = np.zeros_like(y)
                e[k] = h
                g_fd[k] = (f_value(fg, y + e) - f_value(fg, y - e)) / (2 * h)
            np.testing.assert_allclose(g, g_fd, rtol=1e-6, atol=1e-6)

    def test_secant_sector_of_composite(self):
        # gradient of the composite objective respects the certified sector
        rng = np.random.default_rng(4)
        field = QuadraticField(np.diag([0.5, 5.0]))  # hessian eigs exactly 1, 10
        fg = make_graph(2, ((0, 1),), (0, 1), field)
        Ls, Lb = grounded_laplacians(fg)
        m = np.linalg.eigvalsh(Ls)[0]
        L = np.linalg.eigvalsh(Lb)[-1]
        for _ in range(1000):
            y1, y2 = rng.uniform(-5, 5, 4), rng.uniform(-5, 5, 4)
            dy = y1 - y2
            nn = dy @ dy
            if nn < 1e-16:
                continue
            inner = (grad_f(fg, y1) - grad_f(fg, y2)) @ dy
            assert inner >= m * nn - 1e-9 * nn
            assert inner <= L * nn + 1e-9 * nn


class TestMinimizeF:
    def test_zero_reference_consensus(self):
        field = QuadraticField(np.array([[1.5, 0.0], [0.0, 0.8]]), np.array([-1.0, 2.0]))
        fg = make_graph(4, ((0, 1), (1, 2), (2, 3)), (1, 3), field)
        y_star = minimize_f(fg)
        for i in range(4):
            np.testing.assert_allclose(y_star[2 * i:2 * i + 2], field.y_opt, atol=1e-6)

    def test_single_informed_offset_formula(self):
        rng = np.random.default_rng(5)
        field = QuadraticField(np.array([[1.0]]), np.array([0.6]))
        r = rng.normal(size=4)
        fg = make_graph(4, ((0, 1), (1, 2), (1, 3)), (2,), field, r=r)
        y_star = minimize_f(fg)
        for j in range(4):
            expected = field.y_opt + (r[j] - r[2])
            np.testing.assert_allclose(y_star[j], expected, atol=1e-6)

    def test_informed_center_of_mass(self):
        rng = np.random.default_rng(6)
        field = QuadraticField(np.array([[2.0, 0.3], [0.3, 1.0]]), np.array([0.1, 0.2]))
        fg = make_graph(3, ((0, 1), (1, 2), (0, 2)), (0, 1, 2), field, r=rng.normal(size=6))
        y_star = minimize_f(fg)
        com = np.mean([y_star[2 * i:2 * i + 2] for i in fg.informed], axis=0)
        np.testing.assert_allclose(com, field.y_opt, atol=1e-6)

    def test_unreachable_graph_rejected(self):
        fg = make_graph(3, ((0, 1),), (0,), UNIT_FIELD)
        with pytest.raises(ValueError, match="reachability"):
            minimize_f(fg)

    def test_stationarity(self):
        rng = np.random.default_rng(7)
        field = smoothed_huber_field(1.0, 8.0, np.array([1.0]))
        fg = make_graph(5, random_connected_graph(rng, 5), (0, 3), field, r=rng.normal(size=5))
        y_star = minimize_f(fg)
        g0 = np.linalg.norm(grad_f(fg, np.zeros(5)))
        assert np.linalg.norm(grad_f(fg, y_star)) <= 1e-9 * (1 + g0)


class TestMinimizerGeometry:
    def test_single_informed_collapses_to_optimum(self):
        field = QuadraticField(np.array([[1.0]]), np.array([-2.0]))
        fg = make_graph(3, ((0, 1), (1, 2)), (1,), field)
        y_star = minimize_f(fg)
        report = check_minimizer_geometry(fg, y_star)
        assert report.halfspace_ok
        assert report.center_of_mass_ok
        np.testing.assert_allclose(y_star[1], field.y_opt, atol=1e-7)

    def test_quadratic_triangle_center_of_mass(self):
        rng = np.random.default_rng(8)
        field = QuadraticField(np.array([[1.0, 0.0], [0.0, 3.0]]), np.array([0.5, 0.5]))
        fg = make_graph(3, ((0, 1), (1, 2), (0, 2)), (0, 1, 2), field, r=rng.normal(size=6))
        report = check_minimizer_geometry(fg, minimize_f(fg))
        assert report.center_of_mass_ok
        assert report.halfspace_ok

    def test_radial_two_agents_interval(self):
        field = smoothed_huber_field(1.0, 5.0, np.array([0.3]))
        fg = make_graph(2, ((0, 1),), (0, 1), field, r=np.array([0.0, 2.0]))
        y_star = minimize_f(fg)
        report = check_minimizer_geometry(fg, y_star)
        assert report.hull_ok
        zs = [y_star[i] for i in fg.informed]
        assert min(zs) - 1e-9 <= field.y_opt[0] <= max(zs) + 1e-9

    def test_radial_2d_hull_membership(self):
        rng = np.random.default_rng(9)
        field = smoothed_huber_field(1.0, 6.0, np.array([0.5, -0.5]))
        fg = make_graph(
            4, ((0, 1), (1, 2), (2, 3), (0, 2), (1, 3)), (0, 1, 2, 3), field,
            r=rng.normal(size=8),
        )
        report = check_minimizer_geometry(fg, minimize_f(fg))
        assert report.hull_ok

    def test_high_dimension_hull_unchecked(self):
        field = smoothed_huber_field(1.0, 5.0, np.zeros(3))
        fg = make_graph(2, ((0, 1),), (0, 1), field)
        report = check_minimizer_geometry(fg, minimize_f(fg))
        assert report.hull_ok is None


class TestFieldClasses:
    def test_quadratic_sector_from_hessian(self):
        field = QuadraticField(np.diag([0.5, 5.0]))
        assert field.m == pytest.approx(1.0)
        assert field.L == pytest.approx(10.0)

    def test_nonconvex_quadratic_rejected(self):
        with pytest.raises(ValueError, match="positive definite"):
            QuadraticField(np.diag([1.0, -1.0]))

    def test_sector_order_validated(self):
        with pytest.raises(ValueError, match="sector"):
            smoothed_huber_field(5.0, 1.0, np.zeros(1))

    def test_huber_field_sampled_sector(self):
        field = smoothed_huber_field(1.0, 7.0, np.array([0.2, 0.1]))
        assert field.check_sector_sampled(rng=0)

    def test_huber_gradient_smooth_at_center(self):
        field = smoothed_huber_field(1.0, 7.0, np.array([0.0]))
        np.testing.assert_allclose(field.grad(np.array([0.0])), [0.0])
        assert np.isfinite(field.grad(np.array([1e-300]))).all()


class TestScenarioFile:
    def test_quadratic_round_trip(self, tmp_path):
        field = QuadraticField(np.array([[33.0]]), np.array([-2 * 33.0 * 250.0]), 33.0 * 250.0**2)
        fg = make_graph(10, cycle_edges(10), tuple(range(10)), field)
        path = tmp_path / "scenario.txt"
        save_scenario(fg, path, extra_sections={"simulation": {"dt": 0.005, "T": 50.0}})
        loaded, extras = load_scenario(path)
        assert loaded.n_agents == 10
        assert loaded.edges == fg.edges
        assert loaded.informed == fg.informed
        np.testing.assert_array_equal(loaded.r, fg.r)
        np.testing.assert_array_equal(loaded.field.Q, field.Q)
        np.testing.assert_array_equal(loaded.field.b, field.b)
        assert float(extras["simulation"]["t"]) == 50.0

    def test_radial_round_trip(self, tmp_path):
        field = smoothed_huber_field(1.0, 5.0, np.array([0.5, -0.5]))
        fg = make_graph(2, ((0, 1),), (0,), field, r=np.arange(4.0))
        path = tmp_path / "scenario.txt"
        save_scenario(fg, path)
        loaded, _ = load_scenario(path)
        assert loaded.field.kind == "radial"
        assert loaded.field.m == field.m
        y = np.array([1.3, -0.2])
        np.testing.assert_allclose(loaded.field.grad(y), field.grad(y))

    def test_malformed_scenario_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("[nothing]\nx = 1\n")
        with pytest.raises(ValueError, match="malformed"):
            load_scenario(path)

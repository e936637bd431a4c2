import numpy as np
import pytest

from errors import ConfigurationError, LatencyDomainError
from latency import Affine, Elbow, eval_latency, kink_points, latency_from_dict
from piecewise import minimize_piecewise_quadratic, piece_knots


class TestElbow:
    def setup_method(self):
        self.f = Elbow(L=0.1, delta=1e-3, r=1.0)

    def test_values(self):
        assert eval_latency(self.f, 1.0) == pytest.approx(0.1)
        assert eval_latency(self.f, 0.9) == 0.0
        assert eval_latency(self.f, 1.001) == pytest.approx(0.2)

    def test_array_input(self):
        out = self.f(np.array([0.0, 1.0, 1.002]))
        assert isinstance(out, np.ndarray)
        np.testing.assert_allclose(out, [0.0, 0.1, 0.3])

    def test_kink_points(self):
        assert kink_points(self.f) == [pytest.approx(0.999)]
        assert kink_points(Elbow(0.1, 1e-3, 1.0, offset=0.05)) == [pytest.approx(0.9995)]

    def test_kink_clamped_at_zero(self):
        shallow = Elbow(L=0.1, delta=1.0, r=0.05)
        assert kink_points(shallow) == [0.0]

    def test_offset_floor(self):
        f = Elbow(0.1, 1e-3, 1.0, offset=0.05)
        assert f(0.0) == 0.05

    def test_slope_is_right_derivative(self):
        assert self.f.slope(0.5) == 0.0
        assert self.f.slope(0.999) == pytest.approx(100.0)
        assert self.f.slope(1.0) == pytest.approx(100.0)

    def test_integral(self):
        assert self.f.integral(0.5) == 0.0
        assert self.f.integral(1.0) == pytest.approx(0.5 * 100 * 1e-3 ** 2)

    def test_integral_matches_quadrature(self):
        f = Elbow(0.1, 1e-2, 1.0, offset=0.03)
        xs = np.linspace(0.0, 1.2, 200_001)
        ys = f(xs)
        numeric = float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))
        assert f.integral(1.2) == pytest.approx(numeric, rel=1e-6)

    def test_negative_flow_rejected(self):
        with pytest.raises(LatencyDomainError):
            self.f(-1e-6)

    def test_roundoff_below_zero_accepted(self):
        assert self.f(-1e-13) == 0.0

    @pytest.mark.parametrize("kwargs", [
        {"L": 0.0, "delta": 1e-3, "r": 1.0},
        {"L": 0.1, "delta": 0.0, "r": 1.0},
        {"L": 0.1, "delta": 1e-3, "r": -1.0},
        {"L": 0.1, "delta": 1e-3, "r": 1.0, "offset": -0.1},
    ])
    def test_bad_parameters(self, kwargs):
        with pytest.raises(ConfigurationError):
            Elbow(**kwargs)


class TestAffine:
    def test_constant_cross_link(self):
        assert Affine(0.0, 1.0)(0.37) == 1.0

    def test_affine(self):
        f = Affine(2.0, 1.0)
        assert f(3.0) == 7.0
        assert f.integral(2.0) == 6.0
        assert f.slope(5.0) == 2.0
        assert kink_points(Affine(2.0, 0.0)) == []

    def test_negative_coefficient(self):
        with pytest.raises(ConfigurationError):
            Affine(-1.0, 0.0)


class TestLatencyShape:
    """Every latency is non-decreasing and convex in total flow."""

    @staticmethod
    def _random_latency(rng):
        if rng.uniform() < 0.5:
            return Affine(rng.uniform(0.0, 10.0), rng.uniform(0.0, 5.0))
        return Elbow(L=rng.uniform(0.01, 1.0), delta=10 ** rng.uniform(-6, -1),
                     r=rng.uniform(0.1, 2.0), offset=rng.uniform(0.0, 0.5))

    def test_non_decreasing_and_convex(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            f = self._random_latency(rng)
            a, b = np.sort(rng.uniform(0.0, 4.0, (2, 16)), axis=0)
            fa, fb, mid = f(a), f(b), f((a + b) / 2)
            tol = 1e-12 * (1.0 + np.abs(fb))
            assert np.all(fa <= fb + tol)
            assert np.all(mid <= (fa + fb) / 2 + tol)
            assert np.all(f.slope(a) <= f.slope(b))


class TestLatencyFromDict:
    def test_rebuilds_both_kinds(self):
        for f in (Affine(0.0, 4.0), Elbow(0.1, 0.01, 1.0)):
            assert latency_from_dict(f.to_dict()) == f

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError, match="unknown latency kind"):
            latency_from_dict({"kind": "cubic"})

    def test_missing_parameter(self):
        with pytest.raises(ConfigurationError):
            latency_from_dict({"kind": "elbow", "L": 0.1})

    def test_invalid_parameter(self):
        with pytest.raises(ConfigurationError):
            latency_from_dict({"kind": "elbow", "L": -1, "delta": 1, "r": 1})


class TestPiecewiseMinimum:
    def test_smooth_quadratic(self):
        best = minimize_piecewise_quadratic(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
        assert best.argmin == pytest.approx(0.3, abs=1e-12)
        assert best.value == pytest.approx(0.0, abs=1e-15)

    def test_kink_needs_breakpoint(self):
        best = minimize_piecewise_quadratic(lambda x: np.abs(x - 0.4), 0.0, 1.0, [0.4])
        assert best.argmin == pytest.approx(0.4)
        assert best.value == pytest.approx(0.0, abs=1e-15)

    def test_elbow_product(self):
        f = Elbow(0.1, 1e-3, 1.0)
        g = lambda x: x * f(x) + (1.0 - x) * 0.05
        best = minimize_piecewise_quadratic(g, 0.0, 1.5, f.kink_points())
        xs = np.linspace(0.0, 1.5, 1_500_001)
        assert best.value <= g(xs).min() + 1e-12

    def test_ties_prefer_largest(self):
        best = minimize_piecewise_quadratic(lambda x: np.zeros_like(x), 0.0, 1.0, [0.5])
        assert best.argmin == 1.0
        assert best.ties == (0.0, 0.5, 1.0)

    def test_degenerate_interval(self):
        best = minimize_piecewise_quadratic(lambda x: x + 1.0, 0.2, 0.2)
        assert best.argmin == 0.2
        assert best.value == pytest.approx(1.2)

    def test_knots(self):
        np.testing.assert_array_equal(piece_knots(0.0, 1.0, [0.5, 2.0, -1.0, 0.5]), [0.0, 0.5, 1.0])

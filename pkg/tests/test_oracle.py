import numpy as np
import pytest

from errors import ConfigurationError
from game import DocMatrix, grid_oracle_ne, oracle_grid, oracle_special_points, verify_equilibrium
from latency import Affine, Elbow
from network import make_lb_network
from reproduce import canonical_network


class TestOracleGrid:
    def test_contains_special_points(self, canonical_net):
        grid = oracle_grid(canonical_net, 1e-2)
        for point in (0.0, 0.5, 0.505, 0.999, 1.0):
            assert np.min(np.abs(grid - point)) < 1e-12
        assert np.all(np.diff(grid) > 0)

    def test_special_points(self, canonical_net):
        points = oracle_special_points(canonical_net)
        assert any(p == pytest.approx(0.505, abs=1e-12) for p in points)
        assert points == sorted(points)

    @pytest.mark.parametrize("step", [0.0, 0.5])
    def test_step_range(self, canonical_net, step):
        with pytest.raises(ConfigurationError):
            oracle_grid(canonical_net, step)


class TestGridOracle:
    def test_selfish_unique_equilibrium(self, canonical_net):
        found = grid_oracle_ne(canonical_net, DocMatrix.selfish(2), 1e-3)
        assert len(found) == 1
        np.testing.assert_allclose(found[0].local_flows, [0.505, 0.505])
        assert found[0].method == "grid_oracle"
        # grid ties around the vertex land in the same group
        members = found[0].diagnostics["members"]
        assert len(members) == found[0].diagnostics["cluster_size"]
        assert any(np.allclose(m, [0.505, 0.505]) for m in members)

    def test_altruistic_load_taker_reported(self, canonical_net):
        doc = DocMatrix.altruistic(2, 0, 0.75)
        found = grid_oracle_ne(canonical_net, doc, 1e-3)
        assert any(np.allclose(eq.local_flows, [1.0, 0.999], atol=1e-12) for eq in found)

    @pytest.mark.parametrize("beta", [0.4, 0.75])
    def test_every_result_verifies(self, canonical_net, beta):
        doc = DocMatrix.altruistic(2, 0, beta)
        for eq in grid_oracle_ne(canonical_net, doc, 1e-2):
            assert verify_equilibrium(canonical_net, doc, eq.flows)
            assert eq.diagnostics["regret"] <= 1e-9

    def test_free_cross_links(self):
        net = make_lb_network(2, 1.0, Elbow(0.1, 1e-3, 1.0), Affine(0.0, 0.0))
        doc = DocMatrix.selfish(2)
        found = grid_oracle_ne(net, doc, 1e-2)
        assert any(np.allclose(eq.local_flows, [0.5, 0.5]) for eq in found)
        assert verify_equilibrium(net, doc, np.array([0.5, 0.5]))

    def test_three_players_coarse(self):
        net = canonical_network(3)
        doc = DocMatrix.selfish(3)
        found = grid_oracle_ne(net, doc, 1e-2)
        assert any(np.allclose(eq.local_flows, 0.34) for eq in found)
        # coarse-grid survivors away from the equilibrium are not reported
        for eq in found:
            assert verify_equilibrium(net, doc, eq.flows)

    def test_too_many_players(self):
        with pytest.raises(ConfigurationError, match="n <= 3"):
            grid_oracle_ne(canonical_network(4), DocMatrix.selfish(4), 1e-2)

    def test_too_many_profiles(self):
        with pytest.raises(ConfigurationError, match="raise grid_step"):
            grid_oracle_ne(canonical_network(3), DocMatrix.selfish(3), 1e-3)

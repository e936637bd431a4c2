import numpy as np
import pytest

from errors import ConfigurationError, ParameterRegimeError, ProfileError
from latency import Affine, Elbow
from network import (
    DESTINATION, EdgeListNetwork, FlowProfile, ParamSequence, make_lb_network, make_paper_network,
    regime_parameters, require_feasible, source_node, validate_profile,
)


def _two_player(rows):
    return FlowProfile(np.array(rows, dtype=float))


class TestLbNetwork:
    def test_link_layout(self, canonical_net):
        assert canonical_net.n_links == 4
        assert canonical_net.link_names == ("l1", "l2", "l1_2", "l2_1")
        assert canonical_net.cross_index(0, 1) == 2
        assert canonical_net.cross_index(1, 0) == 3

    def test_three_player_layout(self, net3):
        assert net3.n_links == 9
        assert [net3.cross_index(i, j) for i in range(3) for j in range(3) if i != j] == list(range(3, 9))
        assert net3.link_names[3] == "l1_2"
        assert net3.link_names[8] == "l3_2"

    def test_no_self_cross_link(self, canonical_net):
        with pytest.raises(ProfileError):
            canonical_net.cross_index(1, 1)

    def test_graph(self, net3):
        g = net3.graph
        assert set(g.nodes) == {DESTINATION, "s0", "s1", "s2"}
        assert g.number_of_edges() == 9
        assert g.edges[source_node(0), source_node(2)]["name"] == "l1_3"

    def test_needs_two_players(self):
        with pytest.raises(ConfigurationError):
            make_lb_network(1, 1.0, Elbow(0.1, 1e-3, 1.0), Affine(0.0, 1.0))

    def test_link_latencies(self, canonical_net):
        lat = canonical_net.link_latencies([1.0, 1.001, 0.0, 0.001])
        np.testing.assert_allclose(lat, [0.1, 0.2, 1.0, 1.0])


class TestFlowProfile:
    def test_from_local_flows(self, canonical_net):
        profile = FlowProfile.from_local_flows(canonical_net, [0.6, 0.8])
        np.testing.assert_allclose(profile.x, [[0.6, 0.4, 0.4, 0.0], [0.2, 0.8, 0.0, 0.2]])
        np.testing.assert_allclose(profile.link_loads(), [0.8, 1.2, 0.4, 0.2])

    def test_from_paths_round_trip(self, net3):
        paths = np.array([[0.5, 0.2, 0.3], [0.0, 1.0, 0.0], [0.1, 0.1, 0.8]])
        profile = FlowProfile.from_paths(net3, paths)
        np.testing.assert_allclose(net3.path_flows(profile), paths)
        np.testing.assert_allclose(net3.local_flows(profile), [0.5, 1.0, 0.8])

    def test_read_only(self, canonical_net):
        profile = FlowProfile.from_local_flows(canonical_net, [1.0, 1.0])
        with pytest.raises(ValueError):
            profile.x[0, 0] = 0.5

    def test_wrong_path_shape(self, canonical_net):
        with pytest.raises(ProfileError):
            FlowProfile.from_paths(canonical_net, np.ones((3, 3)))


class TestValidateProfile:
    def test_pure_local_ok(self, canonical_net):
        assert validate_profile(canonical_net, _two_player([[1, 0, 0, 0], [0, 1, 0, 0]]))

    def test_split_ok(self, canonical_net):
        check = validate_profile(canonical_net, _two_player([[0.6, 0.4, 0.4, 0], [0, 1, 0, 0]]))
        assert check.ok
        assert check.violations == ()

    def test_demand_shortfall(self, canonical_net):
        check = validate_profile(canonical_net, _two_player([[0.6, 0.3, 0.3, 0], [0, 1, 0, 0]]))
        assert not check
        assert "player 1: demand shortfall 0.1 at s0" in check.violations

    def test_negative_flow(self, canonical_net):
        check = validate_profile(canonical_net, _two_player([[1.1, 0, -0.1, 0], [0, 1, 0, 0]]))
        assert any("negative flow" in v for v in check.violations)

    def test_foreign_cross_link(self, canonical_net):
        # conserved, but player 1 routes over l2_1, which leaves s1
        check = validate_profile(canonical_net, _two_player([[1, 0, 0.1, 0.1], [0, 1, 0, 0]]))
        assert len(check.violations) == 1
        assert "l2_1" in check.violations[0]

    def test_convex_combination_stays_feasible(self, net3):
        rng = np.random.default_rng(29)
        for _ in range(200):
            first, second = (FlowProfile.from_paths(net3, net3.r * rng.dirichlet(np.ones(3), size=3))
                             for _ in range(2))
            t = rng.uniform()
            mixed = FlowProfile(t * first.x + (1 - t) * second.x)
            assert validate_profile(net3, first)
            assert validate_profile(net3, mixed), validate_profile(net3, mixed).violations

    def test_dimension_mismatch(self, canonical_net):
        with pytest.raises(ProfileError):
            validate_profile(canonical_net, np.ones((2, 3)))

    def test_require_feasible(self, canonical_net):
        with pytest.raises(ProfileError) as info:
            require_feasible(canonical_net, _two_player([[0.6, 0.3, 0.3, 0], [0, 1, 0, 0]]))
        assert info.value.violations


class TestParamSequence:
    def test_m2_network(self, seq):
        net = make_paper_network(seq, 2)
        assert net.local_latency == Elbow(0.1, seq.delta(2), 1.0, 0.0)
        assert net.cross_latency == Affine(0.0, 4.0)
        assert seq.delta(2) == pytest.approx(0.01)
        assert seq.zeta(2) == pytest.approx(0.2)

    def test_m1_violates_regime(self, seq):
        with pytest.raises(ParameterRegimeError) as info:
            make_paper_network(seq, 1)
        assert info.value.inequality == "c_m < r*L/delta_m"
        assert "c_m < r*L/delta_m" in str(info.value)

    def test_index_must_be_positive(self, seq):
        with pytest.raises(ConfigurationError):
            seq.check(0)

    def test_bad_base(self):
        with pytest.raises(ConfigurationError):
            ParamSequence(1.5, 2.0, 0.1, 1.0)

    def test_regime_of_canonical(self, canonical_net):
        assert regime_parameters(canonical_net) == (0.1, 1e-3, 1.0)

    def test_regime_needs_cheap_cross_links_above_L(self):
        net = make_lb_network(2, 1.0, Elbow(0.1, 1e-3, 1.0), Affine(0.0, 0.05))
        with pytest.raises(ParameterRegimeError, match="c > L"):
            regime_parameters(net)

    def test_regime_needs_elbow_knee_at_demand(self):
        net = make_lb_network(2, 1.0, Elbow(0.1, 1e-3, 2.0), Affine(0.0, 1.0))
        with pytest.raises(ParameterRegimeError):
            regime_parameters(net)


class TestEdgeListNetwork:
    def test_lb_conversion_costs(self, canonical_net):
        edges = canonical_net.to_edge_list()
        assert edges.names == list(canonical_net.link_names)
        profile = FlowProfile.from_local_flows(canonical_net, [1.0, 0.999])
        np.testing.assert_allclose(edges.player_costs(profile), [0.2, 0.0012])

    def test_general_graph(self):
        lat = Affine(1.0, 0.0)
        edges = EdgeListNetwork([("a", "b", lat), ("b", "t", lat), ("a", "t", Affine(0.0, 2.0))],
                                [("a", "t", 1.0)])
        x = np.array([[0.5, 0.5, 0.5]])
        assert edges.validate(x)
        np.testing.assert_allclose(edges.link_loads(x), [0.5, 0.5, 0.5])
        assert edges.player_costs(x)[0] == pytest.approx(0.5 * 0.5 + 0.5 * 0.5 + 0.5 * 2.0)

    def test_imbalance(self):
        lat = Affine(1.0, 0.0)
        edges = EdgeListNetwork([("a", "b", lat), ("b", "t", lat)], [("a", "t", 1.0)])
        check = edges.validate(np.array([[1.0, 0.7]]))
        assert any("flow imbalance" in v for v in check.violations)

    def test_duplicate_edge(self):
        lat = Affine(1.0, 0.0)
        with pytest.raises(ConfigurationError):
            EdgeListNetwork([("a", "t", lat), ("a", "t", lat)], [("a", "t", 1.0)])

import numpy as np
import pytest

from config import SolverSettings
from errors import ConfigurationError, ParameterRegimeError
from game import closed_form_selfish_cost
from metrics import (
    SWEEP_COLUMNS, altruism_benefit_spillover, closed_form_poa, default_beta_grid, m_sweep,
    price_of_anarchy, value_of_unilateral_altruism, wardrop_price_of_anarchy,
)
from network import make_paper_network


class TestPriceOfAnarchy:
    def test_closed_form_canonical(self, canonical_net):
        assert closed_form_poa(canonical_net) == pytest.approx(5.95)

    def test_simulated_canonical(self, canonical_net):
        report = price_of_anarchy(canonical_net)
        assert report.poa == pytest.approx(5.95, abs=1e-9)
        assert report.opt_total_cost == pytest.approx(0.2)
        assert report.worst_ne_total_cost == pytest.approx(1.19)
        assert report.equilibria_checked >= 2

    def test_sequence_m2(self, seq):
        report = price_of_anarchy(make_paper_network(seq, 2))
        assert report.poa == pytest.approx(13.0, abs=1e-9)

    def test_grows_along_sequence(self, seq):
        poas = [closed_form_poa(make_paper_network(seq, m)) for m in range(2, 7)]
        assert poas == sorted(poas)
        assert len(set(poas)) == len(poas)
        assert poas[0] == pytest.approx(13.0)
        assert poas[-1] > 100

    def test_wardrop_is_efficient(self, canonical_net, seq):
        for net in (canonical_net, make_paper_network(seq, 4)):
            assert wardrop_price_of_anarchy(net).poa == pytest.approx(1.0, abs=1e-9)

    def test_three_players(self, net3):
        report = price_of_anarchy(net3)
        assert report.poa == pytest.approx(1 + 0.66 / 0.1, abs=1e-9)


class TestValueOfUnilateralAltruism:
    def test_canonical(self, canonical_net):
        report = value_of_unilateral_altruism(canonical_net, 0, beta_grid=(0.75, 1.0))
        assert report.available
        assert report.selfish_best_cost == pytest.approx(0.595)
        assert report.altruistic_best_cost == pytest.approx(0.2, abs=1e-9)
        assert report.vou == pytest.approx(2.975, abs=1e-6)
        assert report.paper_lower_bound == pytest.approx(2.975)
        assert report.social_cost_at_best == pytest.approx(0.2012)
        np.testing.assert_allclose(report.local_flows_at_best, [1.0, 0.999], atol=1e-9)

    def test_sequence_m2(self, seq):
        net = make_paper_network(seq, 2)
        report = value_of_unilateral_altruism(net, 0, beta_grid=(0.75,))
        assert closed_form_selfish_cost(net) == pytest.approx(1.3)
        assert report.vou == pytest.approx(6.5, abs=1e-6)

    def test_progress_callback(self, canonical_net):
        calls = []
        value_of_unilateral_altruism(canonical_net, 0, beta_grid=(0.6, 0.75),
                                     callback=lambda msg, pct: calls.append(pct))
        assert calls == [0.5, 1.0]

    def test_vanishing_altruism_recovers_selfish_cost(self, canonical_net):
        report = value_of_unilateral_altruism(canonical_net, 0, beta_grid=(1e-12,))
        assert report.available
        assert report.vou >= 1.0 - 1e-9
        assert report.altruistic_best_cost == pytest.approx(0.595, abs=1e-9)

    def test_beta_out_of_range(self, canonical_net):
        with pytest.raises(ConfigurationError):
            value_of_unilateral_altruism(canonical_net, 0, beta_grid=(0.0, 0.5))

    def test_default_grid(self):
        grid = default_beta_grid(2)
        assert len(grid) == 102
        assert grid[-1] == 1.0
        assert 0.500001 in grid
        assert min(grid) > 0


class TestSpillover:
    def test_canonical(self, canonical_net):
        report = altruism_benefit_spillover(canonical_net, 0, 0.75)
        assert report.applicable
        np.testing.assert_allclose(report.deltas, [0.595 - 0.2, 0.595 - 0.0012])

    def test_outside_gamma(self, canonical_net):
        report = altruism_benefit_spillover(canonical_net, 0, 0.4)
        assert not report.applicable
        assert report.to_record()["deltas"] is None

    def test_three_players(self, net3):
        report = altruism_benefit_spillover(net3, 0, 0.9)
        assert report.applicable
        np.testing.assert_allclose(report.deltas, [0.76 - 0.3, 0.76 - 0.0023, 0.76 - 0.0023])


class TestSweep:
    def test_rows_in_m_order(self, seq):
        settings = SolverSettings(coarse_grid_step=0.05)
        rows = m_sweep(seq, [3, 2], beta_grid=(0.75,), settings=settings)
        assert [row["m"] for row in rows] == [3, 2]
        assert set(rows[0]) == set(SWEEP_COLUMNS)
        assert rows[1]["poa"] == pytest.approx(13.0)
        assert rows[1]["vou"] == pytest.approx(6.5, abs=1e-6)
        assert rows[0]["poa"] > rows[1]["poa"]
        assert rows[0]["wardrop_poa"] == pytest.approx(1.0, abs=1e-9)

    def test_regime_checked_first(self, seq):
        with pytest.raises(ParameterRegimeError):
            m_sweep(seq, [1, 2])

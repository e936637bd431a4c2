import json

import numpy as np
import pandas as pd
import pytest

from config import SolverSettings
from export import dumps_record, round_floats, write_table
from reproduce import _gamma_boundary_claim, _symmetric_ne_claim, canonical_network, emit_paper_reproduction

BETAS = (0.25, 0.5, 0.75, 1.0)


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("reproduction")
    calls = []
    report = emit_paper_reproduction(out, beta_grid=BETAS, callback=lambda msg, pct: calls.append((msg, pct)))
    return report, out, calls


class TestReproduction:
    def test_all_claims_pass(self, bundle):
        report, _, _ = bundle
        assert report.failed == []
        assert report.passed

    def test_claim_names(self, bundle):
        report, _, _ = bundle
        names = [c.name for c in report.checks]
        for name in ("trace", "symmetric_ne", "poa_canonical", "poa_growth", "wardrop_efficiency",
                     "vou_growth", "vou_canonical", "gamma_boundary",
                     "symmetric_ne_n3", "gamma_n3", "spillover_n3",
                     "symmetric_ne_n5", "gamma_n5", "spillover_n5"):
            assert name in names

    def test_discrepancies(self, bundle):
        report, _, _ = bundle
        assert len(report.discrepancies) == 7
        altruist = [d for d in report.discrepancies if "altruistic player's cost" in d["claim"]]
        assert [d["computed"] for d in altruist] == pytest.approx([0.3, 0.5])

    def test_files(self, bundle):
        report, out, _ = bundle
        record = json.loads((out / "reproduction.json").read_text(encoding="utf-8"))
        assert record["passed"]
        claims = pd.read_csv(out / "claims.csv")
        assert len(claims) == len(report.checks)
        sweep = pd.read_csv(out / "sweep.csv")
        assert sweep["m"].tolist() == [2, 3, 4, 5, 6]
        assert sweep["poa"].is_monotonic_increasing
        trace = pd.read_csv(out / "trace.csv")
        assert trace.loc[0, "cost_1"] == pytest.approx(0.1)

    def test_sweep_values(self, bundle):
        report, _, _ = bundle
        rows = {row["m"]: row for row in report.sweep}
        assert rows[2]["poa"] == pytest.approx(13.0)
        assert rows[2]["vou"] == pytest.approx(6.5, abs=1e-6)
        assert rows[6]["poa"] > 100

    def test_trace_costs_are_plain_floats(self, bundle):
        report, _, _ = bundle
        trace = next(c for c in report.checks if c.name == "trace")
        assert all(type(v) is float for v in trace.computed["round0_costs"])

    def test_sweep_reports_progress(self, bundle):
        _, _, calls = bundle
        messages = [msg for msg, _ in calls]
        assert any("m=6" in msg for msg in messages)
        assert "Sweep complete!" in messages
        fractions = [pct for _, pct in calls]
        assert fractions == sorted(fractions)
        assert 0.0 <= fractions[0] and fractions[-1] <= 1.0


class TestClaims:
    def test_five_player_symmetric_ne(self):
        net = canonical_network(5)
        check = _symmetric_ne_claim(net, SolverSettings(), "symmetric_ne_n5")
        assert check.passed
        assert check.computed["local_flow"] == pytest.approx(0.208)

    def test_loose_tolerance_widens_band(self):
        net = canonical_network()
        tight = _gamma_boundary_claim(net, SolverSettings())
        loose = _gamma_boundary_claim(net, SolverSettings(eps_eq=1e-2))
        tight_low, tight_high = tight.computed["unasserted_band"]
        loose_low, loose_high = loose.computed["unasserted_band"]
        assert loose_high - loose_low > tight_high - tight_low
        assert len(loose.computed["unasserted"]) >= len(tight.computed["unasserted"])


class TestExport:
    def test_round_floats(self):
        assert round_floats({"a": 1 / 3, "b": [np.float64(2.0), np.nan], "c": np.int64(4)}) == {
            "a": 0.333333333333, "b": [2.0, None], "c": 4,
        }

    def test_record_is_stable(self):
        record = {"z": 0.1 + 0.2, "a": np.array([1.0, 2.0])}
        assert dumps_record(record) == dumps_record(dict(reversed(list(record.items()))))
        assert '"z": 0.3' in dumps_record(record)

    def test_table_format(self, tmp_path):
        path = write_table(tmp_path / "t.csv", [{"m": 2, "poa": 1 / 3}], ["m", "poa"])
        assert path.read_text(encoding="utf-8") == "m,poa\n2,0.333333333333\n"

import json

import pytest

from energy_cp.report import TestReport, read_report, write_report


def make_report(**overrides):
    fields = dict(method="asymptotic", n=500, d=1, beta=1.0, alpha=0.05, k_star=250,
                  t_star=3.25, p_value=0.0, reject=True, eigenvalues_used=50, replicates=499,
                  grid_points=1000, seed=2**64 - 1,
                  elapsed_millis={"scan": 1.5, "spectrum": 30.0, "simulation": 420.0,
                                  "total": 451.5})
    fields.update(overrides)
    return TestReport(**fields)


def test_round_trip(tmp_path):
    report = make_report()
    write_report(report, tmp_path / "r.json")
    assert read_report(tmp_path / "r.json") == report


def test_round_trip_long_window(tmp_path):
    report = make_report(method="long", refined_window=(4990001, 4992001))
    write_report(report, tmp_path / "r.json")
    back = read_report(tmp_path / "r.json")
    assert back == report
    assert back.refined_window == (4990001, 4992001)


def test_round_trip_permutation_nulls(tmp_path):
    report = make_report(method="permutation", eigenvalues_used=None, grid_points=None,
                         p_value=0.5, reject=False)
    write_report(report, tmp_path / "r.json")
    payload = json.loads((tmp_path / "r.json").read_text())
    assert payload["eigenvaluesUsed"] is None and payload["gridPoints"] is None
    assert read_report(tmp_path / "r.json") == report


def test_schema(tmp_path):
    write_report(make_report(), tmp_path / "r.json")
    payload = json.loads((tmp_path / "r.json").read_text())
    assert payload["pValue"] == 0.0 and isinstance(payload["pValue"], float)
    assert isinstance(payload["reject"], bool)
    assert payload["seed"] == 2**64 - 1
    assert "refinedWindow" not in payload
    for key in ("method", "n", "d", "beta", "alpha", "kStar", "tStar", "pValue", "reject",
                "eigenvaluesUsed", "replicates", "gridPoints", "seed", "elapsedMillis"):
        assert key in payload
    assert '"pValue": 0.0' in (tmp_path / "r.json").read_text()


def test_missing_directory(tmp_path):
    with pytest.raises(OSError):
        write_report(make_report(), tmp_path / "nope" / "r.json")


def test_invariants_enforced():
    with pytest.raises(ValueError):
        make_report(p_value=0.2, reject=True)
    with pytest.raises(ValueError):
        make_report(p_value=1.5, reject=False)
    with pytest.raises(ValueError):
        make_report(method="bootstrap")


def test_missing_field_rejected():
    payload = make_report().to_dict()
    del payload["kStar"]
    with pytest.raises(ValueError, match="kStar"):
        TestReport.from_dict(payload)

import json
import math
from dataclasses import fields

from reproduction import CheckCollector, PublishedCheck, create_published_checks


def test_check_fields_are_the_band_only():
    assert [f.name for f in fields(PublishedCheck)] == ["name", "expected", "lower", "upper"]


def test_standard_checks_have_ordered_bands():
    checks = create_published_checks()
    assert "k_ratio_6.6" in checks
    assert "fwhm_opt_ratio_6.6" not in checks
    for check in checks.values():
        assert check.lower <= check.upper
    assert checks["purity_ratio_1"].accepts(1 / 1.079)


def test_accepts_rejects_non_finite():
    check = PublishedCheck("k", "K >= 1", 1.0, math.inf)
    assert check.accepts(1.5)
    assert not check.accepts(math.nan)
    assert not check.accepts(math.inf)


def test_collector_records_failures_and_errors(tmp_path):
    collector = CheckCollector()
    band = PublishedCheck("unit", "in [0, 1]", 0.0, 1.0)
    assert collector.run(band, lambda: 0.5).passed
    assert not collector.run(band, lambda: 2.0).passed

    def broken():
        raise ZeroDivisionError("no value")

    failed = collector.run(band, broken)
    assert failed.computed is None
    assert failed.detail.startswith("ZeroDivisionError")
    collector.add_warning("coarse grid")

    summary = collector.get_summary()
    assert summary["passed"] == 1 and summary["failed"] == 2
    assert not summary["all_passed"]
    assert summary["warnings"] == 1

    report = json.loads(collector.export_report(tmp_path / "report.json").read_text(encoding="utf-8"))
    assert [c["name"] for c in report["checks"]] == ["unit"] * 3
    assert report["warnings"] == ["coarse grid"]

import csv
import json

import pytest

from admatch import (
    Matching,
    compute_metrics,
    emit_report,
    generate_instance,
    solve,
)
from admatch.errors import InfeasibleMatching
from conftest import make_instance


def test_full_merchant_utilization():
    inst = make_instance(
        influencers=[(f"f{i}", float(10 - i), ["p1"]) for i in range(4)],
        products=[("p1", 4, "m1")],
        merchants=[("m1", 4)],
    )
    matching, _ = solve(inst)
    report = compute_metrics(inst, matching)
    m = report.merchants[0]
    assert m.utilization == 1.0
    assert m.free_slots == 0


def test_unmatched_influencer_has_no_achieved_rank(market_4x3x2):
    matching, _ = solve(market_4x3x2)
    report = compute_metrics(market_4x3x2, matching)
    for f in report.influencers:
        if f.product is None:
            assert f.achieved_rank is None
        else:
            assert f.achieved_rank >= 1


def test_product_utilization_matches_independent_recount():
    inst = generate_instance(seed=9, n_influencers=15, n_products=8, n_merchants=3)
    matching, _ = solve(inst)
    report = compute_metrics(inst, matching)
    counts = {}
    for fid, pid in matching.pairs:
        counts[pid] = counts.get(pid, 0) + 1
    for p in report.products:
        expected = counts.get(p.id, 0)
        assert p.assigned == expected
        if inst.product_by_id[p.id].quota:
            assert p.utilization == expected / inst.product_by_id[p.id].quota


def test_zero_quota_product_reports_undefined_utilization():
    inst = make_instance(
        influencers=[("a", 1.0, ["p1"])],
        products=[("p1", 0, "m1")],
        merchants=[("m1", 0)],
    )
    matching, _ = solve(inst)
    report = compute_metrics(inst, matching)
    assert report.products[0].utilization is None
    assert report.merchants[0].utilization is None


def test_free_slots_identity():
    for seed in range(10):
        inst = generate_instance(seed=seed, n_influencers=12, n_products=6, n_merchants=3)
        matching, _ = solve(inst)
        report = compute_metrics(inst, matching)
        for m in report.merchants:
            assert m.free_slots + m.assigned == m.quota
            assert m.free_slots >= 0


def test_mean_achieved_rank_bounded():
    inst = generate_instance(seed=4, n_influencers=20, n_products=8, n_merchants=3)
    matching, _ = solve(inst)
    report = compute_metrics(inst, matching)
    ranks = [f.achieved_rank for f in report.influencers if f.achieved_rank]
    if ranks:
        assert sum(ranks) / len(ranks) <= max(
            len(f.desired) for f in inst.influencers
        )


def test_histogram_counts_sum_to_population():
    inst = generate_instance(seed=6, n_influencers=18, n_products=9, n_merchants=4)
    matching, _ = solve(inst)
    report = compute_metrics(inst, matching)
    populations = {
        "merchant_utilization": sum(
            1 for m in report.merchants if m.utilization is not None
        ),
        "merchant_free_slots": len(report.merchants),
        "product_utilization": sum(
            1 for p in report.products if p.utilization is not None
        ),
        "influencer_achieved_rank": sum(
            1 for f in report.influencers if f.achieved_rank is not None
        ),
    }
    for family, expected in populations.items():
        assert sum(c for _, _, c in report.histograms[family]) == expected


def test_infeasible_matching_rejected(market_4x3x2):
    over = Matching.from_assignment(market_4x3x2, {"a": "p1", "b": "p1"})
    with pytest.raises(InfeasibleMatching):
        compute_metrics(market_4x3x2, over)


def test_empty_matching_still_emits_rows(tmp_path, market_4x3x2):
    report = compute_metrics(
        market_4x3x2, Matching.from_assignment(market_4x3x2, {})
    )
    out = tmp_path / "r.csv"
    emit_report(report, "csv", out)
    rows = list(csv.DictReader(out.open()))
    merchant_rows = [r for r in rows if r["section"] == "merchant"]
    assert len(merchant_rows) == len(market_4x3x2.merchants)
    assert all(r["assigned"] == "0" for r in merchant_rows)


def test_repeated_emission_is_byte_identical(tmp_path):
    inst = generate_instance(seed=2, n_influencers=10, n_products=5, n_merchants=2)
    matching, _ = solve(inst)
    report = compute_metrics(inst, matching)
    for fmt in ("csv", "json"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        emit_report(report, fmt, a)
        emit_report(report, fmt, b)
        assert a.read_bytes() == b.read_bytes()


def test_json_and_csv_agree_numerically(tmp_path):
    inst = generate_instance(seed=3, n_influencers=12, n_products=6, n_merchants=3)
    matching, _ = solve(inst)
    report = compute_metrics(inst, matching)
    jpath, cpath = tmp_path / "r.json", tmp_path / "r.csv"
    emit_report(report, "json", jpath)
    emit_report(report, "csv", cpath)
    doc = json.loads(jpath.read_text())
    rows = list(csv.DictReader(cpath.open()))

    by_id = {r["id"]: r for r in rows if r["section"] == "merchant"}
    for m in doc["merchants"]:
        row = by_id[m["id"]]
        assert int(row["quota"]) == m["quota"]
        assert int(row["assigned"]) == m["assigned"]
        assert int(row["free_slots"]) == m["free_slots"]
        if m["utilization"] is None:
            assert row["utilization"] == ""
        else:
            assert float(row["utilization"]) == m["utilization"]

    hist_rows = [r for r in rows if r["section"] == "histogram"]
    flattened = [
        [family, *map(float, (r["bin_low"], r["bin_high"], r["count"]))]
        for family in doc["histograms"]
        for r in hist_rows
        if r["family"] == family
    ]
    expected = [
        [family, float(low), float(high), float(count)]
        for family, bins in doc["histograms"].items()
        for low, high, count in bins
    ]
    assert sorted(map(str, flattened)) == sorted(map(str, expected))

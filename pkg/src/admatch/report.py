"""Utilization, free-slot and preference-rank metrics, with plot-ready bins."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional

from .errors import InfeasibleMatching
from .model import Instance, Matching, feasibility_violations

UTILIZATION_BINS = 10

HISTOGRAM_FAMILIES = (
    "merchant_utilization",
    "merchant_free_slots",
    "product_utilization",
    "influencer_achieved_rank",
)


@dataclass(frozen=True)
class MerchantMetrics:
    id: str
    quota: int
    assigned: int
    utilization: Optional[float]  # None when quota is 0
    free_slots: int


@dataclass(frozen=True)
class ProductMetrics:
    id: str
    quota: int
    assigned: int
    utilization: Optional[float]  # None when quota is 0


@dataclass(frozen=True)
class InfluencerMetrics:
    id: str
    product: Optional[str]
    achieved_rank: Optional[int]  # 1-based position of the match in desired
    reputation_rank: int  # 1-based position in the global reputation order


@dataclass(frozen=True)
class MetricsReport:
    merchants: tuple[MerchantMetrics, ...]
    products: tuple[ProductMetrics, ...]
    influencers: tuple[InfluencerMetrics, ...]
    histograms: dict[str, tuple[tuple[float, float, int], ...]]


def compute_metrics(instance: Instance, matching: Matching) -> MetricsReport:
    """All four metric families, recounted from the assignment pairs."""
    problems = feasibility_violations(instance, matching)
    if problems:
        raise InfeasibleMatching("; ".join(problems))

    per_product: dict[str, int] = {}
    per_merchant: dict[str, int] = {}
    for fid, pid in matching.pairs:
        per_product[pid] = per_product.get(pid, 0) + 1
        owner = instance.product_by_id[pid].merchant
        per_merchant[owner] = per_merchant.get(owner, 0) + 1

    merchants = tuple(
        MerchantMetrics(
            id=m.id,
            quota=m.quota,
            assigned=per_merchant.get(m.id, 0),
            utilization=(per_merchant.get(m.id, 0) / m.quota) if m.quota else None,
            free_slots=m.quota - per_merchant.get(m.id, 0),
        )
        for m in sorted(instance.merchants, key=lambda m: m.id)
    )
    products = tuple(
        ProductMetrics(
            id=p.id,
            quota=p.quota,
            assigned=per_product.get(p.id, 0),
            utilization=(per_product.get(p.id, 0) / p.quota) if p.quota else None,
        )
        for p in sorted(instance.products, key=lambda p: p.id)
    )

    rep_order = sorted(
        instance.influencers, key=lambda f: instance.tie_rank[f.id]
    )
    rep_order.sort(key=lambda f: f.reputation, reverse=True)
    rep_rank = {f.id: i + 1 for i, f in enumerate(rep_order)}

    assignment = matching.assignment
    influencers = []
    for fid in instance.tie_break:
        pid = assignment.get(fid)
        achieved = None
        if pid is not None:
            achieved = instance.desired_rank[fid][pid] + 1
        influencers.append(
            InfluencerMetrics(
                id=fid, product=pid, achieved_rank=achieved,
                reputation_rank=rep_rank[fid],
            )
        )

    histograms = {
        "merchant_utilization": _ratio_histogram(
            [m.utilization for m in merchants if m.utilization is not None]
        ),
        "merchant_free_slots": _int_histogram([m.free_slots for m in merchants]),
        "product_utilization": _ratio_histogram(
            [p.utilization for p in products if p.utilization is not None]
        ),
        "influencer_achieved_rank": _int_histogram(
            [f.achieved_rank for f in influencers if f.achieved_rank is not None]
        ),
    }
    return MetricsReport(
        merchants=merchants,
        products=products,
        influencers=tuple(influencers),
        histograms=histograms,
    )


def _ratio_histogram(values: list[float]) -> tuple[tuple[float, float, int], ...]:
    """Fixed equal-width bins over [0, 1]; 1.0 falls in the last bin."""
    counts = [0] * UTILIZATION_BINS
    for v in values:
        i = min(int(v * UTILIZATION_BINS), UTILIZATION_BINS - 1)
        counts[i] += 1
    return tuple(
        (i / UTILIZATION_BINS, (i + 1) / UTILIZATION_BINS, counts[i])
        for i in range(UTILIZATION_BINS)
    )


def _int_histogram(values: list[int]) -> tuple[tuple[float, float, int], ...]:
    """One unit-width bin per integer from 0 to the observed maximum."""
    if not values:
        return ()
    top = max(values)
    counts = [0] * (top + 1)
    for v in values:
        counts[v] += 1
    return tuple((v, v + 1, counts[v]) for v in range(top + 1))


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "merchants": [
            {
                "id": m.id, "quota": m.quota, "assigned": m.assigned,
                "utilization": m.utilization, "free_slots": m.free_slots,
            }
            for m in report.merchants
        ],
        "products": [
            {
                "id": p.id, "quota": p.quota, "assigned": p.assigned,
                "utilization": p.utilization,
            }
            for p in report.products
        ],
        "influencers": [
            {
                "id": f.id, "product": f.product,
                "achieved_rank": f.achieved_rank,
                "reputation_rank": f.reputation_rank,
            }
            for f in report.influencers
        ],
        "histograms": {
            family: [list(b) for b in bins]
            for family, bins in report.histograms.items()
        },
    }


_CSV_COLUMNS = [
    "section", "id", "quota", "assigned", "utilization", "free_slots",
    "product", "achieved_rank", "reputation_rank",
    "family", "bin_low", "bin_high", "count",
]


def emit_report(report: MetricsReport, format: str, out_path) -> None:
    """Write the report as JSON or CSV with deterministic field ordering."""
    if format == "json":
        text = json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        return
    if format != "csv":
        raise ValueError(f"unknown report format {format!r}")

    def cell(v):
        return "" if v is None else str(v)

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_CSV_COLUMNS)
        for m in report.merchants:
            w.writerow(
                ["merchant", m.id, m.quota, m.assigned, cell(m.utilization),
                 m.free_slots, "", "", "", "", "", "", ""]
            )
        for p in report.products:
            w.writerow(
                ["product", p.id, p.quota, p.assigned, cell(p.utilization),
                 "", "", "", "", "", "", "", ""]
            )
        for f in report.influencers:
            w.writerow(
                ["influencer", f.id, "", "", "", "", cell(f.product),
                 cell(f.achieved_rank), f.reputation_rank, "", "", "", ""]
            )
        for family in HISTOGRAM_FAMILIES:
            for low, high, count in report.histograms.get(family, ()):
                w.writerow(
                    ["histogram", "", "", "", "", "", "", "", "",
                     family, low, high, count]
                )

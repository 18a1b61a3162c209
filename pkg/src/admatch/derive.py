"""Performance indicators derived from retail transaction logs.

Two reputation indicators are supported:

* total spending ("gt"): a consumer's cumulative purchase value; per-product
  spend orders their desired list;
* average purchase frequency ("fmc"): order count divided by the number of
  distinct consumers in the log; per-product order counts order the desired
  list.

Both are ordinal: downstream code only ever compares them.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import EmptyLog, MissingProfileField, NegativeQuota, ParseError

PROFILE_FIELDS = ("branch", "city", "type", "gender")


@dataclass(frozen=True)
class TransactionRecord:
    """One purchase event, normalized from whatever CSV it came from."""

    consumer_key: str
    product_code: str
    merchant_code: str
    quantity: int
    unit_price: Decimal
    timestamp: Optional[str] = None

    def __post_init__(self):
        if self.quantity < 1:
            raise ValueError(f"quantity must be >= 1, got {self.quantity}")
        if self.unit_price < 0:
            raise ValueError(f"unit_price must be >= 0, got {self.unit_price}")


@dataclass(frozen=True)
class ReputationTable:
    """Scalar reputation per consumer plus per-product desirability scores."""

    mode: str  # "gt" | "fmc"
    reputation: dict[str, object]  # consumer -> non-negative scalar
    desirability: dict[str, dict[str, object]]  # consumer -> product -> score

    def desired_products(self, consumer: str, top_n: Optional[int] = None) -> list[str]:
        """Product codes ordered by score descending, ties lexical."""
        scores = self.desirability[consumer]
        ordered = sorted(scores, key=lambda p: (_neg(scores[p]), p))
        if top_n is not None:
            ordered = ordered[:top_n]
        return ordered

    def ranking(self) -> list[str]:
        """Consumers by reputation descending, ties broken lexically."""
        return sorted(self.reputation, key=lambda c: (_neg(self.reputation[c]), c))


class _neg:
    """Descending sort key that works for Decimal, Fraction and float alike."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v > other.v

    def __eq__(self, other):
        return self.v == other.v


def derive_gt(transactions: Sequence[TransactionRecord]) -> ReputationTable:
    """Reputation from total spending; desired lists from per-product spend."""
    if not transactions:
        raise EmptyLog("no transactions")
    spend: dict[str, dict[str, Decimal]] = {}
    for t in transactions:
        per = spend.setdefault(t.consumer_key, {})
        per[t.product_code] = (
            per.get(t.product_code, Decimal(0)) + t.quantity * t.unit_price
        )
    reputation = {c: sum(per.values(), Decimal(0)) for c, per in spend.items()}
    return ReputationTable(mode="gt", reputation=reputation, desirability=spend)


def derive_fmc(transactions: Sequence[TransactionRecord]) -> ReputationTable:
    """Reputation = own order count / distinct consumers in the log.

    An order is a distinct (consumer, timestamp) pair; records without a
    timestamp each count as their own order.
    """
    if not transactions:
        raise EmptyLog("no transactions")
    orders: dict[str, set] = {}
    per_product: dict[str, dict[str, set]] = {}
    untimed = 0
    for t in transactions:
        if t.timestamp is None:
            untimed += 1
            token = ("#", untimed)
        else:
            token = ("@", t.timestamp)
        orders.setdefault(t.consumer_key, set()).add(token)
        per_product.setdefault(t.consumer_key, {}).setdefault(
            t.product_code, set()
        ).add(token)
    universe = len(orders)
    reputation = {c: Fraction(len(toks), universe) for c, toks in orders.items()}
    desirability = {
        c: {p: len(toks) for p, toks in per.items()}
        for c, per in per_product.items()
    }
    return ReputationTable(
        mode="fmc", reputation=reputation, desirability=desirability
    )


def derive_merchant_quotas(
    transactions: Sequence[TransactionRecord], capacity: int
) -> dict[str, int]:
    """Split ``capacity`` influencer slots across merchants by sales volume.

    Proportional to total quantity sold, with a floor of one slot each, so
    the split is monotone in volume.
    """
    if capacity < 1:
        raise ValueError(f"capacity must be >= 1, got {capacity}")
    if not transactions:
        raise EmptyLog("no transactions")
    volume: dict[str, int] = {}
    for t in transactions:
        volume[t.merchant_code] = volume.get(t.merchant_code, 0) + t.quantity
    total = sum(volume.values())
    return {
        m: max(1, round(Fraction(capacity * v, total)))
        for m, v in volume.items()
    }


def derive_product_quotas(
    transactions: Sequence[TransactionRecord],
    merchant_quotas: Mapping[str, int],
    owner: Mapping[str, str],
) -> dict[str, int]:
    """Volume-proportional per-product quotas honoring the operational limit.

    Each product gets at least one slot, no product exceeds its merchant's
    quota, and per merchant the quotas sum to at least the merchant quota.
    """
    if not transactions:
        raise EmptyLog("no transactions")
    volume: dict[str, int] = {}
    for t in transactions:
        volume[t.product_code] = volume.get(t.product_code, 0) + t.quantity
    by_merchant: dict[str, list[str]] = {}
    for pid in sorted(volume):
        by_merchant.setdefault(owner[pid], []).append(pid)
    quotas: dict[str, int] = {}
    for mid, pids in sorted(by_merchant.items()):
        q = merchant_quotas[mid]
        vol_total = sum(volume[p] for p in pids)
        for pid in pids:
            share = max(1, round(Fraction(q * volume[pid], vol_total)))
            quotas[pid] = min(share, q)
        # Top up the busiest products until the sum covers the merchant quota.
        order = sorted(pids, key=lambda p: (-volume[p], p))
        i = 0
        while sum(quotas[p] for p in pids) < q:
            pid = order[i % len(order)]
            if quotas[pid] < q:
                quotas[pid] += 1
            i += 1
    return quotas


def product_quotas_from_file(path) -> dict[str, tuple[int, str]]:
    """Parse a product-quota CSV into {product: (quota, merchant)}.

    Expected columns (case-insensitive): codigo/product, quota,
    comerciante/merchant.
    """
    import csv

    out: dict[str, tuple[int, str]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return out
        cols = _resolve_quota_header(header, path)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise ParseError("short row", file=str(path), line=lineno)
            code = row[cols["codigo"]].strip()
            raw_quota = row[cols["quota"]].strip()
            merchant = row[cols["comerciante"]].strip()
            try:
                quota = int(raw_quota)
            except ValueError:
                raise ParseError(
                    f"bad quota {raw_quota!r}", file=str(path), line=lineno
                ) from None
            if quota < 0:
                raise NegativeQuota(
                    f"{path}:{lineno}: product {code!r} has quota {quota}"
                )
            out[code] = (quota, merchant)
    return out


_QUOTA_ALIASES = {
    "codigo": {"codigo", "code", "product", "product_code", "cod"},
    "quota": {"quota", "l", "limit"},
    "comerciante": {"comerciante", "merchant", "merchant_code", "com"},
}


def _resolve_quota_header(header: list[str], path) -> dict[str, int]:
    cols = {}
    lowered = [h.strip().lower() for h in header]
    for canonical, aliases in _QUOTA_ALIASES.items():
        for i, name in enumerate(lowered):
            if name in aliases:
                cols[canonical] = i
                break
        else:
            raise ParseError(f"missing column {canonical!r}", file=str(path), line=1)
    return cols


def compose_profile_key(record_fields: Mapping[str, str]) -> str:
    """Canonical consumer key for logs without a buyer id.

    Joins branch, city, type, gender (in that order) with "|", lowercased
    and trimmed, so equal profiles always collapse to the same key.
    """
    parts = []
    for name in PROFILE_FIELDS:
        value = record_fields.get(name)
        if value is None and name == "type":
            value = record_fields.get("customer_type")
        if value is None or not str(value).strip():
            raise MissingProfileField(name)
        parts.append(str(value).strip().lower())
    return "|".join(parts)

"""CSV/JSON ingestion, serialization, and synthetic instance generation."""

from __future__ import annotations

import csv
import json
import random
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional, Sequence

from .derive import PROFILE_FIELDS, TransactionRecord, compose_profile_key
from .errors import InvalidGeneratorParams, ParseError, UnknownEntity
from .model import Influencer, Instance, Matching, Merchant, Product, build_instance

NO_PRODUCT = "-"

_ID_ALIASES = {"id", "nome", "name"}
_RANK_ALIASES = {"rank", "rep", "reputation"}
_MERCHANT_ID_ALIASES = {"nome", "id", "name", "merchant"}
_QUOTA_ALIASES = {"quota"}
_PRODUCT_ID_ALIASES = {"codigo", "code", "id", "product", "product_code"}
_OWNER_ALIASES = {"comerciante", "merchant", "merchant_code"}

_TX_ALIASES = {
    "consumer_key": {"consumer_key", "consumer", "customer", "customer_id"},
    "product_code": {"product_code", "product", "codigo", "product_id"},
    "merchant_code": {"merchant_code", "merchant", "comerciante", "merchant_id"},
    "quantity": {"quantity", "qty"},
    "unit_price": {"unit_price", "price", "preco"},
    "timestamp": {"timestamp", "date", "datetime"},
}


def _find_col(lowered: list[str], aliases: set[str]) -> Optional[int]:
    for i, name in enumerate(lowered):
        if name in aliases:
            return i
    return None


def load_instance_csv(
    influencers_path,
    merchants_path,
    products_path,
    *,
    lenient: bool = False,
    clamp_quota: bool = False,
) -> Instance:
    """Build a validated Instance from the three table-layout CSVs.

    Influencers: id, rank, then one column per preference slot holding a
    product code ("-" or blank meaning no entry).  Merchants: id, quota.
    Products: code, quota, owning merchant.
    """
    influencers = _load_influencers(influencers_path)
    merchants = _load_merchants(merchants_path)
    products = _load_products(products_path)
    return build_instance(
        influencers, products, merchants, lenient=lenient, clamp_quota=clamp_quota
    )


def _load_influencers(path) -> list[Influencer]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ParseError("influencer file needs id and rank columns", file=str(path), line=1)
        lowered = [h.strip().lower() for h in header]
        if lowered[0] not in _ID_ALIASES:
            raise ParseError(f"first column must be an id, got {header[0]!r}", file=str(path), line=1)
        if lowered[1] not in _RANK_ALIASES:
            raise ParseError(f"second column must be a rank, got {header[1]!r}", file=str(path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            fid = row[0].strip()
            try:
                rank = float(row[1])
            except (ValueError, IndexError):
                raise ParseError(
                    f"bad rank {row[1] if len(row) > 1 else ''!r}",
                    file=str(path), line=lineno,
                ) from None
            desired = tuple(
                c.strip() for c in row[2:] if c.strip() and c.strip() != NO_PRODUCT
            )
            out.append(Influencer(id=fid, reputation=rank, desired=desired))
    return out


def _load_merchants(path) -> list[Merchant]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return out
        lowered = [h.strip().lower() for h in header]
        id_col = _find_col(lowered, _MERCHANT_ID_ALIASES)
        quota_col = _find_col(lowered, _QUOTA_ALIASES)
        if id_col is None or quota_col is None:
            raise ParseError("merchant file needs id and quota columns", file=str(path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                quota = int(row[quota_col])
            except (ValueError, IndexError):
                raise ParseError("bad merchant quota", file=str(path), line=lineno) from None
            out.append(Merchant(id=row[id_col].strip(), quota=quota))
    return out


def _load_products(path) -> list[Product]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return out
        lowered = [h.strip().lower() for h in header]
        id_col = _find_col(lowered, _PRODUCT_ID_ALIASES)
        quota_col = _find_col(lowered, _QUOTA_ALIASES)
        owner_col = _find_col(lowered, _OWNER_ALIASES)
        if id_col is None or quota_col is None or owner_col is None:
            raise ParseError(
                "product file needs code, quota and merchant columns",
                file=str(path), line=1,
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                quota = int(row[quota_col])
            except (ValueError, IndexError):
                raise ParseError("bad product quota", file=str(path), line=lineno) from None
            out.append(
                Product(id=row[id_col].strip(), quota=quota, merchant=row[owner_col].strip())
            )
    return out


def save_instance_csv(instance: Instance, out_dir) -> dict[str, Path]:
    """Write influencers.csv / merchants.csv / products.csv into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "influencers": out_dir / "influencers.csv",
        "merchants": out_dir / "merchants.csv",
        "products": out_dir / "products.csv",
    }
    width = max((len(f.desired) for f in instance.influencers), default=1)
    width = max(width, 1)
    with open(paths["influencers"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nome", "rank"] + [str(i) for i in range(width)])
        for f in instance.influencers:
            slots = list(f.desired) + [NO_PRODUCT] * (width - len(f.desired))
            w.writerow([f.id, repr(float(f.reputation))] + slots)
    with open(paths["merchants"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nome", "quota"])
        for m in instance.merchants:
            w.writerow([m.id, m.quota])
    with open(paths["products"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["codigo", "quota", "comerciante"])
        for p in instance.products:
            w.writerow([p.id, p.quota, p.merchant])
    return paths


def instance_to_json(instance: Instance) -> str:
    doc = {
        "influencers": [
            {"id": f.id, "reputation": float(f.reputation), "desired": list(f.desired)}
            for f in instance.influencers
        ],
        "products": [
            {"id": p.id, "quota": p.quota, "merchant": p.merchant}
            for p in instance.products
        ],
        "merchants": [
            {"id": m.id, "quota": m.quota, "products": list(m.products)}
            for m in instance.merchants
        ],
        "tie_break": list(instance.tie_break),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def instance_from_json(text: str, *, clamp_quota: bool = False) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad instance JSON: {exc}") from exc
    try:
        influencers = [
            Influencer(id=f["id"], reputation=f["reputation"], desired=tuple(f["desired"]))
            for f in doc["influencers"]
        ]
        products = [
            Product(id=p["id"], quota=p["quota"], merchant=p["merchant"])
            for p in doc["products"]
        ]
        merchants = [
            Merchant(id=m["id"], quota=m["quota"], products=tuple(m.get("products", ())))
            for m in doc["merchants"]
        ]
        tie_break = doc.get("tie_break")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad instance JSON: {exc}") from exc
    return build_instance(influencers, products, merchants, tie_break, clamp_quota=clamp_quota)


def load_transactions_csv(path, profile_mode: str = "direct") -> list[TransactionRecord]:
    """Normalize a transaction CSV into records.

    ``direct`` mode requires a consumer id column; ``composite`` builds the
    consumer key from the branch/city/type/gender profile columns.
    """
    if profile_mode not in ("direct", "composite"):
        raise ValueError(f"unknown profile mode {profile_mode!r}")
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty transaction file", file=str(path), line=1)
        lowered = [h.strip().lower() for h in header]
        cols = {}
        for canonical, aliases in _TX_ALIASES.items():
            cols[canonical] = _find_col(lowered, aliases)
        for required in ("product_code", "merchant_code", "quantity", "unit_price"):
            if cols[required] is None:
                raise ParseError(f"missing column {required!r}", file=str(path), line=1)
        if profile_mode == "direct" and cols["consumer_key"] is None:
            raise ParseError("missing consumer id column", file=str(path), line=1)
        profile_cols = {}
        if profile_mode == "composite":
            for name in PROFILE_FIELDS:
                aliases = {name} if name != "type" else {"type", "customer_type", "customer type"}
                profile_cols[name] = _find_col(lowered, aliases)

        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if profile_mode == "direct":
                key = row[cols["consumer_key"]].strip()
            else:
                fields = {
                    name: (row[i] if i is not None and i < len(row) else None)
                    for name, i in profile_cols.items()
                }
                key = compose_profile_key(fields)
            try:
                quantity = int(row[cols["quantity"]])
            except (ValueError, IndexError):
                raise ParseError("bad quantity", file=str(path), line=lineno) from None
            try:
                price = Decimal(row[cols["unit_price"]].strip())
            except (InvalidOperation, IndexError):
                raise ParseError("bad unit_price", file=str(path), line=lineno) from None
            ts_col = cols["timestamp"]
            ts = None
            if ts_col is not None and ts_col < len(row) and row[ts_col].strip():
                ts = row[ts_col].strip()
            try:
                records.append(
                    TransactionRecord(
                        consumer_key=key,
                        product_code=row[cols["product_code"]].strip(),
                        merchant_code=row[cols["merchant_code"]].strip(),
                        quantity=quantity,
                        unit_price=price,
                        timestamp=ts,
                    )
                )
            except ValueError as exc:
                raise ParseError(str(exc), file=str(path), line=lineno) from None
    return records


def save_matching_csv(instance: Instance, matching: Matching, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["influencer", "product", "merchant"])
        for fid, pid in matching.pairs:
            w.writerow([fid, pid, instance.product_by_id[pid].merchant])


def load_matching_csv(path, instance: Instance) -> Matching:
    assignment: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty matching file", file=str(path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ParseError("short row", file=str(path), line=lineno)
            fid, pid = row[0].strip(), row[1].strip()
            if fid in assignment:
                raise ParseError(
                    f"influencer {fid!r} listed twice", file=str(path), line=lineno
                )
            assignment[fid] = pid
    return Matching.from_assignment(instance, assignment)


def _weighted_sample(rng: random.Random, items: list, weights: list[float], k: int) -> list:
    items = list(items)
    weights = list(weights)
    picked = []
    for _ in range(k):
        total = sum(weights)
        x = rng.random() * total
        acc = 0.0
        idx = len(items) - 1
        for i, w in enumerate(weights):
            acc += w
            if x < acc:
                idx = i
                break
        picked.append(items.pop(idx))
        weights.pop(idx)
    return picked


def generate_instance(
    seed: int,
    n_influencers: int,
    n_products: int,
    n_merchants: int,
    pref_len_range: tuple[int, int] = (1, 4),
    quota_params: Optional[dict] = None,
) -> Instance:
    """Deterministic pseudo-random instance; same seed gives the same bytes.

    Product popularity follows a Zipf-like weight 1/rank^s so some products
    attract many influencers and most attract few.  Merchant quotas are drawn
    inside the operational limit, so every generated instance validates.
    """
    params = {"product_quota_range": (1, 3), "zipf_exponent": 1.0}
    if quota_params:
        params.update(quota_params)
    lo, hi = pref_len_range
    q_lo, q_hi = params["product_quota_range"]
    if n_influencers < 0 or n_products < 0 or n_merchants < 0:
        raise InvalidGeneratorParams("sizes must be non-negative")
    if n_products > 0 and n_merchants < 1:
        raise InvalidGeneratorParams("products need at least one merchant")
    if not (0 <= lo <= hi <= n_products):
        raise InvalidGeneratorParams(
            f"pref_len_range {pref_len_range} outside [0, {n_products}]"
        )
    if not (0 <= q_lo <= q_hi):
        raise InvalidGeneratorParams(f"bad product_quota_range {(q_lo, q_hi)}")

    rng = random.Random(seed)
    merchant_ids = [f"M{k:02d}" for k in range(1, n_merchants + 1)]
    product_ids = [f"P{j:03d}" for j in range(1, n_products + 1)]
    influencer_ids = [f"F{i:03d}" for i in range(1, n_influencers + 1)]

    products = []
    for pid in product_ids:
        products.append(
            Product(
                id=pid,
                quota=rng.randint(q_lo, q_hi),
                merchant=merchant_ids[rng.randrange(n_merchants)],
            )
        )

    s = params["zipf_exponent"]
    weights = [1.0 / (j + 1) ** s for j in range(n_products)]

    influencers = []
    for fid in influencer_ids:
        length = rng.randint(lo, hi)
        desired = tuple(_weighted_sample(rng, product_ids, weights, length))
        reputation = round(rng.uniform(0.1, 10.0), 6)
        influencers.append(Influencer(id=fid, reputation=reputation, desired=desired))

    merchants = []
    for mid in merchant_ids:
        quotas = [p.quota for p in products if p.merchant == mid]
        if not quotas:
            merchants.append(Merchant(id=mid, quota=0))
        else:
            merchants.append(Merchant(id=mid, quota=rng.randint(max(quotas), sum(quotas))))

    return build_instance(influencers, products, merchants)

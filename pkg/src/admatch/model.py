"""Market entities, structural validation, and derived preference lists.

The market has three sides: influencers (who rank the products they want to
advertise), products (each owned by exactly one merchant and capped at
``quota`` simultaneous campaigns), and merchants (capped at ``quota``
influencers across all their products).  Merchant preference over influencers
is derived from reputation; only the descending order of reputation matters,
never its magnitude.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    DanglingReference,
    DuplicateId,
    InvalidInstance,
    OperationalLimitViolated,
    ProductMultiplyOwned,
    UnknownEntity,
    UnknownMerchant,
    UnknownProduct,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Influencer:
    id: str
    reputation: float  # non-negative; only the ordering is meaningful
    desired: tuple[str, ...]  # product ids, most preferred first, no repeats


@dataclass(frozen=True)
class Product:
    id: str
    quota: int  # max influencers this product can be offered to
    merchant: str


@dataclass(frozen=True)
class Merchant:
    id: str
    quota: int  # max influencers across all of this merchant's products
    products: tuple[str, ...] = ()


@dataclass(frozen=True)
class Instance:
    """A validated, immutable market.  Safe for concurrent reads."""

    influencers: tuple[Influencer, ...]
    products: tuple[Product, ...]
    merchants: tuple[Merchant, ...]
    tie_break: tuple[str, ...]  # total order on influencer ids

    @cached_property
    def influencer_by_id(self) -> dict[str, Influencer]:
        return {f.id: f for f in self.influencers}

    @cached_property
    def product_by_id(self) -> dict[str, Product]:
        return {p.id: p for p in self.products}

    @cached_property
    def merchant_by_id(self) -> dict[str, Merchant]:
        return {m.id: m for m in self.merchants}

    @cached_property
    def tie_rank(self) -> dict[str, int]:
        return {fid: i for i, fid in enumerate(self.tie_break)}

    @cached_property
    def desired_rank(self) -> dict[str, dict[str, int]]:
        """Per influencer: product id -> 0-based position in the desired list."""
        return {
            f.id: {pid: i for i, pid in enumerate(f.desired)}
            for f in self.influencers
        }

    @cached_property
    def _merchant_preferences(self) -> dict[str, tuple[str, ...]]:
        out = {}
        for m in self.merchants:
            owned = set(m.products)
            interested = [
                f for f in self.influencers if owned.intersection(f.desired)
            ]
            # Stable two-pass sort: tie_break first, then reputation descending,
            # so equal reputations fall back to the recorded tie order.
            interested.sort(key=lambda f: self.tie_rank[f.id])
            interested.sort(key=lambda f: f.reputation, reverse=True)
            out[m.id] = tuple(f.id for f in interested)
        return out


@dataclass(frozen=True)
class Matching:
    """A feasible-shaped allocation: at most one product per influencer.

    Equality and hashing consider only the assignment pairs; the reverse
    indexes are derived deterministically at construction.
    """

    pairs: tuple[tuple[str, str], ...]  # (influencer, product), sorted
    by_product: dict[str, tuple[str, ...]] = field(compare=False, repr=False)
    by_merchant: dict[str, tuple[str, ...]] = field(compare=False, repr=False)

    @classmethod
    def from_assignment(
        cls, instance: Instance, assignment: Mapping[str, str]
    ) -> "Matching":
        for fid, pid in assignment.items():
            if fid not in instance.influencer_by_id:
                raise UnknownEntity(f"unknown influencer {fid!r}")
            if pid not in instance.product_by_id:
                raise UnknownEntity(f"unknown product {pid!r}")
        pairs = tuple(sorted(assignment.items()))
        by_product: dict[str, list[str]] = {}
        by_merchant: dict[str, list[str]] = {}
        for fid, pid in pairs:
            by_product.setdefault(pid, []).append(fid)
            owner = instance.product_by_id[pid].merchant
            by_merchant.setdefault(owner, []).append(fid)
        return cls(
            pairs=pairs,
            by_product={p: tuple(v) for p, v in by_product.items()},
            by_merchant={m: tuple(sorted(v)) for m, v in by_merchant.items()},
        )

    @cached_property
    def assignment(self) -> dict[str, str]:
        return dict(self.pairs)

    def product_of(self, influencer_id: str) -> Optional[str]:
        return self.assignment.get(influencer_id)

    def __len__(self) -> int:
        return len(self.pairs)


def _check_unique(ids: Iterable[str], kind: str) -> None:
    seen = set()
    for i in ids:
        if not i:
            raise InvalidInstance(f"empty {kind} id")
        if i in seen:
            raise DuplicateId(f"duplicate {kind} id {i!r}")
        seen.add(i)


def build_instance(
    influencers: Sequence[Influencer],
    products: Sequence[Product],
    merchants: Sequence[Merchant],
    tie_break: Optional[Sequence[str]] = None,
    *,
    lenient: bool = False,
    clamp_quota: bool = False,
) -> Instance:
    """Assemble and validate an Instance from raw collections.

    ``lenient`` prunes desired-list references to unknown products (with a
    warning) instead of raising.  ``clamp_quota`` clamps merchant quotas into
    the operational limit [max l_j, sum l_j] instead of raising.
    """
    _check_unique((f.id for f in influencers), "influencer")
    _check_unique((p.id for p in products), "product")
    _check_unique((m.id for m in merchants), "merchant")

    merchant_ids = {m.id for m in merchants}
    product_ids = {p.id for p in products}

    owner: dict[str, str] = {}
    for p in products:
        if p.merchant not in merchant_ids:
            raise DanglingReference(
                f"product {p.id!r} references unknown merchant {p.merchant!r}"
            )
        if p.quota < 0:
            raise InvalidInstance(f"product {p.id!r} has negative quota")
        owner[p.id] = p.merchant

    # Declared merchant product lists must agree with the products' own
    # merchant field; the canonical partition is rebuilt from the products.
    for m in merchants:
        for pid in m.products:
            if pid not in product_ids:
                raise DanglingReference(
                    f"merchant {m.id!r} lists unknown product {pid!r}"
                )
            if owner[pid] != m.id:
                raise ProductMultiplyOwned(
                    f"product {pid!r} claimed by merchant {m.id!r} but owned "
                    f"by {owner[pid]!r}"
                )

    owned: dict[str, list[str]] = {m.id: [] for m in merchants}
    quota_of = {p.id: p.quota for p in products}
    for p in products:
        owned[p.merchant].append(p.id)

    new_merchants = []
    for m in merchants:
        if m.quota < 0:
            raise InvalidInstance(f"merchant {m.id!r} has negative quota")
        pids = tuple(owned[m.id])
        quotas = [quota_of[pid] for pid in pids]
        lo = max(quotas) if quotas else 0
        hi = sum(quotas)
        q = m.quota
        if not lo <= q <= hi:
            if clamp_quota:
                clamped = min(max(q, lo), hi)
                log.warning(
                    "merchant %s: quota %d clamped to %d (operational limit "
                    "[%d, %d])", m.id, q, clamped, lo, hi,
                )
                q = clamped
            else:
                raise OperationalLimitViolated(m.id, q, lo, hi)
        new_merchants.append(Merchant(id=m.id, quota=q, products=pids))

    new_influencers = []
    for f in influencers:
        if not (f.reputation >= 0):
            raise InvalidInstance(f"influencer {f.id!r} has invalid reputation")
        desired = list(f.desired)
        unknown = [pid for pid in desired if pid not in product_ids]
        if unknown:
            if lenient:
                log.warning(
                    "influencer %s: pruning unknown products %s", f.id, unknown
                )
                desired = [pid for pid in desired if pid in product_ids]
            else:
                raise DanglingReference(
                    f"influencer {f.id!r} desires unknown product "
                    f"{unknown[0]!r}"
                )
        if len(set(desired)) != len(desired):
            raise DuplicateId(
                f"influencer {f.id!r} has duplicate desired products"
            )
        new_influencers.append(
            Influencer(id=f.id, reputation=f.reputation, desired=tuple(desired))
        )

    if tie_break is None:
        order = tuple(sorted(f.id for f in new_influencers))
    else:
        order = tuple(tie_break)
        if sorted(order) != sorted(f.id for f in new_influencers):
            raise InvalidInstance(
                "tie_break is not a permutation of the influencer ids"
            )

    instance = Instance(
        influencers=tuple(new_influencers),
        products=tuple(products),
        merchants=tuple(new_merchants),
        tie_break=order,
    )
    validate_instance(instance)
    return instance


def validate_instance(instance: Instance) -> None:
    """Re-check every structural invariant; raises on the first violation."""
    _check_unique((f.id for f in instance.influencers), "influencer")
    _check_unique((p.id for p in instance.products), "product")
    _check_unique((m.id for m in instance.merchants), "merchant")

    if sorted(instance.tie_break) != sorted(instance.influencer_by_id):
        raise InvalidInstance("tie_break is not a permutation of influencers")

    seen_products: set[str] = set()
    for m in instance.merchants:
        if m.quota < 0:
            raise InvalidInstance(f"merchant {m.id!r} has negative quota")
        quotas = []
        for pid in m.products:
            p = instance.product_by_id.get(pid)
            if p is None:
                raise DanglingReference(
                    f"merchant {m.id!r} lists unknown product {pid!r}"
                )
            if p.merchant != m.id:
                raise ProductMultiplyOwned(
                    f"product {pid!r} claimed by merchant {m.id!r} but owned "
                    f"by {p.merchant!r}"
                )
            if pid in seen_products:
                raise DuplicateId(f"product {pid!r} listed twice")
            seen_products.add(pid)
            quotas.append(p.quota)
        lo = max(quotas) if quotas else 0
        hi = sum(quotas)
        if not lo <= m.quota <= hi:
            raise OperationalLimitViolated(m.id, m.quota, lo, hi)
    if seen_products != set(instance.product_by_id):
        missing = set(instance.product_by_id) - seen_products
        raise DanglingReference(
            f"products not listed by any merchant: {sorted(missing)}"
        )

    for f in instance.influencers:
        if not (f.reputation >= 0):
            raise InvalidInstance(f"influencer {f.id!r} has invalid reputation")
        if len(set(f.desired)) != len(f.desired):
            raise DuplicateId(
                f"influencer {f.id!r} has duplicate desired products"
            )
        for pid in f.desired:
            if pid not in instance.product_by_id:
                raise DanglingReference(
                    f"influencer {f.id!r} desires unknown product {pid!r}"
                )

    for p in instance.products:
        if p.quota < 0:
            raise InvalidInstance(f"product {p.id!r} has negative quota")


def merchant_preference(instance: Instance, merchant_id: str) -> list[str]:
    """The merchant's strict order over interested influencers.

    Influencers desiring at least one of the merchant's products, sorted by
    reputation descending with ties broken by the instance tie_break order.
    """
    if merchant_id not in instance.merchant_by_id:
        raise UnknownMerchant(f"unknown merchant {merchant_id!r}")
    return list(instance._merchant_preferences[merchant_id])


def product_preference(instance: Instance, product_id: str) -> list[str]:
    """The owning merchant's order restricted to influencers wanting this product."""
    product = instance.product_by_id.get(product_id)
    if product is None:
        raise UnknownProduct(f"unknown product {product_id!r}")
    base = instance._merchant_preferences[product.merchant]
    return [
        fid for fid in base if product_id in instance.desired_rank[fid]
    ]


def feasibility_violations(instance: Instance, matching: Matching) -> list[str]:
    """Recount quota and desirability constraints straight from the pairs."""
    problems = []
    per_product: dict[str, int] = {}
    per_merchant: dict[str, int] = {}
    seen: set[str] = set()
    for fid, pid in matching.pairs:
        if fid in seen:
            problems.append(f"influencer {fid!r} assigned more than once")
            continue
        seen.add(fid)
        f = instance.influencer_by_id.get(fid)
        p = instance.product_by_id.get(pid)
        if f is None:
            problems.append(f"unknown influencer {fid!r}")
            continue
        if p is None:
            problems.append(f"unknown product {pid!r}")
            continue
        if pid not in instance.desired_rank[fid]:
            problems.append(f"influencer {fid!r} does not desire {pid!r}")
        per_product[pid] = per_product.get(pid, 0) + 1
        per_merchant[p.merchant] = per_merchant.get(p.merchant, 0) + 1
    for pid, n in sorted(per_product.items()):
        if n > instance.product_by_id[pid].quota:
            problems.append(
                f"product {pid!r} over-allocated: {n} > "
                f"{instance.product_by_id[pid].quota}"
            )
    for mid, n in sorted(per_merchant.items()):
        if n > instance.merchant_by_id[mid].quota:
            problems.append(
                f"merchant {mid!r} over-allocated: {n} > "
                f"{instance.merchant_by_id[mid].quota}"
            )
    return problems

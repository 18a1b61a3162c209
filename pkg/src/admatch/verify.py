"""Stability oracle: blocking-pair detection and brute-force enumeration.

This module reads preference lists from the model but shares no matching
logic with the engine, so it can act as an independent check on engine
output.  A pair (influencer, product) blocks a matching when the influencer
wants the product more than what they currently hold and one of three
capacity cases lets the merchant take them:

  1. both the product and its merchant are under-allocated;
  2. the product is under-allocated, the merchant is fully allocated, and
     the influencer is already at that merchant or outranks the merchant's
     worst assignee;
  3. the product is fully allocated and the influencer outranks the worst
     holder of that product.
"""

from __future__ import annotations

from itertools import product as iter_product
from typing import Optional

from .errors import InfeasibleMatching, InstanceTooLarge, UnknownEntity
from .model import (
    Instance,
    Matching,
    feasibility_violations,
    merchant_preference,
    product_preference,
)


class _PreferenceIndex:
    """Precomputed rank tables so pair scans stay O(1) per pair."""

    def __init__(self, instance: Instance):
        self.owner = {p.id: p.merchant for p in instance.products}
        self.product_quota = {p.id: p.quota for p in instance.products}
        self.merchant_quota = {m.id: m.quota for m in instance.merchants}
        self.nu_rank = {
            m.id: {
                fid: i
                for i, fid in enumerate(merchant_preference(instance, m.id))
            }
            for m in instance.merchants
        }
        self.nu_pj_rank = {
            p.id: {
                fid: i
                for i, fid in enumerate(product_preference(instance, p.id))
            }
            for p in instance.products
        }
        self.desired_rank = instance.desired_rank


def _blocks(
    idx: _PreferenceIndex,
    assignment: dict[str, str],
    holders: dict[str, list[str]],
    at_merchant: dict[str, list[str]],
    fid: str,
    pid: str,
) -> bool:
    ranks = idx.desired_rank[fid]
    if pid not in ranks:
        return False
    current = assignment.get(fid)
    if current is not None and ranks[current] <= ranks[pid]:
        return False

    kid = idx.owner[pid]
    e_p = holders.get(pid, ())
    e_k = at_merchant.get(kid, ())
    p_under = len(e_p) < idx.product_quota[pid]
    p_full = len(e_p) == idx.product_quota[pid]
    k_under = len(e_k) < idx.merchant_quota[kid]
    k_full = len(e_k) == idx.merchant_quota[kid]

    if p_under and k_under:
        return True
    if p_under and k_full:
        if fid in e_k:
            return True
        if e_k:
            nu = idx.nu_rank[kid]
            if nu[fid] < max(nu[g] for g in e_k):
                return True
    if p_full and e_p:
        nu_pj = idx.nu_pj_rank[pid]
        if nu_pj[fid] < max(nu_pj[g] for g in e_p):
            return True
    return False


def _indexes_from_matching(
    idx: _PreferenceIndex, matching: Matching
) -> tuple[dict[str, str], dict[str, list[str]], dict[str, list[str]]]:
    assignment = dict(matching.pairs)
    holders: dict[str, list[str]] = {}
    at_merchant: dict[str, list[str]] = {}
    for fid, pid in matching.pairs:
        holders.setdefault(pid, []).append(fid)
        at_merchant.setdefault(idx.owner[pid], []).append(fid)
    return assignment, holders, at_merchant


def is_blocking_pair(
    instance: Instance,
    matching: Matching,
    influencer_id: str,
    product_id: str,
) -> bool:
    """Apply the three-case blocking definition to one candidate pair."""
    if influencer_id not in instance.influencer_by_id:
        raise UnknownEntity(f"unknown influencer {influencer_id!r}")
    if product_id not in instance.product_by_id:
        raise UnknownEntity(f"unknown product {product_id!r}")
    idx = _PreferenceIndex(instance)
    assignment, holders, at_merchant = _indexes_from_matching(idx, matching)
    return _blocks(idx, assignment, holders, at_merchant, influencer_id, product_id)


def verify_stability(
    instance: Instance,
    matching: Matching,
    stats: Optional[dict] = None,
) -> list[tuple[str, str]]:
    """All blocking pairs, in (tie_break, product id) order; [] means stable.

    Raises InfeasibleMatching before scanning if the matching violates a
    quota or assigns a product the influencer does not desire.
    """
    problems = feasibility_violations(instance, matching)
    if problems:
        raise InfeasibleMatching("; ".join(problems))

    idx = _PreferenceIndex(instance)
    assignment, holders, at_merchant = _indexes_from_matching(idx, matching)
    product_ids = sorted(idx.owner)

    blocking = []
    scanned = 0
    for fid in instance.tie_break:
        for pid in product_ids:
            scanned += 1
            if _blocks(idx, assignment, holders, at_merchant, fid, pid):
                blocking.append((fid, pid))
    if stats is not None:
        stats["pairs_scanned"] = scanned
    return blocking


def enumerate_stable_matchings(
    instance: Instance, max_influencers: int = 6
) -> list[Matching]:
    """Every stable matching, by exhaustive search over feasible allocations.

    Intended as an oracle for small instances; raises InstanceTooLarge past
    the bound.  Result order is deterministic (assignment-tuple order).
    """
    n = len(instance.influencers)
    if n > max_influencers:
        raise InstanceTooLarge(
            f"{n} influencers exceeds enumeration bound {max_influencers}"
        )
    idx = _PreferenceIndex(instance)
    infl_ids = [f.id for f in instance.influencers]
    options = [(None, *f.desired) for f in instance.influencers]

    all_pairs = [(fid, pid) for fid in infl_ids for pid in sorted(idx.owner)]

    results = []
    for choice in iter_product(*options):
        assignment = {
            fid: pid for fid, pid in zip(infl_ids, choice) if pid is not None
        }
        holders: dict[str, list[str]] = {}
        at_merchant: dict[str, list[str]] = {}
        feasible = True
        for fid, pid in assignment.items():
            h = holders.setdefault(pid, [])
            h.append(fid)
            if len(h) > idx.product_quota[pid]:
                feasible = False
                break
            g = at_merchant.setdefault(idx.owner[pid], [])
            g.append(fid)
            if len(g) > idx.merchant_quota[idx.owner[pid]]:
                feasible = False
                break
        if not feasible:
            continue
        stable = True
        for fid, pid in all_pairs:
            if _blocks(idx, assignment, holders, at_merchant, fid, pid):
                stable = False
                break
        if stable:
            results.append(Matching.from_assignment(instance, assignment))
    return results

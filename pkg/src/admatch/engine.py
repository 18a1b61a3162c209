"""Influencer-proposing deferred acceptance under nested quotas.

Each free influencer proposes down their desired list.  A product accepts
provisionally; if the product exceeds its own quota the worst holder (by the
product-restricted merchant order) is rejected, otherwise if the owning
merchant exceeds its quota the merchant-worst assignee anywhere at that
merchant is rejected.  Once a product or merchant becomes full, every
influencer the merchant ranks below its current worst assignee is deleted
from the corresponding preference lists, so nobody proposes somewhere they
could never stay.  The result is the influencer-optimal stable matching.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import InvalidInstance, MatchingError
from .model import Instance, Matching, merchant_preference, product_preference, validate_instance


@dataclass(frozen=True)
class SolveTrace:
    proposal_count: int
    rejection_count: int
    rounds: int


def solve(instance: Instance) -> tuple[Matching, SolveTrace]:
    """Compute the influencer-optimal stable matching for a valid instance."""
    try:
        validate_instance(instance)
    except MatchingError as exc:
        raise InvalidInstance(str(exc)) from exc

    owner = {p.id: p.merchant for p in instance.products}
    product_quota = {p.id: p.quota for p in instance.products}
    merchant_quota = {m.id: m.quota for m in instance.merchants}

    nu_rank: dict[str, dict[str, int]] = {}
    for m in instance.merchants:
        nu_rank[m.id] = {
            fid: i for i, fid in enumerate(merchant_preference(instance, m.id))
        }
    nu = {m.id: merchant_preference(instance, m.id) for m in instance.merchants}
    nu_pj = {p.id: product_preference(instance, p.id) for p in instance.products}
    nu_pj_rank = {
        pid: {fid: i for i, fid in enumerate(order)}
        for pid, order in nu_pj.items()
    }

    desired = {f.id: f.desired for f in instance.influencers}
    desired_sets = {f.id: set(f.desired) for f in instance.influencers}
    merchant_products = {m.id: m.products for m in instance.merchants}

    deleted: set[tuple[str, str]] = set()
    assigned: dict[str, str] = {}
    holders: dict[str, set[str]] = {p.id: set() for p in instance.products}
    at_merchant: dict[str, set[str]] = {m.id: set() for m in instance.merchants}

    queue = deque(instance.tie_break)
    queued = set(instance.tie_break)
    cursor = {fid: 0 for fid in desired}

    proposals = 0
    rejections = 0
    rounds = 0

    def reject(fid: str, pid: str) -> None:
        nonlocal rejections
        rejections += 1
        holders[pid].discard(fid)
        at_merchant[owner[pid]].discard(fid)
        del assigned[fid]
        deleted.add((fid, pid))
        if fid not in queued:
            queue.append(fid)
            queued.add(fid)

    while queue:
        fid = queue.popleft()
        queued.discard(fid)
        rounds += 1
        if fid in assigned:
            continue
        prefs = desired[fid]
        i = cursor[fid]
        while i < len(prefs) and (fid, prefs[i]) in deleted:
            i += 1
        cursor[fid] = i
        if i >= len(prefs):
            continue
        pid = prefs[i]
        kid = owner[pid]
        proposals += 1

        assigned[fid] = pid
        holders[pid].add(fid)
        at_merchant[kid].add(fid)

        if len(holders[pid]) > product_quota[pid]:
            ranks = nu_pj_rank[pid]
            worst = max(holders[pid], key=ranks.__getitem__)
            reject(worst, pid)
        elif len(at_merchant[kid]) > merchant_quota[kid]:
            ranks = nu_rank[kid]
            worst = max(at_merchant[kid], key=ranks.__getitem__)
            reject(worst, assigned[worst])

        # Deletion rules: once full, strictly worse influencers can never
        # displace a holder, so their pairs here are dead.
        if holders[pid] and len(holders[pid]) == product_quota[pid]:
            ranks = nu_pj_rank[pid]
            worst_rank = max(ranks[f] for f in holders[pid])
            for other in nu_pj[pid][worst_rank + 1 :]:
                deleted.add((other, pid))
        if at_merchant[kid] and len(at_merchant[kid]) == merchant_quota[kid]:
            ranks = nu_rank[kid]
            worst_rank = max(ranks[f] for f in at_merchant[kid])
            for other in nu[kid][worst_rank + 1 :]:
                wants = desired_sets[other]
                for p2 in merchant_products[kid]:
                    if p2 in wants:
                        deleted.add((other, p2))

        if fid not in assigned and fid not in queued:
            queue.append(fid)
            queued.add(fid)

    matching = Matching.from_assignment(instance, assigned)
    return matching, SolveTrace(
        proposal_count=proposals, rejection_count=rejections, rounds=rounds
    )

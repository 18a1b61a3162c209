import pytest

from admatch import (
    Influencer,
    Matching,
    Merchant,
    Product,
    build_instance,
    feasibility_violations,
    merchant_preference,
    product_preference,
    validate_instance,
)
from admatch.errors import (
    DanglingReference,
    DuplicateId,
    InvalidInstance,
    OperationalLimitViolated,
    ProductMultiplyOwned,
    UnknownEntity,
    UnknownMerchant,
    UnknownProduct,
)
from conftest import make_instance


def test_empty_instance_is_valid():
    inst = build_instance([], [], [])
    assert inst.influencers == ()
    assert inst.tie_break == ()


def test_quota_below_max_product_quota_rejected():
    with pytest.raises(OperationalLimitViolated):
        make_instance(
            influencers=[],
            products=[("p1", 2, "m1"), ("p2", 3, "m1")],
            merchants=[("m1", 1)],
        )


def test_quota_above_sum_product_quotas_rejected():
    with pytest.raises(OperationalLimitViolated):
        make_instance(
            influencers=[],
            products=[("p1", 2, "m1"), ("p2", 3, "m1")],
            merchants=[("m1", 6)],
        )


def test_clamp_quota_repairs_both_directions():
    low = make_instance(
        influencers=[],
        products=[("p1", 2, "m1"), ("p2", 3, "m1")],
        merchants=[("m1", 1)],
        clamp_quota=True,
    )
    assert low.merchant_by_id["m1"].quota == 3  # clamped up to max l_j
    high = make_instance(
        influencers=[],
        products=[("p1", 2, "m1"), ("p2", 3, "m1")],
        merchants=[("m1", 6)],
        clamp_quota=True,
    )
    assert high.merchant_by_id["m1"].quota == 5


def test_zero_quota_product_is_legal():
    inst = make_instance(
        influencers=[("a", 1.0, ["p1"])],
        products=[("p1", 0, "m1")],
        merchants=[("m1", 0)],
    )
    assert inst.product_by_id["p1"].quota == 0


def test_merchant_with_products_needs_positive_quota_unless_all_zero():
    with pytest.raises(OperationalLimitViolated):
        make_instance(
            influencers=[],
            products=[("p1", 1, "m1")],
            merchants=[("m1", 0)],
        )


def test_duplicate_influencer_id_rejected():
    with pytest.raises(DuplicateId):
        make_instance(
            influencers=[("a", 1.0, []), ("a", 2.0, [])],
            products=[],
            merchants=[],
        )


def test_desired_unknown_product_rejected_by_default():
    with pytest.raises(DanglingReference):
        make_instance(
            influencers=[("a", 1.0, ["ghost"])],
            products=[("p1", 1, "m1")],
            merchants=[("m1", 1)],
        )


def test_lenient_mode_prunes_unknown_products():
    inst = make_instance(
        influencers=[("a", 1.0, ["ghost", "p1"])],
        products=[("p1", 1, "m1")],
        merchants=[("m1", 1)],
        lenient=True,
    )
    assert inst.influencer_by_id["a"].desired == ("p1",)


def test_product_with_unknown_merchant_rejected():
    with pytest.raises(DanglingReference):
        make_instance(
            influencers=[],
            products=[("p1", 1, "nobody")],
            merchants=[("m1", 1)],
        )


def test_product_claimed_by_two_merchants_rejected():
    with pytest.raises(ProductMultiplyOwned):
        build_instance(
            [],
            [Product(id="p1", quota=1, merchant="m1")],
            [
                Merchant(id="m1", quota=1, products=("p1",)),
                Merchant(id="m2", quota=0, products=("p1",)),
            ],
        )


def test_bad_tie_break_rejected():
    with pytest.raises(InvalidInstance):
        make_instance(
            influencers=[("a", 1.0, [])],
            products=[],
            merchants=[],
            tie_break=["a", "zz"],
        )


def test_merchant_preference_sorts_by_reputation_descending():
    inst = make_instance(
        influencers=[("a", 5.0, ["p1"]), ("b", 9.0, ["p1"])],
        products=[("p1", 1, "m1")],
        merchants=[("m1", 1)],
    )
    assert merchant_preference(inst, "m1") == ["b", "a"]


def test_merchant_preference_breaks_ties_lexically():
    inst = make_instance(
        influencers=[("b", 3.0, ["p1"]), ("a", 3.0, ["p1"])],
        products=[("p1", 1, "m1")],
        merchants=[("m1", 1)],
    )
    assert merchant_preference(inst, "m1") == ["a", "b"]


def test_merchant_preference_excludes_uninterested():
    inst = make_instance(
        influencers=[("a", 5.0, ["p1"]), ("c", 9.0, ["p2"])],
        products=[("p1", 1, "m1"), ("p2", 1, "m2")],
        merchants=[("m1", 1), ("m2", 1)],
    )
    assert "c" not in merchant_preference(inst, "m1")


def test_merchant_preference_unknown_merchant():
    inst = build_instance([], [], [])
    with pytest.raises(UnknownMerchant):
        merchant_preference(inst, "nope")


def test_product_preference_is_filtered_subsequence(market_4x3x2):
    for p in market_4x3x2.products:
        base = merchant_preference(market_4x3x2, p.merchant)
        sub = product_preference(market_4x3x2, p.id)
        it = iter(base)
        assert all(x in it for x in sub)  # subsequence check
        expected = [
            f for f in base
            if p.id in market_4x3x2.influencer_by_id[f].desired
        ]
        assert sub == expected


def test_product_preference_empty_when_nobody_interested():
    inst = make_instance(
        influencers=[("a", 1.0, [])],
        products=[("p1", 1, "m1")],
        merchants=[("m1", 1)],
    )
    assert product_preference(inst, "p1") == []


def test_product_preference_identity_when_everyone_interested():
    inst = make_instance(
        influencers=[("a", 2.0, ["p1"]), ("b", 1.0, ["p1"])],
        products=[("p1", 2, "m1")],
        merchants=[("m1", 2)],
    )
    assert product_preference(inst, "p1") == merchant_preference(inst, "m1")


def test_product_preference_unknown_product(market_4x3x2):
    with pytest.raises(UnknownProduct):
        product_preference(market_4x3x2, "ghost")


def test_interest_set_matches_brute_force(market_4x3x2):
    inst = market_4x3x2
    for m in inst.merchants:
        expected = {
            f.id
            for f in inst.influencers
            if set(f.desired) & set(m.products)
        }
        assert set(merchant_preference(inst, m.id)) == expected


def test_preferences_invariant_under_monotone_transform(market_4x3x2):
    inst = market_4x3x2
    transformed = make_instance(
        influencers=[
            (f.id, f.reputation ** 3 + 1, list(f.desired))
            for f in inst.influencers
        ],
        products=[(p.id, p.quota, p.merchant) for p in inst.products],
        merchants=[(m.id, m.quota) for m in inst.merchants],
    )
    for m in inst.merchants:
        assert merchant_preference(inst, m.id) == merchant_preference(transformed, m.id)
    for p in inst.products:
        assert product_preference(inst, p.id) == product_preference(transformed, p.id)


def test_built_instance_revalidates_cleanly(market_4x3x2):
    validate_instance(market_4x3x2)  # must not raise


def test_matching_reverse_indexes_consistent(market_4x3x2):
    m = Matching.from_assignment(market_4x3x2, {"a": "p1", "c": "p2", "d": "p3"})
    assert m.by_product == {"p1": ("a",), "p2": ("c",), "p3": ("d",)}
    assert m.by_merchant == {"m1": ("a", "c"), "m2": ("d",)}
    assert m.assignment == {"a": "p1", "c": "p2", "d": "p3"}


def test_matching_unknown_entities_rejected(market_4x3x2):
    with pytest.raises(UnknownEntity):
        Matching.from_assignment(market_4x3x2, {"ghost": "p1"})
    with pytest.raises(UnknownEntity):
        Matching.from_assignment(market_4x3x2, {"a": "ghost"})


def test_feasibility_violations_recounts(market_4x3x2):
    ok = Matching.from_assignment(market_4x3x2, {"a": "p1"})
    assert feasibility_violations(market_4x3x2, ok) == []
    # b does not desire p2
    bad = Matching.from_assignment(market_4x3x2, {"b": "p2"})
    assert feasibility_violations(market_4x3x2, bad)
    # p1 has quota 1
    over = Matching.from_assignment(market_4x3x2, {"a": "p1", "b": "p1"})
    assert any("over-allocated" in v for v in feasibility_violations(market_4x3x2, over))

from decimal import Decimal

import pytest

from admatch import (
    Influencer,
    Merchant,
    Product,
    TransactionRecord,
    build_instance,
)


def make_instance(influencers, products, merchants, **kwargs):
    """Shorthand: entities given as tuples instead of dataclass calls.

    influencers: (id, reputation, [desired...])
    products:    (id, quota, merchant)
    merchants:   (id, quota)
    """
    return build_instance(
        [Influencer(id=i, reputation=r, desired=tuple(d)) for i, r, d in influencers],
        [Product(id=i, quota=q, merchant=m) for i, q, m in products],
        [Merchant(id=i, quota=q) for i, q in merchants],
        **kwargs,
    )


@pytest.fixture
def market_4x3x2():
    """4 influencers, 3 products, 2 merchants; contested single-slot products."""
    return make_instance(
        influencers=[
            ("a", 9.0, ["p1", "p2", "p3"]),
            ("b", 7.0, ["p1", "p3"]),
            ("c", 5.0, ["p2", "p1"]),
            ("d", 3.0, ["p3", "p2"]),
        ],
        products=[("p1", 1, "m1"), ("p2", 1, "m1"), ("p3", 1, "m2")],
        merchants=[("m1", 2), ("m2", 1)],
    )


def tx(consumer, product, merchant, qty, price, ts=None):
    return TransactionRecord(
        consumer_key=consumer,
        product_code=product,
        merchant_code=merchant,
        quantity=qty,
        unit_price=Decimal(price),
        timestamp=ts,
    )


@pytest.fixture
def small_log():
    return [
        tx("c1", "P1", "M1", 2, "10.00", "2024-01-01T10:00"),
        tx("c1", "P2", "M1", 1, "30.00", "2024-01-01T10:00"),
        tx("c2", "P2", "M1", 1, "50.00", "2024-01-02T09:00"),
        tx("c2", "P3", "M2", 3, "5.00", "2024-01-03T09:00"),
        tx("c3", "P1", "M1", 1, "20.00"),
    ]

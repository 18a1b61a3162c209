"""Brute-force indicator aggregation over the 20-row transaction fixture.

Deliberately independent of the library: pandas groupbys over integer cents
instead of incremental Decimal accumulation.  Run directly to print the
expected values, or import the functions from tests.
"""

from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import pandas as pd

FIXTURE = Path(__file__).with_name("transactions_20.csv")


def load_frame(path=FIXTURE) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"unit_price": str, "timestamp": str})
    df["price_cents"] = df["unit_price"].map(lambda s: int(Decimal(s) * 100))
    df["spend_cents"] = df["quantity"] * df["price_cents"]
    # order id: the timestamp when present, else a unique per-row token
    df["order_id"] = [
        ts if isinstance(ts, str) and ts else f"row-{i}"
        for i, ts in enumerate(df["timestamp"])
    ]
    return df


def expected_gt(df: pd.DataFrame):
    """(reputation per consumer as Decimal, desired product order per consumer)."""
    totals = df.groupby("consumer_key")["spend_cents"].sum()
    reputation = {c: Decimal(int(v)) / 100 for c, v in totals.items()}
    per_product = (
        df.groupby(["consumer_key", "product_code"])["spend_cents"].sum()
    )
    desired = {}
    for consumer in totals.index:
        scores = per_product[consumer]
        desired[consumer] = list(
            scores.sort_index().sort_values(ascending=False, kind="stable").index
        )
    return reputation, desired


def expected_fmc(df: pd.DataFrame):
    """(reputation per consumer as Fraction K/U, desired product order)."""
    universe = df["consumer_key"].nunique()
    orders = df.groupby("consumer_key")["order_id"].nunique()
    reputation = {c: Fraction(int(k), universe) for c, k in orders.items()}
    per_product = (
        df.groupby(["consumer_key", "product_code"])["order_id"].nunique()
    )
    desired = {}
    for consumer in orders.index:
        scores = per_product[consumer]
        desired[consumer] = list(
            scores.sort_index().sort_values(ascending=False, kind="stable").index
        )
    return reputation, desired


if __name__ == "__main__":
    frame = load_frame()
    gt_rep, gt_desired = expected_gt(frame)
    fmc_rep, fmc_desired = expected_fmc(frame)
    print("GT reputation:", {c: str(v) for c, v in sorted(gt_rep.items())})
    print("GT desired:", gt_desired)
    print("FMC reputation:", {c: str(v) for c, v in sorted(fmc_rep.items())})
    print("FMC desired:", fmc_desired)

"""Command line entry point: derive / gen / solve / verify / report / pipeline.

Exit codes: 0 success (or stable), 1 unstable matching, 2 input error,
3 infeasible matching, 4 internal error.  Diagnostics go to stderr; data only
to the declared output paths.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import derive as derive_mod
from . import ingest, report as report_mod
from .engine import solve
from .errors import InfeasibleMatching, MatchingError, ParseError
from .model import Influencer, Instance, Merchant, Product, build_instance
from .verify import verify_stability

log = logging.getLogger("admatch")

EXIT_OK = 0
EXIT_UNSTABLE = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--instance-dir", help="directory with influencers/merchants/products CSVs")
    group.add_argument("--instance-json", help="single-file JSON instance")
    p.add_argument("--clamp-quota", action="store_true",
                   help="clamp merchant quotas into the operational limit instead of failing")


def _load_instance(args) -> Instance:
    if args.instance_json:
        text = Path(args.instance_json).read_text(encoding="utf-8")
        return ingest.instance_from_json(text, clamp_quota=args.clamp_quota)
    d = Path(args.instance_dir)
    return ingest.load_instance_csv(
        d / "influencers.csv", d / "merchants.csv", d / "products.csv",
        clamp_quota=args.clamp_quota,
    )


def _derive_owner_map(transactions) -> dict[str, str]:
    # A product bought from several merchants keeps the highest-volume one
    # (ties: lexically smallest merchant), so the partition stays well defined.
    volume: dict[str, dict[str, int]] = {}
    for t in transactions:
        per = volume.setdefault(t.product_code, {})
        per[t.merchant_code] = per.get(t.merchant_code, 0) + t.quantity
    return {
        pid: min(per, key=lambda m: (-per[m], m))
        for pid, per in volume.items()
    }


def cmd_derive(args) -> int:
    transactions = ingest.load_transactions_csv(args.transactions, args.profile)
    table = (
        derive_mod.derive_gt(transactions)
        if args.mode == "gt"
        else derive_mod.derive_fmc(transactions)
    )
    merchant_quotas = derive_mod.derive_merchant_quotas(transactions, args.capacity)
    owner = _derive_owner_map(transactions)

    if args.product_quotas:
        file_quotas = derive_mod.product_quotas_from_file(args.product_quotas)
        missing = sorted(set(owner) - set(file_quotas))
        if missing:
            raise ParseError(
                f"quota file lacks products seen in the log: {missing}",
                file=args.product_quotas,
            )
        product_quota = {}
        for pid in owner:
            quota, declared_merchant = file_quotas[pid]
            if declared_merchant not in merchant_quotas:
                raise ParseError(
                    f"product {pid!r} declares unknown merchant {declared_merchant!r}",
                    file=args.product_quotas,
                )
            owner[pid] = declared_merchant
            product_quota[pid] = quota
    else:
        product_quota = derive_mod.derive_product_quotas(
            transactions, merchant_quotas, owner
        )

    influencers = [
        Influencer(
            id=c,
            reputation=float(table.reputation[c]),
            desired=tuple(table.desired_products(c, top_n=args.top_n)),
        )
        for c in sorted(table.reputation)
    ]
    products = [
        Product(id=pid, quota=product_quota[pid], merchant=owner[pid])
        for pid in sorted(owner)
    ]
    merchants = [
        Merchant(id=mid, quota=merchant_quotas[mid])
        for mid in sorted(merchant_quotas)
    ]
    instance = build_instance(influencers, products, merchants, clamp_quota=True)
    paths = ingest.save_instance_csv(instance, args.out_dir)
    log.info("wrote %s", ", ".join(str(p) for p in paths.values()))
    return EXIT_OK


def cmd_gen(args) -> int:
    instance = ingest.generate_instance(
        seed=args.seed,
        n_influencers=args.influencers,
        n_products=args.products,
        n_merchants=args.merchants,
        pref_len_range=(args.pref_min, args.pref_max),
        quota_params={
            "product_quota_range": (args.quota_min, args.quota_max),
            "zipf_exponent": args.zipf,
        },
    )
    ingest.save_instance_csv(instance, args.out_dir)
    if args.json:
        with open(args.json, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(ingest.instance_to_json(instance))
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = _load_instance(args)
    matching, trace = solve(instance)
    ingest.save_matching_csv(instance, matching, args.out_matching)
    if args.out_trace:
        doc = {
            "proposal_count": trace.proposal_count,
            "rejection_count": trace.rejection_count,
            "rounds": trace.rounds,
        }
        with open(args.out_trace, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = _load_instance(args)
    matching = ingest.load_matching_csv(args.matching, instance)
    blocking = verify_stability(instance, matching)
    if blocking:
        for fid, pid in blocking:
            print(f"blocking pair: {fid} {pid}")
        return EXIT_UNSTABLE
    print("stable")
    return EXIT_OK


def cmd_report(args) -> int:
    instance = _load_instance(args)
    matching = ingest.load_matching_csv(args.matching, instance)
    metrics = report_mod.compute_metrics(instance, matching)
    report_mod.emit_report(metrics, args.format, args.out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    instance_dir = out_dir / "instance"

    if args.transactions:
        derive_args = argparse.Namespace(
            transactions=args.transactions, mode=args.mode,
            capacity=args.capacity, profile=args.profile, top_n=args.top_n,
            product_quotas=args.product_quotas, out_dir=instance_dir,
        )
        cmd_derive(derive_args)
    else:
        gen_args = argparse.Namespace(
            seed=args.seed, influencers=args.influencers,
            products=args.products, merchants=args.merchants,
            pref_min=args.pref_min, pref_max=args.pref_max,
            quota_min=args.quota_min, quota_max=args.quota_max,
            zipf=args.zipf, out_dir=instance_dir, json=None,
        )
        cmd_gen(gen_args)

    common = argparse.Namespace(
        instance_dir=str(instance_dir), instance_json=None,
        clamp_quota=args.clamp_quota,
    )
    solve_args = argparse.Namespace(
        **vars(common),
        out_matching=out_dir / "matching.csv",
        out_trace=out_dir / "trace.json",
    )
    cmd_solve(solve_args)
    verify_args = argparse.Namespace(
        **vars(common), matching=out_dir / "matching.csv"
    )
    status = cmd_verify(verify_args)
    report_args = argparse.Namespace(
        **vars(common), matching=out_dir / "matching.csv",
        format=args.format, out=out_dir / f"report.{args.format}",
    )
    cmd_report(report_args)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admatch",
        description="Stable influencer-to-campaign assignment from transaction logs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="derive instance CSVs from a transaction log")
    p.add_argument("transactions")
    p.add_argument("--mode", choices=("gt", "fmc"), required=True)
    p.add_argument("--capacity", type=int, required=True,
                   help="total influencer slots to split across merchants")
    p.add_argument("--profile", choices=("direct", "composite"), default="direct")
    p.add_argument("--top-n", type=int, default=None, help="truncate desired lists")
    p.add_argument("--product-quotas", default=None,
                   help="CSV of manually assigned product quotas (codigo,quota,comerciante)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--influencers", type=int, default=20)
    p.add_argument("--products", type=int, default=10)
    p.add_argument("--merchants", type=int, default=3)
    p.add_argument("--pref-min", type=int, default=1)
    p.add_argument("--pref-max", type=int, default=4)
    p.add_argument("--quota-min", type=int, default=1)
    p.add_argument("--quota-max", type=int, default=3)
    p.add_argument("--zipf", type=float, default=1.0)
    p.add_argument("--json", default=None, help="also write a JSON instance here")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="compute the stable matching")
    _add_instance_args(p)
    p.add_argument("--out-matching", required=True)
    p.add_argument("--out-trace", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a matching for blocking pairs")
    _add_instance_args(p)
    p.add_argument("--matching", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="emit utilization and rank metrics")
    _add_instance_args(p)
    p.add_argument("--matching", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", help="derive/gen, solve, verify and report in one run")
    p.add_argument("--transactions", default=None)
    p.add_argument("--mode", choices=("gt", "fmc"), default="gt")
    p.add_argument("--capacity", type=int, default=None)
    p.add_argument("--profile", choices=("direct", "composite"), default="direct")
    p.add_argument("--top-n", type=int, default=None)
    p.add_argument("--product-quotas", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--influencers", type=int, default=20)
    p.add_argument("--products", type=int, default=10)
    p.add_argument("--merchants", type=int, default=3)
    p.add_argument("--pref-min", type=int, default=1)
    p.add_argument("--pref-max", type=int, default=4)
    p.add_argument("--quota-min", type=int, default=1)
    p.add_argument("--quota-max", type=int, default=3)
    p.add_argument("--zipf", type=float, default=1.0)
    p.add_argument("--clamp-quota", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "pipeline" and args.transactions and args.capacity is None:
        parser.error("pipeline with --transactions requires --capacity")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleMatching as exc:
        print(f"infeasible matching: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MatchingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()

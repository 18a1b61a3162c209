"""admatch: stable assignment of influencers to merchant product campaigns."""

from .derive import (
    ReputationTable,
    TransactionRecord,
    compose_profile_key,
    derive_fmc,
    derive_gt,
    derive_merchant_quotas,
    derive_product_quotas,
    product_quotas_from_file,
)
from .engine import SolveTrace, solve
from .ingest import (
    generate_instance,
    instance_from_json,
    instance_to_json,
    load_instance_csv,
    load_matching_csv,
    load_transactions_csv,
    save_instance_csv,
    save_matching_csv,
)
from .model import (
    Influencer,
    Instance,
    Matching,
    Merchant,
    Product,
    build_instance,
    feasibility_violations,
    merchant_preference,
    product_preference,
    validate_instance,
)
from .report import MetricsReport, compute_metrics, emit_report
from .verify import enumerate_stable_matchings, is_blocking_pair, verify_stability

__version__ = "0.1.0"

__all__ = [
    "Influencer", "Product", "Merchant", "Instance", "Matching",
    "build_instance", "validate_instance", "merchant_preference",
    "product_preference", "feasibility_violations",
    "TransactionRecord", "ReputationTable", "derive_gt", "derive_fmc",
    "derive_merchant_quotas", "derive_product_quotas",
    "product_quotas_from_file", "compose_profile_key",
    "solve", "SolveTrace",
    "is_blocking_pair", "verify_stability", "enumerate_stable_matchings",
    "load_instance_csv", "save_instance_csv", "instance_to_json",
    "instance_from_json", "load_transactions_csv", "load_matching_csv",
    "save_matching_csv", "generate_instance",
    "MetricsReport", "compute_metrics", "emit_report",
    "__version__",
]

"""Exception hierarchy shared by all admatch modules."""


class MatchingError(Exception):
    """Base class for every error raised by this package."""


class DuplicateId(MatchingError):
    pass


class DanglingReference(MatchingError):
    pass


class ProductMultiplyOwned(MatchingError):
    pass


class OperationalLimitViolated(MatchingError):
    """Merchant quota falls outside [max l_j, sum l_j] for its products."""

    def __init__(self, merchant, quota, max_product_quota, sum_product_quotas):
        self.merchant = merchant
        self.quota = quota
        self.max_product_quota = max_product_quota
        self.sum_product_quotas = sum_product_quotas
        super().__init__(
            f"merchant {merchant!r}: quota {quota} outside operational limit "
            f"[{max_product_quota}, {sum_product_quotas}]"
        )


class UnknownEntity(MatchingError):
    pass


class UnknownMerchant(UnknownEntity):
    pass


class UnknownProduct(UnknownEntity):
    pass


class InvalidInstance(MatchingError):
    pass


class InfeasibleMatching(MatchingError):
    pass


class InstanceTooLarge(MatchingError):
    pass


class EmptyLog(MatchingError):
    pass


class NegativeQuota(MatchingError):
    pass


class MissingProfileField(MatchingError):
    def __init__(self, field):
        self.field = field
        super().__init__(f"missing profile field: {field}")


class ParseError(MatchingError):
    def __init__(self, message, file=None, line=None):
        self.file = file
        self.line = line
        where = ""
        if file is not None:
            where = f"{file}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class InvalidGeneratorParams(MatchingError):
    pass

"""Exception types raised across fuselab."""


class FuselabError(ValueError):
    """Base class for all data and configuration errors."""


class UsageError(FuselabError):
    """Invalid configuration; the CLI maps these to exit status 2."""


# -- input data ---------------------------------------------------------------


class MalformedLine(FuselabError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        msg = f"malformed line {line_no}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class NonFiniteScore(FuselabError):
    def __init__(self, line_no: int):
        self.line_no = line_no
        super().__init__(f"non-finite score on line {line_no}")


class InconsistentRunTag(FuselabError):
    def __init__(self, line_no: int):
        self.line_no = line_no
        super().__init__(f"run tag on line {line_no} differs from the first line")


class DuplicateDocument(FuselabError):
    def __init__(self, query_id: str, doc_id: str):
        self.query_id = query_id
        self.doc_id = doc_id
        super().__init__(f"document {doc_id!r} appears twice for query {query_id!r}")


class DuplicateJudgment(FuselabError):
    def __init__(self, query_id: str, doc_id: str):
        self.query_id = query_id
        self.doc_id = doc_id
        super().__init__(f"conflicting grades for ({query_id!r}, {doc_id!r})")


class EmptyInput(FuselabError):
    pass


class NoEvaluableQueries(FuselabError):
    pass


# -- configuration ------------------------------------------------------------


class WeightArityMismatch(UsageError):
    def __init__(self, n_weights: int, n_lists: int):
        self.n_weights = n_weights
        self.n_lists = n_lists
        super().__init__(f"{n_weights} weights given for {n_lists} ranked lists")


class UnknownMetric(UsageError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown metric {name!r}")


class UnknownRunTag(UsageError):
    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(f"no run with tag {tag!r}")


class InvalidConfig(UsageError):
    pass

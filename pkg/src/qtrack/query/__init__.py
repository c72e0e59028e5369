"""Filter language parsing, evaluation, and run search."""

from qtrack.query.evaluate import eval_clause, eval_filter, sort_runs, sort_value
from qtrack.query.filter_lang import (
    Clause,
    Comparator,
    FilterExpr,
    FilterParseError,
    Namespace,
    OrderTerm,
    parse_filter,
    parse_order_by,
    print_filter,
    print_order_by,
)
from qtrack.query.search import (
    DEFAULT_MAX_RESULTS,
    DEFAULT_ORDER_BY,
    MAX_RESULTS_CAP,
    search_runs,
)

__all__ = [
    "Clause",
    "Comparator",
    "DEFAULT_MAX_RESULTS",
    "DEFAULT_ORDER_BY",
    "FilterExpr",
    "FilterParseError",
    "MAX_RESULTS_CAP",
    "Namespace",
    "OrderTerm",
    "eval_clause",
    "eval_filter",
    "parse_filter",
    "parse_order_by",
    "print_filter",
    "print_order_by",
    "search_runs",
    "sort_runs",
    "sort_value",
]

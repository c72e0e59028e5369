"""Ordered, filtered, paginated run search over a store."""

from __future__ import annotations

from qtrack.core.records import RunPage, canonical_json
from qtrack.errors import InvalidParameterError
from qtrack.query.evaluate import eval_filter, sort_runs
from qtrack.query.filter_lang import (
    Namespace,
    OrderTerm,
    parse_filter,
    parse_order_by,
    print_filter,
    print_order_by,
)
from qtrack.storage.paging import decode_page_token, encode_page_token
from qtrack.storage.store import Store

DEFAULT_MAX_RESULTS = 100
MAX_RESULTS_CAP = 1000
DEFAULT_ORDER_BY = (OrderTerm(Namespace.ATTRIBUTES, "start_time", ascending=False),)


def search_runs(
    store: Store,
    experiment_ids: list[str],
    filter_text: str = "",
    order_by: list[str] | None = None,
    max_results: int = DEFAULT_MAX_RESULTS,
    page_token: str | None = None,
) -> RunPage:
    """Runs of the experiments matching the filter, ordered and paginated.

    Page tokens are bound to (experiment set, canonical filter, canonical
    order), so a token replayed against a different query is rejected.
    """
    if not 1 <= max_results <= MAX_RESULTS_CAP:
        raise InvalidParameterError(
            f"max_results must be between 1 and {MAX_RESULTS_CAP} (got {max_results})"
        )
    expr = parse_filter(filter_text or "")
    terms = tuple(parse_order_by(s) for s in order_by) if order_by else DEFAULT_ORDER_BY

    unique_ids = list(dict.fromkeys(experiment_ids))
    runs = store.runs_for_experiments(unique_ids)
    matched = [run for run in runs if eval_filter(expr, run)]
    ordered = sort_runs(matched, terms)

    scope = "search:" + canonical_json(
        {
            "experiment_ids": sorted(unique_ids),
            "filter": print_filter(expr),
            "order_by": [print_order_by(t) for t in terms],
        }
    )
    offset = decode_page_token(scope, page_token) if page_token else 0
    page = ordered[offset : offset + max_results]
    next_token = None
    if offset + max_results < len(ordered):
        next_token = encode_page_token(scope, offset + max_results)
    return RunPage(items=page, next_page_token=next_token)

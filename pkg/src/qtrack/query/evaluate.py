"""Filter evaluation and run ordering.

Clause semantics: params/tags compare as strings; metrics compare the
latest point of the key's history numerically; attributes expose run_id,
status (strings) and start_time, end_time (numbers). A clause whose key is
absent on the run is false, so exploratory filters never fail on
heterogeneous runs. Sorting treats missing keys as greater than any
present value (they sort last regardless of direction) and always breaks
ties by run_id ascending, giving a total order.
"""

from __future__ import annotations

import functools
import operator
import re

from qtrack.core.records import Run
from qtrack.core.runs import latest_metric_point
from qtrack.query.filter_lang import Clause, Comparator, FilterExpr, Namespace, OrderTerm

_NUMERIC_OPS = {
    Comparator.EQ: operator.eq,
    Comparator.NE: operator.ne,
    Comparator.LT: operator.lt,
    Comparator.LE: operator.le,
    Comparator.GT: operator.gt,
    Comparator.GE: operator.ge,
}


@functools.lru_cache(maxsize=1024)
def _like_regex(pattern: str, case_insensitive: bool) -> re.Pattern:
    # % is the only wildcard (multi-char); everything else is literal.
    regex = ".*".join(re.escape(part) for part in pattern.split("%"))
    flags = re.DOTALL | (re.IGNORECASE if case_insensitive else 0)
    return re.compile(regex, flags)


def _string_cmp(actual: str, comparator: Comparator, operand: str) -> bool:
    if comparator is Comparator.EQ:
        return actual == operand
    if comparator is Comparator.NE:
        return actual != operand
    if comparator is Comparator.LIKE:
        return _like_regex(operand, False).fullmatch(actual) is not None
    if comparator is Comparator.ILIKE:
        return _like_regex(operand, True).fullmatch(actual) is not None
    raise AssertionError(f"comparator {comparator} is not string-typed")


def _numeric_cmp(actual: float, comparator: Comparator, operand: int | float) -> bool:
    return _NUMERIC_OPS[comparator](actual, operand)


def eval_clause(clause: Clause, run: Run) -> bool:
    ns, key = clause.namespace, clause.key
    if ns is Namespace.PARAMS or ns is Namespace.TAGS:
        mapping = run.params if ns is Namespace.PARAMS else run.tags
        value = mapping.get(key)
        if value is None:
            return False
        assert isinstance(clause.operand, str)
        return _string_cmp(value, clause.comparator, clause.operand)
    if ns is Namespace.METRICS:
        points = run.metrics.get(key)
        if not points:
            return False
        assert isinstance(clause.operand, (int, float))
        return _numeric_cmp(latest_metric_point(points).value, clause.comparator, clause.operand)
    # attributes
    if key == "run_id":
        if clause.comparator is Comparator.IN:
            assert isinstance(clause.operand, tuple)
            return run.run_id in clause.operand
        assert isinstance(clause.operand, str)
        return _string_cmp(run.run_id, clause.comparator, clause.operand)
    if key == "status":
        assert isinstance(clause.operand, str)
        return _string_cmp(run.status.value, clause.comparator, clause.operand)
    if key == "start_time":
        assert isinstance(clause.operand, (int, float))
        return _numeric_cmp(run.start_time, clause.comparator, clause.operand)
    if key == "end_time":
        if run.end_time is None:
            return False
        assert isinstance(clause.operand, (int, float))
        return _numeric_cmp(run.end_time, clause.comparator, clause.operand)
    return False


def eval_filter(expr: FilterExpr, run: Run) -> bool:
    return all(eval_clause(clause, run) for clause in expr.clauses)


def sort_value(run: Run, namespace: Namespace, key: str) -> tuple[bool, object]:
    """(present, comparable value) of a sort key on a run."""
    if namespace is Namespace.PARAMS or namespace is Namespace.TAGS:
        mapping = run.params if namespace is Namespace.PARAMS else run.tags
        value = mapping.get(key)
        return (value is not None, value)
    if namespace is Namespace.METRICS:
        points = run.metrics.get(key)
        if not points:
            return (False, None)
        return (True, latest_metric_point(points).value)
    if key == "run_id":
        return (True, run.run_id)
    if key == "status":
        return (True, run.status.value)
    if key == "start_time":
        return (True, run.start_time)
    if key == "end_time":
        return (run.end_time is not None, run.end_time)
    return (False, None)


def sort_runs(runs: list[Run], order_by: tuple[OrderTerm, ...]) -> list[Run]:
    def compare(a: Run, b: Run) -> int:
        for term in order_by:
            present_a, value_a = sort_value(a, term.namespace, term.key)
            present_b, value_b = sort_value(b, term.namespace, term.key)
            if present_a and present_b:
                if value_a == value_b:  # type: ignore[operator]
                    continue
                less = value_a < value_b  # type: ignore[operator]
                result = -1 if less else 1
                return result if term.ascending else -result
            if present_a:
                return -1
            if present_b:
                return 1
        if a.run_id == b.run_id:
            return 0
        return -1 if a.run_id < b.run_id else 1

    return sorted(runs, key=functools.cmp_to_key(compare))

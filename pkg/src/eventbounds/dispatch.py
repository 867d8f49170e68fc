"""Route bound requests to the closed-form families or the generic engine.

The closed forms cover only the first two or three moment orders; any
other order, or an explicit request, goes through the index-set search.
A request naming a formula gets exactly that family or an error; a
request without one gets the best applicable bound for its moment order.
"""

from __future__ import annotations

from . import bounds_l2, bounds_l3
from .certificates import (
    SIDE_LOWER,
    SIDE_UPPER,
    TARGET_AT_LEAST,
    BoundCertificate,
    BoundRequest,
    BoundTerm,
    certificate_from_terms,
)
from .core import EventSystem
from .engine import search_index_sets, solve_coefficients, target_vector
from .errors import NotApplicableError
from .moments import MomentSet, moment_matrix, moment_set
from .numerics import DEFAULT_TOLERANCE, dot_product

_L2_FORMULAS = {"u1", "u2", "l1", "l2"}
_L3_FORMULAS = {"ub1", "ub2", "ub3", "lb1", "lb2", "lb3"}
_UPPER_FORMULAS = {"u1", "u2", "ub1", "ub2", "ub3"}
_WINDOWED_FORMULAS = {"l2", "ub1", "ub3", "lb2", "lb3"}

FORMULAS = tuple(sorted(_L2_FORMULAS | _L3_FORMULAS)) + ("search", "jordan")


def _search(moments: MomentSet, request: BoundRequest, tolerance: float) -> BoundCertificate:
    n, d = moments.n, moments.d
    positions = n - d + 1
    if request.ell > positions:
        raise NotApplicableError(
            f"ell={request.ell} exceeds the {positions} moment positions at n={n}, d={d}"
        )
    fmat = moment_matrix(n, d, request.ell)
    v = target_vector(n, d, request.r, request.target)
    terms = []
    for vector in moments:
        result = search_index_sets(fmat, v, vector, request.side, tolerance=tolerance)
        if result.best is None:
            raise NotApplicableError(
                f"no {request.side}-feasible index set at ell={request.ell} "
                f"for target={request.target!r}, r={request.r}, d={d}, n={n}"
            )
        best = result.best
        terms.append(
            BoundTerm(
                j=vector.j,
                coefficients=best.coefficients,
                index_set=best.index_set,
                value=best.value,
                formula_id="search",
            )
        )
    return certificate_from_terms(
        request.side, request.target, request.r, d, request.ell, "search", terms
    )


def _jordan(moments: MomentSet, request: BoundRequest) -> BoundCertificate:
    n, d = moments.n, moments.d
    positions = n - d + 1
    if request.ell != positions:
        raise NotApplicableError(
            f"exact evaluation needs ell = n-d+1 = {positions}, got ell={request.ell}"
        )
    fmat = moment_matrix(n, d, positions)
    v = target_vector(n, d, request.r, request.target)
    full = tuple(range(1, positions + 1))
    a = solve_coefficients(fmat, full, v)
    terms = [
        BoundTerm(
            j=vector.j,
            coefficients=a,
            index_set=full,
            value=dot_product(a, vector.values),
            formula_id="jordan",
        )
        for vector in moments
    ]
    return certificate_from_terms(
        request.side, request.target, request.r, d, positions, "jordan", terms
    )


def evaluate_request(
    moments: MomentSet, request: BoundRequest, tolerance: float = DEFAULT_TOLERANCE
) -> BoundCertificate:
    """Evaluate a bound request against a moment set.

    Without a formula: the best applicable closed form at ell 2 or 3, the
    index-set search otherwise.  With a formula: that family exactly
    (side and moment order must agree), "search" for the enumeration, or
    "jordan" for the exact full-order evaluation.
    """
    n, r, d = moments.n, request.r, request.d
    if moments.d != d:
        raise ValueError(f"moment set has d={moments.d}, request asks for d={d}")
    if not (0 <= d <= r <= n):
        raise ValueError(f"need 0 <= d <= r <= n, got d={d}, r={r}, n={n}")
    if request.ell > moments.ell:
        raise ValueError(
            f"request needs ell={request.ell} moment orders, set has {moments.ell}"
        )
    working = moments if moments.ell == request.ell else moments.restricted(request.ell)
    formula = request.formula
    if formula in ("search", "jordan"):
        if request.m is not None:
            raise ValueError(f"formula {formula!r} has no window parameter m")
        return _search(working, request, tolerance) if formula == "search" else _jordan(working, request)
    if formula is None:
        if request.ell == 2:
            return bounds_l2.best_l2(working, n, r, d, request.target, request.side, request.m)
        if request.ell == 3:
            if request.m is not None:
                raise ValueError(
                    "the combined three-moment bound picks windows per index tuple; "
                    "name a formula to pin m"
                )
            if request.side == SIDE_UPPER:
                return bounds_l3.upper_best_l3(working, n, r, d, request.target)
            return bounds_l3.lower_best_l3(working, n, r, d, request.target)
        if request.m is not None:
            raise ValueError("m applies only to the closed-form windowed families")
        return _search(working, request, tolerance)
    if formula not in _L2_FORMULAS | _L3_FORMULAS:
        raise ValueError(f"unknown formula {formula!r}; known: {FORMULAS}")
    expected_side = SIDE_UPPER if formula in _UPPER_FORMULAS else SIDE_LOWER
    if request.side != expected_side:
        raise ValueError(
            f"formula {formula!r} produces {expected_side} bounds, request says {request.side}"
        )
    expected_ell = 2 if formula in _L2_FORMULAS else 3
    if request.ell != expected_ell:
        raise ValueError(f"formula {formula!r} uses ell={expected_ell}, request says {request.ell}")
    target, m = request.target, request.m
    if m is not None and formula not in _WINDOWED_FORMULAS:
        raise ValueError(f"formula {formula!r} has no window parameter m")
    if formula == "u1":
        return bounds_l2.upper_u1(working, n, r, d, target)
    if formula == "u2":
        pair = bounds_l2.upper_u2(working, n, r, d)
    elif formula == "l1":
        return bounds_l2.lower_l1(working, n, r, d, target)
    elif formula == "l2":
        if r != d:
            raise NotApplicableError(f"formula 'l2' needs r = d, got r={r}, d={d}")
        if m is not None and target != TARGET_AT_LEAST:
            raise ValueError("the exactly target of 'l2' has a fixed window")
        pair = bounds_l2.lower_l2(working, n, d, m)
    elif formula == "ub1":
        return bounds_l3.upper_ub1(working, n, r, d, m, target)
    elif formula == "ub2":
        pair = bounds_l3.upper_ub2(working, n, r, d)
    elif formula == "ub3":
        pair = bounds_l3.upper_ub3(working, n, r, d, m)
    elif formula == "lb1":
        pair = bounds_l3.lower_lb1(working, n, r, d)
        if target != TARGET_AT_LEAST and r != n:
            raise NotApplicableError(
                f"formula 'lb1' reaches the exactly target only at r = n, got r={r}, n={n}"
            )
    elif formula == "lb2":
        if m is not None and target != TARGET_AT_LEAST:
            raise ValueError("the exactly target of 'lb2' has a fixed window")
        pair = bounds_l3.lower_lb2(working, n, r, d, m)
    else:
        if r != d:
            raise NotApplicableError(f"formula 'lb3' needs r = d, got r={r}, d={d}")
        if m is not None and target != TARGET_AT_LEAST:
            raise ValueError("the exactly target of 'lb3' has a fixed window")
        pair = bounds_l3.lower_lb3(working, n, d, m)
    return pair[0] if target == TARGET_AT_LEAST else pair[1]


def bound_for_system(
    sys: EventSystem, request: BoundRequest, tolerance: float = DEFAULT_TOLERANCE
) -> BoundCertificate:
    """Compute the request's moment set from the system, then evaluate it."""
    moments = moment_set(sys, request.d, request.ell)
    return evaluate_request(moments, request, tolerance)

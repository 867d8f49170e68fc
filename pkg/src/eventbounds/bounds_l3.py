"""Closed-form bounds from the first three moment orders.

Six coefficient families cover the three-position index sets that admit
closed forms; each is reproduced by the engine module from its index set
(writing N = n - d + 1 for the position count, and m for a sliding window
position chosen per index tuple):

upper bounds
  * ``ub1`` (r - d >= 2): positions (m, m+1, r-d+1), m in 1..r-d-1, family
    tag ``alpha``; the same value bounds both targets.
  * ``ub2`` (r - d >= 1, n - r >= 1): positions (1, r-d+1, N), tag
    ``beta`` for the at-least target and ``delta`` for the exactly target.
  * ``ub3`` (n - r >= 2): positions (r-d+1, m, m+1), m in r-d+2..n-d, tag
    ``gamma`` for the at-least target; the exactly target reuses ``alpha``
    on this upper window range.

lower bounds
  * ``lb1`` (r - d >= 2): positions (1, r-d, N), tag ``alpha``; the
    exactly target exists only at r = n (tag ``delta``, alpha at r = n).
  * ``lb2`` (r - d >= 1, n - r >= 1): positions (r-d, m, m+1), m in
    r-d+1..n-d, tag ``beta``; the exactly target uses the fixed window
    m = r-d+1 (tag ``theta``).
  * ``lb3`` (r = d, n - d >= 2): positions (m, m+1, N), m in 1..n-d-1,
    tag ``gamma``; the exactly target uses the fixed window m = 1 (tag
    ``phi``).

Window positions are picked by :func:`optimal_m`: an integer bracket rule
when its sign condition holds (it comes from requiring the sharpness
witness at the window to be nonnegative, so the bracketed window attains
the bound), endpoint evaluation otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .certificates import (
    SIDE_LOWER,
    SIDE_UPPER,
    TARGET_AT_LEAST,
    TARGET_EXACTLY,
    TARGETS,
    BoundCertificate,
    BoundTerm,
    certificate_from_terms,
)
from .core import binomial
from .errors import DegenerateConfigurationError, NotApplicableError
from .moments import MomentSet, MomentVector
from .numerics import Number, dot_product, integer_bracket, rational

FAMILIES = ("alpha", "beta", "gamma", "delta", "theta", "phi")

M_RULES = ("mop", "mop1", "mop2")


@dataclass(frozen=True)
class CoefficientVector:
    """Three rational coefficients applied to (s_1, s_2, s_3), with provenance."""

    values: tuple[Number, Number, Number]
    family: str
    n: int
    r: int
    d: int
    m: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != 3:
            raise ValueError(f"expected three coefficients, got {len(self.values)}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")


@lru_cache(maxsize=None)
def upper_alpha(n: int, r: int, d: int, m: int) -> CoefficientVector:
    """Window coefficients for upper bounds; valid off the pivot positions.

    Defined for windows with m not in {r-d, r-d+1}; used on the low range
    m in 1..r-d-1 (family ub1) and, for the exactly target, on the high
    range m in r-d+2..n-d (family ub3).
    """
    if not (0 <= d <= r <= n):
        raise ValueError(f"need 0 <= d <= r <= n, got d={d}, r={r}, n={n}")
    delta = (r - d - m) * (r - d - m + 1)
    if delta == 0:
        raise DegenerateConfigurationError(f"window m={m} collides with the pivot r-d={r - d}")
    den = delta * binomial(r, d)
    values = (
        rational(m * (m - 1), den),
        rational(-2 * (d + 1) * (m - 1), den),
        rational((d + 1) * (d + 2), den),
    )
    return CoefficientVector(values=values, family="alpha", n=n, r=r, d=d, m=m)


def _delta1(n: int, r: int, d: int) -> int:
    return binomial(n, d + 2) * binomial(r, d + 1) - binomial(n, d + 1) * binomial(r, d + 2)


@lru_cache(maxsize=None)
def upper_beta(n: int, r: int, d: int) -> CoefficientVector:
    """Coefficients of the top-anchored upper bound for the at-least target."""
    if r - d < 1 or n - r < 1:
        raise ValueError(f"need r-d >= 1 and n-r >= 1, got r={r}, d={d}, n={n}")
    d1 = _delta1(n, r, d)
    if d1 == 0:
        raise DegenerateConfigurationError(f"degenerate configuration at n={n}, r={r}, d={d}")
    values = (
        rational(0),
        rational(binomial(n, d + 2) - binomial(r, d + 2), d1),
        rational(binomial(r, d + 1) - binomial(n, d + 1), d1),
    )
    return CoefficientVector(values=values, family="beta", n=n, r=r, d=d)


@lru_cache(maxsize=None)
def upper_delta(n: int, r: int, d: int) -> CoefficientVector:
    """Coefficients of the top-anchored upper bound for the exactly target."""
    if r - d < 1 or n - r < 1:
        raise ValueError(f"need r-d >= 1 and n-r >= 1, got r={r}, d={d}, n={n}")
    d1 = _delta1(n, r, d)
    if d1 == 0:
        raise DegenerateConfigurationError(f"degenerate configuration at n={n}, r={r}, d={d}")
    values = (
        rational(0),
        rational(binomial(n, d + 2), d1),
        rational(-binomial(n, d + 1), d1),
    )
    return CoefficientVector(values=values, family="delta", n=n, r=r, d=d)


@lru_cache(maxsize=None)
def upper_gamma(n: int, r: int, d: int, m: int) -> CoefficientVector:
    """High-window upper coefficients for the at-least target, m in r-d+2..n-d.

    At d = 0 this reduces to (1, 0, 0), bounding by the first moment; for
    d > 0 the signs are (+, -, +).
    """
    if not (0 <= d <= r <= n):
        raise ValueError(f"need 0 <= d <= r <= n, got d={d}, r={r}, n={n}")
    if m < r - d + 2 or m > n - d:
        raise ValueError(f"need r-d+2 <= m <= n-d, got m={m}, r={r}, d={d}, n={n}")
    delta = (r - d - m) * (r - d - m + 1)
    c1 = binomial(m + d - 1, d)
    c2 = binomial(m + d, d)
    c3 = binomial(r, d)
    g1 = (
        rational(m * (r - d) * (r - d - m), c1 * delta)
        - rational((m - 1) * (r - d) * (r - d - m + 1), c2 * delta)
        + rational(m * (m - 1), c3 * delta)
    )
    g2 = (d + 1) * (
        -rational((r - d - m) * (r - d + m - 1), c1 * delta)
        + rational((r - d - m + 1) * (r - d + m - 2), c2 * delta)
        - rational(2 * (m - 1), c3 * delta)
    )
    g3 = (d + 1) * (d + 2) * (
        rational(r - d - m, c1 * delta)
        - rational(r - d - m + 1, c2 * delta)
        + rational(1, c3 * delta)
    )
    return CoefficientVector(values=(g1, g2, g3), family="gamma", n=n, r=r, d=d, m=m)


@lru_cache(maxsize=None)
def lower_alpha(n: int, r: int, d: int) -> CoefficientVector:
    """Top-anchored lower coefficients; the exactly target uses r = n."""
    if r - d < 2:
        raise ValueError(f"need r-d >= 2, got r={r}, d={d}")
    d2 = binomial(n, d + 2) * binomial(r - 1, d + 1) - binomial(n, d + 1) * binomial(r - 1, d + 2)
    if d2 == 0:
        raise DegenerateConfigurationError(f"degenerate configuration at n={n}, r={r}, d={d}")
    values = (
        rational(0),
        rational(-binomial(r - 1, d + 2), d2),
        rational(binomial(r - 1, d + 1), d2),
    )
    return CoefficientVector(values=values, family="alpha", n=n, r=r, d=d)


@lru_cache(maxsize=None)
def lower_beta(n: int, r: int, d: int, m: int) -> CoefficientVector:
    """High-window lower coefficients, m in r-d+1..n-d.

    For r - d >= 2 the signs are (-, +, -).
    """
    if m < r - d + 1 or m > n - d:
        raise ValueError(f"need r-d+1 <= m <= n-d, got m={m}, r={r}, d={d}, n={n}")
    d3 = (r - d - m - 1) * (r - d - m)
    if d3 == 0:
        raise DegenerateConfigurationError(f"window m={m} collides with the pivot r-d={r - d}")
    c1 = binomial(m + d - 1, d)
    c2 = binomial(m + d, d)
    b1 = (
        rational(m * (r - d - 1) * (r - d - m - 1), c1 * d3)
        - rational((m - 1) * (r - d - 1) * (r - d - m), c2 * d3)
    )
    b2 = (d + 1) * (
        -rational((r - d - m - 1) * (r - d + m - 2), c1 * d3)
        + rational((r - d - m) * (r - d + m - 3), c2 * d3)
    )
    b3 = (d + 1) * (d + 2) * (
        rational(r - d - m - 1, c1 * d3) - rational(r - d - m, c2 * d3)
    )
    return CoefficientVector(values=(b1, b2, b3), family="beta", n=n, r=r, d=d, m=m)


@lru_cache(maxsize=None)
def lower_theta(n: int, r: int, d: int) -> CoefficientVector:
    """Fixed-window lower coefficients for the exactly target (window r-d+1)."""
    if r - d < 1:
        raise ValueError(f"need r-d >= 1, got r={r}, d={d}")
    c = binomial(r, d)
    values = (
        rational(-(r - d + 1) * (r - d - 1), c),
        rational((d + 1) * (2 * (r - d) - 1), c),
        rational(-(d + 1) * (d + 2), c),
    )
    return CoefficientVector(values=values, family="theta", n=n, r=r, d=d, m=r - d + 1)


@lru_cache(maxsize=None)
def lower_gamma(n: int, d: int, m: int) -> CoefficientVector:
    """Window lower coefficients for the threshold r = d, m in 1..n-d-1.

    At d = 0 this reduces to (1, 0, 0); for d > 0 the signs are (+, -, +).
    """
    if n - d < 2:
        raise ValueError(f"need n-d >= 2, got n={n}, d={d}")
    if m < 1 or m > n - d - 1:
        raise ValueError(f"need 1 <= m <= n-d-1, got m={m}, n={n}, d={d}")
    delta = (n - d - m) * (n - d - m + 1)
    c1 = binomial(m + d - 1, d)
    c2 = binomial(m + d, d)
    c3 = binomial(n, d)
    g1 = (
        rational(m * (n - d) * (n - d - m), c1 * delta)
        - rational((m - 1) * (n - d) * (n - d - m + 1), c2 * delta)
        + rational(m * (m - 1), c3 * delta)
    )
    g2 = (d + 1) * (
        -rational((n - d - m) * (n - d + m - 1), c1 * delta)
        + rational((n - d - m + 1) * (n - d + m - 2), c2 * delta)
        - rational(2 * (m - 1), c3 * delta)
    )
    g3 = (d + 1) * (d + 2) * (
        rational(n - d - m, c1 * delta)
        - rational(n - d - m + 1, c2 * delta)
        + rational(1, c3 * delta)
    )
    return CoefficientVector(values=(g1, g2, g3), family="gamma", n=n, r=d, d=d, m=m)


@lru_cache(maxsize=None)
def lower_phi(n: int, d: int) -> CoefficientVector:
    """Fixed-window lower coefficients for the exactly target at r = d."""
    if n - d < 2:
        raise ValueError(f"need n-d >= 2, got n={n}, d={d}")
    values = (rational(1), rational(-(d + 1)), rational((d + 1) * (d + 2), n - d))
    return CoefficientVector(values=values, family="phi", n=n, r=d, d=d, m=1)


def _triple(vector: MomentVector) -> tuple[Number, Number, Number]:
    return vector.values[0], vector.values[1], vector.values[2]


def _positive(value: Number, exact: bool) -> bool:
    return value > 0 if exact else float(value) > 0.0


def optimal_m(
    rule: str,
    s: "MomentVector | Sequence[Number]",
    n: int,
    r: int,
    d: int,
    lo: Optional[int] = None,
    hi: Optional[int] = None,
    summand: Optional[Callable[[int], Number]] = None,
) -> int:
    """Pick the window position m for a three-moment bound family.

    ``rule`` selects the bracket: "mop" for the upper families (window
    ranges 1..r-d-1 by default, or an explicit high range for the
    top-window family), "mop1" for the high-window lower family
    (r-d+1..n-d), "mop2" for the threshold lower family (1..n-d-1).

    When the rule's sign condition holds, the bracketed integers are
    candidates (the bracket places the window where the sharpness witness
    stays nonnegative); otherwise the range endpoints are.  Candidates are
    compared through ``summand``, the per-window bound contribution, which
    defaults to the family's own coefficient row against ``s``; upper
    rules minimize, lower rules maximize; ties keep the smallest window.
    """
    if rule not in M_RULES:
        raise ValueError(f"rule must be one of {M_RULES}, got {rule!r}")
    values = s.values[:3] if isinstance(s, MomentVector) else tuple(s)[:3]
    if len(values) != 3:
        raise ValueError("three moment orders are required to place a window")
    s1, s2, s3 = values
    exact = not any(isinstance(x, float) for x in values)
    if rule == "mop":
        lo = 1 if lo is None else lo
        hi = r - d - 1 if hi is None else hi
        minimize = True
    elif rule == "mop1":
        lo = r - d + 1 if lo is None else lo
        hi = n - d if hi is None else hi
        minimize = False
    else:
        lo = 1 if lo is None else lo
        hi = n - d - 1 if hi is None else hi
        minimize = False
    if lo > hi or lo < 1:
        raise NotApplicableError(f"empty window range [{lo}, {hi}] for rule {rule!r}")
    if rule == "mop":
        q = (r - d) * s1 - (d + 1) * s2
        num = (d + 1) * ((r - d - 1) * s2 - (d + 2) * s3)
        if lo >= r - d + 2:
            # High-range windows invert the quotient's sign condition.
            q, num = -q, -num
        if _positive(q, exact):
            candidates = integer_bracket(num, q, lo, hi)
        else:
            candidates = (lo, hi) if lo != hi else (lo,)
        if summand is None:
            summand = lambda m: dot_product(upper_alpha(n, r, d, m).values, values)
    elif rule == "mop1":
        den = (d + 1) * s2 - (r - d - 1) * s1
        num = (d + 1) * ((d + 2) * s3 - (r - d - 2) * s2)
        if _positive(den, exact):
            candidates = integer_bracket(num, den, lo, hi)
        else:
            candidates = (lo, hi) if lo != hi else (lo,)
        if summand is None:
            summand = lambda m: dot_product(lower_beta(n, r, d, m).values, values)
    else:
        den = (n - d) * s1 - (d + 1) * s2
        num = (d + 1) * ((n - d - 1) * s2 - (d + 2) * s3)
        if _positive(den, exact):
            candidates = integer_bracket(num, den, lo, hi)
        else:
            candidates = (lo, hi) if lo != hi else (lo,)
        if summand is None:
            summand = lambda m: dot_product(lower_gamma(n, d, m).values, values)
    best_m = None
    best_value = None
    for candidate in candidates:
        value = summand(candidate)
        better = (
            best_value is None
            or (minimize and value < best_value)
            or (not minimize and value > best_value)
        )
        if better:
            best_m, best_value = candidate, value
    return best_m


def _validate(moments: MomentSet, n: int, r: int, d: int) -> None:
    if (moments.n, moments.d) != (n, d):
        raise ValueError(
            f"moment set is for (n={moments.n}, d={moments.d}), request says (n={n}, d={d})"
        )
    if moments.ell < 3:
        raise ValueError(f"three moment orders required, moment set has ell={moments.ell}")
    if not (0 <= d <= r <= n):
        raise ValueError(f"need 0 <= d <= r <= n, got d={d}, r={r}, n={n}")


def _term(vector: MomentVector, coeffs: CoefficientVector, index_set, formula_id: str) -> BoundTerm:
    value = dot_product(coeffs.values, _triple(vector))
    return BoundTerm(
        j=vector.j,
        coefficients=coeffs.values,
        index_set=index_set,
        value=value,
        formula_id=formula_id,
        m=coeffs.m,
    )


def _ub1_term(vector: MomentVector, n: int, r: int, d: int, m: Optional[int]) -> BoundTerm:
    window = m if m is not None else optimal_m("mop", vector, n, r, d)
    coeffs = upper_alpha(n, r, d, window)
    return _term(vector, coeffs, (window, window + 1, r - d + 1), "ub1")


def _ub2_term(vector: MomentVector, n: int, r: int, d: int, target: str) -> BoundTerm:
    coeffs = upper_beta(n, r, d) if target == TARGET_AT_LEAST else upper_delta(n, r, d)
    return _term(vector, coeffs, (1, r - d + 1, n - d + 1), "ub2")


def _ub3_term(vector: MomentVector, n: int, r: int, d: int, m: Optional[int], target: str) -> BoundTerm:
    lo, hi = r - d + 2, n - d
    values = _triple(vector)
    if target == TARGET_AT_LEAST:
        summand = lambda w: dot_product(upper_gamma(n, r, d, w).values, values)
    else:
        summand = lambda w: dot_product(upper_alpha(n, r, d, w).values, values)
    window = m if m is not None else optimal_m("mop", vector, n, r, d, lo=lo, hi=hi, summand=summand)
    if not (lo <= window <= hi):
        raise ValueError(f"need {lo} <= m <= {hi}, got m={window}")
    coeffs = (
        upper_gamma(n, r, d, window)
        if target == TARGET_AT_LEAST
        else upper_alpha(n, r, d, window)
    )
    return _term(vector, coeffs, (r - d + 1, window, window + 1), "ub3")


def _lb1_term(vector: MomentVector, n: int, r: int, d: int) -> BoundTerm:
    coeffs = lower_alpha(n, r, d)
    return _term(vector, coeffs, (1, r - d, n - d + 1), "lb1")


def _lb2_term(vector: MomentVector, n: int, r: int, d: int, m: Optional[int], target: str) -> BoundTerm:
    if target == TARGET_EXACTLY:
        coeffs = lower_theta(n, r, d)
        return _term(vector, coeffs, (r - d, r - d + 1, r - d + 2), "lb2")
    window = m if m is not None else optimal_m("mop1", vector, n, r, d)
    coeffs = lower_beta(n, r, d, window)
    return _term(vector, coeffs, (r - d, window, window + 1), "lb2")


def _lb3_term(vector: MomentVector, n: int, d: int, m: Optional[int], target: str) -> BoundTerm:
    if target == TARGET_EXACTLY:
        coeffs = lower_phi(n, d)
        return _term(vector, coeffs, (1, 2, n - d + 1), "lb3")
    window = m if m is not None else optimal_m("mop2", vector, n, d, d)
    coeffs = lower_gamma(n, d, window)
    return _term(vector, coeffs, (window, window + 1, n - d + 1), "lb3")


def upper_ub1(
    moments: MomentSet, n: int, r: int, d: int, m: Optional[int] = None, target: str = TARGET_AT_LEAST
) -> BoundCertificate:
    """Low-window upper bound; needs r - d >= 2.

    The value simultaneously bounds the at-least-r and exactly-r
    probabilities; ``target`` only labels the certificate.  The window is
    chosen per index tuple unless ``m`` pins it.
    """
    _validate(moments, n, r, d)
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
    if r - d < 2:
        raise NotApplicableError(f"needs r - d >= 2, got r={r}, d={d}")
    if m is not None and not (1 <= m <= r - d - 1):
        raise ValueError(f"need 1 <= m <= r-d-1 = {r - d - 1}, got m={m}")
    terms = [_ub1_term(v, n, r, d, m) for v in moments]
    return certificate_from_terms(SIDE_UPPER, target, r, d, 3, "ub1", terms)


def upper_ub2(moments: MomentSet, n: int, r: int, d: int) -> tuple[BoundCertificate, BoundCertificate]:
    """Top-anchored upper bounds; needs r - d >= 1 and n - r >= 1.

    Returns one certificate per target (at-least-r, exactly-r).
    """
    _validate(moments, n, r, d)
    if r - d < 1 or n - r < 1:
        raise NotApplicableError(f"needs r-d >= 1 and n-r >= 1, got r={r}, d={d}, n={n}")
    at_least_terms = [_ub2_term(v, n, r, d, TARGET_AT_LEAST) for v in moments]
    exactly_terms = [_ub2_term(v, n, r, d, TARGET_EXACTLY) for v in moments]
    return (
        certificate_from_terms(SIDE_UPPER, TARGET_AT_LEAST, r, d, 3, "ub2", at_least_terms),
        certificate_from_terms(SIDE_UPPER, TARGET_EXACTLY, r, d, 3, "ub2", exactly_terms),
    )


def upper_ub3(
    moments: MomentSet, n: int, r: int, d: int, m: Optional[int] = None
) -> tuple[BoundCertificate, BoundCertificate]:
    """High-window upper bounds; needs n - r >= 2.

    Returns one certificate per target.  The window may differ between the
    two targets when chosen automatically, since each target evaluates its
    own coefficient family.
    """
    _validate(moments, n, r, d)
    if n - r < 2:
        raise NotApplicableError(f"needs n - r >= 2, got r={r}, n={n}")
    lo, hi = r - d + 2, n - d
    if m is not None and not (lo <= m <= hi):
        raise ValueError(f"need {lo} <= m <= {hi}, got m={m}")
    at_least_terms = [_ub3_term(v, n, r, d, m, TARGET_AT_LEAST) for v in moments]
    exactly_terms = [_ub3_term(v, n, r, d, m, TARGET_EXACTLY) for v in moments]
    return (
        certificate_from_terms(SIDE_UPPER, TARGET_AT_LEAST, r, d, 3, "ub3", at_least_terms),
        certificate_from_terms(SIDE_UPPER, TARGET_EXACTLY, r, d, 3, "ub3", exactly_terms),
    )


def lower_lb1(moments: MomentSet, n: int, r: int, d: int) -> tuple[BoundCertificate, BoundCertificate]:
    """Top-anchored lower bounds; needs r - d >= 2.

    Returns the at-least-r certificate and the exactly-n certificate (the
    only exactly target this family reaches; its certificate carries
    r = n regardless of the requested r).
    """
    _validate(moments, n, r, d)
    if r - d < 2:
        raise NotApplicableError(f"needs r - d >= 2, got r={r}, d={d}")
    at_least_terms = [_lb1_term(v, n, r, d) for v in moments]
    exactly_terms = [_lb1_term(v, n, n, d) for v in moments]
    return (
        certificate_from_terms(SIDE_LOWER, TARGET_AT_LEAST, r, d, 3, "lb1", at_least_terms),
        certificate_from_terms(SIDE_LOWER, TARGET_EXACTLY, n, d, 3, "lb1", exactly_terms),
    )


def lower_lb2(
    moments: MomentSet, n: int, r: int, d: int, m: Optional[int] = None
) -> tuple[BoundCertificate, BoundCertificate]:
    """High-window lower bounds; needs r - d >= 1 and n - r >= 1.

    Returns one certificate per target.  Only the at-least target has a
    window choice; the exactly target uses the fixed window next to the
    pivot.
    """
    _validate(moments, n, r, d)
    if r - d < 1 or n - r < 1:
        raise NotApplicableError(f"needs r-d >= 1 and n-r >= 1, got r={r}, d={d}, n={n}")
    lo, hi = r - d + 1, n - d
    if m is not None and not (lo <= m <= hi):
        raise ValueError(f"need {lo} <= m <= {hi}, got m={m}")
    at_least_terms = [_lb2_term(v, n, r, d, m, TARGET_AT_LEAST) for v in moments]
    exactly_terms = [_lb2_term(v, n, r, d, m, TARGET_EXACTLY) for v in moments]
    return (
        certificate_from_terms(SIDE_LOWER, TARGET_AT_LEAST, r, d, 3, "lb2", at_least_terms),
        certificate_from_terms(SIDE_LOWER, TARGET_EXACTLY, r, d, 3, "lb2", exactly_terms),
    )


def lower_lb3(
    moments: MomentSet, n: int, d: int, m: Optional[int] = None
) -> tuple[BoundCertificate, BoundCertificate]:
    """Window lower bounds for the threshold r = d; needs n - d >= 2.

    Returns one certificate per target.  Only the at-least target has a
    window choice; the exactly target uses the fixed window 1.
    """
    r = d
    _validate(moments, n, r, d)
    if n - d < 2:
        raise NotApplicableError(f"needs n - d >= 2, got n={n}, d={d}")
    lo, hi = 1, n - d - 1
    if m is not None and not (lo <= m <= hi):
        raise ValueError(f"need {lo} <= m <= {hi}, got m={m}")
    at_least_terms = [_lb3_term(v, n, d, m, TARGET_AT_LEAST) for v in moments]
    exactly_terms = [_lb3_term(v, n, d, m, TARGET_EXACTLY) for v in moments]
    return (
        certificate_from_terms(SIDE_LOWER, TARGET_AT_LEAST, r, d, 3, "lb3", at_least_terms),
        certificate_from_terms(SIDE_LOWER, TARGET_EXACTLY, r, d, 3, "lb3", exactly_terms),
    )


def _applicable_upper_builders(n: int, r: int, d: int, target: str):
    builders = []
    if r - d >= 2:
        builders.append(lambda v: _ub1_term(v, n, r, d, None))
    if r - d >= 1 and n - r >= 1:
        builders.append(lambda v: _ub2_term(v, n, r, d, target))
    if n - r >= 2:
        builders.append(lambda v: _ub3_term(v, n, r, d, None, target))
    return builders


def _applicable_lower_builders(n: int, r: int, d: int, target: str):
    builders = []
    if target == TARGET_AT_LEAST:
        if r - d >= 2:
            builders.append(lambda v: _lb1_term(v, n, r, d))
        if r - d >= 1 and n - r >= 1:
            builders.append(lambda v: _lb2_term(v, n, r, d, None, target))
        if r == d and n - d >= 2:
            builders.append(lambda v: _lb3_term(v, n, d, None, target))
    else:
        if r == n and n - d >= 2:
            builders.append(lambda v: _lb1_term(v, n, n, d))
        if r - d >= 1 and n - r >= 1:
            builders.append(lambda v: _lb2_term(v, n, r, d, None, target))
        if r == d and n - d >= 2:
            builders.append(lambda v: _lb3_term(v, n, d, None, target))
    return builders


def upper_best_l3(
    moments: MomentSet, n: int, r: int, d: int, target: str = TARGET_AT_LEAST
) -> BoundCertificate:
    """Combined three-moment upper bound: per index tuple, the smallest
    applicable family contribution.

    The combination can beat every single family because the winning
    family may differ between index tuples.  Raises when no family
    applies.
    """
    _validate(moments, n, r, d)
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
    builders = _applicable_upper_builders(n, r, d, target)
    if not builders:
        raise NotApplicableError(
            f"no three-moment upper bound applies at r={r}, d={d}, n={n}"
        )
    terms = []
    for vector in moments:
        candidates = [build(vector) for build in builders]
        best = candidates[0]
        for candidate in candidates[1:]:
            if candidate.value < best.value:
                best = candidate
        terms.append(best)
    formula = terms[0].formula_id if len(builders) == 1 else "ub-min"
    return certificate_from_terms(SIDE_UPPER, target, r, d, 3, formula, terms)


def lower_best_l3(
    moments: MomentSet, n: int, r: int, d: int, target: str = TARGET_AT_LEAST
) -> BoundCertificate:
    """Combined three-moment lower bound: per index tuple, the largest
    applicable family contribution.

    Families enter only where their own preconditions hold.  Raises when
    no family applies.
    """
    _validate(moments, n, r, d)
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
    builders = _applicable_lower_builders(n, r, d, target)
    if not builders:
        raise NotApplicableError(
            f"no three-moment lower bound applies to target={target!r}, r={r}, d={d}, n={n}"
        )
    terms = []
    for vector in moments:
        candidates = [build(vector) for build in builders]
        best = candidates[0]
        for candidate in candidates[1:]:
            if candidate.value > best.value:
                best = candidate
        terms.append(best)
    formula = terms[0].formula_id if len(builders) == 1 else "lb-max"
    return certificate_from_terms(SIDE_LOWER, target, r, d, 3, formula, terms)

"""Generic dual machinery behind every bound.

Write the quantity of interest as Z = z . v, where z is the (unknown)
nonnegative occurrence vector pinned on an index tuple and v is a 0/1
target vector.  Given the moments s = F z, any coefficient vector a with
b = F^T a >= v componentwise certifies Z <= s . a, and b <= v certifies
Z >= s . a.  Solving F_i^T a = v_i on an index set i of ell positions
makes ell components of b match v exactly; the remaining components decide
feasibility.  The vector z* supported on i with F_i z*_i = s has the same
moments, and when z* is nonnegative it is an occurrence vector attaining
the bound, which is the sharpness witness.

This module solves those small dense systems exactly, checks feasibility,
enumerates index sets, and handles the full-order case ell = n-d+1 where
the bound collapses to an exact identity (the Jordan-formula case).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .certificates import (
    SIDE_LOWER,
    SIDE_UPPER,
    SIDES,
    TARGET_AT_LEAST,
    TARGETS,
    BoundCertificate,
)
from .core import EventSystem, IndexTuple, binomial
from .errors import DegenerateConfigurationError, DegenerateMeasureError, NotApplicableError, ResourceLimitError
from .moments import MomentMatrix, MomentVector
from .numerics import (
    DEFAULT_TOLERANCE,
    Number,
    all_exact,
    clamp01,
    dot_product,
    encode_number,
    rational,
)


@dataclass(frozen=True)
class TargetVector:
    """The 0/1 vector selecting which occurrence levels count toward Z.

    Position u (1-based, u = 1..n-d+1) refers to occurrence level u+d-1.
    The at-least-r target is zeros followed by ones starting at position
    r-d+1; the exactly-r target is a single one at that position.
    """

    n: int
    d: int
    r: int
    target: str
    v: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", tuple(self.v))
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}, got {self.target!r}")
        if not (0 <= self.d <= self.r <= self.n):
            raise ValueError(
                f"need 0 <= d <= r <= n, got d={self.d}, r={self.r}, n={self.n}"
            )
        if len(self.v) != self.n - self.d + 1 or any(x not in (0, 1) for x in self.v):
            raise ValueError("target vector must be 0/1 of length n-d+1")


def target_vector(n: int, d: int, r: int, target: str = TARGET_AT_LEAST) -> TargetVector:
    """Build the target vector for at-least-r or exactly-r."""
    if not (0 <= d <= r <= n):
        raise ValueError(f"need 0 <= d <= r <= n, got d={d}, r={r}, n={n}")
    positions = n - d + 1
    pivot = r - d + 1
    if target == TARGET_AT_LEAST:
        v = tuple(1 if u >= pivot else 0 for u in range(1, positions + 1))
    elif target in TARGETS:
        v = tuple(1 if u == pivot else 0 for u in range(1, positions + 1))
    else:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
    return TargetVector(n=n, d=d, r=r, target=target, v=v)


class Feasibility(enum.Enum):
    """Outcome of comparing b = F^T a against the target vector v."""

    LOWER_FEASIBLE = "lower-feasible"
    UPPER_FEASIBLE = "upper-feasible"
    EQUALITY = "equality"
    INFEASIBLE = "infeasible"

    @property
    def allows_lower(self) -> bool:
        """True when s . a is a valid lower bound (b <= v)."""
        return self in (Feasibility.LOWER_FEASIBLE, Feasibility.EQUALITY)

    @property
    def allows_upper(self) -> bool:
        """True when s . a is a valid upper bound (b >= v)."""
        return self in (Feasibility.UPPER_FEASIBLE, Feasibility.EQUALITY)


def _solve_linear(rows: Sequence[Sequence[Number]], rhs: Sequence[Number], exact: bool):
    """Solve a small dense linear system by Gauss-Jordan elimination.

    Exact mode pivots on the first nonzero entry; float mode uses partial
    pivoting.  Raises on a singular matrix.
    """
    size = len(rows)
    if any(len(row) != size for row in rows) or len(rhs) != size:
        raise ValueError("linear system must be square with matching right-hand side")
    if exact:
        mat = [[rational(x) for x in row] + [rational(b)] for row, b in zip(rows, rhs)]
    else:
        mat = [[float(x) for x in row] + [float(b)] for row, b in zip(rows, rhs)]
    for col in range(size):
        if exact:
            pivot = next((r for r in range(col, size) if mat[r][col] != 0), None)
        else:
            pivot = max(range(col, size), key=lambda r: abs(mat[r][col]))
            if abs(mat[pivot][col]) < 1e-300:
                pivot = None
        if pivot is None:
            raise DegenerateConfigurationError("singular linear system")
        mat[col], mat[pivot] = mat[pivot], mat[col]
        head = mat[col][col]
        mat[col] = [x / head for x in mat[col]]
        for r in range(size):
            if r != col and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[col])]
    return tuple(mat[r][size] for r in range(size))


@lru_cache(maxsize=65536)
def _cached_coefficient_solve(
    rows: tuple[tuple[int, ...], ...], index_set: tuple[int, ...], rhs: tuple[int, ...]
) -> tuple:
    system_rows = [[rows[k][i - 1] for k in range(len(rows))] for i in index_set]
    return _solve_linear(system_rows, rhs, exact=True)


def _check_index_set(fmat: MomentMatrix, index_set: Sequence[int]) -> tuple[int, ...]:
    index_set = tuple(index_set)
    if len(index_set) != fmat.ell:
        raise ValueError(
            f"index set must have {fmat.ell} positions, got {len(index_set)}"
        )
    if any(not (1 <= i <= fmat.positions) for i in index_set):
        raise ValueError(f"index set {index_set} out of range 1..{fmat.positions}")
    if any(a >= b for a, b in zip(index_set, index_set[1:])):
        raise ValueError(f"index set must be strictly increasing, got {index_set}")
    return index_set


def _target_components(v: "TargetVector | Sequence[int]") -> tuple:
    return tuple(v.v) if isinstance(v, TargetVector) else tuple(v)


def solve_coefficients(
    fmat: MomentMatrix, index_set: Sequence[int], v: "TargetVector | Sequence[int]"
) -> tuple[Number, ...]:
    """Solve the dual system: the coefficient vector a with (F^T a)_i = v_i.

    The moment matrix is integer and its square subsystems on strictly
    increasing index sets are invertible, so the solve is always exact.
    """
    index_set = _check_index_set(fmat, index_set)
    components = _target_components(v)
    if len(components) != fmat.positions:
        raise ValueError(
            f"target vector must have {fmat.positions} components, got {len(components)}"
        )
    rhs = tuple(components[i - 1] for i in index_set)
    if all_exact(rhs):
        return _cached_coefficient_solve(fmat.rows, index_set, rhs)
    system_rows = [[fmat.rows[k][i - 1] for k in range(fmat.ell)] for i in index_set]
    return _solve_linear(system_rows, rhs, exact=False)


def check_feasibility(
    fmat: MomentMatrix,
    a: Sequence[Number],
    v: "TargetVector | Sequence[int]",
    tolerance: float = DEFAULT_TOLERANCE,
) -> Feasibility:
    """Compare b = F^T a with v componentwise.

    b >= v makes s . a an upper bound on Z, b <= v a lower bound, equality
    both.  Exact values compare exactly; if a carries floats, each
    component check allows the given absolute slack.
    """
    if len(a) != fmat.ell:
        raise ValueError(f"coefficient vector must have {fmat.ell} entries, got {len(a)}")
    components = _target_components(v)
    exact = all_exact(a)
    slack = 0 if exact else tolerance
    lower = upper = True
    for i in range(1, fmat.positions + 1):
        column = fmat.column(i)
        b_i = dot_product(a, column)
        target = components[i - 1]
        if not exact:
            b_i, target = float(b_i), float(target)
        if b_i > target + slack:
            lower = False
        if b_i < target - slack:
            upper = False
        if not lower and not upper:
            return Feasibility.INFEASIBLE
    if lower and upper:
        return Feasibility.EQUALITY
    return Feasibility.LOWER_FEASIBLE if lower else Feasibility.UPPER_FEASIBLE


def bound_value(s: "MomentVector | Sequence[Number]", a: Sequence[Number]) -> Number:
    """The bound value: scalar product of the moments with the coefficients."""
    values = s.values if isinstance(s, MomentVector) else tuple(s)
    return dot_product(a, values)


@dataclass(frozen=True)
class SharpnessWitness:
    """A candidate occurrence vector with the observed moments.

    ``z`` is supported on ``index_set`` and solves F_i z_i = s.  When every
    entry is nonnegative it is an actual occurrence vector, so the bound
    computed at this index set holds with equality for it.
    """

    z: tuple[Number, ...]
    index_set: tuple[int, ...]
    nonnegative: bool

    def to_payload(self) -> dict:
        return {
            "z": [encode_number(x) for x in self.z],
            "index_set": list(self.index_set),
            "nonnegative": self.nonnegative,
        }


def sharpness_witness(
    fmat: MomentMatrix,
    index_set: Sequence[int],
    s: "MomentVector | Sequence[Number]",
    tolerance: float = DEFAULT_TOLERANCE,
) -> SharpnessWitness:
    """Solve F_i z*_i = s and embed the solution in the full position range."""
    index_set = _check_index_set(fmat, index_set)
    values = s.values if isinstance(s, MomentVector) else tuple(s)
    if len(values) != fmat.ell:
        raise ValueError(f"moment vector must have {fmat.ell} entries, got {len(values)}")
    exact = all_exact(values)
    system_rows = [[fmat.rows[k][i - 1] for i in index_set] for k in range(fmat.ell)]
    solution = _solve_linear(system_rows, values, exact=exact)
    z = [rational(0) if exact else 0.0] * fmat.positions
    for position, entry in zip(index_set, solution):
        z[position - 1] = entry
    if exact:
        nonnegative = all(entry >= 0 for entry in solution)
    else:
        nonnegative = all(float(entry) >= -tolerance for entry in solution)
    return SharpnessWitness(z=tuple(z), index_set=index_set, nonnegative=nonnegative)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of enumerating index sets for one side.

    ``best`` is None when no index set was feasible for the requested side,
    which callers should treat as "no bound of this shape exists here".
    ``feasible`` lists every index set whose coefficient vector was
    feasible for the side, in lexicographic order.
    """

    side: str
    best: Optional[BoundCertificate]
    feasible: tuple[tuple[int, ...], ...]


def search_index_sets(
    fmat: MomentMatrix,
    v: TargetVector,
    s: "MomentVector | Sequence[Number]",
    side: str,
    max_combinations: int = 1_000_000,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SearchResult:
    """Exhaustively enumerate index sets and keep the best feasible bound.

    Upper side keeps the smallest s . a over upper-feasible sets, lower
    side the largest over lower-feasible ones; ties go to the
    lexicographically first index set.  The enumeration is guarded by
    ``max_combinations``.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    total = math.comb(fmat.positions, fmat.ell)
    if total > max_combinations:
        raise ResourceLimitError(
            f"{total} index sets exceed the enumeration cap of {max_combinations}"
        )
    values = s.values if isinstance(s, MomentVector) else tuple(s)
    feasible: list[tuple[int, ...]] = []
    best_value: Optional[Number] = None
    best_set: Optional[tuple[int, ...]] = None
    best_coeffs: Optional[tuple[Number, ...]] = None
    for index_set in itertools.combinations(range(1, fmat.positions + 1), fmat.ell):
        a = solve_coefficients(fmat, index_set, v)
        feas = check_feasibility(fmat, a, v, tolerance)
        ok = feas.allows_upper if side == SIDE_UPPER else feas.allows_lower
        if not ok:
            continue
        feasible.append(index_set)
        value = bound_value(values, a)
        better = (
            best_value is None
            or (side == SIDE_UPPER and value < best_value)
            or (side == SIDE_LOWER and value > best_value)
        )
        if better:
            best_value, best_set, best_coeffs = value, index_set, a
    best = None
    if best_set is not None:
        witness = sharpness_witness(fmat, best_set, values, tolerance)
        best = BoundCertificate(
            value=best_value,
            clamped=clamp01(best_value),
            side=side,
            target=v.target,
            r=v.r,
            d=fmat.d,
            ell=fmat.ell,
            formula_id="search",
            coefficients=best_coeffs,
            index_set=best_set,
            witness=witness,
        )
    return SearchResult(side=side, best=best, feasible=tuple(feasible))


def witness_system(
    witness: SharpnessWitness, j: "IndexTuple | Iterable[int]", n: int, d: int
) -> EventSystem:
    """Realize a nonnegative witness as an event system with the same moments.

    Position u of the witness corresponds to occurrence level u+d-1; its
    mass z_u scales to z_u * C(u+d-1, d) on a single atom of that level
    containing all of j's events.  The first moment row forces those
    masses to sum to s_1 <= 1, and the leftover goes on the empty atom,
    which no moment on j sees (at d = 0 the empty atom is itself level 0,
    and the leftover there is exactly zero).  The resulting system has
    moment vector s at j, so the bound value is attained by an actual
    distribution.
    """
    if not witness.nonnegative:
        raise ValueError("only a nonnegative witness describes a distribution")
    j = IndexTuple.coerce(j)
    j.validate_for(n)
    if j.d != d:
        raise ValueError(f"index tuple has {j.d} entries, expected d={d}")
    exact = all_exact(witness.z)
    base = j.mask
    other_bits = [b for b in range(n) if not (base >> b) & 1]
    weights: dict[int, Number] = {}
    total: Number = rational(0) if exact else 0.0
    for position, z_u in enumerate(witness.z, start=1):
        if z_u == 0:
            continue
        extra = position - 1
        mask = base
        for bit in other_bits[:extra]:
            mask |= 1 << bit
        scaled = z_u * binomial(position + d - 1, d)
        weights[mask] = weights.get(mask, rational(0) if exact else 0.0) + scaled
        total = total + scaled
    leftover = (1 - total) if exact else 1.0 - float(total)
    if (leftover < 0) if exact else (float(leftover) < -DEFAULT_TOLERANCE):
        raise DegenerateMeasureError(
            f"witness mass exceeds one ({total}); the moments are not from a probability measure"
        )
    if leftover > 0:
        weights[0] = weights.get(0, rational(0) if exact else 0.0) + leftover
    return EventSystem(n=n, weights=weights)


def jordan_exact(fmat: MomentMatrix, v: TargetVector, s: "MomentVector | Sequence[Number]") -> Number:
    """Exact value of Z from the full-order moment system.

    Requires ell = n-d+1 so the moment matrix is square.  The matrix is
    unitriangular in its leading block, hence invertible, and both
    feasibility directions hold at the solution, so s . a is Z itself, not
    merely a bound.
    """
    if fmat.ell != fmat.positions:
        raise NotApplicableError(
            f"exact evaluation needs ell = n-d+1 = {fmat.positions}, got ell={fmat.ell}"
        )
    full = tuple(range(1, fmat.positions + 1))
    a = solve_coefficients(fmat, full, v)
    return bound_value(s, a)

"""Planning layer: regime classification, per-server computation fractions,
and the padded-pool searches used to pick a concrete construction.

Conventions used throughout the package:
  * servers are 1-based, data partitions are 0-based;
  * fractions of work are exact `fractions.Fraction` values, never floats;
  * a plan's `virtual_pool` is the size of the cyclic code the builder
    actually instantiates (n2 - gain for the cyclic families).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import ParameterError, TableAmbiguityError


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class TieredParams:
    """The (n1, n2, k, c) tuple of a two-phase code.

    n1 servers start at request time; when c of them finish, n2 - n1 more
    start; any k completions must recover the full gradient sum.
    """

    n1: int
    n2: int
    k: int
    c: int

    def __post_init__(self):
        for name in ("n1", "n2", "k", "c"):
            v = getattr(self, name)
            if not isinstance(v, int):
                raise ParameterError(f"{name} must be an integer, got {v!r}")
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got k={self.k}")
        if not (self.k <= self.n1 <= self.n2):
            raise ParameterError(
                f"need k <= n1 <= n2, got k={self.k}, n1={self.n1}, n2={self.n2}"
            )
        if not (1 <= self.c < self.k):
            raise ParameterError(f"need 1 <= c < k, got c={self.c}, k={self.k}")

    @property
    def baseline_fraction(self) -> Fraction:
        """Per-server work of the plain (n2, k) gradient code."""
        return Fraction(self.n2 - self.k + 1, self.n2)


class Regime(Enum):
    """Which analytical line of the per-server computation result applies."""

    EVEN_K_SINGLE = 1      # c=1, n1=k, n2=k+1, k even
    FRACTIONAL = 2         # c=1, n1 <= 2(k-1) < n2
    CYCLIC_HIGH = 3        # c=1, n1 >= 3(k-1)
    CYCLIC_MID = 4         # c=1, 2(k-1) < n1 < 3(k-1) <= n2
    FRACTIONAL_C = 5       # c>1, n1 <= 2(k-1) < n2
    CYCLIC_HIGH_C = 6      # c>1, n1 >= 2(k-1)+(k-c)
    CYCLIC_MID_C = 7       # c>1, 2(k-1) < n1 < 2(k-1)+(k-c) <= n2
    DEGENERATE = 0         # n1 = n2, or no construction improves on baseline


class Construction(Enum):
    """Which support-structure family instantiates a plan."""

    PLAIN = 0              # (n2, k) cyclic code, phase-two rows are its tail
    FRACTIONAL = 1         # two all-ones blocks on Q = 2(k-1) partitions
    CYCLIC_BASE = 2        # cyclic F + circulant-block B rows
    EVEN_K = 3             # n1=k stride windows, single added row
    CSTAR_TABLE = 4        # cyclic F + pattern-template B rows
    CYCLIC_GENERAL_C = 6   # cyclic F + shifted circulant B rows, any finished set


@dataclass(frozen=True)
class CodePlan:
    params: TieredParams
    regime: Regime
    construction: Construction
    q_partitions: int
    virtual_pool: int
    gain: int
    fraction: Fraction

    @property
    def construction_id(self) -> int:
        return self.construction.value


# ---------------------------------------------------------------------------
# C*-table lookup
# ---------------------------------------------------------------------------
#
# The table is parameterized by p = n1 - 3(k-1) >= 0 and p' = k - (p+4) >= 0.
# Rows are transcribed verbatim, with two curation notes:
#   * for even p, "p = 0" is its own standalone case; the remaining even rows
#     implicitly assume p >= 2 (otherwise p=0 would match several rows);
#   * a handful of (p, p') cells match rows of two different values; the
#     listed order (smallest value first) resolves them unless strict=True,
#     in which case a TableAmbiguityError is raised.


def _even_matches(p: int, pp: int) -> list[int]:
    if p == 0:
        return [2]
    out = []
    if pp > 3 * p:
        out.append(2)
    if 3 * p <= 2 * pp and pp <= 3 * p:
        out.append(3)
    r4 = (
        (pp % 3 == 1 and max(0, 3 * (p // 4) - 1) < pp and 2 * pp < 3 * p)
        or (pp % 3 in (0, 2) and 2 < pp <= ceil_div(p - 1, 2))
        or (pp % 3 in (0, 2) and 3 * ceil_div(p, 4) - 1 < pp and 2 * pp < 3 * p)
    )
    if r4:
        out.append(4)
    if pp % 3 == 0 and ceil_div(p - 1, 2) < pp and 2 * pp < 3 * p:
        out.append(5)
    r6 = (
        (pp % 3 == 2 and ceil_div(p - 1, 2) < pp and 2 * pp < 3 * p)
        or (pp % 3 == 0 and 0 < pp < max(0, 3 * (p // 4) - 1))
    )
    if r6:
        out.append(6)
    return out


def _odd_matches(p: int, pp: int) -> list[int]:
    out = []
    if 2 * pp > 3 * (p + 1):
        out.append(2)
    if 3 * (p - 1) <= 2 * pp <= 3 * (p + 1):
        out.append(3)
    r4 = (
        (pp % 3 == 1 and 3 * ((p - 1) // 4) < pp and 2 * pp <= 3 * (p - 1))
        or (
            pp % 3 == 2
            and 2 <= pp <= ceil_div(3 * (p - 1), 2)
            and pp != 3 * ((p - 1) // 4) - 1
        )
        or (
            pp % 3 == 2
            and pp % 8 == 7
            and 4 * pp > 3 * (p - 7)
            and 2 * pp < 3 * (p - 1)
        )
        or (
            pp % 3 == 2
            and pp % 8 != 7
            and pp > 6 * (p // 8) - 3
            and 2 * pp < 3 * (p - 1)
        )
    )
    if r4:
        out.append(4)
    r5 = (
        (pp % 3 == 1 and 3 * ceil_div(p - 2, 6) < pp <= 3 * ((p - 1) // 4))
        or (
            pp % 3 == 2
            and 2 <= pp <= ceil_div(3 * (p - 1), 2)
            and pp == 3 * ((p - 1) // 4) - 1
        )
        or (pp % 3 == 0 and pp % 8 == 7 and 0 < pp and 4 * pp <= 3 * (p - 7))
        or (0 < pp <= 6 * (p // 8) - 3)
    )
    if r5:
        out.append(5)
    if pp % 3 == 1 and 0 < pp <= 3 * ceil_div(p - 2, 6):
        out.append(6)
    return out


def cstar_matches(p: int, pp: int) -> list[int]:
    """All table values matching (p, p'), in listed (ascending) order."""
    if p < 0 or pp < 0:
        raise ParameterError(f"need p >= 0 and p' >= 0, got p={p}, p'={pp}")
    return _even_matches(p, pp) if p % 2 == 0 else _odd_matches(p, pp)


def cstar_lookup(n1: int, k: int, *, strict: bool = False) -> int:
    """Number of enhanced phase-two rows supportable at load n1-k+1.

    Returns 0 for inputs not covered by the table.  With strict=True an
    input matched by rows of two different values raises instead of
    resolving to the first listed value.
    """
    p = n1 - 3 * (k - 1)
    if p < 0:
        raise ParameterError(f"need n1 >= 3(k-1), got n1={n1}, k={k}")
    pp = k - (p + 4)
    if pp < 0:
        return 0
    vals = cstar_matches(p, pp)
    if not vals:
        return 0
    if len(vals) > 1 and strict:
        raise TableAmbiguityError(
            f"C* table rows {vals} all match n1={n1}, k={k} (p={p}, p'={pp})"
        )
    return vals[0]


def c_plain(pool: int, k: int) -> int:
    """Phase-two rows supportable from a pool-sized cyclic code, c = 1."""
    return (pool - k + 1) // (k - 1)


def c_general(pool: int, k: int, c: int) -> int:
    """Phase-two rows supportable from a pool-sized cyclic code, c > 1."""
    return (pool - k + c) // (k - 1)


# ---------------------------------------------------------------------------
# Planner
# ---------------------------------------------------------------------------


def _degenerate_plan(params: TieredParams) -> CodePlan:
    return CodePlan(
        params=params,
        regime=Regime.DEGENERATE,
        construction=Construction.PLAIN,
        q_partitions=params.n2,
        virtual_pool=params.n2,
        gain=0,
        fraction=params.baseline_fraction,
    )


def _cstar_routes(n2: int, k: int, range_lower: int):
    """Candidates from the table search over [max(range_lower, n2-6), n2-1].

    Returns (n_plus route, n_min route) as (gain, pool, construction) or None.
    Routes the table cannot actually serve (fewer rows than n2 - pool needed)
    are dropped: keeping them would claim a fraction no support structure
    attains.
    """
    lo = max(range_lower, n2 - 6)
    hi = n2 - 1
    if lo > hi:
        return None, None
    values = {}
    for n in range(lo, hi + 1):
        if n < 3 * (k - 1):
            continue
        values[n] = cstar_lookup(n, k)
    plus = None
    best = 0
    for n in sorted(values):
        if values[n] > best:
            best = values[n]
            plus = n
    n_plus_route = None
    if plus is not None and best >= 2 and n2 <= plus + best:
        n_plus_route = (min(n2 - plus, best), plus)
    n_min_route = None
    for n in sorted(values):
        if values[n] >= 2 and n2 <= n + values[n]:
            n_min_route = (n2 - n, n)
            break
    return n_plus_route, n_min_route


def plan_general_c1(params: TieredParams) -> CodePlan:
    """Padded-pool plan for c = 1 with n1 above the fractional range."""
    n1, n2, k, c = params.n1, params.n2, params.k, params.c
    if c != 1:
        raise ParameterError(f"this planner requires c=1, got c={c}")
    if n1 <= 2 * (k - 1):
        raise ParameterError(f"need n1 > 2(k-1), got n1={n1}, k={k}")
    if n2 < 3 * (k - 1):
        raise ParameterError(f"need n2 >= 3(k-1), got n2={n2}, k={k}")

    regime = Regime.CYCLIC_HIGH if n1 >= 3 * (k - 1) else Regime.CYCLIC_MID
    p_star = ceil_div(k * (n2 - n1) - (n2 - k + 1), k)
    if regime is Regime.CYCLIC_MID:
        p_star = max(p_star, 3 * (k - 1) - n1)
    p_star = max(p_star, 0)
    pool1 = n1 + p_star
    g1 = max(0, min(n2 - pool1, c_plain(pool1, k)))

    range_lower = n1 if regime is Regime.CYCLIC_HIGH else 3 * (k - 1)
    plus_route, min_route = _cstar_routes(n2, k, range_lower)

    candidates = [(g1, pool1, Construction.CYCLIC_BASE)]
    if plus_route is not None:
        candidates.append((plus_route[0], plus_route[1], Construction.CSTAR_TABLE))
    if min_route is not None:
        candidates.append((min_route[0], min_route[1], Construction.CSTAR_TABLE))

    gain, pool, constr = candidates[0]
    for g, v, cc in candidates[1:]:
        if g > gain:
            gain, pool, constr = g, v, cc
    if gain <= 0:
        return _degenerate_plan(params)
    return CodePlan(
        params=params,
        regime=regime,
        construction=constr,
        q_partitions=n2 - gain,
        virtual_pool=n2 - gain,
        gain=gain,
        fraction=Fraction(n2 - k + 1 - gain, n2 - gain),
    )


def plan_general_cgt1(params: TieredParams) -> CodePlan:
    """Padded-pool plan for c > 1 with n1 above the fractional range."""
    n1, n2, k, c = params.n1, params.n2, params.k, params.c
    if c <= 1:
        raise ParameterError(f"this planner requires c > 1, got c={c}")
    if n1 <= 2 * (k - 1):
        raise ParameterError(f"need n1 > 2(k-1), got n1={n1}, k={k}")
    floor = 2 * (k - 1) + (k - c)
    if n2 < floor:
        raise ParameterError(f"need n2 >= 2(k-1)+(k-c)={floor}, got n2={n2}")

    regime = Regime.CYCLIC_HIGH_C if n1 >= floor else Regime.CYCLIC_MID_C
    p_star = ceil_div(k * (n2 - n1) - (n2 - k + c), k)
    if regime is Regime.CYCLIC_MID_C:
        p_star = max(p_star, floor - n1)
    p_star = max(p_star, 0)
    pool = n1 + p_star
    gain = max(0, min(n2 - pool, c_general(pool, k, c)))
    if gain <= 0:
        return _degenerate_plan(params)
    return CodePlan(
        params=params,
        regime=regime,
        construction=Construction.CYCLIC_GENERAL_C,
        q_partitions=n2 - gain,
        virtual_pool=n2 - gain,
        gain=gain,
        fraction=Fraction(n2 - k + 1 - gain, n2 - gain),
    )


def plan(params: TieredParams) -> CodePlan:
    """Classify params into a regime and produce the best buildable plan."""
    n1, n2, k, c = params.n1, params.n2, params.k, params.c
    if n1 == n2:
        return _degenerate_plan(params)
    if c == 1:
        if n1 == k and n2 == k + 1 and k % 2 == 0:
            return CodePlan(
                params=params,
                regime=Regime.EVEN_K_SINGLE,
                construction=Construction.EVEN_K,
                q_partitions=k * k // 2,
                virtual_pool=n1,
                gain=0,
                fraction=Fraction(2 * (k - 1), k * k),
            )
        if n1 <= 2 * (k - 1) and n2 > 2 * (k - 1):
            return CodePlan(
                params=params,
                regime=Regime.FRACTIONAL,
                construction=Construction.FRACTIONAL,
                q_partitions=2 * (k - 1),
                virtual_pool=2 * (k - 1),
                gain=0,
                fraction=Fraction(1, 2),
            )
        if n1 > 2 * (k - 1) and n2 >= 3 * (k - 1):
            return plan_general_c1(params)
        return _degenerate_plan(params)
    # c > 1
    if n1 <= 2 * (k - 1) and n2 > 2 * (k - 1):
        return CodePlan(
            params=params,
            regime=Regime.FRACTIONAL_C,
            construction=Construction.FRACTIONAL,
            q_partitions=2 * (k - 1),
            virtual_pool=2 * (k - 1),
            gain=0,
            fraction=Fraction(1, 2),
        )
    if n1 > 2 * (k - 1) and n2 >= 2 * (k - 1) + (k - c):
        return plan_general_cgt1(params)
    return _degenerate_plan(params)


def computation_fraction(params: TieredParams) -> Fraction:
    """Per-server computation fraction achieved by the planned code."""
    return plan(params).fraction

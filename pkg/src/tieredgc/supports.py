"""Boolean support structures for phase-one (F) and phase-two (B_M) rows.

Indexing convention, used everywhere: servers are 1-based, partition columns
are 0-based.  Builders return `TieredSupport` objects whose phase-two rows
are materialized per finished set M on demand (rotation for c = 1, direct
regeneration for c > 1, a membership rule for the fractional family).
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Iterator

import numpy as np

from .codeplan import (
    CodePlan,
    Construction,
    TieredParams,
    c_general,
    c_plain,
    cstar_lookup,
)
from .errors import ConstructionError, ParameterError


class SupportMatrix:
    """Immutable rows-by-partitions boolean matrix."""

    def __init__(self, bits: np.ndarray):
        bits = np.ascontiguousarray(np.asarray(bits, dtype=bool))
        if bits.ndim != 2:
            raise ParameterError(f"support matrix must be 2-D, got shape {bits.shape}")
        if bits.shape[0] > 0 and not bits.any(axis=1).all():
            empty = int(np.flatnonzero(~bits.any(axis=1))[0]) + 1
            raise ConstructionError(f"support row {empty} is empty")
        bits.setflags(write=False)
        self.bits = bits

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def q(self) -> int:
        return self.bits.shape[1]

    @property
    def row_supports(self) -> list[tuple[int, ...]]:
        return [tuple(np.flatnonzero(r)) for r in self.bits]

    def row_support(self, i: int) -> tuple[int, ...]:
        """Support of 1-based row i."""
        return tuple(np.flatnonzero(self.bits[i - 1]))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SupportMatrix)
            and self.bits.shape == other.bits.shape
            and bool((self.bits == other.bits).all())
        )

    def __repr__(self) -> str:
        return f"SupportMatrix({self.rows}x{self.q})"

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.q}"]
        for r in self.bits:
            lines.append("".join("1" if v else "0" for v in r))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SupportMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParameterError("empty support dump")
        rows, q = (int(x) for x in lines[0].split())
        body = lines[1:]
        if len(body) != rows or any(len(ln) != q for ln in body):
            raise ParameterError("support dump shape mismatch")
        bits = np.array([[ch == "1" for ch in ln] for ln in body], dtype=bool)
        return cls(bits.reshape(rows, q))


def rotate_support(sm: SupportMatrix, shift: int) -> SupportMatrix:
    """Shift every column index right by `shift` (mod q)."""
    return SupportMatrix(np.roll(sm.bits, shift, axis=1))


class TieredSupport:
    """F plus a per-finished-set generator of B_M supports."""

    def __init__(
        self,
        f_support: SupportMatrix,
        params: TieredParams,
        kind: Construction,
        pool: int,
        b_builder: Callable[[tuple[int, ...]], SupportMatrix],
        b_rows: int,
        default_m: tuple[int, ...] | None = None,
    ):
        if f_support.rows != params.n1:
            raise ConstructionError(
                f"F has {f_support.rows} rows, expected n1={params.n1}"
            )
        self.f_support = f_support
        self.params = params
        self.kind = kind
        self.pool = pool
        self.b_rows = b_rows
        self._b_builder = b_builder
        self.default_m = default_m or tuple(range(1, params.c + 1))
        self._cache: dict[tuple[int, ...], SupportMatrix] = {}

    @property
    def q(self) -> int:
        return self.f_support.q

    def normalize_m(self, m_set: Iterable[int]) -> tuple[int, ...]:
        m = tuple(sorted(set(int(x) for x in m_set)))
        if len(m) != self.params.c:
            raise ParameterError(
                f"finished set {m} has size {len(m)}, expected c={self.params.c}"
            )
        if m and (m[0] < 1 or m[-1] > self.params.n1):
            raise ParameterError(f"finished set {m} not within [1, {self.params.n1}]")
        return m

    def b_support_for(self, m_set: Iterable[int]) -> SupportMatrix:
        m = self.normalize_m(m_set)
        if m not in self._cache:
            sm = self._b_builder(m)
            if sm.rows != self.b_rows or sm.q != self.q:
                raise ConstructionError(
                    f"B_M builder returned {sm.rows}x{sm.q}, "
                    f"expected {self.b_rows}x{self.q}"
                )
            self._cache[m] = sm
        return self._cache[m]

    def b_support(self) -> SupportMatrix:
        return self.b_support_for(self.default_m)

    def finished_sets(self) -> Iterator[tuple[int, ...]]:
        return itertools.combinations(range(1, self.params.n1 + 1), self.params.c)


# ---------------------------------------------------------------------------
# Base (single-phase) support families
# ---------------------------------------------------------------------------


def cyclic_support(n: int, k: int) -> SupportMatrix:
    """Row i supported on the cyclic window [i-1, i+(n-k-1)] mod n."""
    if k < 1 or n < k:
        raise ParameterError(f"need n >= k >= 1, got n={n}, k={k}")
    width = n - k + 1
    bits = np.zeros((n, n), dtype=bool)
    for i in range(n):
        bits[i, (i + np.arange(width)) % n] = True
    return SupportMatrix(bits)


def fractional_support(n2: int, k: int) -> SupportMatrix:
    """Block-diagonal all-ones blocks of size (n2-k+1); needs (n2-k+1) | n2."""
    if k < 1 or n2 < k:
        raise ParameterError(f"need n2 >= k >= 1, got n2={n2}, k={k}")
    b = n2 - k + 1
    if n2 % b != 0:
        raise ParameterError(f"n2-k+1={b} does not divide n2={n2}")
    bits = np.zeros((n2, n2), dtype=bool)
    for j in range(n2 // b):
        bits[j * b : (j + 1) * b, j * b : (j + 1) * b] = True
    return SupportMatrix(bits)


# ---------------------------------------------------------------------------
# Tiered constructions
# ---------------------------------------------------------------------------


def tiered_fractional(params: TieredParams) -> TieredSupport:
    """Two all-ones blocks over Q = 2(k-1); phase-two rows cover the half
    not already guaranteed by the finished set."""
    n1, n2, k = params.n1, params.n2, params.k
    if not (k <= n1 <= 2 * (k - 1)):
        raise ParameterError(f"need k <= n1 <= 2(k-1), got n1={n1}, k={k}")
    if n2 <= 2 * (k - 1):
        raise ParameterError(f"need n2 > 2(k-1), got n2={n2}, k={k}")
    q = 2 * (k - 1)
    half = k - 1
    n_top = (n1 + 1) // 2
    bits = np.zeros((n1, q), dtype=bool)
    bits[:n_top, :half] = True
    bits[n_top:, half:] = True
    f_sm = SupportMatrix(bits)

    def builder(m: tuple[int, ...]) -> SupportMatrix:
        rows = np.zeros((n2 - n1, q), dtype=bool)
        if all(s <= n_top for s in m):
            rows[:, half:] = True
        else:
            rows[:, :half] = True
        return SupportMatrix(rows)

    return TieredSupport(
        f_sm, params, Construction.FRACTIONAL, pool=q, b_builder=builder,
        b_rows=n2 - n1,
    )


def _consecutive_fill(quota: int, run_len: int) -> list[int]:
    """Pick `quota` coordinates from [0, run_len-1]: even positions first,
    then the highest unused odd positions downward."""
    evens = list(range(0, run_len, 2))
    odds = list(range(run_len - 1 if (run_len - 1) % 2 == 1 else run_len - 2, 0, -2))
    picks = (evens + odds)[:quota]
    if len(picks) < quota:
        raise ConstructionError(
            f"cannot pick {quota} coordinates from a run of {run_len}"
        )
    return sorted(picks)


def _circulant_block_rows(
    n1: int, k: int, n_rows: int, tail_width: int, zero_offset: int
) -> np.ndarray:
    """Rows with an all-ones tail and k-1 square circulant blocks in front.

    Block j occupies columns [(j-1)*n_rows, j*n_rows); row i carries one zero
    per block at position (i + zero_offset) mod n_rows.
    """
    bits = np.ones((n_rows, n1), dtype=bool)
    for i in range(1, n_rows + 1):
        z = (i + zero_offset) % n_rows
        for j in range(k - 1):
            bits[i - 1, j * n_rows + z] = False
    if (k - 1) * n_rows + tail_width != n1:
        raise ConstructionError("circulant blocks and tail do not tile the row")
    return bits


def _cyclic_base_rows(n1: int, k: int) -> np.ndarray:
    """Canonical phase-two rows of the cyclic-base construction (server 1
    finished): all-ones tail of width l+k-1, one zero per circulant block."""
    cc = c_plain(n1, k)
    l = (n1 - k + 1) - (k - 1) * cc
    if cc == 1:
        # Single row: the k-1 tail coordinates plus a consecutive-coordinate
        # subset of the finished server's window.
        row = np.zeros((1, n1), dtype=bool)
        row[0, n1 - k + 1 :] = True
        quota = n1 - 2 * (k - 1)
        for c in _consecutive_fill(quota, n1 - k + 1):
            row[0, c] = True
        return row
    return _circulant_block_rows(n1, k, cc, tail_width=l + k - 1, zero_offset=0)


def tiered_cyclic_base(n1: int, k: int) -> TieredSupport:
    """Cyclic F over Q = n1 plus floor((n1-k+1)/(k-1)) phase-two rows,
    for n2 = n1 + that count; other finished servers obtained by rotation."""
    if n1 < 3 * (k - 1):
        raise ParameterError(f"need n1 >= 3(k-1), got n1={n1}, k={k}")
    cc = c_plain(n1, k)
    params = TieredParams(n1=n1, n2=n1 + cc, k=k, c=1)
    f_sm = cyclic_support(n1, k)
    canonical = SupportMatrix(_cyclic_base_rows(n1, k))

    def builder(m: tuple[int, ...]) -> SupportMatrix:
        return rotate_support(canonical, m[0] - 1)

    return TieredSupport(
        f_sm, params, Construction.CYCLIC_BASE, pool=n1, b_builder=builder,
        b_rows=cc, default_m=(1,),
    )


def tiered_n1k_even(k: int, m: int = 1) -> TieredSupport:
    """Stride-k/2 windows of length k-1 over Q = k^2/2 for n1 = k, n2 = k+1;
    the single added row carries the coordinate unique to each unfinished
    server."""
    if k < 2 or k % 2 != 0:
        raise ParameterError(f"need even k >= 2, got k={k}")
    if not (1 <= m <= k):
        raise ParameterError(f"finished server m={m} not in [1, {k}]")
    q = k * k // 2
    t = k - 1
    stride = k // 2
    bits = np.zeros((k, q), dtype=bool)
    for i in range(1, k + 1):
        bits[i - 1, ((i - 1) * stride + np.arange(t)) % q] = True
    f_sm = SupportMatrix(bits)
    params = TieredParams(n1=k, n2=k + 1, k=k, c=1)

    def builder(mm: tuple[int, ...]) -> SupportMatrix:
        row = np.zeros((1, q), dtype=bool)
        for i in range(1, k + 1):
            if i != mm[0]:
                row[0, (i * stride - 1) % q] = True
        return SupportMatrix(row)

    return TieredSupport(
        f_sm, params, Construction.EVEN_K, pool=k, b_builder=builder,
        b_rows=1, default_m=(m,),
    )


# ---------------------------------------------------------------------------
# Pattern templates for the C*-table construction
# ---------------------------------------------------------------------------

_ATOMS = {
    "0": (False,),
    "*": (True,),
    "0*": (False, True),
    "*0": (True, False),
    "0**": (False, True, True),
    "**0": (True, True, False),
}


def expand_pattern(tokens, expected_len: int | None = None) -> np.ndarray:
    """Expand [(atom, count), ...] into a boolean row; 0 -> False, * -> True."""
    out: list[bool] = []
    for atom, count in tokens:
        if atom not in _ATOMS:
            raise ConstructionError(f"unknown pattern atom {atom!r}")
        count = int(count)
        if count < 0:
            raise ConstructionError(f"negative repeat count {count} for {atom!r}")
        out.extend(_ATOMS[atom] * count)
    row = np.array(out, dtype=bool)
    if expected_len is not None and row.size != expected_len:
        raise ConstructionError(
            f"pattern expands to length {row.size}, expected {expected_len}"
        )
    return row


# Row shapes shared by the template table.  Counts are expressions over
# p (pool offset), y = k-3-p (the narrow alternating width), k, and u.
_ROW1 = (("0**", "p+1"), ("0*", "y"), ("0", "1"), ("*", "k-1"))
_ROW2 = (("0", "1"), ("*0", "y"), ("**0", "p+1"), ("*", "k-1"))
_ROW_SPLIT = (
    ("*", "1"), ("0*", "(y+1)//2+1"), ("0**", "p-1"), ("0*", "y//2+2"),
    ("*", "k-1"),
)
_ROW_WIDE_A = (("0**", "p"), ("0*", "y+2"), ("*", "k-1"))
_ROW_WIDE_B = (("*0", "y+2"), ("**0", "p"), ("*", "k-1"))
_ROW_EVEN_U1 = (
    ("0", "1"), ("*", "1"), ("**0", "p//2-1"), ("*0", "y+1"), ("*", "1"),
    ("0**", "p//2"), ("*", "1"), ("0", "1"), ("*", "k-1"),
)
_ROW_EVEN_U2 = (
    ("0", "1"), ("*", "1"), ("**0", "p//2"), ("*", "1"), ("0*", "y+1"),
    ("0**", "p//2-1"), ("*", "1"), ("0", "1"), ("*", "k-1"),
)
_ROW_ODD0_A = (
    ("0", "1"), ("*", "1"), ("**0", "p-1"), ("*0", "y+2"), ("*", "1"),
    ("*", "k-1"),
)
_ROW_ODD0_B = (
    ("*", "1"), ("0*", "y+2"), ("0**", "p-1"), ("*", "1"), ("0", "1"),
    ("*", "k-1"),
)
_ROW_ODD_HALF = (
    ("0", "1"), ("*", "1"), ("**0", "(p-1)//2"), ("*0", "y+1"), ("*", "1"),
    ("0**", "(p-1)//2"), ("*", "1"), ("0", "1"), ("*", "k-1"),
)
_ROW_U_A = (
    ("0", "1"), ("*", "1"), ("**0", "u"), ("*0", "y+1"), ("*", "1"),
    ("0**", "p-1-u"), ("*", "1"), ("0", "1"), ("*", "k-1"),
)
_ROW_U_B = (
    ("0", "1"), ("*", "1"), ("**0", "p-1-u"), ("*0", "y+1"), ("*", "1"),
    ("0**", "u"), ("*", "1"), ("0", "1"), ("*", "k-1"),
)

# (cstar, parity, p'-class) -> row list.  Classes: "any", "mod12" (p' = 1 or
# 2 mod 3), "mod0" (p' = 0 mod 3).
_TEMPLATES = {
    (3, "even", "any"): (_ROW1, _ROW2, _ROW_SPLIT),
    (3, "odd", "any"): (_ROW1, _ROW2, _ROW_SPLIT),
    (4, "even", "mod12"): (_ROW1, _ROW2, _ROW_WIDE_A, _ROW_WIDE_B),
    (4, "odd", "mod12"): (_ROW1, _ROW2, _ROW_WIDE_A, _ROW_WIDE_B),
    (4, "even", "mod0"): (_ROW1, _ROW2, _ROW_EVEN_U1, _ROW_EVEN_U2),
    (4, "odd", "mod0"): (_ROW1, _ROW2, _ROW_ODD0_A, _ROW_ODD0_B),
    (5, "even", "any"): (_ROW1, _ROW2, _ROW_EVEN_U1, _ROW_EVEN_U2, _ROW_SPLIT),
    (5, "odd", "mod12"): (_ROW1, _ROW2, _ROW_WIDE_A, _ROW_WIDE_B, _ROW_ODD_HALF),
    (5, "odd", "mod0"): (_ROW1, _ROW2, _ROW_SPLIT, _ROW_U_A, _ROW_U_B),
    (6, "even", "any"): (
        _ROW1, _ROW2, _ROW_WIDE_A, _ROW_WIDE_B, _ROW_EVEN_U1, _ROW_EVEN_U2,
    ),
    (6, "odd", "any"): (_ROW1, _ROW2, _ROW_WIDE_A, _ROW_WIDE_B, _ROW_U_A, _ROW_U_B),
}


def _u_value(cstar: int, pp: int) -> int | None:
    table = {
        5: {1: lambda v: (v - 7) // 3, 3: lambda v: (v - 3) // 3,
            5: lambda v: (v - 5) // 3},
        6: {1: lambda v: (v + 2) // 3, 3: lambda v: (v - 3) // 3,
            5: lambda v: (v - 2) // 3},
    }
    fn = table.get(cstar, {}).get(pp % 6)
    return None if fn is None else fn(pp)


def _count_env_eval(expr: str, env: dict[str, int]) -> int:
    return int(eval(expr, {"__builtins__": {}}, env))  # noqa: S307 - fixed exprs


def _template_rows(n1: int, k: int, cstar: int) -> np.ndarray:
    p = n1 - 3 * (k - 1)
    pp = k - (p + 4)
    y = k - 3 - p
    parity = "even" if p % 2 == 0 else "odd"
    if pp % 3 == 0:
        cls_keys = ("mod0", "any")
    else:
        cls_keys = ("mod12", "any")
    rows = None
    for ck in cls_keys:
        rows = _TEMPLATES.get((cstar, parity, ck))
        if rows is not None:
            break
    if rows is None:
        raise ConstructionError(
            f"no pattern template for C*={cstar}, p={p} ({parity}), p'={pp}"
        )
    if (cstar, parity) == (4, "even") and pp % 3 == 0:
        # The template for this cell is only stated for p' in [3, ceil((p-1)/2)].
        if not (3 <= pp <= -((1 - p) // 2)):
            raise ConstructionError(
                f"C*=4 even-p template undefined for p'={pp} (p={p})"
            )
    env = {"p": p, "y": y, "k": k}
    needs_u = any(
        expr in ("u", "p-1-u") for row in rows for _, expr in row
    )
    if needs_u:
        u = _u_value(cstar, pp)
        if u is None or u < 0 or p - 1 - u < 0:
            raise ConstructionError(
                f"template shift undefined for C*={cstar}, p={p}, p'={pp} (u={u})"
            )
        env["u"] = u
    out = np.zeros((len(rows), n1), dtype=bool)
    for r, row in enumerate(rows):
        tokens = [(atom, _count_env_eval(expr, env)) for atom, expr in row]
        out[r] = expand_pattern(tokens, expected_len=n1)
        zeros = n1 - int(out[r].sum())
        if zeros != k - 1:
            raise ConstructionError(
                f"template row {r + 1} for C*={cstar}, p={p}, p'={pp} has "
                f"{zeros} zeros, expected {k - 1}"
            )
    return out


def tiered_cstar(n1: int, k: int) -> TieredSupport:
    """Cyclic F plus C*-table phase-two rows for n2 = n1 + C*."""
    if k < 4:
        raise ParameterError(f"need k >= 4, got k={k}")
    p = n1 - 3 * (k - 1)
    if not (0 <= p <= k - 4):
        raise ParameterError(
            f"need n1 in [3(k-1), 3(k-1)+(k-4)], got n1={n1}, k={k}"
        )
    cs = cstar_lookup(n1, k)
    if cs < 2:
        raise ParameterError(f"no enhanced rows tabulated for n1={n1}, k={k}")
    canonical = (
        SupportMatrix(_cyclic_base_rows(n1, k))
        if cs == 2
        else SupportMatrix(_template_rows(n1, k, cs))
    )
    params = TieredParams(n1=n1, n2=n1 + cs, k=k, c=1)
    f_sm = cyclic_support(n1, k)

    def builder(m: tuple[int, ...]) -> SupportMatrix:
        return rotate_support(canonical, m[0] - 1)

    return TieredSupport(
        f_sm, params, Construction.CSTAR_TABLE, pool=n1, b_builder=builder,
        b_rows=cs, default_m=(1,),
    )


# ---------------------------------------------------------------------------
# General-c construction
# ---------------------------------------------------------------------------


def _gap_run(n1: int, comp: np.ndarray) -> int:
    """Start of the cyclic run formed by the uncovered coordinates."""
    comp_set = set(int(x) for x in comp)
    starts = [x for x in comp_set if (x - 1) % n1 not in comp_set]
    if len(starts) != 1:
        raise ConstructionError(
            f"uncovered coordinates {sorted(comp_set)} do not form one cyclic run"
        )
    return starts[0]


def _c_general_rows(n1: int, k: int, c: int, m: tuple[int, ...]) -> np.ndarray:
    cc = c_general(n1, k, c)
    l = (n1 - k + c) - (k - 1) * cc
    f_bits = cyclic_support(n1, k).bits
    covered = f_bits[[s - 1 for s in m]].any(axis=0)
    comp = np.flatnonzero(~covered)
    g = comp.size
    if g > k - c:
        raise ConstructionError(f"uncovered gap of {g} exceeds k-c={k - c}")
    t = _gap_run(n1, comp) if g > 0 else 0
    if cc == 1:
        width = l + k - c
        row = np.zeros((1, n1), dtype=bool)
        row[0, (t - l + np.arange(width)) % n1] = True
        quota = (n1 - k + 1) - width
        avail = [j for j in range(n1) if not row[0, j]]
        # Fill from the remaining arc, even offsets first (same rule as c=1).
        for off in _consecutive_fill(quota, len(avail)):
            row[0, avail[off]] = True
        return row
    shifted = _circulant_block_rows(
        n1, k, cc, tail_width=l + k - c, zero_offset=-1
    )
    # shifted[] has the mandatory block at the tail; shift columns left by y,
    # where y is the right shift that sent [t-l, t+k-c-1] to the tail.
    y = (n1 - (t + k - c)) % n1
    return np.roll(shifted, -y, axis=1)


def tiered_c_general(
    n1: int, k: int, c: int, finished: Iterable[int] | None = None
) -> TieredSupport:
    """Cyclic F plus floor((n1-k+c)/(k-1)) phase-two rows for any finished
    set of size c > 1; mandatory coordinates are the k-c window covering the
    gap the finished servers leave, extended left by the slack l."""
    if c <= 1:
        raise ParameterError(f"need c > 1, got c={c}")
    if k <= c:
        raise ParameterError(f"need c < k, got c={c}, k={k}")
    if n1 < 2 * (k - 1) + (k - c):
        raise ParameterError(
            f"need n1 >= 2(k-1)+(k-c)={2 * (k - 1) + (k - c)}, got n1={n1}"
        )
    cc = c_general(n1, k, c)
    params = TieredParams(n1=n1, n2=n1 + cc, k=k, c=c)
    f_sm = cyclic_support(n1, k)

    def builder(m: tuple[int, ...]) -> SupportMatrix:
        return SupportMatrix(_c_general_rows(n1, k, c, m))

    default = tuple(sorted(set(finished))) if finished is not None else None
    ts = TieredSupport(
        f_sm, params, Construction.CYCLIC_GENERAL_C, pool=n1,
        b_builder=builder, b_rows=cc, default_m=default,
    )
    if default is not None:
        ts.normalize_m(default)
    return ts


# ---------------------------------------------------------------------------
# Adapters
# ---------------------------------------------------------------------------


def truncate_b(ts: TieredSupport, rows_needed: int) -> TieredSupport:
    """Keep the first rows_needed rows of every B_M (deterministic prefix)."""
    if rows_needed < 1:
        raise ParameterError(f"rows_needed must be >= 1, got {rows_needed}")
    if rows_needed > ts.b_rows:
        raise ParameterError(
            f"rows_needed={rows_needed} exceeds available {ts.b_rows}"
        )
    p = ts.params
    params = TieredParams(n1=p.n1, n2=p.n1 + rows_needed, k=p.k, c=p.c)

    def builder(m: tuple[int, ...]) -> SupportMatrix:
        return SupportMatrix(ts.b_support_for(m).bits[:rows_needed])

    return TieredSupport(
        ts.f_support, params, ts.kind, pool=ts.pool, b_builder=builder,
        b_rows=rows_needed, default_m=ts.default_m,
    )


def relabel_for_finished(ts: TieredSupport, actual: Iterable[int]) -> TieredSupport:
    """Re-point a canonical support at a different finished set.

    Builders are already finished-set aware (rotation for c = 1 cyclic
    families, regeneration for c > 1, block membership for fractional), so
    this validates the set and pins it as the default.
    """
    m = ts.normalize_m(actual)
    return TieredSupport(
        ts.f_support, ts.params, ts.kind, pool=ts.pool,
        b_builder=ts._b_builder, b_rows=ts.b_rows, default_m=m,
    )


def build_support(cp: CodePlan) -> TieredSupport:
    """Materialize the physical support structure a plan describes.

    For padded plans (virtual pool above n1) the phase-two rows are the
    unlaunched pool rows followed by the construction's own rows, truncated
    to the n2 - pool actually needed.
    """
    p = cp.params
    n1, n2, k, c = p.n1, p.n2, p.k, p.c
    if cp.construction is Construction.PLAIN:
        full = cyclic_support(n2, k)
        f_sm = SupportMatrix(full.bits[:n1])
        rest = full.bits[n1:]

        def builder(m: tuple[int, ...]) -> SupportMatrix:
            return SupportMatrix(rest)

        return TieredSupport(
            f_sm, p, Construction.PLAIN, pool=n2, b_builder=builder,
            b_rows=n2 - n1,
        )
    if cp.construction is Construction.FRACTIONAL:
        return tiered_fractional(p)
    if cp.construction is Construction.EVEN_K:
        return tiered_n1k_even(k)

    pool = cp.virtual_pool
    if cp.construction is Construction.CYCLIC_BASE:
        canonical = tiered_cyclic_base(pool, k)
    elif cp.construction is Construction.CSTAR_TABLE:
        canonical = tiered_cstar(pool, k)
    elif cp.construction is Construction.CYCLIC_GENERAL_C:
        canonical = tiered_c_general(pool, k, c)
    else:  # pragma: no cover - exhaustive over the enum
        raise ConstructionError(f"unknown construction {cp.construction}")
    from_b = n2 - pool
    if from_b < 1 or from_b > canonical.b_rows:
        raise ConstructionError(
            f"plan needs {from_b} construction rows, pool {pool} offers "
            f"{canonical.b_rows}"
        )
    if pool == n1:
        return truncate_b(canonical, from_b)
    full = cyclic_support(pool, k)
    f_sm = SupportMatrix(full.bits[:n1])
    leftover = full.bits[n1:pool]

    def builder(m: tuple[int, ...]) -> SupportMatrix:
        extra = canonical.b_support_for(m).bits[:from_b]
        return SupportMatrix(np.vstack([leftover, extra]))

    return TieredSupport(
        f_sm, p, cp.construction, pool=pool, b_builder=builder,
        b_rows=n2 - n1,
    )

"""Real-valued instantiation of support structures and straggler decoding.

Rows are solved against a shared random parity matrix H: each row is a
nullspace element of H restricted to the row's support, scaled to sum to one
when possible and then normalized to unit maximum entry.  Decoding finds the
coefficients that combine finished rows into the all-ones vector; the
least-squares residual is the correctness contract (row values themselves
are normalization-dependent).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .codeplan import Construction
from .errors import ConstructionError, DumpFormatError, ParameterError, SpanViolation
from .supports import SupportMatrix, TieredSupport

DEFAULT_TOL = 1e-8
RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class ParityMatrix:
    """(budget x q) matrix whose rows are orthogonal to the all-ones vector."""

    h: np.ndarray
    rng_seed: int

    @property
    def budget(self) -> int:
        return self.h.shape[0]

    @property
    def q(self) -> int:
        return self.h.shape[1]


def sample_parity(q: int, budget: int, seed: int) -> ParityMatrix:
    """First q-1 columns i.i.d. standard normal, last column the negated sum."""
    if budget < 0 or q < 1:
        raise ParameterError(f"need q >= 1 and budget >= 0, got q={q}, budget={budget}")
    if budget >= q:
        raise ParameterError(f"need budget < q, got budget={budget}, q={q}")
    rng = np.random.default_rng(seed)
    h = np.zeros((budget, q))
    h[:, : q - 1] = rng.standard_normal((budget, q - 1))
    h[:, q - 1] = -h[:, : q - 1].sum(axis=1)
    h.setflags(write=False)
    return ParityMatrix(h=h, rng_seed=seed)


def solve_row(
    support: Sequence[int], h: ParityMatrix, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Row supported on `support` lying in the nullspace of H(:, support)^T.

    Scaled so the row sums to 1 when the all-ones functional is nonzero on
    the solution space, else left at unit norm.
    """
    cols = sorted(int(s) for s in support)
    if len(cols) < h.budget + 1:
        raise ParameterError(
            f"support of size {len(cols)} cannot clear a budget of {h.budget}"
        )
    if h.budget == 0:
        basis = np.eye(len(cols))
    else:
        a = h.h[:, cols]
        _, s, vt = np.linalg.svd(a)
        rank = int((s > RANK_CUTOFF * s[0]).sum()) if s.size else 0
        if rank >= len(cols):
            raise ConstructionError(
                f"restricted parity matrix has full rank on support {cols}"
            )
        basis = vt[rank:]
    sums = basis @ np.ones(basis.shape[1])
    norm = float(np.dot(sums, sums))
    if norm > RANK_CUTOFF:
        x = (basis.T @ sums) / norm
    else:
        x = basis[0]
    if h.budget:
        resid = float(np.linalg.norm(h.h[:, cols] @ x))
        if resid > tol * max(1.0, float(np.linalg.norm(x))):
            raise ConstructionError(
                f"nullspace solve failed on support {cols}: residual {resid:.3e}"
            )
    row = np.zeros(h.q)
    row[cols] = x
    return row


def _budget_for(ts: TieredSupport) -> int:
    if ts.kind is Construction.FRACTIONAL:
        return 0
    if ts.kind is Construction.EVEN_K:
        # Window width k-1 only clears a budget of k-2; the generic q-k choice
        # would make rows unsolvable.
        return ts.params.k - 2
    return ts.q - ts.params.k


def _normalize(row: np.ndarray) -> np.ndarray:
    peak = float(np.abs(row).max())
    if peak == 0.0:
        raise ConstructionError("solved row is identically zero")
    return row / peak


@dataclass
class TieredCode:
    """Executable code: real F, per-finished-set real B_M, and the H used."""

    support: TieredSupport
    f: np.ndarray
    h: ParityMatrix
    tol: float
    seed: int
    _b_cache: dict[tuple[int, ...], np.ndarray] = field(default_factory=dict)

    @property
    def params(self):
        return self.support.params

    @property
    def q(self) -> int:
        return self.support.q

    def b_for(self, m_set: Iterable[int]) -> np.ndarray:
        m = self.support.normalize_m(m_set)
        if m not in self._b_cache:
            sm = self.support.b_support_for(m)
            rows = np.zeros((sm.rows, self.q))
            for i, sup in enumerate(sm.row_supports):
                rows[i] = _normalize(solve_row(sup, self.h, self.tol))
            rows.setflags(write=False)
            self._b_cache[m] = rows
        return self._b_cache[m]

    def rows_for(
        self,
        m_set: Iterable[int],
        i1: Iterable[int] = (),
        i2: Iterable[int] = (),
    ) -> tuple[np.ndarray, tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        """Stack the rows of a straggler scenario: sorted(M | I1) then sorted(I2)."""
        p = self.params
        m = self.support.normalize_m(m_set)
        i1 = tuple(sorted(set(int(x) for x in i1)))
        i2 = tuple(sorted(set(int(x) for x in i2)))
        if set(i1) & set(m):
            raise ParameterError(f"I1 {i1} overlaps finished set {m}")
        if i1 and (i1[0] < 1 or i1[-1] > p.n1):
            raise ParameterError(f"I1 {i1} not within [1, {p.n1}]")
        if i2 and (i2[0] < 1 or i2[-1] > p.n2 - p.n1):
            raise ParameterError(f"I2 {i2} not within [1, {p.n2 - p.n1}]")
        phase1 = tuple(sorted(set(m) | set(i1)))
        stacked = [self.f[u - 1] for u in phase1]
        if i2:
            b = self.b_for(m)
            stacked.extend(b[j - 1] for j in i2)
        return np.array(stacked), m, phase1, i2


def instantiate(ts: TieredSupport, seed: int, tol: float = DEFAULT_TOL) -> TieredCode:
    """Solve every row of F (B_M rows are solved per finished set on demand)."""
    budget = _budget_for(ts)
    h = sample_parity(ts.q, budget, seed)
    f = np.zeros((ts.params.n1, ts.q))
    for i, sup in enumerate(ts.f_support.row_supports):
        f[i] = _normalize(solve_row(sup, h, tol))
    f.setflags(write=False)
    return TieredCode(support=ts, f=f, h=h, tol=tol, seed=seed)


@dataclass(frozen=True)
class DecoderOutput:
    """Decoding coefficients for one straggler scenario, in n2-slot indexing."""

    a: np.ndarray
    finished: tuple[int, ...]
    m_set: tuple[int, ...]
    i1: tuple[int, ...]
    i2: tuple[int, ...]
    residual: float


def decode(
    code: TieredCode,
    m_set: Iterable[int],
    i1: Iterable[int] = (),
    i2: Iterable[int] = (),
    tol: float | None = None,
) -> DecoderOutput:
    """Least-squares coefficients a with a . rows = all-ones.

    Raises SpanViolation when the residual exceeds the tolerance; that is
    the falsification path for an invalid code.
    """
    tol = code.tol if tol is None else tol
    p = code.params
    rows, m, phase1, i2 = code.rows_for(m_set, i1, i2)
    got = len(phase1) + len(i2)
    if got < p.k:
        raise ParameterError(
            f"{got} finished servers cannot decode, need at least k={p.k}"
        )
    ones = np.ones(code.q)
    coeff, *_ = np.linalg.lstsq(rows.T, ones, rcond=None)
    residual = float(np.linalg.norm(rows.T @ coeff - ones))
    i1_only = tuple(u for u in phase1 if u not in m)
    if residual > tol:
        raise SpanViolation(m, i1_only, i2, residual)
    a = np.zeros(p.n2)
    for pos, u in enumerate(phase1):
        a[u - 1] = coeff[pos]
    for pos, j in enumerate(i2):
        a[p.n1 + j - 1] = coeff[len(phase1) + pos]
    finished = phase1 + tuple(p.n1 + j for j in i2)
    return DecoderOutput(
        a=a, finished=finished, m_set=m, i1=i1_only, i2=i2, residual=residual
    )


def aggregate(
    code: TieredCode, out: DecoderOutput, partials: np.ndarray
) -> np.ndarray:
    """Combine server transmissions (rows . partials) into the gradient sum."""
    partials = np.asarray(partials, dtype=float)
    if partials.ndim == 1:
        partials = partials[:, None]
    if partials.shape[0] != code.q:
        raise ParameterError(
            f"partials have {partials.shape[0]} rows, expected Q={code.q}"
        )
    rows, _, phase1, i2 = code.rows_for(out.m_set, out.i1, out.i2)
    coeff = np.concatenate(
        [
            [out.a[u - 1] for u in phase1],
            [out.a[code.params.n1 + j - 1] for j in i2],
        ]
    )
    transmissions = rows @ partials
    return coeff @ transmissions


# ---------------------------------------------------------------------------
# Text dumps (round-trippable, 17 significant digits)
# ---------------------------------------------------------------------------


def matrix_to_text(m: np.ndarray) -> str:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DumpFormatError(f"matrix dump requires 2-D input, got {m.shape}")
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DumpFormatError("empty matrix dump")
    try:
        rows, cols = (int(x) for x in lines[0].split())
        body = [[float(v) for v in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise DumpFormatError(f"bad matrix dump: {exc}") from exc
    if len(body) != rows or any(len(r) != cols for r in body):
        raise DumpFormatError("matrix dump shape mismatch")
    return np.array(body, dtype=float).reshape(rows, cols)

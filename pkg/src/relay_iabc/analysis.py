"""Transition matrices of honest updates and coefficients of ergodicity.

A phase's update ``x_next = M @ x`` is rebuilt from what each honest node
kept in its trimmed mean. Values of honest origins go straight to their
column; a kept Byzantine (or defaulted, or stale) value is rewritten as a
convex combination of the two nearest honest values that bracket it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import log10
from typing import Iterable, Optional, Sequence

import numpy as np

from .engine import PhaseRecord
from .graph import Partition, enumerate_reduced_graphs

ROW_SUM_TOL = 1e-9


class ExtractionError(RuntimeError):
    """A kept non-honest value had no honest value on one side of it."""


@dataclass
class PhaseMatrix:
    t: int
    rows: np.ndarray

    @property
    def h(self) -> int:
        return self.rows.shape[0]

    def is_row_stochastic(self, tol: float = ROW_SUM_TOL) -> bool:
        return is_row_stochastic(self.rows, tol)


def beta_for(m: int, b: int) -> float:
    """Smallest weight the extraction guarantees on an effectively non-zero entry."""
    return 1.0 / (2 * (m - 2 * b))


def is_row_stochastic(M, tol: float = ROW_SUM_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] == 0:
        return False
    return bool(np.all(M >= -tol) and np.all(np.abs(M.sum(axis=1) - 1.0) <= tol))


def _require_stochastic(M) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if not is_row_stochastic(A):
        raise ValueError("matrix is not row-stochastic")
    return A


def extract_phase_matrix(record: PhaseRecord, part: Partition) -> PhaseMatrix:
    honest = record.honest_ids
    col = {o: k for k, o in enumerate(honest)}
    rows = np.zeros((len(honest), len(honest)))
    for i, u in enumerate(record.updates):
        anchors = sorted((v, o) for o, v, fresh in u.values if fresh and part.is_honest(o))
        w = 1.0 / len(u.retained)
        for k in u.retained:
            origin, value, fresh = u.values[k]
            if fresh and part.is_honest(origin):
                rows[i, col[origin]] += w
                continue
            lower = [(v, o) for v, o in anchors if v <= value]
            upper = [(v, o) for v, o in anchors if v >= value]
            if not lower or not upper:
                raise ExtractionError(
                    f"phase {record.t}, node {u.node}: kept value {value!r} from origin "
                    f"{origin} is not bracketed by honest values")
            a_val = lower[-1][0]
            a = min(o for v, o in lower if v == a_val)
            c_val = upper[0][0]
            c = min(o for v, o in upper if v == c_val)
            lam = 1.0 if c_val == a_val else (c_val - value) / (c_val - a_val)
            rows[i, col[a]] += lam * w
            rows[i, col[c]] += (1.0 - lam) * w
    return PhaseMatrix(record.t, rows)


def extract_all(records: Iterable[PhaseRecord], part: Partition) -> list[PhaseMatrix]:
    return [extract_phase_matrix(r, part) for r in records]


def state_consistency_check(M: PhaseMatrix | np.ndarray, before, after, tol: float = 1e-9) -> bool:
    """True iff ``after == M @ before`` componentwise within ``tol``."""
    A = M.rows if isinstance(M, PhaseMatrix) else np.asarray(M, dtype=float)
    pred = A @ np.asarray(before, dtype=float)
    return bool(np.all(np.abs(pred - np.asarray(after, dtype=float)) <= tol))


def dobrushin_delta(M) -> float:
    """max over columns of (largest entry - smallest entry)."""
    A = _require_stochastic(M)
    return float(np.max(A.max(axis=0) - A.min(axis=0)))


def lambda_coefficient(M) -> float:
    """1 - min over row pairs of the overlap sum_j min(M_ij, M_kj)."""
    A = _require_stochastic(M)
    overlap = np.minimum(A[:, None, :], A[None, :, :]).sum(axis=2)
    return float(1.0 - overlap.min())


def _arr(M) -> np.ndarray:
    return M.rows if isinstance(M, PhaseMatrix) else np.asarray(M, dtype=float)


def is_scrambling(M, beta: float) -> bool:
    """Some column has every entry >= beta."""
    return bool(np.any(np.all(_arr(M) >= beta, axis=0)))


def check_L1(M1, M2, b: int, beta: float) -> bool:
    P = _arr(M1) @ _arr(M2)
    return bool(np.any((P >= beta * beta).sum(axis=0) >= b + 1))


def check_L2(M, b: int, beta: float) -> bool:
    if b < 1:
        raise ValueError("L2 needs b >= 1")
    A = _arr(M)
    big = A >= beta
    return bool(np.all(big.sum(axis=1) == b + 1) and np.all(A[~big] == 0.0))


def check_T1(M1, M2, M3, beta: float) -> bool:
    return is_scrambling(_arr(M1) @ _arr(M2) @ _arr(M3), beta ** 3)


def cumulative_deltas(mats: Sequence[PhaseMatrix | np.ndarray]) -> list[float]:
    """delta of M[t] @ ... @ M[0] for each t."""
    out = []
    P: Optional[np.ndarray] = None
    for M in mats:
        A = _arr(M)
        P = A if P is None else A @ P
        out.append(dobrushin_delta(P))
    return out


@dataclass(frozen=True)
class RateBounds:
    """Exact upper bounds on lambda of the scrambling products for both algorithms.

    Bounds are kept as fractions since ``beta ** (h * tau)`` underflows a double.
    """

    h: int
    b: int
    D: int
    tau: int
    beta: Fraction
    bound_relay: Fraction
    bound_iabc: Fraction

    @property
    def exponent_relay(self) -> int:
        return 3 * self.D

    @property
    def exponent_iabc(self) -> int:
        return self.h * self.tau

    def log10_gap(self) -> tuple[float, float]:
        """log10(1 - bound) for relay and IABC."""
        lb = log10(self.beta)
        return self.exponent_relay * lb, self.exponent_iabc * lb


def compare_rate_bounds(h: int, b: int, D: int) -> RateBounds:
    if h != 2 * b + 1:
        raise ValueError(f"tau is enumerated for h = 2b+1 honest nodes; got h={h}, b={b}")
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    tau = sum(1 for _ in enumerate_reduced_graphs(b))
    m = h + b
    beta = Fraction(1, 2 * (m - 2 * b))
    relay = 1 - beta ** (3 * D)
    iabc = 1 - beta ** (h * tau)
    rb = RateBounds(h, b, D, tau, beta, relay, iabc)
    if rb.exponent_relay < rb.exponent_iabc and not relay < iabc:
        raise AssertionError(f"relay bound {relay} not below IABC bound {iabc}")
    return rb


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dump_matrices(mats: Sequence[PhaseMatrix], h: int, b: int, beta: float) -> str:
    """Matrix JSON with every float written to 17 significant digits."""
    phases = []
    for M in mats:
        rows = ",".join("[" + ",".join(_fmt(v) for v in row) + "]" for row in M.rows)
        phases.append(f'{{"t":{int(M.t)},"rows":[{rows}]}}')
    return f'{{"h":{int(h)},"b":{int(b)},"beta":{_fmt(beta)},"phases":[{",".join(phases)}]}}'


def load_matrices(text: str) -> tuple[dict, list[PhaseMatrix]]:
    obj = json.loads(text)
    mats = [PhaseMatrix(p["t"], np.array(p["rows"], dtype=float)) for p in obj["phases"]]
    return {k: obj[k] for k in ("h", "b", "beta")}, mats

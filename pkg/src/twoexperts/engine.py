"""Game loop and regret accounting for the two-experts problem."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .adversaries import CostSequence
from .errors import DomainError, InvariantViolation
from .potentials import _shape, check_horizon

DIST_TOL = 1e-12
RESIDUAL_TOL = 1e-9

CSV_FIELDS = ("t", "l1", "l2", "x1", "x2", "player_cost", "L1", "L2", "gap", "cum_regret")


@dataclass(frozen=True, eq=False)
class Transcript:
    """Per-round record of a finished game; round ``t`` lives at index ``t - 1``.

    ``lagging`` is the expert with the larger loss *before* the round, i.e.
    the one the player's lagging-expert mass refers to.  Ties are recorded as
    expert 1 with ``tied`` set.
    """

    T: int
    kind: str
    l1: np.ndarray = field(repr=False)
    l2: np.ndarray = field(repr=False)
    x1: np.ndarray = field(repr=False)
    x2: np.ndarray = field(repr=False)
    player_cost: np.ndarray = field(repr=False)
    L1: np.ndarray = field(repr=False)
    L2: np.ndarray = field(repr=False)
    gap: np.ndarray = field(repr=False)
    lagging: np.ndarray = field(repr=False)
    tied: np.ndarray = field(repr=False)
    cum_regret: np.ndarray = field(repr=False)
    label: str = ""
    seed: int | None = None

    @property
    def gaps(self) -> np.ndarray:
        """``g_0, ..., g_T`` with ``g_0 = 0``."""
        return np.concatenate(([0.0], self.gap))

    @property
    def regrets(self) -> np.ndarray:
        """``Regret(0), ..., Regret(T)``."""
        return np.concatenate(([0.0], self.cum_regret))

    @property
    def lagging_mass(self) -> np.ndarray:
        return np.where(self.lagging == 1, self.x1, self.x2)

    def rows(self):
        for i in range(self.T):
            yield (i + 1, self.l1[i], self.l2[i], self.x1[i], self.x2[i], self.player_cost[i],
                   self.L1[i], self.L2[i], self.gap[i], self.cum_regret[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for row in self.rows():
            w.writerow([row[0]] + [format(float(v), ".17g") for v in row[1:]])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"policy": self.label, "seed": self.seed, "T": self.T, "kind": self.kind,
               "regret": float(self.cum_regret[-1])}
        cols = dict(zip(CSV_FIELDS, zip(*self.rows())))
        doc["rounds"] = {k: [float(v) if k != "t" else int(v) for v in vals] for k, vals in cols.items()}
        return json.dumps(doc)


def _check_distribution(t, x1, x2):
    if not (x1 >= 0 and x2 >= 0 and abs(x1 + x2 - 1.0) <= DIST_TOL):
        raise InvariantViolation(f"round {t}: invalid distribution ({x1!r}, {x2!r})")


def play(player, costs: CostSequence, seed: int | None = None) -> Transcript:
    """Run a full game; the player commits to ``x_t`` before seeing ``l_t``."""
    T = costs.T
    l1 = costs.l1.tolist()
    l2 = costs.l2.tolist()
    x1s, x2s, pc, L1s, L2s, gaps, lag, tie, reg = ([] for _ in range(9))
    L1 = L2 = 0.0
    total = 0.0
    for t in range(1, T + 1):
        x1, x2 = player.distribution(t, L1, L2)
        x1, x2 = float(x1), float(x2)
        _check_distribution(t, x1, x2)
        lag.append(2 if L2 > L1 else 1)
        tie.append(L1 == L2)
        a, b = l1[t - 1], l2[t - 1]
        c = a * x1 + b * x2
        total += c
        L1 += a
        L2 += b
        x1s.append(x1)
        x2s.append(x2)
        pc.append(c)
        L1s.append(L1)
        L2s.append(L2)
        gaps.append(abs(L1 - L2))
        reg.append(total - min(L1, L2))
    arr = np.asarray
    return Transcript(T, costs.kind, costs.l1, costs.l2, arr(x1s), arr(x2s), arr(pc), arr(L1s),
                      arr(L2s), arr(gaps), arr(lag, dtype=np.int8), arr(tie, dtype=bool), arr(reg),
                      getattr(player, "label", ""), seed)


def regret(tr: Transcript) -> float:
    return float(tr.player_cost.sum() - min(tr.L1[-1], tr.L2[-1]))


def gap_identity_residual(tr: Transcript) -> float:
    """``|Regret(T) - sum_t p_t (g_t - g_{t-1})|`` for restricted binary games."""
    if tr.kind != "restricted-binary":
        raise DomainError("the gap identity needs a restricted binary transcript")
    g = tr.gaps
    return abs(regret(tr) - float(np.sum(tr.lagging_mass * np.diff(g))))


def bound_residuals(gaps: np.ndarray, regrets: np.ndarray, T: int) -> np.ndarray:
    """Per-round slack of the erfc player's regret increments; positive means violated.

    ``gaps`` and ``regrets`` hold ``g_0..g_T`` and ``Regret(0..T)`` along the
    last axis.  Entry ``t - 1`` is ``dRegret(t) - [R(t, g_t) - (R(t, g_{t-1}+1)
    + R(t, g_{t-1}-1)) / 2]`` for ``t < T`` and ``dRegret(T) - 1/2`` for the
    final round.
    """
    T = check_horizon(T)
    gaps = np.asarray(gaps, dtype=float)
    delta = np.diff(np.asarray(regrets, dtype=float), axis=-1)
    out = np.empty_like(delta)
    if T > 1:
        s = (T - np.arange(1, T, dtype=float))
        prev = gaps[..., :T - 1]
        now = gaps[..., 1:T]
        # R's additive constant cancels in this combination
        bound = _shape(s, now) - 0.5 * (_shape(s, prev + 1.0) + _shape(s, prev - 1.0))
        out[..., :T - 1] = delta[..., :T - 1] - bound
    out[..., T - 1] = delta[..., T - 1] - 0.5
    return out


def per_round_bound_residuals(tr: Transcript, T: int | None = None) -> np.ndarray:
    T = tr.T if T is None else check_horizon(T)
    if T != tr.T:
        raise DomainError(f"transcript has {tr.T} rounds, not {T}")
    return bound_residuals(tr.gaps, tr.regrets, T)


def predicted_delta_regret(q, g_prev, g_now, leader_kept):
    """Per-round regret from the gap move alone.

    If a best expert before the round is still best after it, the increment
    is ``q (g_now - g_prev)``; otherwise the lead flipped and it is
    ``g_now - q (g_now + g_prev)``.
    """
    return np.where(leader_kept, q * (g_now - g_prev), g_now - q * (g_now + g_prev))


def leader_kept(L1_prev, L2_prev, L1_now, L2_now):
    """Whether some expert that was best before the round is best after it."""
    best_prev_1 = L1_prev <= L2_prev
    best_prev_2 = L2_prev <= L1_prev
    best_now_1 = L1_now <= L2_now
    best_now_2 = L2_now <= L1_now
    return (best_prev_1 & best_now_1) | (best_prev_2 & best_now_2)


@dataclass(frozen=True, eq=False)
class BatchResult:
    """Many games at once; arrays are ``(N, T)`` or ``(N, T + 1)`` with round 0 first."""

    T: int
    x1: np.ndarray = field(repr=False)
    L1: np.ndarray = field(repr=False)
    L2: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    regrets: np.ndarray = field(repr=False)

    @property
    def final_regret(self) -> np.ndarray:
        return self.regrets[:, -1]


def play_batch(player, l1: np.ndarray, l2: np.ndarray) -> BatchResult:
    """Vectorised :func:`play` over the rows of ``(N, T)`` cost matrices."""
    l1 = np.atleast_2d(np.asarray(l1, dtype=float))
    l2 = np.atleast_2d(np.asarray(l2, dtype=float))
    if l1.shape != l2.shape:
        raise DomainError("cost matrices must have equal shapes")
    N, T = l1.shape
    x1s = np.empty((N, T))
    L1s = np.zeros((N, T + 1))
    L2s = np.zeros((N, T + 1))
    regrets = np.zeros((N, T + 1))
    total = np.zeros(N)
    for t in range(1, T + 1):
        L1, L2 = L1s[:, t - 1], L2s[:, t - 1]
        x1, x2 = player.distribution(t, L1, L2)
        x1 = np.broadcast_to(np.asarray(x1, dtype=float), (N,))
        x2 = np.broadcast_to(np.asarray(x2, dtype=float), (N,))
        if np.any(x1 < 0) or np.any(x2 < 0) or np.any(np.abs(x1 + x2 - 1.0) > DIST_TOL):
            raise InvariantViolation(f"round {t}: invalid distribution")
        total += x1 * l1[:, t - 1] + x2 * l2[:, t - 1]
        L1s[:, t] = L1 + l1[:, t - 1]
        L2s[:, t] = L2 + l2[:, t - 1]
        regrets[:, t] = total - np.minimum(L1s[:, t], L2s[:, t])
        x1s[:, t - 1] = x1
    return BatchResult(T, x1s, L1s, L2s, np.abs(L1s - L2s), regrets)


@dataclass
class StreamSummary:
    T: int
    L1: float
    L2: float
    gap: float
    regret: float
    elapsed: float
    latencies_ns: np.ndarray | None = field(default=None, repr=False)


def play_stream(player, l1, l2, record_latency: bool = False) -> StreamSummary:
    """Like :func:`play` but keeps only running totals (for very long games).

    With ``record_latency`` the wall time of every ``distribution`` call is
    kept, in nanoseconds.
    """
    l1 = np.asarray(l1, dtype=float).tolist()
    l2 = np.asarray(l2, dtype=float).tolist()
    T = len(l1)
    lat = np.empty(T, dtype=np.int64) if record_latency else None
    clock = time.perf_counter_ns
    L1 = L2 = total = 0.0
    start = time.perf_counter()
    for t in range(1, T + 1):
        if record_latency:
            t0 = clock()
            x1, x2 = player.distribution(t, L1, L2)
            lat[t - 1] = clock() - t0
        else:
            x1, x2 = player.distribution(t, L1, L2)
        a, b = l1[t - 1], l2[t - 1]
        total += a * x1 + b * x2
        L1 += a
        L2 += b
    elapsed = time.perf_counter() - start
    return StreamSummary(T, L1, L2, abs(L1 - L2), total - min(L1, L2), elapsed, lat)


def regret_bound(T: int) -> float:
    """The erfc player's guarantee ``sqrt(T / 2 pi) + 1.24``."""
    return math.sqrt(T / (2.0 * math.pi)) + 1.24


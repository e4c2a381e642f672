"""Player strategies for the two-experts game.

A :class:`GapPolicy` is described by ``p(t, g)``: the probability mass it puts
on the lagging expert in round ``t`` when the gap after round ``t - 1`` is
``g``.  All players expose ``distribution(t, L1, L2)``, which maps the
cumulative losses before round ``t`` to the mass on expert 1 and expert 2;
``L1``/``L2`` may be scalars or equally shaped numpy arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, ResourceError
from .potentials import check_horizon, policy_q, potential_Q

# Entries of V* and p* are dyadic; exact tables stay cheap up to this size.
EXACT_MAX_T = 64


class ExpertDistribution(NamedTuple):
    x1: float
    x2: float


@dataclass(frozen=True)
class GapPolicy:
    T: int
    p: Callable = field(repr=False)
    label: str = "gap"

    def act(self, t, g, lagging) -> ExpertDistribution:
        return act(self, t, g, lagging)

    def distribution(self, t, L1, L2):
        """Masses ``(x1, x2)`` for round ``t`` given the losses after round ``t - 1``."""
        if isinstance(L1, np.ndarray) or isinstance(L2, np.ndarray):
            L1 = np.asarray(L1, dtype=float)
            L2 = np.asarray(L2, dtype=float)
            g = np.abs(L1 - L2)
            p = np.asarray(self.p(t, g), dtype=float)
            x1 = np.where(L1 > L2, p, 1.0 - p)
            x1 = np.where(g == 0, 0.5, x1)
            return x1, 1.0 - x1
        if L1 == L2:
            return act(self, t, 0.0, None)
        if L1 > L2:
            return act(self, t, L1 - L2, 1)
        return act(self, t, L2 - L1, 2)


def act(policy: GapPolicy, t, g, lagging) -> ExpertDistribution:
    """Turn the policy's lagging-expert mass into a distribution over experts 1 and 2.

    With a zero gap the experts are tied and the answer is ``(1/2, 1/2)``
    whatever ``lagging`` says.
    """
    if g == 0:
        return ExpertDistribution(0.5, 0.5)
    if lagging is None:
        raise DomainError("a lagging expert is required when the gap is positive")
    p = policy.p(t, g)
    if lagging == 1:
        return ExpertDistribution(p, 1.0 - p)
    if lagging == 2:
        return ExpertDistribution(1.0 - p, p)
    raise DomainError(f"lagging expert must be 1, 2 or None, got {lagging!r}")


def make_erfc_policy(T: int) -> GapPolicy:
    T = check_horizon(T)
    return GapPolicy(T, lambda t, g: policy_q(t, g, T), "erfc")


def make_continuous_policy(T: int) -> GapPolicy:
    """Plays ``Q`` directly, sampled at the state time ``t - 1``."""
    T = check_horizon(T)

    def p(t, g):
        if isinstance(t, np.ndarray):
            return potential_Q(t - 1.0, g, T)
        return potential_Q(t - 1, g, T)

    return GapPolicy(T, p, "continuous")


def make_uniform_policy(T: int) -> GapPolicy:
    """Always splits the mass evenly; its worst-case regret is ``T / 2``."""
    T = check_horizon(T)

    def p(t, g):
        if isinstance(g, np.ndarray):
            return np.full(g.shape, 0.5)
        return 0.5

    return GapPolicy(T, p, "uniform")


@dataclass(frozen=True)
class CoverTables:
    """Cover's minimax value table ``V`` and optimal policy ``P``.

    ``V[t][g]`` for ``t, g`` in ``0..T``; ``P[t][g]`` for ``t`` in ``1..T``
    and ``g`` in ``0..T-1`` (row 0 is unused).  Float tables are numpy
    arrays; exact tables are lists of :class:`~fractions.Fraction`.
    """

    T: int
    V: object = field(repr=False)
    P: object = field(repr=False)
    exact: bool = False


def build_cover_tables(T: int, exact: bool = False) -> CoverTables:
    T = check_horizon(T)
    if exact:
        return _build_cover_exact(T)
    try:
        V = np.zeros((T + 1, T + 1))
        P = np.full((T + 1, T), np.nan)
    except MemoryError as exc:
        raise ResourceError(f"Cover tables for T={T} do not fit in memory") from exc
    for t in range(T - 1, -1, -1):
        nxt = V[t + 1]
        V[t, 1:T] = 0.5 * (nxt[2:T + 1] + nxt[0:T - 1])
        V[t, 0] = nxt[1] + 0.5
    for t in range(1, T + 1):
        row = V[t]
        P[t, 0] = 0.5
        P[t, 1:T] = 0.5 * (row[0:T - 1] - row[2:T + 1])
    return CoverTables(T, V, P)


def _build_cover_exact(T: int) -> CoverTables:
    if T > EXACT_MAX_T:
        raise ResourceError(f"exact Cover tables are limited to T <= {EXACT_MAX_T}")
    zero, half = Fraction(0), Fraction(1, 2)
    V = [[zero] * (T + 1) for _ in range(T + 1)]
    for t in range(T - 1, -1, -1):
        nxt, row = V[t + 1], V[t]
        row[0] = nxt[1] + half
        for g in range(1, T):
            row[g] = (nxt[g + 1] + nxt[g - 1]) / 2
    P = [[None] * T]
    for t in range(1, T + 1):
        row = V[t]
        P.append([half] + [(row[g - 1] - row[g + 1]) / 2 for g in range(1, T)])
    return CoverTables(T, V, P, exact=True)


def cover_value(T: int) -> float:
    """``V*[0][0]`` from two rolling rows, for horizons whose full table is too big."""
    T = check_horizon(T)
    nxt = np.zeros(T + 1)
    row = np.zeros(T + 1)
    for _ in range(T):
        row[1:T] = 0.5 * (nxt[2:T + 1] + nxt[0:T - 1])
        row[0] = nxt[1] + 0.5
        row[T] = 0.0
        nxt, row = row, nxt
    return float(nxt[0])


@lru_cache(maxsize=512)
def _pstar_numerators(m: int) -> tuple[int, ...]:
    """``2^m p*(., g)`` as integers for a walk of length ``m``, for ``g`` in ``0..m``."""
    binom = [math.comb(m, j) for j in range(m + 1)]
    # walk ends at 2j - m; tail[j] = sum of binom[j:]
    tail = [0] * (m + 2)
    for j in range(m, -1, -1):
        tail[j] = tail[j + 1] + binom[j]
    out = []
    for g in range(m + 1):
        if (m + g) % 2 == 0:
            j = (m + g) // 2
            # 2 * (1/2 Pr(S = g) + Pr(S > g)) * 2^m
            out.append(binom[j] + 2 * tail[j + 1])
        else:
            out.append(2 * tail[(m + g + 1) // 2])
    return tuple(out)


def cover_pstar_closed_form(t: int, g: int, T: int, exact: bool = False):
    """``Pr(S = g)/2 + Pr(S > g)`` for a symmetric walk ``S`` of ``T - t`` steps.

    Computed from exact binomial coefficients; one walk length is tabulated
    once and cached, so sweeping ``g`` for a fixed ``t`` costs ``O(T - t)``.
    """
    T = check_horizon(T)
    if not (1 <= t <= T) or int(t) != t:
        raise DomainError(f"round must be an integer in 1..T (t={t}, T={T})")
    if not (0 <= g <= T - 1) or int(g) != g:
        raise DomainError(f"gap must be an integer in 0..T-1 (g={g}, T={T})")
    m = T - int(t)
    g = int(g)
    if g > m:
        return Fraction(0) if exact else 0.0
    num = _pstar_numerators(m)[g]
    if exact:
        return Fraction(num, 2 ** (m + 1))
    return num / 2 ** (m + 1)


def make_cover_policy(tables: CoverTables) -> GapPolicy:
    T = tables.T
    P = tables.P

    def p(t, g):
        if isinstance(g, np.ndarray) or isinstance(t, np.ndarray):
            if tables.exact:
                raise DomainError("exact Cover tables only support scalar lookups")
            t_arr = np.asarray(t)
            g_arr = np.asarray(g, dtype=float)
            gi = np.rint(g_arr)
            if np.any(gi != g_arr):
                raise DomainError("Cover policy requires binary adversary")
            if np.any(gi < 0) or np.any(gi > T - 1) or np.any(t_arr < 1) or np.any(t_arr > T):
                raise DomainError("Cover policy lookup out of range")
            return P[t_arr.astype(int), gi.astype(int)]
        if int(g) != g:
            raise DomainError("Cover policy requires binary adversary")
        if not (0 <= g <= T - 1) or not (1 <= t <= T):
            raise DomainError(f"Cover policy lookup out of range (t={t}, g={g}, T={T})")
        return P[int(t)][int(g)]

    return GapPolicy(T, p, "cover")


class MWUPlayer:
    """Exponential weights over the two experts' cumulative losses."""

    label = "mwu"

    def __init__(self, T: int, eta: float | None = None):
        self.T = check_horizon(T)
        if eta is None:
            eta = math.sqrt(8.0 * math.log(2.0) / self.T)
        if not math.isfinite(eta) or eta < 0:
            raise DomainError(f"eta must be finite and non-negative, got {eta}")
        self.eta = float(eta)

    def distribution(self, t, L1, L2):
        # x1 = e^{-eta L1} / (e^{-eta L1} + e^{-eta L2}), written as a logistic
        if isinstance(L1, np.ndarray) or isinstance(L2, np.ndarray):
            d = self.eta * (np.asarray(L1, dtype=float) - np.asarray(L2, dtype=float))
            x1 = np.exp(-np.logaddexp(0.0, d))
            return x1, 1.0 - x1
        d = self.eta * (L1 - L2)
        if d >= 0:
            e = math.exp(-d)
            x1 = e / (1.0 + e)
        else:
            x1 = 1.0 / (1.0 + math.exp(d))
        return ExpertDistribution(x1, 1.0 - x1)

    def __repr__(self):
        return f"MWUPlayer(T={self.T}, eta={self.eta!r})"


def make_mwu_policy(T: int, eta: float | None = None) -> MWUPlayer:
    return MWUPlayer(T, eta)


def make_policy(name: str, T: int, eta: float | None = None):
    """Build a player from its CLI label."""
    if name == "erfc":
        return make_erfc_policy(T)
    if name in ("continuous", "Q"):
        return make_continuous_policy(T)
    if name == "uniform":
        return make_uniform_policy(T)
    if name == "cover":
        return make_cover_policy(build_cover_tables(T))
    if name == "mwu":
        return make_mwu_policy(T, eta)
    raise DomainError(f"unknown policy {name!r}; expected erfc, continuous, uniform, cover or mwu")


def tables_to_bytes(tables: CoverTables) -> bytes:
    """Flat dump: ``<u8`` horizon, then ``V`` and ``P`` as row-major ``<f8``."""
    V = np.asarray(tables.V, dtype="<f8")
    P = np.asarray([[np.nan if x is None else float(x) for x in row] for row in tables.P]
                   if tables.exact else tables.P, dtype="<f8")
    return np.uint64(tables.T).astype("<u8").tobytes() + V.tobytes() + P.tobytes()


def tables_from_bytes(blob: bytes) -> CoverTables:
    T = int(np.frombuffer(blob[:8], dtype="<u8")[0])
    nv = (T + 1) * (T + 1)
    npp = (T + 1) * T
    if len(blob) != 8 + 8 * (nv + npp):
        raise DomainError("table dump has the wrong length for its horizon")
    body = np.frombuffer(blob[8:], dtype="<f8")
    V = body[:nv].reshape(T + 1, T + 1).astype(float)
    P = body[nv:].reshape(T + 1, T).astype(float)
    return CoverTables(T, V, P)


def tables_to_json(tables: CoverTables) -> str:
    V = [[float(x) for x in row] for row in tables.V]
    P = [None] + [[float(x) for x in row] for row in tables.P[1:]]
    return json.dumps({"T": tables.T, "V": V, "P": P})


def tables_from_json(text: str) -> CoverTables:
    d = json.loads(text)
    T = int(d["T"])
    V = np.array(d["V"], dtype=float)
    P = np.full((T + 1, T), np.nan)
    P[1:] = np.array(d["P"][1:], dtype=float)
    return CoverTables(T, V, P)

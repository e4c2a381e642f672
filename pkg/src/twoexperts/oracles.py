"""Ground-truth computations that do not share code paths with the players.

Exhaustive enumeration of restricted binary sequences, exact passage counts of
the reflected symmetric walk, the Stirling bracket on central binomials, and
seeded Monte Carlo estimators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .adversaries import make_rng, random_restricted_batch, seq_from_bits
from .engine import play_batch
from .errors import DomainError, ResourceError
from .policies import GapPolicy
from .potentials import check_horizon

BRUTE_FORCE_MAX_T = 22
_CHUNK = 1 << 16
_MC_BLOCK = 4096


def brute_force_worst(policy: GapPolicy, T: int | None = None, exact: bool = False):
    """Largest realised regret over all ``2^T`` restricted binary sequences.

    Regret is computed from its definition (player cost minus the best
    expert's loss), not from the gap identity.  Returns ``(regret, sequence)``.
    """
    T = check_horizon(policy.T if T is None else T)
    if T > BRUTE_FORCE_MAX_T:
        raise ResourceError(f"exhaustive search is capped at T = {BRUTE_FORCE_MAX_T}")
    if exact:
        return _brute_force_exact(policy, T)
    best, best_idx = -math.inf, 0
    n = 1 << T
    shifts = np.arange(T - 1, -1, -1, dtype=np.int64)
    for start in range(0, n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, n), dtype=np.int64)
        bits = ((idx[:, None] >> shifts) & 1).astype(float)
        res = play_batch(policy, bits, 1.0 - bits)
        r = res.final_regret
        k = int(np.argmax(r))
        if r[k] > best:
            best, best_idx = float(r[k]), int(idx[k])
    seq = seq_from_bits([(best_idx >> s) & 1 for s in range(T - 1, -1, -1)])
    return best, seq


def _brute_force_exact(policy: GapPolicy, T: int):
    best = None
    best_bits = None
    half = Fraction(1, 2)

    # depth-first over prefixes; state is (L1, L2, player cost so far)
    def visit(t, L1, L2, cost, bits):
        nonlocal best, best_bits
        if t > T:
            r = cost - min(L1, L2)
            if best is None or r > best:
                best, best_bits = r, list(bits)
            return
        if L1 == L2:
            x1 = half
        else:
            p = Fraction(policy.p(t, abs(L1 - L2)))
            x1 = p if L1 > L2 else 1 - p
        bits.append(True)
        visit(t + 1, L1 + 1, L2, cost + x1, bits)
        bits[-1] = False
        visit(t + 1, L1, L2 + 1, cost + (1 - x1), bits)
        bits.pop()

    visit(1, 0, 0, Fraction(0), [])
    return best, seq_from_bits(best_bits)


def passages_exact(T: int, exact: bool = False):
    """``E[Z_T(0)]``: expected visits to 0 by a symmetric walk over steps ``0..T``.

    ``sum_{k=0}^{floor(T/2)} C(2k, k) / 4^k``, accumulated with the ratio
    ``(2k - 1) / (2k)`` between consecutive terms.
    """
    if int(T) != T or T < 0:
        raise DomainError(f"walk length must be a non-negative integer, got {T!r}")
    if exact:
        term = total = Fraction(1)
        for k in range(1, int(T) // 2 + 1):
            term = term * (2 * k - 1) / (2 * k)
            total += term
        return total
    term = total = 1.0
    for k in range(1, int(T) // 2 + 1):
        term *= (2 * k - 1) / (2 * k)
        total += term
    return total


def passages_mc(T: int, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo ``(mean, stderr)`` of the zero-visit count of a reflected walk.

    Trials are grouped in fixed blocks of 4096; block ``b`` draws from stream
    ``seed XOR b``, so the result does not depend on evaluation order.
    """
    if int(T) != T or T < 0:
        raise DomainError("walk length must be a non-negative integer")
    if trials < 1:
        raise DomainError("need at least one trial")
    counts = np.empty(trials, dtype=np.int64)
    for b, start in enumerate(range(0, trials, _MC_BLOCK)):
        n = min(_MC_BLOCK, trials - start)
        if T == 0:
            counts[start:start + n] = 1
            continue
        steps = make_rng(seed, b).integers(0, 2, size=(n, T), dtype=np.int8) * 2 - 1
        walk = np.cumsum(steps, axis=1, dtype=np.int32)
        counts[start:start + n] = 1 + np.count_nonzero(walk == 0, axis=1)
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


def passages_bounds(T: int) -> tuple[float, float]:
    """The published bracket ``(sqrt(2T/pi) + 3/5, 1 + sqrt(2T/pi))`` on ``E[Z_T(0)]``.

    Only the upper end is a valid bound: the lower end is already false at
    ``T = 10``.  Callers should report it, not assert it.
    """
    if T < 1:
        raise DomainError("T must be at least 1")
    root = math.sqrt(2.0 * T / math.pi)
    return root + 0.6, 1.0 + root


@dataclass
class PassageStats:
    T: int
    exact: Fraction
    lower: float
    upper: float
    mc_mean: float | None = None
    mc_stderr: float | None = None


def passage_stats(T: int, trials: int | None = None, seed: int = 0) -> PassageStats:
    lo, hi = passages_bounds(T) if T >= 1 else (math.nan, math.nan)
    stats = PassageStats(T, passages_exact(T, exact=True), lo, hi)
    if trials:
        stats.mc_mean, stats.mc_stderr = passages_mc(T, trials, seed)
    return stats


def central_binom_bounds(n: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Stirling bracket ``4^n / sqrt(pi n) * (1 - 2/(15 n), 1)`` on ``C(2n, n)``.

    The values overflow doubles past ``n ~ 511``, so they come back as
    60-digit :mod:`mpmath` numbers; comparing them with Python ints is exact.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    with mpmath.workdps(60):
        upper = mpmath.mpf(4) ** n / mpmath.sqrt(mpmath.pi * n)
        lower = upper * (1 - mpmath.mpf(2) / (15 * n))
    return lower, upper


def expected_regret_random_adversary(player, T: int, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo ``(mean, stderr)`` of the player's regret against uniform random costs.

    Trial ``i`` faces ``random_restricted(T, seed ^ i)``.  Whatever the player
    does, the expectation is ``passages_exact(T - 1) / 2``.
    """
    T = check_horizon(T)
    if trials < 1:
        raise DomainError("need at least one trial")
    regrets = np.empty(trials)
    for start in range(0, trials, _CHUNK):
        n = min(_CHUNK, trials - start)
        b = random_restricted_batch(T, seed, n, start=start).astype(float)
        regrets[start:start + n] = play_batch(player, b, 1.0 - b).final_regret
    mean = float(regrets.mean())
    stderr = float(regrets.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


def report(check: str, T, expected, actual, tolerance, passed: bool, **extra) -> dict:
    """One oracle verdict in the JSON report schema."""
    def plain(v):
        if isinstance(v, Fraction):
            return float(v)
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        if isinstance(v, mpmath.mpf):
            return float(v) if abs(v) < mpmath.mpf(10) ** 300 else str(v)
        return v

    doc = {"check": check, "T": T, "expected": plain(expected), "actual": plain(actual),
           "tolerance": tolerance, "pass": bool(passed)}
    doc.update({k: plain(v) for k, v in extra.items()})
    return doc


def dumps_reports(reports: list[dict]) -> str:
    return json.dumps({"pass": all(r["pass"] for r in reports), "checks": reports}, indent=1)


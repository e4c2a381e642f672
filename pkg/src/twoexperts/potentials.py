"""Closed-form potentials for the fixed-horizon two-experts game.

``Q(t, g)`` is the continuous-time mass on the lagging expert, ``R(t, g)`` its
antiderivative in the gap (which solves the backwards heat equation), and
``policy_q`` is the centred discrete derivative of ``R`` that the O(1) player
actually uses.  Every function accepts Python scalars (fast path through
:mod:`math`) or numpy arrays (vectorised path); arguments broadcast.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, InvariantViolation

SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)

# Largest |q| excursion outside [0, 1] that is treated as rounding noise.
CLAMP_TOL = 1e-12

# Coefficients of W. J. Cody's rational Chebyshev approximations (CALERF).
_A = (3.16112374387056560e00, 1.13864154151050156e02,
      3.77485237685302021e02, 3.20937758913846947e03,
      1.85777706184603153e-1)
_B = (2.36012909523441209e01, 2.44024637934444173e02,
      1.28261652607737228e03, 2.84423683343917062e03)
_C = (5.64188496988670089e-1, 8.88314979438837594e00,
      6.61191906371416295e01, 2.98635138197400131e02,
      8.81952221241769090e02, 1.71204761263407058e03,
      2.05107837782607147e03, 1.23033935479799725e03,
      2.15311535474403846e-8)
_D = (1.57449261107098347e01, 1.17693950891312499e02,
      5.37181101862009858e02, 1.62138957456669019e03,
      3.29079923573345963e03, 4.36261909014324716e03,
      3.43936767414372164e03, 1.23033935480374942e03)
_P = (3.05326634961232344e-1, 3.60344899949804439e-1,
      1.25781726111229246e-1, 1.60837851487422766e-2,
      6.58749161529837803e-4, 1.63153871373020978e-2)
_Q = (2.56852019228982242e00, 1.87295284992346725e00,
      5.27905102951428412e-1, 6.05183413124413191e-2,
      2.33520497626869185e-3)
_ONE_OVER_SQRT_PI = 5.6418958354775628695e-1
_THRESH = 0.46875
_XBIG = 26.543


def _erfc_scalar(x: float) -> float:
    y = abs(x)
    if y <= _THRESH:
        ysq = y * y
        xnum = _A[4] * ysq
        xden = ysq
        for i in range(3):
            xnum = (xnum + _A[i]) * ysq
            xden = (xden + _B[i]) * ysq
        return 1.0 - x * (xnum + _A[3]) / (xden + _B[3])
    if y <= 4.0:
        xnum = _C[8] * y
        xden = y
        for i in range(7):
            xnum = (xnum + _C[i]) * y
            xden = (xden + _D[i]) * y
        r = (xnum + _C[7]) / (xden + _D[7])
    elif y < _XBIG:
        ysq = 1.0 / (y * y)
        xnum = _P[5] * ysq
        xden = ysq
        for i in range(4):
            xnum = (xnum + _P[i]) * ysq
            xden = (xden + _Q[i]) * ysq
        r = ysq * (xnum + _P[4]) / (xden + _Q[4])
        r = (_ONE_OVER_SQRT_PI - r) / y
    else:
        r = 0.0
    if r:
        # exp(-y*y) split so the square is formed exactly in the leading part
        ysq = math.trunc(y * 16.0) / 16.0
        delta = (y - ysq) * (y + ysq)
        r = math.exp(-ysq * ysq) * math.exp(-delta) * r
    return 2.0 - r if x < 0 else r


def _erfc_array(x: np.ndarray) -> np.ndarray:
    y = np.abs(x)
    out = np.empty_like(y)

    small = y <= _THRESH
    if small.any():
        xs = x[small]
        ysq = xs * xs
        xnum = _A[4] * ysq
        xden = ysq.copy()
        for i in range(3):
            xnum = (xnum + _A[i]) * ysq
            xden = (xden + _B[i]) * ysq
        out[small] = 1.0 - xs * (xnum + _A[3]) / (xden + _B[3])

    mid = ~small & (y <= 4.0)
    big = (y > 4.0) & (y < _XBIG)
    r = np.zeros_like(y)
    if mid.any():
        ym = y[mid]
        xnum = _C[8] * ym
        xden = ym.copy()
        for i in range(7):
            xnum = (xnum + _C[i]) * ym
            xden = (xden + _D[i]) * ym
        r[mid] = (xnum + _C[7]) / (xden + _D[7])
    if big.any():
        yb = y[big]
        ysq = 1.0 / (yb * yb)
        xnum = _P[5] * ysq
        xden = ysq.copy()
        for i in range(4):
            xnum = (xnum + _P[i]) * ysq
            xden = (xden + _Q[i]) * ysq
        rb = ysq * (xnum + _P[4]) / (xden + _Q[4])
        r[big] = (_ONE_OVER_SQRT_PI - rb) / yb
    tail = ~small
    yt = y[tail]
    ysq = np.trunc(yt * 16.0) / 16.0
    delta = (yt - ysq) * (yt + ysq)
    rt = np.exp(-ysq * ysq) * np.exp(-delta) * r[tail]
    out[tail] = np.where(x[tail] < 0, 2.0 - rt, rt)
    return out


def erfc(z):
    """Complementary error function, ``1 - erf(z)``.

    Relative error is below 1e-14 on ``|z| <= 6``; past ``z ~ 26.5`` the
    result underflows to 0 (and to 2 for large negative ``z``).
    """
    if isinstance(z, np.ndarray):
        if not np.all(np.isfinite(z)):
            raise DomainError("erfc: argument must be finite")
        return _erfc_array(z.astype(float, copy=False))
    z = float(z)
    if not math.isfinite(z):
        raise DomainError("erfc: argument must be finite")
    return _erfc_scalar(z)


def check_horizon(T) -> int:
    """Validate a horizon and return it as an ``int``."""
    if isinstance(T, bool) or int(T) != T or T < 1:
        raise DomainError(f"horizon must be a positive integer, got {T!r}")
    return int(T)


def _is_array(*xs) -> bool:
    return any(isinstance(x, np.ndarray) for x in xs)


def _remaining(t, T):
    """``T - t`` after checking that every time lies strictly before ``T``."""
    if _is_array(t):
        s = T - np.asarray(t, dtype=float)
        if np.any(~(s > 0)):
            raise DomainError("potentials are defined only for t < T")
        return s
    s = T - t
    if not s > 0:
        raise DomainError(f"potentials are defined only for t < T (t={t}, T={T})")
    return float(s)


def _shape(s, g):
    """``R`` without its additive constant, as a function of ``T - t`` and ``g``."""
    if _is_array(s, g):
        s = np.asarray(s, dtype=float)
        g = np.asarray(g, dtype=float)
        s, g = np.broadcast_arrays(s, g)
        return (0.5 * g * erfc(g / np.sqrt(2.0 * s))
                - np.sqrt(s / (2.0 * math.pi)) * np.exp(-g * g / (2.0 * s)))
    return (0.5 * g * _erfc_scalar(g / math.sqrt(2.0 * s))
            - math.sqrt(s / (2.0 * math.pi)) * math.exp(-g * g / (2.0 * s)))


def potential_Q(t, g, T):
    """``Q(t, g) = erfc(g / sqrt(2 (T - t))) / 2``, defined for ``t < T``."""
    s = _remaining(t, T)
    if _is_array(s, g):
        return 0.5 * erfc(np.asarray(g / np.sqrt(2.0 * s), dtype=float))
    return 0.5 * _erfc_scalar(g / math.sqrt(2.0 * s))


def potential_R(t, g, T):
    """Antiderivative of ``Q`` in the gap, normalised so ``R(0, 0) = 0``."""
    s = _remaining(t, T)
    return _shape(s, g) + math.sqrt(T / (2.0 * math.pi))


def gap_derivative_R(t, g, T):
    """Centred difference ``(R(t, g+1) - R(t, g-1)) / 2`` with no shortcuts."""
    s = _remaining(t, T)
    if _is_array(g):
        g = np.asarray(g, dtype=float)
    return 0.5 * (_shape(s, g + 1.0) - _shape(s, g - 1.0))


def _clamp(q):
    if isinstance(q, np.ndarray):
        if np.any(q < -CLAMP_TOL) or np.any(q > 1.0 + CLAMP_TOL):
            bad = q[(q < -CLAMP_TOL) | (q > 1.0 + CLAMP_TOL)]
            raise InvariantViolation(f"policy mass outside [0, 1]: {bad[:5]}")
        return np.clip(q, 0.0, 1.0)
    if q < -CLAMP_TOL or q > 1.0 + CLAMP_TOL:
        raise InvariantViolation(f"policy mass outside [0, 1]: {q!r}")
    return min(max(q, 0.0), 1.0)


def policy_q(t, g, T):
    """Mass the erfc player puts on the lagging expert in round ``t``.

    ``g`` is the gap observed before the round.  For ``t < T`` this is the
    centred difference of ``R``; in the final round the player follows the
    leader outright unless the experts are tied.  ``q(t, 0)`` is exactly 1/2.
    """
    if _is_array(t, g):
        t = np.asarray(t, dtype=float)
        g = np.asarray(g, dtype=float)
        t, g = np.broadcast_arrays(t, g)
        if np.any(t < 1) or np.any(t > T):
            raise DomainError("round must lie in 1..T")
        if np.any(g < 0):
            raise DomainError("gap must be non-negative")
        last = t == T
        s = np.where(last, 1.0, T - t)
        q = 0.5 * (_shape(s, g + 1.0) - _shape(s, g - 1.0))
        q = np.where(last, 0.0, q)
        q = np.where(g == 0, 0.5, q)
        return _clamp(q)
    if not 1 <= t <= T:
        raise DomainError(f"round must lie in 1..T (t={t}, T={T})")
    if g < 0:
        raise DomainError(f"gap must be non-negative, got {g}")
    if g == 0:
        return 0.5
    if t == T:
        return 0.0
    s = float(T - t)
    return _clamp(0.5 * (_shape(s, g + 1.0) - _shape(s, g - 1.0)))


def partials_R(t, g, T):
    """Closed-form ``(d/dt R, d2/dg2 R, d3/dg3 R)`` at ``(t, g)``."""
    s = _remaining(t, T)
    if _is_array(s, g):
        g = np.asarray(g, dtype=float)
        kernel = np.exp(-g * g / (2.0 * s)) / np.sqrt(2.0 * math.pi * s)
    else:
        kernel = math.exp(-g * g / (2.0 * s)) / math.sqrt(2.0 * math.pi * s)
    dt = 0.5 * kernel
    dgg = -kernel
    dg3 = kernel * g / s
    return dt, dgg, dg3


def disc_errors(t, g, T):
    """Discretisation errors ``(r_t, r_gg)`` of the time and second gap differences.

    ``r_t = dR/dt - (R(t, g) - R(t-1, g))`` and
    ``r_gg = d2R/dg2 - (R(t, g+1) + R(t, g-1) - 2 R(t, g))``.
    """
    s = _remaining(t, T)
    dt, dgg, _ = partials_R(t, g, T)
    if _is_array(g):
        g = np.asarray(g, dtype=float)
    centre = _shape(s, g)
    rt = dt - (centre - _shape(s + 1.0, g))
    rgg = dgg - (_shape(s, g + 1.0) + _shape(s, g - 1.0) - 2.0 * centre)
    return rt, rgg


BT_CONST = math.sqrt(2.0) / (8.0 * SQRT_PI)
BGG_CONST = 2.0 * math.sqrt(2.0) / (3.0 * SQRT_PI)


def error_bounds(gap_to_horizon):
    """Upper bounds on ``(r_t, r_gg)`` given ``T - t``; both scale as ``(T - t)^{-3/2}``."""
    if _is_array(gap_to_horizon):
        s = np.asarray(gap_to_horizon, dtype=float)
        if np.any(~(s > 0)):
            raise DomainError("T - t must be positive")
        scale = s ** -1.5
    else:
        if not gap_to_horizon > 0:
            raise DomainError(f"T - t must be positive, got {gap_to_horizon}")
        scale = float(gap_to_horizon) ** -1.5
    return BT_CONST * scale, BGG_CONST * scale

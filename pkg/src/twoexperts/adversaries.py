"""Cost sequences and the exact worst-case adversary for gap-based players."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DomainError, ResourceError
from .policies import GapPolicy
from .potentials import check_horizon

KINDS = ("restricted-binary", "binary", "general")

_SEED_MASK = (1 << 64) - 1


def make_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """PCG64 stream for ``seed``; stream ``index`` of a family is ``seed XOR index``."""
    s = int(seed) & _SEED_MASK
    if index is not None:
        s ^= int(index) & _SEED_MASK
    return np.random.Generator(np.random.PCG64(s))


class CostVector(NamedTuple):
    l1: float
    l2: float


@dataclass(frozen=True, eq=False)
class CostSequence:
    """``T`` rounds of expert costs, stored column-wise."""

    l1: np.ndarray = field(repr=False)
    l2: np.ndarray = field(repr=False)
    kind: str = "general"

    def __post_init__(self):
        l1 = np.ascontiguousarray(self.l1, dtype=float)
        l2 = np.ascontiguousarray(self.l2, dtype=float)
        if l1.ndim != 1 or l1.shape != l2.shape or l1.size < 1:
            raise DomainError("a cost sequence needs T >= 1 rounds of paired costs")
        if self.kind not in KINDS:
            raise DomainError(f"unknown sequence kind {self.kind!r}")
        if not (np.all((l1 >= 0) & (l1 <= 1)) and np.all((l2 >= 0) & (l2 <= 1))):
            raise DomainError("costs must lie in [0, 1]")
        if self.kind != "general" and not np.all(np.isin(l1, (0.0, 1.0)) & np.isin(l2, (0.0, 1.0))):
            raise DomainError("binary sequences take costs in {0, 1}")
        if self.kind == "restricted-binary" and not np.all(l1 + l2 == 1.0):
            raise DomainError("restricted binary rounds must be (1,0) or (0,1)")
        l1.flags.writeable = False
        l2.flags.writeable = False
        object.__setattr__(self, "l1", l1)
        object.__setattr__(self, "l2", l2)

    @property
    def T(self) -> int:
        return int(self.l1.size)

    def __len__(self):
        return self.T

    def __iter__(self) -> Iterator[CostVector]:
        for a, b in zip(self.l1.tolist(), self.l2.tolist()):
            yield CostVector(a, b)

    def __eq__(self, other):
        if not isinstance(other, CostSequence):
            return NotImplemented
        return (self.kind == other.kind and np.array_equal(self.l1, other.l1)
                and np.array_equal(self.l2, other.l2))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "l1", "l2"])
        for t, (a, b) in enumerate(zip(self.l1.tolist(), self.l2.tolist()), start=1):
            w.writerow([t, format(a, ".17g"), format(b, ".17g")])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"T": self.T, "kind": self.kind,
                           "l1": self.l1.tolist(), "l2": self.l2.tolist()})

    @classmethod
    def from_csv(cls, text: str, kind: str | None = None) -> CostSequence:
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or set(rows[0]) != {"t", "l1", "l2"}:
            raise DomainError("cost CSV must have header t,l1,l2 and at least one row")
        l1 = np.array([float(r["l1"]) for r in rows])
        l2 = np.array([float(r["l2"]) for r in rows])
        return cls(l1, l2, kind or infer_kind(l1, l2))

    @classmethod
    def from_json(cls, text: str) -> CostSequence:
        d = json.loads(text)
        return cls(np.array(d["l1"], dtype=float), np.array(d["l2"], dtype=float), d["kind"])


def infer_kind(l1, l2) -> str:
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    if np.all(np.isin(l1, (0.0, 1.0)) & np.isin(l2, (0.0, 1.0))):
        return "restricted-binary" if np.all(l1 + l2 == 1.0) else "binary"
    return "general"


def seq_from_bits(bits) -> CostSequence:
    """``True`` charges expert 1, ``False`` charges expert 2."""
    b = np.asarray([bool(x) for x in bits], dtype=bool)
    if b.size == 0:
        raise DomainError("need at least one round")
    return CostSequence(b.astype(float), (~b).astype(float), "restricted-binary")


def parse_bits(text: str) -> CostSequence:
    if not text or set(text) - {"0", "1"}:
        raise DomainError(f"bit string must be a non-empty run of 0/1, got {text!r}")
    return seq_from_bits(c == "1" for c in text)


def random_restricted(T: int, seed: int) -> CostSequence:
    T = check_horizon(T)
    bits = make_rng(seed).integers(0, 2, size=T).astype(bool)
    return seq_from_bits(bits)


def random_general(T: int, seed: int, preset: str = "uniform") -> CostSequence:
    """Arbitrary ``[0, 1]`` costs.

    ``uniform`` draws both costs independently and uniformly; ``equal``
    charges both experts the same cost every round; ``small-increment``
    keeps ``|l1 - l2| <= 0.1`` so the gap moves in small steps.
    """
    T = check_horizon(T)
    rng = make_rng(seed)
    if preset == "uniform":
        c = rng.random((T, 2))
        l1, l2 = c[:, 0], c[:, 1]
    elif preset == "equal":
        l1 = rng.random(T)
        l2 = l1.copy()
    elif preset == "small-increment":
        base = rng.random(T) * 0.9
        l1 = base + 0.1 * rng.random(T)
        l2 = base + 0.1 * rng.random(T)
    else:
        raise DomainError(f"unknown general-cost preset {preset!r}")
    return CostSequence(l1, l2, "general")


def random_restricted_batch(T: int, seed: int, trials: int, start: int = 0) -> np.ndarray:
    """``(trials, T)`` bits; row ``j`` equals ``random_restricted(T, seed ^ (start + j))``."""
    T = check_horizon(T)
    out = np.empty((trials, T), dtype=bool)
    for j in range(trials):
        out[j] = make_rng(seed, start + j).integers(0, 2, size=T).astype(bool)
    return out


def random_general_batch(T: int, seed: int, trials: int,
                         start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Uniform cost matrices; row ``j`` equals ``random_general(T, seed ^ (start + j))``."""
    T = check_horizon(T)
    l1 = np.empty((trials, T))
    l2 = np.empty((trials, T))
    for j in range(trials):
        c = make_rng(seed, start + j).random((T, 2))
        l1[j] = c[:, 0]
        l2[j] = c[:, 1]
    return l1, l2


@dataclass(frozen=True)
class PolicyRegretTable:
    """``V[t][g]``: worst regret still to come after round ``t`` at gap ``g``."""

    T: int
    V: object = field(repr=False)
    label: str = ""

    @property
    def value(self):
        return self.V[0][0]


def _policy_row(policy: GapPolicy, t: int, T: int) -> np.ndarray:
    g = np.arange(T, dtype=float)
    try:
        return np.broadcast_to(np.asarray(policy.p(t, g), dtype=float), (T,))
    except (TypeError, ValueError):
        # p written for scalar gaps only
        return np.array([float(policy.p(t, k)) for k in range(T)])


def worst_case_table(policy: GapPolicy, T: int | None = None, exact: bool = False) -> PolicyRegretTable:
    """Backward recursion for the worst-case regret-to-come of a gap-based player.

    The adversary picks the gap move maximising ``V[t+1][g +/- 1] +/- p(t+1, g)``;
    from a tie it collects ``max(p, 1 - p)``.  Column ``g = T`` is never
    reachable before the end of the game and is pinned to 0.
    """
    T = check_horizon(policy.T if T is None else T)
    if exact:
        return _worst_case_exact(policy, T)
    try:
        V = np.zeros((T + 1, T + 1))
    except MemoryError as exc:
        raise ResourceError(f"regret table for T={T} does not fit in memory") from exc
    for t in range(T - 1, -1, -1):
        _step(V[t], V[t + 1], _policy_row(policy, t + 1, T), T)
    return PolicyRegretTable(T, V, policy.label)


def _step(row, nxt, p, T):
    if T > 1:
        up = nxt[2:T + 1] + p[1:T]
        down = nxt[0:T - 1] - p[1:T]
        row[1:T] = np.maximum(up, down)
    row[0] = nxt[1] + max(p[0], 1.0 - p[0])
    row[T] = 0.0


def _worst_case_exact(policy: GapPolicy, T: int) -> PolicyRegretTable:
    if T > 64:
        raise ResourceError("exact regret tables are limited to T <= 64")
    V = [[Fraction(0)] * (T + 1) for _ in range(T + 1)]
    for t in range(T - 1, -1, -1):
        nxt, row = V[t + 1], V[t]
        for g in range(1, T):
            p = Fraction(policy.p(t + 1, g))
            row[g] = max(nxt[g + 1] + p, nxt[g - 1] - p)
        p0 = Fraction(policy.p(t + 1, 0))
        row[0] = nxt[1] + max(p0, 1 - p0)
    return PolicyRegretTable(T, V, policy.label)


def worst_case_value(policy: GapPolicy, T: int | None = None) -> float:
    """``V[0][0]`` from two rolling rows; memory ``O(T)``."""
    T = check_horizon(policy.T if T is None else T)
    nxt = np.zeros(T + 1)
    row = np.zeros(T + 1)
    for t in range(T - 1, -1, -1):
        _step(row, nxt, _policy_row(policy, t + 1, T), T)
        nxt, row = row, nxt
    return float(nxt[0])


def worst_case_sequence(policy: GapPolicy, T: int | None = None,
                        table: PolicyRegretTable | None = None) -> CostSequence:
    """A restricted binary sequence attaining the table's ``V[0][0]``.

    Ties between the two gap moves go to the move that widens the gap.
    """
    T = check_horizon(policy.T if T is None else T)
    if table is None:
        table = worst_case_table(policy, T)
    V = table.V
    bits = []
    L1 = L2 = 0
    for t in range(T):
        g = abs(L1 - L2)
        p = policy.p(t + 1, g)
        if g == 0:
            # expert 1 holds mass p; charge whichever side holds more
            hit_one = p >= 1 - p
        else:
            widen = V[t + 1][g + 1] + p if g + 1 <= T else p
            narrow = V[t + 1][g - 1] - p
            lagging_is_one = L1 > L2
            hit_one = lagging_is_one if widen >= narrow else not lagging_is_one
        bits.append(hit_one)
        if hit_one:
            L1 += 1
        else:
            L2 += 1
    return seq_from_bits(bits)

"""Command-line front end.

Subcommands::

    simulate   play one game and write its transcript (json or csv)
    worstcase  exact worst-case regret V[0][0] of a gap-based policy and a witness sequence
    tables     build Cover's value/policy tables and serialise them
    verify     run the oracle suite and write a JSON report
    bench      time per-round decisions
    export     regret-vs-T curve data for external plotting

Adversary specs (``--adversary``)::

    bits:<01-string>          fixed restricted binary sequence; 1 charges expert 1
    random-binary             uniform restricted binary rounds (needs --seed)
    random-general[:preset]   [0,1] costs; preset uniform (default), equal or small-increment (needs --seed)
    worst                     the worst-case sequence for the chosen gap-based policy
    file:<path>               a cost sequence stored as CSV (header t,l1,l2) or JSON

Table dump formats (``tables --format``):

``bin``
    A flat little-endian file.  The first 8 bytes hold the horizon ``T`` as an
    unsigned 64-bit integer.  Then follow ``(T+1)*(T+1)`` 64-bit floats with
    ``V[t][g]`` in row-major order (``t`` outer, ``g`` inner, both ``0..T``),
    then ``(T+1)*T`` 64-bit floats with ``P[t][g]`` in row-major order
    (``t`` in ``0..T``, ``g`` in ``0..T-1``).  Row ``t = 0`` of ``P`` is unused
    and stored as NaN.  Total size is ``8 + 8 * ((T+1)^2 + (T+1)*T)`` bytes.
``json``
    ``{"T": T, "V": [[...], ...], "P": [null, [...], ...]}`` with the same
    indexing; ``P[0]`` is ``null``.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adversaries as adv
from . import engine, oracles, policies, suite
from .errors import DomainError, InvariantViolation, ResourceError

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_RESOURCE = 0, 1, 2, 3

COMMANDS = ("simulate", "worstcase", "tables", "verify", "bench", "export")
POLICIES = ("erfc", "continuous", "uniform", "cover", "mwu")
ADVERSARY_FORMS = ("bits:<01-string>", "random-binary", "random-general[:preset]", "worst",
                   "file:<path>")
BENCH_GRID = (1_000, 10_000, 100_000, 1_000_000)


class UsageError(ValueError):
    """Bad command-line input."""


@dataclass
class RunConfig:
    command: str
    T: int | None = None
    policy: str = "erfc"
    eta: float | None = None
    adversary: str | None = None
    seed: int | None = None
    trials: int | None = None
    output: str | None = None
    format: str = "json"
    full: bool = False
    grid: bool = False
    sequence_output: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.T is not None and (int(self.T) != self.T or self.T < 1):
            raise UsageError(f"T must be a positive integer, got {self.T!r}")
        if self.policy not in POLICIES:
            raise UsageError(f"unknown policy {self.policy!r}; choose from {', '.join(POLICIES)}")
        if self.trials is not None and self.trials < 1:
            raise UsageError("--trials must be positive")
        return self


def _usage_forms() -> str:
    return "accepted adversary specs: " + ", ".join(ADVERSARY_FORMS)


def parse_adversary(spec: str, policy=None, seed: int | None = None):
    """Turn an adversary spec into a function ``T -> CostSequence``.

    ``T`` may be ``None`` for fixed sequences (bits, files), in which case the
    sequence sets the horizon.
    """
    if not spec:
        raise UsageError("empty adversary spec; " + _usage_forms())
    head, _, arg = spec.partition(":")

    def fixed(seq):
        def make(T=None):
            if T is not None and T != seq.T:
                raise UsageError(f"adversary has {seq.T} rounds but T={T}")
            return seq
        make.stochastic = False
        return make

    if head == "bits":
        try:
            return fixed(adv.parse_bits(arg))
        except DomainError as exc:
            raise UsageError(f"{exc}; {_usage_forms()}") from exc
    if head == "file":
        if not arg:
            raise UsageError("file: needs a path; " + _usage_forms())
        return fixed(_read_costs(Path(arg)))
    if head in ("random-binary", "random-general"):
        if head == "random-binary" and arg:
            raise UsageError("random-binary takes no preset; " + _usage_forms())
        if seed is None:
            raise UsageError(f"{head} is stochastic and needs --seed")
        preset = arg or "uniform"
        if preset not in ("uniform", "equal", "small-increment"):
            raise UsageError(f"unknown random-general preset {preset!r}")

        def make(T=None):
            if T is None:
                raise UsageError(f"{head} needs --T")
            if head == "random-binary":
                return adv.random_restricted(T, seed)
            return adv.random_general(T, seed, preset)
        make.stochastic = True
        return make
    if head == "worst" and not arg:
        if not isinstance(policy, policies.GapPolicy):
            raise UsageError("the worst adversary needs a gap-based policy (not mwu)")

        def make(T=None):
            return adv.worst_case_sequence(policy, T)
        make.stochastic = False
        return make
    raise UsageError(f"malformed adversary spec {spec!r}; {_usage_forms()}")


def _read_costs(path: Path) -> adv.CostSequence:
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
            return adv.CostSequence.from_json(text)
        return adv.CostSequence.from_csv(text)
    except (DomainError, KeyError, ValueError) as exc:
        raise UsageError(f"{path} is not a valid cost sequence: {exc}") from exc


def _emit(cfg: RunConfig, payload, binary: bool = False):
    if cfg.output:
        mode = "wb" if binary else "w"
        with open(cfg.output, mode) as fh:
            fh.write(payload)
    elif binary:
        sys.stdout.buffer.write(payload)
    else:
        sys.stdout.write(payload if payload.endswith("\n") else payload + "\n")


def _rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, (int, str)) else format(float(v), ".17g") for v in r])
    return buf.getvalue()


def _need_T(cfg):
    if cfg.T is None:
        raise UsageError(f"{cfg.command} needs --T")
    return int(cfg.T)


def _simulate(cfg):
    if cfg.adversary is None:
        raise UsageError("simulate needs --adversary; " + _usage_forms())
    probe_T = cfg.T
    if probe_T is None:
        head = cfg.adversary.partition(":")[0]
        if head not in ("bits", "file"):
            raise UsageError("simulate needs --T for this adversary")
        probe_T = parse_adversary(cfg.adversary)().T
    player = policies.make_policy(cfg.policy, probe_T, cfg.eta)
    costs = parse_adversary(cfg.adversary, player, cfg.seed)(probe_T)
    tr = engine.play(player, costs, seed=cfg.seed)
    if cfg.format == "csv":
        _emit(cfg, tr.to_csv())
    else:
        _emit(cfg, tr.to_json())
    return EXIT_OK


def _worstcase(cfg):
    T = _need_T(cfg)
    player = policies.make_policy(cfg.policy, T, cfg.eta)
    if not isinstance(player, policies.GapPolicy):
        raise UsageError("worstcase needs a gap-based policy (not mwu)")
    table = adv.worst_case_table(player)
    seq = adv.worst_case_sequence(player, table=table)
    bits = "".join("1" if a == 1.0 else "0" for a in seq.l1.tolist())
    if cfg.sequence_output:
        Path(cfg.sequence_output).write_text(seq.to_csv())
    if cfg.format == "csv":
        _emit(cfg, _rows_to_csv(["policy", "T", "V00", "sequence"],
                                [[player.label, T, float(table.value), bits]]))
    else:
        _emit(cfg, json.dumps({"policy": player.label, "T": T, "V00": float(table.value),
                               "bound": engine.regret_bound(T), "sequence": bits}))
    return EXIT_OK


def _tables(cfg):
    T = _need_T(cfg)
    tables = policies.build_cover_tables(T)
    if cfg.format == "bin":
        _emit(cfg, policies.tables_to_bytes(tables), binary=True)
    elif cfg.format == "json":
        _emit(cfg, policies.tables_to_json(tables))
    else:
        raise UsageError("tables supports --format json or bin")
    return EXIT_OK


def _verify(cfg):
    T = cfg.T if cfg.T is not None else (4096 if cfg.full else 64)
    try:
        reports = suite.run(T, full=cfg.full, trials=cfg.trials)
    except InvariantViolation as exc:
        reports = [oracles.report("invariant", T, None, str(exc), None, False)]
    _emit(cfg, oracles.dumps_reports(reports))
    return EXIT_OK if all(r["pass"] for r in reports) else EXIT_VERIFY


def bench_policy(player, T: int, seed: int = 0) -> dict:
    """Per-round decision latency over one game against uniform binary costs.

    A short warm-up game runs first.  Total game time is measured without
    per-call clocks and averaged over ``ceil(10^6 / T)`` repeated games, so
    every horizon is timed over roughly the same number of rounds and sees
    the same amount of scheduler noise.
    """
    bits = adv.make_rng(seed).integers(0, 2, size=T).astype(float)
    engine.play_stream(player, bits[:1000], 1.0 - bits[:1000])
    s = engine.play_stream(player, bits, 1.0 - bits, record_latency=True)
    reps = -(-1_000_000 // T)
    total = sum(engine.play_stream(player, bits, 1.0 - bits).elapsed for _ in range(reps)) / reps
    lat = s.latencies_ns
    return {"T": T, "median_ns": float(np.median(lat)), "p90_ns": float(np.percentile(lat, 90)),
            "mean_ns": float(lat.mean()), "total_s": total, "per_round_s": total / T,
            "regret": s.regret}


def _bench(cfg):
    grid = BENCH_GRID if cfg.grid or cfg.T is None else (int(cfg.T),)
    seed = 0 if cfg.seed is None else cfg.seed
    rows = [bench_policy(policies.make_policy(cfg.policy, T, cfg.eta), T, seed) for T in grid]
    if cfg.format == "csv":
        keys = list(rows[0])
        _emit(cfg, _rows_to_csv(keys, [[r[k] for k in keys] for r in rows]))
    else:
        _emit(cfg, json.dumps({"policy": cfg.policy, "seed": seed, "rows": rows}))
    return EXIT_OK


def _export(cfg):
    T_max = cfg.T if cfg.T is not None else 4096
    rows = []
    T = 1
    while T <= T_max:
        player = policies.make_policy(cfg.policy, T, cfg.eta)
        if not isinstance(player, policies.GapPolicy):
            raise UsageError("export needs a gap-based policy (not mwu)")
        rows.append([T, engine.regret_bound(T), adv.worst_case_value(player),
                     oracles.passages_exact(T - 1) / 2])
        T *= 2
    header = ["T", "bound", "worst_case", "minimax"]
    if cfg.format == "csv":
        _emit(cfg, _rows_to_csv(header, rows))
    else:
        _emit(cfg, json.dumps({"policy": cfg.policy,
                               "columns": {h: [r[i] for r in rows] for i, h in enumerate(header)}}))
    return EXIT_OK


_HANDLERS = {"simulate": _simulate, "worstcase": _worstcase, "tables": _tables,
             "verify": _verify, "bench": _bench, "export": _export}


def dispatch(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        return _HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except MemoryError as exc:
        print(f"resource error: out of memory ({exc})", file=sys.stderr)
        return EXIT_RESOURCE
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_VERIFY


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twoexperts", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, formats=("json", "csv")):
        p.add_argument("--T", type=int, help="horizon (number of rounds)")
        p.add_argument("--policy", default="erfc", choices=POLICIES)
        p.add_argument("--eta", type=float, help="learning rate for mwu")
        p.add_argument("--seed", type=int)
        p.add_argument("--output", "-o", help="write here instead of stdout")
        p.add_argument("--format", default="json", choices=formats)
        return p

    p = common(sub.add_parser("simulate", help="play one game"))
    p.add_argument("--adversary", required=True, help="; ".join(ADVERSARY_FORMS))
    p = common(sub.add_parser("worstcase", help="exact worst-case regret"))
    p.add_argument("--sequence-output", help="write the witness sequence CSV here")
    common(sub.add_parser("tables", help="serialise Cover's tables"), formats=("json", "bin"))
    p = common(sub.add_parser("verify", help="run the oracle suite"))
    p.add_argument("--full", action="store_true", help="full tier (T up to 4096)")
    p.add_argument("--trials", type=int, help="Monte Carlo sample size")
    p = common(sub.add_parser("bench", help="per-round latency"))
    p.add_argument("--grid", action="store_true", help="T in 1e3, 1e4, 1e5, 1e6")
    common(sub.add_parser("export", help="regret-vs-T curve data"))
    return parser


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(command=ns.command, T=ns.T, policy=ns.policy, eta=ns.eta,
                     adversary=getattr(ns, "adversary", None), seed=ns.seed,
                     trials=getattr(ns, "trials", None),
                     output=ns.output, format=ns.format, full=getattr(ns, "full", False),
                     grid=getattr(ns, "grid", False),
                     sequence_output=getattr(ns, "sequence_output", None))


def main(argv=None) -> int:
    return dispatch(config_from_args(argv))


if __name__ == "__main__":
    sys.exit(main())

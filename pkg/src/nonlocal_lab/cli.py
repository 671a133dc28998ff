"""``nonlocal-lab`` command line.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 resource
limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import games
from .boxes import Box, box_to_csv, is_nonsignaling
from .classical import DEFAULT_ENUM_BUDGET, classical_value_exact
from .errors import InputError, NonlocalLabError, ResourceError, UnknownGame
from .nonsignaling import DEFAULT_LP_VARS, nonsignaling_value
from .protocols import (
    ZeroCommProtocol,
    chsh_qubit_protocol,
    chsh_send_x_protocol,
    load_protocol,
    plus_state_protocol,
)
from .quantum import (
    QuantumStrategy,
    chsh_optimal_strategy,
    correlation_table,
    distributed_dj_oneway,
    hidden_matching_oneway,
    mermin_peres_strategy,
    oneway_to_strategy,
    strategy_parallel_repeat,
    winning_probability,
)
from .reductions import STAGES, reduction_pipeline
from .seesaw import seesaw_lower_bound
from .verify import SUITES, fmt, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3
DEFAULT_SEED = 0


@dataclass(frozen=True)
class RunConfig:
    command: str
    game: str | None = None
    size: int | None = None
    protocol: str | None = None
    strategy: str | None = None
    stages: tuple[str, ...] | None = None
    tol: float = 1e-9
    seed: int = DEFAULT_SEED
    budget_cells: int = games.DEFAULT_CELL_BUDGET
    budget_enum: int = DEFAULT_ENUM_BUDGET
    budget_lp: int = DEFAULT_LP_VARS
    lp_iters: int | None = None
    out: str | None = None
    box: str | None = None
    fmt: str = "text"

    def __post_init__(self) -> None:
        for name in ("budget_cells", "budget_enum", "budget_lp"):
            if getattr(self, name) < 1:
                raise InputError(f"{name.replace('_', '-')} must be positive")
        if self.lp_iters is not None and self.lp_iters < 1:
            raise InputError("lp-iters must be positive")
        if self.tol <= 0:
            raise InputError("tol must be positive")


def data_path(name: str) -> Path:
    return Path(str(resources.files("nonlocal_lab") / "data" / name))


def resolve_game(spec: str, size: int | None = None) -> games.Game:
    """A JSON path, a bundled file stem, or a builtin game name."""
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        return games.load_game(path)
    try:
        return games.builtin(spec, size)
    except UnknownGame:
        bundled = data_path(f"{spec}.json")
        if bundled.exists():
            return games.load_game(bundled)
        raise


BUILTIN_PROTOCOLS = {
    "chsh-send-x": (chsh_send_x_protocol, "chsh"),
    "chsh-qubit": (chsh_qubit_protocol, "chsh"),
    "plus-state": (plus_state_protocol, None),
    "mermin-peres": (lambda: ZeroCommProtocol(mermin_peres_strategy()), "magic-square"),
    "chsh-optimal": (lambda: ZeroCommProtocol(chsh_optimal_strategy()), "chsh"),
}


def resolve_protocol(spec: str):
    if spec in BUILTIN_PROTOCOLS:
        make, game = BUILTIN_PROTOCOLS[spec]
        return make(), game
    return load_protocol(spec), None


def _builtin_quantum(g: games.Game, cfg: RunConfig) -> tuple[str, QuantumStrategy]:
    name = cfg.strategy
    base, _, power = g.name.partition("^")
    n = int(power) if power else 1
    if name is None:
        if base == "magic-square":
            name = "mermin-peres"
        elif base == "chsh":
            name = "chsh-optimal"
        elif base.startswith(("nonlocal-dj", "hidden-matching")):
            name = "ricochet"
        else:
            name = "seesaw"
    if name == "mermin-peres":
        return name, strategy_parallel_repeat(mermin_peres_strategy(), n)
    if name == "chsh-optimal":
        return name, strategy_parallel_repeat(chsh_optimal_strategy(), n)
    if name == "ricochet":
        size = g.shape[2] if base.startswith("nonlocal-dj") else g.shape[0].bit_length() - 1
        proto = distributed_dj_oneway(size) if base.startswith("nonlocal-dj") else hidden_matching_oneway(size)
        return name, strategy_parallel_repeat(oneway_to_strategy(proto), n)
    if name == "seesaw":
        dim = max(2, min(4, g.shape[2]))
        res = seesaw_lower_bound(g, dim, iterations=300, seed=cfg.seed, restarts=10)
        return f"seesaw(d={dim})", res.strategy
    proto = load_protocol(name)
    if not isinstance(proto, ZeroCommProtocol):
        raise InputError("--strategy file must hold a zerocomm protocol")
    return name, proto.strategy


class Report:
    def __init__(self, cfg: RunConfig) -> None:
        self.cfg = cfg
        self.rows: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        self.rows.append((key, value))

    def render(self) -> str:
        if self.cfg.fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            w.writerows((k, _lossless(v)) for k, v in self.rows)
            return buf.getvalue()
        return "".join(f"{k}: {v if isinstance(v, str) else fmt(v)}\n" for k, v in self.rows)


def _lossless(value) -> str:
    """17 significant digits for floats in files; strings and rationals as is."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return value if isinstance(value, str) else fmt(value)


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def write_box(cfg: RunConfig, box: Box) -> None:
    if cfg.box:
        Path(cfg.box).write_text(box_to_csv(box))


def _labels(values) -> str:
    return " ".join(str(v) for v in values)


def cmd_value(kind: str, cfg: RunConfig) -> int:
    if cfg.game is None:
        raise InputError("--game is required")
    g = resolve_game(cfg.game, cfg.size)
    rep = Report(cfg)
    rep.add("game", g.name)
    rep.add("kind", kind)
    if kind == "classical":
        value, strat = classical_value_exact(g, budget=cfg.budget_enum)
        rep.add("value", value)
        rep.add("alice", _labels(g.answers_a[a] for a in strat.alice))
        rep.add("bob", _labels(g.answers_b[b] for b in strat.bob))
    elif kind == "quantum":
        name, qs = _builtin_quantum(g, cfg)
        rep.add("value", winning_probability(g, qs))
        rep.add("strategy", name)
        rep.add("dimensions", f"{qs.d_a}x{qs.d_b}")
        write_box(cfg, correlation_table(qs, g))
    else:
        value, box = nonsignaling_value(g, budget=cfg.budget_lp, max_iter=cfg.lp_iters)
        report = is_nonsignaling(box, max(cfg.tol, 1e-7))
        rep.add("value", value)
        rep.add("nonsignaling_violation", f"{report.violation:.3g}")
        write_box(cfg, box)
    emit(cfg, rep.render())
    return EXIT_OK


def cmd_reduce(cfg: RunConfig) -> int:
    if cfg.protocol is None:
        raise InputError("--protocol is required")
    proto, default_game = resolve_protocol(cfg.protocol)
    game_spec = cfg.game or default_game
    if game_spec is None:
        raise InputError("--game is required for this protocol")
    g = resolve_game(game_spec, cfg.size)
    rows = reduction_pipeline(proto, g, cfg.stages)
    header = ["stage", "communication", "epr_pairs", "success", "check", "note"]
    show = _lossless if cfg.fmt == "csv" else fmt
    table = [
        [r.name, f"{r.communication} {r.unit}", str(r.epr_pairs), show(r.success), "ok" if r.check else "FAIL", r.note]
        for r in rows
    ]
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(table)
        text = buf.getvalue()
    else:
        widths = [max(len(row[i]) for row in [header] + table) for i in range(len(header))]
        text = "".join(
            "  ".join(cell.ljust(wd) for cell, wd in zip(row, widths)).rstrip() + "\n" for row in [header] + table
        )
    emit(cfg, text)
    return EXIT_OK if all(r.check for r in rows) else EXIT_VERIFY


def cmd_verify(suite: str, cfg: RunConfig) -> int:
    checks = run_suite(suite, cfg.seed)
    lines = [c.line() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{suite}: {len(checks) - failed}/{len(checks)} passed")
    emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if not failed else EXIT_VERIFY


def cmd_decay(kind: str, max_n: int, cfg: RunConfig) -> int:
    """CSV of n against the value of the n-fold parallel repetition."""
    if cfg.game is None:
        raise InputError("--game is required")
    if max_n < 1:
        raise InputError("--max-n must be at least 1")
    base = resolve_game(cfg.game, cfg.size)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "kind", "value"])
    for n in range(1, max_n + 1):
        g = games.parallel_repeat(base, n, budget=cfg.budget_cells)
        if kind == "classical":
            value, _ = classical_value_exact(g, budget=cfg.budget_enum)
            w.writerow([n, kind, f"{value.numerator}/{value.denominator}"])
        else:
            _, qs = _builtin_quantum(g, cfg)
            w.writerow([n, kind, format(winning_probability(g, qs), ".17g")])
    emit(cfg, buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--budget-cells", type=int, default=games.DEFAULT_CELL_BUDGET)
    common.add_argument("--budget-enum", type=int, default=DEFAULT_ENUM_BUDGET)
    common.add_argument("--budget-lp", type=int, default=DEFAULT_LP_VARS, help="max LP variables")
    common.add_argument("--lp-iters", type=int, default=None)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", dest="fmt", choices=("text", "csv"), default="text")

    parser = argparse.ArgumentParser(prog="nonlocal-lab", description="Values and reductions for non-local games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", parents=[common], help="classical, quantum or non-signaling value of a game")
    p.add_argument("kind", choices=("classical", "quantum", "nonsignaling"))
    p.add_argument("--game", required=True, help="game JSON path or builtin name")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--strategy", default=None,
                   help="mermin-peres, chsh-optimal, ricochet, seesaw or a zerocomm protocol JSON path")
    p.add_argument("--box", default=None, help="write the witness box as CSV")

    p = sub.add_parser("reduce", parents=[common], help="run a protocol through the reduction stages")
    p.add_argument("--protocol", required=True, help="protocol JSON path or builtin name")
    p.add_argument("--game", default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--stages", default=None, help=f"comma-separated subset of {','.join(STAGES)}; empty for none")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=SUITES)

    p = sub.add_parser("decay", parents=[common], help="CSV of repetition count against value")
    p.add_argument("--game", required=True)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--kind", choices=("classical", "quantum"), default="classical")
    p.add_argument("--max-n", type=int, default=2)
    p.add_argument("--strategy", default=None)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    stages = getattr(args, "stages", None)
    if stages is not None:
        stages = tuple(s.strip() for s in stages.split(",") if s.strip())
    return RunConfig(
        command=args.command,
        game=getattr(args, "game", None),
        size=getattr(args, "size", None),
        protocol=getattr(args, "protocol", None),
        strategy=getattr(args, "strategy", None),
        stages=stages,
        tol=args.tol,
        seed=args.seed,
        budget_cells=args.budget_cells,
        budget_enum=args.budget_enum,
        budget_lp=args.budget_lp,
        lp_iters=args.lp_iters,
        out=args.out,
        box=getattr(args, "box", None),
        fmt=args.fmt,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "value":
            return cmd_value(args.kind, cfg)
        if args.command == "reduce":
            return cmd_reduce(cfg)
        if args.command == "verify":
            return cmd_verify(args.suite, cfg)
        return cmd_decay(args.kind, args.max_n, cfg)
    except (InputError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NonlocalLabError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())

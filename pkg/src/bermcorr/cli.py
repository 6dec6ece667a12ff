"""Command line front door.

``bermcorr price`` prices every trade with every requested model and writes
``results.csv`` and ``diagnostics.json`` into the output directory.
``bermcorr diff`` compares two results files row by row.

Exit codes: 0 success, 1 diff tolerance exceeded, 2 usage or input format
error, 3 missing market data, 4 domain error, 5 model or grid error,
6 diff structural error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .analytics import DEFAULT_POINTS, DEFAULT_WIDTH
from .engine import MODELS, MarketData, PricingSettings, applicable_to, price_trade, sweep_offsets
from .errors import BermcorrError, DomainError, GridError, InputFormatError, MarketDataError, ModelError
from .oracle import McSpec
from .trades import load_trades

COLUMNS = ("trade_id", "kind", "model", "strike", "pv", "pv_per_annuity", "std_error", "runtime_ms")

EXIT_DIFF = 1
EXIT_CODES = (
    (InputFormatError, 2),
    (MarketDataError, 3),
    (DomainError, 4),
    (ModelError, 5),
    (GridError, 5),
)
EXIT_STRUCTURE = 6


class StructuralError(BermcorrError):
    """Two results files do not have the same row keys."""


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, StructuralError):
        return EXIT_STRUCTURE
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 2


@dataclass(frozen=True)
class RunConfig:
    market_path: Path
    vols_path: Path
    corr_path: Path
    trades_path: Path
    models: tuple
    output_path: Path
    strike_sweep: Optional[tuple] = None
    points: int = DEFAULT_POINTS
    width: float = DEFAULT_WIDTH
    paths: int = 100_000
    seed: int = 0
    workers: int = 1
    timings: bool = False

    def __post_init__(self):
        if not self.models:
            raise DomainError("at least one model is required")
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise DomainError(f"unknown model(s) {', '.join(bad)}; expected a subset of {', '.join(MODELS)}")
        if self.strike_sweep is not None and not self.strike_sweep[2] > 0.0:
            raise DomainError("sweep step must be positive")

    def settings(self) -> PricingSettings:
        return PricingSettings(self.points, self.width, McSpec(self.paths, self.seed))


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _job(trade, offset, model, market, settings):
    t0 = time.perf_counter()
    try:
        res = price_trade(trade, market, model, settings, offset)
    except BermcorrError as exc:
        raise type(exc)(f"trade {trade.id} ({model}): {exc}") from exc
    strike = trade.strike(market.curve, offset)
    return trade, model, strike, res, (time.perf_counter() - t0) * 1e3


def run(config: RunConfig) -> int:
    """Price the batch and write the outputs; returns the exit status."""
    market = MarketData.from_files(config.market_path, config.vols_path, config.corr_path)
    trades = load_trades(config.trades_path)
    settings = config.settings()
    offsets = [None] if config.strike_sweep is None else sweep_offsets(*config.strike_sweep)

    jobs, skipped = [], []
    for trade in trades:
        for model in config.models:
            if applicable_to(trade, model):
                jobs.extend((trade, off, model) for off in offsets)
            else:
                skipped.append({"trade_id": trade.id, "kind": trade.kind, "model": model})

    def work(job):
        return _job(*job, market, settings)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            outcomes = list(pool.map(work, jobs))
    else:
        outcomes = [work(j) for j in jobs]

    rows, diags = [], []
    for out in outcomes:
        trade, model, strike, res, ms = out
        rows.append((trade.id, strike, model, trade.kind, res, ms))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))

    out_dir = Path(config.output_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for tid, strike, model, kind, res, ms in rows:
            writer.writerow([
                tid, kind, model, _fmt(strike), _fmt(res.pv), _fmt(res.pv_per_annuity),
                _fmt(res.std_error), _fmt(ms) if config.timings else "",
            ])
            diags.append({
                "trade_id": tid, "kind": kind, "model": model, "strike": strike,
                "annuity": res.annuity, "std_error": res.std_error, "diagnostics": res.diagnostics,
            })
    skipped.sort(key=lambda s: (s["trade_id"], s["model"]))
    payload = {"results": diags, "skipped": skipped}
    with open(out_dir / "diagnostics.json", "w") as fh:
        json.dump(_json_safe(payload), fh, indent=1)
        fh.write("\n")
    return 0


# -- diff ---------------------------------------------------------------------

def _read_results(path, ignore_model):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != COLUMNS:
            raise InputFormatError(f"{path}:1: expected header {','.join(COLUMNS)}")
        out = {}
        for n, row in enumerate(reader, start=2):
            key = (row["trade_id"], row["strike"]) if ignore_model else (row["trade_id"], row["strike"], row["model"])
            if key in out:
                raise StructuralError(f"{path}:{n}: duplicate row key {key}")
            try:
                out[key] = (float(row["pv"]), row)
            except ValueError:
                raise InputFormatError(f"{path}:{n}: pv is not a number: {row['pv']!r}") from None
        return out


def relative_diff(a: float, b: float) -> float:
    """Signed ``(b - a) / |a|``; absolute difference when ``a`` is zero."""
    if a == b:
        return 0.0
    return (b - a) / abs(a) if a != 0.0 else b - a


def diff(path_a, path_b, tolerance: float, ignore_model: bool = False, stream=None) -> int:
    """Print per-row signed relative differences; 1 when any exceeds ``tolerance``."""
    a = _read_results(path_a, ignore_model)
    b = _read_results(path_b, ignore_model)
    if a.keys() != b.keys():
        only_a = sorted(a.keys() - b.keys())
        only_b = sorted(b.keys() - a.keys())
        raise StructuralError(f"row keys differ: only in A {only_a[:5]}, only in B {only_b[:5]}")
    failed = 0
    writer = csv.writer(sys.stdout if stream is None else stream, lineterminator="\n")
    writer.writerow(("trade_id", "strike", "model_a", "model_b", "pv_a", "pv_b", "rel_diff", "status"))
    for key in sorted(a, key=lambda k: (k[0], float(k[1]), k[2:])):
        (pa, ra), (pb, rb) = a[key], b[key]
        d = relative_diff(pa, pb)
        bad = abs(d) > tolerance
        failed += bad
        writer.writerow((key[0], key[1], ra["model"], rb["model"], _fmt(pa), _fmt(pb), _fmt(d), "FAIL" if bad else "ok"))
    if failed:
        print(f"{failed} row(s) exceed tolerance {tolerance:g}", file=sys.stderr)
        return EXIT_DIFF
    return 0


# -- argument parsing ---------------------------------------------------------

def _sweep(text):
    try:
        lo, hi, step = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo,hi,step") from None
    return lo, hi, step


def _models(text):
    return tuple(m.strip() for m in text.split(",") if m.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bermcorr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="price a batch of trades")
    p.add_argument("--market", required=True, type=Path, help="discount curve JSON")
    p.add_argument("--vols", required=True, type=Path, help="normal vol surface CSV")
    p.add_argument("--corr", required=True, type=Path, help="correlation config JSON")
    p.add_argument("--trades", required=True, type=Path, help="trades JSON")
    p.add_argument("--models", default="integral", type=_models,
                   help=f"comma separated subset of {','.join(MODELS)}")
    p.add_argument("--sweep", type=_sweep, metavar="LO,HI,STEP",
                   help="price at ATM+offset for each offset in the range")
    p.add_argument("--grid", type=int, default=DEFAULT_POINTS, help="quadrature/lattice points")
    p.add_argument("--width", type=float, default=DEFAULT_WIDTH, help="grid half-width in stdevs")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="price jobs on this many threads")
    p.add_argument("--timings", action="store_true", help="fill the runtime_ms column")
    p.add_argument("--out", required=True, type=Path, help="output directory")

    d = sub.add_parser("diff", help="compare two results.csv files")
    d.add_argument("a", type=Path)
    d.add_argument("b", type=Path)
    d.add_argument("--tol", type=float, default=1e-4, help="relative tolerance")
    d.add_argument("--ignore-model", action="store_true",
                   help="match rows on (trade_id, strike) only, e.g. mm against lattice")
    return parser


def _glue_sweep(argv):
    # "--sweep -0.02,0.06,0.005" would otherwise be read as an unknown option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--sweep":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--sweep={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_sweep(argv))
    try:
        if args.command == "price":
            config = RunConfig(
                args.market, args.vols, args.corr, args.trades, args.models, args.out,
                args.sweep, args.grid, args.width, args.paths, args.seed, args.workers, args.timings,
            )
            return run(config)
        return diff(args.a, args.b, args.tol, args.ignore_model)
    except BermcorrError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

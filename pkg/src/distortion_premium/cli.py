"""Command-line front end.

Subcommands::

    price     premia of the contracts in a loss file
    identify  fit a distortion density to observed prices
    robust    robust premia over a Wasserstein ball
    distance  Wasserstein distance between two loss files, contract by contract
    simulate  Gamma-loss identification experiment

Results are JSON lines ordered by contract id.  Exit codes: 0 success,
2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ambiguity import robust_premium_r1, robust_premium_rp
from .dist_core import CsvFormatError, read_losses_csv, wasserstein
from .distortion import distortion_from_json, price_batch
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DisutilityOverflowError,
    DomainError,
    InternalError,
    NoFiniteBoundError,
    UnboundedPremiumError,
)
from .identification import identify, simulate_study

DEFAULT_SEED = 20240517
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
DENSITY_GRID = 1001

_INPUT_ERRORS = (DomainError, ConfigurationError, OSError, json.JSONDecodeError)
_NUMERIC_ERRORS = (ConvergenceError, UnboundedPremiumError, NoFiniteBoundError, DisutilityOverflowError, InternalError, FloatingPointError)


class _InputError(Exception):
    pass


def _load_distortion(arg: str | None):
    if arg is None:
        raise _InputError("--distortion is required")
    text = arg.strip()
    if not text.startswith("{"):
        path = Path(arg)
        if not path.is_file():
            raise _InputError(f"--distortion is neither JSON nor a readable file: {arg!r}")
        text = path.read_text()
    return distortion_from_json(text)


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise _InputError(f"missing required option(s): {', '.join(missing)}")


def _read_prices(path: str, ids: list[str]) -> list[float]:
    """Prices as ``contract_id,price`` rows, or a single column in contract order."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells):
                continue
            if [c.lower() for c in cells] in (["price"], ["contract_id", "price"]):
                continue
            if len(cells) not in (1, 2):
                raise CsvFormatError(f"expected 1 or 2 columns, got {len(cells)}", lineno)
            try:
                value = float(cells[-1])
            except ValueError:
                raise CsvFormatError(f"not a number: {cells[-1]!r}", lineno) from None
            if not math.isfinite(value):
                raise CsvFormatError("non-finite price", lineno)
            rows.append((cells[0] if len(cells) == 2 else None, value))
    if any(cid is not None for cid, _ in rows):
        table = dict(rows)
        missing = [i for i in ids if i not in table]
        if missing:
            raise _InputError(f"no price for contract(s) {missing}")
        return [table[i] for i in ids]
    if len(rows) != len(ids):
        raise _InputError(f"{len(ids)} contracts but {len(rows)} prices")
    return [v for _, v in rows]


class _Output:
    def __init__(self, path: str | None):
        self.path = path
        self.lines: list[str] = []

    def emit(self, obj: dict):
        self.lines.append(json.dumps(obj, sort_keys=True, allow_nan=False))

    def close(self):
        text = "".join(line + "\n" for line in self.lines)
        if self.path is None:
            sys.stdout.write(text)
        else:
            Path(self.path).write_text(text)


def _write_density_csv(path: Path, h):
    v = np.linspace(0.0, 1.0, DENSITY_GRID)
    hv = np.asarray(h.h(v), dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["v", "h"])
        for a, b in zip(v, hv):
            w.writerow([repr(float(a)), repr(float(b))])


def _density_path(args, suffix: str = "") -> Path | None:
    if getattr(args, "density_csv", None):
        base = Path(args.density_csv)
        return base if not suffix else base.with_name(f"{base.stem}{suffix}{base.suffix}")
    if args.output:
        out = Path(args.output)
        return out.with_name(f"{out.stem}{suffix}.density.csv")
    return None


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_price(args) -> int:
    _require(args, "input")
    h = _load_distortion(args.distortion)
    contracts = read_losses_csv(args.input)
    quotes = price_batch(contracts.values(), h, workers=args.workers)
    out = _Output(args.output)
    for cid, quote in zip(contracts, quotes):
        out.emit({"contract_id": cid, **quote.to_json()})
    out.close()
    return EXIT_OK


def cmd_identify(args) -> int:
    _require(args, "input", "prices")
    contracts = read_losses_csv(args.input)
    ids = list(contracts)
    prices = _read_prices(args.prices, ids)
    size = args.size if args.size is not None else (10 if args.basis == "step" else 5)
    fit = identify(list(contracts.values()), prices, args.basis, size)
    out = _Output(args.output)
    out.emit(fit.to_json())
    out.close()
    path = _density_path(args)
    if path is not None:
        _write_density_csv(path, fit.fitted_density)
    return EXIT_OK


def cmd_robust(args) -> int:
    _require(args, "input", "epsilon")
    h = _load_distortion(args.distortion)
    r = args.order
    contracts = read_losses_csv(args.input)
    out = _Output(args.output)
    for cid, F in contracts.items():
        if r == 1:
            res = robust_premium_r1(F, h, args.epsilon)
        else:
            res = robust_premium_rp(F, h, args.epsilon, r)
        out.emit({"contract_id": cid, **res.to_json(verbose=args.verbose)})
    out.close()
    return EXIT_OK


def cmd_distance(args) -> int:
    _require(args, "input", "other")
    a = read_losses_csv(args.input)
    b = read_losses_csv(args.other)
    if set(a) != set(b):
        raise _InputError("the two files must contain the same contract ids")
    out = _Output(args.output)
    for cid in a:
        out.emit({"contract_id": cid, "order": args.order, "distance": wasserstein(a[cid], b[cid], args.order)})
    out.close()
    return EXIT_OK


def _parse_bases(args) -> list[tuple[str, int]]:
    if args.bases:
        out = []
        for item in args.bases.split(","):
            kind, _, size = item.partition(":")
            if kind not in ("step", "spline") or not size.isdigit():
                raise _InputError(f"bad basis entry {item!r}; expected kind:size")
            out.append((kind, int(size)))
        return out
    size = args.size if args.size is not None else (10 if args.basis == "step" else 5)
    return [(args.basis, size)]


def cmd_simulate(args) -> int:
    if args.m < 1:
        raise _InputError("--m must be at least 1")
    h = _load_distortion(args.distortion)
    bases = _parse_bases(args)
    res = simulate_study(args.m, args.n, h, bases, args.seed, (args.shape_min, args.shape_max), args.scale)
    out = _Output(args.output)
    norm_sq = float(np.sum(np.square(res.prices)))
    for name, fit in res.fits.items():
        row = fit.to_json()
        row["relative_objective"] = fit.objective / norm_sq if norm_sq > 0 else fit.objective
        out.emit(row)
        path = _density_path(args, "." + name.replace(":", "-"))
        if path is not None:
            _write_density_csv(path, fit.fitted_density)
    out.emit({"summary": True, "m": args.m, "n": args.n, "seed": args.seed, "price_norm_sq": norm_sq, "distortion": h.to_json()})
    out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distortion-premium", description="Distortion premia, robust premia and density identification.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, distortion=True):
        p.add_argument("--output", help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
        if distortion:
            p.add_argument("--distortion", help="distortion as JSON text or path to a JSON file")

    p = sub.add_parser("price", help="premia of each contract")
    p.add_argument("--input", help="loss CSV")
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("identify", help="fit a distortion density to prices")
    p.add_argument("--input", help="loss CSV with contract_id,loss rows")
    p.add_argument("--prices", help="price CSV (contract_id,price or one column)")
    p.add_argument("--basis", choices=("step", "spline"), default="step")
    p.add_argument("--size", type=int, help="steps l (step) or knot intervals L (spline)")
    p.add_argument("--density-csv", help="path for the (v, h) grid")
    common(p, distortion=False)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("robust", help="robust premia over a Wasserstein ball")
    p.add_argument("--input")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--order", type=float, default=1.0, help="ball order r (default 1)")
    p.add_argument("--verbose", action="store_true", help="also report the base premium and ε||h||_q^q")
    common(p)
    p.set_defaults(func=cmd_robust)

    p = sub.add_parser("distance", help="Wasserstein distance per contract")
    p.add_argument("--input")
    p.add_argument("--other")
    p.add_argument("--order", type=float, default=1.0)
    common(p, distortion=False)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("simulate", help="Gamma-loss identification experiment")
    p.add_argument("--m", type=int, default=50, help="number of contracts (default 50)")
    p.add_argument("--n", type=int, default=1000, help="sample size (default 1000)")
    p.add_argument("--shape-min", type=float, default=1.0)
    p.add_argument("--shape-max", type=float, default=5.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--basis", choices=("step", "spline"), default="step")
    p.add_argument("--size", type=int)
    p.add_argument("--bases", help="comma-separated kind:size list, e.g. step:10,spline:5")
    p.add_argument("--density-csv", help="path prefix for the (v, h) grids")
    common(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (_InputError, *_INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

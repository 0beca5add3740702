"""Command line benchmarks and roundtrip check.

Subcommands
-----------
bench-quant   mean ΔH/H and header size of the quantizer over random distributions
bench-tans    mean ΔH/H of tANS automata built from quantized distributions
roundtrip     full pipeline on a distribution file, verified end to end

Exit codes: 0 ok, 1 usage, 2 verification mismatch, 3 decode error.
Set ``ANSPROB_WORKERS`` to run trials in that many processes; results do not
depend on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .automaton_analysis import (StationaryError, automaton_delta_h, build_model,
                                 mean_bits_per_symbol, stationary)
from .header_codec import (HeaderDecodeError, header_cost_bits, payload_bits,
                           stream_decode_header, stream_encode_header)
from .probmodel import as_probabilities, entropy, kl_divergence, mdl_penalty, random_simplex
from .quantizer import DeformParams, quantize, reconstruct
from .tans import SPREAD_KINDS, TansError, build_coder, decode, encode, make_spread

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_DECODE = 0, 1, 2, 3
WORKERS_ENV = "ANSPROB_WORKERS"
MAX_K = 1 << 20

QUANT_COLUMNS = ["K", "w", "o", "trials", "mean_dh_rel", "mean_dh_bits",
                 "header_bits_exact", "header_bits_estimate", "header_bits_stream",
                 "frame", "mdl_total"]
TANS_COLUMNS = ["K", "L", "w", "o", "spread", "trials", "excluded", "mean_dh_rel"]
ROUNDTRIP_COLUMNS = ["D", "K", "L", "w", "o", "spread", "symbols", "entropy",
                     "header_bits", "analytic_bits_per_symbol", "empirical_bits_per_symbol",
                     "delta_h", "mdl_total", "ok"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _min_count(o: float) -> int:
    return 1 if o == 0 else 0


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer")


def _run_trials(fn, jobs):
    workers = _workers()
    if workers == 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs), chunksize=8))


# ---------------------------------------------------------------------------
# bench-quant


def _quant_trial(D, seed, trial, Ks, ws, o, measure_header):
    p = random_simplex(D, (seed, trial))
    h = entropy(p)
    out = []
    for K in Ks:
        for w in ws:
            Q = quantize(p, K, w, min_count=_min_count(o))
            dh = kl_divergence(p, reconstruct(Q, DeformParams(w, o)))
            bits = payload_bits(stream_encode_header(Q)) if measure_header else math.nan
            out.append((dh / h if h > 0 else dh, dh, bits))
    return out


def cmd_bench_quant(args) -> list[dict]:
    """Rows of (K, w, o, mean ΔH/H, header bits) averaged over random distributions."""
    Ks, ws = args.sum, args.power
    jobs = [(args.alphabet, args.seed, t, Ks, ws, args.offset, t < args.header_trials)
            for t in range(args.trials)]
    results = _run_trials(_quant_trial, jobs)
    rows = []
    n_header = min(args.trials, args.header_trials)
    for c, (K, w) in enumerate((K, w) for K in Ks for w in ws):
        rel = math.fsum(r[c][0] for r in results) / args.trials
        bits = math.fsum(r[c][1] for r in results) / args.trials
        stream = (math.fsum(r[c][2] for r in results[:n_header]) / n_header
                  if n_header else math.nan)
        cost = header_cost_bits(args.alphabet, K)
        base = {"K": K, "w": w, "o": args.offset, "trials": args.trials,
                "mean_dh_rel": rel, "mean_dh_bits": bits,
                "header_bits_exact": cost.exact, "header_bits_estimate": cost.estimate,
                "header_bits_stream": stream}
        if not args.frames:
            rows.append({**base, "frame": "", "mdl_total": ""})
        for N in args.frames:
            rows.append({**base, "frame": N,
                         "mdl_total": mdl_penalty(cost.exact, N, bits).total})
    return rows


# ---------------------------------------------------------------------------
# bench-tans


def _tans_trial(D, L, seed, trial, Ks, ws, o, kinds):
    p = random_simplex(D, (seed, trial))
    out = []
    for K in Ks:
        for w in ws:
            Q = quantize(p, K, w, min_count=_min_count(o))
            q = reconstruct(Q, DeformParams(w, o))
            Ls = quantize(q, L, 1.0, min_count=1)
            for kind in kinds:
                # the decoder only knows q, so tuned spreads use it
                try:
                    out.append(automaton_delta_h(p, make_spread(kind, Ls, L, q)))
                except StationaryError:
                    out.append(None)
    return out


def cmd_bench_tans(args) -> list[dict]:
    """Rows of (K, spread kind, mean ΔH/H) for automata evaluated on the true source."""
    Ks, ws, kinds, L = args.sum, args.power, args.spreads, args.states
    if any(K > L for K in Ks):
        raise UsageError("bench-tans needs every K <= L")
    if args.alphabet > L:
        raise UsageError("alphabet larger than the number of states")
    jobs = [(args.alphabet, L, args.seed, t, Ks, ws, args.offset, kinds)
            for t in range(args.trials)]
    results = _run_trials(_tans_trial, jobs)
    rows = []
    combos = [(K, w, kind) for K in Ks for w in ws for kind in kinds]
    for c, (K, w, kind) in enumerate(combos):
        vals = [r[c] for r in results if r[c] is not None]
        rows.append({"K": K, "L": L, "w": w, "o": args.offset, "spread": kind,
                     "trials": len(vals), "excluded": args.trials - len(vals),
                     "mean_dh_rel": math.fsum(vals) / len(vals) if vals else math.nan})
    return rows


# ---------------------------------------------------------------------------
# roundtrip


class Mismatch(Exception):
    pass


def load_distribution(path) -> np.ndarray:
    """Read one probability per line; blank lines and ``#`` comments are skipped."""
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(float(line))
    return as_probabilities(values)


def cmd_roundtrip(args) -> list[dict]:
    """Quantize, code the header, build tANS, code N symbols, and verify everything."""
    try:
        p = load_distribution(args.distribution)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load distribution: {exc}")
    K, w, o, L = args.sum[0], args.power[0], args.offset, args.states
    if p.size > L:
        raise UsageError("alphabet larger than the number of states")
    N = args.frames[0] if args.frames else 100_000

    Q = quantize(p, K, w, min_count=_min_count(o))
    if args.header:
        with open(args.header, "rb") as fh:
            header = fh.read()
    else:
        header = stream_encode_header(Q)
    if args.save_header:
        with open(args.save_header, "wb") as fh:
            fh.write(header)
    Q_dec = stream_decode_header(header)
    if not np.array_equal(Q_dec, Q):
        raise Mismatch("decoded header differs from the quantized counts")

    q = reconstruct(Q_dec, DeformParams(w, o))
    Ls = quantize(q, L, 1.0, min_count=1)
    table = make_spread(args.spread, Ls, L, q)
    coder = build_coder(table)

    rng = np.random.default_rng(args.seed)
    symbols = rng.choice(p.size, size=N, p=p).tolist()
    bits, state = encode(coder, symbols)
    n_bits = len(bits)
    if decode(coder, bits, state, N) != symbols:
        raise Mismatch("tANS decode differs from the input symbols")

    h = entropy(p)
    if p.size == 1:
        analytic = 0.0
    else:
        model = build_model(table, p)
        try:
            analytic = mean_bits_per_symbol(model, stationary(model))
        except StationaryError as exc:
            print(f"ansprob: no analytic rate: {exc}", file=sys.stderr)
            analytic = math.nan
    header_bits = 8 * len(header)
    delta_h = max(0.0, analytic - h) if not math.isnan(analytic) else math.nan
    return [{"D": p.size, "K": K, "L": L, "w": w, "o": o, "spread": args.spread,
             "symbols": N, "entropy": h, "header_bits": header_bits,
             "analytic_bits_per_symbol": analytic,
             "empirical_bits_per_symbol": n_bits / N if N else 0.0,
             "delta_h": delta_h,
             "mdl_total": mdl_penalty(header_bits, N, delta_h).total, "ok": True}]


# ---------------------------------------------------------------------------
# output and entry point


def format_rows(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        clean = [{c: (None if isinstance(r[c], float) and math.isnan(r[c]) else r[c])
                  for c in columns} for r in rows]
        return json.dumps(clean, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: r[c] for c in columns})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ansprob", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alphabet", type=int, default=256, help="alphabet size D")
    common.add_argument("--states", type=int, default=2048, help="tANS states L")
    common.add_argument("--offset", type=float, default=0.15, help="reconstruction offset o")
    common.add_argument("--seed", type=int, default=0, help="master seed; trial t uses (seed, t)")
    common.add_argument("--frames", type=int, nargs="+", default=[],
                        help="frame lengths N (roundtrip: number of symbols)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    bq = sub.add_parser("bench-quant", parents=[common], help="quantizer ΔH/H and header size")
    bq.add_argument("--sum", type=int, nargs="+", default=[256, 512, 1024, 2048],
                    help="quantization sums K")
    bq.add_argument("--power", type=float, nargs="+", default=[1.0, 1.1, 1.2, 1.3],
                    help="deformation powers w")
    bq.add_argument("--trials", type=int, default=1000, help="random distributions")
    bq.add_argument("--header-trials", type=int, default=100,
                    help="trials whose headers are actually stream-coded")

    bt = sub.add_parser("bench-tans", parents=[common], help="tANS automaton ΔH/H per spread")
    bt.add_argument("--sum", type=int, nargs="+", default=[256, 512, 1024, 2048],
                    help="quantization sums K")
    bt.add_argument("--power", type=float, nargs="+", default=[1.0, 1.1, 1.2, 1.3],
                    help="deformation powers w")
    bt.add_argument("--trials", type=int, default=1000, help="random distributions")
    bt.add_argument("--spreads", nargs="+", default=["fast", "tuned-sorted", "tuned-bucketed"],
                    choices=SPREAD_KINDS)

    rt = sub.add_parser("roundtrip", parents=[common], help="verify the full pipeline")
    rt.add_argument("distribution", help="text file, one probability per line")
    rt.add_argument("--sum", type=int, nargs=1, default=[2048], help="quantization sum K")
    rt.add_argument("--power", type=float, nargs=1, default=[1.2], help="deformation power w")
    rt.add_argument("--spread", choices=SPREAD_KINDS, default="tuned-sorted")
    rt.add_argument("--header", help="decode this header file instead of a fresh one")
    rt.add_argument("--save-header", help="write the header bytes here")
    return parser


def _validate(args):
    if args.alphabet < 1:
        raise UsageError("--alphabet must be >= 1")
    if args.states < 1 or args.states & (args.states - 1):
        raise UsageError("--states must be a power of two")
    if args.offset < 0:
        raise UsageError("--offset must be >= 0")
    if any(K < 1 or K > MAX_K for K in args.sum):
        raise UsageError(f"--sum values must lie in [1, {MAX_K}]")
    if any(not w > 0 for w in args.power):
        raise UsageError("--power values must be positive")
    if any(N < 0 for N in args.frames):
        raise UsageError("--frames values must be >= 0")
    if getattr(args, "trials", 1) < 1:
        raise UsageError("--trials must be >= 1")


COMMANDS = {
    "bench-quant": (cmd_bench_quant, QUANT_COLUMNS),
    "bench-tans": (cmd_bench_tans, TANS_COLUMNS),
    "roundtrip": (cmd_roundtrip, ROUNDTRIP_COLUMNS),
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn, columns = COMMANDS[args.command]
    try:
        _validate(args)
        rows = fn(args)
    except UsageError as exc:
        print(f"ansprob: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HeaderDecodeError as exc:
        print(f"ansprob: header decode error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except (Mismatch, TansError) as exc:
        print(f"ansprob: verification failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except ValueError as exc:
        print(f"ansprob: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = format_rows(rows, columns, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

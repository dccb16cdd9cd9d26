"""Command-line front end.

Subcommands: aber (single point), sweep (SNR grid to CSV), discrepancy
(accuracy vs the quadrature reference), bench (timing ratios), selftest
(invariant suite).  Exit codes: 0 success, 1 selftest failure, 2 usage
error, 3 numerical non-convergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

from .aber import AberMethod, TruncationPolicy
from .channel import ChannelParams, Modulation, QApproxVariant
from .harness import (SweepSpec, db_to_linear, run_bench, run_discrepancy,
                      run_selftest, run_sweep, selftest_groups)
from .quad import ConvergenceError, QuadratureSpec

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3
EXIT_IO = 4


class _UsageError(ValueError):
    pass


def _fmt(x) -> str:
    """CSV cell formatting: floats at 17 significant digits."""
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _parse_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError(f"--snr-db-range wants a:b:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise _UsageError(f"--snr-db-range wants numeric a:b:step, got {text!r}") from None
    return start, stop, step


def _parse_expq(text: str | None) -> QApproxVariant | None:
    if text is None:
        return None
    pairs = []
    for item in text.split(","):
        w, sep, r = item.partition(":")
        if not sep:
            raise _UsageError(f"--expq wants w1:r1,w2:r2,..., got {text!r}")
        try:
            pairs.append((float(w), float(r)))
        except ValueError:
            raise _UsageError(f"--expq pair {item!r} is not numeric") from None
    try:
        return QApproxVariant.from_pairs(pairs)
    except ValueError as exc:
        raise _UsageError(f"--expq: {exc}") from None


def _parse_terms_list(text: str) -> list[int]:
    try:
        out = [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise _UsageError(f"--terms wants integers, got {text!r}") from None
    if not out:
        raise _UsageError("--terms needs at least one term count")
    return out


def _truncation(args) -> TruncationPolicy:
    if getattr(args, "adaptive_tol", None) is not None:
        return TruncationPolicy.adaptive(args.adaptive_tol)
    return TruncationPolicy.fixed(args.terms)


def _parse_methods(text: str, args) -> tuple[AberMethod, ...]:
    methods = []
    for raw in text.split(","):
        name = raw.strip()
        if name == "closed":
            methods.append(AberMethod.closed_form(_truncation(args)))
        elif name == "lu":
            methods.append(AberMethod.lu_closed())
        elif name == "oracle":
            methods.append(AberMethod.oracle(QuadratureSpec(rel_tol=args.rel_tol)))
        elif name == "expq":
            methods.append(AberMethod.expq_closed(_parse_expq(args.expq)))
        else:
            raise _UsageError(f"unknown method {name!r} "
                              "(choose from closed, lu, oracle, expq)")
    return tuple(methods)


# ---------------------------------------------------------------------------
# config file support: simple key=value lines mirroring the flags; flags
# given on the command line win on conflict


def _extract_config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _config_tokens(path: str) -> list[str]:
    tokens: list[str] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise _UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key = key.strip().replace("_", "-")
            value = value.strip()
            if not key:
                raise _UsageError(f"{path}:{lineno}: empty key")
            if value.lower() in ("true", "yes", "on") and key in ("no-timing", "list"):
                tokens.append(f"--{key}")
            elif value.lower() in ("false", "no", "off") and key in ("no-timing", "list"):
                continue
            else:
                tokens.extend([f"--{key}", value])
    return tokens


def _merge_config(argv: list[str]) -> list[str]:
    """Splice config-derived tokens in right after the subcommand so any
    explicit flags, parsed later, override them."""
    path = _extract_config_path(argv)
    if path is None:
        return argv
    tokens = _config_tokens(path)
    for i, tok in enumerate(argv):
        if not tok.startswith("-"):
            return argv[: i + 1] + tokens + argv[i + 1:]
    return argv + tokens


# ---------------------------------------------------------------------------
# output helpers


def _write_csv(path: str | None, header: list[str], rows) -> None:
    def emit(fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])

    if path is None or path == "-":
        emit(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)


_PLOT_TEMPLATE = '''"""Self-contained result plot; data inlined below.

Usage: python {script_name} [--save out.png]
"""
import argparse

import matplotlib.pyplot as plt

ROWS = {rows!r}

def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--save", default=None, help="write the figure instead of showing it")
    opts = ap.parse_args()
    fig, ax = plt.subplots(figsize=(7.2, 4.8))
{body}
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    if opts.save:
        fig.savefig(opts.save, dpi=150)
    else:
        plt.show()

if __name__ == "__main__":
    main()
'''

_PLOT_BODIES = {
    "sweep": '''    series = {}
    for snr_db, method, value, *_ in ROWS:
        series.setdefault(method, ([], []))
        series[method][0].append(snr_db)
        series[method][1].append(value)
    for method in sorted(series):
        xs, ys = series[method]
        ax.semilogy(xs, ys, marker="o", markersize=3, label=method)
    ax.set_xlabel("mean SNR (dB)")
    ax.set_ylabel("average BER")''',
    "discrepancy": '''    series = {}
    for snr_db, method, eps in ROWS:
        if eps == float("-inf"):
            continue  # candidate coincides with the reference
        series.setdefault(method, ([], []))
        series[method][0].append(snr_db)
        series[method][1].append(eps)
    for method in sorted(series):
        xs, ys = series[method]
        ax.plot(xs, ys, marker="o", markersize=3, label=method)
    ax.set_xlabel("mean SNR (dB)")
    ax.set_ylabel("discrepancy vs reference (dB)")''',
    "bench": '''    series = {}
    for snr_db, n_terms, t_closed, t_oracle, eps_t in ROWS:
        series.setdefault(snr_db, ([], []))
        series[snr_db][0].append(n_terms)
        series[snr_db][1].append(eps_t)
    for snr_db in sorted(series):
        xs, ys = series[snr_db]
        ax.plot(xs, ys, marker="s", markersize=4, label=f"{snr_db:g} dB")
    ax.axhline(1.0, color="k", linewidth=0.8, linestyle="--")
    ax.set_xlabel("series terms kept (N)")
    ax.set_ylabel("oracle/closed time ratio")''',
}


def _emit_plot(path: str, kind: str, rows) -> None:
    rows = [tuple(r) for r in rows]
    src = _PLOT_TEMPLATE.format(script_name=path.rsplit("/", 1)[-1],
                                rows=rows, body=_PLOT_BODIES[kind])
    with open(path, "w") as fh:
        fh.write(src)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_aber(args) -> int:
    methods = _parse_methods(args.method, args)
    if len(methods) != 1:
        raise _UsageError("aber evaluates exactly one method; use sweep for several")
    method = methods[0]
    ch = ChannelParams(args.m, db_to_linear(args.snr_db))
    mod = Modulation(args.mod)
    mv = method.evaluate(ch, mod)
    extra = ""
    if method.tag == "closed_form":
        extra = f" terms={mv.terms}"
    elif method.tag == "oracle":
        extra = (f" error_estimate={mv.error_estimate:.3e}"
                 f" converged={mv.converged}")
    print(f"aber={_fmt(mv.value)} method={method.label()} m={args.m:g} "
          f"mod={args.mod} snr_db={args.snr_db:g}{extra}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    start, stop, step = _parse_range(args.snr_db_range)
    sweep = SweepSpec(start, stop, step, _parse_methods(args.method, args),
                      ChannelParams(args.m, 1.0), Modulation(args.mod))
    result = run_sweep(sweep, jobs=args.jobs)
    if args.no_timing:
        header = ["snr_db", "method", "value", "terms"]
        rows = [(r.snr_db, r.method, r.value, r.terms) for r in result.rows]
    else:
        header = ["snr_db", "method", "value", "terms", "wall_time_ns"]
        rows = list(result.rows)
    if args.emit_plot:
        _emit_plot(args.emit_plot, "sweep", result.rows)
    _write_csv(args.out, header, rows)
    return EXIT_OK


def _cmd_discrepancy(args) -> int:
    start, stop, step = _parse_range(args.snr_db_range)
    sweep = SweepSpec(start, stop, step, _parse_methods(args.method, args),
                      ChannelParams(args.m, 1.0), Modulation(args.mod))
    rows = run_discrepancy(sweep, QuadratureSpec(rel_tol=args.rel_tol),
                           jobs=args.jobs)
    if args.emit_plot:
        _emit_plot(args.emit_plot, "discrepancy", rows)
    _write_csv(args.out, ["snr_db", "candidate_method", "epsilon_db"], rows)
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.reps < 10:
        raise _UsageError("--reps must be at least 10 for stable medians")
    if args.snr_db_range:
        start, stop, step = _parse_range(args.snr_db_range)
        if not (start < stop and step > 0.0):
            raise _UsageError("--snr-db-range wants start < stop and step > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        snr_dbs = [start + i * step for i in range(count)]
    elif args.snr_db is not None:
        snr_dbs = [args.snr_db]
    else:
        raise _UsageError("bench needs --snr-db or --snr-db-range")
    rows = run_bench(args.m, args.mod, snr_dbs,
                     _parse_terms_list(args.terms), args.reps)
    if args.emit_plot:
        _emit_plot(args.emit_plot, "bench", rows)
    _write_csv(args.out, ["snr_db", "n_terms", "t_closed_ns", "t_oracle_ns",
                          "epsilon_t"], rows)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    if args.list:
        for name in selftest_groups():
            print(name)
        return EXIT_OK
    groups = None
    if args.group:
        groups = [g.strip() for item in args.group for g in item.split(",")]
    try:
        results = run_selftest(groups)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    failures = 0
    for res in results:
        mark = "ok  " if res.passed else "FAIL"
        print(f"[{mark}] {res.group} :: {res.name} | {res.detail}")
        failures += 0 if res.passed else 1
    print(f"selftest: {len(results)} checks, {failures} failures")
    return EXIT_OK if failures == 0 else EXIT_SELFTEST


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sub: argparse.ArgumentParser, *, snr_point: bool,
                snr_range: bool, methods: bool) -> None:
    sub.add_argument("--m", type=float, required=True,
                     help="Nakagami fading figure m > 0")
    sub.add_argument("--mod", type=int, required=True,
                     help="QAM order (4, 16, 64, 256, 1024, 4096)")
    if snr_point:
        sub.add_argument("--snr-db", type=float,
                         required=not snr_range,
                         help="mean SNR in dB")
    if snr_range:
        sub.add_argument("--snr-db-range", type=str,
                         required=not snr_point,
                         help="dB grid as start:stop:step")
    if methods:
        sub.add_argument("--adaptive-tol", type=float, default=None,
                         help="adaptive series stop (relative term size); "
                              "overrides --terms")
        sub.add_argument("--rel-tol", type=float, default=1e-10,
                         help="relative tolerance for oracle quadrature")
        sub.add_argument("--expq", type=str, default=None,
                         help="exponential Q-approx pairs w1:r1,w2:r2,... "
                              "(default: the two-term set)")
    sub.add_argument("--config", type=str, default=None,
                     help="key=value file mirroring these flags; "
                          "explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nakaber",
        description="Average BER of square M-QAM over Nakagami-m fading: "
                    "series closed forms vs quadrature reference.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_aber = subs.add_parser("aber", help="evaluate one ABER value")
    _add_common(p_aber, snr_point=True, snr_range=False, methods=True)
    p_aber.add_argument("--method", type=str, default="closed",
                        help="closed | lu | oracle | expq")
    p_aber.add_argument("--terms", type=int, default=5,
                        help="series terms kept: n = 0..N")
    p_aber.set_defaults(func=_cmd_aber)

    p_sweep = subs.add_parser("sweep", help="ABER over a dB grid, CSV out")
    _add_common(p_sweep, snr_point=False, snr_range=True, methods=True)
    p_sweep.add_argument("--method", type=str, default="closed,lu,oracle",
                         help="comma list of closed | lu | oracle | expq")
    p_sweep.add_argument("--terms", type=int, default=5,
                         help="series terms kept: n = 0..N")
    p_sweep.add_argument("--out", type=str, default=None,
                         help="CSV path (default: stdout)")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="concurrent grid evaluations")
    p_sweep.add_argument("--no-timing", action="store_true",
                         help="drop the wall-time column (byte-stable CSV)")
    p_sweep.add_argument("--emit-plot", type=str, default=None,
                         help="write a self-contained plot script here")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_disc = subs.add_parser("discrepancy",
                             help="per-method deviation from the quadrature "
                                  "reference, CSV out")
    _add_common(p_disc, snr_point=False, snr_range=True, methods=True)
    p_disc.add_argument("--method", type=str, default="closed,lu",
                        help="comma list of candidate methods")
    p_disc.add_argument("--terms", type=int, default=5,
                        help="series terms kept: n = 0..N")
    p_disc.add_argument("--out", type=str, default=None,
                        help="CSV path (default: stdout)")
    p_disc.add_argument("--jobs", type=int, default=1,
                        help="concurrent grid evaluations")
    p_disc.add_argument("--emit-plot", type=str, default=None,
                        help="write a self-contained plot script here")
    p_disc.set_defaults(func=_cmd_discrepancy)

    p_bench = subs.add_parser("bench",
                              help="closed-form vs oracle timing at matched "
                                   "5-digit precision, CSV out")
    _add_common(p_bench, snr_point=True, snr_range=True, methods=False)
    p_bench.add_argument("--terms", type=str, default="0,1,2,3,5",
                         help="comma list of series term counts to time")
    p_bench.add_argument("--reps", type=int, default=30,
                         help="timing repetitions per point (>= 10)")
    p_bench.add_argument("--out", type=str, default=None,
                         help="CSV path (default: stdout)")
    p_bench.add_argument("--emit-plot", type=str, default=None,
                         help="write a self-contained plot script here")
    p_bench.set_defaults(func=_cmd_bench)

    p_self = subs.add_parser("selftest", help="run the invariant suite")
    p_self.add_argument("--group", action="append", default=None,
                        help="run only these groups (repeatable or comma list)")
    p_self.add_argument("--list", action="store_true",
                        help="list group names without running")
    p_self.add_argument("--config", type=str, default=None,
                        help="key=value file mirroring these flags")
    p_self.set_defaults(func=_cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _merge_config(argv)
        args = parser.parse_args(argv)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # argparse reports its own usage errors (and --help) this way
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        detail = ""
        if exc.value is not None:
            detail = (f" (best value {exc.value:.12g}, "
                      f"error estimate {exc.error_estimate:.3e})")
        print(f"error: did not converge: {exc}{detail}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

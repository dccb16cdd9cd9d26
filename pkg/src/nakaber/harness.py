"""Sweep, discrepancy, timing, and self-check engines behind the CLI.

Grid sweeps may fan out over a thread pool; result rows are assembled
in sorted order regardless of completion order, so CSV output is
deterministic.  Timing runs stay single-threaded to keep the measured
ratios meaningful.
"""

from __future__ import annotations

import math
import random
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

from . import aber as aber_mod
from . import quad, specfun
from .aber import AberMethod, TruncationPolicy
from .channel import ChannelParams, Modulation, QApproxVariant
from .quad import QuadratureSpec

__all__ = [
    "BenchRow",
    "CheckResult",
    "DiscrepancyRow",
    "SweepRow",
    "SweepSpec",
    "SweepResult",
    "db_to_linear",
    "run_bench",
    "run_discrepancy",
    "run_selftest",
    "run_sweep",
    "selftest_groups",
]


def db_to_linear(snr_db: float) -> float:
    """dB to linear power ratio; the only dB conversion in the package."""
    return 10.0 ** (snr_db / 10.0)


class SweepRow(NamedTuple):
    snr_db: float
    method: str
    value: float
    terms: int
    wall_time_ns: int


class DiscrepancyRow(NamedTuple):
    snr_db: float
    candidate_method: str
    epsilon_db: float


class BenchRow(NamedTuple):
    snr_db: float
    n_terms: int
    t_closed_ns: int
    t_oracle_ns: int
    epsilon_t: float


class CheckResult(NamedTuple):
    group: str
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class SweepSpec:
    """A dB grid, the methods to run on it, and the fixed channel shape.

    channel supplies the fading figure only; its mean_snr field is a
    placeholder that the grid overrides point by point.
    """

    snr_db_start: float
    snr_db_stop: float
    snr_db_step: float
    methods: tuple[AberMethod, ...]
    channel: ChannelParams
    modulation: Modulation

    def __post_init__(self):
        if not (math.isfinite(self.snr_db_start) and math.isfinite(self.snr_db_stop)
                and math.isfinite(self.snr_db_step)):
            raise ValueError("sweep bounds must be finite")
        if not self.snr_db_start < self.snr_db_stop:
            raise ValueError("sweep requires start < stop")
        if not self.snr_db_step > 0.0:
            raise ValueError("sweep requires step > 0")
        if not self.methods:
            raise ValueError("sweep requires at least one method")

    def snr_db_grid(self) -> list[float]:
        # the epsilon absorbs accumulated binary-step error so the stop
        # point itself is kept
        count = int(math.floor((self.snr_db_stop - self.snr_db_start)
                               / self.snr_db_step + 1e-9)) + 1
        return [self.snr_db_start + i * self.snr_db_step for i in range(count)]


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]


def _map_tasks(fn: Callable, tasks: Sequence, jobs: int) -> list:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def run_sweep(sweep: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate every method at every grid point.

    Rows come back sorted by (snr_db, method label); wall times are
    per-evaluation and vary run to run, everything else is
    deterministic.
    """
    m = sweep.channel.m
    mod = sweep.modulation

    def run_one(task: tuple[float, AberMethod]) -> SweepRow:
        snr_db, method = task
        ch = ChannelParams(m, db_to_linear(snr_db))
        t0 = time.perf_counter_ns()
        mv = method.evaluate(ch, mod)
        elapsed = time.perf_counter_ns() - t0
        if not 0.0 <= mv.value <= 1.0:
            raise ValueError(f"method {method.label()} produced a value "
                             f"outside [0, 1] at {snr_db} dB: {mv.value}")
        return SweepRow(snr_db, method.label(), mv.value, mv.terms, elapsed)

    tasks = [(snr_db, meth) for snr_db in sweep.snr_db_grid()
             for meth in sweep.methods]
    rows = _map_tasks(run_one, tasks, jobs)
    rows.sort(key=lambda r: (r.snr_db, r.method))
    return SweepResult(tuple(rows))


def run_discrepancy(sweep: SweepSpec, oracle_spec: QuadratureSpec | None = None,
                    jobs: int = 1) -> list[DiscrepancyRow]:
    """Per grid point: reference oracle (exact kernel) vs each method.

    The reference is always the exact-kernel quadrature; methods listed
    in the sweep are the candidates.
    """
    m = sweep.channel.m
    mod = sweep.modulation
    spec = QuadratureSpec() if oracle_spec is None else oracle_spec

    def run_point(snr_db: float) -> list[DiscrepancyRow]:
        ch = ChannelParams(m, db_to_linear(snr_db))
        reference = aber_mod.aber_oracle(ch, mod, "exact", spec)
        out = []
        for method in sweep.methods:
            value = method.evaluate(ch, mod).value
            out.append(DiscrepancyRow(snr_db, method.label(),
                                      aber_mod.discrepancy(reference, value)))
        return out

    points = sweep.snr_db_grid()
    rows = [row for chunk in _map_tasks(run_point, points, jobs) for row in chunk]
    rows.sort(key=lambda r: (r.snr_db, r.candidate_method))
    return rows


def _median_time_ns(fn: Callable[[], object], reps: int) -> int:
    fn()
    fn()  # two warmup calls keep allocator and cache effects out of rep 0
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    return int(statistics.median(samples))


def stabilized_oracle_spec(ch: ChannelParams, mod: Modulation) -> QuadratureSpec:
    """Loosest oracle tolerance whose value is 5-significant-digit stable.

    Tightens rel_tol decade by decade until two successive values agree
    to 1e-5 relative, then keeps the earlier (cheaper) setting; this is
    the 'equal precision' footing for timing ratios.
    """
    rel = 1e-4
    spec = QuadratureSpec(rel_tol=rel, abs_tol=1e-18)
    prev = aber_mod.aber_oracle(ch, mod, "exact", spec)
    while rel > 1e-13:
        tighter = QuadratureSpec(rel_tol=rel / 10.0, abs_tol=1e-18)
        cur = aber_mod.aber_oracle(ch, mod, "exact", tighter)
        if abs(cur - prev) <= 1e-5 * abs(cur):
            return spec
        rel /= 10.0
        spec = tighter
        prev = cur
    return spec


def run_bench(m: float, order: int, snr_dbs: Sequence[float],
              n_list: Sequence[int], reps: int) -> list[BenchRow]:
    """Median wall times of closed form vs matched-precision oracle.

    epsilon_t is the oracle-to-closed time ratio, so values >= 1 mean
    the closed form is the faster route.  Runs strictly single-threaded.
    """
    if reps < 10:
        raise ValueError("timing needs at least 10 repetitions")
    if not n_list:
        raise ValueError("timing needs at least one term count")
    mod = Modulation(order)
    rows = []
    for snr_db in snr_dbs:
        ch = ChannelParams(m, db_to_linear(snr_db))
        spec = stabilized_oracle_spec(ch, mod)
        t_oracle = _median_time_ns(
            lambda: aber_mod.aber_oracle(ch, mod, "exact", spec), reps)
        for n in n_list:
            trunc = TruncationPolicy.fixed(n)
            t_closed = _median_time_ns(
                lambda: aber_mod.aber_closed(ch, mod, trunc), reps)
            rows.append(BenchRow(snr_db, n, t_closed, t_oracle,
                                 t_oracle / t_closed))
    return rows


# ---------------------------------------------------------------------------
# self-test groups

_IDENTITY_MS = (0.6, 1.0, 2.5, 4.1)
_IDENTITY_DBS = (-5.0, 0.0, 10.0, 20.0, 30.0)
_IDENTITY_ORDERS = (4, 16, 256, 4096)

# the identity integrals shrink to ~1e-11 at the high-SNR corner of the
# grid, so convergence has to be driven by relative error alone; the
# default absolute floor (1e-14) would otherwise dominate them
_IDENTITY_SPEC = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-300)


def _rel_diff(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def _avg_q_oracle(ch: ChannelParams, alpha: float) -> float:
    from . import channel as channel_mod

    def f(g: float) -> float:
        w = channel_mod.pdf(ch, g)
        if w == 0.0:
            return 0.0
        return specfun.gauss_q(math.sqrt(2.0 * alpha * g)) * w

    return quad.integrate_semi_infinite(f, 0.0, spec=_IDENTITY_SPEC).value


def _avg_q2_oracle(ch: ChannelParams, alpha: float) -> float:
    from . import channel as channel_mod

    def f(g: float) -> float:
        w = channel_mod.pdf(ch, g)
        if w == 0.0:
            return 0.0
        q = specfun.gauss_q(math.sqrt(2.0 * alpha * g))
        return q * q * w

    return quad.integrate_semi_infinite(f, 0.0, spec=_IDENTITY_SPEC).value


def _check_lemma1() -> list[CheckResult]:
    out = []
    for z in (0.1, 0.5, 1.0, 2.0, 4.0):
        z2 = z * z

        def f(x: float) -> float:
            return math.exp(-0.5 * z2 * x) / (math.sqrt(x) * (1.0 + x))

        integral = quad.integrate_semi_infinite(f, 0.0).value
        numeric = math.exp(-0.5 * z2) * integral / (2.0 * math.pi)
        rd = _rel_diff(numeric, specfun.gauss_q(z))
        out.append(CheckResult("lemma1", f"z={z:g}", rd <= 1e-9,
                               f"rel_diff={rd:.3e} tol=1e-9"))
    return out


def _identity_grid():
    for m in _IDENTITY_MS:
        for snr_db in _IDENTITY_DBS:
            for order in _IDENTITY_ORDERS:
                yield ChannelParams(m, db_to_linear(snr_db)), Modulation(order), snr_db


def _check_lemma2() -> list[CheckResult]:
    out = []
    worst = 0.0
    worst_at = ""
    for ch, mod, snr_db in _identity_grid():
        closed = aber_mod.lemma2_avg_q(ch, mod.c1)
        oracle = _avg_q_oracle(ch, mod.c1)
        rd = _rel_diff(closed, oracle)
        if rd > worst:
            worst, worst_at = rd, f"m={ch.m:g} snr={snr_db:g}dB M={mod.order}"
    out.append(CheckResult("lemma2", "avg-Q closed form vs quadrature (80-point grid)",
                           worst <= 1e-8, f"worst rel_diff={worst:.3e} at {worst_at} tol=1e-8"))
    return out


def _check_lemma3() -> list[CheckResult]:
    out = []
    worst = 0.0
    worst_at = ""
    for ch, mod, snr_db in _identity_grid():
        x = ch.m / (ch.m + mod.c1 * ch.mean_snr)
        quarter_i = 0.25 * specfun.reg_inc_beta(x, ch.m, 0.5)
        closed = quarter_i - aber_mod.r2_quadrature(ch, mod.c1,
                                                    spec=_IDENTITY_SPEC)
        oracle = _avg_q2_oracle(ch, mod.c1)
        rd = _rel_diff(closed, oracle)
        if rd > worst:
            worst, worst_at = rd, f"m={ch.m:g} snr={snr_db:g}dB M={mod.order}"
    out.append(CheckResult("lemma3", "avg-Q^2 split vs quadrature (80-point grid)",
                           worst <= 1e-7, f"worst rel_diff={worst:.3e} at {worst_at} tol=1e-7"))
    return out


def _check_reflection() -> list[CheckResult]:
    rng = random.Random(20250818)
    worst = 0.0
    for _ in range(300):
        a = rng.uniform(0.3, 10.0)
        b = rng.uniform(0.3, 10.0)
        x = rng.random()
        gap = abs(specfun.reg_inc_beta(x, a, b)
                  + specfun.reg_inc_beta(1.0 - x, b, a) - 1.0)
        worst = max(worst, gap)
    return [CheckResult("reflection", "incomplete-beta reflection (300 random draws)",
                        worst <= 1e-12, f"worst abs gap={worst:.3e} tol=1e-12")]


def _check_termination() -> list[CheckResult]:
    out = []
    alpha = Modulation(16).c1
    for m in (1, 2, 3):
        for gbar in (1.0, 10.0):
            ch = ChannelParams(float(m), gbar)
            value, used = aber_mod.r2_series(ch, alpha, TruncationPolicy.fixed(10))
            ref = aber_mod.r2_quadrature(ch, alpha)
            rd = _rel_diff(value, ref)
            ok = used == m and rd <= 1e-8
            out.append(CheckResult(
                "termination", f"m={m} gbar={gbar:g}", ok,
                f"terms_used={used} (expect {m}) rel_diff={rd:.3e} tol=1e-8"))
    return out


def _check_sandwich() -> list[CheckResult]:
    out = []
    ok = True
    detail = ""
    for ch, mod, snr_db in _identity_grid():
        x = ch.m / (ch.m + mod.c1 * ch.mean_snr)
        quarter_i = 0.25 * specfun.reg_inc_beta(x, ch.m, 0.5)
        r2 = aber_mod.r2_quadrature(ch, mod.c1)
        avg_q = aber_mod.lemma2_avg_q(ch, mod.c1)
        avg_q2 = quarter_i - r2
        here = (0.0 <= r2 <= quarter_i * (1.0 + 1e-9) + 1e-15
                and 0.0 < avg_q2 <= avg_q * (1.0 + 1e-9)
                and avg_q <= 0.5)
        if not here and ok:
            ok = False
            detail = (f"violated at m={ch.m:g} snr={snr_db:g}dB M={mod.order}: "
                      f"r2={r2:.3e} quarter_i={quarter_i:.3e} "
                      f"avg_q={avg_q:.6e} avg_q2={avg_q2:.6e}")
    if ok:
        detail = "0 <= R2 <= I/4 and 0 < E[Q^2] <= E[Q] <= 1/2 on the 80-point grid"
    return [CheckResult("sandwich", "correction-term bounds", ok, detail)]


_SELFTEST_GROUPS: dict[str, Callable[[], list[CheckResult]]] = {
    "lemma1": _check_lemma1,
    "lemma2": _check_lemma2,
    "lemma3": _check_lemma3,
    "reflection": _check_reflection,
    "termination": _check_termination,
    "sandwich": _check_sandwich,
}


def selftest_groups() -> tuple[str, ...]:
    return tuple(_SELFTEST_GROUPS)


def run_selftest(groups: Iterable[str] | None = None) -> list[CheckResult]:
    """Run the named invariant groups (all of them when None)."""
    names = list(groups) if groups is not None else list(_SELFTEST_GROUPS)
    unknown = [g for g in names if g not in _SELFTEST_GROUPS]
    if unknown:
        raise ValueError(f"unknown selftest group(s): {', '.join(unknown)}; "
                         f"known: {', '.join(_SELFTEST_GROUPS)}")
    results: list[CheckResult] = []
    for name in names:
        results.extend(_SELFTEST_GROUPS[name]())
    return results

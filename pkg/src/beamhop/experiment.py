"""Sweep orchestration: run points, fit scaling exponents, validate.

A "point" is one (n, seed) simulation under a fixed configuration. A
sweep runs the configured n ladder across seeds, writes one CSV row per
point, and fits the growth exponent of aggregate throughput against the
analytic prediction by least squares on log2-log2 axes. Everything is a
pure function of (config, seed): reruns are byte-identical regardless
of worker count.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import hybrid as hy
from .antenna import derive_gains
from .errors import ConfigError, RoutingInfeasible
from .geometry import GeometryMode, place_nodes, build_cell_grid
from .phy import (DEFAULT_NOISE, evaluate_slot, expected_inter_interference,
                  interference_tail, sinr)
from .routing import (DEFAULT_POWER, DEFAULT_RHO, classify_regime,
                      elastic_params, build_all_routes, pairs_per_slot)
from .scheduling import activate, build_route_table, draw_schedule

TWO_PI = 2.0 * math.pi
MODES = ("dense", "extended", "hybrid-dense", "hybrid-extended")
CSV_HEADER = ("mode,n,theta,alpha,gamma,rho,seed,regime,d_hop,h_bar,M,"
              "T_agg,R_min,R_median,D,median_sinr,mean_inter_I")

# log2(log n)^kappa correction applied before fitting, per regime
_KAPPA = {"I": 0.5, "IV": 0.5, "II": 1.0, "V": 1.0, "III": 0.0}

_SCHEDULE_SALT = 0x5EED
_RESEED_STRIDE = 1_000_003


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "dense"
    n_ladder: tuple[int, ...] = (1024, 4096, 16384, 65536)
    theta: dict = field(default_factory=lambda: {"beta": 0.5})
    alpha: float = 4.0
    gamma: float = 0.0
    rho: float = DEFAULT_RHO
    power: float = DEFAULT_POWER
    noise: float = DEFAULT_NOISE
    slots: int = 10_000
    eval_slots: int = 512
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    m_override: int | None = None
    tdma_grid: str = "routing"
    infra_single_hop: bool = False
    output: str = "results"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        ladder = tuple(int(n) for n in self.n_ladder)
        if not ladder or any(n < 4 or n % 2 for n in ladder):
            raise ConfigError("n_ladder entries must be even and >= 4")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("n_ladder must be strictly increasing")
        object.__setattr__(self, "n_ladder", ladder)
        if set(self.theta) == {"fixed"}:
            if not (0.0 < self.theta["fixed"] <= TWO_PI):
                raise ConfigError("fixed theta must lie in (0, 2*pi]")
        elif set(self.theta) == {"beta"}:
            if self.theta["beta"] < 0.0:
                raise ConfigError("theta exponent beta must be >= 0")
        else:
            raise ConfigError("theta must be {'fixed': radians} or {'beta': exponent}")
        if self.alpha <= 0.0:
            raise ConfigError("alpha must be positive")
        if not (0.0 <= self.gamma < 1.0):
            raise ConfigError("gamma must lie in [0, 1)")
        if not (0.0 < self.rho <= 1.0):
            raise ConfigError("rho must lie in (0, 1]")
        if self.slots < 1 or self.eval_slots < 1:
            raise ConfigError("slots and eval_slots must be >= 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.tdma_grid not in ("routing", "subregion"):
            raise ConfigError("tdma_grid must be 'routing' or 'subregion'")

    @property
    def hybrid(self) -> bool:
        return self.mode.startswith("hybrid")

    @property
    def geometry_mode(self) -> GeometryMode:
        return (GeometryMode.EXTENDED if self.mode.endswith("extended")
                else GeometryMode.DENSE)

    def theta_for(self, n: int) -> float:
        """Effective beam width at ladder point n, clamped to [2pi/n^2, 2pi]."""
        if "fixed" in self.theta:
            th = float(self.theta["fixed"])
        else:
            th = TWO_PI * n ** (-float(self.theta["beta"]))
        return float(min(TWO_PI, max(th, TWO_PI * n ** -2.0)))

    def rho_for(self, theta: float) -> float:
        """Mainlobe fraction; the omnidirectional limit forces rho = 1."""
        return 1.0 if theta >= TWO_PI else self.rho

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("n_ladder", "seeds"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "n_ladder": list(self.n_ladder),
                "theta": dict(self.theta), "alpha": self.alpha,
                "gamma": self.gamma, "rho": self.rho, "power": self.power,
                "noise": self.noise, "slots": self.slots,
                "eval_slots": self.eval_slots, "seeds": list(self.seeds),
                "m_override": self.m_override, "tdma_grid": self.tdma_grid,
                "infra_single_hop": self.infra_single_hop, "output": self.output}


@dataclass(frozen=True)
class ThroughputSample:
    """Per-point results: throughput, delay, and SINR diagnostics."""

    mode: str
    n: int
    theta: float
    alpha: float
    gamma: float | None
    rho: float
    seed: int
    regime: str
    regime_exponent: float
    d_hop: float
    h_bar: float
    m: int
    t_aggregate: float
    r_min: float
    r_median: float
    delay: float
    median_sinr: float
    mean_inter: float
    per_pair_rates: np.ndarray
    t_aggregate_mean_basis: float
    unsampled_pairs: int
    wall_clock: float
    t_adhoc: float | None = None
    t_infra: float | None = None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def sample_csv_row(s: ThroughputSample) -> str:
    cells = [s.mode, s.n, s.theta, s.alpha, s.gamma, s.rho, s.seed, s.regime,
             s.d_hop, s.h_bar, s.m, s.t_aggregate, s.r_min, s.r_median,
             s.delay, s.median_sinr, s.mean_inter]
    return ",".join(c if isinstance(c, str) else _fmt(c) for c in cells)


def _segment_min(values: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    return np.minimum.reduceat(values, bounds)


class _HopStats:
    """Accumulates per-hop rate means and receiver-level diagnostics."""

    def __init__(self, num_hops: int):
        self.rate_sum = np.zeros(num_hops)
        self.count = np.zeros(num_hops, dtype=np.int64)
        self.inter_sum = 0.0
        self.records = 0
        self.sinr_chunks: list[np.ndarray] = []

    def add(self, index: np.ndarray, out: dict[str, np.ndarray]):
        self.rate_sum[index] += out["rate"]
        self.count[index] += 1
        self.inter_sum += float(out["inter"].sum())
        self.records += len(index)
        self.sinr_chunks.append(out["sinr"])

    def hop_means(self) -> np.ndarray:
        """Mean rate per hop; +inf marks hops that never fired."""
        means = np.full(len(self.rate_sum), np.inf)
        sampled = self.count > 0
        means[sampled] = self.rate_sum[sampled] / self.count[sampled]
        return means

    def median_sinr(self) -> float:
        if not self.records:
            return 0.0
        return float(np.median(np.concatenate(self.sinr_chunks)))

    def mean_inter(self) -> float:
        return self.inter_sum / self.records if self.records else 0.0


def _build_adhoc(config: ExperimentConfig, n: int, seed: int):
    """Place nodes and build routes, re-seeding on infeasible layouts."""
    theta = config.theta_for(n)
    params = elastic_params(n, theta, config.alpha, config.geometry_mode,
                            power=config.power, rho=config.rho_for(theta))
    last = None
    for attempt in range(4):
        inst = place_nodes(n, config.geometry_mode, seed + attempt * _RESEED_STRIDE)
        grid = build_cell_grid(inst, params.cell_area)
        try:
            routes = build_all_routes(inst, grid)
            return inst, grid, params, routes
        except RoutingInfeasible as exc:
            last = exc
    raise RoutingInfeasible(
        f"point (n={n}, seed={seed}) infeasible after 4 attempts") from last


def run_point(config: ExperimentConfig, n: int, seed: int) -> ThroughputSample:
    """Simulate one (n, seed) point end to end.

    Pipeline: place nodes, derive gains and hop distance, build routes,
    draw the slot schedule, evaluate SINR over the evaluation prefix,
    and roll per-hop rates up into per-pair throughputs. Hybrid modes
    additionally run the BS-assisted phases and keep the better of the
    two aggregates.
    """
    t0 = time.perf_counter()
    theta = config.theta_for(n)
    rho = config.rho_for(theta)
    pattern = derive_gains(theta, rho)
    inst, grid, params, routes = _build_adhoc(config, n, seed)
    m = config.m_override if config.m_override is not None else pairs_per_slot(params)
    schedule = draw_schedule(n, m, config.slots, seed=[seed, _SCHEDULE_SALT],
                             keep_sets=config.eval_slots)
    table = build_route_table(routes, grid, config.tdma_grid)
    stats = _HopStats(table.num_hops)
    s_eval = min(config.eval_slots, config.slots)
    for s in range(s_eval):
        act = activate(s, schedule, table)
        if len(act) == 0:
            continue
        out = evaluate_slot(act, pattern, config.alpha, params.tx_power,
                            config.noise)
        stats.add(act.table_index, out)

    offsets = np.concatenate([[0], np.cumsum(table.hops_per_pair)])[:-1]
    means = stats.hop_means()
    worst = _segment_min(means, offsets.astype(np.intp))
    share = schedule.tallies / config.slots
    rates = np.where(np.isfinite(worst), share * worst / 9.0, 0.0)
    unsampled = int(np.sum(~np.isfinite(worst)))
    sums = np.add.reduceat(np.where(np.isfinite(means), means, 0.0),
                           offsets.astype(np.intp))
    cnts = np.add.reduceat(np.isfinite(means).astype(float), offsets.astype(np.intp))
    mean_means = np.divide(sums, cnts, out=np.zeros_like(sums), where=cnts > 0)
    rates_mean_basis = share * mean_means / 9.0

    t_adhoc = float(rates.sum())
    hops = table.hops_per_pair.astype(float)
    sample = dict(
        mode=config.mode, n=n, theta=theta, alpha=config.alpha,
        gamma=config.gamma if config.hybrid else None, rho=rho, seed=seed,
        d_hop=params.d_hop, h_bar=params.h_bar, m=m,
        delay=float(hops.mean()), median_sinr=stats.median_sinr(),
        mean_inter=stats.mean_inter(), per_pair_rates=rates,
        t_aggregate=t_adhoc,
        t_aggregate_mean_basis=float(rates_mean_basis.sum()),
        unsampled_pairs=unsampled,
        r_min=float(rates.min()), r_median=float(np.median(rates)))

    if config.hybrid:
        infra = _run_infra(config, n, seed, inst, pattern, theta)
        label = classify_regime(n, theta, config.alpha,
                                b=infra["b"], gamma=config.gamma)
        if infra["t_infra"] >= t_adhoc:
            sample.update(per_pair_rates=infra["rates"],
                          t_aggregate=infra["t_infra"],
                          r_min=float(infra["rates"].min()),
                          r_median=float(np.median(infra["rates"])),
                          delay=infra["delay"],
                          median_sinr=infra["median_sinr"],
                          mean_inter=infra["mean_inter"])
        sample.update(t_adhoc=t_adhoc, t_infra=infra["t_infra"])
    else:
        label = params.regime
    sample.update(regime=label.regime.value, regime_exponent=label.exponent,
                  wall_clock=time.perf_counter() - t0)
    return ThroughputSample(**sample)


def _run_infra(config, n, seed, inst, pattern, theta) -> dict:
    """The BS-assisted component of a hybrid point."""
    mode = config.geometry_mode
    bs = hy.place_bs(n, config.gamma, mode)
    d_infra, _ = hy.infra_hop_distance(n, theta, config.alpha, config.gamma, mode)
    routes, igrid = hy.build_infra_routes(inst, bs, d_infra,
                                          single_hop=config.infra_single_hop)
    table = hy.build_infra_table(inst, bs, routes, igrid)
    if mode is GeometryMode.DENSE:
        if config.infra_single_hop:
            tx_power = config.power * bs.b ** (-config.alpha / 2.0) * theta ** 2
        else:
            tx_power = config.power * (math.log2(n) / n) ** (config.alpha / 2.0)
    else:
        tx_power = config.power
    stats = _HopStats(len(table.pair))
    s_eval = min(config.eval_slots, config.slots)
    for s in range(s_eval):
        act = hy.activate_infra(s, table)
        if len(act) == 0:
            continue
        out = evaluate_slot(act, pattern, config.alpha, tx_power, config.noise)
        stats.add(act.table_index, out)
    means = stats.hop_means()
    block = np.concatenate([[0], np.cumsum(table.access_hops + table.exit_hops)])[:-1]
    bounds = np.empty(2 * table.num_pairs, dtype=np.intp)
    bounds[0::2] = block
    bounds[1::2] = block + table.access_hops
    seg = _segment_min(means, bounds)
    worst_a, worst_e = seg[0::2], seg[1::2]
    share_a = _round_robin_share(table.access_groups, config.slots,
                                 table.num_pairs, phase=hy.ACCESS)
    share_e = _round_robin_share(table.exit_groups, config.slots,
                                 table.num_pairs, phase=hy.EXIT)
    rate_a = np.where(np.isfinite(worst_a), share_a * worst_a / 9.0, 0.0)
    rate_e = np.where(np.isfinite(worst_e), share_e * worst_e / 9.0, 0.0)
    rates = np.minimum(rate_a, rate_e)
    air = (table.access_hops + table.exit_hops).astype(float)
    return {"b": bs.b, "rates": rates, "t_infra": float(rates.sum()),
            "delay": float(air.mean()), "median_sinr": stats.median_sinr(),
            "mean_inter": stats.mean_inter()}


def _round_robin_share(groups, slots: int, num_pairs: int, phase: int) -> np.ndarray:
    """Exact fraction of slots each pair's line is served in its phase."""
    turns = (slots + 1) // 2 if phase == hy.ACCESS else slots // 2
    share = np.zeros(num_pairs)
    for g in groups:
        cnt = len(g)
        if not cnt:
            continue
        for idx, p in enumerate(g):
            served = (turns - idx - 1) // cnt + 1 if idx < turns else 0
            share[p] = served / slots
    return share


@dataclass(frozen=True)
class ScalingFit:
    """OLS fit of log2(T) against log2(n), with a log-factor correction."""

    exponent: float
    raw_exponent: float
    kappa: float
    ci_low: float
    ci_high: float
    theoretical: float
    deviation: float
    tolerance: float
    passed: bool
    n_values: tuple[int, ...]
    t_medians: tuple[float, ...]
    note: str = ""


def fit_scaling(samples: list[ThroughputSample], tolerance: float = 0.15,
                theoretical: float | None = None) -> ScalingFit:
    """Fit the throughput growth exponent over an n ladder.

    The fitted quantity per point is (n/2) * median per-pair rate,
    reduced to a median over seeds. The corrected fit multiplies T by
    (log2 n)^kappa with kappa chosen by the ladder's operating regime,
    compensating the log factor the analytic rate formulas carry.
    """
    by_n: dict[int, list[float]] = {}
    for s in samples:
        by_n.setdefault(s.n, []).append((s.n / 2.0) * s.r_median)
    ns = sorted(by_n)
    if len(ns) < 2:
        raise ValueError("need at least two ladder points to fit a slope")
    med = np.array([float(np.median(by_n[n])) for n in ns])
    x = np.log2(np.array(ns, dtype=float))
    note = ""
    if np.any(med <= 0):
        note = "non-positive throughput at some ladder points"
        med = np.maximum(med, 1e-300)
    regimes = [s.regime for s in samples]
    kappa = _KAPPA[max(set(regimes), key=regimes.count)]
    y_raw = np.log2(med)
    raw = float(np.polyfit(x, y_raw, 1)[0])
    y_corr = y_raw + kappa * np.log2(np.log2(np.array(ns, dtype=float)))
    slope = float(np.polyfit(x, y_corr, 1)[0])
    if float(np.ptp(y_raw)) == 0.0:
        note = (note + "; " if note else "") + "degenerate ladder: constant T"
        raw = slope = 0.0
    ci_low, ci_high = _seed_slope_ci(samples, kappa)
    if theoretical is None:
        theoretical = float(np.median([s.regime_exponent for s in samples]))
    deviation = slope - theoretical
    return ScalingFit(exponent=slope, raw_exponent=raw, kappa=kappa,
                      ci_low=ci_low, ci_high=ci_high, theoretical=theoretical,
                      deviation=deviation, tolerance=tolerance,
                      passed=abs(deviation) <= tolerance,
                      n_values=tuple(ns), t_medians=tuple(float(m) for m in med),
                      note=note)


def _seed_slope_ci(samples, kappa) -> tuple[float, float]:
    """Spread of per-seed slopes: mean +/- t * sd / sqrt(k)."""
    per_seed: dict[int, dict[int, float]] = {}
    for s in samples:
        per_seed.setdefault(s.seed, {})[s.n] = (s.n / 2.0) * s.r_median
    ns = sorted({s.n for s in samples})
    x = np.log2(np.array(ns, dtype=float))
    corr = kappa * np.log2(np.log2(np.array(ns, dtype=float)))
    slopes = []
    for seed, vals in per_seed.items():
        if set(vals) != set(ns):
            continue
        t = np.array([max(vals[n], 1e-300) for n in ns])
        slopes.append(float(np.polyfit(x, np.log2(t) + corr, 1)[0]))
    if len(slopes) < 2:
        return (math.nan, math.nan)
    from scipy import stats as sps
    arr = np.array(slopes)
    half = sps.t.ppf(0.975, len(arr) - 1) * arr.std(ddof=1) / math.sqrt(len(arr))
    return (float(arr.mean() - half), float(arr.mean() + half))


def delay_throughput_curve(samples: list[ThroughputSample]) -> list[tuple[float, float, float]]:
    """(theta, delay, throughput) tuples sorted by increasing sharpness.

    For samples at fixed n and varying beam width; medians are taken
    over seeds at each theta.
    """
    by_theta: dict[float, list[ThroughputSample]] = {}
    for s in samples:
        by_theta.setdefault(s.theta, []).append(s)
    out = []
    for th in sorted(by_theta, reverse=True):  # ascending sharpness
        group = by_theta[th]
        out.append((th, float(np.median([s.delay for s in group])),
                    float(np.median([s.t_aggregate for s in group]))))
    return out


def curve_is_monotone(curve: list[tuple[float, float, float]]) -> tuple[bool, bool]:
    """(delay non-increasing, throughput non-decreasing) along the curve."""
    ds = [c[1] for c in curve]
    ts = [c[2] for c in curve]
    d_ok = all(b <= a + 1e-12 for a, b in zip(ds, ds[1:]))
    t_ok = all(b >= a - 1e-12 for a, b in zip(ts, ts[1:]))
    return d_ok, t_ok


def sweep(config: ExperimentConfig, workers: int = 1,
          tolerance: float = 0.15) -> tuple[list[ThroughputSample], ScalingFit, list]:
    """Run the full ladder x seeds grid and fit the scaling exponent.

    Points run in a thread pool; results are ordered by (n, seed) before
    any output is produced, so worker count never changes output bytes.
    Returns (samples, fit, failed_points).
    """
    points = [(n, seed) for n in config.n_ladder for seed in config.seeds]
    results: dict[tuple[int, int], ThroughputSample] = {}
    failures = []
    if workers <= 1:
        for n, seed in points:
            try:
                results[(n, seed)] = run_point(config, n, seed)
            except RoutingInfeasible as exc:
                failures.append({"n": n, "seed": seed, "error": str(exc)})
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(run_point, config, n, seed): (n, seed)
                    for n, seed in points}
            for fut, key in futs.items():
                try:
                    results[key] = fut.result()
                except RoutingInfeasible as exc:
                    failures.append({"n": key[0], "seed": key[1], "error": str(exc)})
    samples = [results[k] for k in sorted(results)]
    fit = fit_scaling(samples, tolerance=tolerance) if samples else None
    return samples, fit, failures


def write_csv(samples: list[ThroughputSample], path: str):
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for s in samples:
            fh.write(sample_csv_row(s) + "\n")


def write_summary(config: ExperimentConfig, fit: ScalingFit | None,
                  failures: list, path: str):
    doc = {"config": config.to_dict(), "failed_points": failures}
    if fit is not None:
        doc["fit"] = {
            "exponent": fit.exponent, "raw_exponent": fit.raw_exponent,
            "kappa": fit.kappa, "ci": [fit.ci_low, fit.ci_high],
            "theoretical": fit.theoretical, "deviation": fit.deviation,
            "tolerance": fit.tolerance, "passed": fit.passed,
            "n_values": list(fit.n_values), "t_medians": list(fit.t_medians),
            "note": fit.note}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        return "\n".join(lines)


def _check(name: str, fn) -> CheckResult:
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashed check is a failed check
        return CheckResult(name, False, f"error: {exc}")
    return CheckResult(name, bool(passed), detail)


def validate(config: ExperimentConfig) -> ValidationReport:
    """Run the oracle suite: closed-form identities and small simulations.

    Heavier statistical checks run on reduced settings (few seeds, short
    evaluation windows) so the whole report stays interactive; the full
    strength versions live in the acceptance tests.
    """
    checks = [
        _check("gain_conservation", _chk_conservation),
        _check("gain_category_frequencies", _chk_category_freq),
        _check("gain_expectation", lambda: _chk_gain_expectation(config)),
        _check("interference_tail_convergence", lambda: _chk_tail(config.alpha)),
        _check("typicality", _chk_typicality),
        _check("sinr_cross_check", lambda: _chk_sinr_paths(config)),
        _check("tier_bound_dominance", lambda: _chk_tier_dominance(config)),
        _check("interference_boundedness", lambda: _chk_lemma2(config)),
    ]
    return ValidationReport(checks=tuple(checks))


def _chk_conservation():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        th = rng.uniform(1e-3, TWO_PI)
        lo = th / TWO_PI
        rho = rng.uniform(lo + 1e-9, 1.0) if th < TWO_PI else 1.0
        p = derive_gains(th, rho)
        resid = abs(th / TWO_PI * p.g_main + (TWO_PI - th) / TWO_PI * p.g_side - 1.0)
        worst = max(worst, resid)
    return worst < 1e-12, f"max residual {worst:.3g}"


def _chk_category_freq():
    rng = np.random.default_rng(0)
    ns = 100_000
    worst = 0.0
    for th in (math.pi / 4, math.pi / 2, math.pi, 3 * math.pi / 2):
        az_a = rng.uniform(0, TWO_PI, ns)
        az_b = rng.uniform(0, TWO_PI, ns)
        ang = rng.uniform(0, TWO_PI, ns)  # direction a -> b
        half = th / 2
        a_in = _sector(ang - az_a, half)
        b_in = _sector(ang + math.pi - az_b, half)
        freqs = np.array([np.mean(a_in & b_in),
                          np.mean(a_in ^ b_in),
                          np.mean(~a_in & ~b_in)])
        probs = np.array([th ** 2 / (4 * math.pi ** 2),
                          (TWO_PI - th) * th / (2 * math.pi ** 2),
                          (TWO_PI - th) ** 2 / (4 * math.pi ** 2)])
        sig = np.sqrt(probs * (1 - probs) / ns)
        z = np.max(np.abs(freqs - probs) / sig)
        worst = max(worst, float(z))
    return worst <= 3.0, f"max |z| {worst:.2f} over 4 beam widths"


def _sector(offset, half):
    off = (np.asarray(offset) + math.pi) % TWO_PI - math.pi
    return (off >= -half) & (off < half)


def _chk_gain_expectation(config):
    th = min(config.theta_for(config.n_ladder[0]), math.pi)
    pattern = derive_gains(th, config.rho_for(th))
    rng = np.random.default_rng(1)
    ns = 100_000
    az_a = rng.uniform(0, TWO_PI, ns)
    az_b = rng.uniform(0, TWO_PI, ns)
    ang = rng.uniform(0, TWO_PI, ns)
    half = th / 2
    a_in = _sector(ang - az_a, half)
    b_in = _sector(ang + math.pi - az_b, half)
    gm2 = pattern.g_main ** 2
    gms = pattern.g_main * pattern.g_side
    gs2 = pattern.g_side ** 2
    x = np.where(a_in & b_in, gm2, np.where(a_in | b_in, gms, gs2))
    expect = expected_inter_interference(pattern)
    z = abs(x.mean() - expect) / (x.std(ddof=1) / math.sqrt(ns))
    return z <= 3.0, f"MC mean {x.mean():.4f} vs analytic {expect:.4f} (|z| {z:.2f})"


def _chk_tail(alpha):
    s100 = interference_tail(alpha, 100)
    s1000 = interference_tail(alpha, 1000)
    gap = abs(s1000 - s100)
    return gap < 1e-4, f"partial sums {s100:.6f} -> {s1000:.6f}, gap {gap:.3g}"


def _chk_typicality():
    n, m, slots, seeds = 256, 16, 3 * 256 * 256, 10
    bound = 2 * m / n - 1 / n
    ok = 0
    for seed in range(seeds):
        sched = draw_schedule(n, m, slots, seed=[seed, 0x71C], keep_sets=1)
        if sched.tallies.min() / slots >= bound:
            ok += 1
    return ok >= seeds - 1, f"{ok}/{seeds} seeds meet min T_p/S >= {bound:.4f}"


def _chk_sinr_paths(config):
    """Vectorized slot evaluation must agree with the per-receiver loop."""
    alpha = config.alpha if config.alpha > 2 else 4.0
    worst = 0.0
    for trial in range(50):
        n = 4 + 2 * (trial % 7)
        cfg = replace(config, mode="dense", alpha=alpha,
                      theta={"fixed": math.pi / 2}, rho=0.5,
                      n_ladder=(max(n, 4),), seeds=(trial,),
                      slots=16, eval_slots=4)
        inst, grid, params, routes = _build_adhoc(cfg, max(n, 4), trial)
        pattern = derive_gains(math.pi / 2, 0.5)
        table = build_route_table(routes, grid)
        schedule = draw_schedule(max(n, 4), min(2, max(n, 4) // 2), 16,
                                 seed=[trial, 7], keep_sets=16)
        for s in range(4):
            act = activate(s, schedule, table)
            if len(act) == 0:
                continue
            out = evaluate_slot(act, pattern, alpha, params.tx_power, config.noise)
            for i in range(len(act)):
                rec = sinr((int(act.pair[i]), int(act.hop[i])), act, pattern,
                           alpha, params.tx_power, config.noise)
                rel = abs(rec.sinr - out["sinr"][i]) / max(rec.sinr, 1e-300)
                worst = max(worst, rel)
    return worst < 1e-12, f"max relative disagreement {worst:.3g}"


def _chk_tier_dominance(config):
    from .phy import intra_inter_split
    alpha = config.alpha if config.alpha > 2 else 4.0
    cfg = replace(config, mode="dense", alpha=alpha, n_ladder=(1024,),
                  seeds=(0,), slots=64, eval_slots=16)
    n = 1024
    theta = cfg.theta_for(n)
    pattern = derive_gains(theta, cfg.rho_for(theta))
    inst, grid, params, routes = _build_adhoc(cfg, n, 0)
    table = build_route_table(routes, grid)
    schedule = draw_schedule(n, pairs_per_slot(params), 64, seed=[0, 3],
                             keep_sets=16)
    dominated = total = 0
    for s in range(16):
        act = activate(s, schedule, table)
        for i in range(len(act)):
            br = intra_inter_split((int(act.pair[i]), int(act.hop[i])), act,
                                   pattern, alpha, params.tx_power)
            total += 1
            if br.exact_outside <= br.tier_bound * (1 + 1e-9):
                dominated += 1
    frac = dominated / total if total else 1.0
    return frac >= 0.99, f"bound dominates on {frac:.1%} of {total} receivers"


def _chk_lemma2(config):
    """Mean inter-pair interference must not trend with log2 n."""
    tail_ok, tail_detail = _chk_tail(config.alpha)
    if not tail_ok:
        return False, f"ring series diverges: {tail_detail}"
    cfg = replace(config, seeds=config.seeds[:3],
                  eval_slots=min(config.eval_slots, 256))
    vals = []
    for n in cfg.n_ladder:
        per_seed = [run_point(cfg, n, s).mean_inter for s in cfg.seeds]
        vals.append(float(np.median(per_seed)))
    base = vals[0] if vals[0] > 0 else 1.0
    y = np.array(vals) / base
    x = np.log2(np.array(cfg.n_ladder, dtype=float))
    slope = float(np.polyfit(x, y, 1)[0])
    return abs(slope) < 0.05, f"normalized interference slope {slope:+.4f} per log2 n"

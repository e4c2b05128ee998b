"""Experiment orchestration: cycle censuses, tails, moments, SLLN and CLT runs.

Every run is a pure function of (config, master seed): sample i always uses
the counter-mixed seed mix_seed(master, i), aggregation is a deterministic
fold over sample index, and worker pools only change wall time, never bytes
of output. Timing telemetry is kept out of the canonical records for the
same reason.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field as dc_field, asdict

import numpy as np

from .errors import (
    AllSamplesFailed,
    CycleCensusError,
    DegenerateVariance,
    EmptyInput,
    InadmissibleField,
    InvalidGeometry,
    SeparationCheckFailed,
)
from .families import (
    ParametricFamily,
    SummaryStats,
    TailTable,
    check_separation_conditions,
    count_many,
    empirical_tail,
    expectation_and_variance,
)
from .fields import Ellipsoid, PlanarField, rigid_field_from_roots, sample_ellipsoid
from .randpoly import KacResult, kac_experiment, uniformity_test
from .registry import FlowRhs, build_family, build_family_sequence, ode_flow_family
from .returnmap import SolverConfig, admissible_budget, count_limit_cycles
from .sampling import mix_seed, rng_for, uniform_complex_ball

DEFAULT_THRESHOLDS = tuple(range(0, 13))
CALIBRATION_SAMPLES = 10_000
COUNT_CHUNK = 8192  # rows per count_many call; bounds the contour work matrix


def _count_chunked(fam: ParametricFamily, block: np.ndarray):
    """count_many over row chunks; identical output, bounded peak memory."""
    counts: list = []
    failed: list = []
    for start in range(0, block.shape[0], COUNT_CHUNK):
        got, bad = count_many(fam, block[start : start + COUNT_CHUNK])
        counts.extend(got)
        failed.extend(start + b for b in bad)
    return counts, failed


@dataclass
class ExperimentConfig:
    """One experiment request; unused fields are ignored by other kinds.

    experiment: theorem_a | theorem_b_tail | slln | clt | kac.
    For theorem_a the coefficient budget must respect the contraction regime
    N <= 1/(192 pi d^2); n_budget None picks exactly that bound.
    """

    experiment: str
    degree: int = 3
    n_budget: float | None = None
    sample_count: int = 1000
    seed: int = 1900
    thresholds: tuple = DEFAULT_THRESHOLDS
    solver: SolverConfig = dc_field(default_factory=SolverConfig)
    threads: int = 1
    radius_k: float = 0.5
    field_source: str = "ellipsoid"  # or "rigid"
    rigid_roots: tuple = (0.04, 0.09, 0.16)
    family: str = "blaschke-hyperplane"
    family_params: dict = dc_field(default_factory=dict)
    horizon: int = 200
    repetitions: int = 500
    separation_delta: float = 0.1
    separation_s_prime: float | None = None
    calibration_samples: int = CALIBRATION_SAMPLES
    epsilon: float = 0.1
    k_degree: int = 200

    def __post_init__(self):
        known = ("theorem_a", "theorem_b_tail", "slln", "clt", "kac")
        if self.experiment not in known:
            raise InvalidGeometry(f"experiment must be one of {known}")
        if self.sample_count < 1:
            raise InvalidGeometry("sample_count must be at least 1")
        if self.threads < 1:
            raise InvalidGeometry("threads must be at least 1")
        if self.experiment == "theorem_a" and self.field_source == "ellipsoid":
            cap = admissible_budget(self.degree)
            if self.n_budget is None:
                self.n_budget = cap
            if self.n_budget > cap * (1.0 + 1e-12):
                raise InadmissibleField(
                    f"budget {self.n_budget:.3e} exceeds the admissible "
                    f"{cap:.3e} for degree {self.degree}"
                )
        self.thresholds = tuple(int(t) for t in self.thresholds)


@dataclass
class SampleRecord:
    """Per-sample outcome of a cycle census or family count."""

    sample_index: int
    seed: int
    norm: float
    degree: int
    real_cycles: int | None
    complex_zero_count: int | None
    is_center: bool
    tangential_flags: int
    solver_failure: bool
    degenerate: bool
    boundary_zero: bool
    error: str = ""
    wall_time: float = 0.0

    def to_json(self) -> str:
        payload = asdict(self)
        del payload["wall_time"]  # telemetry; would break byte-level reproducibility
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _census_record(index: int, seed: int, field: PlanarField, cfg: ExperimentConfig) -> SampleRecord:
    from .errors import PersistentBoundaryZero

    start = time.perf_counter()
    base = dict(
        sample_index=index,
        seed=seed,
        norm=field.norm(),
        degree=field.degree,
        real_cycles=None,
        complex_zero_count=None,
        is_center=False,
        tangential_flags=0,
        solver_failure=False,
        degenerate=False,
        boundary_zero=False,
    )
    budget = None if cfg.field_source == "rigid" else cfg.n_budget
    try:
        cc = count_limit_cycles(field, cfg.radius_k, cfg.solver, n_budget=budget)
        base.update(
            real_cycles=cc.real_cycles,
            complex_zero_count=cc.complex_zero_count,
            is_center=cc.is_center,
            tangential_flags=cc.tangential_flags,
            degenerate=cc.is_center
            or (cc.complex_detail is not None and cc.complex_detail.is_degenerate),
        )
    except PersistentBoundaryZero as exc:
        base.update(boundary_zero=True, error=str(exc))
    except CycleCensusError as exc:
        base.update(solver_failure=True, error=f"{type(exc).__name__}: {exc}")
    rec = SampleRecord(**base)
    rec.wall_time = time.perf_counter() - start
    return rec


def _field_for_index(cfg: ExperimentConfig, index: int) -> PlanarField:
    seed = mix_seed(cfg.seed, index)
    if cfg.field_source == "rigid":
        # deterministic ground-truth sub-run: fixed roots, random small scale
        rng = np.random.default_rng(seed)
        scale = 10.0 ** rng.uniform(-4.0, -3.0)
        return rigid_field_from_roots(np.asarray(cfg.rigid_roots), scale)
    ell = Ellipsoid(1.0, cfg.n_budget, cfg.degree)
    return sample_ellipsoid(ell, seed)


def _theorem_a_worker(args) -> SampleRecord:
    cfg, index = args
    field = _field_for_index(cfg, index)
    return _census_record(index, mix_seed(cfg.seed, index), field, cfg)


def _run_indexed(worker, payloads, threads: int):
    """Deterministic order-preserving map, inline or via a process pool."""
    if threads <= 1:
        return [worker(p) for p in payloads]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, len(payloads) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, payloads, chunksize=chunk))


@dataclass
class TheoremAResult:
    records: list
    tail_complex: TailTable
    tail_real: TailTable
    stats_complex: SummaryStats
    stats_real: SummaryStats
    zero_cycle_fraction: float
    failed_count: int
    runtime_seconds: float


def run_theorem_a(cfg: ExperimentConfig) -> TheoremAResult:
    """Cycle census over an ellipsoid (or rigid ground-truth) ensemble.

    Per-sample failures are recorded and skipped by the statistics; sentinel
    counts (centers, identically-zero displacement slices) enter the tails
    as exceeding every threshold but are excluded from moments.
    """
    if cfg.experiment != "theorem_a":
        raise InvalidGeometry("config is not a theorem_a request")
    start = time.perf_counter()
    records = _run_indexed(
        _theorem_a_worker, [(cfg, i) for i in range(cfg.sample_count)], cfg.threads
    )
    usable = [r for r in records if not (r.solver_failure or r.boundary_zero)]
    if not usable:
        raise AllSamplesFailed(f"all {len(records)} samples failed")

    def tail_entry(rec, value):
        return None if rec.degenerate else value

    complex_counts = [tail_entry(r, r.complex_zero_count) for r in usable]
    real_counts = [tail_entry(r, r.real_cycles) for r in usable]
    tail_complex = empirical_tail(complex_counts, cfg.thresholds)
    tail_real = empirical_tail(real_counts, cfg.thresholds)
    stats_complex = expectation_and_variance(complex_counts)
    stats_real = expectation_and_variance(real_counts)
    finite_real = [c for c in real_counts if c is not None]
    zero_fraction = (
        float(np.mean([c == 0 for c in finite_real])) if finite_real else math.nan
    )
    return TheoremAResult(
        records=records,
        tail_complex=tail_complex,
        tail_real=tail_real,
        stats_complex=stats_complex,
        stats_real=stats_real,
        zero_cycle_fraction=zero_fraction,
        failed_count=len(records) - len(usable),
        runtime_seconds=time.perf_counter() - start,
    )


@dataclass
class FamilyTailResult:
    records: list
    tail: TailTable
    stats: SummaryStats
    failed_count: int
    runtime_seconds: float


def _family_count_records(fam: ParametricFamily, cfg: ExperimentConfig, base_index: int = 0):
    """Draw unit-ball parameters and count zeros, one record per draw."""
    draws = np.stack(
        [
            uniform_complex_ball(rng_for(cfg.seed, base_index + i), fam.param_dim)
            for i in range(cfg.sample_count)
        ]
    )
    counts, failed = _count_chunked(fam, draws)
    failed_set = set(failed)
    records = []
    for i in range(cfg.sample_count):
        records.append(
            SampleRecord(
                sample_index=i,
                seed=mix_seed(cfg.seed, base_index + i),
                norm=float(np.linalg.norm(draws[i])),
                degree=fam.param_dim,
                real_cycles=None,
                complex_zero_count=None if i in failed_set else counts[i],
                is_center=False,
                tangential_flags=0,
                solver_failure=False,
                degenerate=(i not in failed_set) and counts[i] is None,
                boundary_zero=i in failed_set,
            )
        )
    return records, counts, failed_set


def run_family_tail(cfg: ExperimentConfig) -> FamilyTailResult:
    """Tail distribution of zero counts for one registry family."""
    if cfg.experiment != "theorem_b_tail":
        raise InvalidGeometry("config is not a theorem_b_tail request")
    start = time.perf_counter()
    fam = build_family(cfg.family, cfg.family_params)
    records, counts, failed = _family_count_records(fam, cfg)
    usable = [c for i, c in enumerate(counts) if i not in failed]
    if not usable:
        raise AllSamplesFailed("every draw failed the contour count")
    tail = empirical_tail(usable, cfg.thresholds)
    stats = expectation_and_variance(usable)
    return FamilyTailResult(
        records=records,
        tail=tail,
        stats=stats,
        failed_count=len(failed),
        runtime_seconds=time.perf_counter() - start,
    )


@dataclass
class SllnResult:
    counts: list
    running_means: np.ndarray
    excluded: list
    families_label: str
    runtime_seconds: float


def run_slln(cfg: ExperimentConfig) -> SllnResult:
    """Running means (1/n) sum N_k for one draw per family index.

    Degenerate sentinels and failed counts are excluded from the running
    mean (they form the removed measure-zero set) and reported by index.
    """
    if cfg.experiment != "slln":
        raise InvalidGeometry("config is not an slln request")
    start = time.perf_counter()
    fams = build_family_sequence(cfg.family, cfg.horizon, cfg.family_params)
    draws = [
        uniform_complex_ball(rng_for(cfg.seed, k), fams[k].param_dim)
        for k in range(cfg.horizon)
    ]
    counts: list = [None] * cfg.horizon
    failed_all: set = set()
    by_family: dict = {}
    for k, fam in enumerate(fams):
        by_family.setdefault(id(fam), (fam, []))[1].append(k)
    for fam, idxs in by_family.values():
        block = np.stack([draws[k] for k in idxs])
        got, failed = _count_chunked(fam, block)
        for pos, k in enumerate(idxs):
            counts[k] = got[pos]
        failed_all.update(idxs[pos] for pos in failed)

    means = np.full(cfg.horizon, math.nan)
    total = 0.0
    included = 0
    excluded = []
    for k in range(cfg.horizon):
        if k in failed_all or counts[k] is None:
            excluded.append(k)
        else:
            total += counts[k]
            included += 1
        means[k] = total / included if included else math.nan
    return SllnResult(
        counts=counts,
        running_means=means,
        excluded=excluded,
        families_label=fams[0].label if fams else "",
        runtime_seconds=time.perf_counter() - start,
    )


@dataclass
class CltReport:
    """Normalized-sum ensemble and its distance to the standard normal."""

    n: int
    repetitions: int
    b_n: float
    normalized_sums: np.ndarray
    ks_vs_normal: float
    moments: list  # (k, E, D) rows from the calibration pass
    excluded_repetitions: int
    runtime_seconds: float


def _normal_cdf(x: np.ndarray) -> np.ndarray:
    from scipy.special import ndtr

    return ndtr(x)


def ks_distance_to_normal(values: np.ndarray) -> float:
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.size
    if n == 0:
        raise EmptyInput("no values for the KS distance")
    cdf = _normal_cdf(v)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def run_clt(cfg: ExperimentConfig) -> CltReport:
    """Central-limit harness for sums of per-family zero counts.

    The separation premises are checked first and failures refuse the run.
    Per-family moments come from an independent calibration pass (one block
    of draws per distinct family object, never reused as test draws); a
    calibrated variance below 1e-6 raises DegenerateVariance. Test draws
    form repetitions of (N_1, ..., N_n) whose normalized sums are compared
    to the standard normal by KS distance.
    """
    if cfg.experiment != "clt":
        raise InvalidGeometry("config is not a clt request")
    start = time.perf_counter()
    fams = build_family_sequence(cfg.family, cfg.horizon, cfg.family_params)
    n = cfg.horizon

    distinct: list = []
    for fam in fams:
        if not any(fam is g for g in distinct):
            distinct.append(fam)
    s_min = min(f.disk_radius for f in distinct)
    s_prime = cfg.separation_s_prime if cfg.separation_s_prime is not None else 0.5 * s_min
    verdicts = check_separation_conditions(distinct, cfg.separation_delta, s_prime, seed=cfg.seed)
    bad = [i for i, (a, b) in enumerate(verdicts) if not (a and b)]
    if bad:
        details = ", ".join(
            f"{distinct[i].label or i}: (a={verdicts[i][0]}, b={verdicts[i][1]})" for i in bad
        )
        raise SeparationCheckFailed(
            f"separation premises not witnessed for: {details} "
            f"(delta={cfg.separation_delta}, s'={s_prime})"
        )

    # calibration: independent draw block per distinct family
    calib: dict = {}
    for j, fam in enumerate(distinct):
        calib_seed = mix_seed(cfg.seed, 900_000_000 + j)
        block = np.stack(
            [
                uniform_complex_ball(rng_for(calib_seed, i), fam.param_dim)
                for i in range(cfg.calibration_samples)
            ]
        )
        counts, failed = _count_chunked(fam, block)
        finite = [c for i, c in enumerate(counts) if c is not None and i not in set(failed)]
        stats = expectation_and_variance(finite)
        if stats.variance < 1e-6:
            raise DegenerateVariance(
                f"calibrated variance {stats.variance:.2e} of family "
                f"{fam.label or j} is below 1e-6; the normalized sum is ill-posed"
            )
        calib[id(fam)] = stats

    moments = [(k + 1, calib[id(fams[k])].expectation, calib[id(fams[k])].variance) for k in range(n)]
    b_n = math.sqrt(sum(row[2] for row in moments))

    # test draws, grouped by distinct family across all repetitions
    reps = cfg.repetitions
    n_counts: dict = {}
    for j, fam in enumerate(distinct):
        idxs = [k for k in range(n) if fams[k] is fam]
        flat = [(rep, k) for rep in range(reps) for k in idxs]
        block = np.stack(
            [
                uniform_complex_ball(rng_for(cfg.seed, 1_000_000 + rep * n + k), fam.param_dim)
                for rep, k in flat
            ]
        )
        counts, failed = _count_chunked(fam, block)
        failed_set = set(failed)
        for pos, (rep, k) in enumerate(flat):
            n_counts[(rep, k)] = None if pos in failed_set else counts[pos]

    sums = []
    excluded = 0
    for rep in range(reps):
        vals = [n_counts[(rep, k)] for k in range(n)]
        if any(v is None for v in vals):
            excluded += 1
            continue
        centered = sum(vals[k] - calib[id(fams[k])].expectation for k in range(n))
        sums.append(centered / b_n)
    sums = np.asarray(sums)
    if sums.size == 0:
        raise AllSamplesFailed("every repetition contained a failed draw")
    return CltReport(
        n=n,
        repetitions=reps,
        b_n=b_n,
        normalized_sums=sums,
        ks_vs_normal=ks_distance_to_normal(sums),
        moments=moments,
        excluded_repetitions=excluded,
        runtime_seconds=time.perf_counter() - start,
    )


@dataclass
class KacRunResult:
    kac: KacResult
    ks_statistic: float
    p_value: float
    runtime_seconds: float


def run_kac(cfg: ExperimentConfig) -> KacRunResult:
    if cfg.experiment != "kac":
        raise InvalidGeometry("config is not a kac request")
    start = time.perf_counter()
    res = kac_experiment(cfg.k_degree, cfg.sample_count, cfg.epsilon, cfg.seed)
    ks, p = uniformity_test(res.arguments)
    return KacRunResult(
        kac=res, ks_statistic=ks, p_value=p, runtime_seconds=time.perf_counter() - start
    )


# ---------------------------------------------------------------------------
# output writers: canonical text, atomic replacement


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = os.path.join(directory, f".{os.path.basename(path)}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_jsonl(path: str, records) -> None:
    _atomic_write(path, "".join(r.to_json() + "\n" for r in records))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def write_tail_csv(path: str, table: TailTable) -> None:
    rows = [
        (int(t), float(f), int(c))
        for t, f, c in zip(table.thresholds, table.tail_fractions, table.exceed_counts)
    ]
    _atomic_write(path, _csv_text(("T", "fraction", "count"), rows))


def write_moments_csv(path: str, rows) -> None:
    _atomic_write(
        path,
        _csv_text(("k", "E", "D"), [(int(k), float(e), float(d)) for k, e, d in rows]),
    )


def write_clt_csv(path: str, report: CltReport) -> None:
    rows = [(i, float(s)) for i, s in enumerate(report.normalized_sums)]
    _atomic_write(path, _csv_text(("repetition", "normalized_sum"), rows))


def write_kac_csv(path: str, result: KacResult) -> None:
    rows = [
        (result.k, idx, ann, ins, out) for idx, ann, ins, out in result.records
    ]
    _atomic_write(
        path,
        _csv_text(("k", "sample_index", "annulus_count", "inside_count", "outside_count"), rows),
    )


def write_angles_csv(path: str, angles: np.ndarray) -> None:
    _atomic_write(path, _csv_text(("argument",), [(repr(float(a)),) for a in angles]))


def write_timings_csv(path: str, records) -> None:
    """Wall-time telemetry; inherently nondeterministic, so the verification
    comparisons skip this file by name."""
    rows = [(r.sample_index, repr(float(r.wall_time))) for r in records]
    _atomic_write(path, _csv_text(("sample_index", "wall_time"), rows))


def write_plot_script(path: str, csv_names) -> None:
    lines = [
        "# plotting commands for the CSV outputs in this directory",
        "# run with any tool that reads CSV; shown here as python+matplotlib",
        "import csv",
        "import matplotlib.pyplot as plt",
        "",
    ]
    for name in csv_names:
        stem = os.path.splitext(os.path.basename(name))[0].replace("-", "_")
        lines += [
            f"with open({name!r}) as fh:",
            f"    {stem}_rows = list(csv.DictReader(fh))",
        ]
    if csv_names:
        first = os.path.splitext(os.path.basename(csv_names[0]))[0].replace("-", "_")
        lines += [
            "",
            f"cols = {first}_rows[0].keys()",
            f"xs = [float(r[list(cols)[0]]) for r in {first}_rows]",
            f"ys = [float(r[list(cols)[1]]) for r in {first}_rows]",
            "plt.semilogy(xs, ys, marker='o')",
            "plt.xlabel('threshold T')",
            "plt.ylabel('tail fraction')",
            "plt.savefig('tail.png', dpi=150)",
        ]
    _atomic_write(path, "\n".join(lines) + "\n")

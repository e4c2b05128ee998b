"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 experiment failure, 3 verification
failure. Every option can come from three places with fixed precedence:
inline flag > --config JSON > built-in default (threads additionally fall
back to the CYCLE_CENSUS_THREADS environment variable). Commands that write
results only ever touch the --out directory and echo the resolved options to
effective-config.json there.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .ensembles import (
    ExperimentConfig,
    run_clt,
    run_family_tail,
    run_kac,
    run_slln,
    run_theorem_a,
    write_angles_csv,
    write_clt_csv,
    write_jsonl,
    write_kac_csv,
    write_moments_csv,
    write_plot_script,
    write_tail_csv,
    write_timings_csv,
    _atomic_write,
)
from .errors import CycleCensusError
from .fields import Ellipsoid, PlanarField, sample_ellipsoid
from .returnmap import SolverConfig, admissible_budget, count_limit_cycles
from .sampling import mix_seed

DEFAULT_SEED = 1900  # fixed documented default so bare runs are reproducible
THREADS_ENV = "CYCLE_CENSUS_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); the contract wants 1
        raise UsageError(message)


def _add_common(sub, *names):
    if "degree" in names:
        sub.add_argument("--degree", type=int, default=None, help="polynomial degree d")
    if "budget" in names:
        sub.add_argument(
            "--budget-N",
            dest="budget_n",
            type=float,
            default=None,
            help="coefficient budget N (default 1/(192 pi d^2))",
        )
    if "samples" in names:
        sub.add_argument("--samples", type=int, default=None, help="number of samples")
    if "seed" in names:
        sub.add_argument("--seed", type=int, default=None, help=f"master seed (default {DEFAULT_SEED})")
    if "out" in names:
        sub.add_argument("--out", required=True, help="output directory")
    if "threads" in names:
        sub.add_argument("--threads", type=int, default=None, help="worker count")
    if "thresholds" in names:
        sub.add_argument(
            "--thresholds", default=None, help="comma-separated integer tail thresholds"
        )
    if "config" in names:
        sub.add_argument("--config", default=None, help="JSON file with option defaults")
    if "family" in names:
        sub.add_argument("--family", default=None, help="registry family name")
        sub.add_argument(
            "--family-params", default=None, help="JSON dict of family parameters"
        )


def build_parser() -> _Parser:
    parser = _Parser(prog="cycle-census", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sample-fields", help="draw fields from the coefficient ellipsoid")
    _add_common(p, "degree", "budget", "samples", "seed", "out", "config")

    p = subs.add_parser("count-cycles", help="census one field, print the count as JSON")
    p.add_argument("--field", required=True, help="field JSON file")
    p.add_argument("--K", dest="radius_k", type=float, default=0.5, help="cycle disk radius")
    _add_common(p, "budget", "config")

    p = subs.add_parser("theorem-a", help="cycle census over a random ensemble")
    _add_common(p, "degree", "budget", "samples", "seed", "out", "threads", "thresholds", "config")
    p.add_argument("--source", choices=("ellipsoid", "rigid"), default=None)

    p = subs.add_parser("tail", help="zero-count tail for one registry family")
    _add_common(p, "samples", "seed", "out", "threads", "thresholds", "config", "family")

    p = subs.add_parser("slln", help="running means of zero counts along a family sequence")
    _add_common(p, "seed", "out", "config", "family")
    p.add_argument("--horizon", type=int, default=None, help="sequence length n")

    p = subs.add_parser("clt", help="normalized sums of zero counts vs the normal law")
    _add_common(p, "seed", "out", "threads", "config", "family")
    p.add_argument("--horizon", type=int, default=None, help="summands per repetition")
    p.add_argument("--repetitions", type=int, default=None, help="repetitions of the sum")

    p = subs.add_parser("kac", help="root clustering of random polynomials near the unit circle")
    _add_common(p, "samples", "seed", "out", "config")
    p.add_argument("--epsilon", type=float, default=None, help="annulus half-width")
    p.add_argument("--k", dest="k_degree", type=int, default=None, help="polynomial degree")

    p = subs.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--only", default=None, help="substring filter on criterion ids")
    p.add_argument("--out", default=None, help="optional directory for the report JSON")
    _add_common(p, "threads", "config")
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return cfg


def _resolve(args, key: str, file_cfg: dict, default):
    inline = getattr(args, key, None)
    if inline is not None:
        return inline
    if key in file_cfg:
        return file_cfg[key]
    return default


def _resolve_threads(args, file_cfg: dict) -> int:
    inline = getattr(args, "threads", None)
    if inline is not None:
        return inline
    if "threads" in file_cfg:
        return int(file_cfg["threads"])
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return 1


def _parse_thresholds(raw) -> tuple:
    if raw is None:
        return tuple(range(0, 13))
    if isinstance(raw, (list, tuple)):
        return tuple(int(t) for t in raw)
    try:
        return tuple(int(part) for part in str(raw).split(",") if part.strip())
    except ValueError:
        raise UsageError(f"bad thresholds {raw!r}; expected comma-separated integers")


def _solver_from_config(file_cfg: dict) -> SolverConfig:
    if "solver" in file_cfg:
        return SolverConfig.from_json(file_cfg["solver"])
    return SolverConfig()


def _echo_config(out_dir: str, payload: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(
        os.path.join(out_dir, "effective-config.json"),
        json.dumps(payload, sort_keys=True, indent=2) + "\n",
    )


def _family_params(args, file_cfg: dict) -> dict:
    raw = getattr(args, "family_params", None)
    if raw is not None:
        try:
            params = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad --family-params JSON: {exc}")
    else:
        params = file_cfg.get("family_params", {})
    if not isinstance(params, dict):
        raise UsageError("family parameters must form a JSON object")
    return params


def _cmd_sample_fields(args) -> int:
    file_cfg = _load_config(args.config)
    degree = int(_resolve(args, "degree", file_cfg, 3))
    budget = _resolve(args, "budget_n", file_cfg, None)
    budget = float(budget) if budget is not None else admissible_budget(degree)
    samples = int(_resolve(args, "samples", file_cfg, 10))
    seed = int(_resolve(args, "seed", file_cfg, DEFAULT_SEED))
    _echo_config(
        args.out,
        {
            "command": "sample-fields",
            "degree": degree,
            "budget_n": budget,
            "samples": samples,
            "seed": seed,
        },
    )
    ell = Ellipsoid(1.0, budget, degree)
    for i in range(samples):
        field = sample_ellipsoid(ell, mix_seed(seed, i))
        _atomic_write(
            os.path.join(args.out, f"field-{i:04d}.json"), field.to_json() + "\n"
        )
    print(f"wrote {samples} fields to {args.out}")
    return 0


def _cmd_count_cycles(args) -> int:
    file_cfg = _load_config(args.config)
    try:
        with open(args.field, "r", encoding="utf-8") as fh:
            field = PlanarField.from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read field file {args.field}: {exc}")
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad field JSON in {args.field}: {exc}")
    budget = _resolve(args, "budget_n", file_cfg, None)
    budget = float(budget) if budget is not None else None
    solver = _solver_from_config(file_cfg)
    count = count_limit_cycles(field, args.radius_k, solver, n_budget=budget)
    payload = {
        "real_cycles": count.real_cycles,
        "tangential_flags": count.tangential_flags,
        "complex_zero_count": count.complex_zero_count,
        "is_center": count.is_center,
        "cycle_radii": [float(r) for r in np.asarray(count.cycle_radii)],
    }
    print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    return 0


def _cmd_theorem_a(args) -> int:
    file_cfg = _load_config(args.config)
    degree = int(_resolve(args, "degree", file_cfg, 3))
    budget = _resolve(args, "budget_n", file_cfg, None)
    cfg = ExperimentConfig(
        experiment="theorem_a",
        degree=degree,
        n_budget=float(budget) if budget is not None else None,
        sample_count=int(_resolve(args, "samples", file_cfg, 1000)),
        seed=int(_resolve(args, "seed", file_cfg, DEFAULT_SEED)),
        thresholds=_parse_thresholds(_resolve(args, "thresholds", file_cfg, None)),
        solver=_solver_from_config(file_cfg),
        threads=_resolve_threads(args, file_cfg),
        field_source=_resolve(args, "source", file_cfg, "ellipsoid"),
    )
    _echo_config(
        args.out,
        {
            "command": "theorem-a",
            "degree": cfg.degree,
            "budget_n": cfg.n_budget,
            "samples": cfg.sample_count,
            "seed": cfg.seed,
            "thresholds": list(cfg.thresholds),
            "threads": cfg.threads,
            "field_source": cfg.field_source,
            "solver": cfg.solver.to_json(),
        },
    )
    result = run_theorem_a(cfg)
    write_jsonl(os.path.join(args.out, "records.jsonl"), result.records)
    write_tail_csv(os.path.join(args.out, "tail-complex.csv"), result.tail_complex)
    write_tail_csv(os.path.join(args.out, "tail-real.csv"), result.tail_real)
    write_timings_csv(os.path.join(args.out, "timings.csv"), result.records)
    summary = {
        "complex_expectation": result.stats_complex.expectation,
        "complex_variance": result.stats_complex.variance,
        "real_expectation": result.stats_real.expectation,
        "real_variance": result.stats_real.variance,
        "zero_cycle_fraction": result.zero_cycle_fraction,
        "tail_fit_c1": result.tail_complex.fit_c1,
        "tail_fit_c2": result.tail_complex.fit_c2,
        "tail_fit_r2": result.tail_complex.fit_r2,
        "failed_count": result.failed_count,
        "sample_count": cfg.sample_count,
        "runtime_seconds": round(result.runtime_seconds, 3),
    }
    _atomic_write(
        os.path.join(args.out, "summary.json"),
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
    )
    write_plot_script(os.path.join(args.out, "plot_tail.py"), ["tail-complex.csv"])
    print(
        f"{cfg.sample_count} samples: E[complex]={result.stats_complex.expectation:.4f}, "
        f"E[real]={result.stats_real.expectation:.4f}, "
        f"zero-cycle fraction={result.zero_cycle_fraction:.4f}, "
        f"failed={result.failed_count}"
    )
    return 0


def _cmd_tail(args) -> int:
    file_cfg = _load_config(args.config)
    cfg = ExperimentConfig(
        experiment="theorem_b_tail",
        sample_count=int(_resolve(args, "samples", file_cfg, 1000)),
        seed=int(_resolve(args, "seed", file_cfg, DEFAULT_SEED)),
        thresholds=_parse_thresholds(_resolve(args, "thresholds", file_cfg, None)),
        threads=_resolve_threads(args, file_cfg),
        family=_resolve(args, "family", file_cfg, "blaschke-hyperplane"),
        family_params=_family_params(args, file_cfg),
    )
    _echo_config(
        args.out,
        {
            "command": "tail",
            "family": cfg.family,
            "family_params": cfg.family_params,
            "samples": cfg.sample_count,
            "seed": cfg.seed,
            "thresholds": list(cfg.thresholds),
        },
    )
    result = run_family_tail(cfg)
    write_jsonl(os.path.join(args.out, "records.jsonl"), result.records)
    write_tail_csv(os.path.join(args.out, "tail.csv"), result.tail)
    summary = {
        "expectation": result.stats.expectation,
        "variance": result.stats.variance,
        "rearrangement_expectation": result.stats.rearrangement_expectation,
        "fit_c1": result.tail.fit_c1,
        "fit_c2": result.tail.fit_c2,
        "failed_count": result.failed_count,
        "runtime_seconds": round(result.runtime_seconds, 3),
    }
    _atomic_write(
        os.path.join(args.out, "summary.json"),
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
    )
    write_plot_script(os.path.join(args.out, "plot_tail.py"), ["tail.csv"])
    print(
        f"{cfg.sample_count} draws of {cfg.family}: E={result.stats.expectation:.4f}, "
        f"D={result.stats.variance:.4f}, failed={result.failed_count}"
    )
    return 0


def _cmd_slln(args) -> int:
    file_cfg = _load_config(args.config)
    cfg = ExperimentConfig(
        experiment="slln",
        seed=int(_resolve(args, "seed", file_cfg, DEFAULT_SEED)),
        family=_resolve(args, "family", file_cfg, "blaschke-hyperplane"),
        family_params=_family_params(args, file_cfg),
        horizon=int(_resolve(args, "horizon", file_cfg, 200)),
    )
    _echo_config(
        args.out,
        {
            "command": "slln",
            "family": cfg.family,
            "family_params": cfg.family_params,
            "horizon": cfg.horizon,
            "seed": cfg.seed,
        },
    )
    result = run_slln(cfg)
    rows = []
    excluded = set(result.excluded)
    for k in range(cfg.horizon):
        count = result.counts[k]
        rows.append(
            (
                k + 1,
                "" if count is None else int(count),
                float(result.running_means[k]),
                int(k in excluded),
            )
        )
    from .ensembles import _csv_text

    _atomic_write(
        os.path.join(args.out, "running-means.csv"),
        _csv_text(("k", "count", "running_mean", "excluded"), rows),
    )
    summary = {
        "final_mean": float(result.running_means[-1]),
        "excluded": result.excluded,
        "runtime_seconds": round(result.runtime_seconds, 3),
    }
    _atomic_write(
        os.path.join(args.out, "summary.json"),
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
    )
    print(f"horizon {cfg.horizon}: final running mean {result.running_means[-1]:.4f}")
    return 0


def _cmd_clt(args) -> int:
    file_cfg = _load_config(args.config)
    cfg = ExperimentConfig(
        experiment="clt",
        seed=int(_resolve(args, "seed", file_cfg, DEFAULT_SEED)),
        threads=_resolve_threads(args, file_cfg),
        family=_resolve(args, "family", file_cfg, "blaschke-hyperplane"),
        family_params=_family_params(args, file_cfg),
        horizon=int(_resolve(args, "horizon", file_cfg, 200)),
        repetitions=int(_resolve(args, "repetitions", file_cfg, 500)),
        calibration_samples=int(_resolve(args, "calibration_samples", file_cfg, 10_000)),
    )
    _echo_config(
        args.out,
        {
            "command": "clt",
            "family": cfg.family,
            "family_params": cfg.family_params,
            "horizon": cfg.horizon,
            "repetitions": cfg.repetitions,
            "calibration_samples": cfg.calibration_samples,
            "seed": cfg.seed,
        },
    )
    report = run_clt(cfg)
    write_clt_csv(os.path.join(args.out, "clt.csv"), report)
    write_moments_csv(os.path.join(args.out, "moments.csv"), report.moments)
    summary = {
        "n": report.n,
        "repetitions": report.repetitions,
        "b_n": report.b_n,
        "ks_vs_normal": report.ks_vs_normal,
        "excluded_repetitions": report.excluded_repetitions,
        "runtime_seconds": round(report.runtime_seconds, 3),
    }
    _atomic_write(
        os.path.join(args.out, "summary.json"),
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
    )
    print(
        f"n={report.n}, reps={report.repetitions}: B_n={report.b_n:.4f}, "
        f"KS distance to normal {report.ks_vs_normal:.4f}"
    )
    return 0


def _cmd_kac(args) -> int:
    file_cfg = _load_config(args.config)
    cfg = ExperimentConfig(
        experiment="kac",
        sample_count=int(_resolve(args, "samples", file_cfg, 50)),
        seed=int(_resolve(args, "seed", file_cfg, DEFAULT_SEED)),
        epsilon=float(_resolve(args, "epsilon", file_cfg, 0.1)),
        k_degree=int(_resolve(args, "k_degree", file_cfg, 200)),
    )
    _echo_config(
        args.out,
        {
            "command": "kac",
            "k": cfg.k_degree,
            "epsilon": cfg.epsilon,
            "samples": cfg.sample_count,
            "seed": cfg.seed,
        },
    )
    result = run_kac(cfg)
    write_kac_csv(os.path.join(args.out, "kac.csv"), result.kac)
    write_angles_csv(os.path.join(args.out, "angles.csv"), result.kac.arguments)
    summary = {
        "k": cfg.k_degree,
        "epsilon": cfg.epsilon,
        "mean_annulus_fraction": result.kac.mean_annulus_fraction,
        "ks_statistic": result.ks_statistic,
        "p_value": result.p_value,
        "runtime_seconds": round(result.runtime_seconds, 3),
    }
    _atomic_write(
        os.path.join(args.out, "summary.json"),
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
    )
    write_plot_script(os.path.join(args.out, "plot_kac.py"), ["kac.csv"])
    print(
        f"k={cfg.k_degree}, eps={cfg.epsilon}: mean annulus fraction "
        f"{result.kac.mean_annulus_fraction:.4f}, argument KS p={result.p_value:.4f}"
    )
    return 0


def _cmd_verify(args) -> int:
    from . import acceptance

    file_cfg = _load_config(args.config)
    threads = _resolve_threads(args, file_cfg)
    results = acceptance.run_all(only=args.only, threads=threads, stream=sys.stdout)
    if args.out is not None:
        payload = [
            {"id": cid, "passed": passed, "detail": detail}
            for cid, passed, detail in results
        ]
        _echo_config(args.out, {"command": "verify", "only": args.only})
        _atomic_write(
            os.path.join(args.out, "verification-report.json"),
            json.dumps(payload, sort_keys=True, indent=2) + "\n",
        )
    if not results:
        raise UsageError(f"no criterion matches --only {args.only!r}")
    return 0 if all(passed for _, passed, _ in results) else 3


_COMMANDS = {
    "sample-fields": _cmd_sample_fields,
    "count-cycles": _cmd_count_cycles,
    "theorem-a": _cmd_theorem_a,
    "tail": _cmd_tail,
    "slln": _cmd_slln,
    "clt": _cmd_clt,
    "kac": _cmd_kac,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except CycleCensusError as exc:
        print(f"experiment failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

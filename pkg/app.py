"""
Bayesian variable selection for p > n: command-line entry point

Purpose
=======
Score every candidate regression model with conventional Bayes factors on the
regular block, treat the saturated and singular block analytically (Bayes
factor 1 under the regularized prior), and report blended posterior summaries.

Subcommands
-----------
- analyze     Gibbs chains -> convergence report -> C(n, p) -> P^S, q, HPM, dimension posterior.
- enumerate   Exhaustive posterior for small p (also `analyze --exact`).
- simulate    Exchangeable Gaussian design with a sparse truth, written as CSV.
- verify      Randomized battery of the regularized-prior invariants.
- experiment  Simulate once, then analyse the first n rows for several n and priors.

Run
---
$ python app.py analyze data.csv --response y --prior scott-berger --mixing hyper-g:3
$ python app.py verify --seed 7

Environment
-----------
- BVS_CONFIG_PATH  defaults file (config/bvs_config.json)
- BVS_SEED         seed used when --seed is not given
- BVS_LOG_EVERY    sampler progress interval in iterations
- BVS_WORKERS      chain worker threads
- BVS_CACHE_SIZE   Bayes factors kept per chain (least recently used are dropped)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from bayes_factors import parse_mixing_spec, parse_prior_spec
from errors import BVSError
from experiment import (
    DEFAULT_N_VALUES,
    DEFAULT_TRUE_COEFFICIENTS,
    ExperimentSpec,
    experiment_header,
    run_experiment,
    simulate,
    write_dataset_csv,
)
from gibbs_sampler import ChainConfig, StartState, enumerate_exact, run_analysis
from model_space import center_design, load_dataset
from regularized_prior import run_invariant_battery
from report_storage import (
    EXPERIMENT_CSV,
    EXPERIMENT_JSON,
    VERIFY_FILE,
    ReportStorage,
    dumps,
    format_float,
)

# ---------------------------
# Config
# ---------------------------
ROOT_DIR = Path(__file__).resolve().parent
DEFAULT_CONFIG_PATH = ROOT_DIR / "config" / "bvs_config.json"
BVS_CONFIG_PATH = Path(os.getenv("BVS_CONFIG_PATH", str(DEFAULT_CONFIG_PATH)))
BVS_SEED = os.getenv("BVS_SEED")
BVS_WORKERS = int(os.getenv("BVS_WORKERS", "1"))

VERIFY_FAILED_EXIT = 5

BUILTIN_DEFAULTS: Dict[str, Any] = {
    "prior": "scott-berger",
    "mixing": "hyper-g:3",
    "iterations": 11000,
    "experiment_iterations": 2000,
    "burnin_fraction": 0.1,
    "chains": 2,
    "seed": 0,
    "convergence_threshold": 0.05,
    "dim_plot_max": 60,
    "p_max": 20,
    "design_correlation": 0.3,
    "out_dir": "out",
}


def load_analysis_config(path: Path = BVS_CONFIG_PATH) -> Dict[str, Any]:
    """Built-in defaults overlaid with the JSON config file; a broken file is logged and ignored."""
    config = dict(BUILTIN_DEFAULTS)
    path = Path(path)
    if path.exists():
        try:
            raw = json.loads(path.read_text())
            if not isinstance(raw, dict):
                raise ValueError("top level must be an object")
            for key, default in BUILTIN_DEFAULTS.items():
                if key in raw and raw[key] is not None:
                    config[key] = type(default)(raw[key])
        except Exception as exc:
            print(f"[config] failed to load config {path}: {exc}", file=sys.stderr)
            config = dict(BUILTIN_DEFAULTS)
    return config


def resolve_seed(flag: Optional[int], config: Dict[str, Any]) -> int:
    """--seed, then BVS_SEED, then the config file, then the built-in default."""
    if flag is not None:
        return int(flag)
    if BVS_SEED not in (None, ""):
        return int(BVS_SEED)  # type: ignore[arg-type]
    return int(config["seed"])


def _pick(flag: Any, config: Dict[str, Any], key: str) -> Any:
    return config[key] if flag is None else flag


def _logger(quiet: bool) -> Callable[[str], None]:
    def log(message: str) -> None:
        if not quiet:
            print(message, file=sys.stderr, flush=True)

    return log


def _emit(payload: Dict[str, Any]) -> None:
    sys.stdout.write(dumps(payload))
    sys.stdout.flush()


# ---------------------------
# Subcommands
# ---------------------------
def _chain_config(
    args: argparse.Namespace, config: Dict[str, Any], iterations_key: str = "iterations"
) -> ChainConfig:
    iterations = int(_pick(args.iterations, config, iterations_key))
    burnin = args.burnin
    if burnin is None:
        burnin = int(iterations * float(config["burnin_fraction"]))
    return ChainConfig(
        iterations=iterations,
        burnin=burnin,
        chains=int(_pick(args.chains, config, "chains")),
        seed=resolve_seed(args.seed, config),
        start=StartState(args.start),
    )


def _load(args: argparse.Namespace, log: Callable[[str], None]):
    d = load_dataset(args.data, args.response, not args.no_intercept, max_rows=args.rows)
    log(f"[dataset] path={args.data} n={d.n} p={d.p} k0={d.k0} response={d.response_name}")
    return d


def cmd_analyze(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    log = _logger(args.quiet)
    d = _load(args, log)
    cd = center_design(d)
    prior = parse_prior_spec(_pick(args.prior, config, "prior"), n=d.n, p=d.p)
    mix = parse_mixing_spec(_pick(args.mixing, config, "mixing"), n=d.n, p=d.p)
    storage = ReportStorage(Path(_pick(args.out_dir, config, "out_dir")))
    dim_plot_max = int(_pick(args.dim_plot_max, config, "dim_plot_max"))

    if args.exact:
        return _write_exact(args, config, d, cd, prior, mix, storage, dim_plot_max, log)

    cfg = _chain_config(args, config)
    log(
        f"[analyze] prior={prior.label} mixing={mix.label} iterations={cfg.iterations} "
        f"burnin={cfg.burnin} chains={cfg.chains} seed={cfg.seed}"
    )
    result = run_analysis(
        d,
        cd,
        mix,
        prior,
        cfg,
        workers=args.workers or BVS_WORKERS,
        trace=args.trace,
        threshold=float(config["convergence_threshold"]),
        verbose=not args.quiet,
    )
    outputs = storage.write_summary(result.summary, dim_plot_max)
    convergence = result.convergence.to_dict()
    convergence["c_estimate"] = result.c_estimate.to_dict()
    convergence["evaluations"] = [s.evaluations for s in result.samples]
    outputs.append(storage.write_convergence(convergence))
    if args.trace:
        outputs.extend(storage.write_traces(result.samples))
    log(
        f"[analyze] p_singular={result.summary.p_singular:.6g} c={result.summary.c_estimate:.6g} "
        f"converged={result.convergence.converged}"
    )
    _emit({"outputs": [str(p) for p in outputs], "p_singular": result.summary.p_singular})
    return 0


def _write_exact(args, config, d, cd, prior, mix, storage, dim_plot_max, log) -> int:
    p_max = int(_pick(getattr(args, "p_max", None), config, "p_max"))
    exact = enumerate_exact(d, cd, mix, prior, p_max=p_max)
    log(f"[analyze] exact enumeration regular_models={len(exact.models)} log_c={exact.log_c:.6g}")
    summary = exact.to_summary(d.column_names, prior, mix.label)
    outputs = storage.write_summary(summary, dim_plot_max)
    order = sorted(range(len(exact.models)), key=lambda i: (-exact.restricted_probs[i], exact.models[i].sort_key()))
    rows = [
        [
            " ".join(str(int(j)) for j in exact.models[i].indices),
            str(exact.models[i].k),
            format_float(float(exact.log_b[i])),
            format_float(float(exact.log_prior[i])),
            format_float(float(exact.restricted_probs[i])),
        ]
        for i in order
    ]
    outputs.append(storage.write_csv("models.csv", ["indices", "k", "log_b", "log_prior", "probability"], rows))
    _emit({"outputs": [str(p) for p in outputs], "p_singular": summary.p_singular})
    return 0


def cmd_enumerate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    log = _logger(args.quiet)
    d = _load(args, log)
    cd = center_design(d)
    prior = parse_prior_spec(_pick(args.prior, config, "prior"), n=d.n, p=d.p)
    mix = parse_mixing_spec(_pick(args.mixing, config, "mixing"), n=d.n, p=d.p)
    storage = ReportStorage(Path(_pick(args.out_dir, config, "out_dir")))
    dim_plot_max = int(_pick(args.dim_plot_max, config, "dim_plot_max"))
    return _write_exact(args, config, d, cd, prior, mix, storage, dim_plot_max, log)


def _spec_from_args(args: argparse.Namespace, config: Dict[str, Any]) -> ExperimentSpec:
    return ExperimentSpec(
        n=args.n,
        p=args.p,
        true_coefficients=dict(DEFAULT_TRUE_COEFFICIENTS),
        noise_scale=args.noise_scale,
        design_correlation=float(_pick(args.correlation, config, "design_correlation")),
        seed=resolve_seed(args.seed, config),
        k0=1 if args.intercept else 0,
        noise_as_sd=args.noise_as_sd,
    )


def cmd_simulate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    log = _logger(args.quiet)
    spec = _spec_from_args(args, config)
    d = simulate(spec)
    out = Path(args.out) if args.out else Path(_pick(args.out_dir, config, "out_dir")) / "simulated.csv"
    path = write_dataset_csv(d, out)
    log(f"[simulate] n={spec.n} p={spec.p} seed={spec.seed} noise_sd={spec.noise_sd:.6g} path={path}")
    _emit({"outputs": [str(path)]})
    return 0


def cmd_verify(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    log = _logger(args.quiet)
    seed = resolve_seed(args.seed, config)
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else None
    report = run_invariant_battery(seed, sizes, sabotage=args.sabotage)
    for check in report.checks.values():
        log(
            f"[verify] check={check.name} max_residual={check.max_residual:.3g} "
            f"cases={check.cases} passed={check.passed}"
        )
    storage = ReportStorage(Path(_pick(args.out_dir, config, "out_dir")))
    path = storage.write_json(VERIFY_FILE, report.to_dict())
    log(f"[verify] designs={report.cases} singular={report.singular_cases} passed={report.passed}")
    _emit({"outputs": [str(path)], "passed": report.passed})
    return 0 if report.passed else VERIFY_FAILED_EXIT


def cmd_experiment(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    log = _logger(args.quiet)
    n_values = [int(v) for v in args.n_values.split(",")] if args.n_values else list(DEFAULT_N_VALUES)
    spec_args = argparse.Namespace(**vars(args))
    spec_args.n = max(n_values)
    spec = _spec_from_args(spec_args, config)
    cfg = _chain_config(args, config, "experiment_iterations")
    priors = args.priors or [_pick(args.prior, config, "prior")]
    mixing = _pick(args.mixing, config, "mixing")
    rows = run_experiment(
        spec,
        n_values,
        priors,
        mixing,
        cfg,
        workers=args.workers or BVS_WORKERS,
        verbose=not args.quiet,
    )
    storage = ReportStorage(Path(_pick(args.out_dir, config, "out_dir")))
    outputs = [
        storage.write_csv(EXPERIMENT_CSV, experiment_header(spec.true_set), (r.to_row() for r in rows)),
        storage.write_json(
            EXPERIMENT_JSON,
            {"spec": spec.to_dict(), "mixing": mixing, "chain_config": cfg.to_dict(), "rows": [r.to_dict() for r in rows]},
        ),
    ]
    for row in rows:
        log(f"[experiment] n={row.n} prior={row.prior} p_singular={row.p_singular:.4g} hpm={row.hpm}")
    _emit({"outputs": [str(p) for p in outputs]})
    return 0


# ---------------------------
# Argument parsing
# ---------------------------
def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--out-dir", default=None, help="Directory for report files.")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--quiet", action="store_true", help="Suppress progress lines on stderr.")


def _add_model_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--prior", default=None, help="scott-berger | uniform | beta-binomial:a,b")
    sp.add_argument("--mixing", default=None, help="g-prior:g | hyper-g:a | quadrature:<density>")
    sp.add_argument("--dim-plot-max", type=int, default=None)


def _add_chain_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--iterations", type=int, default=None)
    sp.add_argument("--burnin", type=int, default=None)
    sp.add_argument("--chains", type=int, default=None)
    sp.add_argument("--start", choices=[s.value for s in StartState], default=StartState.NULL.value)
    sp.add_argument("--workers", type=int, default=None)


def _add_data_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("data", help="CSV file with a header row.")
    sp.add_argument("--response", default="0", help="Response column name or zero-based index.")
    sp.add_argument("--no-intercept", action="store_true", help="Null model without intercept (k0 = 0).")
    sp.add_argument("--rows", type=int, default=None, help="Keep only the first N observations.")


def _add_sim_flags(sp: argparse.ArgumentParser, with_n: bool = True) -> None:
    if with_n:
        sp.add_argument("--n", type=int, default=41)
    sp.add_argument("--p", type=int, default=300)
    sp.add_argument("--noise-scale", type=float, default=0.5)
    sp.add_argument("--noise-as-sd", action="store_true", help="Read --noise-scale as a standard deviation.")
    sp.add_argument("--correlation", type=float, default=None)
    sp.add_argument("--intercept", action="store_true", help="Simulate with k0 = 1.")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Bayesian variable selection with regularized conventional priors.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="Sample the posterior and write summaries.")
    _add_data_flags(sp)
    _add_model_flags(sp)
    _add_chain_flags(sp)
    _add_common(sp)
    sp.add_argument("--exact", action="store_true", help="Enumerate the model space instead of sampling.")
    sp.add_argument("--p-max", type=int, default=None)
    sp.add_argument("--trace", action="store_true", help="Write trace-<chain>.csv files.")
    sp.set_defaults(handler=cmd_analyze)

    sp = sub.add_parser("enumerate", help="Exact posterior by enumeration (small p).")
    _add_data_flags(sp)
    _add_model_flags(sp)
    _add_common(sp)
    sp.add_argument("--p-max", type=int, default=None)
    sp.set_defaults(handler=cmd_enumerate)

    sp = sub.add_parser("simulate", help="Write a synthetic dataset.")
    _add_sim_flags(sp)
    _add_common(sp)
    sp.add_argument("--out", default=None, help="CSV path (default <out-dir>/simulated.csv).")
    sp.set_defaults(handler=cmd_simulate)

    sp = sub.add_parser("verify", help="Check the regularized-prior invariants.")
    _add_common(sp)
    sp.add_argument("--sizes", default=None, help="Comma-separated sample sizes (default 3..8).")
    sp.add_argument("--sabotage", action="store_true", help="Use ridge regularizers; the battery must fail.")
    sp.set_defaults(handler=cmd_verify)

    sp = sub.add_parser("experiment", help="Sweep sample sizes and priors on one simulated dataset.")
    _add_sim_flags(sp, with_n=False)
    _add_model_flags(sp)
    _add_chain_flags(sp)
    _add_common(sp)
    sp.add_argument("--n-values", default=None, help="Comma-separated sample sizes (default 41,30,20,10).")
    sp.add_argument("--priors", nargs="+", default=None, help="Model priors to compare.")
    sp.set_defaults(handler=cmd_experiment)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = load_analysis_config(BVS_CONFIG_PATH)
    try:
        return int(args.handler(args, config))
    except BVSError as exc:
        _emit({"error": exc.to_dict()})
        return exc.exit_code
    except Exception as exc:
        _emit({"error": {"module": "cli_harness", "code": "internal", "message": str(exc), "details": {}}})
        return 1


if __name__ == "__main__":
    sys.exit(main())

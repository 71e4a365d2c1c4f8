"""
Synthetic experiments: simulated designs and the sample-size / prior sweep.

The design is an exchangeable Gaussian: unit variances and a common pairwise
correlation, built as sqrt(rho) z0 + sqrt(1 - rho) z_j from a shared factor z0.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from bayes_factors import parse_mixing_spec, parse_prior_spec
from errors import ExperimentSpecError
from gibbs_sampler import ChainConfig, run_analysis
from model_space import Dataset, center_design, numerical_rank
from posterior_summaries import spurious_stats
from report_storage import format_float

DEFAULT_TRUE_COEFFICIENTS: Dict[int, float] = {0: 1.3, 1: 0.3, 2: -1.2, 3: -0.5}
DEFAULT_N = 41
DEFAULT_P = 300
DEFAULT_NOISE_SCALE = 0.5
DEFAULT_DESIGN_CORRELATION = 0.3
DEFAULT_N_VALUES = (41, 30, 20, 10)
DEFAULT_PRIORS = ("scott-berger",)
DEFAULT_MIXING = "hyper-g:3"
DEFAULT_EXPERIMENT_ITERATIONS = 2000


@dataclass
class ExperimentSpec:
    n: int = DEFAULT_N
    p: int = DEFAULT_P
    true_coefficients: Dict[int, float] = field(default_factory=lambda: dict(DEFAULT_TRUE_COEFFICIENTS))
    noise_scale: float = DEFAULT_NOISE_SCALE
    design_correlation: float = DEFAULT_DESIGN_CORRELATION
    seed: int = 0
    k0: int = 0
    noise_as_sd: bool = False

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ExperimentSpecError(f"n must be at least 2, got {self.n}")
        if self.p < 1:
            raise ExperimentSpecError(f"p must be positive, got {self.p}")
        bad = [i for i in self.true_coefficients if not 0 <= int(i) < self.p]
        if bad:
            raise ExperimentSpecError(
                f"true coefficient indices {sorted(bad)} outside 0..{self.p - 1}",
                details={"indices": sorted(int(i) for i in bad), "p": self.p},
            )
        if not (self.noise_scale >= 0.0 and math.isfinite(self.noise_scale)):
            raise ExperimentSpecError(f"noise_scale must be non-negative, got {self.noise_scale}")
        if not 0.0 <= self.design_correlation < 1.0:
            raise ExperimentSpecError(
                f"design_correlation must lie in [0, 1), got {self.design_correlation}"
            )
        if self.k0 not in (0, 1):
            raise ExperimentSpecError(f"k0 must be 0 or 1, got {self.k0}")
        self.true_coefficients = {int(i): float(v) for i, v in self.true_coefficients.items()}

    @property
    def true_set(self) -> List[int]:
        return sorted(i for i, v in self.true_coefficients.items() if v != 0.0)

    @property
    def noise_sd(self) -> float:
        return self.noise_scale if self.noise_as_sd else math.sqrt(self.noise_scale)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "p": self.p,
            "true_coefficients": {str(i): v for i, v in sorted(self.true_coefficients.items())},
            "noise_scale": self.noise_scale,
            "noise_as_sd": self.noise_as_sd,
            "design_correlation": self.design_correlation,
            "seed": self.seed,
            "k0": self.k0,
        }


def simulate(spec: ExperimentSpec) -> Dataset:
    """y = X beta + e on an exchangeable Gaussian design, deterministic in spec.seed."""
    rng = np.random.default_rng(spec.seed)
    rho = spec.design_correlation
    shared = rng.standard_normal((spec.n, 1))
    X = math.sqrt(rho) * shared + math.sqrt(1.0 - rho) * rng.standard_normal((spec.n, spec.p))
    rank = numerical_rank(X)
    if rank != min(spec.n, spec.p):
        raise ExperimentSpecError(
            f"simulated design has rank {rank}, expected {min(spec.n, spec.p)}",
            details={"rank": rank, "seed": spec.seed},
        )
    beta = np.zeros(spec.p)
    for idx, value in spec.true_coefficients.items():
        beta[idx] = value
    noise = rng.standard_normal(spec.n) * spec.noise_sd
    y = X @ beta + noise
    return Dataset.from_arrays(
        y, X, k0=spec.k0, column_names=[f"x{j + 1}" for j in range(spec.p)], response_name="y"
    )


def write_dataset_csv(d: Dataset, path: Union[str, Path]) -> Path:
    """Response first, then the covariates; 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([d.response_name] + list(d.column_names))
        for i in range(d.n):
            writer.writerow([format_float(float(d.y[i]))] + [format_float(float(v)) for v in d.X[i]])
    return path


@dataclass
class ExperimentRow:
    n: int
    prior: str
    p_singular: float
    q_true: List[float]
    spurious_mean: float
    spurious_max: float
    hpm: str
    c_estimate: float
    converged: bool

    def to_row(self) -> List[str]:
        return (
            [str(self.n), self.prior, format_float(self.p_singular)]
            + [format_float(v) for v in self.q_true]
            + [format_float(self.spurious_mean), format_float(self.spurious_max), self.hpm]
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "prior": self.prior,
            "p_singular": self.p_singular,
            "q_true": list(self.q_true),
            "spurious_mean": self.spurious_mean,
            "spurious_max": self.spurious_max,
            "hpm": self.hpm,
            "c_estimate": self.c_estimate,
            "converged": self.converged,
        }


def experiment_header(true_set: Sequence[int]) -> List[str]:
    return ["n", "prior", "p_singular"] + [f"q_{i + 1}" for i in true_set] + [
        "spurious_mean",
        "spurious_max",
        "hpm",
    ]


def describe_hpm(summary) -> str:
    choice = summary.hpm
    if choice.model is not None and not choice.in_singular_block:
        names = [summary.column_names[i] for i in choice.model.indices]
        return "{" + ",".join(names) + "}" if names else "Null"
    if choice.model is not None:
        return "Full"
    return f"singular(k={choice.singular_dimension})"


def run_experiment(
    spec: ExperimentSpec,
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    priors: Sequence[str] = DEFAULT_PRIORS,
    mixing: str = DEFAULT_MIXING,
    cfg: Optional[ChainConfig] = None,
    *,
    workers: int = 1,
    verbose: bool = False,
) -> List[ExperimentRow]:
    """Simulate once at spec.n, then analyse the first n rows for every n and prior."""
    if not n_values:
        raise ExperimentSpecError("no sample sizes given")
    too_big = [n for n in n_values if n > spec.n or n < 2]
    if too_big:
        raise ExperimentSpecError(
            f"sample sizes {too_big} must lie in 2..{spec.n}", details={"n_values": list(n_values)}
        )
    cfg = cfg or ChainConfig(iterations=DEFAULT_EXPERIMENT_ITERATIONS, seed=spec.seed)
    full = simulate(spec)
    true_set = spec.true_set
    rows: List[ExperimentRow] = []
    for n in n_values:
        d = full.head(n)
        cd = center_design(d)
        for prior_text in priors:
            prior = parse_prior_spec(prior_text, n=n, p=d.p)
            mix = parse_mixing_spec(mixing, n=n, p=d.p)
            if verbose:
                print(f"[experiment] n={n} prior={prior_text} mixing={mixing}", file=sys.stderr, flush=True)
            result = run_analysis(d, cd, mix, prior, cfg, workers=workers, verbose=verbose)
            summary = result.summary
            spur_mean, spur_max = spurious_stats(summary.q, true_set)
            rows.append(
                ExperimentRow(
                    n=n,
                    prior=prior_text,
                    p_singular=summary.p_singular,
                    q_true=[float(summary.q[i]) for i in true_set],
                    spurious_mean=spur_mean,
                    spurious_max=spur_max,
                    hpm=describe_hpm(summary),
                    c_estimate=summary.c_estimate,
                    converged=result.convergence.converged,
                )
            )
    return rows


__all__ = [
    "DEFAULT_TRUE_COEFFICIENTS",
    "DEFAULT_N_VALUES",
    "DEFAULT_PRIORS",
    "DEFAULT_MIXING",
    "DEFAULT_EXPERIMENT_ITERATIONS",
    "ExperimentSpec",
    "simulate",
    "write_dataset_csv",
    "ExperimentRow",
    "experiment_header",
    "describe_hpm",
    "run_experiment",
]

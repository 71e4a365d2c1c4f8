"""
Gibbs sampling over the regular block of the model space.

Each chain runs a systematic scan: one iteration visits every covariate j and
resamples gamma_j from its full conditional, proportional to B_gamma * P(M_gamma)
and restricted to regular models. A flip that would make the model saturated or
singular has conditional probability zero.

Two or more chains are required. The first chain supplies the set A of visited
models for the regular-block evidence estimate C(n, p); the others measure how
often the sampler falls inside A.
"""

from __future__ import annotations

import itertools
import math
import os
import sys
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from bayes_factors import (
    MixingDensity,
    ModelPrior,
    bayes_factor,
    log_dimension_masses,
    log_model_prior_table,
    prior_mass_regular,
    prior_mass_singular,
    q_singular,
    singular_threshold,
)
from errors import EnumerationRefusedError, EstimationError, SamplerInitializationError
from model_space import CenteredDesign, Dataset, ModelIndicator, model_stats
from posterior_summaries import (
    HpmChoice,
    PosteriorSummary,
    build_summary,
    p_singular_from_log_c,
    select_hpm,
)

DEFAULT_ITERATIONS = 11000
DEFAULT_CHAINS = 2
DEFAULT_BURNIN_FRACTION = 0.10
DEFAULT_CONVERGENCE_THRESHOLD = 0.05
DEFAULT_P_MAX = 20
LOG_EVERY = int(os.getenv("BVS_LOG_EVERY", "1000"))
CACHE_SIZE = int(os.getenv("BVS_CACHE_SIZE", "200000"))


def _log(message: str) -> None:
    print(message, file=sys.stderr, flush=True)


class StartState(str, Enum):
    NULL = "null"
    RANDOM_REGULAR = "random-regular"


@dataclass
class ChainConfig:
    iterations: int = DEFAULT_ITERATIONS
    burnin: Optional[int] = None
    chains: int = DEFAULT_CHAINS
    seed: int = 0
    start: StartState = StartState.NULL

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise SamplerInitializationError(f"iterations must be positive, got {self.iterations}")
        if self.burnin is None:
            self.burnin = int(self.iterations * DEFAULT_BURNIN_FRACTION)
        if not 0 <= self.burnin < self.iterations:
            raise SamplerInitializationError(
                f"burnin must lie in [0, {self.iterations}), got {self.burnin}",
                details={"burnin": self.burnin, "iterations": self.iterations},
            )
        if self.chains < 2:
            raise SamplerInitializationError(
                f"at least 2 chains are needed to estimate C(n, p), got {self.chains}",
                details={"chains": self.chains},
            )
        self.start = StartState(self.start)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "burnin": self.burnin,
            "chains": self.chains,
            "seed": self.seed,
            "start": self.start.value,
        }


@dataclass
class ModelRecord:
    count: int
    log_b: float
    log_prior: float

    @property
    def log_posterior(self) -> float:
        return self.log_b + self.log_prior


@dataclass
class TraceRow:
    iteration: int
    k: int
    log_posterior: float
    gamma_hex: str

    def to_row(self) -> List[str]:
        return [str(self.iteration), str(self.k), f"{self.log_posterior:.17g}", self.gamma_hex]


@dataclass
class ChainSample:
    chain: int
    p: int
    visits: List[Tuple[ModelIndicator, float]] = field(default_factory=list)
    distinct_models: Dict[ModelIndicator, ModelRecord] = field(default_factory=dict)
    evaluations: int = 0
    trace: List[TraceRow] = field(default_factory=list)

    @property
    def visit_count(self) -> int:
        return len(self.visits)

    def inclusion_counts(self) -> np.ndarray:
        totals = np.zeros(self.p)
        for model, record in self.distinct_models.items():
            totals[model.indices] += record.count
        return totals

    def inclusion_frequencies(self) -> np.ndarray:
        return self.inclusion_counts() / max(self.visit_count, 1)

    def dimension_counts(self) -> np.ndarray:
        dims = np.zeros(self.p + 1)
        for model, record in self.distinct_models.items():
            dims[model.k] += record.count
        return dims


class _ChainState:
    """Mutable scan state: bool gamma plus its packed key, kept in step."""

    def __init__(self, gamma: np.ndarray):
        self.gamma = gamma.copy()
        self.packed = bytearray(np.packbits(self.gamma).tobytes())
        self.k = int(np.count_nonzero(self.gamma))

    def key(self) -> bytes:
        return bytes(self.packed)

    def flipped_key(self, j: int) -> bytes:
        packed = bytearray(self.packed)
        packed[j >> 3] ^= 0x80 >> (j & 7)
        return bytes(packed)

    def flip(self, j: int) -> None:
        self.packed[j >> 3] ^= 0x80 >> (j & 7)
        self.gamma[j] = not self.gamma[j]
        self.k += 1 if self.gamma[j] else -1


def _start_gamma(cfg: ChainConfig, rng: np.random.Generator, p: int, k_max: int) -> np.ndarray:
    gamma = np.zeros(p, dtype=bool)
    if cfg.start is StartState.RANDOM_REGULAR:
        k = int(rng.integers(0, k_max + 1))
        gamma[rng.choice(p, size=k, replace=False)] = True
    return gamma


class _LogBCache:
    """Per-chain LRU map from packed gamma to log B; `misses` counts Bayes factor evaluations."""

    def __init__(self, max_entries: int):
        self.max_entries = max(int(max_entries), 1)
        self._data: "OrderedDict[bytes, float]" = OrderedDict()
        self.misses = 0

    def __len__(self) -> int:
        return len(self._data)

    def get(self, key: bytes) -> Optional[float]:
        value = self._data.get(key)
        if value is not None:
            self._data.move_to_end(key)
        return value

    def put(self, key: bytes, value: float) -> None:
        self.misses += 1
        self._data[key] = value
        if len(self._data) > self.max_entries:
            self._data.popitem(last=False)


def _run_chain(
    chain: int,
    rng: np.random.Generator,
    d: Dataset,
    cd: CenteredDesign,
    mix: MixingDensity,
    log_prior_by_k: np.ndarray,
    cfg: ChainConfig,
    trace: bool,
    verbose: bool,
    cache_size: int = CACHE_SIZE,
) -> ChainSample:
    n, p, k0 = d.n, d.p, d.k0
    k_max = min(p, n - k0 - 1)
    cache = _LogBCache(cache_size)
    # only models the chain records are interned
    visited: Dict[bytes, ModelIndicator] = {}
    sample = ChainSample(chain=chain, p=p)

    def log_b_for(key: bytes, gamma: np.ndarray) -> float:
        value = cache.get(key)
        if value is None:
            value = bayes_factor(model_stats(d, cd, ModelIndicator(gamma)), mix, n, k0).log_value
            cache.put(key, value)
        return value

    state = _ChainState(_start_gamma(cfg, rng, p, k_max))
    current_log_b = log_b_for(state.key(), state.gamma)
    current_lp = current_log_b + log_prior_by_k[state.k]
    burnin = int(cfg.burnin)  # type: ignore[arg-type]

    for it in range(1, cfg.iterations + 1):
        uniforms = rng.random(p)
        for j in range(p):
            adding = not state.gamma[j]
            if adding and state.k + 1 > k_max:
                continue
            other_key = state.flipped_key(j)
            other_log_b = cache.get(other_key)
            if other_log_b is None:
                state.gamma[j] = adding
                other_log_b = log_b_for(other_key, state.gamma)
                state.gamma[j] = not adding
            other_lp = other_log_b + log_prior_by_k[state.k + (1 if adding else -1)]
            # probability of the flipped state under the two-point conditional
            if uniforms[j] < expit(other_lp - current_lp):
                state.flip(j)
                current_log_b, current_lp = other_log_b, other_lp

        if it > burnin or trace:
            key = state.key()
            model = visited.get(key)
            if model is None:
                model = ModelIndicator(state.gamma)
                visited[key] = model
            if it > burnin:
                sample.visits.append((model, current_lp))
                record = sample.distinct_models.get(model)
                if record is None:
                    sample.distinct_models[model] = ModelRecord(1, current_log_b, current_lp - current_log_b)
                else:
                    record.count += 1
            if trace:
                sample.trace.append(TraceRow(it, state.k, current_lp, model.hex()))

        if verbose and LOG_EVERY > 0 and it % LOG_EVERY == 0:
            _log(
                f"[gibbs] chain={chain} iter={it}/{cfg.iterations} k={state.k} "
                f"evaluations={cache.misses} cached={len(cache)}"
            )

    sample.evaluations = cache.misses
    return sample


def gibbs_run(
    d: Dataset,
    cd: CenteredDesign,
    mix: MixingDensity,
    prior: ModelPrior,
    cfg: ChainConfig,
    *,
    workers: int = 1,
    trace: bool = False,
    verbose: bool = False,
    cache_size: int = CACHE_SIZE,
) -> List[ChainSample]:
    """
    Run cfg.chains independent chains; results come back in chain order whatever `workers` is.

    Each chain keeps at most `cache_size` Bayes factors; evicted ones are recomputed on demand,
    so the cache size changes memory and time but never the draws.
    """
    n, p, k0 = d.n, d.p, d.k0
    if n - k0 < 2:
        raise SamplerInitializationError(
            f"the regular block holds only the null model (n={n}, k0={k0}); no move is possible",
            details={"n": n, "k0": k0},
        )
    log_prior_by_k = log_model_prior_table(prior, p)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)

    def run(chain: int) -> ChainSample:
        rng = np.random.default_rng(seeds[chain])
        return _run_chain(chain, rng, d, cd, mix, log_prior_by_k, cfg, trace, verbose, cache_size)

    if workers <= 1:
        return [run(c) for c in range(cfg.chains)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(cfg.chains)))


@dataclass
class ConvergenceReport:
    inclusion_by_chain: List[np.ndarray]
    max_discrepancy: float
    worst_covariate: int
    threshold: float

    @property
    def converged(self) -> bool:
        return self.max_discrepancy <= self.threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            "converged": self.converged,
            "max_discrepancy": self.max_discrepancy,
            "worst_covariate": self.worst_covariate,
            "threshold": self.threshold,
            "inclusion_by_chain": [[float(v) for v in q] for q in self.inclusion_by_chain],
        }


def convergence_check(
    samples: Sequence[ChainSample], threshold: float = DEFAULT_CONVERGENCE_THRESHOLD
) -> ConvergenceReport:
    """Largest cross-chain gap in inclusion frequency. Advisory: nothing is aborted."""
    freqs = [chain.inclusion_frequencies() for chain in samples]
    stacked = np.vstack(freqs)
    gaps = stacked.max(axis=0) - stacked.min(axis=0)
    worst = int(np.argmax(gaps))
    return ConvergenceReport(
        inclusion_by_chain=freqs,
        max_discrepancy=float(gaps[worst]),
        worst_covariate=worst,
        threshold=threshold,
    )


@dataclass
class CEstimate:
    log_value: float
    log_numerator: float
    denominator: float
    a_size: int

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c_estimate": self.value,
            "log_c": self.log_value,
            "log_numerator": self.log_numerator,
            "denominator": self.denominator,
            "a_size": self.a_size,
        }


def estimate_c(samples: Sequence[ChainSample], prior: ModelPrior, n: int, p: int, k0: int) -> CEstimate:
    """
    C(n, p) = sum over the regular block of B_gamma Pr(M_gamma | M^R).

    A = models visited by the first chain. The numerator sums B Pr(. | M^R) exactly over A;
    the denominator is the share of the remaining chains' visits that land in A.
    """
    if len(samples) < 2:
        raise EstimationError("estimating C(n, p) needs at least two chains")
    first, rest = samples[0], samples[1:]
    a_set = first.distinct_models
    if not a_set:
        raise EstimationError("first chain has no visits after burn-in")
    log_terms = np.array([record.log_posterior for record in a_set.values()])
    log_numerator = float(logsumexp(log_terms)) - math.log(prior_mass_regular(prior, n, p, k0))

    inside, total = 0, 0
    for chain in rest:
        total += chain.visit_count
        for model, record in chain.distinct_models.items():
            if model in a_set:
                inside += record.count
    if inside == 0 or total == 0:
        raise EstimationError(
            "no visits of the other chains fell in the first chain's model set; run longer chains",
            details={"a_size": len(a_set), "visits": total},
        )
    denominator = inside / total
    return CEstimate(
        log_value=log_numerator - math.log(denominator),
        log_numerator=log_numerator,
        denominator=denominator,
        a_size=len(a_set),
    )


@dataclass
class ExactPosterior:
    """Exhaustive posterior: every regular model scored, the singular block summed by dimension."""
    models: List[ModelIndicator]
    log_b: np.ndarray
    log_prior: np.ndarray
    restricted_probs: np.ndarray
    log_c: float
    q_regular: np.ndarray
    regular_hpm: HpmChoice
    p_singular: float
    q: np.ndarray
    q_singular_value: Optional[float]
    dim_posterior: np.ndarray
    hpm: HpmChoice
    n: int
    p: int
    k0: int

    @property
    def c(self) -> float:
        return math.exp(self.log_c) if self.log_c < 709.0 else math.inf

    def to_summary(
        self, column_names: Sequence[str], prior: ModelPrior, mixing_label: str = ""
    ) -> PosteriorSummary:
        return PosteriorSummary(
            p_singular=self.p_singular,
            c_estimate=self.c,
            log_c=self.log_c,
            q=self.q.copy(),
            q_regular=self.q_regular.copy(),
            q_singular_value=self.q_singular_value,
            hpm=self.hpm,
            dim_posterior=self.dim_posterior.copy(),
            column_names=list(column_names),
            method="exact",
            n=self.n,
            p=self.p,
            k0=self.k0,
            prior_label=prior.label,
            mixing_label=mixing_label,
            extras={"regular_models": len(self.models)},
        )


def enumerate_exact(
    d: Dataset,
    cd: CenteredDesign,
    mix: MixingDensity,
    prior: ModelPrior,
    p_max: int = DEFAULT_P_MAX,
) -> ExactPosterior:
    n, p, k0 = d.n, d.p, d.k0
    if p > p_max:
        raise EnumerationRefusedError(
            f"refusing to enumerate 2^{p} models (p_max={p_max})", details={"p": p, "p_max": p_max}
        )
    k_s = singular_threshold(n, k0)
    k_top = min(p, k_s - 1)
    prior_table = log_model_prior_table(prior, p)

    models: List[ModelIndicator] = []
    log_b: List[float] = []
    for k in range(0, k_top + 1):
        for combo in itertools.combinations(range(p), k):
            model = ModelIndicator.from_indices(combo, p)
            models.append(model)
            log_b.append(bayes_factor(model_stats(d, cd, model), mix, n, k0).log_value)

    log_b_arr = np.array(log_b)
    log_prior_arr = np.array([prior_table[m.k] for m in models])
    log_joint = log_b_arr + log_prior_arr
    log_z_regular = float(logsumexp(log_joint))
    restricted = np.exp(log_joint - log_z_regular)
    gammas = np.vstack([m.gamma for m in models]).astype(float)
    q_regular = restricted @ gammas
    log_c = log_z_regular - math.log(prior_mass_regular(prior, n, p, k0))

    ties = np.flatnonzero(log_joint == log_joint.max())
    best = int(min(ties, key=lambda i: models[int(i)].sort_key()))
    regular_hpm = HpmChoice(model=models[best], log_posterior=float(log_joint[best]))

    # Full posterior over all 2^p models; singular models have B = 1, so each singular
    # dimension contributes its prior dimension mass.
    mass_s = prior_mass_singular(prior, n, p, k0)
    log_z = float(np.logaddexp(log_z_regular, math.log(mass_s))) if mass_s > 0.0 else log_z_regular
    dim_post = np.zeros(p + 1)
    for m_idx, model in enumerate(models):
        dim_post[model.k] += math.exp(log_joint[m_idx] - log_z)
    q_full = np.exp(log_z_regular - log_z) * q_regular
    q_s: Optional[float] = None
    if mass_s > 0.0:
        q_s = q_singular(prior, n, p, k0)
        log_dims = log_dimension_masses(prior, p)
        dim_post[k_s:] = np.exp(log_dims[k_s:] - log_z)
        q_full = q_full + q_s * math.exp(math.log(mass_s) - log_z)

    return ExactPosterior(
        models=models,
        log_b=log_b_arr,
        log_prior=log_prior_arr,
        restricted_probs=restricted,
        log_c=log_c,
        q_regular=q_regular,
        regular_hpm=regular_hpm,
        p_singular=p_singular_from_log_c(log_c, prior, n, p, k0),
        q=q_full,
        q_singular_value=q_s,
        dim_posterior=dim_post,
        hpm=select_hpm(regular_hpm, prior, n, p, k0),
        n=n,
        p=p,
        k0=k0,
    )


@dataclass
class AnalysisResult:
    summary: PosteriorSummary
    samples: List[ChainSample]
    convergence: ConvergenceReport
    c_estimate: CEstimate


def run_analysis(
    d: Dataset,
    cd: CenteredDesign,
    mix: MixingDensity,
    prior: ModelPrior,
    cfg: ChainConfig,
    *,
    workers: int = 1,
    trace: bool = False,
    threshold: float = DEFAULT_CONVERGENCE_THRESHOLD,
    verbose: bool = False,
) -> AnalysisResult:
    """Sample the regular block, check convergence, estimate C(n, p) and blend the summaries."""
    samples = gibbs_run(d, cd, mix, prior, cfg, workers=workers, trace=trace, verbose=verbose)
    convergence = convergence_check(samples, threshold)
    if verbose:
        _log(
            f"[convergence] max_discrepancy={convergence.max_discrepancy:.4g} "
            f"covariate={convergence.worst_covariate} converged={convergence.converged}"
        )
    c_est = estimate_c(samples, prior, d.n, d.p, d.k0)
    if verbose:
        _log(f"[estimate] log_c={c_est.log_value:.6g} a_size={c_est.a_size} denominator={c_est.denominator:.4g}")
    summary = build_summary(
        samples,
        c_est.log_value,
        prior,
        d.n,
        d.p,
        d.k0,
        d.column_names,
        mixing_label=mix.label,
        extras={
            "chain_config": cfg.to_dict(),
            "converged": convergence.converged,
            "distinct_models": sum(len(s.distinct_models) for s in samples),
        },
    )
    return AnalysisResult(summary=summary, samples=samples, convergence=convergence, c_estimate=c_est)


__all__ = [
    "StartState",
    "ChainConfig",
    "ModelRecord",
    "TraceRow",
    "ChainSample",
    "gibbs_run",
    "ConvergenceReport",
    "convergence_check",
    "CEstimate",
    "estimate_c",
    "ExactPosterior",
    "enumerate_exact",
    "AnalysisResult",
    "run_analysis",
]

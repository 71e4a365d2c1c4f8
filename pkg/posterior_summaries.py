"""
Posterior summaries that blend the sampled regular block with the analytic singular block.

Every saturated or singular model has Bayes factor 1, so conditional on the
singular block the posterior equals the prior. The regular block enters only
through its evidence mass C(n, p) and the chain output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from bayes_factors import (
    ModelPrior,
    PriorKind,
    log_model_prior_table,
    prior_mass_regular,
    prior_mass_singular,
    q_singular,
    singular_dimension_probs,
    singular_threshold,
)
from errors import SummaryUndefinedError
from model_space import ModelIndicator

if TYPE_CHECKING:
    from gibbs_sampler import ChainSample


@dataclass
class HpmChoice:
    """Most probable model; either a regular model or a dimension of the singular block."""
    model: Optional[ModelIndicator]
    log_posterior: float
    singular_dimension: Optional[int] = None

    @property
    def in_singular_block(self) -> bool:
        return self.singular_dimension is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "indices": None if self.model is None else [int(i) for i in self.model.indices],
            "k": self.model.k if self.model is not None else self.singular_dimension,
            "singular_block": self.in_singular_block,
            "log_posterior": self.log_posterior,
        }


def _hpm_key(model: ModelIndicator) -> Tuple[int, Tuple[int, ...]]:
    return model.sort_key()


def hpm(samples: Sequence["ChainSample"]) -> HpmChoice:
    """Visited regular model with the largest log B + log prior; ties to smaller k, then smaller gamma."""
    best: Optional[ModelIndicator] = None
    best_lp = -math.inf
    for chain in samples:
        for model, record in chain.distinct_models.items():
            lp = record.log_posterior
            if best is None or lp > best_lp or (lp == best_lp and _hpm_key(model) < _hpm_key(best)):
                best, best_lp = model, lp
    if best is None:
        raise SummaryUndefinedError("no visited models to choose an HPM from")
    return HpmChoice(model=best, log_posterior=best_lp)


def best_singular_dimension(prior: ModelPrior, n: int, p: int, k0: int) -> Optional[Tuple[int, float]]:
    """Singular-block dimension whose single model has the largest prior (B = 1 there)."""
    k_s = singular_threshold(n, k0)
    if k_s > p:
        return None
    table = log_model_prior_table(prior, p)[k_s:]
    idx = int(np.argmax(table))
    return k_s + idx, float(table[idx])


def select_hpm(regular: HpmChoice, prior: ModelPrior, n: int, p: int, k0: int) -> HpmChoice:
    """Compare the best regular model with the best singular dimension."""
    singular = best_singular_dimension(prior, n, p, k0)
    if singular is None:
        return regular
    k, lp = singular
    reg_k = regular.model.k if regular.model is not None else -1
    if lp > regular.log_posterior or (lp == regular.log_posterior and k < reg_k):
        model = ModelIndicator.full(p) if k == p else None
        return HpmChoice(model=model, log_posterior=lp, singular_dimension=k)
    return regular


def p_singular_from_log_c(log_c: float, prior: ModelPrior, n: int, p: int, k0: int) -> float:
    mass_s = prior_mass_singular(prior, n, p, k0)
    mass_r = prior_mass_regular(prior, n, p, k0)
    if mass_s <= 0.0:
        return 0.0
    if mass_r <= 0.0:
        return 1.0
    if prior.kind is PriorKind.SCOTT_BERGER:
        # (p - n + k0 + 1) / (p - n + k0 + 1 + (n - k0) C)
        log_ratio = math.log(p - n + k0 + 1.0) - math.log(float(n - k0))
    else:
        log_ratio = math.log(mass_s) - math.log(mass_r)
    return float(expit(log_ratio - log_c))


def p_singular(c: float, prior: ModelPrior, n: int, p: int, k0: int) -> float:
    """Posterior probability of the saturated plus singular block given C(n, p)."""
    if not c > 0.0:
        raise SummaryUndefinedError(f"C(n, p) must be positive, got {c}", details={"c": c})
    return p_singular_from_log_c(math.log(c), prior, n, p, k0)


def regular_inclusion(samples: Sequence["ChainSample"], p: int) -> np.ndarray:
    """Visit-weighted inclusion frequencies pooled over all chains."""
    totals = np.zeros(p)
    visits = 0
    for chain in samples:
        totals += chain.inclusion_counts()
        visits += chain.visit_count
    if visits == 0:
        raise SummaryUndefinedError("chains recorded no visits after burn-in")
    return totals / visits


def blend_inclusion(q_regular: np.ndarray, q_singular_value: Optional[float], p_s: float) -> np.ndarray:
    """q_i = q_i^R (1 - P^S) + q^S P^S."""
    q_regular = np.asarray(q_regular, dtype=float)
    if q_singular_value is None:
        return q_regular * (1.0 - p_s)
    return q_regular * (1.0 - p_s) + q_singular_value * p_s


def dimension_posterior(
    samples: Sequence["ChainSample"], p_s: float, prior: ModelPrior, n: int, p: int, k0: int
) -> np.ndarray:
    """Posterior of k_gamma on 0..p: sampled within the regular block, analytic in the singular block."""
    dims = np.zeros(p + 1)
    visits = 0
    for chain in samples:
        dims += chain.dimension_counts()
        visits += chain.visit_count
    if visits == 0:
        raise SummaryUndefinedError("chains recorded no visits after burn-in")
    out = (1.0 - p_s) * dims / visits
    return _add_singular_dimensions(out, p_s, prior, n, p, k0)


def _add_singular_dimensions(
    out: np.ndarray, p_s: float, prior: ModelPrior, n: int, p: int, k0: int
) -> np.ndarray:
    if singular_threshold(n, k0) <= p:
        ks, probs = singular_dimension_probs(prior, n, p, k0)
        out[ks] += p_s * probs
    return out


def spurious_stats(q: Sequence[float], true_set: Iterable[int]) -> Tuple[float, float]:
    """Mean and maximum inclusion probability over covariates outside true_set."""
    q = np.asarray(q, dtype=float)
    mask = np.ones(q.size, dtype=bool)
    idx = [int(i) for i in true_set]
    if idx:
        mask[idx] = False
    if not mask.any():
        raise SummaryUndefinedError(
            "every covariate is in the true set; spurious statistics are undefined",
            details={"p": int(q.size)},
        )
    rest = q[mask]
    return float(rest.mean()), float(rest.max())


@dataclass
class PosteriorSummary:
    p_singular: float
    c_estimate: float
    log_c: float
    q: np.ndarray
    q_regular: np.ndarray
    q_singular_value: Optional[float]
    hpm: HpmChoice
    dim_posterior: np.ndarray
    column_names: List[str]
    method: str
    n: int
    p: int
    k0: int
    prior_label: str = ""
    mixing_label: str = ""
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "p_singular": self.p_singular,
            "c_estimate": self.c_estimate,
            "log_c": self.log_c,
            "q": [float(v) for v in self.q],
            "q_regular": [float(v) for v in self.q_regular],
            "q_singular": self.q_singular_value,
            "hpm": None if self.hpm.model is None else [int(i) for i in self.hpm.model.indices],
            "hpm_detail": self.hpm.to_dict(),
            "dim_posterior": [float(v) for v in self.dim_posterior],
            "column_names": list(self.column_names),
            "method": self.method,
            "n": self.n,
            "p": self.p,
            "k0": self.k0,
            "prior": self.prior_label,
            "mixing": self.mixing_label,
        }
        data.update(self.extras)
        return data

    def blend_residual(self) -> float:
        """max_i |q_i - (q_i^R (1 - P^S) + q^S P^S)|; zero by construction."""
        expected = blend_inclusion(self.q_regular, self.q_singular_value, self.p_singular)
        return float(np.max(np.abs(self.q - expected))) if self.q.size else 0.0


def _q_singular_or_none(prior: ModelPrior, n: int, p: int, k0: int) -> Optional[float]:
    if singular_threshold(n, k0) > p:
        return None
    return q_singular(prior, n, p, k0)


def build_summary(
    samples: Sequence["ChainSample"],
    log_c: float,
    prior: ModelPrior,
    n: int,
    p: int,
    k0: int,
    column_names: Sequence[str],
    *,
    mixing_label: str = "",
    extras: Optional[Dict[str, Any]] = None,
) -> PosteriorSummary:
    p_s = p_singular_from_log_c(log_c, prior, n, p, k0)
    q_reg = regular_inclusion(samples, p)
    q_s = _q_singular_or_none(prior, n, p, k0)
    return PosteriorSummary(
        p_singular=p_s,
        c_estimate=math.exp(log_c) if log_c < 709.0 else math.inf,
        log_c=log_c,
        q=blend_inclusion(q_reg, q_s, p_s),
        q_regular=q_reg,
        q_singular_value=q_s,
        hpm=select_hpm(hpm(samples), prior, n, p, k0),
        dim_posterior=dimension_posterior(samples, p_s, prior, n, p, k0),
        column_names=list(column_names),
        method="gibbs",
        n=n,
        p=p,
        k0=k0,
        prior_label=prior.label,
        mixing_label=mixing_label,
        extras=dict(extras or {}),
    )


__all__ = [
    "HpmChoice",
    "hpm",
    "best_singular_dimension",
    "select_hpm",
    "p_singular",
    "p_singular_from_log_c",
    "regular_inclusion",
    "blend_inclusion",
    "dimension_posterior",
    "spurious_stats",
    "PosteriorSummary",
    "build_summary",
]

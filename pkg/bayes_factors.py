"""
Conventional Bayes factors and priors over the model space.

A conventional prior is indexed by a mixing density p_n(t) over the scale of
the slab. For a regular model the Bayes factor against the null is

    B = integral of (1 + t Q)^(-(n-k0)/2) (1 + t)^((n-k-k0)/2) p_n(t) dt

which has a closed form for a point mass (the g-prior) and for the hyper-g
density (an incomplete beta function), and is integrated numerically otherwise.
Saturated and singular models get B = 1 exactly.

Everything is carried in log space. Integrals are taken over s = log t around
the located peak of the log integrand, so narrow peaks at very large t (tiny Q,
large n) stay resolvable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize
from scipy.special import betainc, betaln, gammaln, logsumexp

from errors import (
    ClassificationError,
    EmptySingularBlockError,
    IntegrationError,
    MixingDensityError,
    SpecParseError,
)
from model_space import ModelIndicator, ModelStats, RankClass

QUAD_EPSREL = 1e-8
QUAD_EPSABS = 1e-300
QUAD_LIMIT = 200
QUAD_MAX_RELERR = 1e-6
NORMALIZATION_TOL = 1e-6
PEAK_GRID_POINTS = 513
LOG_T_MIN = -700.0
LOG_T_MAX = 700.0
GRID_LOG_T_MIN = -60.0
GRID_LOG_T_MAX = 120.0
TAIL_DROP = 80.0


def _softplus(x: float) -> float:
    """log(1 + exp(x)) without overflow."""
    if x > 35.0:
        return x
    if x < -745.0:
        return 0.0
    return math.log1p(math.exp(x))


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


class MixingKind(str, Enum):
    POINT_MASS = "point-mass"
    HYPER_G = "hyper-g"
    QUADRATURE = "quadrature"


LogDensity = Callable[[float], float]
GridFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MixingDensity:
    """Mixing density p_n(t) over the slab scale t."""
    kind: MixingKind
    g: Optional[float] = None
    a: Optional[float] = None
    log_density_fn: Optional[LogDensity] = field(default=None, compare=False)
    support: Tuple[float, float] = (0.0, math.inf)
    label: str = ""

    @classmethod
    def point_mass(cls, g: float, label: Optional[str] = None) -> "MixingDensity":
        g = float(g)
        if not (g > 0.0 and math.isfinite(g)):
            raise MixingDensityError(f"g-prior needs a positive finite g, got {g}", details={"g": g})
        return cls(kind=MixingKind.POINT_MASS, g=g, label=label or f"g-prior:{g!r}")

    @classmethod
    def hyper_g(cls, a: float, label: Optional[str] = None) -> "MixingDensity":
        a = float(a)
        if not (a > 2.0 and math.isfinite(a)):
            raise MixingDensityError(f"hyper-g needs a > 2, got {a}", details={"a": a})
        return cls(kind=MixingKind.HYPER_G, a=a, label=label or f"hyper-g:{a!r}")

    @classmethod
    def quadrature(
        cls,
        density: Optional[Callable[[float], float]] = None,
        *,
        log_density: Optional[LogDensity] = None,
        support: Tuple[float, float] = (0.0, math.inf),
        label: str = "quadrature",
        check: bool = True,
    ) -> "MixingDensity":
        """Wrap an arbitrary density; normalization is checked by quadrature unless check=False."""
        if log_density is None:
            if density is None:
                raise MixingDensityError("quadrature mixing needs a density or a log-density")
            base = density

            def log_density(t: float) -> float:
                return _safe_log(float(base(t)))

        lower, upper = float(support[0]), float(support[1])
        if lower < 0.0 or not upper > lower:
            raise MixingDensityError(
                f"invalid support ({lower}, {upper})", details={"support": [lower, upper]}
            )
        mix = cls(
            kind=MixingKind.QUADRATURE,
            log_density_fn=log_density,
            support=(lower, upper),
            label=label,
        )
        if check:
            total = mix.total_mass()
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise MixingDensityError(
                    f"mixing density integrates to {total!r}, not 1",
                    details={"label": label, "integral": total},
                )
        return mix

    def log_density_at_log_t(self, s: float) -> float:
        """log p(t) evaluated at t = exp(s)."""
        if self.kind is MixingKind.HYPER_G:
            a = float(self.a)  # type: ignore[arg-type]
            return math.log((a - 2.0) / 2.0) - 0.5 * a * _softplus(s)
        if self.kind is MixingKind.QUADRATURE:
            return self.log_density_fn(math.exp(s))  # type: ignore[misc]
        raise MixingDensityError("a point mass has no density")

    def log_density_on_grid(self, s: np.ndarray) -> np.ndarray:
        """log p(t) at t = exp(s) for a whole array of s."""
        if self.kind is MixingKind.HYPER_G:
            a = float(self.a)  # type: ignore[arg-type]
            return math.log((a - 2.0) / 2.0) - 0.5 * a * np.logaddexp(0.0, s)
        if self.kind is MixingKind.QUADRATURE:
            t = np.exp(s)
            try:
                with np.errstate(all="ignore"):
                    values = np.asarray(self.log_density_fn(t), dtype=float)  # type: ignore[misc]
                if values.shape == t.shape:
                    return values
            except (TypeError, ValueError):
                pass
            # scalar-only density
            return np.array([self.log_density_fn(float(x)) for x in t])  # type: ignore[misc]
        raise MixingDensityError("a point mass has no density")

    def log_density(self, t: float) -> float:
        if t <= 0.0:
            return -math.inf
        return self.log_density_at_log_t(math.log(t))

    def density(self, t: float) -> float:
        return math.exp(self.log_density(t))

    def log_support(self) -> Tuple[float, float]:
        lower, upper = self.support
        lo = LOG_T_MIN if lower <= 0.0 else max(math.log(lower), LOG_T_MIN)
        hi = LOG_T_MAX if math.isinf(upper) else min(math.log(upper), LOG_T_MAX)
        return lo, hi

    def total_mass(self) -> float:
        if self.kind is not MixingKind.QUADRATURE:
            return 1.0
        log_mass, _ = _log_integrate(
            lambda s: self.log_density_at_log_t(s) + s,
            self.log_support(),
            lambda s: self.log_density_on_grid(s) + s,
        )
        return math.exp(log_mass)

    def to_dict(self) -> Dict[str, object]:
        return {"kind": self.kind.value, "g": self.g, "a": self.a, "label": self.label}


def _log_integrate(
    log_f: Callable[[float], float],
    bounds: Tuple[float, float],
    log_f_grid: Optional[GridFn] = None,
) -> Tuple[float, float]:
    """
    log of the integral of exp(log_f(s)) over bounds, plus the relative error estimate.

    The peak is located on a grid and refined; the range is then trimmed to where the
    integrand is within TAIL_DROP log-units of the peak and integrated in two halves.
    `log_f_grid`, when given, evaluates log_f over the whole grid in one call.
    """
    lo, hi = bounds
    grid_lo, grid_hi = max(lo, GRID_LOG_T_MIN), min(hi, GRID_LOG_T_MAX)
    if grid_hi <= grid_lo:
        grid_lo, grid_hi = lo, hi
    grid = np.linspace(grid_lo, grid_hi, PEAK_GRID_POINTS)
    if log_f_grid is not None:
        with np.errstate(all="ignore"):
            values = np.asarray(log_f_grid(grid), dtype=float)
    else:
        values = np.array([log_f(float(s)) for s in grid])
    finite = np.isfinite(values)
    if not finite.any():
        raise IntegrationError("log integrand is not finite anywhere on the search grid")
    values = np.where(finite, values, -np.inf)
    idx = int(np.argmax(values))
    s_peak, peak = float(grid[idx]), float(values[idx])

    step = float(grid[1] - grid[0])
    left, right = max(lo, s_peak - step), min(hi, s_peak + step)
    if right > left:
        res = optimize.minimize_scalar(
            lambda s: -log_f(s), bounds=(left, right), method="bounded", options={"xatol": 1e-10}
        )
        if res.success and math.isfinite(res.fun) and -res.fun > peak:
            s_peak, peak = float(res.x), float(-res.fun)
    if not math.isfinite(peak):
        raise IntegrationError("log integrand diverges", details={"peak_log_t": s_peak})

    def trim(direction: float, bound: float) -> float:
        width = 1.0
        while True:
            s = s_peak + direction * width
            if (direction < 0 and s <= bound) or (direction > 0 and s >= bound):
                return bound
            if log_f(s) < peak - TAIL_DROP:
                return s
            width *= 2.0

    a, b = trim(-1.0, lo), trim(1.0, hi)

    def f(s: float) -> float:
        return math.exp(log_f(s) - peak)

    total, abserr = 0.0, 0.0
    for x0, x1 in ((a, s_peak), (s_peak, b)):
        if x1 <= x0:
            continue
        out = integrate.quad(
            f, x0, x1, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT, full_output=1
        )
        total += out[0]
        abserr += out[1]
    if not (total > 0.0 and math.isfinite(total)):
        raise IntegrationError("quadrature produced a non-positive integral", details={"integral": total})
    relerr = abserr / total
    if relerr > QUAD_MAX_RELERR:
        raise IntegrationError(
            f"quadrature did not converge (relative error {relerr:.3g})",
            details={"relative_error": relerr},
        )
    return peak + math.log(total), relerr


@dataclass(frozen=True)
class BayesFactor:
    value: float
    log_value: float
    model: ModelIndicator

    @classmethod
    def from_log(cls, log_value: float, model: ModelIndicator) -> "BayesFactor":
        value = math.exp(log_value) if log_value < 709.0 else math.inf
        return cls(value=value, log_value=log_value, model=model)


def hyper_g_log_bayes_factor(a: float, k: int, q: float, n: int, k0: int) -> Optional[float]:
    """
    log B of a regular model under hyper-g(a), without quadrature.

    With R = 1 - Q, bA = (k + a)/2 - 1 and bB = (n - k0 - k - a)/2 + 1,

        B = (a - 2)/2 * Q^(bA - (n-k0)/2) * R^(-bA) * Beta(bA, bB) * I_R(bA, bB)

    where I_R is the regularized incomplete beta function. This equals
    (a - 2)/(k + a - 2) 2F1((n-k0)/2, 1; (k+a)/2; R). Returns None where the
    form does not apply (bB <= 0, Q at 0 or 1, or I_R underflows).
    """
    shape_a = 0.5 * (k + a) - 1.0
    shape_b = 0.5 * (n - k0 - k - a) + 1.0
    r = 1.0 - q
    if not (shape_b > 0.0 and 0.0 < q < 1.0):
        return None
    tail = float(betainc(shape_a, shape_b, r))
    if not (tail > 0.0 and math.isfinite(tail)):
        return None
    return (
        math.log(0.5 * (a - 2.0))
        + (shape_a - 0.5 * (n - k0)) * math.log(q)
        - shape_a * math.log(r)
        + float(betaln(shape_a, shape_b))
        + math.log(tail)
    )


def _log_bayes_factor(stats: ModelStats, mix: MixingDensity, n: int, k0: int, log_scale: float) -> float:
    if stats.rank_class is not RankClass.REGULAR or stats.k == 0:
        return 0.0
    k, Q = stats.k, stats.q_ratio
    if k + k0 >= n:
        raise ClassificationError(
            f"model with k={k} labelled regular but k + k0 >= n = {n}",
            details={"model": [int(i) for i in stats.model.indices], "k": k, "n": n, "k0": k0},
        )
    half_resid = 0.5 * (n - k0)
    half_dim = 0.5 * (n - k - k0)
    log_q = _safe_log(Q)

    if mix.kind is MixingKind.POINT_MASS:
        log_g = math.log(float(mix.g)) + log_scale  # type: ignore[arg-type]
        return half_dim * _softplus(log_g) - half_resid * _softplus(log_g + log_q)
    if mix.kind is MixingKind.HYPER_G and log_scale == 0.0:
        closed = hyper_g_log_bayes_factor(float(mix.a), k, Q, n, k0)  # type: ignore[arg-type]
        if closed is not None:
            return closed

    def log_integrand(s: float) -> float:
        st = s + log_scale
        return half_dim * _softplus(st) - half_resid * _softplus(st + log_q) + mix.log_density_at_log_t(s) + s

    def log_integrand_grid(s: np.ndarray) -> np.ndarray:
        st = s + log_scale
        return (
            half_dim * np.logaddexp(0.0, st)
            - half_resid * np.logaddexp(0.0, st + log_q)
            + mix.log_density_on_grid(s)
            + s
        )

    try:
        log_value, _ = _log_integrate(log_integrand, mix.log_support(), log_integrand_grid)
    except IntegrationError as exc:
        exc.details.setdefault("model", [int(i) for i in stats.model.indices])
        raise
    return log_value


def bayes_factor(stats: ModelStats, mix: MixingDensity, n: int, k0: int) -> BayesFactor:
    """Bayes factor of the model against the null under the conventional prior `mix`."""
    return BayesFactor.from_log(_log_bayes_factor(stats, mix, n, k0, 0.0), stats.model)


def bayes_factor_rescaled(stats: ModelStats, mix_star: MixingDensity, n: int, k0: int) -> BayesFactor:
    """Same Bayes factor written on the t/n scale, for a density from rescale_mixing(mix, n)."""
    return BayesFactor.from_log(_log_bayes_factor(stats, mix_star, n, k0, math.log(n)), stats.model)


def rescale_mixing(mix: MixingDensity, n: float) -> MixingDensity:
    """Density of t/n: p*(t) = n p(n t). rescale_mixing(rescale_mixing(m, n), 1/n) gives back m."""
    n = float(n)
    if n == 1.0:
        return mix
    if not n > 0.0:
        raise MixingDensityError(f"rescale factor must be positive, got {n}")
    if mix.kind is MixingKind.POINT_MASS:
        return MixingDensity(kind=MixingKind.POINT_MASS, g=float(mix.g) / n, label=f"{mix.label}/{n!r}")  # type: ignore[arg-type]

    log_n = math.log(n)

    def log_density(t: float) -> float:
        if t <= 0.0:
            return -math.inf
        return log_n + mix.log_density_at_log_t(math.log(t) + log_n)

    lower, upper = mix.support
    return MixingDensity(
        kind=MixingKind.QUADRATURE,
        log_density_fn=log_density,
        support=(lower / n, upper / n),
        label=f"{mix.label}/{n!r}",
    )


# ---------------------------------------------------------------------------
# Model priors


class PriorKind(str, Enum):
    SCOTT_BERGER = "scott-berger"
    UNIFORM = "uniform"
    BETA_BINOMIAL = "beta-binomial"


@dataclass(frozen=True)
class ModelPrior:
    kind: PriorKind
    a: Optional[float] = None
    b: Optional[float] = None

    @classmethod
    def scott_berger(cls) -> "ModelPrior":
        return cls(PriorKind.SCOTT_BERGER)

    @classmethod
    def uniform(cls) -> "ModelPrior":
        return cls(PriorKind.UNIFORM)

    @classmethod
    def beta_binomial(cls, a: float, b: float) -> "ModelPrior":
        a, b = float(a), float(b)
        if not (a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b)):
            raise SpecParseError(f"beta-binomial needs positive a and b, got ({a}, {b})")
        return cls(PriorKind.BETA_BINOMIAL, a=a, b=b)

    @property
    def label(self) -> str:
        if self.kind is PriorKind.BETA_BINOMIAL:
            return f"beta-binomial:{self.a!r},{self.b!r}"
        return self.kind.value

    def to_dict(self) -> Dict[str, object]:
        return {"kind": self.kind.value, "a": self.a, "b": self.b, "label": self.label}


def log_binomial(p: int, k):
    return gammaln(p + 1.0) - gammaln(k + 1.0) - gammaln(p - k + 1.0)


def log_dimension_masses(prior: ModelPrior, p: int) -> np.ndarray:
    """log Pr(k_gamma = k) for k = 0..p."""
    ks = np.arange(p + 1, dtype=float)
    if prior.kind is PriorKind.SCOTT_BERGER:
        return np.full(p + 1, -math.log(p + 1.0))
    if prior.kind is PriorKind.UNIFORM:
        return log_binomial(p, ks) - p * math.log(2.0)
    a, b = float(prior.a), float(prior.b)  # type: ignore[arg-type]
    return log_binomial(p, ks) + betaln(ks + a, p - ks + b) - betaln(a, b)


def log_model_prior_table(prior: ModelPrior, p: int) -> np.ndarray:
    """log P(M_gamma) for a single model of each dimension k = 0..p."""
    ks = np.arange(p + 1, dtype=float)
    if prior.kind is PriorKind.UNIFORM:
        return np.full(p + 1, -p * math.log(2.0))
    return log_dimension_masses(prior, p) - log_binomial(p, ks)


def model_prior_log(prior: ModelPrior, m: ModelIndicator, p: int) -> float:
    k = m.k
    if prior.kind is PriorKind.SCOTT_BERGER:
        return float(-math.log(p + 1.0) - log_binomial(p, float(k)))
    if prior.kind is PriorKind.UNIFORM:
        return -p * math.log(2.0)
    a, b = float(prior.a), float(prior.b)  # type: ignore[arg-type]
    return float(betaln(k + a, p - k + b) - betaln(a, b))


def model_prior_prob(prior: ModelPrior, m: ModelIndicator, p: int) -> float:
    return math.exp(model_prior_log(prior, m, p))


def singular_threshold(n: int, k0: int) -> int:
    """Smallest dimension that is saturated or singular."""
    return max(n - k0, 0)


def prior_mass_singular(prior: ModelPrior, n: int, p: int, k0: int) -> float:
    """Prior probability of the saturated plus singular block."""
    k_s = singular_threshold(n, k0)
    if k_s > p:
        return 0.0
    if k_s == 0:
        return 1.0
    if prior.kind is PriorKind.SCOTT_BERGER:
        return min(max((p - n + k0 + 1) / (p + 1.0), 0.0), 1.0)
    return float(math.exp(logsumexp(log_dimension_masses(prior, p)[k_s:])))


def prior_mass_regular(prior: ModelPrior, n: int, p: int, k0: int) -> float:
    k_s = singular_threshold(n, k0)
    if k_s > p:
        return 1.0
    if k_s == 0:
        return 0.0
    if prior.kind is PriorKind.SCOTT_BERGER:
        return min(max((n - k0) / (p + 1.0), 0.0), 1.0)
    return float(math.exp(logsumexp(log_dimension_masses(prior, p)[:k_s])))


def singular_dimension_probs(prior: ModelPrior, n: int, p: int, k0: int) -> Tuple[np.ndarray, np.ndarray]:
    """Dimensions of the singular block and Pr(k | M^S)."""
    k_s = singular_threshold(n, k0)
    if k_s > p:
        raise EmptySingularBlockError(
            f"no saturated or singular models when p={p} < n - k0 = {k_s}",
            details={"n": n, "p": p, "k0": k0},
        )
    ks = np.arange(k_s, p + 1)
    if prior.kind is PriorKind.SCOTT_BERGER:
        return ks, np.full(ks.size, 1.0 / ks.size)
    log_w = log_dimension_masses(prior, p)[k_s:]
    return ks, np.exp(log_w - logsumexp(log_w))


def q_singular(prior: ModelPrior, n: int, p: int, k0: int) -> float:
    """Inclusion probability of any covariate conditional on the singular block."""
    k_s = singular_threshold(n, k0)
    if k_s > p:
        raise EmptySingularBlockError(
            f"no saturated or singular models when p={p} < n - k0 = {k_s}",
            details={"n": n, "p": p, "k0": k0},
        )
    if prior.kind is PriorKind.SCOTT_BERGER:
        m = n - k0
        return 0.5 * (p * (p + 1.0) - m * (m - 1.0)) / (p * (p - m + 1.0))
    ks, probs = singular_dimension_probs(prior, n, p, k0)
    return float(np.dot(probs, ks) / p)


# ---------------------------------------------------------------------------
# Spec strings


def _parse_number(token: str, n: Optional[int], p: Optional[int], spec: str) -> float:
    text = token.strip()
    if text in ("n", "p"):
        value = n if text == "n" else p
        if value is None:
            raise SpecParseError(f"token '{text}' in '{spec}' needs a known {text}", details={"spec": spec})
        return float(value)
    try:
        return float(text)
    except ValueError:
        raise SpecParseError(f"bad number {text!r} in '{spec}'", details={"spec": spec}) from None


def _parse_args(args: str, count: int, spec: str, n: Optional[int], p: Optional[int]) -> List[float]:
    parts = [part for part in args.split(",")] if args else []
    if len(parts) != count:
        raise SpecParseError(
            f"'{spec}' expects {count} parameter(s), got {len(parts)}", details={"spec": spec}
        )
    return [_parse_number(part, n, p, spec) for part in parts]


def parse_prior_spec(text: str, *, n: Optional[int] = None, p: Optional[int] = None) -> ModelPrior:
    """'scott-berger', 'uniform' or 'beta-binomial:a,b' (a, b may be the tokens n or p)."""
    spec = (text or "").strip().lower()
    name, _, args = spec.partition(":")
    if name == PriorKind.SCOTT_BERGER.value and not args:
        return ModelPrior.scott_berger()
    if name == PriorKind.UNIFORM.value and not args:
        return ModelPrior.uniform()
    if name == PriorKind.BETA_BINOMIAL.value:
        a, b = _parse_args(args, 2, spec, n, p)
        return ModelPrior.beta_binomial(a, b)
    raise SpecParseError(f"unknown model prior '{text}'", details={"spec": text})


def inverse_gamma_log_density(a: float, b: float) -> LogDensity:
    if not (a > 0.0 and b > 0.0):
        raise MixingDensityError(f"inverse-gamma needs positive a and b, got ({a}, {b})")
    const = a * math.log(b) - float(gammaln(a))

    def log_density(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(t > 0.0, const - (a + 1.0) * np.log(t) - b / t, -np.inf)
        return out if out.ndim else float(out)

    return log_density


def _parse_quadrature_spec(spec: str, density_spec: str, n: Optional[int], p: Optional[int]) -> MixingDensity:
    name, _, args = density_spec.partition(":")
    if name == "inv-gamma":
        a, b = _parse_args(args, 2, spec, n, p)
        return MixingDensity.quadrature(log_density=inverse_gamma_log_density(a, b), label=spec)
    if name == "zellner-siow":
        if args:
            raise SpecParseError("'zellner-siow' takes no parameters", details={"spec": spec})
        if n is None:
            raise SpecParseError("'zellner-siow' needs the sample size n", details={"spec": spec})
        return MixingDensity.quadrature(log_density=inverse_gamma_log_density(0.5, n / 2.0), label=spec)
    if name == "hyper-g":
        (a,) = _parse_args(args, 1, spec, n, p)
        base = MixingDensity.hyper_g(a)
        return MixingDensity.quadrature(log_density=base.log_density, label=spec)
    if name == "hyper-g-n":
        (a,) = _parse_args(args, 1, spec, n, p)
        if n is None:
            raise SpecParseError("'hyper-g-n' needs the sample size n", details={"spec": spec})
        # hyper-g on the t/n scale: p(t) = (a - 2) / (2 n) (1 + t/n)^(-a/2)
        base = MixingDensity.hyper_g(a)
        return MixingDensity.quadrature(
            log_density=rescale_mixing(base, 1.0 / n).log_density_fn, label=spec
        )
    raise SpecParseError(f"unknown quadrature density '{density_spec}'", details={"spec": spec})


def parse_mixing_spec(text: str, *, n: Optional[int] = None, p: Optional[int] = None) -> MixingDensity:
    """'g-prior:g', 'hyper-g:a' or 'quadrature:<density-spec>'."""
    spec = (text or "").strip().lower()
    name, _, args = spec.partition(":")
    if name == "g-prior":
        (g,) = _parse_args(args, 1, spec, n, p)
        return MixingDensity.point_mass(g, label=spec)
    if name == "hyper-g":
        (a,) = _parse_args(args, 1, spec, n, p)
        return MixingDensity.hyper_g(a, label=spec)
    if name == "quadrature":
        if not args:
            raise SpecParseError("'quadrature' needs a density spec", details={"spec": spec})
        return _parse_quadrature_spec(spec, args, n, p)
    raise SpecParseError(f"unknown mixing density '{text}'", details={"spec": text})


__all__ = [
    "MixingKind",
    "MixingDensity",
    "BayesFactor",
    "bayes_factor",
    "bayes_factor_rescaled",
    "hyper_g_log_bayes_factor",
    "rescale_mixing",
    "PriorKind",
    "ModelPrior",
    "log_binomial",
    "log_dimension_masses",
    "log_model_prior_table",
    "model_prior_log",
    "model_prior_prob",
    "singular_threshold",
    "prior_mass_singular",
    "prior_mass_regular",
    "singular_dimension_probs",
    "q_singular",
    "inverse_gamma_log_density",
    "parse_prior_spec",
    "parse_mixing_spec",
]

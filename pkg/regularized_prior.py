"""
Regularized conventional prior for saturated and singular models.

A singular model has a rank-deficient Gram matrix V'V. The regularized prior
replaces its inverse by (V'V + T)^-1 with T = C'C, where the k - n + k0 rows of
C complete the row space of V. This module builds such regularizers and checks
numerically what the construction promises:

- (V'V + T)^-1 is a generalized inverse of V'V
- the hat matrix, and so every estimable-function posterior, does not depend on T
- the fixed-t marginal ratio against the null is exactly 1
- the determinant identity behind that ratio
- a singular model reparameterizes to a saturated one with the same column space

Everything here is dense linear algebra at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from errors import BVSError, InvariantViolationError, RegularizerConstructionError
from model_space import (
    CenteredDesign,
    Dataset,
    ModelIndicator,
    RankClass,
    center_design,
    check_response,
    classify,
    full_rank_factorize,
    numerical_rank,
)

MAX_REGULARIZER_ATTEMPTS = 10
CHECK_TOL = 1e-8
DEFAULT_T_VALUES = (0.1, 1.0, 100.0)
DEFAULT_SIZES = tuple(range(3, 9))
DEFAULT_EXTRA_DIMS = (0, 1, 2, 3, 4, 5)
# largest battery design has k = n + MAX_K_OVER_N columns
MAX_K_OVER_N = 4


@dataclass
class Regularizer:
    """T = C'C for one model; C is (k - n + k0) x k for a singular model, empty otherwise."""
    C: np.ndarray
    T: np.ndarray

    @property
    def k(self) -> int:
        return int(self.T.shape[0])

    @property
    def rank(self) -> int:
        return int(self.C.shape[0])

    @classmethod
    def zero(cls, k: int) -> "Regularizer":
        return cls(C=np.zeros((0, k)), T=np.zeros((k, k)))

    @classmethod
    def from_rows(cls, C: Any) -> "Regularizer":
        C = np.atleast_2d(np.asarray(C, dtype=float))
        return cls(C=C, T=C.T @ C)

    @classmethod
    def ridge(cls, k: int, lam: float) -> "Regularizer":
        """lam * I: full rank, so it breaks the generalized-inverse property on purpose."""
        return cls(C=math.sqrt(lam) * np.eye(k), T=lam * np.eye(k))


def build_regularizer(cd: CenteredDesign, m: ModelIndicator, k0: Optional[int] = None, seed: int = 0) -> Regularizer:
    """Seeded random C whose rows together with the rows of V_gamma span R^k."""
    k0 = cd.k0 if k0 is None else k0
    if classify(m, cd.n, k0) is not RankClass.SINGULAR:
        return Regularizer.zero(m.k)
    rows = m.k - cd.n + k0
    V = cd.columns(m)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REGULARIZER_ATTEMPTS):
        C = rng.standard_normal((rows, m.k))
        if numerical_rank(np.vstack([V, C])) == m.k and numerical_rank(C) == rows:
            return Regularizer.from_rows(C)
    raise RegularizerConstructionError(
        f"no regularizer completing the row space after {MAX_REGULARIZER_ATTEMPTS} draws",
        details={"model": [int(i) for i in m.indices], "seed": seed},
    )


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_residual: float
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
        }


def _regularized_gram(V: np.ndarray, reg: Regularizer, m: ModelIndicator) -> np.ndarray:
    M = V.T @ V + reg.T
    if numerical_rank(M) < M.shape[0]:
        raise InvariantViolationError(
            "V'V + T is singular: T does not complete the row space of V",
            details={"model": [int(i) for i in m.indices]},
        )
    return M


def verify_generalized_inverse(cd: CenteredDesign, m: ModelIndicator, reg: Regularizer) -> CheckResult:
    """A G A = A for A = V'V and G = (V'V + T)^-1."""
    V = cd.columns(m)
    A = V.T @ V
    M = _regularized_gram(V, reg, m)
    AGA = A @ linalg.solve(M, A, assume_a="sym")
    residual = float(np.max(np.abs(AGA - A))) if A.size else 0.0
    scale = float(np.max(np.abs(A))) if A.size else 1.0
    tolerance = CHECK_TOL * scale
    return CheckResult("generalized_inverse", residual <= tolerance, residual, tolerance)


def _inner_matrix(V: np.ndarray, reg: Regularizer, t: float, m: ModelIndicator) -> np.ndarray:
    if not t > 0.0:
        raise InvariantViolationError(f"t must be positive, got {t}", details={"t": t})
    inner = V.T @ V * (1.0 + 1.0 / t) + reg.T / t
    if numerical_rank(inner) < inner.shape[0]:
        raise InvariantViolationError(
            "V'V(1 + 1/t) + T/t is singular",
            details={"model": [int(i) for i in m.indices], "t": t},
        )
    return inner


def hat_matrix(cd: CenteredDesign, m: ModelIndicator, reg: Regularizer, t: float) -> np.ndarray:
    V = cd.columns(m)
    if m.k == 0:
        return np.zeros((cd.n, cd.n))
    inner = _inner_matrix(V, reg, t, m)
    return V @ linalg.solve(inner, V.T, assume_a="sym")


@dataclass
class ConditionalPosterior:
    """Normal law of beta_gamma given alpha, sigma = 1, t and y."""
    mean: np.ndarray
    scale: np.ndarray
    t: float


def conditional_posterior(
    cd: CenteredDesign, m: ModelIndicator, reg: Regularizer, t: float, y: np.ndarray
) -> ConditionalPosterior:
    V = cd.columns(m)
    inner = _inner_matrix(V, reg, t, m)
    scale = linalg.inv(inner)
    scale = 0.5 * (scale + scale.T)
    return ConditionalPosterior(mean=scale @ (V.T @ y), scale=scale, t=t)


def estimable_posterior(
    cd: CenteredDesign,
    m: ModelIndicator,
    reg: Regularizer,
    t: float,
    y: np.ndarray,
    contrast: np.ndarray,
) -> Tuple[float, float]:
    """Posterior (mean, variance) of theta = contrast' V beta."""
    contrast = np.asarray(contrast, dtype=float)
    if not np.any(contrast):
        return 0.0, 0.0
    H = hat_matrix(cd, m, reg, t)
    return float(contrast @ H @ y), float(contrast @ H @ contrast)


def marginal_log_ratio_fixed_t(d: Dataset, cd: CenteredDesign, m: ModelIndicator, reg: Regularizer, t: float) -> float:
    """
    log m_gamma(y) / m_0(y) with the slab N(0, t sigma^2 (V'V + T)^-1) and prior 1/sigma.

    Integrating beta out leaves y_c ~ N(0, sigma^2 S) with S = I + t V (V'V + T)^-1 V',
    so the ratio is |S|^(-1/2) (y_c' S^-1 y_c / SSE_0)^(-(n-k0)/2).
    """
    check_response(cd)
    if not t > 0.0:
        raise InvariantViolationError(f"t must be positive, got {t}", details={"t": t})
    V = cd.columns(m)
    n = cd.n
    if m.k == 0:
        return 0.0
    M = _regularized_gram(V, reg, m)
    S = np.eye(n) + t * (V @ linalg.solve(M, V.T, assume_a="sym"))
    sign, logdet = np.linalg.slogdet(S)
    if sign <= 0:
        raise InvariantViolationError("marginal covariance is not positive definite")
    yc = cd.y_centered
    quad = float(yc @ linalg.solve(S, yc, assume_a="pos"))
    return -0.5 * logdet - 0.5 * (n - d.k0) * (math.log(quad) - math.log(cd.sse_null))


def marginal_ratio_fixed_t(d: Dataset, cd: CenteredDesign, m: ModelIndicator, reg: Regularizer, t: float) -> float:
    return math.exp(marginal_log_ratio_fixed_t(d, cd, m, reg, t))


def determinant_identity(cd: CenteredDesign, m: ModelIndicator, reg: Regularizer) -> float:
    """
    det(L'(I - P_n)L)^(-1/2) det(V'V + T)^(1/2) / |det [R; C]| for V_gamma = L R.

    Returns the value, which equals 1 for a valid regularizer.
    """
    V = cd.columns(m)
    factors = full_rank_factorize(cd, m)
    stacked = np.vstack([factors.R, reg.C])
    if stacked.shape[0] != stacked.shape[1]:
        raise InvariantViolationError(
            f"[R; C] is {stacked.shape[0]}x{stacked.shape[1]}, not square",
            details={"model": [int(i) for i in m.indices], "rank": factors.rank, "rows": reg.rank},
        )
    L = factors.L
    if cd.k0 == 1:
        L = L - L.mean(axis=0)
    sign_l, logdet_l = np.linalg.slogdet(L.T @ L)
    sign_m, logdet_m = np.linalg.slogdet(V.T @ V + reg.T)
    sign_s, logdet_s = np.linalg.slogdet(stacked)
    if sign_l <= 0 or sign_m <= 0 or sign_s == 0:
        raise InvariantViolationError(
            "determinant identity has a singular factor",
            details={"model": [int(i) for i in m.indices]},
        )
    return math.exp(-0.5 * logdet_l + 0.5 * logdet_m - logdet_s)


def verify_saturated_reparameterization(cd: CenteredDesign, m: ModelIndicator) -> CheckResult:
    """
    y = alpha 1 + L beta* + e is saturated: it fits exactly and spans col(V_gamma).

    Residual is the larger of SSE/SSE_0 and the relative distance of V_gamma from col(L).
    """
    V = cd.columns(m)
    factors = full_rank_factorize(cd, m)
    Q, _ = linalg.qr(factors.L, mode="economic")
    yc = cd.y_centered
    resid_y = yc - Q @ (Q.T @ yc)
    sse_ratio = float(resid_y @ resid_y) / cd.sse_null
    resid_v = V - Q @ (Q.T @ V)
    span_gap = float(np.max(np.abs(resid_v))) / max(float(np.max(np.abs(V))), 1e-300)
    residual = max(sse_ratio, span_gap)
    passed = residual <= CHECK_TOL and factors.rank == cd.n - cd.k0
    return CheckResult("saturated_reparameterization", passed, residual, CHECK_TOL)


# ---------------------------------------------------------------------------
# Invariant battery


CHECK_NAMES = (
    "generalized_inverse",
    "hat_invariance",
    "estimable_invariance",
    "marginal_ratio",
    "determinant_identity",
    "saturated_reparameterization",
)


@dataclass
class CheckSummary:
    name: str
    tolerance: float
    max_residual: float = 0.0
    worst_case_seed: Optional[int] = None
    cases: int = 0
    failures: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, residual: float, case_seed: int) -> None:
        self.cases += 1
        if not (residual <= self.tolerance):
            self.failures += 1
        if self.worst_case_seed is None or not (residual <= self.max_residual):
            self.max_residual = residual
            self.worst_case_seed = case_seed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "worst_case_seed": self.worst_case_seed,
            "cases": self.cases,
            "failures": self.failures,
        }


@dataclass
class InvariantReport:
    seed: int
    sabotage: bool
    checks: Dict[str, CheckSummary] = field(default_factory=dict)
    cases: int = 0
    singular_cases: int = 0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "sabotage": self.sabotage,
            "passed": self.passed,
            "cases": self.cases,
            "singular_cases": self.singular_cases,
            "checks": [self.checks[name].to_dict() for name in CHECK_NAMES if name in self.checks],
        }


def _scaled_gap(a: float, b: float, scale: float) -> float:
    return abs(a - b) / max(scale, 1e-300)


def run_invariant_battery(
    seed: int = 0,
    sizes: Optional[Sequence[int]] = None,
    *,
    t_values: Iterable[float] = DEFAULT_T_VALUES,
    extra_dims: Iterable[int] = DEFAULT_EXTRA_DIMS,
    sabotage: bool = False,
) -> InvariantReport:
    """
    Randomized battery over (n, k0, k) designs, two regularizers per design and several t.

    k runs from the saturated size n - k0 up to n + MAX_K_OVER_N; every k above n - k0
    is a singular design. With `sabotage` the regularizers are replaced by ridge
    matrices, which must make the battery fail.
    """
    sizes = tuple(sizes) if sizes is not None else DEFAULT_SIZES
    t_values = tuple(t_values)
    report = InvariantReport(seed=seed, sabotage=sabotage)
    for name in CHECK_NAMES:
        report.checks[name] = CheckSummary(name=name, tolerance=CHECK_TOL)

    seq = np.random.SeedSequence(seed)
    layouts = [
        (n, k0, extra)
        for n in sizes
        for k0 in (0, 1)
        for extra in extra_dims
        if extra <= MAX_K_OVER_N + k0
    ]
    children = seq.spawn(len(layouts))
    for (n, k0, extra), child in zip(layouts, children):
        case_seed = int(child.generate_state(1)[0])
        rng = np.random.default_rng(case_seed)
        k = n - k0 + extra
        X = rng.standard_normal((n, k))
        y = rng.standard_normal(n)
        d = Dataset.from_arrays(y, X, k0=k0)
        cd = center_design(d)
        m = ModelIndicator.full(k)
        contrast = rng.standard_normal(n)
        report.cases += 1
        if extra > 0:
            report.singular_cases += 1

        if sabotage:
            regs = [Regularizer.ridge(k, 1.0), Regularizer.ridge(k, 2.0)]
        else:
            regs = [build_regularizer(cd, m, k0, case_seed + 1), build_regularizer(cd, m, k0, case_seed + 2)]

        _run_case_checks(report, d, cd, m, regs, t_values, contrast, case_seed)
    return report


def _record_failure(report: InvariantReport, name: str, case_seed: int) -> None:
    report.checks[name].record(math.inf, case_seed)


def _run_case_checks(
    report: InvariantReport,
    d: Dataset,
    cd: CenteredDesign,
    m: ModelIndicator,
    regs: List[Regularizer],
    t_values: Tuple[float, ...],
    contrast: np.ndarray,
    case_seed: int,
) -> None:
    checks = report.checks
    for reg in regs:
        try:
            gi = verify_generalized_inverse(cd, m, reg)
            scale = gi.tolerance / CHECK_TOL
            checks["generalized_inverse"].record(gi.max_residual / scale, case_seed)
        except BVSError:
            _record_failure(report, "generalized_inverse", case_seed)
        try:
            checks["determinant_identity"].record(abs(determinant_identity(cd, m, reg) - 1.0), case_seed)
        except BVSError:
            _record_failure(report, "determinant_identity", case_seed)

    for t in t_values:
        try:
            H1 = hat_matrix(cd, m, regs[0], t)
            H2 = hat_matrix(cd, m, regs[1], t)
            scale = max(float(np.max(np.abs(H1))), 1.0)
            checks["hat_invariance"].record(float(np.max(np.abs(H1 - H2))) / scale, case_seed)
        except BVSError:
            _record_failure(report, "hat_invariance", case_seed)
        try:
            mean1, var1 = estimable_posterior(cd, m, regs[0], t, cd.y_centered, contrast)
            mean2, var2 = estimable_posterior(cd, m, regs[1], t, cd.y_centered, contrast)
            # |mean| <= |c| |y| and var <= |c|^2 since H is a contraction
            c_norm = float(np.linalg.norm(contrast))
            y_norm = float(np.linalg.norm(cd.y_centered))
            checks["estimable_invariance"].record(
                max(_scaled_gap(mean1, mean2, c_norm * y_norm), _scaled_gap(var1, var2, c_norm**2)),
                case_seed,
            )
        except BVSError:
            _record_failure(report, "estimable_invariance", case_seed)
        for reg in regs:
            try:
                log_ratio = marginal_log_ratio_fixed_t(d, cd, m, reg, t)
                checks["marginal_ratio"].record(abs(math.expm1(log_ratio)), case_seed)
            except BVSError:
                _record_failure(report, "marginal_ratio", case_seed)

    checks["saturated_reparameterization"].record(
        verify_saturated_reparameterization(cd, m).max_residual, case_seed
    )


__all__ = [
    "Regularizer",
    "build_regularizer",
    "CheckResult",
    "verify_generalized_inverse",
    "hat_matrix",
    "ConditionalPosterior",
    "conditional_posterior",
    "estimable_posterior",
    "marginal_log_ratio_fixed_t",
    "marginal_ratio_fixed_t",
    "determinant_identity",
    "verify_saturated_reparameterization",
    "CheckSummary",
    "InvariantReport",
    "run_invariant_battery",
]

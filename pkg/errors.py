"""
Error hierarchy shared by every module.

Each error knows which module raised it, a stable string code, and the process
exit code the command-line entry point uses when the error reaches it.
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class BVSError(Exception):
    """Base class for all domain errors."""

    module = "core_model_space"
    code = "bvs_error"
    exit_code = 1

    def __init__(self, message: str, *, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for the JSON error body."""
        return {
            "module": self.module,
            "code": self.code,
            "message": self.message,
            "details": self.details,
        }


# core_model_space

class DatasetIOError(BVSError):
    code = "dataset_io"
    exit_code = 3


class DatasetParseError(BVSError):
    code = "dataset_parse"
    exit_code = 2


class DatasetValidationError(BVSError):
    code = "dataset_validation"
    exit_code = 2


class RankDeficiencyError(BVSError):
    code = "rank_deficiency"
    exit_code = 4


class DegenerateResponseError(BVSError):
    code = "degenerate_response"
    exit_code = 4


# priors_bayes_factors

class SpecParseError(BVSError):
    module = "priors_bayes_factors"
    code = "spec_parse"
    exit_code = 2


class MixingDensityError(BVSError):
    module = "priors_bayes_factors"
    code = "mixing_density"
    exit_code = 2


class IntegrationError(BVSError):
    module = "priors_bayes_factors"
    code = "integration"
    exit_code = 4


class ClassificationError(BVSError):
    module = "priors_bayes_factors"
    code = "classification"
    exit_code = 4


class EmptySingularBlockError(BVSError):
    module = "priors_bayes_factors"
    code = "empty_singular_block"
    exit_code = 4


# regularized_prior

class RegularizerConstructionError(BVSError):
    module = "regularized_prior"
    code = "regularizer_construction"
    exit_code = 4


class InvariantViolationError(BVSError):
    module = "regularized_prior"
    code = "invariant_violation"
    exit_code = 4


# gibbs_sampler

class SamplerInitializationError(BVSError):
    module = "gibbs_sampler"
    code = "sampler_initialization"
    exit_code = 4


class EstimationError(BVSError):
    module = "gibbs_sampler"
    code = "estimation"
    exit_code = 4


class EnumerationRefusedError(BVSError):
    module = "gibbs_sampler"
    code = "enumeration_refused"
    exit_code = 2


# posterior_summaries

class SummaryUndefinedError(BVSError):
    module = "posterior_summaries"
    code = "summary_undefined"
    exit_code = 4


# cli_harness

class ExperimentSpecError(BVSError):
    module = "cli_harness"
    code = "experiment_spec"
    exit_code = 2


__all__ = [
    "BVSError",
    "DatasetIOError",
    "DatasetParseError",
    "DatasetValidationError",
    "RankDeficiencyError",
    "DegenerateResponseError",
    "SpecParseError",
    "MixingDensityError",
    "IntegrationError",
    "ClassificationError",
    "EmptySingularBlockError",
    "RegularizerConstructionError",
    "InvariantViolationError",
    "SamplerInitializationError",
    "EstimationError",
    "EnumerationRefusedError",
    "SummaryUndefinedError",
    "ExperimentSpecError",
]

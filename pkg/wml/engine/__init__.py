"""
Wave-matrix Lindbladization engine.

Provides the algorithms, the LCU preparation simulator, identity suites and
the bench plumbing (config, cache, reporting, sweeps).
"""

from .algorithms import (
    alg1_run,
    alg2_run,
    alg3_run,
    alg4_run,
    channel_of_algorithm,
    copies_needed,
    copies_needed_trotter,
    queries_needed,
    run_algorithm,
)
from .cache import ReportCache, get_cache
from .config import ExperimentConfig
from .generators import build_M, build_M_poly
from .lcu import LcuReport, lcu_prepare_from_spec, lcu_prepare_linear, lcu_prepare_poly
from .lemmas import LemmaReport, verify_lemmas
from .reporter import OutputFormatter
from .specs import LinearSpec, PolySpec, RunConfig, RunReport
from .sweep import SweepResult, SweepRow, SweepRunner
from .tomography import compare_tomography, perturbation_bound_check

__all__ = [
    "ExperimentConfig",
    "LcuReport",
    "LemmaReport",
    "LinearSpec",
    "OutputFormatter",
    "PolySpec",
    "ReportCache",
    "RunConfig",
    "RunReport",
    "SweepResult",
    "SweepRow",
    "SweepRunner",
    "alg1_run",
    "alg2_run",
    "alg3_run",
    "alg4_run",
    "build_M",
    "build_M_poly",
    "channel_of_algorithm",
    "compare_tomography",
    "copies_needed",
    "copies_needed_trotter",
    "get_cache",
    "lcu_prepare_from_spec",
    "lcu_prepare_linear",
    "lcu_prepare_poly",
    "perturbation_bound_check",
    "queries_needed",
    "run_algorithm",
    "verify_lemmas",
]

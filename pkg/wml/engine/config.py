"""
Experiment configuration for wml-bench.

Handles loading, validation and atomic saving of JSON experiment files, and
turns them into spec objects and run configurations.
"""

import copy
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from wml.common.channel_utils import DensityMatrix, LindbladSpec
from wml.common.errors import ConfigError, WMLError

from .specs import (
    CHANNEL_MODES,
    MODES,
    ORDERINGS,
    LinearSpec,
    PolySpec,
    RunConfig,
    complex_from_json,
    matrix_from_json,
    matrix_to_json,
)

SpecInputs = LindbladSpec | LinearSpec | PolySpec

LOWER = np.array([[0, 1], [0, 0]], dtype=np.complex128)
RAISE = LOWER.T.copy()
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PLUS = np.full((2, 2), 0.5, dtype=np.complex128)


def _preset(name: str) -> SpecInputs:
    """Built-in qubit fixtures used by the defaults, the docs and the tests."""
    if name == "amplitude_damping":
        return LindbladSpec(jump_ops=(LOWER,))
    if name == "two_jump":
        return LindbladSpec(hamiltonian_terms=((0.5, PLUS),), jump_ops=(0.7 * LOWER, 0.5 * SIGMA_Z))
    if name == "linear_pair":
        return LinearSpec(((1.0, LOWER), (1.0, RAISE)))
    if name == "poly_12_1":
        return PolySpec((LOWER, SIGMA_X / np.sqrt(2)), (((1, 2), 1.0), ((1,), 1.0)))
    raise ConfigError(f"unknown preset {name!r}; choose one of {sorted(PRESETS)}")


PRESETS = {
    "amplitude_damping": "lindblad",
    "two_jump": "lindblad",
    "linear_pair": "linear",
    "poly_12_1": "poly",
}

ALGORITHM_KINDS = {1: "lindblad", 2: "lindblad", 3: "linear", 4: "poly"}


class ExperimentConfig:
    """
    Experiment file with an 'experiment' section and a tagged 'spec' section.

    Default location: ./.wml-bench/config.json (used when no path is given).
    Complex numbers are [re, im] pairs; matrices are row-major nested lists.
    """

    DEFAULT_CONFIG: dict[str, Any] = {
        "experiment": {
            "algorithm": 1,
            "t": 1.0,
            "n": 256,
            "n_values": [8, 16, 32, 64, 128, 256, 512, 1024],
            "mode": "expectation",
            "ordering": "palindromic",
            "orderings": ["forward", "palindromic"],
            "seed": 0,
            "tol": 1e-12,
            "threads": 1,
            "channel_mode": "auto",
            "substeps": None,
            "order": 8,
            "trajectories": 1,
            "prepare": "direct",
            "output_path": None,
        },
        "spec": {"kind": "lindblad", "preset": "two_jump"},
        "rho": None,
    }

    def __init__(self, data: dict[str, Any], config_path: Path):
        """
        Initialize config.

        Args:
            data: Config data dict (already merged with defaults)
            config_path: Path the config was loaded from or will be saved to
        """
        self.data = data
        self.config_path = config_path

    @staticmethod
    def default_path() -> Path:
        return Path.cwd() / ".wml-bench" / "config.json"

    @staticmethod
    def load(path: Path | None = None) -> "ExperimentConfig":
        """
        Load an experiment file.

        Args:
            path: Explicit config path; parse errors raise ConfigError.
                  When omitted, the default location is tried and unreadable
                  JSON falls back to defaults with a warning.

        Returns:
            ExperimentConfig instance (defaults if no file exists)
        """
        explicit = path is not None
        config_path = path if path is not None else ExperimentConfig.default_path()

        if not config_path.exists():
            if explicit:
                raise ConfigError(f"config file not found: {config_path}")
            return ExperimentConfig(copy.deepcopy(ExperimentConfig.DEFAULT_CONFIG), config_path)

        try:
            with open(config_path, encoding="utf-8") as f:
                data = json.load(f)
            if not isinstance(data, dict):
                raise ConfigError(f"{config_path} must contain a JSON object")
            merged = ExperimentConfig._merge_with_defaults(data)
        except (json.JSONDecodeError, OSError) as e:
            if explicit:
                raise ConfigError(f"Invalid JSON in {config_path}: {e}") from e
            print(f"Warning: Invalid JSON in {config_path}: {e}", file=sys.stderr)
            print("Using default config", file=sys.stderr)
            merged = copy.deepcopy(ExperimentConfig.DEFAULT_CONFIG)

        config = ExperimentConfig(merged, config_path)
        config.validate()
        return config

    @staticmethod
    def _merge_with_defaults(data: dict[str, Any]) -> dict[str, Any]:
        """
        Merge user config with defaults.

        The experiment section is merged key by key; a user spec replaces the
        default spec entirely.
        """
        merged = copy.deepcopy(ExperimentConfig.DEFAULT_CONFIG)
        unknown = set(data) - set(merged)
        if unknown:
            raise ConfigError(
                f"unknown top-level keys {sorted(unknown)}; expected experiment, spec, rho"
            )
        if "experiment" in data:
            extra = set(data["experiment"]) - set(merged["experiment"])
            if extra:
                raise ConfigError(f"unknown experiment keys {sorted(extra)}")
            merged["experiment"].update(data["experiment"])
        if "spec" in data:
            merged["spec"] = data["spec"]
        if "rho" in data:
            merged["rho"] = data["rho"]
        return merged

    def save(self) -> None:
        """
        Save config to file atomically.

        Uses temp file + rename for atomic writes.
        Creates parent directories if needed.
        """
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        temp_path = self.config_path.with_suffix(".tmp")
        with open(temp_path, "w", encoding="utf-8") as f:
            json.dump(self.data, f, indent=2, sort_keys=True)
            f.write("\n")
        temp_path.replace(self.config_path)

    @property
    def experiment(self) -> dict[str, Any]:
        return self.data["experiment"]

    @property
    def algorithm(self) -> int:
        return int(self.experiment["algorithm"])

    def apply_overrides(self, overrides: dict[str, Any]) -> None:
        """Overwrite experiment keys with non-None CLI values, then re-validate."""
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in self.experiment:
                raise ConfigError(f"unknown experiment key {key!r}")
            self.experiment[key] = value
        self.validate()

    def validate(self) -> None:
        """
        Check experiment values.

        Raises:
            ConfigError: any value is out of range
        """
        exp = self.experiment
        if exp["algorithm"] not in (1, 2, 3, 4):
            raise ConfigError(f"algorithm must be 1, 2, 3 or 4, got {exp['algorithm']!r}")
        if not isinstance(exp["t"], int | float) or exp["t"] < 0:
            raise ConfigError(f"t must be a nonnegative number, got {exp['t']!r}")
        n_values = exp["n_values"]
        if not isinstance(n_values, list) or not all(
            isinstance(n, int) and n >= 1 for n in n_values
        ):
            raise ConfigError("n_values must be a list of positive integers")
        if any(b <= a for a, b in zip(n_values, n_values[1:], strict=False)):
            raise ConfigError(f"n_values must be strictly increasing, got {n_values}")
        if not isinstance(exp["n"], int) or exp["n"] < 1:
            raise ConfigError(f"n must be a positive integer, got {exp['n']!r}")
        if exp["mode"] not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {exp['mode']!r}")
        if exp["ordering"] not in ORDERINGS:
            raise ConfigError(f"ordering must be one of {ORDERINGS}, got {exp['ordering']!r}")
        if not exp["orderings"] or any(o not in ORDERINGS for o in exp["orderings"]):
            raise ConfigError(f"orderings must be a non-empty subset of {ORDERINGS}")
        if exp["channel_mode"] not in CHANNEL_MODES:
            raise ConfigError(
                f"channel_mode must be one of {CHANNEL_MODES}, got {exp['channel_mode']!r}"
            )
        if not isinstance(exp["threads"], int) or exp["threads"] < 1:
            raise ConfigError(f"threads must be a positive integer, got {exp['threads']!r}")
        if not isinstance(exp["trajectories"], int) or exp["trajectories"] < 1:
            raise ConfigError(
                f"trajectories must be a positive integer, got {exp['trajectories']!r}"
            )
        tol = exp["tol"]
        if tol is not None and (not isinstance(tol, int | float) or not tol > 0):
            raise ConfigError(f"tol must be a positive number, got {tol!r}")
        seed = exp["seed"]
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
            raise ConfigError(f"seed must be a nonnegative integer or null, got {seed!r}")
        substeps = exp["substeps"]
        if substeps is not None and (not isinstance(substeps, int) or substeps < 1):
            raise ConfigError(f"substeps must be a positive integer or null, got {substeps!r}")
        if not isinstance(exp["order"], int) or exp["order"] < 1:
            raise ConfigError(f"order must be a positive integer, got {exp['order']!r}")
        if exp["prepare"] not in ("direct", "lcu"):
            raise ConfigError(f"prepare must be 'direct' or 'lcu', got {exp['prepare']!r}")
        kind = self.data["spec"].get("kind") if isinstance(self.data["spec"], dict) else None
        if kind != ALGORITHM_KINDS[exp["algorithm"]]:
            raise ConfigError(
                f"algorithm {exp['algorithm']} needs a '{ALGORITHM_KINDS[exp['algorithm']]}' spec, "
                f"got kind {kind!r}"
            )

    def run_config(self, n: int | None = None, **overrides: Any) -> RunConfig:
        """RunConfig for step count n (defaults to experiment.n)."""
        exp = self.experiment
        values = {
            "t": float(exp["t"]),
            "n": int(n if n is not None else exp["n"]),
            "mode": exp["mode"],
            "seed": exp["seed"],
            "ordering": exp["ordering"],
            "channel_mode": exp["channel_mode"],
            "substeps": exp["substeps"],
            "order": exp["order"],
            "tol": exp["tol"],
        }
        values.update(overrides)
        return RunConfig(**values)

    def build_spec(self) -> SpecInputs:
        """
        Construct the spec object from the 'spec' section.

        Raises:
            ConfigError: malformed section
            SpecError / ArgumentError: values violate the spec invariants
        """
        return spec_from_json(self.data["spec"])

    def build_rho(self, d: int) -> DensityMatrix:
        """Initial state from 'rho', or the maximally mixed state when unset."""
        raw = self.data.get("rho")
        if raw is None:
            return DensityMatrix(np.eye(d, dtype=np.complex128) / d)
        mat = matrix_from_json(raw, "rho")
        if mat.shape != (d, d):
            raise ConfigError(f"rho must be {d}x{d} to match the spec, got {mat.shape}")
        try:
            return DensityMatrix(mat)
        except WMLError as e:
            raise ConfigError(f"rho is not a density matrix: {e}") from e


def spec_from_json(section: Any) -> SpecInputs:
    """Decode a tagged spec section (kind = lindblad | linear | poly)."""
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("spec must be an object with a 'kind' field")
    kind = section["kind"]
    if "preset" in section:
        name = section["preset"]
        if PRESETS.get(name) != kind:
            raise ConfigError(f"preset {name!r} is not a '{kind}' spec; presets: {PRESETS}")
        return _preset(name)
    try:
        if kind == "lindblad":
            terms = tuple(
                (
                    complex_from_json(term["c"]).real,
                    matrix_from_json(term["sigma"], f"sigma_{j + 1}"),
                )
                for j, term in enumerate(section.get("hamiltonian", []))
            )
            jumps = tuple(
                matrix_from_json(op, f"L_{k + 1}") for k, op in enumerate(section.get("jumps", []))
            )
            return LindbladSpec(hamiltonian_terms=terms, jump_ops=jumps, d=section.get("d"))
        if kind == "linear":
            return LinearSpec(
                tuple(
                    (complex_from_json(term["c"]).real, matrix_from_json(term["L"], f"L_{k + 1}"))
                    for k, term in enumerate(section.get("terms", []))
                )
            )
        if kind == "poly":
            ops = tuple(
                matrix_from_json(op, f"L_{k + 1}")
                for k, op in enumerate(section.get("operators", []))
            )
            strings = tuple(
                (entry["s"], complex_from_json(entry["c"]).real)
                for entry in section.get("strings", [])
            )
            return PolySpec(ops, strings)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"malformed '{kind}' spec section: missing or invalid field {e}") from e
    raise ConfigError(f"spec kind must be lindblad, linear or poly, got {kind!r}")


def spec_to_json(spec: SpecInputs) -> dict[str, Any]:
    """Inverse of spec_from_json (without presets)."""
    if isinstance(spec, LindbladSpec):
        return {
            "kind": "lindblad",
            "d": spec.dim,
            "hamiltonian": [
                {"c": c, "sigma": matrix_to_json(s)} for c, s in spec.hamiltonian_terms
            ],
            "jumps": [matrix_to_json(op) for op in spec.jump_ops],
        }
    if isinstance(spec, LinearSpec):
        return {
            "kind": "linear",
            "terms": [{"c": c, "L": matrix_to_json(op)} for c, op in spec.terms],
        }
    return {
        "kind": "poly",
        "operators": [matrix_to_json(op) for op in spec.operators],
        "strings": [{"s": list(s), "c": c} for s, c in spec.strings],
    }

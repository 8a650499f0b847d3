"""
Configuration loader for sketch-and-solve experiments
"""
import json
import os
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from .data import SyntheticSpec

METHODS = ("exact", "gauss", "rademacher", "wh", "knn")
DEFAULT_M_GRID = [64, 128, 256, 512, 1024]


SECTIONS = ("project", "environment", "experiment")


def load_config(config_path: str = "config.json") -> Dict[str, Any]:
    """
    Load configuration from JSON file as dict

    Only the sections in SECTIONS are accepted, each a JSON object. The
    experiment section is validated later, after CLI flags are merged in.

    Raises:
        FileNotFoundError: Missing file
        ValueError: Malformed JSON or unknown sections (message names the file)
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Configuration file not found: {config_path}")
    with open(config_path, "r", encoding="utf-8") as f:
        try:
            config_data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{config_path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(config_data, dict):
        raise ValueError(f"{config_path}: top level must be an object")
    unknown = sorted(set(config_data) - set(SECTIONS))
    if unknown:
        raise ValueError(f"{config_path}: unknown sections {unknown}; expected {list(SECTIONS)}")
    for name in SECTIONS:
        if name in config_data and not isinstance(config_data[name], dict):
            raise ValueError(f"{config_path}: section '{name}' must be an object")
    return config_data


_config: Optional[Dict[str, Any]] = None


def get_config() -> Dict[str, Any]:
    """Get global configuration as dict (file named by SKETCH_MLC_CONFIG)"""
    global _config
    if _config is None:
        _config = load_config(os.environ.get("SKETCH_MLC_CONFIG", "config.json"))
    return _config


def reload_config() -> Dict[str, Any]:
    """Reload configuration from file"""
    global _config
    _config = None
    return get_config()


class ExperimentConfig(BaseModel):
    """Validated experiment settings; every CLI flag has a field here"""

    data: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    methods: List[str] = Field(default_factory=lambda: ["exact", "gauss", "wh"])
    m_grid: List[int] = Field(default_factory=lambda: list(DEFAULT_M_GRID))
    k: int = Field(default=10, ge=1)
    theta: float = Field(default=0.5, gt=0.0, le=1.0)
    nonempty: bool = False
    f1_empty_score: float = Field(default=1.0, ge=0.0, le=1.0)
    seeds: List[int] = Field(default_factory=lambda: [42])
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    out_json: Optional[str] = None
    out_csv: Optional[str] = None
    c1: float = Field(default=1.0, gt=0.0)
    delta: float = Field(default=0.5, gt=0.0, lt=1.0)
    L: float = Field(default=1.0, ge=0.0)
    epsilons: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.125, 0.0625])
    deltas: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.1])
    width_samples: int = Field(default=2000, ge=1)
    wh_mode: Literal["full", "pruned"] = "full"
    parallel_cells: bool = False

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, methods: List[str]) -> List[str]:
        if not methods:
            raise ValueError("methods must not be empty")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        return methods

    @field_validator("m_grid")
    @classmethod
    def _positive_grid(cls, grid: List[int]) -> List[int]:
        if not grid or any(m < 1 for m in grid):
            raise ValueError("m_grid must hold positive sketch sizes")
        return grid

    @model_validator(mode="after")
    def _one_source(self) -> "ExperimentConfig":
        if self.data is None and self.synthetic is None:
            raise ValueError("either a data path or a synthetic spec is required")
        return self

    @property
    def dataset_label(self) -> str:
        if self.data is not None:
            return os.path.splitext(os.path.basename(self.data))[0]
        assert self.synthetic is not None
        return self.synthetic.kind


def build_experiment_config(
    file_section: Optional[Dict[str, Any]], overrides: Dict[str, Any]
) -> ExperimentConfig:
    """
    Merge the config file's experiment section with CLI flags

    Args:
        file_section: 'experiment' dict from the JSON file (may be None)
        overrides: Flag values; None means "not given"

    Returns:
        Validated ExperimentConfig (flags win over file values)
    """
    merged: Dict[str, Any] = dict(file_section or {})
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "synthetic" and isinstance(value, dict) and isinstance(merged.get("synthetic"), dict):
            merged["synthetic"] = {**merged["synthetic"], **value}
        else:
            merged[key] = value
    # a source given on the command line replaces the file's source
    if overrides.get("synthetic") is not None and overrides.get("data") is None:
        merged.pop("data", None)
    elif merged.get("data") is not None:
        merged.pop("synthetic", None)
    return ExperimentConfig.model_validate(merged)

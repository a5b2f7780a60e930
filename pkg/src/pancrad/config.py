"""Strictly validated JSON pipeline configuration."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .exceptions import ConfigError, PancradError
from .gbdt import GbdtHyperParams
from .preprocess import GaussianParams
from .radiomics.discretize import TextureConfig
from .roi import PLANES


@dataclass(frozen=True)
class PreprocessConfig:
    sigma_mm: float = 0.5
    truncation: float = 3.0
    reorient: bool = True

    def gaussian(self):
        return GaussianParams(self.sigma_mm, self.truncation)


@dataclass(frozen=True)
class RoiConfig:
    expand_fraction: float = 0.10
    export_size: int = 224
    export_plane: str = "axial"

    def __post_init__(self):
        if self.expand_fraction < 0:
            raise PancradError("roi.expand_fraction must be >= 0")
        if self.export_size < 1:
            raise PancradError("roi.export_size must be >= 1")
        if self.export_plane not in PLANES:
            raise PancradError(f"roi.export_plane must be one of {sorted(PLANES)}")


@dataclass(frozen=True)
class EvalConfig:
    k: int = 5
    seed: int = 0


SECTIONS = {
    "preprocess": PreprocessConfig,
    "roi": RoiConfig,
    "radiomics": TextureConfig,
    "gbdt": GbdtHyperParams,
    "eval": EvalConfig,
}


def _coerce(section, name, value, default):
    key = f"{section}.{name}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            if not (name == "sigma_mm" and isinstance(value, list) and len(value) == 3):
                raise ConfigError(f"{key} must be a number")
            return tuple(float(v) for v in value)
        return float(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f"{key} must be a string")
    return value


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    roi: RoiConfig = field(default_factory=RoiConfig)
    radiomics: TextureConfig = field(default_factory=TextureConfig)
    gbdt: GbdtHyperParams = field(default_factory=GbdtHyperParams)
    eval: EvalConfig = field(default_factory=EvalConfig)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(doc) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        built = {}
        for section, kind in SECTIONS.items():
            values = doc.get(section, {})
            if not isinstance(values, dict):
                raise ConfigError(f"section {section!r} must be an object")
            defaults = {f.name: f.default for f in fields(kind)}
            unknown = set(values) - set(defaults)
            if unknown:
                raise ConfigError(f"unknown key(s) in {section}: {sorted(unknown)}")
            kwargs = {k: _coerce(section, k, v, defaults[k]) for k, v in values.items()}
            try:
                built[section] = kind(**kwargs)
            except PancradError as exc:
                raise ConfigError(f"invalid {section} settings: {exc}") from None
        try:
            built["preprocess"].gaussian()
        except PancradError as exc:
            raise ConfigError(f"invalid preprocess settings: {exc}") from None
        return cls(**built)

    @classmethod
    def load(cls, path=None):
        if path is None:
            return cls()
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(doc)

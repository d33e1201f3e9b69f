"""Experiment configuration documents.

A config is one JSON object::

    {"version": 1,
     "generator": {...GenConfig fields...},
     "model": {...ModelParams fields...},
     "policies": ["control", {"kind": "gradient_based", "n": 10, "L": 10}, ...],
     "experiment": {"sweeps": [{"axis": "nodes", "values": [100, 200]}],
                    "seeds": 20, "base_seed": 0}}

Unknown keys anywhere are errors; messages carry the line of the offending
key when the document came from a file.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .model import DomainError, ModelParams
from .netgen import ConfigError, GenConfig
from .policies import POLICY_KINDS, PolicySpec

CONFIG_VERSION = 1
AXES = ("nodes", "horizon", "edges_per_arrival")


@dataclass(frozen=True)
class Sweep:
    axis: str
    values: tuple

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}")
        vals = list(self.values)
        if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError(f"sweep values for {self.axis} must be non-empty and strictly increasing")


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GenConfig = field(default_factory=GenConfig)
    model: ModelParams = field(default_factory=ModelParams)
    policies: tuple = tuple(PolicySpec(k) for k in POLICY_KINDS)
    sweeps: tuple = ()
    seeds: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if self.seeds < 1:
            raise ConfigError("need at least one seed per cell")

    def cell(self, axis: str | None, value) -> tuple[GenConfig, ModelParams]:
        """Generator and model settings with the sweep axis applied."""
        gen, model = self.generator, self.model
        if axis == "nodes":
            gen = replace(gen, N=int(value))
        elif axis == "horizon":
            model = replace(model, horizon=int(value))
        elif axis == "edges_per_arrival":
            m0 = None if gen.m0 is None else max(gen.m0, int(value))
            gen = replace(gen, m=int(value), m0=m0)
        return gen, model


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return ""
    return f" (line {text.count(chr(10), 0, m.start()) + 1})"


def _take(section: dict, cls, where: str, text: str | None, convert=None):
    allowed = {f.name for f in fields(cls)}
    unknown = [k for k in section if k not in allowed]
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}{_line_of(text, unknown[0])}")
    kw = dict(section)
    for k, fn in (convert or {}).items():
        if k in kw:
            kw[k] = fn(kw[k])
    try:
        obj = cls(**kw)
    except (TypeError, DomainError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return obj


def config_from_dict(doc: dict, text: str | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    top = {"version", "generator", "model", "policies", "experiment"}
    for k in doc:
        if k not in top:
            raise ConfigError(f"unknown top-level key {k!r}{_line_of(text, k)}")
    if doc.get("version") != CONFIG_VERSION:
        raise ConfigError(f"version: expected {CONFIG_VERSION}, got {doc.get('version')!r}")
    gen = _take(doc.get("generator", {}), GenConfig, "generator", text,
                {"lambda_range": tuple, "health_intervals": lambda d: {k: tuple(v) for k, v in d.items()}})
    gen.validate()
    model = _take(doc.get("model", {}), ModelParams, "model", text)
    pols = []
    for i, p in enumerate(doc.get("policies", list(POLICY_KINDS))):
        if isinstance(p, str):
            p = {"kind": p}
        pols.append(_take(p, PolicySpec, f"policies[{i}]", text))
    exp = dict(doc.get("experiment", {}))
    allowed = {"sweeps", "axis", "values", "seeds", "base_seed"}
    for k in exp:
        if k not in allowed:
            raise ConfigError(f"experiment: unknown key {k!r}{_line_of(text, k)}")
    sweeps = []
    if "axis" in exp:
        sweeps.append(Sweep(exp["axis"], tuple(exp.get("values", ()))))
    for i, s in enumerate(exp.get("sweeps", [])):
        extra = set(s) - {"axis", "values"}
        if extra:
            k = sorted(extra)[0]
            raise ConfigError(f"experiment.sweeps[{i}]: unknown key {k!r}{_line_of(text, k)}")
        sweeps.append(Sweep(s["axis"], tuple(s["values"])))
    return ExperimentConfig(gen, model, tuple(pols), tuple(sweeps),
                            int(exp.get("seeds", 1)), int(exp.get("base_seed", 0)))


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        text = resources.files("netrvene").joinpath("data/default_config.json").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path or 'default config'}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return config_from_dict(doc, text)
    except ConfigError as exc:
        raise ConfigError(f"{path or 'default config'}: {exc}") from None

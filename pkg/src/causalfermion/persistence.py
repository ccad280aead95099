"""JSON result documents for optimizer runs and oracle configurations.

Complex matrices are stored as parallel ``real`` / ``imag`` nested lists.
Floats are written with their shortest round-trip representation, so loading
and saving a document reproduces it byte for byte except for ``created``.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .action import causal_action
from .operators import Configuration, symmetrize, validate_point
from .optimize import OptimizerSettings, RunResult

FORMAT_NAME = "causalfermion-result"
FORMAT_VERSION = 1


@dataclass
class RunSpec:
    n: int
    f: int
    m: int
    seeds: list
    settings: OptimizerSettings = field(default_factory=OptimizerSettings)
    mu0_override: float | None = None
    output_path: str | None = None
    export_plot: bool = False
    export_pairs: bool = False
    export_trace: bool = True

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.f < 2 * self.n:
            raise ValueError(f"need f >= 2n, got n={self.n}, f={self.f}")
        if not self.seeds:
            raise ValueError("need at least one seed")

    @property
    def shape(self):
        return (self.n, self.f, self.m)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "f": self.f,
            "m": self.m,
            "seeds": [int(s) for s in self.seeds],
            "settings": asdict(self.settings),
            "mu0": self.mu0_override,
            "export": {"plot": self.export_plot, "pairs": self.export_pairs, "trace": self.export_trace},
        }


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _version() -> str:
    from . import __version__

    return __version__


def config_to_dict(config: Configuration) -> dict:
    mats = config.matrices()
    return {
        "n": config.n,
        "f": config.f,
        "m": config.m,
        "weights": [float(w) for w in config.weights],
        "real": mats.real.tolist(),
        "imag": mats.imag.tolist(),
    }


def config_from_dict(d: dict) -> Configuration:
    mats = np.asarray(d["real"], dtype=float) + 1j * np.asarray(d["imag"], dtype=float)
    points = tuple(validate_point(symmetrize(a), int(d["n"])) for a in mats)
    return Configuration(points, np.asarray(d["weights"], dtype=float))


def run_to_dict(run: RunResult, include_trace: bool = True) -> dict:
    out = {
        "seed": run.seed,
        "final_action": run.final_action,
        "final_boundedness": run.final_boundedness,
        "iterations": list(run.iterations),
        "termination_reason": run.termination_reason.value,
        "stage_reasons": [r.value if r is not None else None for r in run.stage_reasons],
        "elapsed": run.elapsed,
        "params": run.final_params.to_vector().tolist(),
    }
    if include_trace:
        out["trace"] = [[int(s), int(i), float(v)] for s, i, v in run.action_trace]
    return out


def summarize_config(config: Configuration, export_pairs: bool = False) -> dict:
    report = causal_action(config)
    out = {
        "configuration": config_to_dict(config),
        "action": report.action,
        "boundedness": report.boundedness,
        "class_counts": report.class_counts(),
        "classification_tolerances": dict(report.metadata),
    }
    if export_pairs:
        out["pair_lagrangians"] = report.pair_lagrangians.tolist()
    return out


def new_document(origin: str, spec: dict, wall_time: float, body: dict) -> dict:
    doc = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "tool_version": _version(),
        "origin": origin,
        "created": _now(),
        "wall_time": float(wall_time),
        "spec": spec,
    }
    doc.update(body)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=True) + "\n"


def save_document(doc: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc))
    return path


def load_document(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"{path} is not a {FORMAT_NAME} document")
    return doc


def load_configuration(path) -> Configuration:
    return config_from_dict(load_document(path)["configuration"])

"""Flat key/value run configuration (JSON), overridable from the command line."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bench import default_lambdas
from .dynamics import DatasetSpec, EvalGrid, get_system
from .errors import ParseError, SchemaError
from .kernel import KernelParams
from .trajectory import QuadratureSpec


@dataclass
class RunConfig:
    """Every tunable of a run.

    Experiment defaults reconstruct the Duffing set-up: a 13 x 13 grid of
    initial conditions on [-3, 3]^2, T = 1 s, dt = 0.01 s and mu = 5 for both
    kernels. ``component`` is 1-based, matching the ``x1..xn`` column names.
    """

    system: str = "duffing"
    grid_min: list = field(default_factory=lambda: [-3.0, -3.0])
    grid_max: list = field(default_factory=lambda: [3.0, 3.0])
    grid_counts: list = field(default_factory=lambda: [13, 13])
    duration: float = 1.0
    dt: float = 0.01
    noise_std: float = 0.0
    seed: int = 0
    mu_d: float = 5.0
    mu_r: float = 5.0
    quad: str = "simpson"
    cutoff: float | None = None
    method: str = "sldmd"
    lam: float = 1e-2
    lambdas: list | None = None
    eval_grid_min: list = field(default_factory=lambda: [-3.0, -3.0])
    eval_grid_max: list = field(default_factory=lambda: [3.0, 3.0])
    eval_grid_counts: list = field(default_factory=lambda: [61, 61])
    component: int = 2

    # config files spell the regularisation parameter "lambda"
    _ALIASES = {"lambda": "lam"}

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, path, exc.lineno) from None
        if not isinstance(raw, dict):
            raise SchemaError(f"{path}: config must be a JSON object")
        return cls().updated(raw, source=str(path))

    def updated(self, values: dict, source: str = "overrides") -> "RunConfig":
        names = {f.name for f in dataclasses.fields(self)}
        clean = {}
        for key, val in values.items():
            key = self._ALIASES.get(key, key)
            if key not in names:
                raise SchemaError(f"{source}: unknown config key {key!r}")
            if val is not None:
                clean[key] = val
        return dataclasses.replace(self, **clean)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    def dataset_spec(self) -> DatasetSpec:
        return DatasetSpec(
            system=get_system(self.system),
            grid_min=tuple(self.grid_min),
            grid_max=tuple(self.grid_max),
            grid_counts=tuple(self.grid_counts),
            duration=float(self.duration),
            dt=float(self.dt),
            noise_std=float(self.noise_std),
            seed=int(self.seed),
        )

    def eval_grid(self) -> EvalGrid:
        return EvalGrid(tuple(self.eval_grid_min), tuple(self.eval_grid_max), tuple(self.eval_grid_counts))

    def params_d(self) -> KernelParams:
        return KernelParams(self.mu_d)

    def params_r(self) -> KernelParams:
        return KernelParams(self.mu_r)

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(self.quad)

    def sweep_lambdas(self) -> np.ndarray:
        if self.lambdas is None:
            return default_lambdas()
        return np.asarray(self.lambdas, dtype=float)

"""Regularisation sweep comparing OKR against SLDMD on a ground-truth system."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import DUFFING, EvalGrid, OdeSystem, true_field_grid
from .errors import InputError, OccDmdError
from .estimators import Model, fit_okr, fit_sldmd, occupation_features
from .kernel import KernelParams
from .operator_core import GramPack, build_gram_pack
from .trajectory import QuadratureSpec

log = logging.getLogger(__name__)

DEFAULT_EVAL_GRID = EvalGrid((-3.0, -3.0), (3.0, 3.0), (61, 61))


def default_lambdas() -> np.ndarray:
    return np.logspace(-10, 4, 25)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    okr_err: float
    sldmd_err: float


def _check_component(system: OdeSystem, component: int):
    if not 0 <= component < system.dim:
        raise InputError(f"component {component} out of range for a {system.dim}-dimensional system")


def mean_abs_field_error(model: Model, system: OdeSystem, component: int = 1,
                         grid: EvalGrid = DEFAULT_EVAL_GRID) -> float:
    """Mean over grid nodes of |f_c(x) - f_hat_c(x)| for 0-based component ``c``."""
    _check_component(system, component)
    if grid.size == 0:
        raise InputError("empty evaluation grid")
    pts, truth = true_field_grid(system, grid)
    est = occupation_features(model.trajs, pts, model.params_r, model.quad) @ model.A[component]
    return float(np.mean(np.abs(truth[:, component] - est)))


def zero_model_error(system: OdeSystem, component: int = 1, grid: EvalGrid = DEFAULT_EVAL_GRID) -> float:
    """The error of f_hat = 0, i.e. the level the OKR curve plateaus at for large lambda."""
    _check_component(system, component)
    _, truth = true_field_grid(system, grid)
    return float(np.mean(np.abs(truth[:, component])))


def run_lambda_sweep(dataset, params_d: KernelParams, params_r: KernelParams, quad: QuadratureSpec,
                     lambdas: Sequence[float], grid: EvalGrid = DEFAULT_EVAL_GRID, *,
                     system: OdeSystem = DUFFING, component: int = 1,
                     rel_cutoff: float | None = None, pack: GramPack | None = None) -> list[SweepRow]:
    """Fit SLDMD once and OKR for every lambda; rows keep the order of ``lambdas``.

    The feature matrix over the evaluation grid is shared by all fits, so
    each extra lambda costs one M x M solve.
    """
    lambdas = [float(lam) for lam in lambdas]
    if not lambdas:
        raise InputError("lambda list is empty")
    bad = [lam for lam in lambdas if not (np.isfinite(lam) and lam > 0)]
    if bad:
        raise InputError(f"sweep lambdas must be positive, got {bad}")
    _check_component(system, component)
    if pack is None:
        pack = build_gram_pack(dataset, params_d, params_r, quad)
    pts, truth = true_field_grid(system, grid)
    feats = occupation_features(pack.trajs, pts, pack.params_r, pack.quad)
    target = truth[:, component]

    def err(model):
        return float(np.mean(np.abs(target - feats @ model.A[component])))

    sldmd_err = err(fit_sldmd(pack, rel_cutoff))
    rows = []
    for lam in lambdas:
        try:
            okr_err = err(fit_okr(pack, lam))
        except OccDmdError as exc:
            raise type(exc)(f"lambda={lam:g}: {exc}") from exc
        log.debug("lambda=%g okr_err=%g sldmd_err=%g", lam, okr_err, sldmd_err)
        rows.append(SweepRow(lam, okr_err, sldmd_err))
    return rows

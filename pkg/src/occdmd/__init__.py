"""Occupation-kernel dynamic mode decomposition for continuous-time systems.

Builds finite-rank representations of the Liouville operator from trajectory
data, extracts its singular values and functions, and fits vector-field
models by singular Liouville DMD (SLDMD) or occupation kernel regression
(OKR).
"""

__version__ = "0.1.0"

from .errors import DivergenceError, InputError, OccDmdError, ParseError, RankError, SchemaError
from .kernel import KernelParams, eval_kernel, eval_kernel_diff
from .trajectory import (
    QuadratureSpec,
    Trajectory,
    endpoint_displacement,
    occupation_eval,
    occupation_inner,
    quadrature_weights,
)
from .operator_core import (
    GramPack,
    SvdResult,
    build_gram_pack,
    displacement_matrix,
    finite_rank_matrix,
    gram_kernel_diff,
    gram_occupation,
    pinv_svd,
)
from .dynamics import (
    DUFFING,
    DatasetSpec,
    EvalGrid,
    OdeSystem,
    generate_dataset,
    integrate_rk4,
    true_field_grid,
)
from .estimators import (
    Model,
    SingularTriple,
    eval_model,
    eval_singular_function,
    extract_modes,
    fit_okr,
    fit_sldmd,
    predict_flow,
    singular_triples,
)
from .bench import SweepRow, mean_abs_field_error, run_lambda_sweep

"""midkit: global additive surrogates of black-box models.

Fits a low-order additive decomposition of a prediction function by
constrained least squares on (features, predictions) data, then answers
interpretation queries: effect grids, importance, prediction breakdowns,
ICE curves and exact surrogate-derived Shapley values.
"""

import os as _os

# Honor the thread cap before numpy (and its BLAS) is first imported.
if "MIDR_THREADS" in _os.environ:
    _t = _os.environ["MIDR_THREADS"]
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _t)

__version__ = "0.1.0"

from .data import (  # noqa: E402
    Dataset,
    eval_builtin,
    gen_circle,
    gen_correlated_pair,
    gen_friedman1,
    load_csv,
    write_csv,
)
from .encoding import Encoder, build_encoder, encode  # noqa: E402
from .errors import (  # noqa: E402
    DataError,
    MidkitError,
    ModelFormatError,
    NumericalError,
    UndefinedRatioError,
    UnknownLevelError,
)
from .interpret import (  # noqa: E402
    breakdown,
    brute_force_shapley,
    ice,
    importance,
    mid_shapley,
    shap_importance,
)
from .model import (  # noqa: E402
    MidModel,
    centering_violation,
    effect,
    fit,
    load,
    predict,
    save,
    uvr,
)
from .pdp import h_statistic, pd_decompose, pd_values  # noqa: E402
from .solver import SolverConfig  # noqa: E402

__all__ = [
    "Dataset",
    "DataError",
    "Encoder",
    "MidModel",
    "MidkitError",
    "ModelFormatError",
    "NumericalError",
    "SolverConfig",
    "UndefinedRatioError",
    "UnknownLevelError",
    "breakdown",
    "brute_force_shapley",
    "build_encoder",
    "centering_violation",
    "effect",
    "encode",
    "eval_builtin",
    "fit",
    "gen_circle",
    "gen_correlated_pair",
    "gen_friedman1",
    "h_statistic",
    "ice",
    "importance",
    "load",
    "load_csv",
    "mid_shapley",
    "pd_decompose",
    "pd_values",
    "predict",
    "save",
    "shap_importance",
    "uvr",
    "write_csv",
]

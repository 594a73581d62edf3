"""Functional quantization toolkit for the Wiener process started from a
Gaussian point (Z_t = W_{k+t} on [0, T]).

Computes the covariance spectrum through its transcendental root equation,
builds optimal product codebooks on the eigenbasis expansion, verifies
distortion brackets by reproducible Monte Carlo, and evaluates the
(ln n)^(-1/2) rate asymptotics with explicit constants.
"""

__version__ = "0.1.0"

from .kernel import ProcessParams, covariance, trace
from .spectrum import (
    CSeqEntry,
    EigenPair,
    PaperNewtonResult,
    SolverError,
    Spectrum,
    c_sequence,
    eigenfunction,
    eigenvalue,
    newton_paper_mode,
    solve_root,
    spectrum_batch,
    tail_bounds,
)
from .gauss1d import (
    LloydError,
    ScalarNormalQuantizer,
    ScalarQuantizer,
    distortion_table,
    optimize,
    zador_limit,
)
from .funcquant import (
    Allocation,
    CoordinateQuantizer,
    FunctionalQuantizer,
    ProductQuantizer,
    QuantizedPath,
    allocate,
    build,
    codebook_paths,
    exact_distortion,
    nearest,
)
from .rate import (
    CInfEstimate,
    RateFit,
    RegVarying,
    SharpRate,
    THETA_RATIO,
    estimate_c_inf,
    fit_rate,
    remark_constant,
    sharp_constant,
    theta_bounds,
    theta_bounds_from_log,
)
from .mc import (
    McConfig,
    McEstimate,
    estimate_distortion,
    path_space_check,
    sample_coefficients,
)

__all__ = [
    "__version__",
    "ProcessParams",
    "covariance",
    "trace",
    "EigenPair",
    "Spectrum",
    "CSeqEntry",
    "PaperNewtonResult",
    "SolverError",
    "solve_root",
    "eigenvalue",
    "eigenfunction",
    "spectrum_batch",
    "c_sequence",
    "tail_bounds",
    "newton_paper_mode",
    "ScalarQuantizer",
    "ScalarNormalQuantizer",
    "LloydError",
    "optimize",
    "distortion_table",
    "zador_limit",
    "Allocation",
    "CoordinateQuantizer",
    "ProductQuantizer",
    "QuantizedPath",
    "FunctionalQuantizer",
    "allocate",
    "build",
    "exact_distortion",
    "codebook_paths",
    "nearest",
    "RegVarying",
    "SharpRate",
    "RateFit",
    "CInfEstimate",
    "THETA_RATIO",
    "sharp_constant",
    "theta_bounds",
    "theta_bounds_from_log",
    "remark_constant",
    "estimate_c_inf",
    "fit_rate",
    "McConfig",
    "McEstimate",
    "sample_coefficients",
    "estimate_distortion",
    "path_space_check",
]

"""Densities, samplers and numerical checks for the doubly noncentral singular
matrix variate beta type I and type II distributions.

Modules
-------
combinat   partitions, generalized Pochhammer symbols, multivariate gamma
zonal      zonal polynomials of one matrix argument
invariant  invariant polynomials of two matrix arguments
hypermat   hypergeometric functions of matrix argument
betadist   density evaluators
randmat    Haar, Wishart and beta samplers
verify     Monte Carlo and quadrature checks
cli        command line front end (``matbeta``)
"""

from .betadist import (
    beta1_central_density,
    beta1_dnc_density,
    beta1_ncA_density,
    beta1_ncB_density,
    beta1_symmetrised_density,
    beta2_central_density,
    beta2_dnc_density,
    beta2_ncA_density,
    beta2_ncB_density,
    beta2_symmetrised_density,
    eigen_joint_density,
    norm_const_ln,
)
from .combinat import LogValue, Partition
from .errors import MatbetaError, NumericalError, ValidationError
from .hypermat import SeriesControl
from .spectral import BetaParams, SpectralPoint

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "SpectralPoint",
    "SeriesControl",
    "LogValue",
    "Partition",
    "MatbetaError",
    "ValidationError",
    "NumericalError",
    "norm_const_ln",
    "beta1_central_density",
    "beta2_central_density",
    "beta1_dnc_density",
    "beta2_dnc_density",
    "beta1_ncA_density",
    "beta1_ncB_density",
    "beta2_ncA_density",
    "beta2_ncB_density",
    "beta1_symmetrised_density",
    "beta2_symmetrised_density",
    "eigen_joint_density",
]

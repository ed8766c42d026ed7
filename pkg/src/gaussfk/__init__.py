"""Gaussian Faber-Krahn toolkit.

Dirichlet eigenvalues of the Ornstein-Uhlenbeck operator on grid domains,
the halfspace eigenvalue profile, Ehrhard symmetrization, Gaussian Fraenkel
asymmetry and deficit experiments.
"""

__version__ = "0.1.0"

from .asymmetry import (AsymmetryResult, GaussianFraenkelAsymmetry, dense_asymmetry,
                        fraenkel_asymmetry, halfspace_for, transfer_lemma_check)
from .deficit import (DeficitRecord, MainConstant, conclusion_constant, deficit,
                      exponent_fit, f_weight, implied_constant_c, main_constant, prop31_bound)
from .ehrhard import (EhrhardSymmetrizer, polya_szego_check, symmetrize_function,
                      symmetrize_set)
from .eigen import (EigenResult, LevelProfile, OUDirichletEigensolver, dirichlet_energy,
                    first_eigenpair, level_profile, rayleigh)
from .exceptions import (ConnectivityWarning, DomainError, GridMismatchError,
                         InsufficientDataError, SolverError, UnsupportedDimensionError)
from .families import domain_family, shape_mask
from .gauss import (DomainMask, GaussianGrid, Halfspace, gauss_measure, gauss_perimeter,
                    iso_profile, phi, phi_inv, symdiff_measure)
from .profile import (FaberKrahnProfile, ProfileTable, g_inverse, g_profile, lambda_halfline,
                      local_lipschitz_L, shooting_eigenvalue)
from .sweep import DeficitAnalyzer, SweepConfig, sweep

__all__ = [
    "AsymmetryResult", "ConnectivityWarning", "DeficitAnalyzer", "DeficitRecord", "DomainError",
    "DomainMask", "EhrhardSymmetrizer", "EigenResult", "FaberKrahnProfile",
    "GaussianFraenkelAsymmetry", "GaussianGrid", "GridMismatchError", "Halfspace",
    "InsufficientDataError", "LevelProfile", "MainConstant", "OUDirichletEigensolver",
    "ProfileTable", "SolverError", "SweepConfig", "UnsupportedDimensionError",
    "conclusion_constant", "deficit", "dense_asymmetry", "dirichlet_energy", "domain_family",
    "exponent_fit", "f_weight", "first_eigenpair", "fraenkel_asymmetry", "g_inverse",
    "g_profile", "gauss_measure", "gauss_perimeter", "halfspace_for", "implied_constant_c",
    "iso_profile", "lambda_halfline", "level_profile", "local_lipschitz_L", "main_constant",
    "phi", "phi_inv", "polya_szego_check", "prop31_bound", "rayleigh", "shape_mask",
    "shooting_eigenvalue", "sweep", "symdiff_measure", "symmetrize_function", "symmetrize_set",
    "transfer_lemma_check",
]

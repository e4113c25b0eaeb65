"""Conditional-mutual-information feature selection as a binary quadratic problem.

Features are CAIM-discretized, a matrix ``Q`` with relevances ``I(X_i;Y)`` on
the diagonal and conditional relevances ``I(X_j;Y|X_i)`` off it is built, and
``k`` features are chosen by approximately maximizing ``x^T Q x`` over binary
``x`` with ``k`` ones.
"""

from .dataset import DataError, FoldPlan, RawDataset, load_csv, make_folds, write_csv
from .discretize import CaimDiscretizer, DiscretizationScheme, DiscretizedDataset, discretize
from .greedy import select_jmi, select_maxrel, select_mrmr
from .qmatrix import CmiMatrix, RedundancyMatrix, build_q, build_redundancy, objective, symmetrize
from .selector import CmiFeatureSelector, SelectionPipeline
from .solvers import (
    SolverConfig,
    SolverReport,
    Support,
    brute_force,
    solve,
    solve_linear,
    solve_lowrank,
    solve_spectral,
    solve_tpower,
)

__version__ = "0.1.0"

__all__ = [
    "CaimDiscretizer",
    "CmiFeatureSelector",
    "CmiMatrix",
    "DataError",
    "DiscretizationScheme",
    "DiscretizedDataset",
    "FoldPlan",
    "RawDataset",
    "RedundancyMatrix",
    "SelectionPipeline",
    "SolverConfig",
    "SolverReport",
    "Support",
    "brute_force",
    "build_q",
    "build_redundancy",
    "discretize",
    "load_csv",
    "make_folds",
    "objective",
    "select_jmi",
    "select_maxrel",
    "select_mrmr",
    "solve",
    "solve_linear",
    "solve_lowrank",
    "solve_spectral",
    "solve_tpower",
    "symmetrize",
    "write_csv",
]

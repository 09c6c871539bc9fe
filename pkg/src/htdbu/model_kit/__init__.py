"""From-scratch ML primitives: trees, forests, boosted trees, logistic
regression and Gaussian-copula mathematics."""

from .copula import CopulaModel, fit_copula, sample_copula
from .forest import RandomForest, fit_forest
from .gbt import GradientBoostedClassifier, GradientBoostedRegressor, fit_gbt
from .logistic import LogisticModel, LogisticParams, fit_logistic, predict_proba
from .numerics import cholesky, inv_normal_cdf, nearest_psd, normal_cdf
from .tree import DecisionTree, TreeParams, fit_tree

__all__ = [
    "CopulaModel",
    "DecisionTree",
    "GradientBoostedClassifier",
    "GradientBoostedRegressor",
    "LogisticModel",
    "LogisticParams",
    "RandomForest",
    "TreeParams",
    "cholesky",
    "fit_copula",
    "fit_forest",
    "fit_gbt",
    "fit_logistic",
    "fit_tree",
    "inv_normal_cdf",
    "nearest_psd",
    "normal_cdf",
    "predict_proba",
    "sample_copula",
]

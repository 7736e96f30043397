"""Regressors behind a single fit/predict contract."""
from .base import (ALGORITHMS, DEFAULTS, ImportanceVector, MissingFeatureError, ModelError,
                   RegressorSpec, TrainedModel, derive_seed, feature_importance, fit_model,
                   predict)
from .ensemble import fit_baseline_column, fit_voting
from .linear import (ConvergenceWarning, fit_lasso, fit_linear_svr, fit_ols, lasso_kkt_residual,
                     svr_objective)
from .trees import Tree, TreeNode, fit_cart, fit_gbt, fit_random_forest, gbt_round_objective

__all__ = [
    "ALGORITHMS", "DEFAULTS", "ConvergenceWarning", "ImportanceVector", "MissingFeatureError",
    "ModelError", "RegressorSpec", "TrainedModel", "Tree", "TreeNode", "derive_seed",
    "feature_importance", "fit_baseline_column", "fit_cart", "fit_gbt", "fit_lasso",
    "fit_linear_svr", "fit_model", "fit_ols", "fit_random_forest", "fit_voting",
    "gbt_round_objective", "lasso_kkt_residual", "predict", "svr_objective",
]

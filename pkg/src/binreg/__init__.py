"""House-price regression with target binning as an extra feature."""
from .dataset import ColumnRole, Table, read_csv, split_train_test, synthesize_dataset, write_csv
from .eval import compare_models, kfold_cv, metrics
from .features import BinSpec, target_binning_fit, target_binning_transform
from .models import RegressorSpec, TrainedModel, fit_model, predict

__version__ = "0.1.0"

__all__ = [
    "BinSpec", "ColumnRole", "RegressorSpec", "Table", "TrainedModel", "compare_models",
    "fit_model", "kfold_cv", "metrics", "predict", "read_csv", "split_train_test",
    "synthesize_dataset", "target_binning_fit", "target_binning_transform", "write_csv",
]

"""
Penalized spline logistic regression of coverage indicators on summaries.
"""

from .spline_logistic import (
    SplineBasis,
    RegressionFit,
    Prediction,
    fit,
    predict,
    predict_many,
    save_fit,
    load_fit,
)

__all__ = [
    "SplineBasis",
    "RegressionFit",
    "Prediction",
    "fit",
    "predict",
    "predict_many",
    "save_fit",
    "load_fit",
]

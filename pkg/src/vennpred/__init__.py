"""Venn prediction over small neural networks.

Calibrated lower/upper probability bounds for binary classification,
with class-rebalancing taxonomies, batch and online evaluation
protocols, and calibration metrics.
"""

__version__ = "0.1.0"

from .dataset import (
    CsvFormatError,
    Dataset,
    Example,
    Standardizer,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
)
from .featsel import FeatureScore, score_features
from .harness import BatchPlan, BatchResult, OnlineTrace, run_batch, run_online
from .metrics import (
    MetricReport,
    brier,
    confusion_rates,
    cross_entropy,
    miscalibration_pvalue,
    poisson_binomial_pmf,
    reliability,
)
from .network import MLPBinaryClassifier, MLPParams, NumericalError, TrainConfig
from .rebalance import RebalanceDegeneracyWarning, rebalance
from .venn import AnnBinTaxonomy, Taxonomy, VennOutput, VennPredictor, venn_predict

__all__ = [
    "AnnBinTaxonomy",
    "BatchPlan",
    "BatchResult",
    "CsvFormatError",
    "Dataset",
    "Example",
    "FeatureScore",
    "MLPBinaryClassifier",
    "MLPParams",
    "MetricReport",
    "NumericalError",
    "OnlineTrace",
    "RebalanceDegeneracyWarning",
    "Standardizer",
    "SyntheticSpec",
    "Taxonomy",
    "TrainConfig",
    "VennOutput",
    "VennPredictor",
    "brier",
    "confusion_rates",
    "cross_entropy",
    "generate_synthetic",
    "load_csv",
    "miscalibration_pvalue",
    "poisson_binomial_pmf",
    "rebalance",
    "reliability",
    "run_batch",
    "run_online",
    "score_features",
    "venn_predict",
]

"""soupkit: checkpoint soups, macro metrics, and ensemble diversity analysis.

Average trained checkpoints in weight space (uniformly or with greedy
validation-guided selection), evaluate the result with macro-averaged
metrics, and map model diversity through symmetric cross-entropy
distances and a classical MDS embedding.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .datasets import (
    LabeledDataset,
    PredictionMatrix,
    load_dataset_csv,
    load_predictions_csv,
    save_dataset_csv,
    save_predictions_csv,
)
from .diversity import (
    DistanceMatrix,
    DiversityBundle,
    Embedding,
    classical_mds,
    distance_matrix,
    diversity_report,
    soft_vote,
    stress,
    sym_cross_entropy,
)
from .metrics import (
    ClassMetrics,
    MetricsReport,
    accuracy,
    confusion_matrix,
    format_delta,
    macro_metrics,
    select_best_checkpoint,
)
from .mlp import MlpEvaluator, MlpSpec, forward, forward_logits, random_checkpoint, softmax
from .soup import (
    CandidatePool,
    Snapshot,
    SoupSelection,
    TraceEntry,
    build_candidate_pool,
    greedy_soup,
    parse_soup_report,
    soup_report,
    uniform_soup,
)
from .tensor_store import (
    Checkpoint,
    TensorSchema,
    linear_combine,
    load_checkpoint,
    save_checkpoint,
    schema_check,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CandidatePool",
    "Checkpoint",
    "ClassMetrics",
    "DistanceMatrix",
    "DiversityBundle",
    "Embedding",
    "KERNEL_BACKEND",
    "LabeledDataset",
    "MetricsReport",
    "MlpEvaluator",
    "MlpSpec",
    "PredictionMatrix",
    "Snapshot",
    "SoupSelection",
    "TensorSchema",
    "TraceEntry",
    "accuracy",
    "build_candidate_pool",
    "classical_mds",
    "confusion_matrix",
    "distance_matrix",
    "diversity_report",
    "format_delta",
    "forward",
    "forward_logits",
    "greedy_soup",
    "linear_combine",
    "load_checkpoint",
    "load_dataset_csv",
    "load_predictions_csv",
    "macro_metrics",
    "parse_soup_report",
    "random_checkpoint",
    "save_checkpoint",
    "save_dataset_csv",
    "save_predictions_csv",
    "schema_check",
    "select_best_checkpoint",
    "soft_vote",
    "softmax",
    "soup_report",
    "stress",
    "sym_cross_entropy",
    "uniform_soup",
]

"""Harness for scoring LLM code-generation sessions with the inference index.

Records interactive or scripted evaluation sessions (attempts, queries,
server-busy responses, response times), scores generated-model predictions
against ground truth with a forecasting error-metric suite, and composes
everything into the scalar inference index. Ships a from-scratch LSTM
forecaster as the expert baseline.
"""

__version__ = "0.1.0"

from .indices import IndexConfig, InIReport, SessionStats, evaluate
from .metrics import MetricReport, metric_report

__all__ = [
    "IndexConfig",
    "InIReport",
    "SessionStats",
    "evaluate",
    "MetricReport",
    "metric_report",
    "__version__",
]

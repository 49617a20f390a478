"""Search spaces, objectives, baseline optimizers and the experiment runner."""

from tt_automl.trace import EvalFlag, OptimizationTrace, TraceEntry

__all__ = ["EvalFlag", "OptimizationTrace", "TraceEntry"]
